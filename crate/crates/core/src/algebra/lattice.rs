//! Integer lattices and LLL reduction with exact rational Gram–Schmidt.

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::{AResult, AlgebraError};

/// A lattice given by a basis of integer row vectors (rows independent).
#[derive(Clone, Debug, PartialEq)]
pub struct IntegerLattice {
    pub basis: Vec<Vec<BigInt>>,
}

impl IntegerLattice {
    pub fn new(basis: Vec<Vec<BigInt>>) -> AResult<Self> {
        if basis.is_empty() {
            return Err(AlgebraError::DependentRows);
        }
        let w = basis[0].len();
        if basis.iter().any(|r| r.len() != w) {
            return Err(AlgebraError::Other("ragged lattice basis".into()));
        }
        Ok(IntegerLattice { basis })
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Gram determinant det(B·Bᵀ) — invariant of the lattice itself.
    pub fn gram_determinant(&self) -> BigRational {
        let n = self.basis.len();
        let mut g = vec![vec![BigRational::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                g[i][j] = BigRational::from_integer(dot(&self.basis[i], &self.basis[j]));
            }
        }
        // Fraction-free-ish Gaussian elimination over ℚ.
        let mut det = BigRational::one();
        for c in 0..n {
            let mut piv = None;
            for r in c..n {
                if !g[r][c].is_zero() {
                    piv = Some(r);
                    break;
                }
            }
            let Some(piv) = piv else { return BigRational::zero() };
            if piv != c {
                g.swap(c, piv);
                det = -det;
            }
            det *= g[c][c].clone();
            let pinv = g[c][c].recip();
            for r in c + 1..n {
                if g[r][c].is_zero() {
                    continue;
                }
                let f = &g[r][c] * &pinv;
                for k in c..n {
                    let t = &g[c][k] * &f;
                    g[r][k] -= t;
                }
            }
        }
        det
    }
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// LLL reduction with δ = 3/4 and exact rational Gram–Schmidt.
/// Errors on dependent rows. The output basis spans the same lattice.
pub fn lll_reduce(lattice: &IntegerLattice) -> AResult<IntegerLattice> {
    let mut b = lattice.basis.clone();
    let n = b.len();
    let delta = BigRational::new(BigInt::from(3), BigInt::from(4));
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));

    // Gram–Schmidt data, updated incrementally: star vectors, their squared
    // norms, and the μ coefficients.
    let mut star: Vec<Vec<BigRational>> = vec![Vec::new(); n];
    let mut bstar = vec![BigRational::zero(); n];
    let mut mu = vec![vec![BigRational::zero(); n]; n];

    let dot_ir = |x: &[BigInt], y: &[BigRational]| -> BigRational {
        x.iter()
            .zip(y)
            .map(|(a, b)| BigRational::from_integer(a.clone()) * b)
            .sum()
    };

    // Recompute GS row i from b[i] and star[0..i].
    let recompute_row = |b: &Vec<Vec<BigInt>>,
                         star: &mut Vec<Vec<BigRational>>,
                         bstar: &mut Vec<BigRational>,
                         mu: &mut Vec<Vec<BigRational>>,
                         i: usize|
     -> AResult<()> {
        let mut v: Vec<BigRational> = b[i]
            .iter()
            .map(|x| BigRational::from_integer(x.clone()))
            .collect();
        for j in 0..i {
            if bstar[j].is_zero() {
                return Err(AlgebraError::DependentRows);
            }
            let m = dot_ir(&b[i], &star[j]) / &bstar[j];
            for (vk, sk) in v.iter_mut().zip(star[j].iter()) {
                *vk -= &m * sk;
            }
            mu[i][j] = m;
        }
        bstar[i] = v.iter().map(|x| x * x).sum();
        if bstar[i].is_zero() {
            return Err(AlgebraError::DependentRows);
        }
        star[i] = v;
        Ok(())
    };

    for i in 0..n {
        recompute_row(&b, &mut star, &mut bstar, &mut mu, i)?;
    }

    let mut k = 1usize;
    while k < n {
        // Size reduction of b_k; star[k] is unchanged by these updates.
        for j in (0..k).rev() {
            if mu[k][j].abs() > half {
                let q = round_rational(&mu[k][j]);
                if !q.is_zero() {
                    for idx in 0..b[k].len() {
                        let t = &q * &b[j][idx];
                        b[k][idx] -= t;
                    }
                    let qr = BigRational::from_integer(q);
                    for i in 0..j {
                        let t = &qr * &mu[j][i];
                        mu[k][i] -= t;
                    }
                    mu[k][j] -= qr;
                }
            }
        }
        // Lovász condition.
        let rhs = (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &bstar[k - 1];
        if bstar[k] >= rhs {
            k += 1;
        } else {
            b.swap(k, k - 1);
            // Rows k−1 and k change; higher rows only in columns k−1, k.
            recompute_row(&b, &mut star, &mut bstar, &mut mu, k - 1)?;
            recompute_row(&b, &mut star, &mut bstar, &mut mu, k)?;
            for r in k + 1..n {
                for col in [k - 1, k] {
                    mu[r][col] = dot_ir(&b[r], &star[col]) / &bstar[col];
                }
            }
            k = k.max(2) - 1;
        }
    }
    Ok(IntegerLattice { basis: b })
}

/// Nearest integer to a rational (ties toward zero after adding ½ sign-wise).
fn round_rational(x: &BigRational) -> BigInt {
    let two = BigInt::from(2);
    let num = x.numer() * &two + x.denom() * if x.is_negative() { -1 } else { 1 };
    num / (x.denom() * &two)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(rows: &[&[i64]]) -> IntegerLattice {
        IntegerLattice::new(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn norm2(v: &[BigInt]) -> BigInt {
        v.iter().map(|x| x * x).sum()
    }

    #[test]
    fn identity_is_fixed() {
        let l = lat(&[&[1, 0], &[0, 1]]);
        let r = lll_reduce(&l).unwrap();
        assert_eq!(r.basis, l.basis);
    }

    #[test]
    fn finds_short_vector() {
        // Oracle: exhaustive short-vector search shows min norm² = 5 here.
        let l = lat(&[&[201, 0], &[100, 1]]);
        let mut best = BigInt::from(i64::MAX);
        for a in -300i64..=300 {
            for b in -300i64..=300 {
                if a == 0 && b == 0 {
                    continue;
                }
                let v0 = BigInt::from(201 * a + 100 * b);
                let v1 = BigInt::from(b);
                let n = &v0 * &v0 + &v1 * &v1;
                if n < best {
                    best = n;
                }
            }
        }
        assert_eq!(best, BigInt::from(5));
        let r = lll_reduce(&l).unwrap();
        assert!(r.basis.iter().any(|v| norm2(v) <= BigInt::from(5)));
        // Same lattice: Gram determinant preserved.
        assert_eq!(l.gram_determinant(), r.gram_determinant());
    }

    #[test]
    fn determinant_invariance_rank3() {
        let l = lat(&[&[4, 0, 0], &[2, 2, 0], &[1, 1, 1]]);
        let r = lll_reduce(&l).unwrap();
        // det = ±8 → Gram determinant 64.
        assert_eq!(l.gram_determinant(), BigRational::from_integer(BigInt::from(64)));
        assert_eq!(r.gram_determinant(), BigRational::from_integer(BigInt::from(64)));
    }

    #[test]
    fn dependent_rows_error() {
        let l = lat(&[&[1, 2], &[2, 4]]);
        assert!(matches!(lll_reduce(&l), Err(AlgebraError::DependentRows)));
    }
}
