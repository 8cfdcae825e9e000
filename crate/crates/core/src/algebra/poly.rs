//! Dense univariate polynomials over an exact coefficient domain.
//! Coefficients are stored lowest degree first with no trailing zeros.

use std::fmt;

use crate::error::{AResult, AlgebraError};

use super::{require_big_characteristic, Field};

#[derive(Clone, PartialEq)]
pub struct Polynomial<F: Field> {
    c: Vec<F>,
}

impl<F: Field> Polynomial<F> {
    pub fn zero() -> Self {
        Polynomial { c: Vec::new() }
    }

    pub fn from_coeffs(mut c: Vec<F>) -> Self {
        while c.last().map_or(false, |x| x.is_zero()) {
            c.pop();
        }
        Polynomial { c }
    }

    pub fn constant(c: F) -> Self {
        Polynomial::from_coeffs(vec![c])
    }

    pub fn one_like(sample: &F) -> Self {
        Polynomial::constant(sample.one_like())
    }

    /// The monomial x, in the domain of `sample`.
    pub fn x_like(sample: &F) -> Self {
        Polynomial::from_coeffs(vec![sample.zero_like(), sample.one_like()])
    }

    /// c · x^n
    pub fn monomial(c: F, n: usize) -> Self {
        if c.is_zero() {
            return Polynomial::zero();
        }
        let mut v = vec![c.zero_like(); n];
        v.push(c);
        Polynomial { c: v }
    }

    /// x − a
    pub fn linear_root(a: &F) -> Self {
        Polynomial::from_coeffs(vec![a.neg(), a.one_like()])
    }

    pub fn coeffs(&self) -> &[F] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> F {
        self.c
            .get(i)
            .cloned()
            .unwrap_or_else(|| self.sample().zero_like())
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.c.is_empty() {
            None
        } else {
            Some(self.c.len() - 1)
        }
    }

    /// Degree with the zero polynomial counted as 0 (bookkeeping helper).
    pub fn deg0(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn leading(&self) -> Option<&F> {
        self.c.last()
    }

    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }

    fn sample(&self) -> &F {
        self.c.first().expect("zero polynomial has no domain sample")
    }

    pub fn add(&self, rhs: &Self) -> Self {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let n = self.c.len().max(rhs.c.len());
        let z = self.sample().zero_like();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.c.get(i).unwrap_or(&z);
            let b = rhs.c.get(i).unwrap_or(&z);
            out.push(a.add(b));
        }
        Polynomial::from_coeffs(out)
    }

    pub fn neg(&self) -> Self {
        Polynomial { c: self.c.iter().map(|x| x.neg()).collect() }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let z = self.sample().zero_like();
        let mut out = vec![z; self.c.len() + rhs.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.c.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Polynomial::from_coeffs(out)
    }

    pub fn scale(&self, k: &F) -> Self {
        Polynomial::from_coeffs(self.c.iter().map(|x| x.mul(k)).collect())
    }

    /// Multiply by x^n.
    pub fn shift_up(&self, n: usize) -> Self {
        if self.is_zero() || n == 0 {
            return self.clone();
        }
        let mut v = vec![self.sample().zero_like(); n];
        v.extend(self.c.iter().cloned());
        Polynomial { c: v }
    }

    pub fn pow(&self, mut e: usize) -> Self {
        if e == 0 {
            return Polynomial::one_like(self.sample());
        }
        let mut base = self.clone();
        let mut acc: Option<Self> = None;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    Some(a) => a.mul(&base),
                    None => base.clone(),
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc.unwrap()
    }

    pub fn eval(&self, x: &F) -> F {
        let mut acc = x.zero_like();
        for c in self.c.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    pub fn compose(&self, inner: &Self) -> Self {
        let mut acc = Polynomial::zero();
        for c in self.c.iter().rev() {
            acc = acc.mul(inner).add(&Polynomial::constant(c.clone()));
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.c.len() <= 1 {
            return Polynomial::zero();
        }
        let out = self
            .c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.mul(&c.from_int(i as i64)))
            .collect();
        Polynomial::from_coeffs(out)
    }

    /// Euclidean division; requires an invertible leading coefficient.
    pub fn divrem(&self, d: &Self) -> AResult<(Self, Self)> {
        let dd = d.degree().ok_or(AlgebraError::DivisionByZero)?;
        let lc_inv = d.leading().unwrap().inv()?;
        let mut rem = self.clone();
        let mut quo: Vec<F> = Vec::new();
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let q = rem.leading().unwrap().mul(&lc_inv);
            let k = rd - dd;
            if quo.len() < k + 1 {
                quo.resize(k + 1, q.zero_like());
            }
            quo[k] = quo[k].add(&q);
            rem = rem.sub(&d.shift_up(k).scale(&q));
        }
        Ok((Polynomial::from_coeffs(quo), rem))
    }

    /// Exact division; errors if the remainder is nonzero.
    pub fn div_exact(&self, d: &Self) -> AResult<Self> {
        let (q, r) = self.divrem(d)?;
        if r.is_zero() {
            Ok(q)
        } else {
            Err(AlgebraError::Other("inexact polynomial division".into()))
        }
    }

    pub fn monic(&self) -> AResult<Self> {
        let lc = self.leading().ok_or(AlgebraError::DivisionByZero)?;
        Ok(self.scale(&lc.inv()?))
    }

    /// Monic gcd; gcd(f, 0) = monic f, gcd(0, 0) = 0.
    pub fn gcd(&self, rhs: &Self) -> Self {
        if !self.is_zero() && !rhs.is_zero() {
            if let Some(g) = F::poly_gcd_fast(self, rhs) {
                return g;
            }
        }
        let mut a = self.clone();
        let mut b = rhs.clone();
        while !b.is_zero() {
            let r = a.divrem(&b).expect("gcd over a field").1;
            a = std::mem::replace(&mut b, r);
        }
        if a.is_zero() {
            a
        } else {
            a.monic().unwrap()
        }
    }

    /// Extended gcd: (g, u, v) with u·self + v·rhs = g and g monic.
    pub fn egcd(&self, rhs: &Self) -> (Self, Self, Self) {
        let sample = self
            .leading()
            .or_else(|| rhs.leading())
            .expect("egcd of two zero polynomials")
            .clone();
        let mut r0 = self.clone();
        let mut r1 = rhs.clone();
        let mut u0 = Polynomial::one_like(&sample);
        let mut u1 = Polynomial::zero();
        let mut v0 = Polynomial::zero();
        let mut v1 = Polynomial::one_like(&sample);
        while !r1.is_zero() {
            let (q, r2) = r0.divrem(&r1).expect("egcd over a field");
            let u2 = u0.sub(&q.mul(&u1));
            let v2 = v0.sub(&q.mul(&v1));
            r0 = std::mem::replace(&mut r1, r2);
            u0 = std::mem::replace(&mut u1, u2);
            v0 = std::mem::replace(&mut v1, v2);
        }
        if r0.is_zero() {
            return (r0, u0, v0);
        }
        let lc_inv = r0.leading().unwrap().inv().unwrap();
        (r0.scale(&lc_inv), u0.scale(&lc_inv), v0.scale(&lc_inv))
    }

    pub fn is_squarefree(&self) -> AResult<bool> {
        let d = match self.degree() {
            None | Some(0) => return Ok(true),
            Some(d) => d,
        };
        require_big_characteristic(self.sample(), d)?;
        Ok(self.gcd(&self.derivative()).is_constant())
    }

    /// Yun's squarefree decomposition. Returns (factor, multiplicity) pairs
    /// with strictly increasing multiplicities; factors are monic, squarefree
    /// and pairwise coprime, and lc·∏ factorᵐ reassembles the input.
    pub fn squarefree_decomposition(&self) -> AResult<Vec<(Self, usize)>> {
        let deg = self.degree().ok_or(AlgebraError::DivisionByZero)?;
        require_big_characteristic(self.sample(), deg)?;
        if deg == 0 {
            return Ok(Vec::new());
        }
        let f = self.monic()?;
        let df = f.derivative();
        let a0 = f.gcd(&df);
        let mut b = f.div_exact(&a0)?;
        let c = df.div_exact(&a0)?;
        let mut d = c.sub(&b.derivative());
        let mut out = Vec::new();
        let mut mult = 1usize;
        while !b.is_constant() {
            let g = b.gcd(&d);
            if !g.is_constant() {
                out.push((g.clone(), mult));
            }
            b = b.div_exact(&g)?;
            let c_next = d.div_exact(&g)?;
            d = c_next.sub(&b.derivative());
            mult += 1;
        }
        Ok(out)
    }

    /// Squarefree part (the radical) of a nonzero polynomial, monic.
    pub fn radical(&self) -> AResult<Self> {
        let parts = self.squarefree_decomposition()?;
        let sample = self.leading().unwrap();
        Ok(parts
            .into_iter()
            .fold(Polynomial::one_like(sample), |acc, (f, _)| acc.mul(&f)))
    }

    /// Res(self, rhs) = lc(self)^deg(rhs) · ∏_{self(α)=0} rhs(α).
    pub fn resultant(&self, rhs: &Self) -> F {
        s_res(rhs, self)
    }

    /// disc(f) = (−1)^(d(d−1)/2) Res(f, f′) / lc(f)
    pub fn discriminant(&self) -> AResult<F> {
        let d = self.degree().ok_or(AlgebraError::DivisionByZero)?;
        if d == 0 {
            return Err(AlgebraError::Other("discriminant of a constant".into()));
        }
        let r = self.resultant(&self.derivative());
        let s = r.div(self.leading().unwrap())?;
        Ok(if (d * (d - 1) / 2) % 2 == 1 { s.neg() } else { s })
    }

    pub fn map_coeffs<G: Field>(&self, f: impl Fn(&F) -> G) -> Polynomial<G> {
        Polynomial::from_coeffs(self.c.iter().map(f).collect())
    }
}

/// S(a, b) := lc(b)^deg(a) · ∏_{b(β)=0} a(β), so that
/// self.resultant(rhs) = S(rhs, self).
fn s_res<F: Field>(a: &Polynomial<F>, b: &Polynomial<F>) -> F {
    let sample = a
        .leading()
        .or_else(|| b.leading())
        .expect("resultant of zero polynomials")
        .clone();
    if a.is_zero() || b.is_zero() {
        return sample.zero_like();
    }
    let da = a.degree().unwrap();
    let db = b.degree().unwrap();
    if db == 0 {
        return b.leading().unwrap().pow_u(da as u64);
    }
    if da == 0 {
        return a.leading().unwrap().pow_u(db as u64);
    }
    if da < db {
        let s = s_res(b, a);
        return if (da * db) % 2 == 1 { s.neg() } else { s };
    }
    let r = a.divrem(b).expect("resultant over a field").1;
    if r.is_zero() {
        return sample.zero_like();
    }
    let dr = r.degree().unwrap();
    let factor = b.leading().unwrap().pow_u((da - dr) as u64);
    factor.mul(&s_res(&r, b))
}

impl<F: Field> fmt::Debug for Polynomial<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<F: Field> fmt::Display for Polynomial<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.c.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.c.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})*x")?,
                _ => write!(f, "({c})*x^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::fp::Fp;
    use crate::algebra::rat::Rat;

    fn qpoly(v: &[i64]) -> Polynomial<Rat> {
        Polynomial::from_coeffs(v.iter().map(|&x| Rat::from_int(x)).collect())
    }

    #[test]
    fn divrem_roundtrip() {
        let a = qpoly(&[1, 0, -3, 0, 1]);
        let b = qpoly(&[2, 1]);
        let (q, r) = a.divrem(&b).unwrap();
        assert_eq!(q.mul(&b).add(&r), a);
    }

    #[test]
    fn squarefree_example() {
        // x²(x−1)³ → [(x,2), (x−1,3)]
        let x = qpoly(&[0, 1]);
        let xm1 = qpoly(&[-1, 1]);
        let f = x.pow(2).mul(&xm1.pow(3));
        let d = f.squarefree_decomposition().unwrap();
        assert_eq!(d, vec![(x, 2), (xm1, 3)]);
    }

    #[test]
    fn squarefree_identity_case() {
        let f = qpoly(&[3, 1, 1]);
        let d = f.squarefree_decomposition().unwrap();
        assert_eq!(d, vec![(f.clone(), 1)]);
    }

    #[test]
    fn char_too_small_rejected() {
        let s = Fp::new(0, 5).unwrap();
        let f = Polynomial::from_coeffs(vec![s.from_int(1); 7]);
        assert!(matches!(
            f.squarefree_decomposition(),
            Err(AlgebraError::CharacteristicTooSmall { .. })
        ));
    }

    #[test]
    fn egcd_bezout() {
        let a = qpoly(&[1, 2, 1]);
        let b = qpoly(&[1, 1]);
        let (g, u, v) = a.egcd(&b);
        assert_eq!(u.mul(&a).add(&v.mul(&b)), g);
        assert_eq!(g, b.monic().unwrap());
    }

    #[test]
    fn discriminants() {
        // disc(x²+3x+2) = 1, disc(x³+px+q) = −4p³−27q²
        assert_eq!(qpoly(&[2, 3, 1]).discriminant().unwrap(), Rat::from_int(1));
        let f = qpoly(&[5, -3, 0, 1]);
        assert_eq!(
            f.discriminant().unwrap(),
            Rat::from_int(-4 * (-27) - 27 * 25)
        );
    }

    #[test]
    fn resultant_product_formula() {
        // res((x−1)(x−2), (x−3)(x−4)) over ℚ: ∏ (αᵢ−βⱼ) = (1−3)(1−4)(2−3)(2−4) = 12
        let a = qpoly(&[-1, 1]).mul(&qpoly(&[-2, 1]));
        let b = qpoly(&[-3, 1]).mul(&qpoly(&[-4, 1]));
        assert_eq!(a.resultant(&b), Rat::from_int(12));
    }
}
