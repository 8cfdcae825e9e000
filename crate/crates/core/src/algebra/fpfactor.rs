//! Complete factorization over 𝔽_p: distinct-degree splitting followed by a
//! deterministic equal-degree split (sweeping shift polynomials instead of
//! random ones keeps runs reproducible).

use super::fp::Fp;
use super::poly::Polynomial;
use super::Field;
use crate::error::AResult;

/// Irreducible factors (monic) of a squarefree monic polynomial over 𝔽_p.
pub fn factor_squarefree_fp(f: &Polynomial<Fp>) -> AResult<Vec<Polynomial<Fp>>> {
    let mut out = Vec::new();
    let Some(deg) = f.degree() else { return Ok(out) };
    if deg == 0 {
        return Ok(out);
    }
    let sample = f.leading().unwrap();
    let p = sample.modulus();
    let x = Polynomial::x_like(sample);
    // Distinct-degree: peel gcd(f, x^(p^e) − x).
    let mut rem = f.monic()?;
    let mut xq = x.clone();
    let mut e = 0usize;
    let mut blocks: Vec<(Polynomial<Fp>, usize)> = Vec::new();
    while rem.deg0() > 0 {
        e += 1;
        if 2 * e > rem.deg0() {
            blocks.push((rem.clone(), rem.deg0()));
            break;
        }
        xq = poly_pow_mod(&xq, p, &rem)?;
        let g = xq.sub(&x).gcd(&rem);
        if !g.is_constant() {
            blocks.push((g.clone(), e));
            rem = rem.div_exact(&g)?;
            xq = xq.divrem(&rem)?.1;
        }
    }
    // Equal-degree split per block.
    for (block, e) in blocks {
        split_equal_degree(&block, e, p, &mut out)?;
    }
    out.sort_by(|a, b| {
        (a.deg0(), format!("{a}")).cmp(&(b.deg0(), format!("{b}")))
    });
    Ok(out)
}

fn split_equal_degree(
    f: &Polynomial<Fp>,
    e: usize,
    p: u64,
    out: &mut Vec<Polynomial<Fp>>,
) -> AResult<()> {
    if f.deg0() == e {
        out.push(f.monic()?);
        return Ok(());
    }
    let sample = f.leading().unwrap();
    // exponent (p^e − 1)/2 as big integer exponentiation by squaring
    let mut split = None;
    'sweep: for c in 0..p {
        for extra in 0..=1u64 {
            // try T = x + c and T = x² + c alternately for robustness
            let t = if extra == 0 {
                Polynomial::from_coeffs(vec![Fp::raw(c, p), sample.one_like()])
            } else {
                Polynomial::from_coeffs(vec![
                    Fp::raw(c, p),
                    sample.zero_like(),
                    sample.one_like(),
                ])
            };
            let tp = poly_pow_halforder(&t, p, e, f)?;
            let g = tp.sub(&Polynomial::one_like(sample)).gcd(f);
            if !g.is_constant() && g.deg0() < f.deg0() {
                split = Some(g);
                break 'sweep;
            }
        }
    }
    let Some(g) = split else {
        // No splitter found (should not happen for odd p); keep as a block.
        out.push(f.monic()?);
        return Ok(());
    };
    let h = f.div_exact(&g)?;
    split_equal_degree(&g, e, p, out)?;
    split_equal_degree(&h, e, p, out)?;
    Ok(())
}

/// t^((p^e − 1)/2) mod f
fn poly_pow_halforder(
    t: &Polynomial<Fp>,
    p: u64,
    e: usize,
    f: &Polynomial<Fp>,
) -> AResult<Polynomial<Fp>> {
    // exponent = (p^e − 1)/2; compute via square-and-multiply on big bits.
    let exp = (num::BigUint::from(p).pow(e as u32) - 1u32) / 2u32;
    let bits = exp.bits();
    let sample = f.leading().unwrap();
    let mut acc = Polynomial::one_like(sample);
    for i in (0..bits).rev() {
        acc = acc.mul(&acc).divrem(f)?.1;
        if exp.bit(i) {
            acc = acc.mul(t).divrem(f)?.1;
        }
        if acc.is_zero() {
            return Ok(acc);
        }
    }
    Ok(acc)
}

/// t^k mod f for word-sized k.
fn poly_pow_mod(t: &Polynomial<Fp>, mut k: u64, f: &Polynomial<Fp>) -> AResult<Polynomial<Fp>> {
    let sample = f.leading().unwrap();
    let mut acc = Polynomial::one_like(sample);
    let mut base = t.divrem(f)?.1;
    while k > 0 {
        if k & 1 == 1 {
            acc = acc.mul(&base).divrem(f)?.1;
        }
        k >>= 1;
        if k > 0 {
            base = base.mul(&base).divrem(f)?.1;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_mixed_degrees() {
        let p = 101;
        let one = Fp::raw(1, p);
        // (x−3)(x−7)(x² + 1): x²+1 irreducible mod 101? 101 ≡ 1 mod 4, so
        // −1 is a QR and it splits; build an honest irreducible instead:
        // x² − g with g a non-residue.
        let mut g = 2;
        while super::super::fp::fp64::powm(g, (p - 1) / 2, p) == 1 {
            g += 1;
        }
        let irred = Polynomial::from_coeffs(vec![Fp::raw(p - g, p), one.zero_like(), one]);
        let f = Polynomial::linear_root(&one.from_int(3))
            .mul(&Polynomial::linear_root(&one.from_int(7)))
            .mul(&irred);
        let factors = factor_squarefree_fp(&f).unwrap();
        assert_eq!(factors.len(), 3);
        let prod = factors
            .iter()
            .fold(Polynomial::one_like(&one), |a, b| a.mul(b));
        assert_eq!(prod, f.monic().unwrap());
        assert_eq!(factors.iter().filter(|x| x.deg0() == 1).count(), 2);
        assert_eq!(factors.iter().filter(|x| x.deg0() == 2).count(), 1);
    }
}
