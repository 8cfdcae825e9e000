//! p-adic-to-algebraic recognition: minimal polynomials via LLL and
//! coefficient recognition over a fixed number field.

use std::sync::Arc;

use num::{BigInt, BigUint, Integer, One, Signed, Zero};

use crate::error::{AResult, AlgebraError};

use super::fp::{fp64, is_prime_u64, next_prime_at_least};
use super::lattice::{lll_reduce, IntegerLattice};
use super::numfield::{NfElem, NumberField};
use super::rat::Rat;
use super::zpk::{rational_from_residue, ZpCtx, ZpK};
use super::Field;

/// Outcome flags recorded alongside a recognized minimal polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinpolyResult {
    /// Integer coefficients, lowest degree first, content 1, positive leading.
    pub coeffs: Vec<BigInt>,
    /// True when irreducibility was certified by an 𝔽_q factor test;
    /// false means only the rational-root test passed (flagged in provenance).
    pub irreducibility_certified: bool,
}

impl MinpolyResult {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn number_field(&self) -> AResult<Arc<NumberField>> {
        if !self.coeffs.last().map(|c| c.is_one()).unwrap_or(false) {
            return Err(AlgebraError::Other("minimal polynomial is not monic".into()));
        }
        NumberField::new(self.coeffs.clone())
    }
}

/// Find an integer polynomial m with deg ≤ max_degree, |coeffs| ≤
/// height_bound, m(r) ≡ 0 (mod p^κ), preferring the smallest degree.
/// Acceptance margin: the winning lattice vector must have norm below
/// p^κ / (2·height_bound·max_degree); otherwise None. Errors when the
/// precondition p^κ > 2·height_bound²·(max_degree+1) fails.
pub fn minpoly_from_padic(
    r: &ZpK,
    max_degree: usize,
    height_bound: &BigInt,
) -> AResult<Option<MinpolyResult>> {
    let modulus = BigInt::from(r.ctx().modulus.clone());
    let need = BigInt::from(2) * height_bound * height_bound * BigInt::from(max_degree as u64 + 1);
    if modulus <= need {
        return Err(AlgebraError::InsufficientPrecision(format!(
            "p^κ = {modulus} must exceed 2·H²·(D+1) = {need}"
        )));
    }
    let margin = &modulus / (BigInt::from(2) * height_bound * BigInt::from(max_degree as u64));

    // Degree 1 first: plain rational reconstruction gives num − den·x.
    if let Some(q) = rational_from_residue(r.value(), &r.ctx().modulus) {
        if q.numer().abs() <= *height_bound && q.denom().abs() <= *height_bound {
            let coeffs = vec![-q.numer().clone(), q.denom().clone()];
            return Ok(Some(MinpolyResult { coeffs: normalize_content(coeffs), irreducibility_certified: true }));
        }
    }

    for degree in 2..=max_degree {
        // Lattice rows: (e_i | W·r^i) for i = 0..degree, plus (0 | W·p^κ),
        // with weight W = p^κ so any vector whose value column is a nonzero
        // residue mod p^κ is enormous. A short vector (c_0..c_degree | 0)
        // then encodes Σ c_i r^i ≡ 0 (mod p^κ).
        let dim = degree + 1;
        let w = modulus.clone();
        let mut rows = Vec::with_capacity(dim + 1);
        let mut rpow = ZpK::new(r.ctx(), BigUint::one());
        for i in 0..dim {
            let mut row = vec![BigInt::zero(); dim + 1];
            row[i] = BigInt::one();
            row[dim] = BigInt::from(rpow.value().clone()) * &w;
            rows.push(row);
            if i + 1 < dim {
                rpow = rpow.mul(r);
            }
        }
        let mut prow = vec![BigInt::zero(); dim + 1];
        prow[dim] = &modulus * &w;
        rows.push(prow);

        let reduced = lll_reduce(&IntegerLattice::new(rows)?)?;
        // Pick the shortest vector whose coefficient part is nonzero.
        let mut best: Option<(&Vec<BigInt>, BigInt)> = None;
        for v in &reduced.basis {
            if v[..dim].iter().all(|c| c.is_zero()) {
                continue;
            }
            let n: BigInt = v.iter().map(|x| x * x).sum();
            if best.as_ref().map_or(true, |(_, bn)| n < *bn) {
                best = Some((v, n));
            }
        }
        let Some((vec, norm2)) = best else { continue };
        // Acceptance margin: the vector norm must stay below
        // p^κ / (2·height_bound·max_degree); otherwise reject (None).
        if norm2 >= &margin * &margin {
            continue;
        }
        let maxc = vec[..dim].iter().map(|c| c.abs()).max().unwrap();
        if maxc > *height_bound {
            continue;
        }
        let coeffs = normalize_content(vec[..dim].to_vec());
        if coeffs.len() < 2 {
            continue;
        }
        // Verify m(r) ≡ 0 exactly.
        let mut acc = r.zero_like();
        for c in coeffs.iter().rev() {
            acc = acc.mul(r).add(&ZpK::from_bigint(r.ctx(), c));
        }
        if !acc.is_zero() {
            continue;
        }
        // No repeated factors, and an honest irreducibility attempt.
        if !integer_poly_squarefree(&coeffs) {
            continue;
        }
        if has_rational_root(&coeffs) {
            continue; // reducible: a lower degree would have matched
        }
        let certified = certify_irreducible_mod_q(&coeffs);
        return Ok(Some(MinpolyResult { coeffs, irreducibility_certified: certified }));
    }
    Ok(None)
}

/// Divide out integer content; make the leading coefficient positive.
fn normalize_content(mut c: Vec<BigInt>) -> Vec<BigInt> {
    while c.last().map_or(false, |x| x.is_zero()) {
        c.pop();
    }
    if c.is_empty() {
        return c;
    }
    let mut g = BigInt::zero();
    for x in &c {
        g = g.gcd(x);
    }
    if !g.is_zero() && !g.is_one() {
        for x in &mut c {
            *x = &*x / &g;
        }
    }
    if c.last().unwrap().is_negative() {
        for x in &mut c {
            *x = -x.clone();
        }
    }
    c
}

fn integer_poly_squarefree(c: &[BigInt]) -> bool {
    let f = super::poly::Polynomial::from_coeffs(
        c.iter().map(|x| Rat::from_bigs(x.clone(), BigInt::one())).collect(),
    );
    f.is_squarefree().unwrap_or(false)
}

/// Rational-root test on an integer polynomial (roots p/q, p | c₀, q | c_n).
fn has_rational_root(c: &[BigInt]) -> bool {
    let f = super::poly::Polynomial::from_coeffs(
        c.iter().map(|x| Rat::from_bigs(x.clone(), BigInt::one())).collect(),
    );
    if f.coeff(0).is_zero() {
        return true;
    }
    let c0 = c[0].magnitude().clone();
    let cn = c.last().unwrap().magnitude().clone();
    let divisors = |n: &BigUint| -> Vec<BigUint> {
        // Desk-scale coefficients; trial division is fine.
        let mut out = Vec::new();
        let mut d = BigUint::one();
        loop {
            if (&d * &d) > *n {
                break;
            }
            if (n % &d).is_zero() {
                out.push(d.clone());
                out.push(n / &d);
            }
            d += 1u32;
        }
        out
    };
    for p in divisors(&c0) {
        for q in divisors(&cn) {
            for sign in [1i64, -1] {
                let cand = Rat::from_bigs(
                    BigInt::from_biguint(if sign > 0 { num::bigint::Sign::Plus } else { num::bigint::Sign::Minus }, p.clone()),
                    BigInt::from_biguint(num::bigint::Sign::Plus, q.clone()),
                );
                if f.eval(&cand).is_zero() {
                    return true;
                }
            }
        }
    }
    false
}

/// Try to certify irreducibility by full factor-degree analysis mod three
/// auxiliary primes: irreducible mod q ⟹ irreducible over ℚ.
fn certify_irreducible_mod_q(c: &[BigInt]) -> bool {
    let deg = c.len() - 1;
    let mut q = 10_007u64;
    let mut tried = 0;
    while tried < 3 {
        q = next_prime_at_least(q + 1);
        if !is_prime_u64(q) {
            continue;
        }
        // Leading coefficient must stay nonzero mod q and the reduction squarefree.
        let lead = (c.last().unwrap() % BigInt::from(q) + BigInt::from(q)) % BigInt::from(q);
        if lead.is_zero() {
            continue;
        }
        tried += 1;
        if irreducible_mod_q(c, q, deg) {
            return true;
        }
    }
    false
}

/// Distinct-degree style test: f of degree d is irreducible over 𝔽_q iff
/// x^(q^d) ≡ x (mod f) and gcd(x^(q^(d/ℓ)) − x, f) = 1 for prime ℓ | d.
fn irreducible_mod_q(c: &[BigInt], q: u64, deg: usize) -> bool {
    use super::fp::Fp;
    use super::poly::Polynomial;
    let sample = Fp::raw(0, q);
    let f = Polynomial::from_coeffs(
        c.iter()
            .map(|x| {
                let r = ((x % BigInt::from(q)) + BigInt::from(q)) % BigInt::from(q);
                Fp::raw(r.to_u64_digits().1.first().copied().unwrap_or(0), q)
            })
            .collect(),
    );
    if f.degree() != Some(deg) {
        return false;
    }
    let x = Polynomial::x_like(&sample);
    // x^(q^k) mod f by repeated q-th powering.
    let pow_q = |g: &Polynomial<Fp>, f: &Polynomial<Fp>| -> Polynomial<Fp> {
        // g^q mod f via square-and-multiply on the exponent q.
        let mut acc = Polynomial::one_like(&sample);
        let mut base = g.clone();
        let mut e = q;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).divrem(f).unwrap().1;
            }
            base = base.mul(&base).divrem(f).unwrap().1;
            e >>= 1;
        }
        acc
    };
    let mut xq = x.clone();
    let mut frob: Vec<Polynomial<Fp>> = vec![x.clone()]; // frob[k] = x^(q^k) mod f
    for _ in 0..deg {
        xq = pow_q(&xq, &f);
        frob.push(xq.clone());
    }
    if frob[deg].sub(&x).divrem(&f).unwrap().1.degree().is_some() {
        return false;
    }
    // Proper divisors d/ℓ for prime ℓ | deg.
    let mut ell = 2;
    let mut d = deg;
    let mut prime_divs = Vec::new();
    while ell * ell <= d {
        if d % ell == 0 {
            prime_divs.push(ell);
            while d % ell == 0 {
                d /= ell;
            }
        }
        ell += 1;
    }
    if d > 1 {
        prime_divs.push(d);
    }
    for ell in prime_divs {
        let k = deg / ell;
        let g = frob[k].sub(&x).gcd(&f);
        if !g.is_constant() {
            return false;
        }
    }
    true
}

/// Recognize a residue as an element of ℚ(α) given the image ᾱ of the
/// generator mod p^κ. Finds small rationals y_i with value ≡ Σ y_i ᾱ^i via
/// LLL on the relation lattice; verifies the congruence exactly.
pub fn recognize_in_field(
    value: &ZpK,
    field: &Arc<NumberField>,
    alpha_padic: &ZpK,
    height_bound: &BigInt,
) -> Option<NfElem> {
    let deg = field.degree();
    let modulus = BigInt::from(value.ctx().modulus.clone());
    // Rows: (den_weight·e | W·v) over columns (z, y_0…y_{deg−1} | value-col):
    // short vector (z, y…, ε) with z·value − Σ y_i ᾱ^i ≡ 0 (mod p^κ).
    let dim = deg + 1;
    let w = modulus.clone();
    let mut rows = Vec::with_capacity(dim + 1);
    let mut apow = ZpK::new(value.ctx(), BigUint::one());
    let mut row0 = vec![BigInt::zero(); dim + 1];
    row0[0] = BigInt::one();
    row0[dim] = BigInt::from(value.value().clone()) * &w;
    rows.push(row0);
    for i in 0..deg {
        let mut row = vec![BigInt::zero(); dim + 1];
        row[i + 1] = BigInt::one();
        row[dim] = -BigInt::from(apow.value().clone()) * &w;
        rows.push(row);
        apow = apow.mul(alpha_padic);
    }
    let mut prow = vec![BigInt::zero(); dim + 1];
    prow[dim] = &modulus * &w;
    rows.push(prow);

    let reduced = lll_reduce(&IntegerLattice::new(rows).ok()?).ok()?;
    let margin = &modulus / (BigInt::from(2) * height_bound * BigInt::from(deg as u64 + 1));
    for v in &reduced.basis {
        if v[0].is_zero() {
            continue;
        }
        let norm2: BigInt = v.iter().map(|x| x * x).sum();
        if norm2 >= &margin * &margin {
            continue;
        }
        let maxc = v[..dim].iter().map(|c| c.abs()).max().unwrap();
        if maxc > *height_bound {
            continue;
        }
        let z = v[0].clone();
        let ys: Vec<BigInt> = v[1..dim].to_vec();
        // candidate = (Σ y_i α^i)/z
        let cand = NfElem::new(field, ys, z).ok()?;
        if verify_padic_image(&cand, alpha_padic, value) {
            return Some(cand);
        }
        // Also try the negated vector (LLL sign is arbitrary) — NfElem::new
        // normalizes signs already, so a second try is not needed.
    }
    None
}

/// Check that the image of `e` under α ↦ ᾱ (mod p^κ) equals `value`.
pub fn verify_padic_image(e: &NfElem, alpha_padic: &ZpK, value: &ZpK) -> bool {
    let ctx = value.ctx();
    let den = ZpK::from_bigint(ctx, e.denominator());
    let Ok(den_inv) = den.inv() else { return false };
    let mut acc = value.zero_like();
    for c in e.residue().iter().rev() {
        acc = acc.mul(alpha_padic).add(&ZpK::from_bigint(ctx, c));
    }
    acc.mul(&den_inv) == *value
}

/// Reduce a number-field element mod p^κ at a fixed image of α.
pub fn nf_to_padic(e: &NfElem, alpha_padic: &ZpK, ctx: &Arc<ZpCtx>) -> AResult<ZpK> {
    let den = ZpK::from_bigint(ctx, e.denominator());
    let den_inv = den.inv()?;
    let mut acc = ZpK::new(ctx, BigUint::zero());
    for c in e.residue().iter().rev() {
        acc = acc.mul(alpha_padic).add(&ZpK::from_bigint(ctx, c));
    }
    Ok(acc.mul(&den_inv))
}

/// Roots of a polynomial with Rat coefficients mod p (brute force over 𝔽_p).
pub fn roots_mod_p(c: &[Rat], p: u64) -> AResult<Vec<u64>> {
    let mut cs = Vec::with_capacity(c.len());
    for x in c {
        cs.push(x.mod_p(p)?);
    }
    while cs.last().map_or(false, |&x| x == 0) {
        cs.pop();
    }
    if cs.is_empty() {
        return Err(AlgebraError::Other("zero polynomial".into()));
    }
    let mut out = Vec::new();
    for r in 0..p {
        let mut acc = 0u64;
        for x in cs.iter().rev() {
            acc = fp64::addm(fp64::mulm(acc, r, p), *x, p);
        }
        if acc == 0 {
            out.push(r);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::zpk::lift_root;

    #[test]
    fn recognize_sqrt2() {
        let ctx = ZpCtx::new(7, 20);
        let f = [BigInt::from(-2), BigInt::zero(), BigInt::one()];
        let r = lift_root(&f, 3, &ctx).unwrap();
        let m = minpoly_from_padic(&r, 2, &BigInt::from(1000))
            .unwrap()
            .expect("recognition");
        assert_eq!(m.coeffs, vec![BigInt::from(-2), BigInt::zero(), BigInt::one()]);
        assert!(m.irreducibility_certified);
    }

    #[test]
    fn recognize_rational_integer() {
        let ctx = ZpCtx::new(101, 10);
        let r = ZpK::new(&ctx, BigUint::from(5u32));
        let m = minpoly_from_padic(&r, 3, &BigInt::from(1000)).unwrap().unwrap();
        assert_eq!(m.coeffs, vec![BigInt::from(-5), BigInt::one()]);
    }

    #[test]
    fn recognize_one_third() {
        let ctx = ZpCtx::new(101, 10);
        let r = ZpK::from_rat(&ctx, &Rat::from_pair(1, 3)).unwrap();
        let m = minpoly_from_padic(&r, 1, &BigInt::from(1000)).unwrap().unwrap();
        // 3x − 1 normalized with positive leading coefficient.
        assert_eq!(m.coeffs, vec![BigInt::from(-1), BigInt::from(3)]);
    }

    #[test]
    fn insufficient_precision_errors() {
        let ctx = ZpCtx::new(7, 2);
        let r = ZpK::new(&ctx, BigUint::from(3u32));
        assert!(matches!(
            minpoly_from_padic(&r, 2, &BigInt::from(1000)),
            Err(AlgebraError::InsufficientPrecision(_))
        ));
    }

    #[test]
    fn field_recognition_roundtrip() {
        // value = (3 + 2α)/5 in ℚ(√2) mod 7^20
        let ctx = ZpCtx::new(7, 20);
        let f = [BigInt::from(-2), BigInt::zero(), BigInt::one()];
        let alpha = lift_root(&f, 3, &ctx).unwrap();
        let k = NumberField::quadratic(2);
        let e = NfElem::new(&k, vec![BigInt::from(3), BigInt::from(2)], BigInt::from(5)).unwrap();
        let v = nf_to_padic(&e, &alpha, &ctx).unwrap();
        let got = recognize_in_field(&v, &k, &alpha, &BigInt::from(1000)).unwrap();
        assert_eq!(got, e);
    }
}

