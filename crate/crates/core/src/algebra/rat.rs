//! Arbitrary-precision rationals as a coefficient domain, plus the small
//! integer utilities (radical, square detection) the sorting rules need.

use std::fmt;

use num::bigint::Sign;
use num::{BigInt, BigRational, BigUint, One, Signed, Zero};

use crate::error::{AResult, AlgebraError};

use super::{Characteristic, Field};

/// ℚ with exact arithmetic. Wraps `num::BigRational` so the domain can carry
/// the `Field` trait used across the crate.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rat(pub BigRational);

impl Rat {
    pub fn from_int(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_pair(n: i64, d: i64) -> Self {
        assert!(d != 0);
        Rat(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn from_bigs(n: BigInt, d: BigInt) -> Self {
        assert!(!d.is_zero());
        Rat(BigRational::new(n, d))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rat(self.0.abs())
    }

    /// Reduction mod p; errors if the denominator vanishes mod p.
    pub fn mod_p(&self, p: u64) -> AResult<u64> {
        let pb = BigInt::from(p);
        let d = self.denom() % &pb;
        if d.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        let n = ((self.numer() % &pb) + &pb) % &pb;
        let d = ((d + &pb) % &pb).to_u64_digits().1.first().copied().unwrap_or(0);
        let n = n.to_u64_digits().1.first().copied().unwrap_or(0);
        let di = super::fp::fp64::invm(d, p).ok_or(AlgebraError::DivisionByZero)?;
        Ok(super::fp::fp64::mulm(n, di, p))
    }

    /// Exact rational square root when it exists.
    pub fn sqrt_exact(&self) -> Option<Rat> {
        if self.0.is_negative() {
            return None;
        }
        let n = int_sqrt_exact(self.numer().magnitude())?;
        let d = int_sqrt_exact(self.denom().magnitude())?;
        Some(Rat(BigRational::new(BigInt::from(n), BigInt::from(d))))
    }
}

/// Exact integer square root when the input is a perfect square.
pub fn int_sqrt_exact(n: &BigUint) -> Option<BigUint> {
    let r = n.sqrt();
    if &(&r * &r) == n {
        Some(r)
    } else {
        None
    }
}

/// Product of the distinct primes dividing |n| (radical); radical(0) = 0.
pub fn radical(n: &BigInt) -> BigInt {
    let mut m = n.magnitude().clone();
    if m.is_zero() {
        return BigInt::zero();
    }
    let mut rad = BigUint::one();
    let mut d = BigUint::from(2u32);
    while &d * &d <= m {
        if (&m % &d).is_zero() {
            rad = &rad * &d;
            while (&m % &d).is_zero() {
                m = &m / &d;
            }
        }
        d += 1u32;
    }
    if !m.is_one() {
        rad = &rad * &m;
    }
    BigInt::from_biguint(Sign::Plus, rad)
}

/// Squarefree kernel of n, with sign: n = kernel * square.
pub fn squarefree_kernel(n: &BigInt) -> BigInt {
    let mut m = n.magnitude().clone();
    if m.is_zero() {
        return BigInt::zero();
    }
    let mut ker = BigUint::one();
    let mut d = BigUint::from(2u32);
    while &d * &d <= m {
        if (&m % &d).is_zero() {
            let mut e = 0u32;
            while (&m % &d).is_zero() {
                m = &m / &d;
                e += 1;
            }
            if e % 2 == 1 {
                ker = &ker * &d;
            }
        }
        d += 1u32;
    }
    ker = &ker * &m;
    let k = BigInt::from_biguint(Sign::Plus, ker);
    if n.is_negative() {
        -k
    } else {
        k
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Field for Rat {
    fn zero_like(&self) -> Self {
        Rat(BigRational::zero())
    }

    fn one_like(&self) -> Self {
        Rat(BigRational::one())
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn add(&self, rhs: &Self) -> Self {
        Rat(&self.0 + &rhs.0)
    }

    fn sub(&self, rhs: &Self) -> Self {
        Rat(&self.0 - &rhs.0)
    }

    fn mul(&self, rhs: &Self) -> Self {
        Rat(&self.0 * &rhs.0)
    }

    fn neg(&self) -> Self {
        Rat(-&self.0)
    }

    fn inv(&self) -> AResult<Self> {
        if self.0.is_zero() {
            Err(AlgebraError::DivisionByZero)
        } else {
            Ok(Rat(self.0.recip()))
        }
    }

    fn from_int(&self, n: i64) -> Self {
        Rat::from_int(n)
    }

    fn characteristic(&self) -> Characteristic {
        Characteristic::Zero
    }

    fn poly_gcd_fast(
        a: &super::poly::Polynomial<Self>,
        b: &super::poly::Polynomial<Self>,
    ) -> Option<super::poly::Polynomial<Self>> {
        modular_poly_gcd(a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_and_kernel() {
        assert_eq!(radical(&BigInt::from(8)), BigInt::from(2));
        assert_eq!(radical(&BigInt::from(6)), BigInt::from(6));
        assert_eq!(squarefree_kernel(&BigInt::from(-12)), BigInt::from(-3));
        assert_eq!(squarefree_kernel(&BigInt::from(18)), BigInt::from(2));
    }

    #[test]
    fn mod_reduction() {
        let x = Rat::from_pair(7, 9);
        let v = x.mod_p(907).unwrap();
        assert_eq!(super::super::fp::fp64::mulm(v, 9, 907), 7);
    }
}

/// Modular polynomial gcd over ℚ: reduce mod word-sized primes, take the
/// minimal-degree monic gcd, CRT the coefficients, rationally reconstruct,
/// and verify divisibility exactly. Falls back (None) only if the prime
/// budget is exhausted.
pub(crate) fn modular_poly_gcd(
    a: &super::poly::Polynomial<Rat>,
    b: &super::poly::Polynomial<Rat>,
) -> Option<super::poly::Polynomial<Rat>> {
    use super::fp::Fp;
    use super::poly::Polynomial;
    use super::zpk::rational_from_residue;
    const PRIMES: [u64; 24] = [
        1_000_000_007,
        1_000_000_009,
        1_000_000_021,
        1_000_000_033,
        1_000_000_087,
        1_000_000_093,
        1_000_000_097,
        1_000_000_103,
        1_000_000_123,
        1_000_000_181,
        1_000_000_207,
        1_000_000_223,
        1_000_000_241,
        1_000_000_271,
        1_000_000_289,
        1_000_000_297,
        1_000_000_321,
        1_000_000_349,
        1_000_000_363,
        1_000_000_403,
        1_000_000_409,
        1_000_000_411,
        1_000_000_427,
        1_000_000_433,
    ];
    let reduce = |poly: &Polynomial<Rat>, p: u64| -> Option<Polynomial<Fp>> {
        let coeffs: Option<Vec<Fp>> = poly
            .coeffs()
            .iter()
            .map(|c| c.mod_p(p).ok().map(|v| Fp::raw(v, p)))
            .collect();
        let r = Polynomial::from_coeffs(coeffs?);
        if r.degree() == poly.degree() {
            Some(r)
        } else {
            None // leading coefficient vanished mod p: unlucky prime
        }
    };
    let mut best_deg = usize::MAX;
    // CRT state: modulus and per-coefficient residues.
    let mut modulus = BigInt::one();
    let mut residues: Vec<BigInt> = Vec::new();
    for &p in PRIMES.iter() {
        let (ra, rb) = (reduce(a, p)?, reduce(b, p)?);
        let g = ra.gcd(&rb);
        let dg = g.degree()?;
        if dg == 0 {
            return Some(Polynomial::one_like(a.leading().unwrap()));
        }
        if dg > best_deg {
            continue; // unlucky prime
        }
        if dg < best_deg {
            best_deg = dg;
            modulus = BigInt::one();
            residues = vec![BigInt::zero(); dg + 1];
        }
        // CRT-accumulate this prime's monic gcd coefficients.
        let pb = BigInt::from(p);
        let new_modulus = &modulus * &pb;
        for (i, r) in residues.iter_mut().enumerate() {
            let cv = BigInt::from(g.coeff(i).value());
            // x ≡ r (mod modulus), x ≡ cv (mod p)
            let minv = {
                let m_mod_p = ((&modulus % &pb) + &pb) % &pb;
                let m64 = m_mod_p.to_u64_digits().1.first().copied().unwrap_or(0);
                super::fp::fp64::invm(m64, p)?
            };
            let diff = ((&cv - &*r) % &pb + &pb) % &pb;
            let d64 = diff.to_u64_digits().1.first().copied().unwrap_or(0);
            let k = super::fp::fp64::mulm(d64, minv, p);
            *r = (&*r + &modulus * BigInt::from(k)) % &new_modulus;
        }
        modulus = new_modulus;
        // Attempt rational reconstruction and exact verification.
        let m = modulus.magnitude().clone();
        let cand: Option<Vec<Rat>> = residues
            .iter()
            .map(|r| rational_from_residue(r.magnitude(), &m))
            .collect();
        if let Some(coeffs) = cand {
            let g = Polynomial::from_coeffs(coeffs);
            if g.degree() == Some(best_deg) {
                let div_a = a.divrem(&g).map(|(_, r)| r.is_zero()).unwrap_or(false);
                let div_b = b.divrem(&g).map(|(_, r)| r.is_zero()).unwrap_or(false);
                if div_a && div_b {
                    return Some(g);
                }
            }
        }
    }
    None
}
