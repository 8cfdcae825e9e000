//! Word-sized prime fields 𝔽_p.

use std::fmt;

use crate::error::{AResult, AlgebraError};

use super::{Characteristic, Field};

/// Fast modular helpers on raw u64 residues. Moduli are word-sized primes
/// well below 2^31 in this crate, so products fit in u128 comfortably.
pub mod fp64 {
    pub fn addm(a: u64, b: u64, p: u64) -> u64 {
        let s = a + b;
        if s >= p {
            s - p
        } else {
            s
        }
    }

    pub fn subm(a: u64, b: u64, p: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + p - b
        }
    }

    pub fn mulm(a: u64, b: u64, p: u64) -> u64 {
        ((a as u128 * b as u128) % p as u128) as u64
    }

    pub fn powm(mut a: u64, mut e: u64, p: u64) -> u64 {
        let mut r = 1 % p;
        a %= p;
        while e > 0 {
            if e & 1 == 1 {
                r = mulm(r, a, p);
            }
            a = mulm(a, a, p);
            e >>= 1;
        }
        r
    }

    /// Inverse mod p via extended Euclid; None for non-units.
    pub fn invm(a: u64, p: u64) -> Option<u64> {
        if a % p == 0 {
            return None;
        }
        let (mut t, mut new_t): (i128, i128) = (0, 1);
        let (mut r, mut new_r): (i128, i128) = (p as i128, (a % p) as i128);
        while new_r != 0 {
            let q = r / new_r;
            (t, new_t) = (new_t, t - q * new_t);
            (r, new_r) = (new_r, r - q * new_r);
        }
        if r != 1 {
            return None;
        }
        Some(((t % p as i128 + p as i128) % p as i128) as u64)
    }

    /// Reduce a signed rational n/d mod p (d must be a unit).
    pub fn ratm(n: i64, d: i64, p: u64) -> Option<u64> {
        let np = ((n.rem_euclid(p as i64)) as u64) % p;
        let dp = ((d.rem_euclid(p as i64)) as u64) % p;
        Some(mulm(np, invm(dp, p)?, p))
    }
}

/// Deterministic primality for word-sized inputs (trial division is plenty
/// at desk scale; moduli stay below ~10^6).
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7] {
        if n % q == 0 {
            return n == q;
        }
    }
    let mut d = 11u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub fn next_prime_at_least(mut n: u64) -> u64 {
    if n <= 2 {
        return 2;
    }
    if n % 2 == 0 {
        n += 1;
    }
    while !is_prime_u64(n) {
        n += 2;
    }
    n
}

/// An element of 𝔽_p. The modulus travels with the element.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp {
    value: u64,
    p: u64,
}

impl Fp {
    /// Constructs an element, checking primality of `p`.
    pub fn new(value: u64, p: u64) -> AResult<Self> {
        if !is_prime_u64(p) || p == 2 {
            return Err(AlgebraError::Other(format!("{p} is not an odd prime")));
        }
        Ok(Fp { value: value % p, p })
    }

    /// Unchecked constructor for hot paths; `p` must already be validated.
    pub fn raw(value: u64, p: u64) -> Self {
        Fp { value: value % p, p }
    }

    pub fn from_i64(value: i64, p: u64) -> Self {
        Fp {
            value: value.rem_euclid(p as i64) as u64,
            p,
        }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Smallest nonnegative representative interpreted as a signed residue.
    pub fn signed(&self) -> i64 {
        if self.value > self.p / 2 {
            self.value as i64 - self.p as i64
        } else {
            self.value as i64
        }
    }

    fn check(&self, rhs: &Self) -> u64 {
        assert_eq!(self.p, rhs.p, "mixed moduli {} vs {}", self.p, rhs.p);
        self.p
    }

    /// All L-th roots of self in 𝔽_p, ascending. Brute force; desk-scale p.
    pub fn nth_roots(&self, l: u64) -> Vec<Fp> {
        let mut out = Vec::new();
        for y in 0..self.p {
            if fp64::powm(y, l, self.p) == self.value {
                out.push(Fp::raw(y, self.p));
            }
        }
        out
    }
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.p)
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Field for Fp {
    fn zero_like(&self) -> Self {
        Fp { value: 0, p: self.p }
    }

    fn one_like(&self) -> Self {
        Fp { value: 1 % self.p, p: self.p }
    }

    fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn add(&self, rhs: &Self) -> Self {
        let p = self.check(rhs);
        Fp { value: fp64::addm(self.value, rhs.value, p), p }
    }

    fn sub(&self, rhs: &Self) -> Self {
        let p = self.check(rhs);
        Fp { value: fp64::subm(self.value, rhs.value, p), p }
    }

    fn mul(&self, rhs: &Self) -> Self {
        let p = self.check(rhs);
        Fp { value: fp64::mulm(self.value, rhs.value, p), p }
    }

    fn neg(&self) -> Self {
        Fp { value: if self.value == 0 { 0 } else { self.p - self.value }, p: self.p }
    }

    fn inv(&self) -> AResult<Self> {
        fp64::invm(self.value, self.p)
            .map(|v| Fp { value: v, p: self.p })
            .ok_or(AlgebraError::DivisionByZero)
    }

    fn from_int(&self, n: i64) -> Self {
        Fp::from_i64(n, self.p)
    }

    fn characteristic(&self) -> Characteristic {
        Characteristic::Prime(self.p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_mod_101() {
        let a = Fp::new(77, 101).unwrap();
        let b = Fp::new(50, 101).unwrap();
        assert_eq!(a.add(&b).value(), 26);
        assert_eq!(a.mul(&b).value(), 77 * 50 % 101);
        assert!(a.mul(&a.inv().unwrap()).is_one());
    }

    #[test]
    fn primality() {
        assert!(is_prime_u64(907));
        assert!(!is_prime_u64(901));
        assert_eq!(next_prime_at_least(897), 907);
        assert_eq!(next_prime_at_least(289), 293);
    }

    #[test]
    fn roots() {
        let k = Fp::new(4, 101).unwrap();
        let roots = k.nth_roots(2);
        assert_eq!(roots.len(), 2);
        assert!(roots.iter().all(|r| r.mul(r) == k));
    }
}
