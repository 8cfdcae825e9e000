//! Exact arithmetic substrate: coefficient domains, polynomials, truncated
//! power series, rational reconstruction, lattice reduction and p-adic
//! recognition. Everything here is exact; there is no floating point.

pub mod fp;
pub mod fpfactor;
pub mod rat;
pub mod zpk;
pub mod poly;
pub mod series;
pub mod ratfun;
pub mod linalg;
pub mod lattice;
pub mod recognize;
pub mod roots;
pub mod numfield;

use std::fmt::{Debug, Display};

use crate::error::{AResult, AlgebraError};

/// Characteristic of a coefficient domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Characteristic {
    Zero,
    Prime(u64),
    /// ℤ/p^κ with κ > 1: a local ring, not a field. Division is partial.
    PrimePower { p: u64, k: u32 },
}

impl Characteristic {
    /// True if squarefree decomposition (Yun) is valid for degree-`deg` input.
    pub fn admits_squarefree(&self, deg: usize) -> bool {
        match self {
            Characteristic::Zero => true,
            Characteristic::Prime(p) => *p > deg as u64,
            Characteristic::PrimePower { .. } => false,
        }
    }
}

/// An exact coefficient domain with context-carrying elements.
///
/// Elements know their own domain (modulus, number field, …); `zero_like`
/// and friends derive new elements in the same domain. `Fp`, `Rat` and
/// `NfElem` are fields; `ZpK` implements the same surface but with partial
/// `inv` (it is a local ring), which is all Hensel lifting needs.
pub trait Field: Clone + PartialEq + Debug + Display + Send + Sync + 'static {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Multiplicative inverse; errors on zero (and on non-units in ℤ/p^κ,
    /// or when a reducible minimal polynomial is detected in ℚ(α)).
    fn inv(&self) -> AResult<Self>;
    /// The image of the integer `n` in the domain carried by `self`.
    fn from_int(&self, n: i64) -> Self;
    fn characteristic(&self) -> Characteristic;

    fn is_one(&self) -> bool {
        *self == self.one_like()
    }

    fn div(&self, rhs: &Self) -> AResult<Self> {
        Ok(self.mul(&rhs.inv()?))
    }

    /// The image of the rational n/d.
    fn from_ratio(&self, n: i64, d: i64) -> AResult<Self> {
        self.from_int(n).div(&self.from_int(d))
    }

    /// Domain-specific fast path for polynomial gcd (e.g. the modular
    /// algorithm over ℚ); None falls back to the generic Euclidean loop.
    fn poly_gcd_fast(
        _a: &poly::Polynomial<Self>,
        _b: &poly::Polynomial<Self>,
    ) -> Option<poly::Polynomial<Self>> {
        None
    }

    fn pow_u(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = self.one_like();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// self^e for signed e (negative exponents invert).
    fn pow_i(&self, e: i64) -> AResult<Self> {
        if e >= 0 {
            Ok(self.pow_u(e as u64))
        } else {
            Ok(self.inv()?.pow_u(e.unsigned_abs()))
        }
    }
}

/// Guard helper shared by squarefree decomposition and friends.
pub(crate) fn require_big_characteristic<F: Field>(sample: &F, deg: usize) -> AResult<()> {
    let ch = sample.characteristic();
    if ch.admits_squarefree(deg) {
        Ok(())
    } else {
        let got = match ch {
            Characteristic::Zero => 0,
            Characteristic::Prime(p) => p,
            Characteristic::PrimePower { p, .. } => p,
        };
        Err(AlgebraError::CharacteristicTooSmall { need: deg, got })
    }
}
