//! Number field arithmetic: ℚ(α) = ℚ[x]/(m(x)) with a monic integer minimal
//! polynomial. Elements are integer residue polynomials over a positive
//! denominator, kept in lowest terms.

use std::fmt;
use std::sync::Arc;

use num::{BigInt, Integer, One, Signed, Zero};

use crate::error::{AResult, AlgebraError};

use super::poly::Polynomial;
use super::rat::Rat;
use super::{Characteristic, Field};

/// A number field ℚ[α]/(minpoly), minpoly monic with integer coefficients.
#[derive(Debug, PartialEq, Eq)]
pub struct NumberField {
    /// Monic integer minimal polynomial, lowest degree first.
    pub minpoly: Vec<BigInt>,
}

impl NumberField {
    pub fn new(minpoly: Vec<BigInt>) -> AResult<Arc<Self>> {
        if minpoly.len() < 2 {
            return Err(AlgebraError::Other("minimal polynomial must have degree ≥ 1".into()));
        }
        if !minpoly.last().unwrap().is_one() {
            return Err(AlgebraError::Other("minimal polynomial must be monic".into()));
        }
        Ok(Arc::new(NumberField { minpoly }))
    }

    /// ℚ(√a) for squarefree a ≠ 0, 1: minpoly x² − a.
    pub fn quadratic(a: i64) -> Arc<Self> {
        NumberField::new(vec![BigInt::from(-a), BigInt::zero(), BigInt::one()]).unwrap()
    }

    pub fn degree(&self) -> usize {
        self.minpoly.len() - 1
    }

    pub fn minpoly_rat(&self) -> Polynomial<Rat> {
        Polynomial::from_coeffs(
            self.minpoly
                .iter()
                .map(|c| Rat(num::BigRational::from_integer(c.clone())))
                .collect(),
        )
    }
}

/// An element of ℚ(α): (Σ numᵢ αⁱ)/den with gcd(den, content(num)) = 1,
/// den > 0 and deg(num) < deg(minpoly).
#[derive(Clone)]
pub struct NfElem {
    field: Arc<NumberField>,
    num: Vec<BigInt>,
    den: BigInt,
}

impl NfElem {
    pub fn new(field: &Arc<NumberField>, num: Vec<BigInt>, den: BigInt) -> AResult<Self> {
        if den.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        if num.len() > field.degree() {
            return Err(AlgebraError::Other("residue degree too large".into()));
        }
        let mut e = NfElem { field: field.clone(), num, den };
        e.normalize();
        Ok(e)
    }

    pub fn from_rat(field: &Arc<NumberField>, r: &Rat) -> Self {
        NfElem::new(field, vec![r.numer().clone()], r.denom().clone()).unwrap()
    }

    pub fn from_rat_coeffs(field: &Arc<NumberField>, coeffs: &[Rat]) -> AResult<Self> {
        // Common denominator.
        let mut den = BigInt::one();
        for c in coeffs {
            den = den.lcm(c.denom());
        }
        let num: Vec<BigInt> = coeffs
            .iter()
            .map(|c| c.numer() * (&den / c.denom()))
            .collect();
        NfElem::new(field, num, den)
    }

    /// The generator α.
    pub fn generator(field: &Arc<NumberField>) -> Self {
        NfElem::new(field, vec![BigInt::zero(), BigInt::one()], BigInt::one()).unwrap()
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    pub fn residue(&self) -> &[BigInt] {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    /// Coefficients over the power basis as rationals (length = field degree).
    pub fn rat_coeffs(&self) -> Vec<Rat> {
        (0..self.field.degree())
            .map(|i| {
                let n = self.num.get(i).cloned().unwrap_or_else(BigInt::zero);
                Rat::from_bigs(n, self.den.clone())
            })
            .collect()
    }

    /// Rational value if the element lies in ℚ.
    pub fn as_rat(&self) -> Option<Rat> {
        if self.num.iter().skip(1).all(|c| c.is_zero()) {
            Some(Rat::from_bigs(
                self.num.first().cloned().unwrap_or_else(BigInt::zero),
                self.den.clone(),
            ))
        } else {
            None
        }
    }

    fn normalize(&mut self) {
        while self.num.last().map_or(false, |c| c.is_zero()) {
            self.num.pop();
        }
        if self.num.is_empty() {
            self.den = BigInt::one();
            return;
        }
        let mut g = self.den.clone();
        for c in &self.num {
            g = g.gcd(c);
        }
        if !g.is_one() {
            self.den = &self.den / &g;
            for c in &mut self.num {
                *c = &*c / &g;
            }
        }
        if self.den.is_negative() {
            self.den = -self.den.clone();
            for c in &mut self.num {
                *c = -c.clone();
            }
        }
    }

    fn as_poly(&self) -> Polynomial<Rat> {
        Polynomial::from_coeffs(
            self.num
                .iter()
                .map(|c| Rat::from_bigs(c.clone(), self.den.clone()))
                .collect(),
        )
    }

    fn from_poly(field: &Arc<NumberField>, p: &Polynomial<Rat>) -> Self {
        // Reduce mod minpoly, then clear denominators.
        let m = field.minpoly_rat();
        let (_, r) = p.divrem(&m).expect("monic modulus");
        let coeffs: Vec<Rat> = (0..field.degree())
            .map(|i| {
                if r.is_zero() {
                    Rat::from_int(0)
                } else {
                    r.coeff(i)
                }
            })
            .collect();
        NfElem::from_rat_coeffs(field, &coeffs).unwrap()
    }

    /// Galois conjugation α ↦ the other root, for quadratic fields only.
    pub fn conjugate_quadratic(&self) -> AResult<Self> {
        if self.field.degree() != 2 {
            return Err(AlgebraError::Other("conjugation needs a quadratic field".into()));
        }
        // minpoly x² + ux + v: σ(α) = −u − α.
        let u = Rat::from_bigs(self.field.minpoly[1].clone(), BigInt::one());
        let c = self.rat_coeffs();
        let c0 = c[0].sub(&c[1].mul(&u));
        let c1 = c[1].neg();
        NfElem::from_rat_coeffs(&self.field, &[c0, c1])
    }
}

impl PartialEq for NfElem {
    fn eq(&self, other: &Self) -> bool {
        self.field.minpoly == other.field.minpoly
            && self.num == other.num
            && self.den == other.den
    }
}

impl fmt::Debug for NfElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for NfElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num.is_empty() {
            return write!(f, "0");
        }
        write!(f, "(")?;
        let mut first = true;
        for (i, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}·α")?,
                _ => write!(f, "{c}·α^{i}")?,
            }
        }
        write!(f, ")")?;
        if !self.den.is_one() {
            write!(f, "/{}", self.den)?;
        }
        Ok(())
    }
}

impl Field for NfElem {
    fn zero_like(&self) -> Self {
        NfElem { field: self.field.clone(), num: Vec::new(), den: BigInt::one() }
    }

    fn one_like(&self) -> Self {
        NfElem { field: self.field.clone(), num: vec![BigInt::one()], den: BigInt::one() }
    }

    fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    fn add(&self, rhs: &Self) -> Self {
        NfElem::from_poly(&self.field, &self.as_poly().add(&rhs.as_poly()))
    }

    fn sub(&self, rhs: &Self) -> Self {
        NfElem::from_poly(&self.field, &self.as_poly().sub(&rhs.as_poly()))
    }

    fn mul(&self, rhs: &Self) -> Self {
        NfElem::from_poly(&self.field, &self.as_poly().mul(&rhs.as_poly()))
    }

    fn neg(&self) -> Self {
        NfElem {
            field: self.field.clone(),
            num: self.num.iter().map(|c| -c.clone()).collect(),
            den: self.den.clone(),
        }
    }

    fn inv(&self) -> AResult<Self> {
        if self.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        let m = self.field.minpoly_rat();
        let a = self.as_poly();
        let (g, u, _) = a.egcd(&m);
        if !g.is_constant() {
            return Err(AlgebraError::NotInvertible(format!(
                "gcd with minimal polynomial is {g}; minimal polynomial is reducible"
            )));
        }
        // u·a ≡ g (mod m), g is a nonzero constant after monic normalization…
        // egcd returns monic g = 1 here, so u is the inverse.
        Ok(NfElem::from_poly(&self.field, &u))
    }

    fn from_int(&self, n: i64) -> Self {
        NfElem::new(&self.field, vec![BigInt::from(n)], BigInt::one()).unwrap()
    }

    fn characteristic(&self) -> Characteristic {
        Characteristic::Zero
    }

    fn poly_gcd_fast(
        a: &Polynomial<Self>,
        b: &Polynomial<Self>,
    ) -> Option<Polynomial<Self>> {
        // Rational-subfield polynomials route through the modular gcd.
        let field = a.leading()?.field().clone();
        let ar: Option<Vec<Rat>> = a.coeffs().iter().map(|c| c.as_rat()).collect();
        let br: Option<Vec<Rat>> = b.coeffs().iter().map(|c| c.as_rat()).collect();
        let (ar, br) = (ar?, br?);
        let g = crate::algebra::rat::modular_poly_gcd(
            &Polynomial::from_coeffs(ar),
            &Polynomial::from_coeffs(br),
        )?;
        Some(g.map_coeffs(|c| NfElem::from_rat(&field, c)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invert_generator_in_sqrt_minus3() {
        // α in ℚ[α]/(α²+3): α⁻¹ = −α/3
        let k = NumberField::quadratic(-3);
        let a = NfElem::generator(&k);
        let inv = a.inv().unwrap();
        assert_eq!(
            inv,
            NfElem::new(&k, vec![BigInt::zero(), BigInt::from(-1)], BigInt::from(3)).unwrap()
        );
        assert!(a.mul(&inv).is_one());
    }

    #[test]
    fn invert_rational_constant() {
        let k = NumberField::quadratic(-3);
        let two = NfElem::from_rat(&k, &Rat::from_int(2));
        assert_eq!(two.inv().unwrap(), NfElem::from_rat(&k, &Rat::from_pair(1, 2)));
    }

    #[test]
    fn invert_one_plus_alpha_in_sqrt2() {
        // (1+α)(α−1) = α²−1 = 1 in ℚ(√2)
        let k = NumberField::quadratic(2);
        let a = NfElem::generator(&k);
        let x = a.add(&a.one_like());
        let inv = x.inv().unwrap();
        assert_eq!(inv, a.sub(&a.one_like()));
    }

    #[test]
    fn reducible_modulus_detected() {
        // x² − 1 is reducible; inverting α−1 must fail loudly.
        let k = NumberField::new(vec![BigInt::from(-1), BigInt::zero(), BigInt::one()]).unwrap();
        let a = NfElem::generator(&k);
        let x = a.sub(&a.one_like());
        assert!(matches!(x.inv(), Err(AlgebraError::NotInvertible(_))));
    }

    #[test]
    fn quadratic_conjugation() {
        let k = NumberField::quadratic(-3);
        let a = NfElem::generator(&k);
        let x = a.add(&a.from_int(5));
        let c = x.conjugate_quadratic().unwrap();
        assert_eq!(x.add(&c), a.from_int(10));
        assert_eq!(x.mul(&c), a.from_int(28)); // 25 − (−3) = 28 = N(5+α)
    }
}
