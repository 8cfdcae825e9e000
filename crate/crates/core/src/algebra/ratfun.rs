//! Rational functions as reduced numerator/denominator pairs.

use std::fmt;

use crate::error::{AResult, AlgebraError};

use super::poly::Polynomial;
use super::series::PowerSeries;
use super::Field;

/// A rational function stored as coprime numerator/denominator with a monic
/// denominator. The same type serves as the spec's `RationalMap` (a Belyi
/// candidate over some coefficient domain) and as general rational-function
/// arithmetic for the pull-back machinery.
#[derive(Clone, PartialEq)]
pub struct RationalMap<F: Field> {
    num: Polynomial<F>,
    den: Polynomial<F>,
}

impl<F: Field> RationalMap<F> {
    /// Build from any pair, reducing to lowest terms and a monic denominator.
    pub fn new(num: Polynomial<F>, den: Polynomial<F>) -> AResult<Self> {
        if den.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RationalMap { num, den: den.monic()? });
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_constant() {
            (num, den)
        } else {
            (num.div_exact(&g)?, den.div_exact(&g)?)
        };
        let lc = den.leading().unwrap().clone();
        let lc_inv = lc.inv()?;
        Ok(RationalMap { num: num.scale(&lc_inv), den: den.scale(&lc_inv) })
    }

    pub fn from_poly(p: Polynomial<F>, sample: &F) -> Self {
        RationalMap { num: p, den: Polynomial::one_like(sample) }
    }

    pub fn constant(c: F) -> Self {
        let one = Polynomial::one_like(&c);
        RationalMap { num: Polynomial::constant(c), den: one }
    }

    pub fn num(&self) -> &Polynomial<F> {
        &self.num
    }

    pub fn den(&self) -> &Polynomial<F> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    /// deg(map) = max(deg num, deg den): the covering degree for a Belyi map.
    pub fn map_degree(&self) -> usize {
        self.num.deg0().max(self.den.deg0())
    }

    pub fn sample(&self) -> &F {
        self.den.leading().expect("denominator is nonzero")
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let num = self
            .num
            .mul(&rhs.den)
            .add(&rhs.num.mul(&self.den));
        RationalMap::new(num, self.den.mul(&rhs.den)).expect("nonzero denominator")
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        RationalMap { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        RationalMap::new(self.num.mul(&rhs.num), self.den.mul(&rhs.den))
            .expect("nonzero denominator")
    }

    pub fn div(&self, rhs: &Self) -> AResult<Self> {
        if rhs.num.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        RationalMap::new(self.num.mul(&rhs.den), self.den.mul(&rhs.num))
    }

    pub fn scale(&self, k: &F) -> Self {
        RationalMap::new(self.num.scale(k), self.den.clone()).expect("nonzero denominator")
    }

    /// Subtract a constant: φ − c (non-allocating shortcut for φ − 1).
    pub fn sub_constant(&self, c: &F) -> Self {
        let num = self.num.sub(&self.den.scale(c));
        RationalMap::new(num, self.den.clone()).expect("nonzero denominator")
    }

    /// (num/den)' = (num'·den − num·den')/den²
    pub fn derivative(&self) -> Self {
        let num = self
            .num
            .derivative()
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derivative()));
        RationalMap::new(num, self.den.mul(&self.den)).expect("nonzero denominator")
    }

    /// Logarithmic derivative num'/num − ... for the full fraction.
    pub fn log_derivative(&self) -> AResult<Self> {
        if self.num.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        self.derivative().div(self)
    }

    pub fn eval(&self, x: &F) -> AResult<F> {
        self.num.eval(x).div(&self.den.eval(x))
    }

    /// Value at x = ∞ as (num lc)/(den lc) when degrees match; None encodes ∞
    /// (deg num > deg den), Some(0) when deg num < deg den.
    pub fn eval_infinity(&self) -> Option<F> {
        let dn = self.num.degree();
        let dd = self.den.degree().expect("denominator nonzero");
        match dn {
            None => Some(self.sample().zero_like()),
            Some(dn) if dn < dd => Some(self.sample().zero_like()),
            Some(dn) if dn == dd => {
                Some(self.num.leading().unwrap().div(self.den.leading().unwrap()).unwrap())
            }
            _ => None,
        }
    }

    /// Composition self ∘ inner for a Möbius or general rational inner map.
    pub fn compose_rational(&self, inner: &Self) -> AResult<Self> {
        // self = Σ aᵢ xⁱ / Σ bⱼ xʲ evaluated at inner = u/v, cleared by v^d.
        let d = self.num.deg0().max(self.den.deg0());
        let eval_cleared = |p: &Polynomial<F>| -> Polynomial<F> {
            if p.is_zero() {
                return Polynomial::zero();
            }
            // v^d · p(u/v) = Σ cᵢ uⁱ v^(d−i)
            let mut acc = Polynomial::zero();
            for i in (0..=p.deg0()).rev() {
                acc = acc.mul(&inner.num);
                let c = p.coeff(i);
                if !c.is_zero() {
                    acc = acc.add(&inner.den.pow(d - i).scale(&c));
                }
            }
            acc
        };
        let num = eval_cleared(&self.num);
        let den = eval_cleared(&self.den);
        RationalMap::new(num, den)
    }

    /// Series expansion at the origin to precision n.
    pub fn series_at_zero(&self, n: usize) -> AResult<PowerSeries<F>> {
        let sample = self.sample();
        if self.den.coeff(0).is_zero() {
            return Err(AlgebraError::Series("pole at the origin".into()));
        }
        let num = PowerSeries::from_poly(&self.num, sample, n);
        let den = PowerSeries::from_poly(&self.den, sample, n);
        num.divide(&den)
    }

    pub fn map_coeffs<G: Field>(&self, f: impl Fn(&F) -> G) -> AResult<RationalMap<G>> {
        RationalMap::new(self.num.map_coeffs(&f), self.den.map_coeffs(&f))
    }
}

impl<F: Field> fmt::Debug for RationalMap<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

impl<F: Field> fmt::Display for RationalMap<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A Möbius transformation (ax+b)/(cx+d), ad−bc ≠ 0.
#[derive(Clone, PartialEq)]
pub struct Mobius<F: Field> {
    pub a: F,
    pub b: F,
    pub c: F,
    pub d: F,
}

/// A point of ℙ¹ over the coefficient domain.
#[derive(Clone, PartialEq, Debug)]
pub enum ProjPoint<F: Field> {
    Finite(F),
    Infinity,
}

impl<F: Field> ProjPoint<F> {
    pub fn finite(&self) -> Option<&F> {
        match self {
            ProjPoint::Finite(x) => Some(x),
            ProjPoint::Infinity => None,
        }
    }
}

impl<F: Field> Mobius<F> {
    pub fn new(a: F, b: F, c: F, d: F) -> AResult<Self> {
        let det = a.mul(&d).sub(&b.mul(&c));
        if det.is_zero() {
            return Err(AlgebraError::Other("singular Möbius matrix".into()));
        }
        Ok(Mobius { a, b, c, d })
    }

    pub fn identity(sample: &F) -> Self {
        Mobius {
            a: sample.one_like(),
            b: sample.zero_like(),
            c: sample.zero_like(),
            d: sample.one_like(),
        }
    }

    pub fn is_identity(&self) -> bool {
        // (a b; c d) ~ (1 0; 0 1) projectively
        self.b.is_zero() && self.c.is_zero() && self.a == self.d
    }

    /// The Möbius sending p ↦ 0, q ↦ 1, r ↦ ∞ (the cross-ratio chart).
    pub fn to_standard_triple(
        p: &ProjPoint<F>,
        q: &ProjPoint<F>,
        r: &ProjPoint<F>,
        sample: &F,
    ) -> AResult<Self> {
        use ProjPoint::*;
        let one = sample.one_like();
        let zero = sample.zero_like();
        match (p, q, r) {
            // (x−p)(q−r) / ((x−r)(q−p))
            (Finite(p), Finite(q), Finite(r)) => Mobius::new(
                q.sub(r),
                p.neg().mul(&q.sub(r)),
                q.sub(p),
                r.neg().mul(&q.sub(p)),
            ),
            // (x−p)/(q−p)
            (Finite(p), Finite(q), Infinity) => {
                Mobius::new(one, p.neg(), zero, q.sub(p))
            }
            // (x−p)/(x−r)
            (Finite(p), Infinity, Finite(r)) => {
                Mobius::new(one.clone(), p.neg(), one, r.neg())
            }
            // (q−r)/(x−r)
            (Infinity, Finite(q), Finite(r)) => {
                Mobius::new(zero, q.sub(r), one, r.neg())
            }
            _ => Err(AlgebraError::Other("degenerate point triple".into())),
        }
    }

    /// The Möbius sending 0 ↦ p, 1 ↦ q, ∞ ↦ r (pairwise distinct targets).
    pub fn sending_standard_triple(
        p: &ProjPoint<F>,
        q: &ProjPoint<F>,
        r: &ProjPoint<F>,
        sample: &F,
    ) -> AResult<Self> {
        Ok(Mobius::to_standard_triple(p, q, r, sample)?.inverse())
    }

    pub fn apply(&self, x: &ProjPoint<F>) -> ProjPoint<F> {
        match x {
            ProjPoint::Finite(x) => {
                let den = self.c.mul(x).add(&self.d);
                if den.is_zero() {
                    ProjPoint::Infinity
                } else {
                    ProjPoint::Finite(self.a.mul(x).add(&self.b).div(&den).unwrap())
                }
            }
            ProjPoint::Infinity => {
                if self.c.is_zero() {
                    ProjPoint::Infinity
                } else {
                    ProjPoint::Finite(self.a.div(&self.c).unwrap())
                }
            }
        }
    }

    pub fn inverse(&self) -> Self {
        Mobius {
            a: self.d.clone(),
            b: self.b.neg(),
            c: self.c.neg(),
            d: self.a.clone(),
        }
    }

    /// self ∘ rhs as matrices.
    pub fn compose(&self, rhs: &Self) -> Self {
        Mobius {
            a: self.a.mul(&rhs.a).add(&self.b.mul(&rhs.c)),
            b: self.a.mul(&rhs.b).add(&self.b.mul(&rhs.d)),
            c: self.c.mul(&rhs.a).add(&self.d.mul(&rhs.c)),
            d: self.c.mul(&rhs.b).add(&self.d.mul(&rhs.d)),
        }
    }

    pub fn as_rational(&self) -> RationalMap<F> {
        RationalMap::new(
            Polynomial::from_coeffs(vec![self.b.clone(), self.a.clone()]),
            Polynomial::from_coeffs(vec![self.d.clone(), self.c.clone()]),
        )
        .expect("nonsingular Möbius")
    }
}

impl<F: Field> fmt::Debug for Mobius<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x ↦ (({})x + ({})) / (({})x + ({}))", self.a, self.b, self.c, self.d)
    }
}

impl<F: Field> fmt::Display for Mobius<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat::Rat;

    fn q(n: i64) -> Rat {
        Rat::from_int(n)
    }

    #[test]
    fn reduce_on_construction() {
        let num = Polynomial::from_coeffs(vec![q(0), q(2), q(2)]); // 2x(x+1)
        let den = Polynomial::from_coeffs(vec![q(0), q(4)]); // 4x
        let r = RationalMap::new(num, den).unwrap();
        assert_eq!(r.den(), &Polynomial::one_like(&q(1)));
        assert_eq!(
            r.num(),
            &Polynomial::from_coeffs(vec![Rat::from_pair(1, 2), Rat::from_pair(1, 2)])
        );
    }

    #[test]
    fn mobius_triple_and_inverse() {
        let m = Mobius::sending_standard_triple(
            &ProjPoint::Finite(q(3)),
            &ProjPoint::Finite(q(5)),
            &ProjPoint::Infinity,
            &q(1),
        )
        .unwrap();
        assert_eq!(m.apply(&ProjPoint::Finite(q(0))), ProjPoint::Finite(q(3)));
        assert_eq!(m.apply(&ProjPoint::Finite(q(1))), ProjPoint::Finite(q(5)));
        assert_eq!(m.apply(&ProjPoint::Infinity), ProjPoint::Infinity);
        let mi = m.inverse();
        assert_eq!(mi.apply(&ProjPoint::Finite(q(3))), ProjPoint::Finite(q(0)));
    }

    #[test]
    fn compose_rational_with_mobius() {
        // φ = x², μ = x+1 → φ∘μ = (x+1)²
        let one = q(1);
        let phi = RationalMap::from_poly(
            Polynomial::monomial(one.clone(), 2),
            &one,
        );
        let mu = RationalMap::from_poly(
            Polynomial::from_coeffs(vec![q(1), q(1)]),
            &one,
        );
        let c = phi.compose_rational(&mu).unwrap();
        assert_eq!(
            c.num(),
            &Polynomial::from_coeffs(vec![q(1), q(2), q(1)])
        );
    }
}
