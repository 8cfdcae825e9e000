//! Truncated power series with exact coefficients, plus series with a
//! fractional leading exponent (Schwarz-map quotients) and the rational
//! (Padé) reconstruction used by the modular scan.

use std::fmt;

use num::BigRational;

use crate::error::{AResult, AlgebraError};

use super::poly::Polynomial;
use super::ratfun::RationalMap;
use super::Field;

/// A power series known modulo x^N; `c.len()` is the truncation order N.
#[derive(Clone, PartialEq)]
pub struct PowerSeries<F: Field> {
    c: Vec<F>,
}

impl<F: Field> PowerSeries<F> {
    pub fn from_coeffs(c: Vec<F>) -> Self {
        assert!(!c.is_empty(), "series needs at least one known coefficient");
        PowerSeries { c }
    }

    pub fn zero(sample: &F, n: usize) -> Self {
        PowerSeries { c: vec![sample.zero_like(); n.max(1)] }
    }

    pub fn one(sample: &F, n: usize) -> Self {
        let mut s = Self::zero(sample, n);
        s.c[0] = sample.one_like();
        s
    }

    pub fn identity(sample: &F, n: usize) -> Self {
        let mut s = Self::zero(sample, n);
        if n > 1 {
            s.c[1] = sample.one_like();
        }
        s
    }

    pub fn from_poly(p: &Polynomial<F>, sample: &F, n: usize) -> Self {
        let mut s = Self::zero(sample, n);
        for (i, c) in p.coeffs().iter().enumerate().take(n) {
            s.c[i] = c.clone();
        }
        s
    }

    pub fn precision(&self) -> usize {
        self.c.len()
    }

    pub fn coeffs(&self) -> &[F] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> F {
        self.c.get(i).cloned().unwrap_or_else(|| self.sample().zero_like())
    }

    fn sample(&self) -> &F {
        &self.c[0]
    }

    /// Order of vanishing at 0, None if zero to the known precision.
    pub fn order(&self) -> Option<usize> {
        self.c.iter().position(|x| !x.is_zero())
    }

    pub fn truncate(&self, n: usize) -> Self {
        let mut c = self.c.clone();
        c.truncate(n.max(1));
        PowerSeries { c }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let n = self.c.len().min(rhs.c.len());
        PowerSeries {
            c: (0..n).map(|i| self.c[i].add(&rhs.c[i])).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let n = self.c.len().min(rhs.c.len());
        PowerSeries {
            c: (0..n).map(|i| self.c[i].sub(&rhs.c[i])).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        PowerSeries { c: self.c.iter().map(|x| x.neg()).collect() }
    }

    pub fn scale(&self, k: &F) -> Self {
        PowerSeries { c: self.c.iter().map(|x| x.mul(k)).collect() }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let n = self.c.len().min(rhs.c.len());
        let z = self.sample().zero_like();
        let mut out = vec![z; n];
        for i in 0..n {
            if self.c[i].is_zero() {
                continue;
            }
            for j in 0..n - i {
                if !rhs.c[j].is_zero() {
                    out[i + j] = out[i + j].add(&self.c[i].mul(&rhs.c[j]));
                }
            }
        }
        PowerSeries { c: out }
    }

    /// Multiply by x^k (dropping overflow beyond the precision).
    pub fn shift_up(&self, k: usize) -> Self {
        let n = self.c.len();
        let z = self.sample().zero_like();
        let mut out = vec![z; n];
        for i in 0..n.saturating_sub(k) {
            out[i + k] = self.c[i].clone();
        }
        PowerSeries { c: out }
    }

    /// Divide by x^k; errors if any of the first k coefficients is nonzero.
    pub fn shift_down(&self, k: usize) -> AResult<Self> {
        if self.c.iter().take(k).any(|x| !x.is_zero()) {
            return Err(AlgebraError::Series("shift_down below order".into()));
        }
        let z = self.sample().zero_like();
        let mut out = vec![z; self.c.len()];
        for i in k..self.c.len() {
            out[i - k] = self.c[i].clone();
        }
        out.truncate(self.c.len() - k.min(self.c.len() - 1));
        if out.is_empty() {
            out.push(self.sample().zero_like());
        }
        Ok(PowerSeries { c: out })
    }

    /// Multiplicative inverse of a unit series.
    pub fn invert(&self) -> AResult<Self> {
        let a0 = self.c[0].inv().map_err(|_| {
            AlgebraError::Series("inverting a non-unit series".into())
        })?;
        let n = self.c.len();
        let mut out = vec![self.sample().zero_like(); n];
        out[0] = a0.clone();
        for i in 1..n {
            let mut acc = self.sample().zero_like();
            for j in 1..=i {
                if !self.c[j].is_zero() {
                    acc = acc.add(&self.c[j].mul(&out[i - j]));
                }
            }
            out[i] = acc.mul(&a0).neg();
        }
        Ok(PowerSeries { c: out })
    }

    pub fn divide(&self, rhs: &Self) -> AResult<Self> {
        Ok(self.mul(&rhs.invert()?))
    }

    pub fn derivative(&self) -> Self {
        let n = self.c.len();
        let mut out = Vec::with_capacity(n.max(1));
        for i in 1..n {
            out.push(self.c[i].mul(&self.c[i].from_int(i as i64)));
        }
        if out.is_empty() {
            out.push(self.sample().zero_like());
        }
        PowerSeries { c: out }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::one(self.sample(), self.c.len());
        let mut base = self.clone();
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

    /// Composition self ∘ inner; inner must have positive order.
    pub fn compose(&self, inner: &Self) -> AResult<Self> {
        if !inner.c[0].is_zero() {
            return Err(AlgebraError::Series(
                "composition needs inner order ≥ 1".into(),
            ));
        }
        let n = self.c.len().min(inner.c.len());
        let mut acc = PowerSeries::zero(self.sample(), n);
        let inner = inner.truncate(n);
        for c in self.c.iter().take(n).rev() {
            acc = acc.mul(&inner);
            acc.c[0] = acc.c[0].add(c);
        }
        Ok(acc)
    }

    /// Compositional inverse of a series of exact order 1, by Lagrange
    /// inversion: gₘ = (1/m)·[x^(m−1)] (x/f)^m. Needs m invertible up to the
    /// precision (char 0 or p ≥ precision).
    pub fn reversion(&self) -> AResult<Self> {
        if self.order() != Some(1) {
            return Err(AlgebraError::Series("reversion needs order exactly 1".into()));
        }
        let n = self.c.len();
        let sample = self.sample();
        // u = x/f as a unit series known mod x^(n−1).
        let f_over_x = self.shift_down(1)?;
        let u = f_over_x.invert()?;
        let mut out = vec![sample.zero_like(); n];
        let mut upow = u.clone();
        for m in 1..n {
            let minv = sample.from_int(m as i64).inv().map_err(|_| {
                AlgebraError::Series(format!("characteristic divides {m} during reversion"))
            })?;
            out[m] = upow.coeff(m - 1).mul(&minv);
            if m + 1 < n {
                upow = upow.mul(&u);
            }
        }
        Ok(PowerSeries { c: out })
    }

    /// n-th root of a series with constant term 1 (constant term of the root
    /// is 1). Requires n invertible in the domain.
    pub fn nth_root_unit(&self, n: u64) -> AResult<Self> {
        if !self.c[0].is_one() {
            return Err(AlgebraError::Series("nth_root needs constant term 1".into()));
        }
        let len = self.c.len();
        let ninv = self.sample().from_int(n as i64).inv().map_err(|_| {
            AlgebraError::Series("root order not invertible in domain".into())
        })?;
        let mut r = Self::one(self.sample(), len);
        // r_{i} from coefficient i of r^n = self: n·r_i + (terms of lower r) = a_i
        for i in 1..len {
            let rn = r.pow(n);
            let diff = self.c[i].sub(&rn.c[i]);
            r.c[i] = diff.mul(&ninv);
        }
        // Sanity: r^n must reproduce self at full precision.
        if r.pow(n) != *self {
            return Err(AlgebraError::Series("nth_root failed to converge".into()));
        }
        Ok(r)
    }

    pub fn map_coeffs<G: Field>(&self, f: impl Fn(&F) -> G) -> PowerSeries<G> {
        PowerSeries { c: self.c.iter().map(f).collect() }
    }
}

impl<F: Field> fmt::Debug for PowerSeries<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "series[{}](", self.c.len())?;
        for (i, c) in self.c.iter().enumerate() {
            if !c.is_zero() {
                write!(f, " {c}·x^{i}")?;
            }
        }
        write!(f, " + O(x^{}))", self.c.len())
    }
}

impl<F: Field> fmt::Display for PowerSeries<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// x^e · unit(x) with a rational leading exponent e and unit(0) = 1.
/// Houses Schwarz-map quotients.
#[derive(Clone, Debug)]
pub struct FracSeries<F: Field> {
    pub exponent: BigRational,
    pub unit: PowerSeries<F>,
}

impl<F: Field> FracSeries<F> {
    pub fn new(exponent: BigRational, unit: PowerSeries<F>) -> AResult<Self> {
        if !unit.coeff(0).is_one() {
            return Err(AlgebraError::Series(
                "fractional series unit part must have constant term 1".into(),
            ));
        }
        Ok(FracSeries { exponent, unit })
    }
}

/// Extended-Euclidean (Padé) rational reconstruction of a series known mod
/// x^N: find N/D with deg N ≤ num_degree, deg D ≤ den_degree, gcd(N,D) = 1,
/// D(0) ≠ 0 and N/D ≡ series (mod x^N). Returns None when no such pair
/// exists. Callers must supply N ≥ num_degree + den_degree + 2.
pub fn rational_reconstruct<F: Field>(
    series: &PowerSeries<F>,
    num_degree: usize,
    den_degree: usize,
) -> Option<RationalMap<F>> {
    let n = series.precision();
    assert!(
        n >= num_degree + den_degree + 2,
        "need at least num+den+2 series terms"
    );
    let sample = series.coeffs()[0].zero_like().from_int(1);
    let xn = Polynomial::monomial(sample.clone(), n);
    let s = Polynomial::from_coeffs(series.coeffs().to_vec());
    if s.is_zero() {
        // The zero function: representable iff num bound allows 0.
        let den = Polynomial::constant(sample);
        return RationalMap::new(Polynomial::zero(), den).ok();
    }
    // Extended Euclid on (x^N, S) tracking v with v·S ≡ r (mod x^N).
    let mut r0 = xn;
    let mut r1 = s.clone();
    let mut v0 = Polynomial::zero();
    let mut v1 = Polynomial::one_like(&sample);
    while r1.degree().map_or(false, |d| d > num_degree) {
        let (q, r2) = r0.divrem(&r1).ok()?;
        let v2 = v0.sub(&q.mul(&v1));
        r0 = std::mem::replace(&mut r1, r2);
        v0 = std::mem::replace(&mut v1, v2);
    }
    let (num, den) = (r1, v1);
    if den.is_zero() || den.degree().map_or(true, |d| d > den_degree) {
        return None;
    }
    if den.coeff(0).is_zero() {
        return None;
    }
    // Normalize away any common factor, then verify the congruence exactly.
    let g = num.gcd(&den);
    let (num, den) = if g.is_constant() {
        (num, den)
    } else {
        (num.div_exact(&g).ok()?, den.div_exact(&g).ok()?)
    };
    if den.coeff(0).is_zero() {
        return None;
    }
    let zero = sample.zero_like();
    let prod = den.mul(&s);
    for i in 0..n {
        let want = if num.is_zero() { zero.clone() } else { num.coeff(i) };
        let got = if prod.is_zero() { zero.clone() } else { prod.coeff(i) };
        if got != want {
            return None;
        }
    }
    RationalMap::new(num, den).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::fp::Fp;
    use crate::algebra::rat::Rat;

    fn geom(p: u64, n: usize) -> PowerSeries<Fp> {
        PowerSeries::from_coeffs(vec![Fp::new(1, p).unwrap(); n])
    }

    #[test]
    fn reconstruct_geometric() {
        // 1 + x + ... + x⁹ → 1/(1−x)
        let s = geom(101, 10);
        let r = rational_reconstruct(&s, 0, 1).unwrap();
        let one = Fp::new(1, 101).unwrap();
        let expect = RationalMap::new(
            Polynomial::constant(one),
            Polynomial::from_coeffs(vec![one, one.neg()]),
        )
        .unwrap();
        assert_eq!(r, expect);
    }

    #[test]
    fn reconstruct_rejects_constant_bounds() {
        let one = Fp::new(1, 101).unwrap();
        let mut c = vec![one.zero_like(); 10];
        c[0] = one;
        c[1] = one;
        let s = PowerSeries::from_coeffs(c);
        assert!(rational_reconstruct(&s, 0, 0).is_none());
    }

    #[test]
    fn reconstruct_fraction_mod_p() {
        // (3+x)/(1−2x) expanded by series division, then reconstructed.
        let p = 101;
        let one = Fp::new(1, p).unwrap();
        let num = Polynomial::from_coeffs(vec![one.from_int(3), one]);
        let den = Polynomial::from_coeffs(vec![one, one.from_int(-2)]);
        let s = PowerSeries::from_poly(&num, &one, 10)
            .divide(&PowerSeries::from_poly(&den, &one, 10))
            .unwrap();
        let r = rational_reconstruct(&s, 1, 1).unwrap();
        assert_eq!(r, RationalMap::new(num, den).unwrap());
    }

    #[test]
    fn reversion_inverts() {
        // f = x/(1−x) = x + x² + …; f⁻¹ = x/(1+x)
        let n = 12;
        let one = Rat::from_int(1);
        let mut c = vec![one.zero_like(); n];
        for i in 1..n {
            c[i] = one.clone();
        }
        let f = PowerSeries::from_coeffs(c);
        let g = f.reversion().unwrap();
        let comp = f.compose(&g).unwrap();
        assert_eq!(comp, PowerSeries::identity(&one, n));
        // x/(1+x) = x − x² + x³ − …
        for i in 1..n {
            assert_eq!(g.coeff(i), if i % 2 == 1 { one.clone() } else { one.neg() });
        }
    }

    #[test]
    fn nth_root_roundtrip() {
        let one = Rat::from_int(1);
        let mut c = vec![one.clone(); 10];
        c[3] = Rat::from_pair(5, 7);
        let u = PowerSeries::from_coeffs(c);
        let r = u.nth_root_unit(3).unwrap();
        assert_eq!(r.pow(3), u);
    }
}
