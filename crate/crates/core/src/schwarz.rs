//! Local series solutions of the hypergeometric and Heun equations, Schwarz
//! map quotients, and the reversion/composition that recovers the covering
//! from an identified pair of Schwarz maps.

use num::{BigRational, One, Signed};

use crate::algebra::rat::Rat;
use crate::algebra::series::{FracSeries, PowerSeries};
use crate::algebra::Field;
use crate::error::{AResult, AlgebraError};
use crate::patterns::KlmType;

/// Gauss hypergeometric parameters (A, B; C), kept as exact rationals.
#[derive(Clone, Debug, PartialEq)]
pub struct HypergeometricData {
    pub a: BigRational,
    pub b: BigRational,
    pub c: BigRational,
}

fn br(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// (A, B, C) of the standard frame: exponent differences (1/ℓ, 1/k, 1/m)
/// at z = (0, 1, ∞).
pub fn hypergeometric_from_klm(klm: &KlmType) -> HypergeometricData {
    hypergeometric_from_orders(klm.k as i64, klm.l as i64, klm.m as i64)
}

/// (A, B, C) for prescribed orders (e₁ at z=1, e₀ at z=0, e∞ at z=∞):
/// A = (1 − 1/e₀ − 1/e₁ − 1/e∞)/2, B = A + 1/e∞, C = 1 − 1/e₀.
pub fn hypergeometric_from_orders(e1: i64, e0: i64, einf: i64) -> HypergeometricData {
    let one = BigRational::one();
    let a = (&one - br(1, e0) - br(1, e1) - br(1, einf)) / br(2, 1);
    let b = &a + br(1, einf);
    let c = &one - br(1, e0);
    HypergeometricData { a, b, c }
}

impl HypergeometricData {
    /// Leading exponent of the second local solution: 1 − C.
    pub fn psi_exponent(&self) -> BigRational {
        BigRational::one() - &self.c
    }

    /// Parameters of the second solution: (1+A−C, 1+B−C; 2−C).
    pub fn second_solution(&self) -> HypergeometricData {
        let one = BigRational::one();
        HypergeometricData {
            a: &one + &self.a - &self.c,
            b: &one + &self.b - &self.c,
            c: br(2, 1) - &self.c,
        }
    }
}

/// Map a rational constant into the coefficient domain.
pub fn rat_in<F: Field>(x: &BigRational, sample: &F) -> AResult<F> {
    let r = Rat(x.clone());
    let d: i64 = r
        .denom()
        .try_into()
        .map_err(|_| AlgebraError::Other("denominator too large".into()))?;
    let n: i64 = r
        .numer()
        .try_into()
        .map_err(|_| AlgebraError::Other("numerator too large".into()))?;
    sample.from_ratio(n, d)
}

/// 2F1(A, B; C) series to N terms: a₀ = 1, a_{j+1} = a_j (A+j)(B+j)/((C+j)(j+1)).
/// A division by zero in the domain aborts with the failing index.
pub fn series_2f1<F: Field>(
    data: &HypergeometricData,
    n: usize,
    sample: &F,
) -> AResult<PowerSeries<F>> {
    let a = rat_in(&data.a, sample)?;
    let b = rat_in(&data.b, sample)?;
    let c = rat_in(&data.c, sample)?;
    let mut out = vec![sample.zero_like(); n.max(1)];
    out[0] = sample.one_like();
    let mut cur = sample.one_like();
    for j in 0..n.saturating_sub(1) {
        let jf = sample.from_int(j as i64);
        let den = c.add(&jf).mul(&jf.add(&sample.one_like()));
        let num = a.add(&jf).mul(&b.add(&jf));
        let den_inv = den
            .inv()
            .map_err(|_| AlgebraError::RecurrenceFailure { index: j + 1 })?;
        cur = cur.mul(&num).mul(&den_inv);
        out[j + 1] = cur.clone();
    }
    Ok(PowerSeries::from_coeffs(out))
}

/// Heun parameters over a coefficient domain.
#[derive(Clone, Debug, PartialEq)]
pub struct HeunData<F: Field> {
    pub t: F,
    pub q: F,
    pub a: F,
    pub b: F,
    pub c: F,
    pub d: F,
}

impl<F: Field> HeunData<F> {
    /// Accessory parameter of the second local solution:
    /// q₁ = q − (c−1)(a + b − c − d + d·t + 1).
    pub fn q1(&self) -> F {
        let one = self.q.one_like();
        let inner = self
            .a
            .add(&self.b)
            .sub(&self.c)
            .sub(&self.d)
            .add(&self.d.mul(&self.t))
            .add(&one);
        self.q.sub(&self.c.sub(&one).mul(&inner))
    }

    /// Parameters of the second solution x^(1−c)·Hn(t; q₁; a−c+1, b−c+1; 2−c; d).
    pub fn second_solution(&self) -> HeunData<F> {
        let one = self.q.one_like();
        HeunData {
            t: self.t.clone(),
            q: self.q1(),
            a: self.a.sub(&self.c).add(&one),
            b: self.b.sub(&self.c).add(&one),
            c: one.add(&one).sub(&self.c),
            d: self.d.clone(),
        }
    }
}

/// Which of the two local Heun solutions at x = 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeunSolution {
    First,
    Second,
}

/// Hn series to N terms: r₀ = 1 and
/// t(j+1)(j+c)·r_{j+1} = [(1+t)j(j−1) + (c(1+t) + dt + e)j + q]·r_j
///                        − (j−1+a)(j−1+b)·r_{j−1},  e = a+b−c−d+1.
/// Division by zero aborts with the failing index. The recurrence is
/// validated by the ODE residual oracle rather than trusted as transcribed.
pub fn heun_series_raw<F: Field>(data: &HeunData<F>, n: usize) -> AResult<PowerSeries<F>> {
    let sample = &data.q;
    if data.t.is_zero() {
        return Err(AlgebraError::Other("Heun location t must be nonzero".into()));
    }
    let one = sample.one_like();
    let e = data.a.add(&data.b).sub(&data.c).sub(&data.d).add(&one);
    let cpd = data.c.mul(&one.add(&data.t)).add(&data.d.mul(&data.t)).add(&e);
    let mut out = vec![sample.zero_like(); n.max(1)];
    out[0] = sample.one_like();
    let mut prev = sample.zero_like();
    let mut cur = sample.one_like();
    for j in 0..n.saturating_sub(1) {
        let jf = sample.from_int(j as i64);
        let lead = one
            .add(&data.t)
            .mul(&jf)
            .mul(&jf.sub(&one))
            .add(&cpd.mul(&jf))
            .add(&data.q);
        let tail = jf
            .sub(&one)
            .add(&data.a)
            .mul(&jf.sub(&one).add(&data.b));
        let num = lead.mul(&cur).sub(&tail.mul(&prev));
        let den = data
            .t
            .mul(&jf.add(&one))
            .mul(&jf.add(&data.c));
        let den_inv = den
            .inv()
            .map_err(|_| AlgebraError::RecurrenceFailure { index: j + 1 })?;
        let next = num.mul(&den_inv);
        prev = std::mem::replace(&mut cur, next.clone());
        out[j + 1] = next;
    }
    Ok(PowerSeries::from_coeffs(out))
}

/// Local Heun solution series. The second solution's series is the Hn part;
/// the full solution is x^(1−c) times it (the caller tracks the exponent).
pub fn series_heun<F: Field>(
    data: &HeunData<F>,
    which: HeunSolution,
    n: usize,
) -> AResult<PowerSeries<F>> {
    match which {
        HeunSolution::First => heun_series_raw(data, n),
        HeunSolution::Second => heun_series_raw(&data.second_solution(), n),
    }
}

/// Quotient of two local solutions y₂/y₁ packaged as x^e · (unit with
/// constant term 1). `exponent` is 1−C (hypergeometric) or 1−c (Heun).
pub fn schwarz_quotient<F: Field>(
    y1: &PowerSeries<F>,
    y2: &PowerSeries<F>,
    exponent: BigRational,
) -> AResult<FracSeries<F>> {
    let unit = y2.divide(y1)?;
    FracSeries::new(exponent, unit)
}

/// Recover the covering series φ with ψ₀(φ) = K·ψ₁ by clearing the
/// fractional exponents: with e₀ = 1/L (numerator 1 in every frame the
/// hypergeometric side produces), σ₀ := ψ₀^L = z·u₀^L has order 1 and
/// reverts; φ := σ₀⁻¹(K^L · x^M · u₁^L) where M = e₁·L is the branching
/// order of x = 0 and must be a positive integer.
pub fn recover_phi_series<F: Field>(
    psi0: &FracSeries<F>,
    psi1: &FracSeries<F>,
    k_const: &F,
    n: usize,
) -> AResult<PowerSeries<F>> {
    if !psi0.exponent.is_positive() || !psi1.exponent.is_positive() {
        return Err(AlgebraError::Series("leading exponents must be positive".into()));
    }
    if !psi0.exponent.numer().is_one() {
        return Err(AlgebraError::Series(
            "unsupported ψ₀ exponent (numerator must be 1)".into(),
        ));
    }
    let l: u64 = psi0
        .exponent
        .denom()
        .try_into()
        .map_err(|_| AlgebraError::Series("exponent denominator too large".into()))?;
    let m_rat = &psi1.exponent * BigRational::from_integer(l.into());
    if !m_rat.is_integer() {
        return Err(AlgebraError::Series(format!(
            "non-integer branching order e₁/e₀ = {}",
            &psi1.exponent / &psi0.exponent
        )));
    }
    let m: u64 = m_rat
        .to_integer()
        .try_into()
        .map_err(|_| AlgebraError::Series("branching order too large".into()))?;
    if m == 0 {
        return Err(AlgebraError::Series("zero branching order".into()));
    }
    let u0 = psi0.unit.truncate(n);
    let u1 = psi1.unit.truncate(n);
    // σ₀ = z·u₀^L, order exactly 1.
    let sigma0 = u0.pow(l).shift_up(1);
    let rev = sigma0.reversion()?;
    // w = K^L · x^M · u₁^L
    let w = u1.pow(l).shift_up(m as usize).scale(&k_const.pow_u(l));
    rev.compose(&w)
}

/// Verify ψ₀(φ) = K·ψ₁ to the available precision, in cleared-exponent form:
/// σ₀(φ) == K^L · x^M · u₁^L.
pub fn check_phi_identity<F: Field>(
    psi0: &FracSeries<F>,
    psi1: &FracSeries<F>,
    k_const: &F,
    phi: &PowerSeries<F>,
) -> AResult<bool> {
    let l: u64 = psi0
        .exponent
        .denom()
        .try_into()
        .map_err(|_| AlgebraError::Series("exponent denominator too large".into()))?;
    let m_rat = &psi1.exponent * BigRational::from_integer(l.into());
    if !m_rat.is_integer() {
        return Ok(false);
    }
    let m: usize = m_rat
        .to_integer()
        .try_into()
        .map_err(|_| AlgebraError::Series("branching order too large".into()))?;
    let n = phi.precision().min(psi0.unit.precision()).min(psi1.unit.precision());
    let sigma0 = psi0.unit.truncate(n).pow(l).shift_up(1);
    let lhs = sigma0.compose(&phi.truncate(n))?;
    let rhs = psi1
        .unit
        .truncate(n)
        .pow(l)
        .shift_up(m)
        .scale(&k_const.pow_u(l));
    Ok(lhs == rhs)
}

/// Order of the residual after substituting `y` into the hypergeometric
/// equation cleared of denominators:
/// z(z−1)y″ + [C(z−1) + (A+B−C+1)z]·y′ + AB·y.
pub fn hypergeometric_residual_order<F: Field>(
    data: &HypergeometricData,
    y: &PowerSeries<F>,
) -> AResult<Option<usize>> {
    let sample = &y.coeffs()[0];
    let a = rat_in(&data.a, sample)?;
    let b = rat_in(&data.b, sample)?;
    let c = rat_in(&data.c, sample)?;
    let one = sample.one_like();
    let dy = y.derivative();
    let ddy = dy.derivative();
    let n = y.precision().saturating_sub(2).max(1);
    let tr = |s: &PowerSeries<F>| s.truncate(n);
    // z(z−1) y″ = (z² − z) y″
    let term1 = tr(&ddy.shift_up(2)).sub(&tr(&ddy.shift_up(1)));
    // (C(z−1) + (A+B−C+1)z) y′ = (−C + (A+B+1)z) y′
    let coeff_lin = a.add(&b).add(&one);
    let term2 = tr(&dy.shift_up(1)).scale(&coeff_lin).sub(&tr(&dy).scale(&c));
    let term3 = tr(y).scale(&a.mul(&b));
    let res = term1.add(&term2).add(&term3);
    Ok(res.order())
}

/// Order of the residual after substituting y = x^γ·h into the Heun equation
/// cleared of denominators; the common factor x^(γ−1) is removed, leaving
/// R[h] = (x−1)(x−t)(γ(γ−1)h + 2γxh′ + x²h″) + P₁·(γh + xh′) + x(abx−q)h,
/// P₁ = c(x−1)(x−t) + d·x(x−t) + e·x(x−1).
pub fn heun_residual_order<F: Field>(
    data: &HeunData<F>,
    gamma: &BigRational,
    h: &PowerSeries<F>,
) -> AResult<Option<usize>> {
    let sample = &data.q;
    let g = rat_in(gamma, sample)?;
    let one = sample.one_like();
    let e = data.a.add(&data.b).sub(&data.c).sub(&data.d).add(&one);
    let n = h.precision().saturating_sub(2).max(1);
    let tr = |s: &PowerSeries<F>| s.truncate(n);
    let dh = h.derivative();
    let ddh = dh.derivative();
    // A := γ(γ−1)h + 2γ x h′ + x² h″
    let aa = tr(h)
        .scale(&g.mul(&g.sub(&one)))
        .add(&tr(&dh.shift_up(1)).scale(&g.add(&g)))
        .add(&tr(&ddh.shift_up(2)));
    // multiply a series by c₂x² + c₁x + c₀
    let poly_mul = |s: &PowerSeries<F>, c0: &F, c1: &F, c2: &F| {
        tr(&s.shift_up(2))
            .scale(c2)
            .add(&tr(&s.shift_up(1)).scale(c1))
            .add(&tr(s).scale(c0))
    };
    // (x−1)(x−t) = x² − (1+t)x + t
    let m1pt = one.add(&data.t).neg();
    let term1 = poly_mul(&aa, &data.t, &m1pt, &one);
    // B := γh + xh′
    let bb = tr(h).scale(&g).add(&tr(&dh.shift_up(1)));
    // P₁ = c(x² − (1+t)x + t) + d(x² − tx) + e(x² − x)
    let p1_0 = data.c.mul(&data.t);
    let p1_1 = data
        .c
        .mul(&m1pt)
        .sub(&data.d.mul(&data.t))
        .sub(&e);
    let p1_2 = data.c.add(&data.d).add(&e);
    let term2 = poly_mul(&bb, &p1_0, &p1_1, &p1_2);
    // x(abx − q)h = ab x² h − q x h
    let term3 = tr(&h.shift_up(2))
        .scale(&data.a.mul(&data.b))
        .sub(&tr(&h.shift_up(1)).scale(&data.q));
    let res = term1.add(&term2).add(&term3);
    Ok(res.order())
}

/// Exponent parameters (a, b, c, d) of the Heun equation whose exponent
/// differences at (0, 1, t, ∞) are the given branching fractions.
pub fn heun_exponents_from_fractions(
    f0: &BigRational,
    f1: &BigRational,
    ft: &BigRational,
    finf: &BigRational,
) -> (BigRational, BigRational, BigRational, BigRational) {
    let one = BigRational::one();
    let two = br(2, 1);
    let c = &one - f0;
    let d = &one - f1;
    let b = (&two - f0 - f1 - ft + finf) / &two;
    let a = &b - finf;
    (a, b, c, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::fp::Fp;
    use num::Zero;

    fn q(n: i64, d: i64) -> BigRational {
        br(n, d)
    }

    #[test]
    fn lemma_parameters() {
        let t237 = KlmType::new(2, 3, 7).unwrap();
        let h = hypergeometric_from_klm(&t237);
        assert_eq!((h.a, h.b, h.c), (q(1, 84), q(13, 84), q(2, 3)));
        let t239 = KlmType::new(2, 3, 9).unwrap();
        let h = hypergeometric_from_klm(&t239);
        assert_eq!((h.a.clone(), h.b.clone(), h.c.clone()), (q(1, 36), q(5, 36), q(2, 3)));
        // ψ₀ exponent 1 − C = 1/ℓ.
        assert_eq!(h.psi_exponent(), q(1, 3));
    }

    #[test]
    fn geometric_2f1() {
        // 2F1(1,1;1;z) = 1/(1−z)
        let data = HypergeometricData { a: q(1, 1), b: q(1, 1), c: q(1, 1) };
        let one = Rat::from_int(1);
        let s = series_2f1(&data, 5, &one).unwrap();
        assert!(s.coeffs().iter().all(|c| c.is_one()));
        let s1 = series_2f1(&data, 1, &one).unwrap();
        assert_eq!(s1.coeffs().len(), 1);
        assert!(s1.coeff(0).is_one());
    }

    #[test]
    fn ode_residual_2f1() {
        // The published B7 z-frame: 2F1(1/36, 13/36; 8/9), over ℚ and 𝔽_907.
        let data = hypergeometric_from_orders(2, 9, 3);
        assert_eq!(
            (data.a.clone(), data.b.clone(), data.c.clone()),
            (q(1, 36), q(13, 36), q(8, 9))
        );
        let n = 20;
        let sq = series_2f1(&data, n, &Rat::from_int(1)).unwrap();
        assert!(hypergeometric_residual_order(&data, &sq).unwrap().is_none());
        let fp = Fp::new(1, 907).unwrap();
        let sp = series_2f1(&data, n, &fp).unwrap();
        assert!(hypergeometric_residual_order(&data, &sp).unwrap().is_none());
    }

    fn b7_heun_q() -> HeunData<Rat> {
        // Hn(9; 7/9; 1/3, 1; 7/9; 2/3)
        HeunData {
            t: Rat::from_int(9),
            q: Rat::from_pair(7, 9),
            a: Rat::from_pair(1, 3),
            b: Rat::from_int(1),
            c: Rat::from_pair(7, 9),
            d: Rat::from_pair(2, 3),
        }
    }

    #[test]
    fn q1_value_for_b7() {
        let h = b7_heun_q();
        assert_eq!(h.q1(), Rat::from_pair(187, 81));
        let s = h.second_solution();
        assert_eq!(s.a, Rat::from_pair(5, 9));
        assert_eq!(s.b, Rat::from_pair(11, 9));
        assert_eq!(s.c, Rat::from_pair(11, 9));
    }

    #[test]
    fn heun_constant_solution() {
        // ab·x − q ≡ 0 when a = 0, q = 0: y = 1 solves the equation.
        let h = HeunData {
            t: Rat::from_int(3),
            q: Rat::from_int(0),
            a: Rat::from_int(0),
            b: Rat::from_pair(1, 2),
            c: Rat::from_pair(1, 3),
            d: Rat::from_pair(1, 5),
        };
        let s = heun_series_raw(&h, 8).unwrap();
        assert!(s.coeff(0).is_one());
        assert!((1..8).all(|i| s.coeff(i).is_zero()));
    }

    #[test]
    fn heun_first_coefficient_is_q_over_ct() {
        let h = b7_heun_q();
        let s = heun_series_raw(&h, 3).unwrap();
        let expect = h.q.div(&h.c.mul(&h.t)).unwrap();
        assert_eq!(s.coeff(1), expect);
    }

    #[test]
    fn ode_residual_heun_both_solutions() {
        let h = b7_heun_q();
        let n = 20;
        let y1 = series_heun(&h, HeunSolution::First, n).unwrap();
        assert!(heun_residual_order(&h, &BigRational::zero(), &y1)
            .unwrap()
            .is_none());
        let y2 = series_heun(&h, HeunSolution::Second, n).unwrap();
        let gamma = BigRational::one() - q(7, 9);
        assert!(heun_residual_order(&h, &gamma, &y2).unwrap().is_none());
        for p in [907u64, 293] {
            let sample = Fp::new(1, p).unwrap();
            let hp = HeunData {
                t: rat_in(&q(9, 1), &sample).unwrap(),
                q: rat_in(&q(7, 9), &sample).unwrap(),
                a: rat_in(&q(1, 3), &sample).unwrap(),
                b: sample.one_like(),
                c: rat_in(&q(7, 9), &sample).unwrap(),
                d: rat_in(&q(2, 3), &sample).unwrap(),
            };
            let y1 = series_heun(&hp, HeunSolution::First, n).unwrap();
            assert!(heun_residual_order(&hp, &BigRational::zero(), &y1)
                .unwrap()
                .is_none());
            let y2 = series_heun(&hp, HeunSolution::Second, n).unwrap();
            assert!(heun_residual_order(&hp, &gamma, &y2).unwrap().is_none());
        }
    }

    #[test]
    fn recover_identity_and_reversion_examples() {
        let one = Rat::from_int(1);
        let n = 10;
        // ψ₀ = z, ψ₁ = x, K = 1 → φ = x.
        let psi0 = FracSeries::new(q(1, 1), PowerSeries::one(&one, n)).unwrap();
        let psi1 = FracSeries::new(q(1, 1), PowerSeries::one(&one, n)).unwrap();
        let phi = recover_phi_series(&psi0, &psi1, &one, n).unwrap();
        assert_eq!(phi, PowerSeries::identity(&one, n));
        // ψ₀ = z/(1−z) = z·(1/(1−z)); ψ₁ = x, K = 1 → φ = x/(1+x).
        let geom = PowerSeries::from_coeffs(vec![one.clone(); n]);
        let psi0 = FracSeries::new(q(1, 1), geom).unwrap();
        let psi1 = FracSeries::new(q(1, 1), PowerSeries::one(&one, n)).unwrap();
        let phi = recover_phi_series(&psi0, &psi1, &one, n).unwrap();
        for i in 1..n {
            assert_eq!(phi.coeff(i), if i % 2 == 1 { one.clone() } else { one.neg() });
        }
        assert!(check_phi_identity(&psi0, &psi1, &one, &phi).unwrap());
    }

    #[test]
    fn heun_exponent_bookkeeping() {
        // B7 frame: fractions (2/9, 1/3, 1/9, 2/3) at (0, 1, t, ∞).
        let (a, b, c, d) =
            heun_exponents_from_fractions(&q(2, 9), &q(1, 3), &q(1, 9), &q(2, 3));
        assert_eq!((a, b, c, d), (q(1, 3), q(1, 1), q(7, 9), q(2, 3)));
    }
}
