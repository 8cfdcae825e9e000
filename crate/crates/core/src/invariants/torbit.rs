//! t-values of the exceptional locus: the S₃ orbit when a cross-ratio lies
//! in the base field, otherwise the minimal polynomial of t over ℚ obtained
//! as a factor of the resolvent 256(T²−T+1)³ − j·T²(T−1)².

use num::{BigInt, One, Signed, Zero};

use crate::algebra::fp::next_prime_at_least;
use crate::algebra::numfield::NfElem;
use crate::algebra::poly::Polynomial;
use crate::algebra::rat::{squarefree_kernel, Rat};
use crate::algebra::recognize::{minpoly_from_padic, roots_mod_p};
use crate::algebra::roots::FieldRoots;
use crate::algebra::zpk::{lift_root, ZpCtx};
use crate::algebra::Field;
use crate::error::{PResult, PipelineError};
use crate::QPoly;

use super::{j_invariant, s3_orbit, ExceptionalLocus};

/// Outcome of the t-orbit computation.
#[derive(Clone, Debug, PartialEq)]
pub enum TOrbit<F: Field> {
    /// Full orbit of cross-ratios in the base field (6 values, or the
    /// collapsed orbit {−1, 2, ½} at j = 1728).
    Values(Vec<F>),
    /// Minimal polynomial of a t-value over ℚ (monic, rational coefficients).
    MinPolyQ(QPoly),
    /// Base field outside the supported range.
    Undetermined,
}

/// The resolvent R(T) = 256(T²−T+1)³ − j·T²(T−1)² over ℚ.
pub fn t_resolvent(j: &Rat) -> QPoly {
    let q = |n: i64| Rat::from_int(n);
    let base = QPoly::from_coeffs(vec![q(1), q(-1), q(1)]);
    let lead = base.pow(3).scale(&q(256));
    let tail = QPoly::from_coeffs(vec![q(0), q(0), q(1)])
        .mul(&QPoly::from_coeffs(vec![q(1), q(-1)]).pow(2))
        .scale(j);
    lead.sub(&tail)
}

/// Factor a squarefree monic rational polynomial into irreducible factors
/// over ℚ by lifting mod-p roots at a few primes and recognizing minimal
/// polynomials p-adically. Every factor is verified by exact division; an
/// unsplit remainder is returned as a single trailing block.
pub fn factor_squarefree_rational(f: &QPoly) -> PResult<Vec<QPoly>> {
    let mut rem = f.monic().map_err(PipelineError::Algebra)?;
    let mut out: Vec<QPoly> = Vec::new();
    let deg = f.deg0() as u32;
    let height: BigInt = {
        let mut den = BigInt::one();
        for c in f.coeffs() {
            den = num::Integer::lcm(&den, c.denom());
        }
        let mut h = BigInt::zero();
        for c in f.coeffs() {
            h += (c.numer() * (&den / c.denom())).abs();
        }
        (h + BigInt::from(1)) * BigInt::from(2).pow(deg)
    };
    let mut prime = 10_007u64;
    let mut attempts = 0;
    while rem.deg0() >= 1 && attempts < 12 {
        attempts += 1;
        prime = next_prime_at_least(prime + 1);
        let Ok(roots) = roots_mod_p(rem.coeffs(), prime) else { continue };
        if roots.is_empty() {
            continue;
        }
        // κ from the soundness margin p^κ > 2H²(D+1), with headroom.
        let dmax = rem.deg0();
        let mut k = 2u32;
        let need = BigInt::from(2) * &height * &height * BigInt::from(dmax as u64 + 1);
        while BigInt::from(prime).pow(k) <= &need * BigInt::from(4) {
            k += 1;
        }
        let ctx = ZpCtx::new(prime, k + 2);
        let mut den = BigInt::one();
        for c in rem.coeffs() {
            den = num::Integer::lcm(&den, c.denom());
        }
        let int_coeffs: Vec<BigInt> = rem
            .coeffs()
            .iter()
            .map(|c| c.numer() * (&den / c.denom()))
            .collect();
        for r0 in roots {
            if rem.deg0() == 0 {
                break;
            }
            let Ok(lifted) = lift_root(&int_coeffs, r0, &ctx) else { continue };
            let Ok(Some(m)) = minpoly_from_padic(&lifted, rem.deg0(), &height) else {
                continue;
            };
            let cand = Polynomial::from_coeffs(
                m.coeffs
                    .iter()
                    .map(|c| Rat::from_bigs(c.clone(), BigInt::one()))
                    .collect(),
            )
            .monic()
            .map_err(PipelineError::Algebra)?;
            if let Ok(q) = rem.div_exact(&cand) {
                out.push(cand);
                rem = q;
            }
        }
        if rem.deg0() == 0 {
            break;
        }
    }
    if rem.deg0() >= 1 {
        out.push(rem);
    }
    out.sort_by_key(|p| p.deg0());
    Ok(out)
}

/// t-orbit for a locus over ℚ.
pub fn t_orbit_rat(locus: &ExceptionalLocus<Rat>) -> PResult<TOrbit<Rat>> {
    let j = j_invariant(locus).map_err(PipelineError::Algebra)?;
    t_orbit_from_j_rat(&j)
}

fn t_orbit_from_j_rat(j: &Rat) -> PResult<TOrbit<Rat>> {
    let q = |n: i64| Rat::from_int(n);
    if j.is_zero() {
        // Collapsed sextet: the roots of t² − t + 1, never rational.
        return Ok(TOrbit::MinPolyQ(QPoly::from_coeffs(vec![q(1), q(-1), q(1)])));
    }
    if *j == q(1728) {
        return Ok(TOrbit::Values(vec![q(-1), q(2), Rat::from_pair(1, 2)]));
    }
    let res = t_resolvent(j);
    let roots = Rat::base_field_roots(&res).map_err(PipelineError::Algebra)?;
    if let Some(t) = roots.first() {
        return Ok(TOrbit::Values(s3_orbit(t).map_err(PipelineError::Algebra)?));
    }
    let factors = factor_squarefree_rational(&res)?;
    let m = factors
        .into_iter()
        .min_by_key(|f| f.deg0())
        .ok_or_else(|| PipelineError::Internal("empty factorization".into()))?;
    Ok(TOrbit::MinPolyQ(m))
}

/// t-orbit for a locus over a number field K = ℚ(α): resolves fully when
/// j ∈ ℚ (returning K-values when the t-field embeds in K); otherwise
/// reports Undetermined.
pub fn t_orbit_nf(locus: &ExceptionalLocus<NfElem>) -> PResult<TOrbit<NfElem>> {
    let j = j_invariant(locus).map_err(PipelineError::Algebra)?;
    let sample = &j;
    let Some(jq) = j.as_rat() else {
        return Ok(TOrbit::Undetermined);
    };
    match t_orbit_from_j_rat(&jq)? {
        TOrbit::Values(v) => Ok(TOrbit::Values(
            v.into_iter()
                .map(|x| NfElem::from_rat(sample.field(), &x))
                .collect(),
        )),
        TOrbit::MinPolyQ(m) => {
            if m.deg0() == 2 {
                let mk = m.map_coeffs(|c| NfElem::from_rat(sample.field(), c));
                let roots = NfElem::base_field_roots(&mk).map_err(PipelineError::Algebra)?;
                if let Some(t) = roots.first() {
                    return Ok(TOrbit::Values(
                        s3_orbit(t).map_err(PipelineError::Algebra)?,
                    ));
                }
            }
            Ok(TOrbit::MinPolyQ(m))
        }
        TOrbit::Undetermined => Ok(TOrbit::Undetermined),
    }
}

/// For a quadratic minimal polynomial over ℚ, the squarefree kernel a with
/// splitting field ℚ(√a).
pub fn quadratic_field_kernel(m: &QPoly) -> Option<BigInt> {
    if m.deg0() != 2 {
        return None;
    }
    let disc = m.discriminant().ok()?;
    let scaled = disc.numer() * disc.denom();
    Some(squarefree_kernel(&scaled))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ratfun::{Mobius, ProjPoint};

    fn q(n: i64) -> Rat {
        Rat::from_int(n)
    }

    #[test]
    fn orbit_of_nine_from_locus() {
        let e = Polynomial::monomial(q(1), 1)
            .mul(&Polynomial::linear_root(&q(1)))
            .mul(&Polynomial::linear_root(&q(9)));
        let locus = ExceptionalLocus { poly: e, includes_infinity: true };
        match t_orbit_rat(&locus).unwrap() {
            TOrbit::Values(mut v) => {
                let mut expect = vec![
                    q(9),
                    q(-8),
                    Rat::from_pair(9, 8),
                    Rat::from_pair(1, 9),
                    Rat::from_pair(-1, 8),
                    Rat::from_pair(8, 9),
                ];
                v.sort();
                expect.sort();
                assert_eq!(v, expect);
            }
            other => panic!("expected values, got {other:?}"),
        }
    }

    #[test]
    fn collapsed_orbit_at_1728() {
        let e = Polynomial::monomial(q(1), 1)
            .mul(&Polynomial::linear_root(&q(1)))
            .mul(&Polynomial::linear_root(&q(2)));
        let locus = ExceptionalLocus { poly: e, includes_infinity: true };
        match t_orbit_rat(&locus).unwrap() {
            TOrbit::Values(v) => assert_eq!(v, vec![q(-1), q(2), Rat::from_pair(1, 2)]),
            other => panic!("expected collapsed orbit, got {other:?}"),
        }
    }

    #[test]
    fn resolvent_factorization_covers_degree() {
        let res = t_resolvent(&q(100));
        let factors = factor_squarefree_rational(&res).unwrap();
        let total: usize = factors.iter().map(|f| f.deg0()).sum();
        assert_eq!(total, 6);
        let prod = factors
            .iter()
            .fold(Polynomial::one_like(&q(1)), |a, b| a.mul(b));
        assert_eq!(prod, res.monic().unwrap());
    }

    #[test]
    fn orbit_invariance_under_mobius() {
        let e = Polynomial::monomial(q(1), 1)
            .mul(&Polynomial::linear_root(&q(1)))
            .mul(&Polynomial::linear_root(&q(9)));
        let locus = ExceptionalLocus { poly: e, includes_infinity: true };
        let before = t_orbit_rat(&locus).unwrap();
        // Move the four points {0, 1, 9, ∞} by μ(x) = (x+5)/(x−2).
        let mu = Mobius::new(q(1), q(5), q(1), q(-2)).unwrap();
        let mut poly = Polynomial::one_like(&q(1));
        let mut inf = false;
        for p in [
            ProjPoint::Finite(q(0)),
            ProjPoint::Finite(q(1)),
            ProjPoint::Finite(q(9)),
            ProjPoint::Infinity,
        ] {
            match mu.apply(&p) {
                ProjPoint::Finite(v) => poly = poly.mul(&Polynomial::linear_root(&v)),
                ProjPoint::Infinity => inf = true,
            }
        }
        let locus2 = ExceptionalLocus { poly, includes_infinity: inf };
        let after = t_orbit_rat(&locus2).unwrap();
        match (before, after) {
            (TOrbit::Values(mut a), TOrbit::Values(mut b)) => {
                a.sort();
                b.sort();
                assert_eq!(a, b);
            }
            other => panic!("expected value orbits, got {other:?}"),
        }
    }
}
