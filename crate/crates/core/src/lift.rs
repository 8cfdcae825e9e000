//! Hensel lifting of mod-p candidates to p-adic precision, recognition of
//! the coefficients over a number field, and exact verification of the
//! resulting catalog entries.

use std::sync::Arc;

use num::{BigInt, BigUint, One};
use serde::{Deserialize, Serialize};

use crate::algebra::fp::fp64;
use crate::algebra::linalg::solve_square;
use crate::algebra::numfield::{NfElem, NumberField};
use crate::algebra::poly::Polynomial;
use crate::algebra::rat::Rat;
use crate::algebra::ratfun::RationalMap;
use crate::algebra::recognize::{
    minpoly_from_padic, nf_to_padic, recognize_in_field, verify_padic_image,
};
use crate::algebra::series::PowerSeries;
use crate::algebra::zpk::{rational_from_residue, ZpCtx, ZpK};
use crate::algebra::Field;
use crate::error::{PResult, PipelineError};
use crate::invariants::torbit::{t_orbit_nf, TOrbit};
use crate::invariants::{branching_data, j_invariant};
use crate::patterns::{BranchingPattern, Fiber};
use crate::schwarz::series_2f1;
use crate::search::{BelyiCandidate, ScanFrame, ZPos};
use crate::{NfMap, NfPoly};

/// Per-z-position structure of the defining polynomial identity
/// A − B − C = 0 with A = α·S₀^o·E₀, B = β·S₁^o·E₁, C = S∞^o·E∞.
#[derive(Clone, Debug)]
struct ZSlot {
    order: u32,
    regular_count: usize,
    /// (position 0 or 1, multiplicity) of pinned finite exceptional points.
    fixed: Vec<(i64, u32)>,
    /// Multiplicity of (x − t) in this slot (0 when t is elsewhere).
    t_mult: u32,
    /// Order of ∞ when the ∞-point lies in this slot (degree deficit).
    inf_ord: u32,
}

fn slot_layout(pattern: &BranchingPattern, frame: &ScanFrame) -> [ZSlot; 3] {
    let mk = |z: ZPos| -> ZSlot {
        let fiber = match z {
            ZPos::Z0 => frame.z_roles[0],
            ZPos::Z1 => frame.z_roles[1],
            ZPos::Zinf => frame.z_roles[2],
        };
        let order = pattern.klm.order_of(fiber);
        let mut fixed = Vec::new();
        let mut t_mult = 0;
        let mut inf_ord = 0;
        for (pos, frac) in [
            (Some(0i64), frame.f0),
            (Some(1), frame.f1),
            (None, frame.finf),
        ] {
            if frame.z_of(frac.fiber) == z {
                match pos {
                    Some(v) => fixed.push((v, frac.numerator)),
                    None => inf_ord = frac.numerator,
                }
            }
        }
        if frame.z_of(frame.ft.fiber) == z {
            t_mult = frame.ft.numerator;
        }
        let exc_total: u32 =
            fixed.iter().map(|f| f.1).sum::<u32>() + t_mult + inf_ord;
        let regular_count = ((pattern.degree - exc_total) / order) as usize;
        ZSlot { order, regular_count, fixed, t_mult, inf_ord }
    };
    [mk(ZPos::Z0), mk(ZPos::Z1), mk(ZPos::Zinf)]
}

/// A candidate lifted to precision p^κ: the scalars (α, β, t, q, K, κ̄) and
/// the monic regular-part coefficient vectors per fiber slot.
#[derive(Clone, Debug)]
pub struct LiftedCandidate {
    pub pattern: BranchingPattern,
    pub frame: ScanFrame,
    pub p: u64,
    pub precision: u32,
    pub alpha: ZpK,
    pub beta: ZpK,
    pub t: ZpK,
    pub q: ZpK,
    pub k_const: ZpK,
    pub kappa_const: ZpK,
    /// Non-leading coefficients of the monic regular parts S₀, S₁, S∞.
    pub regs: [Vec<ZpK>; 3],
    /// Valuations of the Newton residuals after each iteration.
    pub residual_valuations: Vec<u32>,
}

fn monic_from(coeffs: &[ZpK], one: &ZpK) -> Polynomial<ZpK> {
    let mut v = coeffs.to_vec();
    v.push(one.clone());
    Polynomial::from_coeffs(v)
}

/// (A, B, C) of the defining identity from an unknown vector
/// X = [α, β, t, s₀…, s₁…, s∞…].
fn build_sides(
    x: &[ZpK],
    slots: &[ZSlot; 3],
) -> (Polynomial<ZpK>, Polynomial<ZpK>, Polynomial<ZpK>) {
    let one = x[0].one_like();
    let tvar = &x[2];
    let mut idx = 3usize;
    let mut sides = Vec::new();
    for slot in slots.iter() {
        let s = monic_from(&x[idx..idx + slot.regular_count], &one);
        idx += slot.regular_count;
        let mut e = Polynomial::one_like(&one);
        for &(pos, mult) in &slot.fixed {
            e = e.mul(&Polynomial::linear_root(&one.from_int(pos)).pow(mult as usize));
        }
        if slot.t_mult > 0 {
            e = e.mul(&Polynomial::linear_root(tvar).pow(slot.t_mult as usize));
        }
        sides.push(s.pow(slot.order as usize).mul(&e));
    }
    let a = sides[0].scale(&x[0]);
    let b = sides[1].scale(&x[1]);
    let c = sides[2].clone();
    (a, b, c)
}

/// Coefficient vector (length d+1) of A − B − C.
fn residual_vector(x: &[ZpK], slots: &[ZSlot; 3], d: usize) -> Vec<ZpK> {
    let (a, b, c) = build_sides(x, slots);
    let f = a.sub(&b).sub(&c);
    (0..=d)
        .map(|i| {
            if f.is_zero() {
                x[0].zero_like()
            } else {
                f.coeff(i)
            }
        })
        .collect()
}

/// Jacobian ∂F/∂X as rows = equations (coefficients of x^0..x^d).
fn jacobian(x: &[ZpK], slots: &[ZSlot; 3], d: usize) -> Vec<Vec<ZpK>> {
    let one = x[0].one_like();
    let zero = x[0].zero_like();
    let tvar = &x[2];
    let n_unknowns = x.len();
    // Precompute per-slot pieces.
    let mut s_polys = Vec::new();
    let mut e_fixed = Vec::new();
    let mut idx = 3usize;
    for slot in slots.iter() {
        s_polys.push(monic_from(&x[idx..idx + slot.regular_count], &one));
        idx += slot.regular_count;
        let mut e = Polynomial::one_like(&one);
        for &(pos, mult) in &slot.fixed {
            e = e.mul(&Polynomial::linear_root(&one.from_int(pos)).pow(mult as usize));
        }
        e_fixed.push(e);
    }
    let tfactor = |mult: u32| -> Polynomial<ZpK> {
        if mult == 0 {
            Polynomial::one_like(&one)
        } else {
            Polynomial::linear_root(tvar).pow(mult as usize)
        }
    };
    // Columns as polynomials, then transpose into coefficient rows.
    let mut cols: Vec<Polynomial<ZpK>> = Vec::with_capacity(n_unknowns);
    let sign = [one.clone(), one.neg(), one.neg()];
    // ∂/∂α and ∂/∂β
    cols.push(
        s_polys[0]
            .pow(slots[0].order as usize)
            .mul(&e_fixed[0])
            .mul(&tfactor(slots[0].t_mult)),
    );
    cols.push(
        s_polys[1]
            .pow(slots[1].order as usize)
            .mul(&e_fixed[1])
            .mul(&tfactor(slots[1].t_mult))
            .neg(),
    );
    // ∂/∂t: only slots containing (x−t) contribute.
    let scalars = [x[0].clone(), x[1].clone(), one.clone()];
    let mut dt = Polynomial::zero();
    for (i, slot) in slots.iter().enumerate() {
        if slot.t_mult == 0 {
            continue;
        }
        let dtf = Polynomial::linear_root(tvar)
            .pow(slot.t_mult as usize - 1)
            .scale(&one.from_int(slot.t_mult as i64).neg());
        let term = s_polys[i]
            .pow(slot.order as usize)
            .mul(&e_fixed[i])
            .mul(&dtf)
            .scale(&scalars[i])
            .scale(&sign[i]);
        dt = dt.add(&term);
    }
    cols.push(dt);
    // ∂/∂(s coefficients)
    for (i, slot) in slots.iter().enumerate() {
        let base = s_polys[i]
            .pow(slot.order as usize - 1)
            .mul(&e_fixed[i])
            .mul(&tfactor(slot.t_mult))
            .scale(&scalars[i])
            .scale(&one.from_int(slot.order as i64))
            .scale(&sign[i]);
        for k in 0..slot.regular_count {
            cols.push(base.shift_up(k));
        }
    }
    let mut rows = vec![vec![zero; n_unknowns]; d + 1];
    for (j, col) in cols.iter().enumerate() {
        for i in 0..=d {
            if !col.is_zero() {
                rows[i][j] = col.coeff(i);
            }
        }
    }
    rows
}

/// Hensel-lift a scan candidate to precision p^κ by Newton iteration on the
/// coefficientwise defining identity, with the three pinned exceptional
/// points and monic regular parts as the normalization.
pub fn hensel_lift(cand: &BelyiCandidate, kappa: u32) -> PResult<LiftedCandidate> {
    let p = cand.p;
    let d = cand.pattern.degree as usize;
    let slots = slot_layout(&cand.pattern, &cand.frame);
    let n_unknowns: usize = 3 + slots.iter().map(|s| s.regular_count).sum::<usize>();
    if n_unknowns != d + 1 {
        return Err(PipelineError::Internal(format!(
            "lift system is not square: {n_unknowns} unknowns vs {} equations",
            d + 1
        )));
    }

    // Initial values mod p from the candidate map.
    let ctx1 = ZpCtx::new(p, 1);
    let from_fp = |v: u64, ctx: &Arc<ZpCtx>| ZpK::new(ctx, BigUint::from(v));
    let num = cand.phi.num();
    let den = cand.phi.den();
    let bnum = num.sub(den);
    let fiber_polys = [num.clone(), bnum.clone(), den.clone()];
    let mut x0: Vec<ZpK> = Vec::with_capacity(n_unknowns);
    let alpha0 = num.leading().unwrap().value();
    let beta0 = bnum.leading().unwrap().value();
    x0.push(from_fp(alpha0, &ctx1));
    x0.push(from_fp(beta0, &ctx1));
    x0.push(from_fp(cand.t, &ctx1));
    for (i, slot) in slots.iter().enumerate() {
        let decomp = fiber_polys[i]
            .squarefree_decomposition()
            .map_err(PipelineError::Algebra)?;
        let reg = decomp
            .iter()
            .find(|(_, m)| *m == slot.order as usize)
            .map(|(f, _)| f.clone())
            .unwrap_or_else(|| Polynomial::one_like(num.leading().unwrap()));
        if reg.deg0() != slot.regular_count {
            return Err(PipelineError::SingularJacobian(format!(
                "regular part degree {} ≠ expected {}",
                reg.deg0(),
                slot.regular_count
            )));
        }
        for k in 0..slot.regular_count {
            x0.push(from_fp(reg.coeff(k).value(), &ctx1));
        }
    }

    // Newton with doubling precision.
    let mut x = x0;
    let mut residual_valuations = Vec::new();
    let mut prec = 1u32;
    let full_ctx = ZpCtx::new(p, kappa);
    while prec < kappa {
        prec = (prec * 2).min(kappa);
        let ctx = ZpCtx::new(p, prec);
        let x_up: Vec<ZpK> = x.iter().map(|v| ZpK::new(&ctx, v.value().clone())).collect();
        let f = residual_vector(&x_up, &slots, d);
        let j = jacobian(&x_up, &slots, d);
        let delta = solve_square(j, f).map_err(|e| {
            PipelineError::SingularJacobian(format!("non-generic candidate; try another prime/frame ({e})"))
        })?;
        x = x_up
            .iter()
            .zip(&delta)
            .map(|(a, b)| a.sub(b))
            .collect();
        // Residual valuation at full precision for the convergence log.
        let x_full: Vec<ZpK> = x
            .iter()
            .map(|v| ZpK::new(&full_ctx, v.value().clone()))
            .collect();
        let fr = residual_vector(&x_full, &slots, d);
        let val = fr.iter().map(|c| c.valuation()).min().unwrap_or(kappa);
        residual_valuations.push(val);
    }
    let x: Vec<ZpK> = x
        .iter()
        .map(|v| ZpK::new(&full_ctx, v.value().clone()))
        .collect();
    // The solution must satisfy the system at the target precision.
    let fr = residual_vector(&x, &slots, d);
    if fr.iter().any(|c| !c.is_zero()) {
        return Err(PipelineError::SingularJacobian(
            "Newton iteration failed to converge".into(),
        ));
    }

    // Derived scalars: κ (leading series coefficient of φ at 0), K, q.
    let (a_poly, _, c_poly) = build_sides(&x, &slots);
    let m_ord = cand.frame.m_order() as usize;
    let l_pow = cand.frame.l_power();
    let kappa_const = a_poly
        .coeff(m_ord)
        .mul(&c_poly.coeff(0).inv().map_err(PipelineError::Algebra)?);
    // K from K^L = κ anchored at the candidate's root mod p.
    let k_const = lift_power_root(&kappa_const, l_pow, cand.k_root, &full_ctx)?;
    let q = accessory_from_lift(cand, &x, &slots, &kappa_const, &full_ctx)?;
    // Reduction must match the candidate.
    if q.mod_p() != cand.q || x[2].mod_p() != cand.t {
        return Err(PipelineError::Internal(
            "lift does not reduce to the candidate".into(),
        ));
    }

    let mut regs: [Vec<ZpK>; 3] = Default::default();
    let mut idx = 3usize;
    for (i, slot) in slots.iter().enumerate() {
        regs[i] = x[idx..idx + slot.regular_count].to_vec();
        idx += slot.regular_count;
    }
    Ok(LiftedCandidate {
        pattern: cand.pattern.clone(),
        frame: cand.frame.clone(),
        p,
        precision: kappa,
        alpha: x[0].clone(),
        beta: x[1].clone(),
        t: x[2].clone(),
        q,
        k_const,
        kappa_const,
        regs,
        residual_valuations,
    })
}

/// Newton-lift y with y^L = value, starting from the root mod p.
fn lift_power_root(value: &ZpK, l: u64, root_mod_p: u64, ctx: &Arc<ZpCtx>) -> PResult<ZpK> {
    let p = ctx.p;
    let mut prec = 1u32;
    let mut y = ZpK::new(&ZpCtx::new(p, 1), BigUint::from(root_mod_p));
    while prec < ctx.k {
        prec = (prec * 2).min(ctx.k);
        let c = ZpCtx::new(p, prec);
        let yv = ZpK::new(&c, y.value().clone());
        let v = ZpK::new(&c, value.value().clone());
        // y -= (y^L − v)/(L·y^(L−1))
        let f = yv.pow_u(l).sub(&v);
        let df = yv.pow_u(l - 1).mul(&yv.from_int(l as i64));
        let corr = f.mul(&df.inv().map_err(PipelineError::Algebra)?);
        y = yv.sub(&corr);
    }
    let y = ZpK::new(ctx, y.value().clone());
    if y.pow_u(l) != ZpK::new(ctx, value.value().clone()) {
        return Err(PipelineError::Internal("power-root lift failed".into()));
    }
    Ok(y)
}

/// Recover the accessory parameter q mod p^κ from the lifted covering via
/// the first Schwarz-ratio coefficient: b₁ = [x¹]u₁ with
/// u₁^L = σ₀(φ)/(κ·x^M), and q solved from the linear relation
/// b₁ = q₁/((2−c)t) − q/(ct).
fn accessory_from_lift(
    cand: &BelyiCandidate,
    x: &[ZpK],
    slots: &[ZSlot; 3],
    kappa_const: &ZpK,
    ctx: &Arc<ZpCtx>,
) -> PResult<ZpK> {
    let m_ord = cand.frame.m_order() as usize;
    let l_pow = cand.frame.l_power();
    let one = ZpK::new(ctx, BigUint::one());
    let n = m_ord + 2;
    let (a_poly, _, c_poly) = build_sides(x, slots);
    let phi_series = {
        let num = PowerSeries::from_poly(&a_poly, &one, n);
        let den = PowerSeries::from_poly(&c_poly, &one, n);
        num.divide(&den).map_err(PipelineError::Algebra)?
    };
    // σ₀ = z·u₀^L from the frame's hypergeometric data over ℤ/p^κ.
    let hyp = cand.frame.hypergeometric(&cand.pattern);
    let f1 = series_2f1(&hyp, n, &one).map_err(PipelineError::Algebra)?;
    let f2 = series_2f1(&hyp.second_solution(), n, &one).map_err(PipelineError::Algebra)?;
    let u0 = f2.divide(&f1).map_err(PipelineError::Algebra)?;
    let sigma0 = u0.pow(l_pow).shift_up(1);
    let w = sigma0
        .compose(&phi_series)
        .map_err(PipelineError::Algebra)?;
    // u₁^L = w/(κ x^M): b₁ = [x^(M+1)]w / (κ·L)
    let w_m1 = w.coeff(m_ord + 1);
    let b1 = w_m1
        .mul(&kappa_const.inv().map_err(PipelineError::Algebra)?)
        .mul(&one.from_int(l_pow as i64).inv().map_err(PipelineError::Algebra)?);
    // Exponent parameters as residues mod p^κ.
    let (ea, eb, ec, ed) = cand.frame.heun_exponents();
    let emb = |r: &num::BigRational| -> PResult<ZpK> {
        ZpK::from_rat(ctx, &Rat(r.clone())).map_err(PipelineError::Algebra)
    };
    let (a, b, c, dd) = (emb(&ea)?, emb(&eb)?, emb(&ec)?, emb(&ed)?);
    let t = ZpK::new(ctx, x[2].value().clone());
    let two = one.from_int(2);
    // q·(2c−2)/(c(2−c)) = b₁·t + (c−1)(Σ + d·t)/(2−c),  Σ = a+b−c−d+1
    let sigma = a.add(&b).sub(&c).sub(&dd).add(&one);
    let c1 = c.sub(&one);
    let c2 = two.sub(&c);
    let rhs = b1.mul(&t).add(
        &c1.mul(&sigma.add(&dd.mul(&t)))
            .mul(&c2.inv().map_err(PipelineError::Algebra)?),
    );
    let lhs_coeff = two
        .mul(&c1)
        .mul(&c.mul(&c2).inv().map_err(PipelineError::Algebra)?);
    Ok(rhs.mul(&lhs_coeff.inv().map_err(PipelineError::Algebra)?))
}

/// Reduce a lifted candidate back to its mod-p covering.
pub fn reduce_lift_mod_p(lifted: &LiftedCandidate) -> PResult<crate::FpMap> {
    let p = lifted.p;
    let one = ZpK::new(&ZpCtx::new(p, lifted.precision), BigUint::one());
    let x = assemble_unknowns(lifted, &one);
    let slots = slot_layout(&lifted.pattern, &lifted.frame);
    let (a, _, c) = build_sides(&x, &slots);
    let to_fp = |poly: &Polynomial<ZpK>| -> Polynomial<crate::algebra::fp::Fp> {
        poly.map_coeffs(|z| crate::algebra::fp::Fp::raw(z.mod_p(), p))
    };
    RationalMap::new(to_fp(&a), to_fp(&c)).map_err(PipelineError::Algebra)
}

fn assemble_unknowns(lifted: &LiftedCandidate, one: &ZpK) -> Vec<ZpK> {
    let mut x = vec![
        lifted.alpha.clone(),
        lifted.beta.clone(),
        lifted.t.clone(),
    ];
    for r in &lifted.regs {
        x.extend(r.iter().cloned());
    }
    let _ = one;
    x
}

/// The invariants block attached to a catalog entry.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntryInvariants {
    /// (numerator, denominator) of the 4 branching fractions.
    pub fractions: Vec<(u32, u32)>,
    /// j-invariant as rational numerator/denominator strings when j ∈ ℚ.
    pub j_rational: Option<(String, String)>,
    pub field_degree: usize,
    /// t-orbit data: rational orbit values or a minimal polynomial (decimal
    /// coefficient strings), when determined.
    pub t_values: Option<Vec<(String, String)>>,
    pub t_minpoly: Option<Vec<String>>,
    /// Degrees (deg g, deg h) of proper decompositions φ = g ∘ h.
    pub decompositions: Vec<(usize, usize)>,
}

/// Provenance of a computed entry.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Provenance {
    pub primes: Vec<u64>,
    pub precision: u32,
    pub frame: Option<ScanFrame>,
    pub field_irreducibility_certified: bool,
    pub notes: Vec<String>,
}

/// An exact Belyi covering over ℚ(α) with its invariants and provenance.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub pattern: BranchingPattern,
    pub field: Arc<NumberField>,
    pub phi: NfMap,
    pub invariants: EntryInvariants,
    pub provenance: Provenance,
}

/// The rational field as a degree-1 number field (minpoly x).
pub fn rational_field() -> Arc<NumberField> {
    NumberField::new(vec![BigInt::from(0), BigInt::from(1)]).unwrap()
}

/// Recognize the lifted coefficients over ℚ or ℚ(α) with deg ≤ max_degree
/// and coefficient height ≤ height_bound; the entry is verified exactly
/// before being returned. None signals a failed margin (raise κ and retry).
pub fn recognize_exact(
    lifted: &LiftedCandidate,
    max_field_degree: usize,
    height_bound: &BigInt,
) -> PResult<Option<CatalogEntry>> {
    let ctx = ZpCtx::new(lifted.p, lifted.precision);
    let one = ZpK::new(&ctx, BigUint::one());
    // The recognized scalars: t, q, and the cleared-exponent Schwarz
    // constant κ = K̄^L (K̄ itself is an L-th root living in an extension;
    // only its L-th power is a coefficient of the covering's field).
    let scalars = {
        let mut v = vec![
            lifted.t.clone(),
            lifted.q.clone(),
            lifted.kappa_const.clone(),
        ];
        v.extend(assemble_unknowns(lifted, &one));
        v
    };
    // Pass 1: rational recognition.
    let mut rationals: Vec<Option<Rat>> = Vec::with_capacity(scalars.len());
    for s in &scalars {
        let r = rational_from_residue(s.value(), &ctx.modulus).filter(|r| {
            r.numer().magnitude() <= height_bound.magnitude()
                && r.denom().magnitude() <= height_bound.magnitude()
        });
        rationals.push(r);
    }
    let (field, alpha_padic) = if rationals.iter().all(|r| r.is_some()) {
        (rational_field(), one.clone())
    } else {
        // Pin the generator from the first unrecognized coefficient.
        let first = rationals.iter().position(|r| r.is_none()).unwrap();
        let Some(m) = minpoly_from_padic(&scalars[first], max_field_degree, height_bound)
            .map_err(PipelineError::Algebra)?
        else {
            return Ok(None);
        };
        if m.degree() > max_field_degree {
            return Ok(None);
        }
        // Monicize: α = lc·r has minimal polynomial lc^(D−1)·m(y/lc),
        // i.e. coefficients lc^(D−1−i)·c_i for i < D and 1 at the top.
        let lc = m.coeffs.last().unwrap().clone();
        let dd = m.degree();
        let monic: Vec<BigInt> = {
            let mut v = Vec::with_capacity(dd + 1);
            for (i, c) in m.coeffs.iter().enumerate() {
                if i == dd {
                    v.push(BigInt::one());
                } else {
                    v.push(c * lc.pow((dd - 1 - i) as u32));
                }
            }
            v
        };
        let field = NumberField::new(monic).map_err(PipelineError::Algebra)?;
        let alpha = scalars[first].mul(&ZpK::from_bigint(&ctx, &lc));
        (field, alpha)
    };
    // Pass 2: everything in ℚ(α).
    let mut values: Vec<NfElem> = Vec::with_capacity(scalars.len());
    for (i, s) in scalars.iter().enumerate() {
        if let Some(r) = &rationals[i] {
            values.push(NfElem::from_rat(&field, r));
            continue;
        }
        let Some(v) = recognize_in_field(s, &field, &alpha_padic, height_bound) else {
            return Ok(None);
        };
        values.push(v);
    }
    // Every recognized value must reduce back to its p-adic image.
    for (v, s) in values.iter().zip(&scalars) {
        if !verify_padic_image(v, &alpha_padic, s) {
            return Ok(None);
        }
    }
    // Assemble φ = A/C over the field.
    let slots = slot_layout(&lifted.pattern, &lifted.frame);
    let sample = values[0].zero_like();
    let tval = values[0].clone();
    let alpha_v = values[3].clone();
    let mut idx = 6usize;
    let mut side_polys: Vec<NfPoly> = Vec::new();
    for slot in &slots {
        let mut coeffs: Vec<NfElem> = values[idx..idx + slot.regular_count].to_vec();
        idx += slot.regular_count;
        coeffs.push(sample.one_like());
        let s = NfPoly::from_coeffs(coeffs);
        let mut e = NfPoly::one_like(&sample.one_like());
        for &(pos, mult) in &slot.fixed {
            e = e.mul(&NfPoly::linear_root(&sample.from_int(pos)).pow(mult as usize));
        }
        if slot.t_mult > 0 {
            e = e.mul(&NfPoly::linear_root(&tval).pow(slot.t_mult as usize));
        }
        side_polys.push(s.pow(slot.order as usize).mul(&e));
    }
    let a = side_polys[0].scale(&alpha_v);
    let c = side_polys[2].clone();
    let phi = RationalMap::new(a, c).map_err(PipelineError::Algebra)?;
    let entry = finish_entry(
        lifted.pattern.clone(),
        field,
        phi,
        Provenance {
            primes: vec![lifted.p],
            precision: lifted.precision,
            frame: Some(lifted.frame.clone()),
            field_irreducibility_certified: true,
            notes: Vec::new(),
        },
    )?;
    let report = verify_exact(&entry);
    if !report.all_passed() {
        return Err(PipelineError::Verification(format!(
            "recognized entry fails exact verification: {report:?}"
        )));
    }
    Ok(Some(entry))
}

/// Build the invariants block (j, t-data, fractions) for an exact covering.
pub fn finish_entry(
    pattern: BranchingPattern,
    field: Arc<NumberField>,
    phi: NfMap,
    provenance: Provenance,
) -> PResult<CatalogEntry> {
    let m4 = branching_data(&phi)?;
    let j = j_invariant(&m4.locus).map_err(PipelineError::Algebra)?;
    let j_rational = j
        .as_rat()
        .map(|r| (r.numer().to_string(), r.denom().to_string()));
    let torb = t_orbit_nf(&m4.locus)?;
    let (t_values, t_minpoly) = match torb {
        TOrbit::Values(v) => (
            Some(
                v.iter()
                    .filter_map(|x| x.as_rat())
                    .map(|r| (r.numer().to_string(), r.denom().to_string()))
                    .collect::<Vec<_>>(),
            ),
            None,
        ),
        TOrbit::MinPolyQ(m) => (
            None,
            Some(m.coeffs().iter().map(|c| format!("{}", c.0)).collect()),
        ),
        TOrbit::Undetermined => (None, None),
    };
    let fractions = m4
        .pattern
        .fractions
        .iter()
        .map(|f| (f.numerator, f.order))
        .collect();
    let field_degree = field.degree();
    Ok(CatalogEntry {
        pattern,
        field,
        phi,
        invariants: EntryInvariants {
            fractions,
            j_rational,
            field_degree,
            t_values,
            t_minpoly,
            decompositions: Vec::new(),
        },
        provenance,
    })
}

/// One line of an exact-verification report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, Default)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(CheckResult { name: name.into(), passed, detail });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Exact verification of a catalog entry: the factored polynomial identity,
/// squarefreeness of the regular parts, pairwise coprimality, and the
/// branching-pattern equality; each assertion is flagged independently.
pub fn verify_exact(entry: &CatalogEntry) -> VerificationReport {
    let mut report = VerificationReport::default();
    let phi = &entry.phi;
    let num = phi.num().clone();
    let den = phi.den().clone();
    let bnum = num.sub(&den);
    // Eq-(11)-shaped identity A − B − C = 0 with the extracted factorization.
    report.push(
        "identity",
        num.sub(&bnum).sub(&den).is_zero(),
        "numerator − (φ−1 numerator) − denominator".into(),
    );
    let m4 = match branching_data(phi) {
        Ok(m) => m,
        Err(e) => {
            report.push("branching", false, format!("{e}"));
            return report;
        }
    };
    // Factored reassembly per fiber: lc·∏ factor^mult must reproduce the
    // polynomial exactly over ℚ(α).
    for (fiber, poly) in [
        (Fiber::Zero, &num),
        (Fiber::One, &bnum),
        (Fiber::Infinity, &den),
    ] {
        let mut acc = NfPoly::one_like(poly.leading().unwrap());
        for class in m4.data.classes_in(fiber) {
            if !class.factor.is_constant() {
                acc = acc.mul(&class.factor.pow(class.order as usize));
            }
        }
        let acc = acc.scale(poly.leading().unwrap());
        report.push(
            &format!("factorization-{fiber}"),
            acc == *poly,
            "lc·∏ factor^mult reassembles the fiber polynomial".into(),
        );
    }
    // Regular parts squarefree.
    for (idx, fiber) in Fiber::ALL.iter().enumerate() {
        let role = m4.fiber_role[idx];
        let o = m4.pattern.klm.order_of(role);
        for class in m4.data.classes_in(*fiber) {
            if class.order == o && !class.factor.is_constant() {
                let sf = class.factor.is_squarefree().unwrap_or(false);
                report.push(
                    &format!("squarefree-{fiber}"),
                    sf,
                    format!("regular part of fiber {fiber}"),
                );
            }
        }
    }
    // Pairwise coprimality across fibers (common roots are impossible for a
    // function; checked anyway as an independent assertion).
    let g1 = num.gcd(&den);
    let g2 = num.gcd(&bnum);
    let g3 = den.gcd(&bnum);
    report.push(
        "coprimality",
        g1.is_constant() && g2.is_constant() && g3.is_constant(),
        "numerator, φ−1 numerator, denominator pairwise coprime".into(),
    );
    // Pattern equality (canonical comparison).
    let same = m4.pattern.klm == entry.pattern.klm
        && m4.pattern.degree == entry.pattern.degree
        && {
            let mut a: Vec<Vec<u32>> = m4.pattern.partitions.to_vec();
            let mut b: Vec<Vec<u32>> = entry.pattern.partitions.to_vec();
            a.sort();
            b.sort();
            a == b
        };
    report.push("pattern", same, format!("extracted {}", m4.pattern));
    report
}

/// Reduce an exact entry mod p^κ (coefficientwise, at a chosen image of α).
pub fn reduce_entry_padic(
    entry: &CatalogEntry,
    alpha_padic: &ZpK,
    ctx: &Arc<ZpCtx>,
) -> PResult<(Vec<ZpK>, Vec<ZpK>)> {
    let embed = |poly: &NfPoly| -> PResult<Vec<ZpK>> {
        poly.coeffs()
            .iter()
            .map(|c| nf_to_padic(c, alpha_padic, ctx).map_err(PipelineError::Algebra))
            .collect()
    };
    Ok((embed(entry.phi.num())?, embed(entry.phi.den())?))
}

/// Reduce an exact entry to 𝔽_p at a chosen image of α.
pub fn reduce_entry_mod_p(
    entry: &CatalogEntry,
    alpha_mod_p: u64,
    p: u64,
) -> PResult<crate::FpMap> {
    let ctx = ZpCtx::new(p, 1);
    let alpha = ZpK::new(&ctx, BigUint::from(alpha_mod_p));
    let (num, den) = reduce_entry_padic(entry, &alpha, &ctx)?;
    let conv = |v: Vec<ZpK>| {
        Polynomial::from_coeffs(
            v.into_iter()
                .map(|z| crate::algebra::fp::Fp::raw(z.mod_p(), p))
                .collect::<Vec<_>>(),
        )
    };
    RationalMap::new(conv(num), conv(den)).map_err(PipelineError::Algebra)
}

/// Fp-compatible image of α for reducing an entry mod p (a root of the
/// field polynomial mod p); None when the field does not split at p.
pub fn field_root_mod_p(field: &NumberField, p: u64) -> Option<u64> {
    let eval = |r: u64| -> u64 {
        let mut acc = 0u64;
        for c in field.minpoly.iter().rev() {
            let cv = ((c % BigInt::from(p)) + BigInt::from(p)) % BigInt::from(p);
            let cv = cv.to_u64_digits().1.first().copied().unwrap_or(0);
            acc = fp64::addm(fp64::mulm(acc, r, p), cv, p);
        }
        acc
    };
    (0..p).find(|&r| eval(r) == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::{pattern_of, BranchingFraction, KlmType};
    use crate::search::{scan_prime, ScanOptions};

    fn q(n: i64) -> Rat {
        Rat::from_int(n)
    }

    fn b7_pattern() -> BranchingPattern {
        let klm = KlmType::new(2, 3, 9).unwrap();
        let f = |n, o, fib| BranchingFraction::new(n, o, fib).unwrap();
        pattern_of(
            &klm,
            &[
                f(1, 3, Fiber::Zero),
                f(2, 3, Fiber::Zero),
                f(1, 9, Fiber::Infinity),
                f(2, 9, Fiber::Infinity),
            ],
        )
        .unwrap()
    }

    fn b7_published_q() -> crate::QMap {
        let num = Polynomial::monomial(q(64), 2)
            .mul(&Polynomial::linear_root(&q(3)).pow(9))
            .mul(&Polynomial::linear_root(&q(9)));
        let cubic = Polynomial::from_coeffs(vec![q(27), q(-27), q(-72), q(8)]);
        let den = Polynomial::linear_root(&q(1)).mul(&cubic.pow(3)).scale(&q(27));
        RationalMap::new(num, den).unwrap()
    }

    fn b7_candidate(p: u64) -> BelyiCandidate {
        let opts = ScanOptions { t_range: Some((9, 9)), ..ScanOptions::default() };
        let found = scan_prime(&b7_pattern(), p, &opts).unwrap();
        found.into_iter().find(|c| c.t == 9).expect("B7 candidate")
    }

    #[test]
    fn lift_b7_matches_published_mod_p8() {
        let p = 307;
        let cand = b7_candidate(p);
        let lifted = hensel_lift(&cand, 8).unwrap();
        // Quadratic convergence: residual valuation at least doubles.
        let mut prev = 1u32;
        for &v in &lifted.residual_valuations {
            assert!(v >= (2 * prev).min(8), "residuals {:?}", lifted.residual_valuations);
            prev = v;
        }
        // Reduce mod p: the original candidate.
        assert_eq!(reduce_lift_mod_p(&lifted).unwrap(), cand.phi);
        // Compare the lifted t, q, κ against the exact rationals mod p^8.
        let ctx = ZpCtx::new(p, 8);
        let exact = |r: Rat| ZpK::from_rat(&ctx, &r).unwrap();
        assert_eq!(lifted.t, exact(q(9)));
        assert_eq!(lifted.q, exact(Rat::from_pair(7, 9)));
        assert_eq!(lifted.kappa_const, exact(Rat::from_pair(-64, 3)));
    }

    #[test]
    fn lift_kappa_one_is_identity_base() {
        let p = 307;
        let cand = b7_candidate(p);
        let lifted = hensel_lift(&cand, 1).unwrap();
        assert_eq!(lifted.precision, 1);
        assert_eq!(reduce_lift_mod_p(&lifted).unwrap(), cand.phi);
    }

    #[test]
    fn recognize_b7_exactly() {
        let p = 307;
        let cand = b7_candidate(p);
        let lifted = hensel_lift(&cand, 8).unwrap();
        let entry = recognize_exact(&lifted, 2, &BigInt::from(1_000_000u64))
            .unwrap()
            .expect("recognition");
        assert_eq!(entry.field.degree(), 1);
        // The recognized covering equals the published one exactly.
        let published = b7_published_q();
        let rationalized: crate::QMap = {
            let num = entry.phi.num().map_coeffs(|c| c.as_rat().unwrap());
            let den = entry.phi.den().map_coeffs(|c| c.as_rat().unwrap());
            RationalMap::new(num, den).unwrap()
        };
        assert_eq!(rationalized, published);
        // Numerator in factored form: 64·x²(x−3)⁹(x−9), as an exact product.
        let report = verify_exact(&entry);
        assert!(report.all_passed(), "{report:?}");
        assert_eq!(
            entry.invariants.fractions,
            vec![(1, 3), (2, 3), (1, 9), (2, 9)]
        );
        // j = 2²·73³/3⁴.
        assert_eq!(
            entry.invariants.j_rational,
            Some(((4 * 389017).to_string(), 81.to_string()))
        );
    }

    #[test]
    fn tampered_entry_fails_verification() {
        let p = 307;
        let cand = b7_candidate(p);
        let lifted = hensel_lift(&cand, 8).unwrap();
        let entry = recognize_exact(&lifted, 2, &BigInt::from(1_000_000u64))
            .unwrap()
            .unwrap();
        let mut bad = entry.clone();
        // Perturb one numerator coefficient.
        let mut coeffs: Vec<NfElem> = bad.phi.num().coeffs().to_vec();
        coeffs[1] = coeffs[1].add(&coeffs[1].one_like());
        let num = NfPoly::from_coeffs(coeffs);
        bad.phi = RationalMap::new(num, bad.phi.den().clone()).unwrap();
        let report = verify_exact(&bad);
        assert!(!report.all_passed());
    }
}
