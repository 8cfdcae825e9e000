//! Invariants and classification utilities: branching data extraction,
//! j-invariant and t-orbits of the exceptional locus, canonical forms,
//! Möbius equivalence, the quadratic moduli-field check, obstruction conics
//! and the catalog sort key.

pub mod decompose;
pub mod sortkey;
pub mod torbit;

use std::cmp::Ordering;

use num::BigRational;

use crate::algebra::poly::Polynomial;
use crate::algebra::ratfun::{Mobius, ProjPoint, RationalMap};
use crate::algebra::roots::FieldRoots;
use crate::algebra::Field;
use crate::error::{AResult, AlgebraError, PResult, PipelineError};
use crate::patterns::{BranchingFraction, BranchingPattern, Fiber, KlmType};

/// One class of points of a fiber: the monic squarefree factor whose roots
/// all share the same multiplicity, plus possibly the point at infinity.
#[derive(Clone, Debug)]
pub struct PointClass<F: Field> {
    pub fiber: Fiber,
    pub order: u32,
    pub factor: Polynomial<F>,
    pub includes_infinity: bool,
}

impl<F: Field> PointClass<F> {
    pub fn size(&self) -> usize {
        self.factor.deg0() + usize::from(self.includes_infinity)
    }
}

/// Fiber-by-fiber branching data of a rational map (fibers z = 1, 0, ∞).
#[derive(Clone, Debug)]
pub struct BranchingData<F: Field> {
    pub degree: u32,
    pub classes: Vec<PointClass<F>>,
}

impl<F: Field> BranchingData<F> {
    pub fn partition(&self, fiber: Fiber) -> Vec<u32> {
        let mut parts = Vec::new();
        for c in self.classes.iter().filter(|c| c.fiber == fiber) {
            for _ in 0..c.factor.deg0() {
                parts.push(c.order);
            }
            if c.includes_infinity {
                parts.push(c.order);
            }
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        parts
    }

    pub fn part_count(&self) -> usize {
        Fiber::ALL.iter().map(|&f| self.partition(f).len()).sum()
    }

    pub fn classes_in(&self, fiber: Fiber) -> Vec<&PointClass<F>> {
        self.classes.iter().filter(|c| c.fiber == fiber).collect()
    }
}

/// Squarefree class extraction for the three fibers of φ. Errors when the
/// map is branched outside {0, 1, ∞} (part count ≠ d + 2).
pub fn fiber_classes<F: Field>(phi: &RationalMap<F>) -> AResult<BranchingData<F>> {
    let data = fiber_classes_unchecked(phi)?;
    let parts = data.part_count();
    let d = data.degree;
    if parts != d as usize + 2 {
        return Err(AlgebraError::Other(format!(
            "not Belyi in this frame: part count {parts} ≠ d+2 = {}",
            d + 2
        )));
    }
    Ok(data)
}

/// Class extraction without the Belyi part-count check (general maps).
pub fn fiber_classes_unchecked<F: Field>(phi: &RationalMap<F>) -> AResult<BranchingData<F>> {
    if phi.num().is_zero() || phi.is_constant() {
        return Err(AlgebraError::Other("constant map has no branching data".into()));
    }
    let d = phi.map_degree() as u32;
    let num = phi.num().clone();
    let den = phi.den().clone();
    let one_num = num.sub(&den);
    if one_num.is_zero() {
        return Err(AlgebraError::Other("map is identically 1".into()));
    }
    let mut classes = Vec::new();
    for (fiber, poly) in [
        (Fiber::Zero, &num),
        (Fiber::One, &one_num),
        (Fiber::Infinity, &den),
    ] {
        let mut covered = 0u32;
        if poly.degree().map_or(0, |x| x) > 0 {
            for (factor, mult) in poly.squarefree_decomposition()? {
                covered += (factor.deg0() as u32) * (mult as u32);
                classes.push(PointClass {
                    fiber,
                    order: mult as u32,
                    factor,
                    includes_infinity: false,
                });
            }
        }
        // Degree deficit: the point at infinity lies in this fiber.
        if covered < d {
            let inf_order = d - covered;
            // Merge with an existing class of the same order if present.
            if let Some(c) = classes
                .iter_mut()
                .find(|c| c.fiber == fiber && c.order == inf_order)
            {
                c.includes_infinity = true;
            } else {
                classes.push(PointClass {
                    fiber,
                    order: inf_order,
                    factor: Polynomial::one_like(phi.sample()),
                    includes_infinity: true,
                });
            }
        }
    }
    Ok(BranchingData { degree: d, classes })
}

/// The 4 exceptional points as a squarefree polynomial of degree 3 or 4
/// (degree 3 means infinity is the fourth point).
#[derive(Clone, Debug)]
pub struct ExceptionalLocus<F: Field> {
    pub poly: Polynomial<F>,
    pub includes_infinity: bool,
}

/// A minus-4 reading of extracted branching data: the abstract pattern, the
/// fiber relabeling (pattern fiber carrying k/ℓ/m for each map fiber), and
/// the exceptional locus.
#[derive(Clone, Debug)]
pub struct Minus4Data<F: Field> {
    pub pattern: BranchingPattern,
    /// map fiber (indexed 1,0,∞) → pattern fiber it plays.
    pub fiber_role: [Fiber; 3],
    pub locus: ExceptionalLocus<F>,
    pub data: BranchingData<F>,
}

/// Extract branching data and its unique minus-4-hyperbolic interpretation.
pub fn branching_data<F: Field>(phi: &RationalMap<F>) -> PResult<Minus4Data<F>> {
    let data = fiber_classes(phi).map_err(PipelineError::Algebra)?;
    minus4_interpretation(data)
}

fn minus4_interpretation<F: Field>(data: BranchingData<F>) -> PResult<Minus4Data<F>> {
    let d = data.degree;
    let partitions: Vec<Vec<u32>> = Fiber::ALL.iter().map(|&f| data.partition(f)).collect();
    // Candidate regular orders per fiber = distinct part values.
    let mut interpretations = Vec::new();
    let mut cand: Vec<Vec<u32>> = partitions
        .iter()
        .map(|p| {
            let mut v = p.clone();
            v.dedup();
            v
        })
        .collect();
    for c in &mut cand {
        c.sort_unstable();
        c.dedup();
    }
    for &o1 in &cand[0] {
        for &o0 in &cand[1] {
            for &oinf in &cand[2] {
                let orders = [o1, o0, oinf];
                let exceptional: usize = partitions
                    .iter()
                    .zip(orders)
                    .map(|(p, o)| p.iter().filter(|&&x| x != o).count())
                    .sum();
                if exceptional != 4 {
                    continue;
                }
                // Hyperbolicity of the sorted orders.
                let mut s = orders;
                s.sort_unstable();
                let (k, l, m) = (s[0], s[1], s[2]);
                let Ok(klm) = KlmType::new(k, l, m) else { continue };
                interpretations.push((orders, klm));
            }
        }
    }
    // Deduplicate interpretations that give the same canonical pattern.
    interpretations.dedup();
    if interpretations.is_empty() {
        return Err(PipelineError::Pattern(
            "no minus-4-hyperbolic interpretation of the branching data".into(),
        ));
    }
    let (orders, klm) = interpretations[0].clone();
    if interpretations.len() > 1 {
        // All surviving interpretations must agree on the abstract pattern.
        let keys: Vec<_> = interpretations
            .iter()
            .map(|(o, _)| {
                let mut v: Vec<(u32, Vec<u32>)> =
                    o.iter().zip(&partitions).map(|(&x, p)| (x, p.clone())).collect();
                v.sort();
                v
            })
            .collect();
        if keys.windows(2).any(|w| w[0] != w[1]) {
            return Err(PipelineError::Pattern(
                "ambiguous minus-4 interpretation".into(),
            ));
        }
    }
    // Assign map fibers to pattern fibers: ascending order with deterministic
    // tie-breaking by fiber index.
    let mut by_order: Vec<(u32, usize)> = orders
        .iter()
        .enumerate()
        .map(|(i, &o)| (o, i))
        .collect();
    by_order.sort();
    let mut fiber_role = [Fiber::One; 3];
    let pattern_fibers = [Fiber::One, Fiber::Zero, Fiber::Infinity];
    let mut pattern_partitions: [Vec<u32>; 3] = Default::default();
    for (slot, &(_, map_idx)) in by_order.iter().enumerate() {
        fiber_role[map_idx] = pattern_fibers[slot];
        pattern_partitions[pattern_fibers[slot].index()] = partitions[map_idx].clone();
    }
    // Exceptional fractions and locus.
    let mut fractions = Vec::new();
    let mut locus_poly: Option<Polynomial<F>> = None;
    let mut locus_inf = false;
    for (map_idx, map_fiber) in Fiber::ALL.iter().enumerate() {
        let o = orders[map_idx];
        let pat_fiber = fiber_role[map_idx];
        for class in data.classes_in(*map_fiber) {
            if class.order == o {
                continue;
            }
            for _ in 0..class.factor.deg0() + usize::from(class.includes_infinity) {
                fractions.push(
                    BranchingFraction::new(class.order, klm.order_of(pat_fiber), pat_fiber)
                        .map_err(|e| PipelineError::Pattern(e.to_string()))?,
                );
            }
            if !class.factor.is_constant() {
                locus_poly = Some(match locus_poly {
                    Some(p) => p.mul(&class.factor),
                    None => class.factor.clone(),
                });
            }
            if class.includes_infinity {
                locus_inf = true;
            }
        }
    }
    fractions.sort_by_key(|f| (f.order, f.numerator, f.fiber));
    let pattern = BranchingPattern {
        klm,
        degree: d,
        partitions: pattern_partitions,
        fractions,
    };
    let locus = ExceptionalLocus {
        poly: locus_poly
            .ok_or_else(|| PipelineError::Pattern("no finite exceptional point".into()))?,
        includes_infinity: locus_inf,
    };
    if locus.poly.deg0() + usize::from(locus_inf) != 4 {
        return Err(PipelineError::Internal(format!(
            "exceptional locus has {} points",
            locus.poly.deg0() + usize::from(locus_inf)
        )));
    }
    if !locus.poly.is_squarefree().map_err(PipelineError::Algebra)? {
        return Err(PipelineError::Pattern("exceptional points collide".into()));
    }
    Ok(Minus4Data { pattern, fiber_role, locus, data })
}

/// j-invariant of the elliptic curve Y² = E(X) through the binary-quartic
/// invariants I, J, normalized so that E = x(x−1)(x−t) reproduces the
/// classical 256(t²−t+1)³/(t²(t−1)²).
pub fn j_invariant<F: Field>(locus: &ExceptionalLocus<F>) -> AResult<F> {
    let e = &locus.poly;
    let deg = e.degree().ok_or(AlgebraError::DivisionByZero)?;
    if !(deg == 3 || deg == 4) || (deg == 3) != locus.includes_infinity {
        return Err(AlgebraError::Other("exceptional locus must have 4 points".into()));
    }
    if !e.is_squarefree()? {
        return Err(AlgebraError::Other("degenerate locus (repeated roots)".into()));
    }
    let a0 = e.coeff(0);
    let a1 = e.coeff(1);
    let a2 = e.coeff(2);
    let a3 = e.coeff(3);
    let a4 = e.coeff(4);
    let c = |n: i64| a0.from_int(n);
    // I = 12 a0 a4 − 3 a1 a3 + a2²
    let i_inv = c(12)
        .mul(&a0)
        .mul(&a4)
        .sub(&c(3).mul(&a1).mul(&a3))
        .add(&a2.mul(&a2));
    // J = 72 a0 a2 a4 − 27 a0 a3² − 27 a1² a4 + 9 a1 a2 a3 − 2 a2³
    let j_inv = c(72)
        .mul(&a0)
        .mul(&a2)
        .mul(&a4)
        .sub(&c(27).mul(&a0).mul(&a3).mul(&a3))
        .sub(&c(27).mul(&a1).mul(&a1).mul(&a4))
        .add(&c(9).mul(&a1).mul(&a2).mul(&a3))
        .sub(&c(2).mul(&a2).mul(&a2).mul(&a2));
    let i3 = i_inv.pow_u(3);
    let denom = c(4).mul(&i3).sub(&j_inv.mul(&j_inv));
    if denom.is_zero() {
        return Err(AlgebraError::Other("degenerate locus (vanishing discriminant)".into()));
    }
    Ok(c(6912).mul(&i3).div(&denom)?)
}

/// The six S₃-related cross-ratio maps applied to t.
pub fn s3_orbit<F: Field>(t: &F) -> AResult<Vec<F>> {
    let one = t.one_like();
    Ok(vec![
        t.clone(),
        one.sub(t),
        t.div(&t.sub(&one))?,
        one.div(t)?,
        one.div(&one.sub(t))?,
        one.sub(&one.div(t)?),
    ])
}

/// Deterministic ordering on field elements for tie-breaking point lists.
/// Uses the display encoding: stable, exact and domain-agnostic.
pub fn element_order_key<F: Field>(x: &F) -> (usize, String) {
    let s = format!("{x}");
    (s.len(), s)
}

fn cmp_points<F: Field>(a: &ProjPoint<F>, b: &ProjPoint<F>) -> Ordering {
    match (a, b) {
        (ProjPoint::Infinity, ProjPoint::Infinity) => Ordering::Equal,
        (ProjPoint::Infinity, _) => Ordering::Less,
        (_, ProjPoint::Infinity) => Ordering::Greater,
        (ProjPoint::Finite(x), ProjPoint::Finite(y)) => {
            element_order_key(x).cmp(&element_order_key(y))
        }
    }
}

/// One exceptional point with its (map-)fiber and order.
#[derive(Clone, Debug)]
pub struct ExceptionalPoint<F: Field> {
    pub point: ProjPoint<F>,
    pub fiber: Fiber,
    pub order: u32,
}

/// Enumerate the exceptional points that are rational over the base field;
/// packets of conjugate points stay as factors and are reported separately.
pub fn exceptional_points<F: FieldRoots>(
    m4: &Minus4Data<F>,
) -> AResult<(Vec<ExceptionalPoint<F>>, Vec<(Polynomial<F>, Fiber, u32)>)> {
    let mut points = Vec::new();
    let mut packets = Vec::new();
    for (idx, fiber) in Fiber::ALL.iter().enumerate() {
        let o = {
            // regular order of this map fiber = klm order of the pattern role
            let role = m4.fiber_role[idx];
            m4.pattern.klm.order_of(role)
        };
        for class in m4.data.classes_in(*fiber) {
            if class.order == o {
                continue;
            }
            if class.includes_infinity {
                points.push(ExceptionalPoint {
                    point: ProjPoint::Infinity,
                    fiber: *fiber,
                    order: class.order,
                });
            }
            if class.factor.is_constant() {
                continue;
            }
            let roots = F::base_field_roots(&class.factor)?;
            let mut rem = class.factor.clone();
            for r in roots {
                let lin = Polynomial::linear_root(&r);
                if let Ok(q) = rem.div_exact(&lin) {
                    rem = q;
                    points.push(ExceptionalPoint {
                        point: ProjPoint::Finite(r),
                        fiber: *fiber,
                        order: class.order,
                    });
                }
            }
            if !rem.is_constant() {
                packets.push((rem, *fiber, class.order));
            }
        }
    }
    Ok((points, packets))
}

/// Outcome of canonicalization: either a Möbius putting three exceptional
/// points at ∞, 0, 1 (with the fourth at t), or the field extension needed.
#[derive(Clone, Debug)]
pub enum CanonicalForm<F: Field> {
    Canonical {
        phi: RationalMap<F>,
        mobius: Mobius<F>,
        t: ProjPoint<F>,
    },
    NeedsExtension {
        packet_degrees: Vec<usize>,
    },
}

/// Canonical form per the deterministic policy: exceptional points sorted by
/// branching order descending, then fiber priority (∞-, 0-, 1-fiber), then a
/// deterministic root order; the first three go to ∞, 0, 1.
pub fn canonical_form<F: FieldRoots>(phi: &RationalMap<F>) -> PResult<CanonicalForm<F>> {
    let m4 = branching_data(phi)?;
    let (mut points, packets) = exceptional_points(&m4).map_err(PipelineError::Algebra)?;
    if points.len() < 4 {
        return Ok(CanonicalForm::NeedsExtension {
            packet_degrees: packets.iter().map(|(p, _, _)| p.deg0()).collect(),
        });
    }
    let fiber_priority = |f: Fiber| match f {
        Fiber::Infinity => 0u8,
        Fiber::Zero => 1,
        Fiber::One => 2,
    };
    points.sort_by(|a, b| {
        b.order
            .cmp(&a.order)
            .then_with(|| fiber_priority(a.fiber).cmp(&fiber_priority(b.fiber)))
            .then_with(|| cmp_points(&a.point, &b.point))
    });
    let sample = phi.sample();
    // μ sends (∞, 0, 1) to the top three points.
    let mob = Mobius::to_standard_triple(&points[1].point, &points[2].point, &points[0].point, sample)
        .map_err(PipelineError::Algebra)?
        .inverse();
    let canon = phi
        .compose_rational(&mob.as_rational())
        .map_err(PipelineError::Algebra)?;
    let t = mob.inverse().apply(&points[3].point);
    Ok(CanonicalForm::Canonical { phi: canon, mobius: mob, t })
}

/// Find μ with φ₁∘μ = φ₂, searching over the common coefficient field.
/// Candidates come from matching point constellations class by class:
/// ordered anchor triples, and a two-anchor + quadratic-class route that
/// solves the last Möbius parameter in the field.
pub fn mobius_equivalent<F: FieldRoots>(
    phi1: &RationalMap<F>,
    phi2: &RationalMap<F>,
) -> PResult<Option<Mobius<F>>> {
    if phi1.map_degree() != phi2.map_degree() {
        return Ok(None);
    }
    let d1 = fiber_classes(phi1).map_err(PipelineError::Algebra)?;
    let d2 = fiber_classes(phi2).map_err(PipelineError::Algebra)?;
    for f in Fiber::ALL {
        if d1.partition(f) != d2.partition(f) {
            return Ok(None);
        }
    }
    let sample = phi1.sample();
    // Quick win: identity.
    if phi1 == phi2 {
        return Ok(Some(Mobius::identity(sample)));
    }
    let verify = |mob: &Mobius<F>| -> bool {
        phi1.compose_rational(&mob.as_rational())
            .map(|c| c == *phi2)
            .unwrap_or(false)
    };
    // Class inventory: (fiber, order) → (points over K, packet polys).
    let inventory = |data: &BranchingData<F>| -> AResult<Vec<ClassPoints<F>>> {
        let mut out = Vec::new();
        for c in &data.classes {
            let roots = F::base_field_roots(&c.factor)?;
            let mut pts: Vec<ProjPoint<F>> =
                roots.into_iter().map(ProjPoint::Finite).collect();
            if c.includes_infinity {
                pts.push(ProjPoint::Infinity);
            }
            pts.sort_by(cmp_points);
            let mut rem = c.factor.clone();
            for p in &pts {
                if let ProjPoint::Finite(r) = p {
                    if let Ok(q) = rem.div_exact(&Polynomial::linear_root(r)) {
                        rem = q;
                    }
                }
            }
            out.push(ClassPoints {
                fiber: c.fiber,
                order: c.order,
                size: c.factor.deg0() + usize::from(c.includes_infinity),
                points: pts,
                packet: if rem.is_constant() { None } else { Some(rem) },
            });
        }
        out.sort_by_key(|c| (c.size, c.fiber, c.order));
        Ok(out)
    };
    let inv1 = inventory(&d1).map_err(PipelineError::Algebra)?;
    let inv2 = inventory(&d2).map_err(PipelineError::Algebra)?;
    // Pair up classes by (fiber, order); sizes must agree.
    let mut pairs: Vec<(&ClassPoints<F>, &ClassPoints<F>)> = Vec::new();
    for c2 in &inv2 {
        let Some(c1) = inv1
            .iter()
            .find(|c| c.fiber == c2.fiber && c.order == c2.order)
        else {
            return Ok(None);
        };
        if c1.size != c2.size {
            return Ok(None);
        }
        pairs.push((c1, c2));
    }
    // Anchor points: (source point in φ₂, target candidates in φ₁).
    let mut anchors: Vec<(ProjPoint<F>, Vec<ProjPoint<F>>)> = Vec::new();
    for (c1, c2) in &pairs {
        for p in &c2.points {
            anchors.push((p.clone(), c1.points.clone()));
        }
    }
    // Route 1: ordered triples of distinct source anchors.
    let n = anchors.len();
    let mut candidates: Vec<Mobius<F>> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if i == j || j == k || i == k {
                    continue;
                }
                let (pi, ti) = &anchors[i];
                let (pj, tj) = &anchors[j];
                let (pk, tk) = &anchors[k];
                if pi == pj || pj == pk || pi == pk {
                    continue;
                }
                for qi in ti {
                    for qj in tj {
                        for qk in tk {
                            if qi == qj || qj == qk || qi == qk {
                                continue;
                            }
                            let to_std = Mobius::to_standard_triple(pi, pj, pk, sample);
                            let from_std = Mobius::to_standard_triple(qi, qj, qk, sample);
                            if let (Ok(a), Ok(b)) = (to_std, from_std) {
                                candidates.push(b.inverse().compose(&a));
                            }
                        }
                    }
                }
            }
        }
    }
    // Route 2: two anchors + one quadratic packet pinning the last parameter.
    let quad_pairs: Vec<(&Polynomial<F>, &Polynomial<F>)> = pairs
        .iter()
        .filter_map(|(c1, c2)| match (&c1.packet, &c2.packet) {
            (Some(p1), Some(p2)) if p1.deg0() == 2 && p2.deg0() == 2 => Some((p1, p2)),
            _ => None,
        })
        .collect();
    if !quad_pairs.is_empty() {
        for i in 0..n {
            for j in 0..n {
                if i == j || anchors[i].0 == anchors[j].0 {
                    continue;
                }
                let (pi, ti) = &anchors[i];
                let (pj, tj) = &anchors[j];
                for qi in ti {
                    for qj in tj {
                        if qi == qj {
                            continue;
                        }
                        for (g1, g2) in &quad_pairs {
                            candidates.extend(two_point_quadratic_candidates(
                                pi, pj, qi, qj, g1, g2, sample,
                            ));
                        }
                    }
                }
            }
        }
    }
    for mob in candidates {
        if verify(&mob) {
            return Ok(Some(mob));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug)]
struct ClassPoints<F: Field> {
    fiber: Fiber,
    order: u32,
    size: usize,
    points: Vec<ProjPoint<F>>,
    packet: Option<Polynomial<F>>,
}

/// μ through μ(p₁) = q₁, μ(p₂) = q₂ with one scaling parameter s, pinned by
/// requiring μ to map the roots of g₂ onto the roots of g₁:
/// num(g₁(μ_s(x))) ≡ 0 (mod g₂) gives polynomial conditions on s whose
/// common roots in the field produce the candidates.
fn two_point_quadratic_candidates<F: FieldRoots>(
    p1: &ProjPoint<F>,
    p2: &ProjPoint<F>,
    q1: &ProjPoint<F>,
    q2: &ProjPoint<F>,
    g1: &Polynomial<F>,
    g2: &Polynomial<F>,
    sample: &F,
) -> Vec<Mobius<F>> {
    // b sends (p1, p2) → (0, ∞); a sends (0, ∞) → (q1, q2). Third points are
    // irrelevant placeholders: use the 1-slot of the standard chart.
    let third = |x: &ProjPoint<F>, y: &ProjPoint<F>| -> ProjPoint<F> {
        // any point distinct from both
        for c in 0..8 {
            let cand = ProjPoint::Finite(sample.from_int(c));
            if &cand != x && &cand != y {
                return cand;
            }
        }
        ProjPoint::Infinity
    };
    let t1 = third(p1, p2);
    let Ok(b) = Mobius::to_standard_triple(p1, &t1, p2, sample) else { return Vec::new() };
    let t2 = third(q1, q2);
    let Ok(a) = Mobius::to_standard_triple(q1, &t2, q2, sample) else { return Vec::new() };
    let a_inv = a.inverse();
    // μ_s = a_inv ∘ (s·x) ∘ b. Conditions: for the polynomial with
    // coefficients in s, num(g1(μ_s(x))) mod g2 = 0.
    // Work symbolically: treat s via polynomial in one variable using
    // Polynomial<F> in s nested inside coefficients of x — small degrees, do
    // it concretely: coefficients of x^i are quadratics in s.
    // μ_s(x) = (A(s)x + B(s))/(C(s)x + D(s)) with entries linear in s:
    // scale = diag(s,1): a_inv ∘ scale = [[a_inv.a·s, a_inv.b],[a_inv.c·s, a_inv.d]]
    // then ∘ b: multiply matrices.
    let lin = |u: &F, v: &F| -> (F, F) { (u.clone(), v.clone()) };
    // entries as (coeff of s, constant)
    let e_a = lin(&a_inv.a, &sample.zero_like());
    let e_b = lin(&sample.zero_like(), &a_inv.b);
    let e_c = lin(&a_inv.c, &sample.zero_like());
    let e_d = lin(&sample.zero_like(), &a_inv.d);
    let mulm = |x: &(F, F), y: &F| (x.0.mul(y), x.1.mul(y));
    let addm = |x: &(F, F), y: &(F, F)| (x.0.add(&y.0), x.1.add(&y.1));
    // M = [[e_a, e_b],[e_c, e_d]] · [[b.a, b.b],[b.c, b.d]]
    let m11 = addm(&mulm(&e_a, &b.a), &mulm(&e_b, &b.c));
    let m12 = addm(&mulm(&e_a, &b.b), &mulm(&e_b, &b.d));
    let m21 = addm(&mulm(&e_c, &b.a), &mulm(&e_d, &b.c));
    let m22 = addm(&mulm(&e_c, &b.b), &mulm(&e_d, &b.d));
    // g1 is quadratic: g1(u/v)·v² = c2 u² + c1 uv + c0 v², where
    // u = m11·x + m12, v = m21·x + m22 (entries linear in s).
    // Build polynomials in x with coefficients = Polynomial<F> in s.
    let sp = |p: &(F, F)| Polynomial::from_coeffs(vec![p.1.clone(), p.0.clone()]);
    let u = [sp(&m12), sp(&m11)]; // u = u[0] + u[1]x, each entry a poly in s
    let v = [sp(&m22), sp(&m21)];
    let mul_lin = |p: &[Polynomial<F>; 2], q: &[Polynomial<F>; 2]| -> [Polynomial<F>; 3] {
        [
            p[0].mul(&q[0]),
            p[0].mul(&q[1]).add(&p[1].mul(&q[0])),
            p[1].mul(&q[1]),
        ]
    };
    let uu = mul_lin(&u, &u);
    let uv = mul_lin(&u, &v);
    let vv = mul_lin(&v, &v);
    let c0 = Polynomial::constant(g1.coeff(0));
    let c1 = Polynomial::constant(g1.coeff(1));
    let c2 = Polynomial::constant(g1.coeff(2));
    // big(x) coefficients in s: deg ≤ 2 in x
    let mut big: Vec<Polynomial<F>> = Vec::new();
    for i in 0..3 {
        big.push(
            uu[i]
                .mul(&c2)
                .add(&uv[i].mul(&c1))
                .add(&vv[i].mul(&c0)),
        );
    }
    // Reduce big(x) mod g2(x) (monic quadratic): x² ≡ −(g2_1 x + g2_0)/g2_2.
    let g2m = match g2.monic() {
        Ok(m) => m,
        Err(_) => return Vec::new(),
    };
    let r1 = Polynomial::constant(g2m.coeff(1)).neg();
    let r0 = Polynomial::constant(g2m.coeff(0)).neg();
    // big ≡ (big[1] + big[2]·r1)·x + (big[0] + big[2]·r0)
    let eq_x = big[1].add(&big[2].mul(&r1));
    let eq_c = big[0].add(&big[2].mul(&r0));
    // Common roots of eq_x and eq_c in s:
    let g = eq_x.gcd(&eq_c);
    let target = if g.is_zero() {
        if eq_x.is_zero() && eq_c.is_zero() {
            return Vec::new(); // identically satisfied: no pinning, skip route
        }
        return Vec::new();
    } else {
        g
    };
    let roots = match F::base_field_roots(&target) {
        Ok(r) => r,
        Err(_) => return Vec::new(),
    };
    let mut out = Vec::new();
    for s in roots {
        if s.is_zero() {
            continue;
        }
        let scale = Mobius {
            a: s,
            b: sample.zero_like(),
            c: sample.zero_like(),
            d: sample.one_like(),
        };
        out.push(a_inv.compose(&scale).compose(&b));
    }
    out
}

/// Parametrized obstruction conic u² = A·v² + B attached to a cocycle
/// μ(x) = B/x; the parametrization is u = (x + B/x)/2, v = (x − B/x)/(2√A).
#[derive(Clone, Debug)]
pub struct ConicObstruction<F: Field> {
    pub a: F,
    pub b: F,
}

/// Build the conic for μ of the exact shape x ↦ B/x and verify the
/// parametrization identity (x + B/x)² − 4B ≡ (x − B/x)² symbolically.
pub fn obstruction_conic<F: Field>(a: &F, mu: &Mobius<F>) -> PResult<ConicObstruction<F>> {
    if !mu.a.is_zero() || !mu.d.is_zero() || mu.b.is_zero() || mu.c.is_zero() {
        return Err(PipelineError::Verification(
            "cocycle Möbius must have the shape x ↦ B/x".into(),
        ));
    }
    let b = mu.b.div(&mu.c).map_err(PipelineError::Algebra)?;
    // Identity check over F(x): (x² + B)² − 4Bx² = (x² − B)².
    let sample = a;
    let x2 = Polynomial::monomial(sample.one_like(), 2);
    let bconst = Polynomial::constant(b.clone());
    let lhs = x2
        .add(&bconst)
        .pow(2)
        .sub(&Polynomial::monomial(b.mul(&sample.from_int(4)), 2));
    let rhs = x2.sub(&bconst).pow(2);
    if lhs != rhs {
        return Err(PipelineError::Internal("conic parametrization identity failed".into()));
    }
    Ok(ConicObstruction { a: a.clone(), b })
}

/// Fraction values of a pattern in (denominator, numerator) sorted order.
pub fn fraction_values(pattern: &BranchingPattern) -> Vec<BigRational> {
    pattern.fractions.iter().map(|f| f.value()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat::Rat;
    use crate::QMap;

    fn q(n: i64) -> Rat {
        Rat::from_int(n)
    }

    /// The published degree-12 (2,3,9)-minus-4 map.
    pub(crate) fn b7_map() -> QMap {
        let x = Polynomial::x_like(&q(1));
        let num = Polynomial::monomial(q(64), 2)
            .mul(&Polynomial::linear_root(&q(3)).pow(9))
            .mul(&Polynomial::linear_root(&q(9)));
        let cubic = Polynomial::from_coeffs(vec![q(27), q(-27), q(-72), q(8)]);
        let den = Polynomial::linear_root(&q(1)).mul(&cubic.pow(3)).scale(&q(27));
        let _ = x;
        RationalMap::new(num, den).unwrap()
    }

    #[test]
    fn b7_branching_data() {
        let phi = b7_map();
        let m4 = branching_data(&phi).unwrap();
        assert_eq!(m4.pattern.degree, 12);
        assert_eq!((m4.pattern.klm.k, m4.pattern.klm.l, m4.pattern.klm.m), (2, 3, 9));
        assert_eq!(m4.pattern.bracket_notation(), "6[2] = 3[3]+2+1 = [9]+2+1");
        // Exceptional locus {0, 1, 9, ∞}.
        assert!(m4.locus.includes_infinity);
        let expect = Polynomial::monomial(q(1), 1)
            .mul(&Polynomial::linear_root(&q(1)))
            .mul(&Polynomial::linear_root(&q(9)));
        assert_eq!(m4.locus.poly.monic().unwrap(), expect);
    }

    #[test]
    fn x_squared_partitions() {
        let phi = QMap::new(
            Polynomial::monomial(q(1), 2),
            Polynomial::one_like(&q(1)),
        )
        .unwrap();
        let data = fiber_classes(&phi).unwrap();
        assert_eq!(data.partition(Fiber::Zero), vec![2]);
        assert_eq!(data.partition(Fiber::One), vec![1, 1]);
        assert_eq!(data.partition(Fiber::Infinity), vec![2]);
    }

    #[test]
    fn non_belyi_rejected() {
        // x³ − 3x branches over ±2 as well.
        let phi = QMap::new(
            Polynomial::from_coeffs(vec![q(0), q(-3), q(0), q(1)]),
            Polynomial::one_like(&q(1)),
        )
        .unwrap();
        let err = fiber_classes(&phi).unwrap_err();
        assert!(err.to_string().contains("not Belyi"));
    }

    #[test]
    fn j_invariant_values() {
        // E = x(x−1)(x−9) (+∞): j = 2²·73³/3⁴.
        let e = Polynomial::monomial(q(1), 1)
            .mul(&Polynomial::linear_root(&q(1)))
            .mul(&Polynomial::linear_root(&q(9)));
        let locus = ExceptionalLocus { poly: e, includes_infinity: true };
        let j = j_invariant(&locus).unwrap();
        assert_eq!(j, Rat::from_pair(4 * 389017, 81));
        // t ∈ {−1, 2, ½} gives j = 1728.
        let e = Polynomial::monomial(q(1), 1)
            .mul(&Polynomial::linear_root(&q(1)))
            .mul(&Polynomial::linear_root(&q(-1)));
        let locus = ExceptionalLocus { poly: e, includes_infinity: true };
        assert_eq!(j_invariant(&locus).unwrap(), q(1728));
    }

    #[test]
    fn j_invariant_quartic_vs_cross_ratio() {
        // E = x⁴ − 1 with roots {1, −1, i, −i}: compare the invariant-based
        // value against Eq-style evaluation at the cross-ratio over ℚ(i).
        use crate::algebra::numfield::{NfElem, NumberField};
        let e = Polynomial::from_coeffs(vec![q(-1), q(0), q(0), q(0), q(1)]);
        let locus = ExceptionalLocus { poly: e, includes_infinity: false };
        let j = j_invariant(&locus).unwrap();
        // Cross-ratio route in ℚ(i):
        let k = NumberField::quadratic(-1);
        let i = NfElem::generator(&k);
        let one = i.one_like();
        let pts = [one.clone(), one.neg(), i.clone(), i.neg()];
        // λ = ((p1−p3)(p2−p4)) / ((p1−p4)(p2−p3))
        let lam = pts[0]
            .sub(&pts[2])
            .mul(&pts[1].sub(&pts[3]))
            .div(&pts[0].sub(&pts[3]).mul(&pts[1].sub(&pts[2])))
            .unwrap();
        // j(λ) = 256 (λ²−λ+1)³ / (λ²(λ−1)²)
        let lam2 = lam.mul(&lam);
        let numv = lam2.sub(&lam).add(&one).pow_u(3).mul(&one.from_int(256));
        let denv = lam2.mul(&lam.sub(&one).pow_u(2));
        let jq = numv.div(&denv).unwrap();
        assert_eq!(jq.as_rat().unwrap(), j);
    }

    #[test]
    fn canonical_form_b7_is_identity() {
        let phi = b7_map();
        match canonical_form(&phi).unwrap() {
            CanonicalForm::Canonical { phi: c, mobius, t } => {
                assert!(mobius.is_identity());
                assert_eq!(c, phi);
                assert_eq!(t, ProjPoint::Finite(q(9)));
            }
            _ => panic!("expected canonical"),
        }
    }

    #[test]
    fn canonical_form_recovers_shift() {
        let phi = b7_map();
        // Pre-compose with x ↦ x+1; policy must recover x ↦ x−1.
        let shift = QMap::from_poly(
            Polynomial::from_coeffs(vec![q(1), q(1)]),
            &q(1),
        );
        let shifted = phi.compose_rational(&shift).unwrap();
        match canonical_form(&shifted).unwrap() {
            CanonicalForm::Canonical { phi: c, mobius, .. } => {
                assert_eq!(c, phi);
                // μ = x − 1 as a matrix (1, −1; 0, 1) up to scale.
                let m = mobius.as_rational();
                let expect = QMap::new(
                    Polynomial::from_coeffs(vec![q(-1), q(1)]),
                    Polynomial::one_like(&q(1)),
                )
                .unwrap();
                assert_eq!(m, expect);
            }
            _ => panic!("expected canonical"),
        }
    }

    #[test]
    fn mobius_equivalent_recovers_composition() {
        let phi = b7_map();
        // μ = (2x+1)/(x−1)
        let mu = Mobius::new(q(2), q(1), q(1), q(-1)).unwrap();
        let phi2 = phi.compose_rational(&mu.as_rational()).unwrap();
        let found = mobius_equivalent(&phi, &phi2).unwrap().expect("equivalent");
        let c = phi.compose_rational(&found.as_rational()).unwrap();
        assert_eq!(c, phi2);
    }

    #[test]
    fn different_patterns_not_equivalent() {
        let phi = b7_map();
        let psi = QMap::new(
            Polynomial::monomial(q(1), 2),
            Polynomial::one_like(&q(1)),
        )
        .unwrap();
        assert!(mobius_equivalent(&phi, &psi).unwrap().is_none());
    }

    #[test]
    fn s3_orbit_of_nine() {
        let orbit = s3_orbit(&q(9)).unwrap();
        let expect: Vec<Rat> = vec![
            q(9),
            q(-8),
            Rat::from_pair(9, 8),
            Rat::from_pair(1, 9),
            Rat::from_pair(-1, 8),
            Rat::from_pair(8, 9),
        ];
        assert_eq!(orbit, expect);
    }

    #[test]
    fn conic_shape_checks() {
        let mu = Mobius::new(q(0), q(-5), q(1), q(0)).unwrap();
        let c = obstruction_conic(&q(-3), &mu).unwrap();
        assert_eq!(c.b, q(-5));
        // Not of the B/x shape:
        let bad = Mobius::new(q(1), q(1), q(0), q(1)).unwrap();
        assert!(obstruction_conic(&q(-3), &bad).is_err());
    }
}
