//! Functional decomposition φ = g ∘ h into lower-degree rational maps, by
//! matching the fiber structure: the zero- and pole-fibers of g induce a
//! block partition of φ's corresponding fibers, each block being one
//! h-fiber; candidate h's come from block pairs and g follows by linear
//! algebra in the span of {h_num^i · h_den^(dg−i)}. Every returned pair is
//! certified by exact recomposition.

use crate::algebra::fp::Fp;
use crate::algebra::fpfactor::factor_squarefree_fp;
use crate::algebra::poly::Polynomial;
use crate::algebra::ratfun::{Mobius, ProjPoint, RationalMap};
use crate::algebra::rat::Rat;
use crate::algebra::roots::FieldRoots;
use crate::algebra::linalg::solve_rectangular;
use crate::algebra::Field;
use crate::error::{PResult, PipelineError};
use crate::invariants::torbit::factor_squarefree_rational;
use crate::patterns::Fiber;
use crate::NfMap;

/// Splitting a squarefree polynomial into base-field-irreducible chunks;
/// points inside one chunk always travel together under a decomposition
/// defined over the field.
pub trait FieldFactor: FieldRoots {
    fn irreducible_chunks(poly: &Polynomial<Self>) -> PResult<Vec<Polynomial<Self>>>;
}

impl FieldFactor for Fp {
    fn irreducible_chunks(poly: &Polynomial<Fp>) -> PResult<Vec<Polynomial<Fp>>> {
        factor_squarefree_fp(poly).map_err(PipelineError::Algebra)
    }
}

impl FieldFactor for Rat {
    fn irreducible_chunks(poly: &Polynomial<Rat>) -> PResult<Vec<Polynomial<Rat>>> {
        factor_squarefree_rational(poly)
    }
}

/// One indivisible piece of a fiber: a monic chunk (or ∞) with its
/// multiplicity in φ.
#[derive(Clone, Debug)]
struct Item<F: Field> {
    poly: Option<Polynomial<F>>,
    mult: u32,
}

impl<F: Field> Item<F> {
    /// Total φ-multiplicity-weighted degree.
    fn weight(&self) -> u32 {
        match &self.poly {
            Some(p) => p.deg0() as u32 * self.mult,
            None => self.mult,
        }
    }
}

/// A candidate h-fiber: the finite part ∏ chunk^(μ/m) and the ∞ share.
#[derive(Clone, Debug)]
struct Block<F: Field> {
    fin: Polynomial<F>,
    inf: u32,
    m: u32,
}

fn fiber_items<F: FieldFactor>(
    phi: &RationalMap<F>,
    fiber: Fiber,
) -> PResult<Vec<Item<F>>> {
    let data = crate::invariants::fiber_classes_unchecked(phi).map_err(PipelineError::Algebra)?;
    let mut items = Vec::new();
    for class in data.classes_in(fiber) {
        if !class.factor.is_constant() {
            for chunk in F::irreducible_chunks(&class.factor)? {
                items.push(Item { poly: Some(chunk), mult: class.order });
            }
        }
        if class.includes_infinity {
            items.push(Item { poly: None, mult: class.order });
        }
    }
    Ok(items)
}

/// All block partitions of the fiber items with per-block h-degree dh and
/// total value-multiplicity dg.
fn enumerate_blocks<F: Field>(
    items: &[Item<F>],
    dg: u32,
    dh: u32,
    sample: &F,
) -> Vec<Vec<Block<F>>> {
    // Set partitions by recursive assignment; groups index into `groups`.
    let mut out = Vec::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    fn rec<F: Field>(
        items: &[Item<F>],
        next: usize,
        groups: &mut Vec<Vec<usize>>,
        dg: u32,
        dh: u32,
        sample: &F,
        out: &mut Vec<Vec<Block<F>>>,
    ) {
        if next == items.len() {
            // Finalize: per group, m = weight/dh must be a positive integer
            // dividing every member multiplicity; Σ m == dg.
            let mut blocks = Vec::new();
            let mut total_m = 0u32;
            for g in groups.iter() {
                let weight: u32 = g.iter().map(|&i| items[i].weight()).sum();
                if weight % dh != 0 {
                    return;
                }
                let m = weight / dh;
                if m == 0 || g.iter().any(|&i| items[i].mult % m != 0) {
                    return;
                }
                total_m += m;
                if total_m > dg {
                    return;
                }
                let mut fin: Option<Polynomial<F>> = None;
                let mut inf = 0u32;
                for &i in g {
                    match &items[i].poly {
                        Some(p) => {
                            let piece = p.pow((items[i].mult / m) as usize);
                            fin = Some(match fin {
                                Some(f) => f.mul(&piece),
                                None => piece,
                            });
                        }
                        None => inf = items[i].mult / m,
                    }
                }
                let fin = fin.unwrap_or_else(|| Polynomial::one_like(sample));
                blocks.push(Block { fin, inf, m });
            }
            if total_m == dg {
                out.push(blocks);
            }
            return;
        }
        for gi in 0..groups.len() {
            groups[gi].push(next);
            rec(items, next + 1, groups, dg, dh, sample, out);
            groups[gi].pop();
        }
        groups.push(vec![next]);
        rec(items, next + 1, groups, dg, dh, sample, out);
        groups.pop();
    }
    rec(items, 0, &mut groups, dg, dh, sample, &mut out);
    out
}

/// Solve g from h: both φ’s numerator and denominator must lie in the span
/// of {Hnum^i · Hden^(dg−i)}.
fn solve_outer<F: Field>(
    phi: &RationalMap<F>,
    h: &RationalMap<F>,
    dg: usize,
) -> Option<RationalMap<F>> {
    let d = phi.map_degree();
    let sample = phi.sample();
    let mut basis: Vec<Polynomial<F>> = Vec::with_capacity(dg + 1);
    for i in 0..=dg {
        basis.push(h.num().pow(i).mul(&h.den().pow(dg - i)));
    }
    let zero = sample.zero_like();
    let rows = d + 1;
    let solve_one = |target: &Polynomial<F>| -> Option<Vec<F>> {
        let mut a = vec![vec![zero.clone(); dg + 1]; rows];
        let mut b = vec![zero.clone(); rows];
        for r in 0..rows {
            for (ci, base) in basis.iter().enumerate() {
                if !base.is_zero() {
                    a[r][ci] = base.coeff(r);
                }
            }
            if !target.is_zero() {
                b[r] = target.coeff(r);
            }
        }
        solve_rectangular(a, b, dg + 1)
    };
    let u = solve_one(phi.num())?;
    let v = solve_one(phi.den())?;
    let gnum = Polynomial::from_coeffs(u);
    let gden = Polynomial::from_coeffs(v);
    if gnum.is_zero() || gden.is_zero() {
        return None;
    }
    RationalMap::new(gnum, gden).ok()
}

/// Normalize (g, h) so h(0) = 0 and h's lowest series coefficient is 1.
fn normalize_pair<F: Field>(
    g: &RationalMap<F>,
    h: &RationalMap<F>,
) -> PResult<(RationalMap<F>, RationalMap<F>)> {
    let sample = h.sample();
    let one = sample.one_like();
    // First Möbius: move h(0) to 0.
    let nu = if h.den().coeff(0).is_zero() {
        // h(0) = ∞ → invert.
        Mobius::new(sample.zero_like(), one.clone(), one.clone(), sample.zero_like())
            .map_err(PipelineError::Algebra)?
    } else {
        let h0 = h.eval(&sample.zero_like()).map_err(PipelineError::Algebra)?;
        Mobius::new(one.clone(), h0.neg(), sample.zero_like(), one.clone())
            .map_err(PipelineError::Algebra)?
    };
    let h1 = nu
        .as_rational()
        .compose_rational(h)
        .map_err(PipelineError::Algebra)?;
    let g1 = g
        .compose_rational(&nu.inverse().as_rational())
        .map_err(PipelineError::Algebra)?;
    // Scaling: leading series coefficient of h1 at 0 becomes 1.
    let ord = h1
        .num()
        .coeffs()
        .iter()
        .position(|c| !c.is_zero())
        .unwrap_or(0);
    let lead = h1
        .num()
        .coeff(ord)
        .div(&h1.den().coeff(0))
        .map_err(PipelineError::Algebra)?;
    let scale = Mobius::new(
        lead.inv().map_err(PipelineError::Algebra)?,
        sample.zero_like(),
        sample.zero_like(),
        one,
    )
    .map_err(PipelineError::Algebra)?;
    let h2 = scale
        .as_rational()
        .compose_rational(&h1)
        .map_err(PipelineError::Algebra)?;
    let g2 = g1
        .compose_rational(&scale.inverse().as_rational())
        .map_err(PipelineError::Algebra)?;
    Ok((g2, h2))
}

/// All proper decompositions φ = g ∘ h with 1 < deg h < deg φ, normalized
/// (h(0) = 0, unit leading series coefficient) and certified by exact
/// recomposition. For each divisor split either a decomposition is returned
/// or none exists over the base field.
pub fn decompose<F: FieldFactor>(
    phi: &RationalMap<F>,
) -> PResult<Vec<(RationalMap<F>, RationalMap<F>)>> {
    let d = phi.map_degree();
    let mut out: Vec<(RationalMap<F>, RationalMap<F>)> = Vec::new();
    if d < 4 {
        return Ok(out);
    }
    let items0 = fiber_items(phi, Fiber::Zero)?;
    let items_inf = fiber_items(phi, Fiber::Infinity)?;
    for dh in 2..d {
        if d % dh != 0 {
            continue;
        }
        let dg = d / dh;
        if dg < 2 {
            continue;
        }
        let sample = phi.sample();
        let zero_blockings = enumerate_blocks(&items0, dg as u32, dh as u32, sample);
        let inf_blockings = enumerate_blocks(&items_inf, dg as u32, dh as u32, sample);
        let mut seen: Vec<RationalMap<F>> = Vec::new();
        for zb in &zero_blockings {
            for ib in &inf_blockings {
                for c in zb {
                    for dd in ib {
                        // h = C_fin / D_fin with ∞ bookkeeping.
                        let ok_deg = if c.inf > 0 {
                            dd.inf == 0
                                && dd.fin.deg0() == dh
                                && c.fin.deg0() + c.inf as usize == dh
                        } else if dd.inf > 0 {
                            c.fin.deg0() == dh
                                && dd.fin.deg0() + dd.inf as usize == dh
                        } else {
                            c.fin.deg0() == dh && dd.fin.deg0() == dh
                        };
                        if !ok_deg {
                            continue;
                        }
                        let Ok(h) = RationalMap::new(c.fin.clone(), dd.fin.clone()) else {
                            continue;
                        };
                        if h.map_degree() != dh {
                            continue;
                        }
                        if seen.contains(&h) {
                            continue;
                        }
                        seen.push(h.clone());
                        let Some(g) = solve_outer(phi, &h, dg) else { continue };
                        // Exact certification.
                        let Ok(comp) = g.compose_rational(&h) else { continue };
                        if comp != *phi {
                            continue;
                        }
                        let (gn, hn) = normalize_pair(&g, &h)?;
                        if gn.compose_rational(&hn).map_err(PipelineError::Algebra)? == *phi
                            && !out.iter().any(|(a, b)| *a == gn && *b == hn)
                        {
                            out.push((gn, hn));
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Degrees (deg g, deg h) of the proper decompositions of an exact entry;
/// computed over ℚ when the entry's field is rational, skipped otherwise.
pub fn decomposition_degrees(phi: &NfMap) -> PResult<Vec<(usize, usize)>> {
    let rational: Option<Vec<Rat>> = phi
        .num()
        .coeffs()
        .iter()
        .map(|c| c.as_rat())
        .collect();
    let rational_den: Option<Vec<Rat>> = phi
        .den()
        .coeffs()
        .iter()
        .map(|c| c.as_rat())
        .collect();
    let (Some(num), Some(den)) = (rational, rational_den) else {
        return Ok(Vec::new());
    };
    let q = RationalMap::new(
        Polynomial::from_coeffs(num),
        Polynomial::from_coeffs(den),
    )
    .map_err(PipelineError::Algebra)?;
    let mut degs: Vec<(usize, usize)> = decompose(&q)?
        .into_iter()
        .map(|(g, h)| (g.map_degree(), h.map_degree()))
        .collect();
    degs.sort_unstable();
    degs.dedup();
    Ok(degs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rat {
        Rat::from_int(n)
    }

    #[test]
    fn x4_decomposes_as_squares() {
        let phi = RationalMap::from_poly(Polynomial::monomial(q(1), 4), &q(1));
        let found = decompose(&phi).unwrap();
        assert!(!found.is_empty());
        let sq = RationalMap::from_poly(Polynomial::monomial(q(1), 2), &q(1));
        assert!(found.iter().any(|(g, h)| *g == sq && *h == sq));
    }

    #[test]
    fn prime_degree_is_indecomposable() {
        // x⁵ + x has prime degree: no proper split.
        let phi = RationalMap::from_poly(
            Polynomial::from_coeffs(vec![q(0), q(1), q(0), q(0), q(0), q(1)]),
            &q(1),
        );
        assert!(decompose(&phi).unwrap().is_empty());
    }

    #[test]
    fn b7_has_a_3_4_decomposition() {
        let phi = {
            let num = Polynomial::monomial(q(64), 2)
                .mul(&Polynomial::linear_root(&q(3)).pow(9))
                .mul(&Polynomial::linear_root(&q(9)));
            let cubic = Polynomial::from_coeffs(vec![q(27), q(-27), q(-72), q(8)]);
            let den = Polynomial::linear_root(&q(1)).mul(&cubic.pow(3)).scale(&q(27));
            RationalMap::new(num, den).unwrap()
        };
        let found = decompose(&phi).unwrap();
        assert!(
            found
                .iter()
                .any(|(g, h)| (g.map_degree() == 4 && h.map_degree() == 3)
                    || (g.map_degree() == 3 && h.map_degree() == 4)),
            "degrees found: {:?}",
            found
                .iter()
                .map(|(g, h)| (g.map_degree(), h.map_degree()))
                .collect::<Vec<_>>()
        );
        for (g, h) in &found {
            assert_eq!(g.compose_rational(h).unwrap(), phi);
            // Normalization: h(0) = 0.
            assert!(h.num().coeff(0).is_zero());
        }
    }
}
