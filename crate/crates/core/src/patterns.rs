//! Enumeration of the finitely many (k,ℓ,m,d) candidates and all branching
//! patterns of minus-4-hyperbolic Belyi functions.

use std::fmt;

use num::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{PResult, PipelineError};

/// The fiber a point sits above (z = 1, 0 or ∞), carrying prescribed
/// regular orders k, ℓ, m respectively.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Fiber {
    One,
    Zero,
    Infinity,
}

impl Fiber {
    pub const ALL: [Fiber; 3] = [Fiber::One, Fiber::Zero, Fiber::Infinity];

    pub fn index(self) -> usize {
        match self {
            Fiber::One => 0,
            Fiber::Zero => 1,
            Fiber::Infinity => 2,
        }
    }
}

impl fmt::Display for Fiber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fiber::One => write!(f, "1"),
            Fiber::Zero => write!(f, "0"),
            Fiber::Infinity => write!(f, "inf"),
        }
    }
}

/// A hyperbolic triple k ≤ ℓ ≤ m together with its degree bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KlmType {
    pub k: u32,
    pub l: u32,
    pub m: u32,
    pub d_max: u32,
}

impl KlmType {
    pub fn new(k: u32, l: u32, m: u32) -> PResult<Self> {
        if !(k <= l && l <= m) {
            return Err(PipelineError::Pattern(format!(
                "orders must be non-decreasing, got ({k},{l},{m})"
            )));
        }
        // Hyperbolic: 1/k + 1/ℓ + 1/m < 1 ⟺ ℓm + km + kℓ < kℓm.
        let (k64, l64, m64) = (k as u64, l as u64, m as u64);
        if l64 * m64 + k64 * m64 + k64 * l64 >= k64 * l64 * m64 {
            return Err(PipelineError::Pattern(format!(
                "({k},{l},{m}) is not hyperbolic"
            )));
        }
        // Degree bound at S = 4/m: d = (2 − 4/m)/(1 − 1/k − 1/ℓ − 1/m).
        let num = (2 * m64 - 4) * k64 * l64;
        let den = k64 * l64 * m64 - l64 * m64 - k64 * m64 - k64 * l64;
        let d_max = (num / den) as u32;
        Ok(KlmType { k, l, m, d_max })
    }

    pub fn order_of(&self, fiber: Fiber) -> u32 {
        match fiber {
            Fiber::One => self.k,
            Fiber::Zero => self.l,
            Fiber::Infinity => self.m,
        }
    }
}

/// An exceptional branching fraction A/B: branching order A at a point in a
/// fiber with prescribed order B. Stored unsimplified; the fiber is explicit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BranchingFraction {
    pub numerator: u32,
    pub order: u32,
    pub fiber: Fiber,
}

impl BranchingFraction {
    pub fn new(numerator: u32, order: u32, fiber: Fiber) -> PResult<Self> {
        if numerator == 0 {
            return Err(PipelineError::Pattern("branching order must be positive".into()));
        }
        if numerator == order {
            return Err(PipelineError::Pattern(format!(
                "{numerator}/{order} is not exceptional (A = B)"
            )));
        }
        Ok(BranchingFraction { numerator, order, fiber })
    }

    pub fn value(&self) -> BigRational {
        BigRational::new(self.numerator.into(), self.order.into())
    }

    /// Appendix-style sort key: denominator first, then numerator.
    pub fn sort_key(&self) -> (u32, u32) {
        (self.order, self.numerator)
    }
}

impl fmt::Display for BranchingFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.order)
    }
}

/// A full branching pattern: three partitions of the degree (fibers 1, 0, ∞)
/// with the prescribed regular orders and exactly 4 exceptional parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BranchingPattern {
    pub klm: KlmType,
    pub degree: u32,
    /// partitions[fiber.index()]: sorted descending, sums to degree.
    pub partitions: [Vec<u32>; 3],
    /// The 4 exceptional fractions, sorted by (denominator, numerator, fiber).
    pub fractions: Vec<BranchingFraction>,
}

impl BranchingPattern {
    /// Number of regular points in a fiber.
    pub fn regular_count(&self, fiber: Fiber) -> usize {
        let o = self.klm.order_of(fiber);
        self.partitions[fiber.index()].iter().filter(|&&p| p == o).count()
    }

    pub fn exceptional_in(&self, fiber: Fiber) -> Vec<u32> {
        let o = self.klm.order_of(fiber);
        self.partitions[fiber.index()]
            .iter()
            .copied()
            .filter(|&p| p != o)
            .collect()
    }

    /// Bracket notation in fiber order (1, 0, ∞):
    /// e.g. "6[2] = 3[3]+2+1 = [9]+2+1".
    pub fn bracket_notation(&self) -> String {
        let parts: Vec<String> = Fiber::ALL
            .iter()
            .map(|&f| {
                let o = self.klm.order_of(f);
                let reg = self.regular_count(f);
                let mut s = String::new();
                if reg > 1 {
                    s.push_str(&format!("{reg}[{o}]"));
                } else {
                    s.push_str(&format!("[{o}]"));
                }
                let mut exc = self.exceptional_in(f);
                exc.sort_unstable_by(|a, b| b.cmp(a));
                for e in exc {
                    s.push_str(&format!("+{e}"));
                }
                s
            })
            .collect();
        parts.join(" = ")
    }

    /// Canonical identity key; patterns differing only by a swap of
    /// equal-order fibers compare equal.
    fn canonical_key(&self) -> Vec<(u32, Vec<u32>)> {
        let mut fibers: Vec<(u32, Vec<u32>)> = Fiber::ALL
            .iter()
            .map(|&f| (self.klm.order_of(f), self.partitions[f.index()].clone()))
            .collect();
        fibers.sort();
        fibers
    }

    pub fn fraction_sum(&self) -> BigRational {
        self.fractions.iter().map(|f| f.value()).sum()
    }
}

impl fmt::Display for BranchingPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bracket_notation())
    }
}

/// The 29 candidate tuples (k,ℓ,m, d_max) in the published order; the final
/// two yield fewer than 4 exceptional points and come back flagged.
pub fn enumerate_klm_candidates() -> Vec<(KlmType, bool)> {
    // Hyperbolic k ≤ ℓ ≤ m with (1 − 1/k − 1/ℓ)m² − 3m + 4 ≤ 0.
    let mut out = Vec::new();
    for k in 2u32..=4 {
        for l in k..=8 {
            for m in l..=100 {
                let klm = match KlmType::new(k, l, m) {
                    Ok(t) => t,
                    Err(_) => continue,
                };
                let (k64, l64, m64) = (k as i64, l as i64, m as i64);
                let lhs = (k64 * l64 - l64 - k64) * m64 * m64 - 3 * m64 * k64 * l64
                    + 4 * k64 * l64;
                if lhs > 0 {
                    continue;
                }
                out.push(klm);
            }
        }
    }
    out.sort_by_key(|t| (t.k, t.l, t.m));
    out.into_iter()
        .map(|t| {
            let flagged = enumerate_patterns(&t).is_empty();
            (t, flagged)
        })
        .collect()
}

/// Degree formula d = (2 − S)/(1 − 1/k − 1/ℓ − 1/m); None unless the result
/// is a positive integer ≥ m.
pub fn degree_from_fractions(klm: &KlmType, fractions: &[BigRational]) -> Option<u32> {
    let s: BigRational = fractions.iter().cloned().sum();
    let one = BigRational::from_integer(1.into());
    let two = BigRational::from_integer(2.into());
    let inv = |n: u32| BigRational::new(1.into(), n.into());
    let denom = &one - inv(klm.k) - inv(klm.l) - inv(klm.m);
    let d = (&two - s) / denom;
    if !d.is_integer() {
        return None;
    }
    let d = d.to_integer();
    if d < klm.m.into() {
        return None;
    }
    u32::try_from(d).ok()
}

/// All branching patterns for a klm type, deduplicated (equal-order fiber
/// swaps identified), ordered by degree descending then fraction tuple.
pub fn enumerate_patterns(klm: &KlmType) -> Vec<BranchingPattern> {
    let mut out: Vec<BranchingPattern> = Vec::new();
    let mut seen: Vec<Vec<(u32, Vec<u32>)>> = Vec::new();
    let (k, l, m) = (klm.k, klm.l, klm.m);
    for d in m..=klm.d_max {
        if d < 3 {
            continue;
        }
        for h1 in 1..=d / k {
            for h0 in 1..=d / l {
                if h1 + h0 + 1 > d - 2 {
                    continue;
                }
                let hinf = d - 2 - h1 - h0;
                if hinf < 1 || hinf > d / m {
                    continue;
                }
                let rems = [d - k * h1, d - l * h0, d - m * hinf];
                for (n1, n0, ninf) in part_counts(rems) {
                    let p1s = partitions_into(rems[0], n1, k);
                    let p0s = partitions_into(rems[1], n0, l);
                    let pis = partitions_into(rems[2], ninf, m);
                    for a in &p1s {
                        for b in &p0s {
                            for c in &pis {
                                let mut parts1 = vec![k; h1 as usize];
                                parts1.extend(a);
                                let mut parts0 = vec![l; h0 as usize];
                                parts0.extend(b);
                                let mut partsi = vec![m; hinf as usize];
                                partsi.extend(c);
                                for p in [&mut parts1, &mut parts0, &mut partsi] {
                                    p.sort_unstable_by(|x, y| y.cmp(x));
                                }
                                let mut fractions = Vec::new();
                                for (&v, f, o) in a
                                    .iter()
                                    .map(|v| (v, Fiber::One, k))
                                    .chain(b.iter().map(|v| (v, Fiber::Zero, l)))
                                    .chain(c.iter().map(|v| (v, Fiber::Infinity, m)))
                                {
                                    fractions.push(BranchingFraction::new(v, o, f).unwrap());
                                }
                                fractions.sort_by_key(|f| (f.order, f.numerator, f.fiber));
                                let pat = BranchingPattern {
                                    klm: *klm,
                                    degree: d,
                                    partitions: [parts1, parts0, partsi],
                                    fractions,
                                };
                                let key = pat.canonical_key();
                                if !seen.contains(&key) {
                                    seen.push(key);
                                    out.push(pat);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out.sort_by(|x, y| {
        y.degree.cmp(&x.degree).then_with(|| {
            let kx: Vec<(u32, u32)> = x.fractions.iter().map(|f| f.sort_key()).collect();
            let ky: Vec<(u32, u32)> = y.fractions.iter().map(|f| f.sort_key()).collect();
            kx.cmp(&ky)
        })
    });
    out
}

/// Ways to split 4 exceptional parts over the fibers consistently with the
/// per-fiber remainders (0 remainder ⟺ 0 parts, positive ⟹ ≥ 1 part).
fn part_counts(rems: [u32; 3]) -> Vec<(u32, u32, u32)> {
    let mut res = Vec::new();
    for n1 in 0..=4u32 {
        for n0 in 0..=4 - n1 {
            let ninf = 4 - n1 - n0;
            let ok = |rem: u32, n: u32| (rem == 0) == (n == 0) && rem >= n;
            if ok(rems[0], n1) && ok(rems[1], n0) && ok(rems[2], ninf) {
                res.push((n1, n0, ninf));
            }
        }
    }
    res
}

/// Multiset partitions of `total` into exactly `count` positive parts, each
/// different from `forbidden`, parts non-increasing.
fn partitions_into(total: u32, count: u32, forbidden: u32) -> Vec<Vec<u32>> {
    fn rec(
        total: u32,
        count: u32,
        max: u32,
        forbidden: u32,
        acc: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if count == 0 {
            if total == 0 {
                out.push(acc.clone());
            }
            return;
        }
        let hi = max.min(total.saturating_sub(count - 1));
        for part in (1..=hi).rev() {
            if part == forbidden {
                continue;
            }
            acc.push(part);
            rec(total - part, count - 1, part, forbidden, acc, out);
            acc.pop();
        }
    }
    if count == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    rec(total, count, total, forbidden, &mut Vec::new(), &mut out);
    out
}

/// The unique pattern with these unsimplified fractions (value + fiber).
pub fn pattern_of(klm: &KlmType, fractions: &[BranchingFraction]) -> PResult<BranchingPattern> {
    if fractions.len() != 4 {
        return Err(PipelineError::Pattern("exactly 4 branching fractions required".into()));
    }
    for f in fractions {
        if f.numerator == f.order {
            return Err(PipelineError::Pattern(format!("{f} is not exceptional")));
        }
        if f.order != klm.order_of(f.fiber) {
            return Err(PipelineError::Pattern(format!(
                "{f} carries order {} but fiber {} prescribes {}",
                f.order,
                f.fiber,
                klm.order_of(f.fiber)
            )));
        }
    }
    let values: Vec<BigRational> = fractions.iter().map(|f| f.value()).collect();
    let d = degree_from_fractions(klm, &values).ok_or_else(|| {
        PipelineError::Pattern("no integer degree ≥ m for these fractions".into())
    })?;
    let mut partitions: [Vec<u32>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for fiber in Fiber::ALL {
        let o = klm.order_of(fiber);
        let exc: Vec<u32> = fractions
            .iter()
            .filter(|f| f.fiber == fiber)
            .map(|f| f.numerator)
            .collect();
        let esum: u32 = exc.iter().sum();
        if esum > d {
            return Err(PipelineError::Pattern("exceptional orders exceed the degree".into()));
        }
        let rem = d - esum;
        if rem % o != 0 {
            return Err(PipelineError::Pattern(format!(
                "fiber {fiber}: leftover {rem} not divisible by {o}"
            )));
        }
        let h = rem / o;
        if h == 0 {
            return Err(PipelineError::Pattern(format!(
                "fiber {fiber} has no regular point"
            )));
        }
        let mut parts = vec![o; h as usize];
        parts.extend(exc);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        partitions[fiber.index()] = parts;
    }
    let total: usize = partitions.iter().map(|p| p.len()).sum();
    if total != d as usize + 2 {
        return Err(PipelineError::Pattern(format!(
            "part count {total} ≠ d+2 = {}",
            d + 2
        )));
    }
    let mut fr = fractions.to_vec();
    fr.sort_by_key(|f| (f.order, f.numerator, f.fiber));
    Ok(BranchingPattern { klm: *klm, degree: d, partitions, fractions: fr })
}

/// Parse "a/b" fractions with fibers resolved by the denominator; ambiguous
/// denominators (k = ℓ etc.) are resolved by trying all assignments and
/// keeping the unique feasible pattern.
pub fn pattern_from_fraction_strings(klm: &KlmType, specs: &[String]) -> PResult<BranchingPattern> {
    if specs.len() != 4 {
        return Err(PipelineError::Usage("exactly four fractions required".into()));
    }
    let mut parsed = Vec::new();
    for s in specs {
        let (n, d) = s
            .split_once('/')
            .ok_or_else(|| PipelineError::Usage(format!("bad fraction {s}")))?;
        let n: u32 = n.trim().parse().map_err(|_| PipelineError::Usage(format!("bad fraction {s}")))?;
        let d: u32 = d.trim().parse().map_err(|_| PipelineError::Usage(format!("bad fraction {s}")))?;
        parsed.push((n, d));
    }
    // Candidate fibers per fraction = fibers whose prescribed order matches.
    let mut choices: Vec<Vec<Fiber>> = Vec::new();
    for &(_, d) in &parsed {
        let fs: Vec<Fiber> = Fiber::ALL
            .iter()
            .copied()
            .filter(|&f| klm.order_of(f) == d)
            .collect();
        if fs.is_empty() {
            return Err(PipelineError::Usage(format!(
                "denominator {d} is not one of the prescribed orders"
            )));
        }
        choices.push(fs);
    }
    let mut found: Vec<BranchingPattern> = Vec::new();
    let mut idx = [0usize; 4];
    'outer: loop {
        let fractions: PResult<Vec<BranchingFraction>> = parsed
            .iter()
            .zip(idx.iter().enumerate())
            .map(|(&(n, d), (i, &j))| BranchingFraction::new(n, d, choices[i][j]))
            .collect();
        if let Ok(fr) = fractions {
            if let Ok(p) = pattern_of(klm, &fr) {
                if !found.iter().any(|q| q.canonical_key() == p.canonical_key()) {
                    found.push(p);
                }
            }
        }
        // Odometer over the fiber choices.
        for i in 0..4 {
            idx[i] += 1;
            if idx[i] < choices[i].len() {
                continue 'outer;
            }
            idx[i] = 0;
        }
        break;
    }
    match found.len() {
        0 => Err(PipelineError::Pattern("no feasible pattern for these fractions".into())),
        1 => Ok(found.pop().unwrap()),
        n => Err(PipelineError::Pattern(format!(
            "ambiguous fractions: {n} distinct feasible patterns"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frac(n: u32, o: u32, f: Fiber) -> BranchingFraction {
        BranchingFraction::new(n, o, f).unwrap()
    }

    #[test]
    fn klm_candidates_match_table() {
        let c = enumerate_klm_candidates();
        assert_eq!(c.len(), 29);
        let find = |k, l, m| c.iter().find(|(t, _)| (t.k, t.l, t.m) == (k, l, m)).unwrap();
        assert_eq!(find(2, 3, 7).0.d_max, 60);
        assert_eq!(find(2, 3, 8).0.d_max, 36);
        assert_eq!(find(2, 3, 16).0.d_max, 16);
        assert_eq!(find(4, 4, 4).0.d_max, 4);
        assert_eq!(find(3, 4, 5).0.d_max, 5);
        assert!(c[27].1 && c[28].1);
        assert_eq!((c[27].0.k, c[27].0.l, c[27].0.m), (3, 4, 5));
        assert_eq!((c[28].0.k, c[28].0.l, c[28].0.m), (4, 4, 4));
    }

    #[test]
    fn degree_formula_examples() {
        let t239 = KlmType::new(2, 3, 9).unwrap();
        let fr = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(
            degree_from_fractions(&t239, &[fr(1, 3), fr(2, 3), fr(1, 9), fr(2, 9)]),
            Some(12)
        );
        let t237 = KlmType::new(2, 3, 7).unwrap();
        assert_eq!(degree_from_fractions(&t237, &[fr(1, 7), fr(1, 7), fr(1, 7), fr(1, 7)]), Some(60));
        // S = 2 forces degree 0: invalid.
        assert_eq!(degree_from_fractions(&t237, &[fr(1, 2), fr(1, 2), fr(1, 2), fr(1, 2)]), None);
    }

    #[test]
    fn pattern_census_rows() {
        let counts = |k, l, m| enumerate_patterns(&KlmType::new(k, l, m).unwrap()).len();
        assert_eq!(counts(2, 3, 7), 152);
        assert_eq!(counts(2, 3, 8), 65);
        assert_eq!(counts(2, 4, 5), 40);
    }

    #[test]
    fn b7_pattern_rendering() {
        let klm = KlmType::new(2, 3, 9).unwrap();
        let fractions = [
            frac(1, 3, Fiber::Zero),
            frac(2, 3, Fiber::Zero),
            frac(1, 9, Fiber::Infinity),
            frac(2, 9, Fiber::Infinity),
        ];
        let p = pattern_of(&klm, &fractions).unwrap();
        assert_eq!(p.degree, 12);
        assert_eq!(p.bracket_notation(), "6[2] = 3[3]+2+1 = [9]+2+1");
    }

    #[test]
    fn degree60_rendering() {
        let klm = KlmType::new(2, 3, 7).unwrap();
        let fractions = [
            frac(1, 7, Fiber::Infinity),
            frac(1, 7, Fiber::Infinity),
            frac(1, 7, Fiber::Infinity),
            frac(1, 7, Fiber::Infinity),
        ];
        let p = pattern_of(&klm, &fractions).unwrap();
        assert_eq!(p.degree, 60);
        assert_eq!(p.bracket_notation(), "30[2] = 20[3] = 8[7]+1+1+1+1");
    }

    #[test]
    fn non_exceptional_fraction_rejected() {
        assert!(BranchingFraction::new(2, 2, Fiber::One).is_err());
    }
}

#[cfg(test)]
mod census_tests {
    use super::*;

    #[test]
    fn grand_census_is_378() {
        let rows: Vec<(Vec<(u32, u32, u32)>, usize)> = vec![
            (vec![(2, 3, 7)], 152),
            (vec![(2, 3, 8)], 65),
            (vec![(2, 3, 9)], 32),
            (vec![(2, 3, 10)], 20),
            (vec![(2, 3, 11), (2, 3, 12), (2, 3, 13), (2, 3, 14), (2, 3, 15), (2, 3, 16)], 18),
            (vec![(2, 4, 5)], 40),
            (vec![(2, 4, 6), (2, 4, 7), (2, 4, 8), (2, 4, 9), (2, 4, 10)], 24),
            (vec![(2, 5, 5), (2, 5, 6), (2, 5, 7), (2, 5, 8), (2, 6, 6), (2, 6, 7)], 12),
            (vec![(3, 3, 4), (3, 3, 5), (3, 3, 6), (3, 3, 7), (3, 4, 4), (3, 4, 5), (4, 4, 4)], 15),
        ];
        let mut total = 0;
        for (tuples, want) in rows {
            let got: usize = tuples
                .iter()
                .map(|&(k, l, m)| enumerate_patterns(&KlmType::new(k, l, m).unwrap()).len())
                .sum();
            assert_eq!(got, want, "row {tuples:?}");
            total += got;
        }
        assert_eq!(total, 378);
    }

    #[test]
    fn footnote_duplicate_pattern() {
        // 6[3] = 9[2] = 8+7+1+1+1 appears under both (2,3,7) and (2,3,8).
        let has_dup = |k: u32, l: u32, m: u32, big: u32| {
            enumerate_patterns(&KlmType::new(k, l, m).unwrap())
                .iter()
                .any(|p| {
                    p.degree == 18
                        && p.partitions[Fiber::Infinity.index()]
                            == vec![8.min(big.max(8)), 7, 1, 1, 1]
                })
        };
        // (2,3,7): the ∞-partition is {8,7,1,1,1} with 7 regular.
        assert!(has_dup(2, 3, 7, 8));
        // (2,3,8): same partition with 8 regular.
        assert!(has_dup(2, 3, 8, 8));
    }

    #[test]
    fn invariants_hold_for_all_patterns() {
        for (klm, _) in enumerate_klm_candidates() {
            for p in enumerate_patterns(&klm) {
                let d = p.degree;
                let mut total_parts = 0;
                for f in Fiber::ALL {
                    let parts = &p.partitions[f.index()];
                    assert_eq!(parts.iter().sum::<u32>(), d, "{p}");
                    assert!(p.regular_count(f) >= 1, "{p}");
                    total_parts += parts.len();
                }
                assert_eq!(total_parts, d as usize + 2, "{p}");
                assert_eq!(p.fractions.len(), 4, "{p}");
                // Degree formula consistency.
                let vals: Vec<BigRational> = p.fractions.iter().map(|f| f.value()).collect();
                assert_eq!(degree_from_fractions(&p.klm, &vals), Some(d), "{p}");
            }
        }
    }

    #[test]
    fn enumeration_is_deterministic() {
        let klm = KlmType::new(2, 3, 9).unwrap();
        assert_eq!(enumerate_patterns(&klm), enumerate_patterns(&klm));
    }
}
