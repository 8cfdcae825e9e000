//! The probabilistic modular scan: for a branching pattern and a suitable
//! prime, run over (t̄, q̄) ∈ 𝔽_p², filter by the p-adic valuation
//! compatibility of the Schwarz-map series, reconstruct candidate coverings
//! by Padé approximation for each K̄^L, and verify their branching shape.

use num::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::fp::{fp64, next_prime_at_least, Fp};
use crate::algebra::series::{rational_reconstruct, PowerSeries};
use crate::algebra::Field;
use crate::error::{PResult, PipelineError};
use crate::invariants::fiber_classes;
use crate::patterns::{BranchingFraction, BranchingPattern, Fiber};
use crate::schwarz::{
    hypergeometric_from_orders, series_2f1, HypergeometricData,
};
use crate::FpMap;

/// Position on the z-line of the three pattern fibers in a scan frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZPos {
    Z0,
    Z1,
    Zinf,
}

/// A scan frame: which exceptional fractions sit at x = 0, 1, t, ∞, plus
/// the induced z-side placement (the fiber of x = 0 goes to z = 0; of the
/// remaining two pattern fibers the smaller prescribed order goes to z = 1).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanFrame {
    pub f0: BranchingFraction,
    pub f1: BranchingFraction,
    pub ft: BranchingFraction,
    pub finf: BranchingFraction,
    /// Pattern fibers at z = 0, 1, ∞ respectively.
    pub z_roles: [Fiber; 3],
}

impl ScanFrame {
    fn new(
        pattern: &BranchingPattern,
        f0: BranchingFraction,
        f1: BranchingFraction,
        finf: BranchingFraction,
        ft: BranchingFraction,
    ) -> Self {
        let others: Vec<Fiber> = Fiber::ALL
            .iter()
            .copied()
            .filter(|&f| f != f0.fiber)
            .collect();
        let (za, zb) = (others[0], others[1]);
        let (z1, zinf) = if pattern.klm.order_of(za) <= pattern.klm.order_of(zb) {
            (za, zb)
        } else {
            (zb, za)
        };
        ScanFrame { f0, f1, ft, finf, z_roles: [f0.fiber, z1, zinf] }
    }

    /// z-position of a pattern fiber in this frame.
    pub fn z_of(&self, fiber: Fiber) -> ZPos {
        if self.z_roles[0] == fiber {
            ZPos::Z0
        } else if self.z_roles[1] == fiber {
            ZPos::Z1
        } else {
            ZPos::Zinf
        }
    }

    /// Branching order of x = 0 (= order of the covering series at 0).
    pub fn m_order(&self) -> u64 {
        self.f0.numerator as u64
    }

    /// Exponent-clearing power L (the prescribed order of the z = 0 fiber).
    pub fn l_power(&self) -> u64 {
        self.f0.order as u64
    }

    /// Hypergeometric data of the frame's z-arrangement.
    pub fn hypergeometric(&self, pattern: &BranchingPattern) -> HypergeometricData {
        hypergeometric_from_orders(
            pattern.klm.order_of(self.z_roles[1]) as i64,
            pattern.klm.order_of(self.z_roles[0]) as i64,
            pattern.klm.order_of(self.z_roles[2]) as i64,
        )
    }

    /// Heun exponent parameters (a, b, c, d) as exact rationals.
    pub fn heun_exponents(&self) -> (BigRational, BigRational, BigRational, BigRational) {
        crate::schwarz::heun_exponents_from_fractions(
            &self.f0.value(),
            &self.f1.value(),
            &self.ft.value(),
            &self.finf.value(),
        )
    }

    /// Numerator/denominator/
    /// (φ−1)-numerator degrees: d minus the ∞-point's order in its fiber.
    pub fn degree_bounds(&self, pattern: &BranchingPattern) -> (usize, usize, usize) {
        let d = pattern.degree as usize;
        let a = self.finf.numerator as usize;
        match self.z_of(self.finf.fiber) {
            ZPos::Z0 => (d - a, d, d),
            ZPos::Z1 => (d, d, d - a),
            ZPos::Zinf => (d, d - a, d),
        }
    }
}

/// Frame selection policy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum FramePolicy {
    /// One deterministic frame: x = 0 gets the fraction with the largest
    /// numerator (ties: largest denominator), the rest follow rule-(b1)
    /// order. One frame already finds every covering of the pattern.
    #[default]
    Primary,
    /// All distinct assignments of the fractions to (0, 1, ∞, t).
    All,
}

/// Enumerate scan frames per policy; frames whose x = 0 fraction is an
/// integer are unusable (logarithmic local solutions) and are skipped.
pub fn scan_frames(pattern: &BranchingPattern, policy: FramePolicy) -> Vec<ScanFrame> {
    let fr = &pattern.fractions;
    let usable = |f: &BranchingFraction| f.numerator % f.order != 0;
    match policy {
        FramePolicy::Primary => {
            let mut order: Vec<usize> = (0..4).collect();
            order.sort_by_key(|&i| {
                (
                    std::cmp::Reverse(fr[i].numerator),
                    std::cmp::Reverse(fr[i].order),
                    fr[i].fiber,
                )
            });
            // First usable fraction at x = 0.
            let Some(pos0) = order.iter().position(|&i| usable(&fr[i])) else {
                return Vec::new();
            };
            let i0 = order[pos0];
            let mut rest: Vec<usize> = (0..4).filter(|&i| i != i0).collect();
            rest.sort_by_key(|&i| (fr[i].order, fr[i].numerator, fr[i].fiber));
            // x=1, x=∞ take the first two in rule-(b1) order; t the leftover.
            vec![ScanFrame::new(pattern, fr[i0], fr[rest[0]], fr[rest[1]], fr[rest[2]])]
        }
        FramePolicy::All => {
            let mut out: Vec<ScanFrame> = Vec::new();
            for i0 in 0..4 {
                if !usable(&fr[i0]) {
                    continue;
                }
                for i1 in 0..4 {
                    if i1 == i0 {
                        continue;
                    }
                    for iinf in 0..4 {
                        if iinf == i0 || iinf == i1 {
                            continue;
                        }
                        let it = (0..4).find(|&i| i != i0 && i != i1 && i != iinf).unwrap();
                        let frame =
                            ScanFrame::new(pattern, fr[i0], fr[i1], fr[iinf], fr[it]);
                        if !out.contains(&frame) {
                            out.push(frame);
                        }
                    }
                }
            }
            out
        }
    }
}

/// A mod-p covering candidate.
#[derive(Clone, Debug)]
pub struct BelyiCandidate {
    pub pattern: BranchingPattern,
    pub frame: ScanFrame,
    pub p: u64,
    pub t: u64,
    pub q: u64,
    /// K̄ (smallest L-th root of κ) and κ = K̄^L.
    pub k_root: u64,
    pub kappa: u64,
    pub l: u64,
    pub phi: FpMap,
}

/// Scan options. The series length must be at least 2d + 8.
#[derive(Clone, Debug)]
pub struct ScanOptions {
    pub series_len: Option<usize>,
    pub t_range: Option<(u64, u64)>,
    pub q_range: Option<(u64, u64)>,
    pub jobs: usize,
    pub frames: FramePolicy,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { series_len: None, t_range: None, q_range: None, jobs: 1, frames: FramePolicy::Primary }
    }
}

/// Smallest prime ≥ lower_bound with p > B·(2d+8) for every exponent
/// denominator B occurring in the pattern (the prescribed orders).
pub fn suitable_prime(pattern: &BranchingPattern, lower_bound: u64) -> u64 {
    let n = 2 * pattern.degree as u64 + 8;
    let mut need = 0u64;
    for b in [pattern.klm.k as u64, pattern.klm.l as u64, pattern.klm.m as u64] {
        need = need.max(b * n + 1);
    }
    for f in &pattern.fractions {
        need = need.max(f.order as u64 * n + 1);
    }
    next_prime_at_least(lower_bound.max(need))
}

/// The footnote valuation rule: with ord₀(φ) = m, the first non-integral
/// Heun-side coefficient must sit at index m·n where n is the first
/// non-integral hypergeometric-side index (∞ matches ∞).
pub fn valuation_filter(m: u64, n: Option<u64>, n_prime: Option<u64>) -> bool {
    match (n, n_prime) {
        (None, None) => true,
        (Some(n), Some(np)) => np == m * n,
        _ => false,
    }
}

/// First failure of a mod-p shadowed recurrence: at the first index whose
/// denominator vanishes mod p, the coefficient leaves ℤ_p unless the
/// numerator vanishes too, in which case the mod-p data cannot decide.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureIndex {
    Definite(u64),
    Indeterminate(u64),
    NoneBelow(u64),
}

/// 2F1 recurrence failure index mod p, scanned to `cap` steps.
fn hg_failure_index(data: &HypergeometricData, p: u64, cap: u64) -> FailureIndex {
    let r = |x: &BigRational| crate::algebra::rat::Rat(x.clone()).mod_p(p).unwrap_or(0);
    let (a, b, c) = (r(&data.a), r(&data.b), r(&data.c));
    let mut cur = 1u64;
    for j in 0..cap {
        let jm = j % p;
        let den = fp64::mulm(fp64::addm(c, jm, p), (jm + 1) % p, p);
        let num = fp64::mulm(
            cur,
            fp64::mulm(fp64::addm(a, jm, p), fp64::addm(b, jm, p), p),
            p,
        );
        if den == 0 {
            return if num == 0 {
                FailureIndex::Indeterminate(j + 1)
            } else {
                FailureIndex::Definite(j + 1)
            };
        }
        cur = fp64::mulm(num, fp64::invm(den, p).unwrap(), p);
    }
    FailureIndex::NoneBelow(cap)
}

/// Combined first-failure index of the ψ₀ quotient: the earlier of the two
/// local-solution failures.
fn psi0_failure_index(data: &HypergeometricData, p: u64, cap: u64) -> FailureIndex {
    let first = hg_failure_index(data, p, cap);
    let second = hg_failure_index(&data.second_solution(), p, cap);
    use FailureIndex::*;
    match (first, second) {
        (Definite(i), Definite(j)) => Definite(i.min(j)),
        (Definite(i), Indeterminate(j)) | (Indeterminate(j), Definite(i)) => {
            if i <= j {
                Definite(i)
            } else {
                Indeterminate(j)
            }
        }
        (Definite(i), NoneBelow(_)) | (NoneBelow(_), Definite(i)) => Definite(i),
        (Indeterminate(i), Indeterminate(j)) => Indeterminate(i.min(j)),
        (Indeterminate(i), NoneBelow(_)) | (NoneBelow(_), Indeterminate(i)) => Indeterminate(i),
        (NoneBelow(i), NoneBelow(j)) => NoneBelow(i.min(j)),
    }
}

/// Raw mod-p Heun recurrence state for the filter loops.
#[derive(Clone, Copy)]
struct HeunRec {
    // t(j+1)(j+c)·r_{j+1} = [(1+t)j(j−1) + cpd·j + q]·r_j − (j−1+a)(j−1+b)·r_{j−1}
    t: u64,
    q: u64,
    a: u64,
    b: u64,
    c: u64,
    cpd: u64,
    p: u64,
    prev: u64,
    cur: u64,
    j: u64,
}

impl HeunRec {
    fn new(t: u64, q: u64, a: u64, b: u64, c: u64, d: u64, p: u64) -> Self {
        // e = a + b − c − d + 1; cpd = c(1+t) + d·t + e
        let e = fp64::subm(
            fp64::addm(fp64::addm(a, b, p), 1, p),
            fp64::addm(c, d, p),
            p,
        );
        let cpd = fp64::addm(
            fp64::addm(fp64::mulm(c, fp64::addm(1, t, p), p), fp64::mulm(d, t, p), p),
            e,
            p,
        );
        HeunRec { t, q, a, b, c, cpd, p, prev: 0, cur: 1, j: 0 }
    }

    /// Advance one step; returns the failure classification at this step.
    /// `Ok(coefficient)` on success. `inv` is the table of inverses mod p.
    fn step(&mut self, inv: &[u64]) -> Result<u64, bool> {
        let p = self.p;
        let j = self.j % p;
        let lead = fp64::addm(
            fp64::addm(
                fp64::mulm(
                    fp64::mulm(fp64::addm(1, self.t, p), j, p),
                    fp64::subm(j, 1, p),
                    p,
                ),
                fp64::mulm(self.cpd, j, p),
                p,
            ),
            self.q,
            p,
        );
        let tail = fp64::mulm(
            fp64::addm(fp64::subm(j, 1, p), self.a, p),
            fp64::addm(fp64::subm(j, 1, p), self.b, p),
            p,
        );
        let num = fp64::subm(
            fp64::mulm(lead, self.cur, p),
            fp64::mulm(tail, self.prev, p),
            p,
        );
        let den = fp64::mulm(
            fp64::mulm(self.t, (j + 1) % p, p),
            fp64::addm(j, self.c, p),
            p,
        );
        if den == 0 {
            // true = definite failure, false = indeterminate (0/0)
            return Err(num != 0);
        }
        let next = fp64::mulm(num, inv[den as usize], p);
        self.prev = self.cur;
        self.cur = next;
        self.j += 1;
        Ok(next)
    }
}

/// Outcome of the Heun-side filter for one (t̄, q̄).
fn heun_filter_passes(
    params1: (u64, u64, u64, u64, u64, u64),
    params2: (u64, u64, u64, u64, u64, u64),
    p: u64,
    target: Option<u64>,
    cap: u64,
    inv: &[u64],
) -> bool {
    let mk = |pr: (u64, u64, u64, u64, u64, u64)| HeunRec::new(pr.0, pr.1, pr.2, pr.3, pr.4, pr.5, p);
    let mut h1 = mk(params1);
    let mut h2 = mk(params2);
    let stop = target.map_or(cap, |t| t.min(cap));
    for idx in 1..=stop {
        let r1 = h1.step(inv);
        let r2 = h2.step(inv);
        match (r1, r2) {
            (Ok(_), Ok(_)) => continue,
            (Err(true), Ok(_)) | (Ok(_), Err(true)) => {
                // One-sided definite failure at `idx`.
                return match target {
                    Some(t) => idx == t,
                    None => false,
                };
            }
            // Simultaneous or indeterminate failures: undecidable mod p.
            _ => return true,
        }
    }
    // No failure up to the target: for a finite target the forced failure
    // did not materialize below it; only acceptable if it could sit exactly
    // at an unscanned index (target > cap).
    match target {
        Some(t) => t > cap,
        None => true,
    }
}

/// Scan one suitable prime. Deterministic output order regardless of jobs.
pub fn scan_prime(
    pattern: &BranchingPattern,
    p: u64,
    options: &ScanOptions,
) -> PResult<Vec<BelyiCandidate>> {
    if p <= pattern.degree as u64 {
        return Err(PipelineError::Scan(format!(
            "prime {p} too small for degree {}",
            pattern.degree
        )));
    }
    let d = pattern.degree as usize;
    let n_series = options.series_len.unwrap_or(2 * d + 8).max(2 * d + 8);
    if p <= (n_series as u64) * pattern.klm.m as u64 {
        return Err(PipelineError::Scan(format!(
            "prime {p} below the series bound for this pattern"
        )));
    }
    let frames = scan_frames(pattern, options.frames);
    let mut out: Vec<BelyiCandidate> = Vec::new();
    for frame in frames {
        out.extend(scan_frame(pattern, &frame, p, n_series, options)?);
    }
    Ok(out)
}

fn scan_frame(
    pattern: &BranchingPattern,
    frame: &ScanFrame,
    p: u64,
    n_series: usize,
    options: &ScanOptions,
) -> PResult<Vec<BelyiCandidate>> {
    let sample = Fp::new(1, p).map_err(PipelineError::Algebra)?;
    let hyp = frame.hypergeometric(pattern);
    let m_ord = frame.m_order();
    let l_pow = frame.l_power();
    let (dn_num, dn_den, _) = frame.degree_bounds(pattern);

    // ψ₀ unit and the reversion coefficients of σ₀ = z·u₀^L.
    let f1s = series_2f1(&hyp, n_series, &sample).map_err(PipelineError::Algebra)?;
    let f2s = series_2f1(&hyp.second_solution(), n_series, &sample)
        .map_err(PipelineError::Algebra)?;
    let u0 = f2s.divide(&f1s).map_err(PipelineError::Algebra)?;
    let sigma0 = u0.pow(l_pow).shift_up(1);
    let rev = sigma0.reversion().map_err(PipelineError::Algebra)?;
    let rev_u64: Vec<u64> = rev.coeffs().iter().map(|c| c.value()).collect();

    // Heun exponent parameters as residues.
    let (ea, eb, ec, ed) = frame.heun_exponents();
    let to_res = |x: &BigRational| {
        crate::algebra::rat::Rat(x.clone())
            .mod_p(p)
            .map_err(PipelineError::Algebra)
    };
    let (ra, rb, rc, rd) = (to_res(&ea)?, to_res(&eb)?, to_res(&ec)?, to_res(&ed)?);
    // Second-solution parameters: q₁ depends on (t, q); a₂ = a−c+1 etc.
    let ra2 = fp64::addm(fp64::subm(ra, rc, p), 1, p);
    let rb2 = fp64::addm(fp64::subm(rb, rc, p), 1, p);
    let rc2 = fp64::subm(2 % p, rc, p);

    // Hypergeometric-side failure index (frame-level).
    let cap = 4 * p;
    let n_hg = psi0_failure_index(&hyp, p, cap);
    let target = match n_hg {
        FailureIndex::Definite(n) => Some(m_ord * n),
        FailureIndex::Indeterminate(_) | FailureIndex::NoneBelow(_) => None,
    };

    let (tlo, thi) = options.t_range.unwrap_or((2, p - 1));
    let (qlo, qhi) = options.q_range.unwrap_or((0, p - 1));
    let tvals: Vec<u64> = (tlo.max(2)..=thi.min(p - 1)).collect();

    // Inverse table mod p (index 0 unused), built in linear time.
    let inv_table: Vec<u64> = {
        let mut t = vec![0u64; p as usize];
        if p > 1 {
            t[1] = 1;
            for r in 2..p as usize {
                // inv(r) = −(p/r)·inv(p mod r)
                let q = p / r as u64;
                let rem = (p % r as u64) as usize;
                t[r] = fp64::mulm(p - q, t[rem], p);
            }
        }
        t
    };
    let inv_table = &inv_table;

    // Îº = KÌ„^L ranges over the L-th powers of ð"½_p*.
    let kappas: Vec<u64> = {
        let mut seen = vec![false; p as usize];
        let mut v = Vec::new();
        for w in 1..p {
            let k = fp64::powm(w, l_pow, p);
            if !seen[k as usize] {
                seen[k as usize] = true;
                v.push(k);
            }
        }
        v.sort_unstable();
        v
    };
    let kappas = &kappas;

    let process_t = |tbar: u64| -> PResult<Vec<BelyiCandidate>> {
        let mut found = Vec::new();
        let mut scratch = PadeScratch::new(n_series);
        for qbar in qlo..=qhi.min(p - 1) {
            // q₁ = q − (c−1)(a + b − c − d + d·t + 1)
            let inner = fp64::addm(
                fp64::addm(
                    fp64::subm(fp64::addm(ra, rb, p), fp64::addm(rc, rd, p), p),
                    fp64::mulm(rd, tbar, p),
                    p,
                ),
                1,
                p,
            );
            let q1 = fp64::subm(qbar, fp64::mulm(fp64::subm(rc, 1, p), inner, p), p);
            if !heun_filter_passes(
                (tbar, qbar, ra, rb, rc, rd),
                (tbar, q1, ra2, rb2, rc2, rd),
                p,
                target,
                cap,
                inv_table,
            ) {
                continue;
            }
            found.extend(process_survivor(
                pattern, frame, p, n_series, tbar, qbar,
                (ra, rb, rc, rd),
                (ra2, rb2, rc2, rd, q1),
                &rev_u64,
                m_ord,
                l_pow,
                dn_num,
                dn_den,
                inv_table,
                kappas,
                &sigma0,
                &mut scratch,
            )?);
        }
        Ok(found)
    };

    let mut results: Vec<BelyiCandidate> = if options.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.jobs)
            .build()
            .map_err(|e| PipelineError::Scan(e.to_string()))?;
        let chunks: Vec<PResult<Vec<BelyiCandidate>>> =
            pool.install(|| tvals.par_iter().map(|&t| process_t(t)).collect());
        let mut all = Vec::new();
        for c in chunks {
            all.extend(c?);
        }
        all
    } else {
        let mut all = Vec::new();
        for &t in &tvals {
            all.extend(process_t(t)?);
        }
        all
    };
    results.sort_by_key(|c| (c.t, c.q, c.k_root));
    results.dedup_by(|a, b| a.t == b.t && a.q == b.q && a.kappa == b.kappa && a.phi == b.phi);
    Ok(results)
}

#[allow(clippy::too_many_arguments)]
fn process_survivor(
    pattern: &BranchingPattern,
    frame: &ScanFrame,
    p: u64,
    n_series: usize,
    tbar: u64,
    qbar: u64,
    params1: (u64, u64, u64, u64),
    params2: (u64, u64, u64, u64, u64),
    rev_u64: &[u64],
    m_ord: u64,
    l_pow: u64,
    dn_num: usize,
    dn_den: usize,
    inv_table: &[u64],
    kappas: &[u64],
    sigma0: &PowerSeries<Fp>,
    scratch: &mut PadeScratch,
) -> PResult<Vec<BelyiCandidate>> {
    let n = n_series;
    // Heun series H₁, H₂ to n terms (no failures below n at suitable primes).
    let run = |t: u64, q: u64, a: u64, b: u64, c: u64, d: u64| -> Option<Vec<u64>> {
        let mut rec = HeunRec::new(t, q, a, b, c, d, p);
        let mut v = Vec::with_capacity(n);
        v.push(1u64);
        for _ in 1..n {
            match rec.step(inv_table) {
                Ok(x) => v.push(x),
                Err(_) => return None,
            }
        }
        Some(v)
    };
    let (ra, rb, rc, rd) = params1;
    let (ra2, rb2, rc2, rd2, q1) = params2;
    let Some(h1) = run(tbar, qbar, ra, rb, rc, rd) else { return Ok(Vec::new()) };
    let Some(h2) = run(tbar, q1, ra2, rb2, rc2, rd2) else { return Ok(Vec::new()) };
    // u₁ = H₂/H₁ and c(x) = x^M · u₁^L, all in raw u64 arrays.
    let u1 = series_div_u64(&h2, &h1, p);
    let u1l = series_pow_u64(&u1, l_pow, p);
    // powers of c(x): c^j has order j·M; store shifted arrays of length n.
    let jmax = ((n - 1) as u64 / m_ord) as usize;
    if jmax == 0 {
        return Ok(Vec::new());
    }
    let mut cpow: Vec<Vec<u64>> = Vec::with_capacity(jmax);
    // c¹ = x^M·u1l  (shift by M)
    let mut c1 = vec![0u64; n];
    for i in 0..n.saturating_sub(m_ord as usize) {
        c1[i + m_ord as usize] = u1l[i];
    }
    cpow.push(c1);
    for j in 1..jmax {
        let next = series_mul_u64(&cpow[j - 1], &cpow[0], p);
        cpow.push(next);
    }
    let mut out = Vec::new();
    let mut g = vec![0u64; n];
    for &kappa in kappas {
        // φ_κ = Σ_j rev_j · κ^j · c^j
        for x in g.iter_mut() {
            *x = 0;
        }
        let mut kj = 1u64;
        for (j, cp) in cpow.iter().enumerate() {
            kj = fp64::mulm(kj, kappa, p);
            let r = rev_u64.get(j + 1).copied().unwrap_or(0);
            let coef = fp64::mulm(r, kj, p);
            if coef == 0 {
                continue;
            }
            for i in ((j + 1) * m_ord as usize).min(n)..n {
                g[i] = fp64::addm(g[i], fp64::mulm(coef, cp[i], p), p);
            }
        }
        if !scratch.pade_feasible(&g, dn_num, dn_den, p, inv_table) {
            continue;
        }
        // Confirm with the exact generic machinery and verify the structure.
        let series = PowerSeries::from_coeffs(
            g.iter().map(|&v| Fp::raw(v, p)).collect::<Vec<_>>(),
        );
        let Some(phi) = rational_reconstruct(&series, dn_num, dn_den) else {
            continue;
        };
        if !candidate_structure_ok(pattern, frame, p, tbar, &phi) {
            continue;
        }
        // Exact cleared-exponent identity re-check: σ₀(φ) = κ·x^M·u₁^L.
        let ok = (|| -> PResult<bool> {
            let phis = phi
                .series_at_zero(n)
                .map_err(PipelineError::Algebra)?;
            let lhs = sigma0.compose(&phis).map_err(PipelineError::Algebra)?;
            let mut rhs_c = vec![Fp::raw(0, p); n];
            for i in 0..n.saturating_sub(m_ord as usize) {
                rhs_c[i + m_ord as usize] = Fp::raw(fp64::mulm(u1l[i], kappa, p), p);
            }
            Ok(lhs == PowerSeries::from_coeffs(rhs_c))
        })()?;
        if !ok {
            continue;
        }
        // K̄ must exist in 𝔽_p: enumerate L-th roots of κ.
        let roots = Fp::raw(kappa, p).nth_roots(l_pow);
        let Some(kroot) = roots.first() else { continue };
        out.push(BelyiCandidate {
            pattern: pattern.clone(),
            frame: frame.clone(),
            p,
            t: tbar,
            q: qbar,
            k_root: kroot.value(),
            kappa,
            l: l_pow,
            phi,
        });
    }
    Ok(out)
}

/// Pattern check as a plain predicate: the three fiber partitions of φ
/// (numerator, φ−1 numerator, denominator, with ∞ from degree deficits)
/// must equal the pattern's three partitions as a multiset of partitions;
/// the regular parts are squarefree and the fibers coprime by construction
/// of the squarefree decomposition on a reduced fraction.
pub fn verify_belyi_mod_p(phi: &FpMap, pattern: &BranchingPattern) -> bool {
    if phi.map_degree() != pattern.degree as usize {
        return false;
    }
    let Ok(data) = fiber_classes(phi) else { return false };
    let mut got: Vec<Vec<u32>> = Fiber::ALL.iter().map(|&f| data.partition(f)).collect();
    let mut want: Vec<Vec<u32>> = Fiber::ALL
        .iter()
        .map(|&f| pattern.partitions[f.index()].clone())
        .collect();
    got.sort();
    want.sort();
    got == want
}

/// Structural verification of a reconstructed candidate: per-fiber
/// partitions in the frame arrangement, and the exceptional points exactly
/// at {0, 1, t̄, ∞} with the prescribed orders.
fn candidate_structure_ok(
    pattern: &BranchingPattern,
    frame: &ScanFrame,
    p: u64,
    tbar: u64,
    phi: &FpMap,
) -> bool {
    if phi.map_degree() != pattern.degree as usize {
        return false;
    }
    let Ok(data) = fiber_classes(phi) else { return false };
    // Expected partition at each z-position.
    let zpos_of = |f: Fiber| frame.z_of(f);
    let expect = |z: ZPos| -> Vec<u32> {
        let fiber = match z {
            ZPos::Z0 => frame.z_roles[0],
            ZPos::Z1 => frame.z_roles[1],
            ZPos::Zinf => frame.z_roles[2],
        };
        pattern.partitions[fiber.index()].clone()
    };
    // Map fibers: One ↔ z=1, Zero ↔ z=0, Infinity ↔ z=∞.
    let pairs = [
        (Fiber::Zero, ZPos::Z0),
        (Fiber::One, ZPos::Z1),
        (Fiber::Infinity, ZPos::Zinf),
    ];
    for (map_fiber, z) in pairs {
        if data.partition(map_fiber) != expect(z) {
            return false;
        }
    }
    // Exceptional points at their pinned positions with the right orders.
    let zero = Fp::raw(0, p);
    let points = [
        (Some(zero), frame.f0),
        (Some(Fp::raw(1, p)), frame.f1),
        (Some(Fp::raw(tbar, p)), frame.ft),
        (None, frame.finf),
    ];
    for (pos, frac) in points {
        let z = zpos_of(frac.fiber);
        let map_fiber = match z {
            ZPos::Z0 => Fiber::Zero,
            ZPos::Z1 => Fiber::One,
            ZPos::Zinf => Fiber::Infinity,
        };
        let classes = data.classes_in(map_fiber);
        let ok = match pos {
            Some(pt) => classes.iter().any(|c| {
                c.order == frac.numerator && !c.factor.is_constant() && c.factor.eval(&pt).is_zero()
            }),
            None => classes
                .iter()
                .any(|c| c.order == frac.numerator && c.includes_infinity),
        };
        if !ok {
            return false;
        }
    }
    true
}

// ---- raw u64 series helpers (mod p) ----

fn series_mul_u64(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().min(b.len());
    let mut out = vec![0u64; n];
    for i in 0..n {
        if a[i] == 0 {
            continue;
        }
        for j in 0..n - i {
            if b[j] != 0 {
                out[i + j] = fp64::addm(out[i + j], fp64::mulm(a[i], b[j], p), p);
            }
        }
    }
    out
}

fn series_pow_u64(a: &[u64], mut e: u64, p: u64) -> Vec<u64> {
    let mut acc = vec![0u64; a.len()];
    acc[0] = 1;
    let mut base = a.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = series_mul_u64(&acc, &base, p);
        }
        e >>= 1;
        if e > 0 {
            base = series_mul_u64(&base, &base, p);
        }
    }
    acc
}

fn series_div_u64(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    // b must be a unit (b[0] ≠ 0).
    let n = a.len().min(b.len());
    let mut out = vec![0u64; n];
    let inv0 = fp64::invm(b[0], p).expect("unit series");
    for i in 0..n {
        let mut acc = a[i];
        for j in 1..=i {
            if b[j] != 0 && out[i - j] != 0 {
                acc = fp64::subm(acc, fp64::mulm(b[j], out[i - j], p), p);
            }
        }
        out[i] = fp64::mulm(acc, inv0, p);
    }
    out
}

/// Scratch for the fast rationality prefilter: Berlekampâ€“Massey computes
/// the minimal linear-recurrence length of the tail window; a type-(dn, dd)
/// rational series must admit length â‰¤ dd there. Exact reconstruction and
/// all structural checks re-run generically on the survivors.
struct PadeScratch {
    c: Vec<u64>,
    b: Vec<u64>,
    tv: Vec<u64>,
}

impl PadeScratch {
    fn new(n: usize) -> Self {
        PadeScratch { c: vec![0; n + 1], b: vec![0; n + 1], tv: vec![0; n + 1] }
    }

    /// Minimal LFSR length of `w` mod p (Berlekampâ€“Massey).
    fn lfsr_len(&mut self, w: &[u64], p: u64, inv: &[u64]) -> usize {
        let n = w.len();
        let c = &mut self.c;
        let b = &mut self.b;
        for x in c.iter_mut() {
            *x = 0;
        }
        for x in b.iter_mut() {
            *x = 0;
        }
        c[0] = 1;
        b[0] = 1;
        let mut l = 0usize;
        let mut m = 1usize;
        let mut bd = 1u64; // last nonzero discrepancy
        for i in 0..n {
            // discrepancy d = w[i] + ÎŁ_{j=1..l} c[j]Â·w[iâˆ'j]
            let mut d = w[i];
            for j in 1..=l {
                if c[j] != 0 && w[i - j] != 0 {
                    d = fp64::addm(d, fp64::mulm(c[j], w[i - j], p), p);
                }
            }
            if d == 0 {
                m += 1;
                continue;
            }
            let coef = fp64::mulm(d, inv[bd as usize], p);
            if 2 * l <= i {
                // save c before updating
                self.tv[..=l].copy_from_slice(&c[..=l]);
                for j in 0..n + 1 - m {
                    if b[j] != 0 {
                        c[j + m] = fp64::subm(c[j + m], fp64::mulm(coef, b[j], p), p);
                    }
                }
                let newl = i + 1 - l;
                b[..=l].copy_from_slice(&self.tv[..=l]);
                for x in b[l + 1..].iter_mut() {
                    *x = 0;
                }
                l = newl;
                bd = d;
                m = 1;
            } else {
                for j in 0..n + 1 - m {
                    if b[j] != 0 {
                        c[j + m] = fp64::subm(c[j + m], fp64::mulm(coef, b[j], p), p);
                    }
                }
                m += 1;
            }
        }
        l
    }

    /// Necessary test for g to be a type-(dn, dd) rational function: the
    /// coefficients from index dn+1âˆ'dd on satisfy a recurrence of order dd.
    fn pade_feasible(&mut self, g: &[u64], dn: usize, dd: usize, p: u64, inv: &[u64]) -> bool {
        let n = g.len();
        if dn + 1 >= n {
            return true;
        }
        let s = (dn + 1).saturating_sub(dd);
        self.lfsr_len(&g[s..], p, inv) <= dd
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::{pattern_of, KlmType};

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

    #[test]
    fn suitable_primes_match() {
        let klm = KlmType::new(2, 3, 7).unwrap();
        let f = |n, o, fib| BranchingFraction::new(n, o, fib).unwrap();
        let p237 = pattern_of(
            &klm,
            &[
                f(1, 7, Fiber::Infinity),
                f(1, 7, Fiber::Infinity),
                f(1, 7, Fiber::Infinity),
                f(1, 7, Fiber::Infinity),
            ],
        )
        .unwrap();
        assert_eq!(suitable_prime(&p237, 2), 907);
        assert_eq!(suitable_prime(&b7_pattern(), 2), 293);
        // A lower bound past the series bound: the next prime at or above it.
        assert_eq!(suitable_prime(&b7_pattern(), 907), 907);
    }

    #[test]
    fn valuation_filter_rule() {
        assert!(valuation_filter(2, Some(5), Some(10)));
        assert!(!valuation_filter(2, Some(5), Some(7)));
        assert!(valuation_filter(3, None, None));
        assert!(!valuation_filter(3, Some(4), None));
    }

    #[test]
    fn primary_frame_is_published_b7_arrangement() {
        let pat = b7_pattern();
        let frames = scan_frames(&pat, FramePolicy::Primary);
        assert_eq!(frames.len(), 1);
        let f = &frames[0];
        assert_eq!((f.f0.numerator, f.f0.order), (2, 9));
        assert_eq!((f.f1.numerator, f.f1.order), (1, 3));
        assert_eq!((f.finf.numerator, f.finf.order), (2, 3));
        assert_eq!((f.ft.numerator, f.ft.order), (1, 9));
        // z-roles: m-fiber at z=0, k at z=1, ℓ at z=∞.
        assert_eq!(f.z_roles, [Fiber::Infinity, Fiber::One, Fiber::Zero]);
        // Degree bounds: numerator full, denominator d − 2.
        assert_eq!(f.degree_bounds(&pat), (12, 10, 12));
        assert_eq!(f.m_order(), 2);
        assert_eq!(f.l_power(), 9);
    }

    #[test]
    fn all_frames_enumerated_for_b7() {
        let pat = b7_pattern();
        let frames = scan_frames(&pat, FramePolicy::All);
        // 4 distinct fractions in 4 ordered slots: 24 arrangements.
        assert_eq!(frames.len(), 24);
    }
}

#[cfg(test)]
mod scan_tests {
    use super::*;
    use crate::algebra::poly::Polynomial;
    use crate::algebra::rat::Rat;
    use crate::algebra::ratfun::RationalMap;
    use crate::patterns::{pattern_of, KlmType};

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

    fn b7_published_mod_p(p: u64) -> FpMap {
        let one = Fp::raw(1, p);
        let r = |n: i64, d: i64| Rat::from_pair(n, d).mod_p(p).map(|v| Fp::raw(v, p)).unwrap();
        let num = Polynomial::monomial(r(64, 1), 2)
            .mul(&Polynomial::linear_root(&r(3, 1)).pow(9))
            .mul(&Polynomial::linear_root(&r(9, 1)));
        let cubic = Polynomial::from_coeffs(vec![r(27, 1), r(-27, 1), r(-72, 1), r(8, 1)]);
        let den = Polynomial::linear_root(&one)
            .mul(&cubic.pow(3))
            .scale(&r(27, 1));
        RationalMap::new(num, den).unwrap()
    }

    #[test]
    fn scan_finds_published_b7_reduction() {
        let pat = b7_pattern();
        let p = 307;
        let found = scan_prime(&pat, p, &ScanOptions::default()).unwrap();
        // This fraction tuple has two Galois orbits (one over ℚ, one over a
        // cubic field that may split at p); the ℚ-orbit reduction must be
        // found at t̄ = 9 and every candidate must verify.
        assert!(!found.is_empty());
        for c in &found {
            assert!(verify_belyi_mod_p(&c.phi, &pat));
        }
        let c = found
            .iter()
            .find(|c| c.t == 9)
            .expect("the published reduction at t = 9");
        assert_eq!(c.q, Rat::from_pair(7, 9).mod_p(p).unwrap());
        assert_eq!(c.kappa, Rat::from_pair(-64, 3).mod_p(p).unwrap());
        assert_eq!(fp64::powm(c.k_root, c.l, p), c.kappa);
        assert_eq!(c.phi, b7_published_mod_p(p));
        assert!(verify_belyi_mod_p(&c.phi, &pat));
    }

    #[test]
    fn restricted_t_range_excludes_solution() {
        let pat = b7_pattern();
        let opts = ScanOptions {
            t_range: Some((10, 40)),
            ..ScanOptions::default()
        };
        let found = scan_prime(&pat, 307, &opts).unwrap();
        assert!(found.is_empty());
    }

    #[test]
    fn scan_is_deterministic_across_jobs() {
        let pat = b7_pattern();
        let a = scan_prime(&pat, 293, &ScanOptions::default()).unwrap();
        let b = scan_prime(
            &pat,
            293,
            &ScanOptions { jobs: 4, ..ScanOptions::default() },
        )
        .unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((x.t, x.q, x.kappa, x.phi.clone()), (y.t, y.q, y.kappa, y.phi.clone()));
        }
    }
}
