//! Topological pressure `P(t) = lim (1/n) log Σ_{i ∈ Γ_n} diam(E_i)^t` and
//! its zero.
//!
//! Word sets and diameters are exact; logarithms and the sums over `Γ_n` are
//! `f64` with compensated summation in a fixed (lexicographic) order, so
//! results are reproducible bit for bit.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::One;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ifs::MoranConstruction;
use crate::rational::{floor, ln_rational, Q};
use crate::separation::ClusterReport;
use crate::subshift::Subshift;

const BISECTION_LIMIT: usize = 400;
const POWER_ITERATION_LIMIT: usize = 2_000_000;

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn scale(&mut self, factor: f64) {
        self.sum *= factor;
        self.carry *= factor;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Streaming `log Σ exp(x_k)`.
#[derive(Clone, Copy, Debug)]
struct LogSumExp {
    max: f64,
    acc: Compensated,
    count: u64,
}

impl LogSumExp {
    fn new() -> Self {
        LogSumExp { max: f64::NEG_INFINITY, acc: Compensated::default(), count: 0 }
    }

    fn push(&mut self, x: f64) {
        self.count += 1;
        if x > self.max {
            if self.max.is_finite() {
                self.acc.scale((self.max - x).exp());
            }
            self.max = x;
        }
        self.acc.add((x - self.max).exp());
    }

    fn value(&self) -> f64 {
        self.max + self.acc.value().ln()
    }
}

/// `(1/n) log Σ_{i ∈ Γ_n} diam(E_i)^t` over the exactly enumerated `Γ_n`.
pub fn pressure_at(mc: &MoranConstruction, t: f64, n: usize) -> Result<f64> {
    Ok(level_sums(mc, &[t], n)?[0])
}

/// [`pressure_at`] for several exponents with a single pass over `Γ_n`.
pub fn level_sums(mc: &MoranConstruction, ts: &[f64], n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Argument("level must be at least 1".into()));
    }
    if ts.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::Argument("exponent must be finite and non-negative".into()));
    }
    let seed_logs: Vec<f64> = mc.seed().widths().iter().map(ln_rational).collect();
    let map_logs: Vec<Vec<f64>> = mc
        .system()
        .maps()
        .iter()
        .map(|m| m.axes().iter().map(|(r, _)| ln_rational(r)).collect())
        .collect();
    let subshift = mc.subshift();
    let budget = mc.node_budget();
    let mut sums: Vec<LogSumExp> = ts.iter().map(|_| LogSumExp::new()).collect();
    // depth-first in lexicographic order: (state, depth, per-axis log widths)
    let mut stack = vec![(subshift.initial_state(), 0usize, seed_logs)];
    let mut visited = 0usize;
    while let Some((state, depth, logs)) = stack.pop() {
        visited += 1;
        if visited > budget {
            return Err(Error::Budget { limit: budget });
        }
        if depth == n {
            let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let rest: f64 = logs.iter().map(|l| (2.0 * (l - max)).exp()).sum();
            let ln_diam = max + 0.5 * rest.ln();
            for (acc, t) in sums.iter_mut().zip(ts) {
                acc.push(t * ln_diam);
            }
            continue;
        }
        for s in (1..=subshift.alphabet()).rev() {
            if let Some(next) = subshift.step(state, s) {
                let child: Vec<f64> = logs.iter().zip(&map_logs[s as usize - 1]).map(|(a, b)| a + b).collect();
                stack.push((next, depth + 1, child));
            }
        }
    }
    if sums[0].count == 0 {
        return Err(Error::EmptySubshift);
    }
    Ok(sums.iter().map(|s| s.value() / n as f64).collect())
}

/// Strongly connected components of the follower automaton that carry a
/// cycle, as sorted state lists.
pub fn cyclic_components(subshift: &Subshift) -> Vec<Vec<usize>> {
    let mut graph = DiGraph::<(), ()>::new();
    let nodes: Vec<_> = (0..subshift.num_states()).map(|_| graph.add_node(())).collect();
    for (p, _, q) in subshift.edges() {
        graph.add_edge(nodes[p], nodes[q], ());
    }
    let mut comps: Vec<Vec<usize>> = tarjan_scc(&graph)
        .into_iter()
        .map(|c| {
            let mut states: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
            states.sort_unstable();
            states
        })
        .filter(|c| {
            let set: BTreeSet<usize> = c.iter().copied().collect();
            subshift.edges().any(|(p, _, q)| set.contains(&p) && set.contains(&q))
        })
        .collect();
    comps.sort();
    comps
}

/// Perron root of a non-negative irreducible matrix, with Collatz–Wielandt
/// bounds. Iterates on `A + cI` (`c` = least row sum) to remove periodicity.
pub fn perron_root(matrix: &[Vec<f64>], rel_tol: f64) -> Result<(f64, f64)> {
    let n = matrix.len();
    let row_sums: Vec<f64> = matrix.iter().map(|r| r.iter().sum()).collect();
    let c = row_sums.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(c > 0.0) {
        return Err(Error::NonConvergence("matrix has a zero row".into()));
    }
    let mut v = vec![1.0; n];
    for _ in 0..POWER_ITERATION_LIMIT {
        let w: Vec<f64> = (0..n)
            .map(|i| matrix[i].iter().zip(&v).map(|(a, x)| a * x).sum::<f64>() + c * v[i])
            .collect();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let q = w[i] / v[i];
            lo = lo.min(q);
            hi = hi.max(q);
        }
        let norm = w.iter().cloned().fold(0.0, f64::max);
        v = w.iter().map(|x| x / norm).collect();
        if hi - lo <= rel_tol * (hi - c) || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok((lo - c, hi - c));
        }
    }
    Err(Error::NonConvergence("power iteration did not reach the tolerance".into()))
}

/// Spectral pressure `log ρ(M_t)` for a similarity system on a subshift, with
/// `M_t[p][q] = Σ_{s : p → q} r_s^t` over the follower automaton. Reducible
/// automata take the maximum over cyclic components.
pub fn pressure_spectral(subshift: &Subshift, ratios: &[Q], t: f64) -> Result<f64> {
    if ratios.len() != subshift.alphabet() as usize {
        return Err(Error::Argument(format!(
            "{} ratios for an alphabet of {}",
            ratios.len(),
            subshift.alphabet()
        )));
    }
    let logs: Vec<f64> = ratios.iter().map(ln_rational).collect();
    let comps = cyclic_components(subshift);
    if comps.is_empty() {
        return Err(Error::EmptySubshift);
    }
    let mut best = f64::NEG_INFINITY;
    for comp in comps {
        let index = |s: usize| comp.binary_search(&s).ok();
        let mut m = vec![vec![0.0; comp.len()]; comp.len()];
        // rescale by the heaviest weight so entries stay representable for large t
        let mut shift = f64::NEG_INFINITY;
        for (p, s, q) in subshift.edges() {
            if index(p).is_some() && index(q).is_some() {
                shift = shift.max(t * logs[s as usize - 1]);
            }
        }
        for (p, s, q) in subshift.edges() {
            if let (Some(i), Some(j)) = (index(p), index(q)) {
                m[i][j] += (t * logs[s as usize - 1] - shift).exp();
            }
        }
        let (lo, hi) = perron_root(&m, 1e-14)?;
        best = best.max(shift + (0.5 * (lo + hi)).ln());
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PressureMethod {
    Spectral,
    FiniteLevel,
}

impl PressureMethod {
    pub fn name(self) -> &'static str {
        match self {
            PressureMethod::Spectral => "spectral",
            PressureMethod::FiniteLevel => "finite-level",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PressureRoot {
    pub t_star: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub method: PressureMethod,
    /// Level of the finite sums used, if any.
    pub n_used: Option<usize>,
    pub pressure_at_root: f64,
    /// Change of the root between the last two levels (finite-level only).
    pub level_change: Option<f64>,
    pub stabilized: bool,
    pub note: Option<String>,
}

/// Bisection for the zero of a decreasing function with `f(0) > 0`.
/// Returns `(lo, hi, f(mid))` with `hi − lo < tol` and `|f(mid)| < tol`.
pub fn bisect_decreasing(mut f: impl FnMut(f64) -> Result<f64>, tol: f64) -> Result<(f64, f64, f64)> {
    if !(tol > 0.0) {
        return Err(Error::Argument("tolerance must be positive".into()));
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut steps = 0;
    while f(hi)? >= 0.0 {
        lo = hi;
        hi *= 2.0;
        steps += 1;
        if steps > 64 {
            return Err(Error::NonConvergence("pressure stays non-negative".into()));
        }
    }
    for _ in 0..BISECTION_LIMIT {
        let mid = 0.5 * (lo + hi);
        let value = f(mid)?;
        if hi - lo < tol && value.abs() < tol {
            return Ok((lo, hi, value));
        }
        if mid <= lo || mid >= hi {
            // the bracket cannot shrink further in f64
            return if value.abs() < tol {
                Ok((lo, hi, value))
            } else {
                Err(Error::NonConvergence(format!("|P| = {value:e} at the f64 resolution of the root")))
            };
        }
        if value > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NonConvergence("bisection budget exhausted".into()))
}

/// Zero of the spectral pressure of a similarity system on a subshift.
pub fn pressure_zero_spectral(subshift: &Subshift, ratios: &[Q], tol: f64) -> Result<PressureRoot> {
    let p0 = pressure_spectral(subshift, ratios, 0.0)?;
    if p0 <= 0.0 {
        return Ok(zero_root(PressureMethod::Spectral, None, p0));
    }
    let (lo, hi, value) = bisect_decreasing(|t| pressure_spectral(subshift, ratios, t), tol)?;
    Ok(PressureRoot {
        t_star: 0.5 * (lo + hi),
        bracket_lo: lo,
        bracket_hi: hi,
        method: PressureMethod::Spectral,
        n_used: None,
        pressure_at_root: value,
        level_change: None,
        stabilized: true,
        note: None,
    })
}

fn zero_root(method: PressureMethod, n: Option<usize>, p0: f64) -> PressureRoot {
    PressureRoot {
        t_star: 0.0,
        bracket_lo: 0.0,
        bracket_hi: 0.0,
        method,
        n_used: n,
        pressure_at_root: p0,
        level_change: None,
        stabilized: true,
        note: Some("P(0) <= 0: subexponential word growth, zero returned".into()),
    }
}

/// Zero of the level-`n` pressure `P_n`.
pub fn pressure_zero_at_level(mc: &MoranConstruction, n: usize, tol: f64) -> Result<PressureRoot> {
    let p0 = pressure_at(mc, 0.0, n)?;
    if p0 <= 0.0 {
        return Ok(zero_root(PressureMethod::FiniteLevel, Some(n), p0));
    }
    let (lo, hi, value) = bisect_decreasing(|t| pressure_at(mc, t, n), tol)?;
    Ok(PressureRoot {
        t_star: 0.5 * (lo + hi),
        bracket_lo: lo,
        bracket_hi: hi,
        method: PressureMethod::FiniteLevel,
        n_used: Some(n),
        pressure_at_root: value,
        level_change: None,
        stabilized: false,
        note: None,
    })
}

/// The zero `t*` of `P`: spectral for similarity systems, otherwise
/// finite-level sums at `n = 4, 8, 16, …` until consecutive roots agree to
/// `tol` or the node budget stops the escalation.
pub fn pressure_zero(mc: &MoranConstruction, tol: f64) -> Result<PressureRoot> {
    if let Some(ratios) = mc.system().similarity_ratios() {
        return pressure_zero_spectral(mc.subshift(), &ratios, tol);
    }
    let mut n = 4;
    let mut previous = pressure_zero_at_level(mc, n, tol)?;
    loop {
        let next = match pressure_zero_at_level(mc, 2 * n, tol) {
            Ok(root) => root,
            Err(Error::Budget { .. }) => {
                previous.note = Some(format!(
                    "node budget reached before level {}; root not stabilised to {tol:e}",
                    2 * n
                ));
                return Ok(previous);
            }
            Err(e) => return Err(e),
        };
        let change = (next.t_star - previous.t_star).abs();
        n *= 2;
        previous = PressureRoot { level_change: Some(change), ..next };
        if change < tol {
            previous.stabilized = true;
            return Ok(previous);
        }
    }
}

/// Least-squares slope of `log N(δ)` against `log(1/δ)` for grid cells of
/// side `δ_k = ᾱ^k`, `k = depth − 3, …, depth`, counting cells that overlap a
/// level-`depth` piece in positive measure.
pub fn box_count_slope(mc: &MoranConstruction, depth: usize) -> Result<BoxCount> {
    if depth < 4 {
        return Err(Error::Argument("box counting needs depth >= 4".into()));
    }
    let pieces = mc.level(depth)?;
    let alpha = mc.system().alpha_bar();
    let mut scales = Vec::new();
    let mut counts = Vec::new();
    for k in depth - 3..=depth {
        let delta = crate::rational::pow(&alpha, k);
        let mut cells: BTreeSet<Vec<BigInt>> = BTreeSet::new();
        for (_, cell) in &pieces {
            let ranges: Vec<(BigInt, BigInt)> = cell
                .lo
                .iter()
                .zip(&cell.hi)
                .map(|(l, h)| {
                    let first = floor(&(l / &delta));
                    let last = crate::rational::ceil(&(h / &delta)) - BigInt::one();
                    (first, last.max(floor(&(l / &delta))))
                })
                .collect();
            let mut index: Vec<BigInt> = ranges.iter().map(|(a, _)| a.clone()).collect();
            'outer: loop {
                cells.insert(index.clone());
                for axis in (0..index.len()).rev() {
                    if index[axis] < ranges[axis].1 {
                        index[axis] += 1;
                        for later in axis + 1..index.len() {
                            index[later] = ranges[later].0.clone();
                        }
                        continue 'outer;
                    }
                }
                break;
            }
            if cells.len() > mc.node_budget() {
                return Err(Error::Budget { limit: mc.node_budget() });
            }
        }
        scales.push(-ln_rational(&delta));
        counts.push(cells.len() as u64);
    }
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let m = scales.len() as f64;
    let mx = scales.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = scales.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = scales.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(BoxCount { depth, log_inverse_scales: scales, counts, slope: sxy / sxx })
}

#[derive(Clone, Debug, Serialize)]
pub struct BoxCount {
    pub depth: usize,
    pub log_inverse_scales: Vec<f64>,
    pub counts: Vec<u64>,
    pub slope: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionReport {
    pub root: PressureRoot,
    pub box_count: Option<BoxCount>,
    /// Largest cluster count seen by the attached scan.
    pub cluster_max: Option<usize>,
    pub cluster_stabilized: Option<bool>,
    pub claim: String,
}

/// `t*` with the conditional reading `dim_H(E) = dim_A(E) = t*`, which holds
/// under the uniform finite clustering property. The attached scan is
/// empirical evidence for that hypothesis, not a proof.
pub fn dimension_report(
    mc: &MoranConstruction,
    evidence: Option<&ClusterReport>,
    tol: f64,
    box_depth: Option<usize>,
) -> Result<DimensionReport> {
    let root = pressure_zero(mc, tol)?;
    let box_count = box_depth.map(|d| box_count_slope(mc, d)).transpose()?;
    let claim = format!(
        "if the uniform finite clustering property holds, dim_H(E) = dim_A(E) = {:.12}{}",
        root.t_star,
        match evidence {
            Some(r) if r.stabilized => format!(" (scan evidence: max cluster {} and stable)", r.max),
            Some(r) => format!(" (scan evidence: max cluster {}, still growing)", r.max),
            None => " (no clustering evidence attached)".to_string(),
        }
    );
    Ok(DimensionReport {
        root,
        box_count,
        cluster_max: evidence.map(|r| r.max),
        cluster_stabilized: evidence.map(|r| r.stabilized),
        claim,
    })
}
