//! Markov measures on subshifts: cylinder masses, conditional measures, the
//! CP magnification step, entropy and local dimensions.
//!
//! Probabilities are exact rationals. Logarithms are `f64`; long sums use
//! compensated summation.

use num_traits::{One, Signed, ToPrimitive, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ifs::{MoranConstruction, Point};
use crate::pressure::Compensated;
use crate::rational::{format_rational, ln_rational, to_f64, Q};
use crate::subshift::Subshift;
use crate::word::Word;

/// A Markov measure `μ([i]) = p_{i_1} P_{i_1 i_2} ⋯ P_{i_{n−1} i_n}`
/// supported on a subshift.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkovMeasure {
    subshift: Subshift,
    initial: Vec<Q>,
    transition: Vec<Vec<Q>>,
}

fn check_distribution(row: &[Q], what: &str) -> Result<()> {
    if row.iter().any(Signed::is_negative) {
        return Err(Error::InvalidMeasure(format!("{what} has a negative entry")));
    }
    if row.iter().sum::<Q>() != Q::one() {
        return Err(Error::InvalidMeasure(format!("{what} does not sum to 1")));
    }
    Ok(())
}

impl MarkovMeasure {
    /// Validates that rows are probability vectors and that every word of
    /// positive mass is allowed: a forbidden word must pass through a zero
    /// transition, and a forbidden symbol must have zero initial and
    /// incoming mass.
    pub fn new(subshift: Subshift, initial: Vec<Q>, transition: Vec<Vec<Q>>) -> Result<Self> {
        let k = subshift.alphabet() as usize;
        if initial.len() != k || transition.len() != k || transition.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidMeasure(format!("expected {k} symbols")));
        }
        check_distribution(&initial, "initial vector")?;
        for (a, row) in transition.iter().enumerate() {
            check_distribution(row, &format!("transition row {}", a + 1))?;
        }
        for f in subshift.forbidden() {
            let s = f.symbols();
            let supported = if s.len() == 1 {
                let a = s[0] as usize - 1;
                !initial[a].is_zero() || transition.iter().any(|row| !row[a].is_zero())
            } else {
                s.windows(2).all(|w| !transition[w[0] as usize - 1][w[1] as usize - 1].is_zero())
            };
            if supported {
                return Err(Error::InvalidMeasure(format!("forbidden word {f} has positive mass")));
            }
        }
        Ok(MarkovMeasure { subshift, initial, transition })
    }

    /// The product measure with marginal `probs` on the full shift.
    pub fn bernoulli(probs: Vec<Q>) -> Result<Self> {
        let alphabet = u8::try_from(probs.len()).map_err(|_| Error::InvalidMeasure("alphabet too large".into()))?;
        let subshift = Subshift::full(alphabet)?;
        let transition = vec![probs.clone(); probs.len()];
        MarkovMeasure::new(subshift, probs, transition)
    }

    /// Uniform over the allowed successors of each symbol, started uniformly
    /// over the allowed first symbols. Needs forbidden words of length ≤ 2.
    pub fn uniform_out(subshift: Subshift) -> Result<Self> {
        if subshift.max_forbidden_len() > 2 {
            return Err(Error::InvalidMeasure("uniform_out needs forbidden words of length at most 2".into()));
        }
        let k = subshift.alphabet();
        let uniform = |allowed: Vec<bool>| -> Result<Vec<Q>> {
            let count = allowed.iter().filter(|&&b| b).count();
            if count == 0 {
                return Err(Error::InvalidMeasure("a symbol has no allowed successor".into()));
            }
            let p = Q::new(1.into(), (count as i64).into());
            Ok(allowed.into_iter().map(|b| if b { p.clone() } else { Q::zero() }).collect())
        };
        let word = |s: &[u8]| Word::new(k, s.to_vec()).expect("symbols in range");
        let initial = uniform((1..=k).map(|a| subshift.is_allowed(&word(&[a]))).collect())?;
        let mut transition = Vec::new();
        for a in 1..=k {
            if initial[a as usize - 1].is_zero() {
                transition.push(initial.clone());
            } else {
                transition.push(uniform((1..=k).map(|b| subshift.is_allowed(&word(&[a, b]))).collect())?);
            }
        }
        MarkovMeasure::new(subshift, initial, transition)
    }

    /// Same transitions, started from the stationary vector.
    pub fn stationary_start(&self) -> Result<Self> {
        MarkovMeasure::new(self.subshift.clone(), self.stationary()?, self.transition.clone())
    }

    pub fn subshift(&self) -> &Subshift {
        &self.subshift
    }

    pub fn alphabet(&self) -> u8 {
        self.subshift.alphabet()
    }

    pub fn initial(&self) -> &[Q] {
        &self.initial
    }

    pub fn transition(&self) -> &[Vec<Q>] {
        &self.transition
    }

    /// `μ([i])`; 1 for the empty word.
    pub fn cylinder_mass(&self, word: &Word) -> Q {
        let s = word.symbols();
        let Some(&first) = s.first() else { return Q::one() };
        let mut mass = self.initial[first as usize - 1].clone();
        for w in s.windows(2) {
            if mass.is_zero() {
                break;
            }
            mass *= &self.transition[w[0] as usize - 1][w[1] as usize - 1];
        }
        mass
    }

    /// `μ_i`, with `μ_i([j]) = μ([ij]) / μ([i])`.
    pub fn conditional(&self, word: &Word) -> Result<MarkovMeasure> {
        if self.cylinder_mass(word).is_zero() {
            return Err(Error::ZeroMass(word.to_string()));
        }
        let Some(last) = word.last() else { return Ok(self.clone()) };
        Ok(MarkovMeasure {
            subshift: self.subshift.clone(),
            initial: self.transition[last as usize - 1].clone(),
            transition: self.transition.clone(),
        })
    }

    /// Stationary row vector of the transition matrix, exact.
    pub fn stationary(&self) -> Result<Vec<Q>> {
        let active = self.check_irreducible()?;
        let k = self.transition.len();
        // π (P − I) = 0 on the active symbols, with Σ π = 1 replacing one equation
        let n = active.len();
        let mut m: Vec<Vec<Q>> = (0..n)
            .map(|row| {
                let mut eq: Vec<Q> = (0..n)
                    .map(|col| {
                        let p = self.transition[active[col]][active[row]].clone();
                        if row == col { p - Q::one() } else { p }
                    })
                    .collect();
                eq.push(Q::zero());
                eq
            })
            .collect();
        m[n - 1] = vec![Q::one(); n + 1];
        let solution = solve(m).ok_or(Error::NotIrreducible)?;
        let mut pi = vec![Q::zero(); k];
        for (idx, &a) in active.iter().enumerate() {
            pi[a] = solution[idx].clone();
        }
        Ok(pi)
    }

    /// Symbols reachable from the initial support; errors unless the
    /// transition graph on them is strongly connected.
    fn check_irreducible(&self) -> Result<Vec<usize>> {
        let k = self.transition.len();
        let mut graph = DiGraph::<usize, ()>::new();
        let nodes: Vec<_> = (0..k).map(|a| graph.add_node(a)).collect();
        for a in 0..k {
            for b in 0..k {
                if !self.transition[a][b].is_zero() {
                    graph.add_edge(nodes[a], nodes[b], ());
                }
            }
        }
        let mut reach = vec![false; k];
        let mut stack: Vec<usize> = (0..k).filter(|&a| !self.initial[a].is_zero()).collect();
        while let Some(a) = stack.pop() {
            if !reach[a] {
                reach[a] = true;
                stack.extend((0..k).filter(|&b| !self.transition[a][b].is_zero()));
            }
        }
        let active: Vec<usize> = (0..k).filter(|&a| reach[a]).collect();
        let sccs = tarjan_scc(&graph);
        let whole = sccs.iter().any(|c| active.iter().all(|a| c.contains(&nodes[*a])));
        if active.is_empty() || !whole {
            return Err(Error::NotIrreducible);
        }
        Ok(active)
    }

    fn log_tables(&self) -> (Vec<f64>, Vec<Vec<f64>>) {
        let ln = |p: &Q| if p.is_zero() { f64::NEG_INFINITY } else { ln_rational(p) };
        (
            self.initial.iter().map(ln).collect(),
            self.transition.iter().map(|row| row.iter().map(ln).collect()).collect(),
        )
    }

    /// Draws a path of length `n`; deterministic in `rng`.
    pub fn sample_path(&self, n: usize, rng: &mut impl Rng) -> Word {
        let cdf = |row: &[Q]| -> Vec<f64> {
            let mut acc = 0.0;
            row.iter().map(|p| { acc += to_f64(p); acc }).collect()
        };
        let initial = cdf(&self.initial);
        let rows: Vec<Vec<f64>> = self.transition.iter().map(|r| cdf(r)).collect();
        let draw = |cdf: &[f64], probs: &[Q], rng: &mut dyn rand::RngCore| -> u8 {
            let u: f64 = rng.gen::<f64>() * cdf[cdf.len() - 1];
            let idx = cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1);
            // never land on a zero-probability symbol through rounding
            let idx = (idx..probs.len()).chain((0..idx).rev()).find(|&j| !probs[j].is_zero()).expect("row has mass");
            idx as u8 + 1
        };
        let mut symbols = Vec::with_capacity(n);
        if n > 0 {
            symbols.push(draw(&initial, &self.initial, rng));
        }
        while symbols.len() < n {
            let a = *symbols.last().expect("non-empty") as usize - 1;
            symbols.push(draw(&rows[a], &self.transition[a], rng));
        }
        Word::new(self.alphabet(), symbols).expect("symbols in range")
    }

    /// `log μ([i|_k])` for `k = 0, …, |i|`.
    pub fn ln_mass_prefixes(&self, word: &Word) -> Vec<f64> {
        let (li, lt) = self.log_tables();
        let mut acc = Compensated::default();
        let mut out = Vec::with_capacity(word.len() + 1);
        out.push(0.0);
        let s = word.symbols();
        for (k, &sym) in s.iter().enumerate() {
            let term = if k == 0 { li[sym as usize - 1] } else { lt[s[k - 1] as usize - 1][sym as usize - 1] };
            if term == f64::NEG_INFINITY {
                out.resize(word.len() + 1, f64::NEG_INFINITY);
                return out;
            }
            acc.add(term);
            out.push(acc.value());
        }
        out
    }
}

/// Gauss–Jordan elimination on an augmented rational matrix.
fn solve(mut m: Vec<Vec<Q>>) -> Option<Vec<Q>> {
    let n = m.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let p = m[col][col].clone();
        for x in m[col].iter_mut() {
            *x /= &p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                let pivot_row = m[col].clone();
                for (x, y) in m[r].iter_mut().zip(pivot_row) {
                    *x -= &f * y;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

/// The pair `(μ, i)` after consuming a prefix of `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CpState {
    pub measure: MarkovMeasure,
    pub consumed: Word,
}

impl CpState {
    pub fn new(measure: MarkovMeasure) -> Self {
        let consumed = Word::empty(measure.alphabet());
        CpState { measure, consumed }
    }

    /// `M(μ, i) = (μ_{i_1}, σ(i))`, with `s = i_1`.
    pub fn step(&self, s: u8) -> Result<CpState> {
        let sym = Word::new(self.measure.alphabet(), vec![s])?;
        Ok(CpState { measure: self.measure.conditional(&sym)?, consumed: self.consumed.push(s) })
    }

    /// `I(μ, i)` for a word starting with `s`.
    pub fn information(&self, s: u8) -> f64 {
        information(&self.measure, &Word::new(self.measure.alphabet(), vec![s]).expect("symbol in range"))
    }
}

/// `I(μ, i) = −log μ([i_1])`, and 0 off the support.
pub fn information(measure: &MarkovMeasure, word: &Word) -> f64 {
    match word.first() {
        Some(s) => {
            let p = &measure.initial[s as usize - 1];
            if p.is_zero() { 0.0 } else { -ln_rational(p) }
        }
        None => 0.0,
    }
}

/// First-symbol masses `μ_{i|k}([i_{k+1}])` along the CP orbit, `k < n`.
/// Their product is `μ([i|_n])` exactly.
pub fn cp_orbit_masses(measure: &MarkovMeasure, word: &Word, n: usize) -> Result<Vec<Q>> {
    let mut state = CpState::new(measure.clone());
    let mut out = Vec::with_capacity(n);
    for &s in &word.symbols()[..n.min(word.len())] {
        out.push(state.measure.initial[s as usize - 1].clone());
        state = state.step(s)?;
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyReport {
    pub exact: Option<f64>,
    pub empirical: Option<EmpiricalEntropy>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EmpiricalEntropy {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub mean: f64,
    pub standard_error: f64,
}

/// `h(μ) = −Σ_a π_a Σ_b P_ab log P_ab`.
pub fn entropy_exact(measure: &MarkovMeasure) -> Result<f64> {
    let pi = measure.stationary()?;
    let mut acc = Compensated::default();
    for (a, row) in measure.transition.iter().enumerate() {
        if pi[a].is_zero() {
            continue;
        }
        let wa = to_f64(&pi[a]);
        for p in row.iter().filter(|p| !p.is_zero()) {
            acc.add(-wa * to_f64(p) * ln_rational(p));
        }
    }
    Ok(acc.value())
}

/// The generator for sample `index` under `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Mean of `−(1/n) log μ([i|_n])` over sampled paths.
pub fn entropy_empirical(measure: &MarkovMeasure, n: usize, samples: usize, seed: u64) -> Result<EmpiricalEntropy> {
    if n == 0 || samples < 2 {
        return Err(Error::Argument("need n ≥ 1 and at least 2 samples".into()));
    }
    let values: Vec<f64> = (0..samples)
        .map(|k| {
            let path = measure.sample_path(n, &mut sample_rng(seed, k as u64));
            -measure.ln_mass_prefixes(&path)[n] / n as f64
        })
        .collect();
    let (mean, sd) = mean_sd(&values);
    Ok(EmpiricalEntropy { n, samples, seed, mean, standard_error: sd / (samples as f64).sqrt() })
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mut acc = Compensated::default();
    values.iter().for_each(|&v| acc.add(v));
    let mean = acc.value() / n;
    let mut sq = Compensated::default();
    values.iter().for_each(|&v| sq.add((v - mean) * (v - mean)));
    (mean, (sq.value() / (n - 1.0).max(1.0)).sqrt())
}

/// One sampled path's quotient `log μ([i|_k]) / log diam(E_{i|_k})`.
#[derive(Clone, Debug, Serialize)]
pub struct LocalDimSample {
    pub index: usize,
    /// Quotient at `k = n`.
    pub quotient: f64,
    /// Minimum over the tail window `k ∈ [n/2, n]`.
    pub tail_min: f64,
    /// Least-squares slope of the quotient against `k` over the tail window.
    pub tail_slope: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalDimStats {
    pub n: usize,
    pub seed: u64,
    pub samples: Vec<LocalDimSample>,
    pub mean: f64,
    pub standard_error: f64,
    pub min: f64,
    pub max: f64,
}

/// Quotient ladder `k ↦ log μ([i|_k]) / log diam(E_{i|_k})` for one path;
/// `None` where the diameter is not below 1.
pub fn symbolic_ladder(measure: &MarkovMeasure, mc: &MoranConstruction, path: &Word) -> Result<Vec<Option<f64>>> {
    let masses = measure.ln_mass_prefixes(path);
    let diams = mc.ln_diameter_prefixes(path)?;
    Ok(masses.iter().zip(&diams).map(|(m, d)| (*d < 0.0).then(|| m / d)).collect())
}

/// Symbolic local-dimension quotients at depth `n` along `samples` paths
/// drawn from `μ`.
pub fn local_dim_symbolic(
    measure: &MarkovMeasure,
    mc: &MoranConstruction,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<LocalDimStats> {
    if n == 0 || samples == 0 {
        return Err(Error::Argument("need n ≥ 1 and at least one sample".into()));
    }
    if measure.subshift() != mc.subshift() {
        return Err(Error::InvalidMeasure("measure and construction use different subshifts".into()));
    }
    let mut out = Vec::with_capacity(samples);
    for index in 0..samples {
        let path = measure.sample_path(n, &mut sample_rng(seed, index as u64));
        let ladder = symbolic_ladder(measure, mc, &path)?;
        let quotient = ladder[n].ok_or_else(|| Error::NonConvergence("diameter not below 1 at depth n".into()))?;
        let tail: Vec<(f64, f64)> = (n / 2..=n).filter_map(|k| ladder[k].map(|q| (k as f64, q))).collect();
        let tail_min = tail.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
        out.push(LocalDimSample { index, quotient, tail_min, tail_slope: slope(&tail) });
    }
    let values: Vec<f64> = out.iter().map(|s| s.quotient).collect();
    let (mean, sd) = mean_sd(&values);
    Ok(LocalDimStats {
        n,
        seed,
        mean,
        standard_error: sd / (samples as f64).sqrt(),
        min: values.iter().cloned().fold(f64::INFINITY, f64::min),
        max: values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        samples: out,
    })
}

fn slope(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[derive(Clone, Debug, Serialize)]
pub struct BallMass {
    pub radius: String,
    /// Aggregated mass of the covering cylinders, exact.
    pub mass: String,
    pub words: usize,
    pub quotient: f64,
}

/// `log μπ(B(x, r)) / log r` along a ladder of radii. Ball masses are the
/// exact total mass of the words of `Γ(ρ)` meeting the ball, which bounds
/// `μπ(B(x, r))` from above and converges to it as `ρ → 0`.
pub fn local_dim_geometric(
    measure: &MarkovMeasure,
    mc: &MoranConstruction,
    x: &Point,
    radii: &[Q],
    rho: &Q,
) -> Result<Vec<BallMass>> {
    if measure.subshift() != mc.subshift() {
        return Err(Error::InvalidMeasure("measure and construction use different subshifts".into()));
    }
    let mut out = Vec::with_capacity(radii.len());
    for r in radii {
        if r < rho {
            return Err(Error::BelowResolution { radius: format_rational(r), floor: format_rational(rho) });
        }
        if r >= &Q::one() {
            return Err(Error::Argument("radii must lie below 1".into()));
        }
        let words = mc.covering_words(x, r, rho)?;
        let mass: Q = words.iter().map(|w| measure.cylinder_mass(w)).sum();
        let quotient = if mass.is_zero() { f64::INFINITY } else { ln_rational(&mass) / ln_rational(r) };
        out.push(BallMass { radius: format_rational(r), mass: format_rational(&mass), words: words.len(), quotient });
    }
    Ok(out)
}

/// A point of the limit set: the lower corner of `E_{i|_len}` for a path
/// drawn from `μ`.
pub fn sample_point(measure: &MarkovMeasure, mc: &MoranConstruction, len: usize, rng: &mut impl Rng) -> Result<Point> {
    let path = measure.sample_path(len, rng);
    let cell = mc.cell(&path)?;
    Ok(Point(cell.lo))
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyIdentity {
    pub n: usize,
    pub count: String,
    pub lhs: f64,
    pub rhs: f64,
}

/// Uniform measure on the depth-`n` words of a follower class with the
/// largest count `N_n`; returns its normalised information integral and
/// `(1/n) log N_n`.
pub fn nn_entropy_identity(subshift: &Subshift, n: usize) -> Result<EntropyIdentity> {
    if n == 0 {
        return Err(Error::Argument("n must be at least 1".into()));
    }
    let counts = subshift.counts_per_state(n);
    let (state, count) = counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .expect("at least one state");
    let words = subshift.allowed_words_from(state, n);
    let mass = Q::new(1.into(), count.clone().into());
    let term = to_f64(&mass) * ln_rational(&mass);
    let mut acc = Compensated::default();
    for _ in &words {
        acc.add(-term);
    }
    let rhs = count.to_f64().map_or(f64::INFINITY, f64::ln) / n as f64;
    Ok(EntropyIdentity { n, count: count.to_string(), lhs: acc.value() / n as f64, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn w(k: u8, s: &str) -> Word {
        Word::parse(k, s).unwrap()
    }

    fn golden() -> MarkovMeasure {
        MarkovMeasure::uniform_out(Subshift::from_strs(2, &["22"]).unwrap()).unwrap()
    }

    #[test]
    fn cylinder_masses() {
        let fair = MarkovMeasure::bernoulli(vec![q(1, 2), q(1, 2)]).unwrap();
        assert_eq!(fair.cylinder_mass(&w(2, "12")), q(1, 4));
        assert_eq!(golden().cylinder_mass(&w(2, "22")), q(0, 1));
        let biased = MarkovMeasure::bernoulli(vec![q(1, 4), q(3, 4)]).unwrap();
        assert_eq!(biased.cylinder_mass(&w(2, "221")), q(9, 64));
    }

    #[test]
    fn validation() {
        let sub = Subshift::from_strs(2, &["22"]).unwrap();
        let bad = MarkovMeasure::new(sub.clone(), vec![q(1, 2), q(1, 2)], vec![vec![q(1, 2), q(1, 2)]; 2]);
        assert!(matches!(bad, Err(Error::InvalidMeasure(_))));
        let off = MarkovMeasure::new(sub, vec![q(1, 2), q(1, 3)], vec![vec![q(1, 2), q(1, 2)], vec![q(1, 1), q(0, 1)]]);
        assert!(matches!(off, Err(Error::InvalidMeasure(_))));
    }

    #[test]
    fn conditionals() {
        let biased = MarkovMeasure::bernoulli(vec![q(1, 4), q(3, 4)]).unwrap();
        assert_eq!(biased.conditional(&w(2, "121")).unwrap(), biased);
        let g = golden();
        assert_eq!(g.conditional(&w(2, "12")).unwrap().initial(), &[q(1, 1), q(0, 1)]);
        assert!(matches!(g.conditional(&w(2, "22")), Err(Error::ZeroMass(_))));
        let ij = g.conditional(&w(2, "1")).unwrap().conditional(&w(2, "21")).unwrap();
        assert_eq!(ij, g.conditional(&w(2, "121")).unwrap());
    }

    #[test]
    fn cp_steps() {
        let g = golden();
        let after = CpState::new(g.clone()).step(2).unwrap();
        assert_eq!(after.measure.cylinder_mass(&w(2, "2")), q(0, 1));
        assert_eq!(after.consumed, w(2, "2"));
        let biased = MarkovMeasure::bernoulli(vec![q(1, 4), q(3, 4)]).unwrap();
        assert_eq!(CpState::new(biased.clone()).step(1).unwrap().measure, biased);
    }

    #[test]
    fn information_values() {
        let fair = MarkovMeasure::bernoulli(vec![q(1, 2), q(1, 2)]).unwrap();
        assert!((information(&fair, &w(2, "21")) - 2f64.ln()).abs() < 1e-15);
        let biased = MarkovMeasure::bernoulli(vec![q(1, 4), q(3, 4)]).unwrap();
        assert!((information(&biased, &w(2, "2")) - (4.0f64 / 3.0).ln()).abs() < 1e-15);
        let g = golden().conditional(&w(2, "2")).unwrap();
        assert_eq!(information(&g, &w(2, "21")), 0.0);
    }

    #[test]
    fn entropies() {
        let fair = MarkovMeasure::bernoulli(vec![q(1, 2), q(1, 2)]).unwrap();
        assert!((entropy_exact(&fair).unwrap() - 2f64.ln()).abs() < 1e-15);
        let biased = MarkovMeasure::bernoulli(vec![q(1, 4), q(3, 4)]).unwrap();
        let h = 0.25 * 4f64.ln() + 0.75 * (4.0f64 / 3.0).ln();
        assert!((entropy_exact(&biased).unwrap() - h).abs() < 1e-15);
        // stationary (2/3, 1/3): h = (2/3) log 2
        let g = golden();
        assert_eq!(g.stationary().unwrap(), vec![q(2, 3), q(1, 3)]);
        let exact = entropy_exact(&g).unwrap();
        assert!((exact - 2.0 / 3.0 * 2f64.ln()).abs() < 1e-15);
        let emp = entropy_empirical(&g.stationary_start().unwrap(), 1000, 200, 7).unwrap();
        assert!((emp.mean - exact).abs() < 3.0 * emp.standard_error + 1e-3, "{emp:?}");
    }

    #[test]
    fn reducible_chain_is_rejected() {
        let sub = Subshift::full(2).unwrap();
        let m = MarkovMeasure::new(sub, vec![q(1, 2), q(1, 2)], vec![vec![q(1, 2), q(1, 2)], vec![q(0, 1), q(1, 1)]]).unwrap();
        assert!(matches!(entropy_exact(&m), Err(Error::NotIrreducible)));
    }

    #[test]
    fn identity_examples() {
        let full = nn_entropy_identity(&Subshift::full(2).unwrap(), 5).unwrap();
        assert!((full.lhs - 2f64.ln()).abs() < 1e-12 && (full.rhs - 2f64.ln()).abs() < 1e-12);
        let g = nn_entropy_identity(&Subshift::from_strs(2, &["22"]).unwrap(), 6).unwrap();
        assert_eq!(g.count, "21");
        assert!((g.lhs - g.rhs).abs() < 1e-12);
        let stair = nn_entropy_identity(&Subshift::from_strs(2, &["21"]).unwrap(), 9).unwrap();
        assert_eq!(stair.count, "10");
        assert!((stair.rhs - 10f64.ln() / 9.0).abs() < 1e-15);
    }
}
