//! Clustering scans, exact map coincidences and the weak-separation
//! deduplication that removes words whose maps were already realised.

use std::collections::{BTreeSet, HashMap, HashSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ifs::{AxisBox, ContractionMap, IfsSystem, MoranConstruction, Point, SeedSet};
use crate::rational::{format_rational, pow, q_int, Q};
use crate::subshift::Subshift;
use crate::word::Word;

/// Canonical parameter tuple of a map: `(r, a)` or `(r, s, a, b)`.
///
/// `BigRational` is always stored in lowest terms, so key equality is
/// equality of the maps as functions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignatureKey(pub Vec<Q>);

impl SignatureKey {
    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(format_rational).collect()
    }
}

pub fn map_signature(map: &ContractionMap) -> SignatureKey {
    match map {
        ContractionMap::Homothety1D { r, a } => SignatureKey(vec![r.clone(), a.clone()]),
        ContractionMap::DiagonalAffine2D { r, s, a, b } => {
            SignatureKey(vec![r.clone(), s.clone(), a.clone(), b.clone()])
        }
    }
}

fn key_of_axes(axes: &[(Q, Q)]) -> SignatureKey {
    let (ratios, shifts): (Vec<Q>, Vec<Q>) = axes.iter().cloned().unzip();
    SignatureKey(ratios.into_iter().chain(shifts).collect())
}

fn compose_axes(outer: &[(Q, Q)], inner: &ContractionMap) -> Vec<(Q, Q)> {
    outer
        .iter()
        .zip(inner.axes())
        .map(|((r, a), (r2, a2))| (r * &r2, r * &a2 + a))
        .collect()
}

fn cell_of(axes: &[(Q, Q)], seed: &AxisBox) -> AxisBox {
    let (lo, hi) = axes
        .iter()
        .zip(seed.lo.iter().zip(&seed.hi))
        .map(|((r, a), (l, h))| (r * l + a, r * h + a))
        .unzip();
    AxisBox { lo, hi }
}

/// `#Φ(x, r)`: distinct maps among the full-shift stopping words `i ∈ Γ(r)`
/// with `φ_i(W) ∩ B(x, r) ≠ ∅`.
///
/// Descends the full shift but expands each distinct map only once; whether
/// a node stops and what lies below it depends on its map alone.
pub fn wsc_count(system: &IfsSystem, seed: &SeedSet, x: &Point, r: &Q) -> Result<usize> {
    Ok(wsc_maps(system, seed, x, r, crate::ifs::DEFAULT_NODE_BUDGET)?.len())
}

pub fn wsc_maps(
    system: &IfsSystem,
    seed: &SeedSet,
    x: &Point,
    r: &Q,
    budget: usize,
) -> Result<BTreeSet<SignatureKey>> {
    if !r.is_positive() {
        return Err(Error::InvalidRadius);
    }
    if x.dimension() != system.dimension() {
        return Err(Error::DimensionMismatch { expected: system.dimension(), found: x.dimension() });
    }
    let r2 = r * r;
    let identity: Vec<(Q, Q)> = (0..system.dimension()).map(|_| (Q::one(), Q::zero())).collect();
    let mut expanded: HashSet<SignatureKey> = HashSet::new();
    let mut found = BTreeSet::new();
    let mut stack = vec![identity];
    let mut visited = 0usize;
    while let Some(axes) = stack.pop() {
        for m in system.maps() {
            visited += 1;
            if visited > budget {
                return Err(Error::Budget { limit: budget });
            }
            let child = compose_axes(&axes, m);
            let cell = cell_of(&child, seed);
            if !cell.meets_ball(x, r) {
                continue;
            }
            let key = key_of_axes(&child);
            if cell.diameter_squared() <= r2 {
                found.insert(key);
            } else if expanded.insert(key) {
                stack.push(child);
            }
        }
    }
    Ok(found)
}

/// Per-level statistics of [`dedup`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DedupLevel {
    pub length: usize,
    /// Words of this length kept as lexicographically minimal representatives.
    pub allowed: u64,
    /// Distinct maps `φ_i` over all `i ∈ Σ_n`.
    pub distinct_maps: u64,
    /// Minimal forbidden words of this length added to `R`.
    pub forbidden_added: u64,
}

#[derive(Clone, Debug)]
pub struct DedupResult {
    pub depth: usize,
    pub subshift: Subshift,
    /// Minimal generators of `R ∩ Σ_{≤depth}`: every forbidden word contains one.
    pub forbidden: Vec<Word>,
    pub levels: Vec<DedupLevel>,
}

impl DedupResult {
    /// `#Γ_n` for `1 ≤ n ≤ depth`.
    pub fn level_counts(&self) -> Vec<u64> {
        self.levels.iter().map(|l| l.allowed).collect()
    }
}

/// Builds `Γ = Σ[R]` with `R = {k : φ_h = φ_k for some h ≺ k}` up to `depth`.
///
/// Words are visited in length-then-lexicographic order and a word is kept
/// iff its map was not realised earlier. The shortest-first order is a
/// monoid order, so `k ∈ R` implies `ikj ∈ R` and the kept words form a
/// factorial language. Only children of kept words need visiting: the
/// least word realising a map has a kept prefix.
pub fn dedup(system: &IfsSystem, depth: usize, node_budget: usize) -> Result<DedupResult> {
    if depth == 0 {
        return Err(Error::Argument("depth must be at least 1".into()));
    }
    let kappa = system.alphabet();
    let dim = system.dimension();
    let identity: Vec<(Q, Q)> = (0..dim).map(|_| (Q::one(), Q::zero())).collect();
    let mut seen: HashMap<SignatureKey, Word> = HashMap::new();
    let mut kept: Vec<(Word, Vec<(Q, Q)>)> = vec![(Word::empty(kappa), identity.clone())];
    let mut kept_prev: HashSet<Word> = HashSet::from([Word::empty(kappa)]);
    let mut level_map_axes: Vec<Vec<(Q, Q)>> = vec![identity];
    let mut forbidden = Vec::new();
    let mut levels = Vec::new();
    let mut visited = 0usize;

    for length in 1..=depth {
        let mut next = Vec::new();
        let mut next_set = HashSet::new();
        let mut added = 0u64;
        for (word, axes) in &kept {
            for s in 1..=kappa {
                visited += 1;
                if visited > node_budget {
                    return Err(Error::DedupBudget { limit: node_budget, completed: levels });
                }
                let child = compose_axes(axes, &system.maps()[s as usize - 1]);
                let key = key_of_axes(&child);
                let w = word.push(s);
                if seen.contains_key(&key) {
                    // the suffix is kept iff no shorter factor is already forbidden
                    if kept_prev.contains(&w.shift()) {
                        forbidden.push(w);
                        added += 1;
                    }
                } else {
                    assert!(key != key_of_axes(axes), "a word realises the same map as its prefix");
                    seen.insert(key, w.clone());
                    next_set.insert(w.clone());
                    next.push((w, child));
                }
            }
        }

        let mut maps_next = HashSet::new();
        let mut axes_next = Vec::new();
        for axes in &level_map_axes {
            for m in system.maps() {
                visited += 1;
                if visited > node_budget {
                    return Err(Error::DedupBudget { limit: node_budget, completed: levels });
                }
                let child = compose_axes(axes, m);
                if maps_next.insert(key_of_axes(&child)) {
                    axes_next.push(child);
                }
            }
        }
        let distinct_maps = maps_next.len() as u64;
        level_map_axes = axes_next;

        levels.push(DedupLevel {
            length,
            allowed: next.len() as u64,
            distinct_maps,
            forbidden_added: added,
        });
        kept = next;
        kept_prev = next_set;
    }

    forbidden.sort();
    let subshift = Subshift::new(kappa, forbidden.clone())?;
    Ok(DedupResult { depth, subshift, forbidden, levels })
}

/// How sample points and radii are chosen for [`fcp_scan`].
#[derive(Clone, Debug)]
pub struct GridSpec {
    /// Sample points `φ_i(mid W)` for `i ∈ Γ_m`.
    pub sample_depth: usize,
    pub extra_points: Vec<Point>,
    /// Radius ladder `r_k = ρ γ^k`, `k = 0..steps`.
    pub rho: Q,
    pub gamma: Q,
    pub steps: usize,
    /// Count distinct maps instead of words.
    pub count_maps: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClusterSample {
    pub x: Vec<String>,
    pub r: String,
    pub count: usize,
}

/// Empirical clustering evidence. `max` is a certified lower bound for
/// `sup_x sup_r #Γ(x, r)`; it proves nothing about an upper bound.
#[derive(Clone, Debug, Serialize)]
pub struct ClusterReport {
    pub mode: &'static str,
    pub sample_depth: usize,
    pub points: usize,
    pub radii: Vec<String>,
    pub samples: Vec<ClusterSample>,
    pub max: usize,
    pub witness: Option<ClusterSample>,
    /// Maximum count per ladder rung, from largest radius to smallest.
    pub max_per_radius: Vec<usize>,
    /// Whether the per-radius maximum no longer grew over the last rungs.
    pub stabilized: bool,
}

fn point_strings(p: &Point) -> Vec<String> {
    p.coords().iter().map(format_rational).collect()
}

pub fn fcp_scan(mc: &MoranConstruction, grid: &GridSpec) -> Result<ClusterReport> {
    if grid.steps == 0 {
        return Err(Error::EmptyGrid);
    }
    if !grid.rho.is_positive() || !grid.gamma.is_positive() || grid.gamma >= Q::one() {
        return Err(Error::Argument("radius ladder needs rho > 0 and 0 < gamma < 1".into()));
    }
    let anchor = mc.seed().midpoint();
    let mut points: Vec<Point> = Vec::new();
    for (word, _) in mc.level(grid.sample_depth)? {
        let p = if word.is_empty() { anchor.clone() } else { mc.system().compose(&word)?.apply(&anchor)? };
        points.push(p);
    }
    points.extend(grid.extra_points.iter().cloned());
    let mut unique = BTreeSet::new();
    points.retain(|p| unique.insert(p.clone()));
    if points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let radii: Vec<Q> = (0..grid.steps).map(|k| &grid.rho * pow(&grid.gamma, k)).collect();

    let mut samples = Vec::new();
    let mut max_per_radius = vec![0usize; radii.len()];
    let mut best: Option<ClusterSample> = None;
    for x in &points {
        for (k, r) in radii.iter().enumerate() {
            let count = if grid.count_maps {
                wsc_maps(mc.system(), mc.seed(), x, r, mc.node_budget())?.len()
            } else {
                mc.local_cluster(x, r)?.len()
            };
            max_per_radius[k] = max_per_radius[k].max(count);
            let sample = ClusterSample { x: point_strings(x), r: format_rational(r), count };
            if best.as_ref().is_none_or(|b| count > b.count) {
                best = Some(sample.clone());
            }
            samples.push(sample);
        }
    }
    let max = best.as_ref().map_or(0, |b| b.count);
    let tail = max_per_radius.len().div_ceil(3).max(2).min(max_per_radius.len());
    let head_max = max_per_radius[..max_per_radius.len() - tail + 1].iter().max().copied().unwrap_or(0);
    let stabilized = max_per_radius[max_per_radius.len() - tail..].iter().all(|&c| c <= head_max);
    Ok(ClusterReport {
        mode: if grid.count_maps { "maps" } else { "words" },
        sample_depth: grid.sample_depth,
        points: points.len(),
        radii: radii.iter().map(format_rational).collect(),
        samples,
        max,
        witness: best,
        max_per_radius,
        stabilized,
    })
}

/// `M` and `4M + 2` for a diagonal-affine system whose maps have pairwise
/// disjoint open projections `(a_i, a_i + r_i)` and `(b_i, b_i + s_i)`, with
/// `M` the least integer with `√2 < M min{r_i, s_i}`. `None` when the
/// hypothesis fails or the system is one-dimensional.
pub fn disjoint_projection_bound(system: &IfsSystem) -> Option<(u64, u64)> {
    let params: Vec<(Q, Q, Q, Q)> = system
        .maps()
        .iter()
        .map(|m| match m {
            ContractionMap::DiagonalAffine2D { r, s, a, b } => Some((r.clone(), s.clone(), a.clone(), b.clone())),
            _ => None,
        })
        .collect::<Option<_>>()?;
    let disjoint = |lo1: &Q, len1: &Q, lo2: &Q, len2: &Q| lo1 + len1 <= *lo2 || lo2 + len2 <= *lo1;
    for (p, (r1, s1, a1, b1)) in params.iter().enumerate() {
        for (r2, s2, a2, b2) in &params[p + 1..] {
            if !disjoint(a1, r1, a2, r2) || !disjoint(b1, s1, b2, s2) {
                return None;
            }
        }
    }
    let min = params.iter().flat_map(|(r, s, _, _)| [r.clone(), s.clone()]).min()?;
    let min2 = &min * &min;
    let mut m = 1u64;
    while Q::from_integer(BigInt::from(m * m)) * &min2 <= q_int(2) {
        m += 1;
    }
    Some((m, 4 * m + 2))
}

/// A point and radius at which at least `2^n` stopping words cluster, for a
/// diagonal-affine system with `s_i = s_j`, `b_i = b_j` and `r_k < s_k`.
#[derive(Clone, Debug, Serialize)]
pub struct FailureWitness {
    pub n: usize,
    pub m: usize,
    pub x: Vec<String>,
    pub radius: String,
    pub count: usize,
    pub lower_bound: u64,
}

pub fn affine_failure_witness(mc: &MoranConstruction, i: u8, j: u8, k: u8, n: usize) -> Result<FailureWitness> {
    let system = mc.system();
    let axes = |s: u8| -> Result<Vec<(Q, Q)>> {
        match system.map(s)? {
            m @ ContractionMap::DiagonalAffine2D { .. } => Ok(m.axes()),
            _ => Err(Error::InvalidSystem("failure witness needs diagonal-affine maps".into())),
        }
    };
    let (ai, aj, ak) = (axes(i)?, axes(j)?, axes(k)?);
    if i == j || ai[1] != aj[1] || ak[0].0 >= ak[1].0 {
        return Err(Error::InvalidSystem("need i ≠ j, s_i = s_j, b_i = b_j and r_k < s_k".into()));
    }
    let (r_k, s_k, s_i) = (&ak[0].0, &ak[1].0, &ai[1].0);
    let s_i_n = pow(s_i, n);
    let mut m = 1usize;
    while pow(r_k, m) >= pow(s_k, m) * &s_i_n {
        m += 1;
    }
    let radius = pow(s_k, m) * &s_i_n;
    let k_word = Word::repeat(system.alphabet(), k, m)?;
    let outer = mc.cell(&k_word)?;
    // every φ_{k^m}∘φ_i(W), i ∈ {i, j}^n, shares one horizontal band and lies
    // inside the x-range of φ_{k^m}(W), which is narrower than the radius
    let band = mc.cell(&k_word.concat(&Word::repeat(system.alphabet(), i, n)?)?)?;
    let two = q_int(2);
    let x = Point::plane((&outer.lo[0] + &outer.hi[0]) / &two, (&band.lo[1] + &band.hi[1]) / &two);
    let count = mc.local_cluster(&x, &radius)?.len();
    Ok(FailureWitness {
        n,
        m,
        x: point_strings(&x),
        radius: format_rational(&radius),
        count,
        lower_bound: 1u64 << n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn hom(r: Q, a: Q) -> ContractionMap {
        ContractionMap::homothety(r, a).unwrap()
    }

    fn overlap3() -> IfsSystem {
        IfsSystem::new(vec![hom(q(1, 2), q(0, 1)), hom(q(1, 2), q(1, 4)), hom(q(1, 2), q(1, 2))]).unwrap()
    }

    #[test]
    fn coinciding_compositions_share_a_key() {
        let sys = overlap3();
        let a = map_signature(&sys.compose(&Word::parse(3, "21").unwrap()).unwrap());
        let b = map_signature(&sys.compose(&Word::parse(3, "13").unwrap()).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.to_strings(), vec!["1/4", "1/4"]);
        assert_ne!(map_signature(&sys.maps()[0]), map_signature(&sys.maps()[1]));
    }

    #[test]
    fn dedup_level_two() {
        let result = dedup(&overlap3(), 2, 1_000_000).unwrap();
        let names: Vec<String> = result.forbidden.iter().map(|w| w.to_string()).collect();
        assert!(names.contains(&"21".to_string()));
        assert!(names.contains(&"31".to_string()));
        assert_eq!(result.level_counts(), vec![3, 7]);
        assert_eq!(result.subshift.count_words(2), 7u32.into());
    }

    #[test]
    fn dedup_of_injective_system_is_full_shift() {
        let sys = IfsSystem::new(vec![hom(q(1, 2), q(0, 1)), hom(q(1, 2), q(1, 2))]).unwrap();
        let result = dedup(&sys, 6, 1_000_000).unwrap();
        assert!(result.forbidden.is_empty());
        assert!(result.subshift.is_full_shift());
    }

    #[test]
    fn dedup_budget_carries_completed_levels() {
        match dedup(&overlap3(), 12, 200) {
            Err(Error::DedupBudget { completed, .. }) => {
                assert!(!completed.is_empty());
                assert_eq!(completed[0].allowed, 3);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn duplicated_map_collapses() {
        let sys = IfsSystem::new(vec![hom(q(1, 2), q(0, 1)), hom(q(1, 2), q(1, 2)), hom(q(1, 2), q(1, 2))]).unwrap();
        let seed = AxisBox::unit(1);
        let mc = MoranConstruction::new(sys.clone(), Subshift::full(3).unwrap(), seed.clone()).unwrap();
        let x = Point::line(q(3, 4));
        let r = q(1, 4);
        let words = mc.local_cluster(&x, &r).unwrap().len();
        let maps = wsc_count(&sys, &seed, &x, &r).unwrap();
        assert!(maps < words);
    }

    #[test]
    fn wsc_count_on_quarter_grid() {
        let sys = overlap3();
        let seed = AxisBox::unit(1);
        let count = wsc_count(&sys, &seed, &Point::line(q(1, 4)), &q(1, 16)).unwrap();
        // stopping level 4: maps x/16 + k/32, k = 0..=30; image [k/32, k/32 + 1/16]
        // meets [3/16, 5/16] iff 4 ≤ k ≤ 10
        assert_eq!(count, 7);
    }

    #[test]
    fn disjoint_projection_constant() {
        let sys = IfsSystem::new(vec![
            ContractionMap::diagonal(q(1, 3), q(1, 2), q(1, 10), q(0, 1)).unwrap(),
            ContractionMap::diagonal(q(1, 2), q(1, 3), q(1, 2), q(2, 3)).unwrap(),
        ])
        .unwrap();
        assert_eq!(disjoint_projection_bound(&sys), Some((5, 22)));
    }
}
