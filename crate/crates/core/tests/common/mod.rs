//! Property checks shared by the property suite and the acceptance run.
//! Each returns `Err` with a description of the first counterexample.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use moran_core::measures::{cp_orbit_masses, information, CpState, MarkovMeasure};
use moran_core::microsets::microset_family;
use moran_core::rational::{ln_rational, q, Q};
use moran_core::separation::{dedup, map_signature, SignatureKey};
use moran_core::tree::CompactTree;
use moran_core::{ContractionMap, Error, IfsSystem, MoranConstruction, Subshift, Word};
use num_traits::Zero;
use rand::Rng;

pub fn random_word(rng: &mut impl Rng, alphabet: u8, len: usize) -> Word {
    Word::new(alphabet, (0..len).map(|_| rng.gen_range(1..=alphabet)).collect()).unwrap()
}

/// `κ ≤ 3`, at most four forbidden words of length at most 3, non-empty.
pub fn random_subshift(rng: &mut impl Rng) -> Subshift {
    loop {
        let k = rng.gen_range(2..=3u8);
        let forbidden: Vec<Word> = (0..rng.gen_range(0..=4))
            .map(|_| {
                let len = rng.gen_range(1..=3);
                random_word(rng, k, len)
            })
            .collect();
        match Subshift::new(k, forbidden) {
            Ok(s) => return s,
            Err(Error::EmptySubshift) => continue,
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}

/// Markov measure with small integer weights; zero transitions become the
/// forbidden two-letter words.
pub fn random_markov(rng: &mut impl Rng) -> MarkovMeasure {
    let k = rng.gen_range(2..=3u8);
    let mut rows = Vec::new();
    let mut forbidden = Vec::new();
    for a in 1..=k {
        let mut weights: Vec<i64> = (0..k).map(|_| rng.gen_range(0..4)).collect();
        if weights.iter().all(|&w| w == 0) {
            weights[rng.gen_range(0..k as usize)] = 1;
        }
        let total: i64 = weights.iter().sum();
        for (b, &w) in weights.iter().enumerate() {
            if w == 0 {
                forbidden.push(Word::new(k, vec![a, b as u8 + 1]).unwrap());
            }
        }
        rows.push(weights.iter().map(|&w| q(w, total)).collect::<Vec<Q>>());
    }
    let init_w: Vec<i64> = (0..k).map(|_| rng.gen_range(1..4)).collect();
    let total: i64 = init_w.iter().sum();
    let initial = init_w.iter().map(|&w| q(w, total)).collect();
    MarkovMeasure::new(Subshift::new(k, forbidden).unwrap(), initial, rows).unwrap()
}

pub fn tree_of(subshift: &Subshift, depth: usize) -> CompactTree {
    CompactTree::from_subshift(subshift, depth)
}

/// `β_j(β_i(A)) = β_{ij}(A)`.
pub fn check_beta_composition(tree: &CompactTree, i: &Word, j: &Word) -> Result<(), String> {
    let ij = i.concat(j).map_err(|e| e.to_string())?;
    if ij.len() > tree.depth() {
        return Ok(());
    }
    let lhs = tree.subtree(i).and_then(|t| t.subtree(j)).map_err(|e| e.to_string())?;
    let rhs = tree.subtree(&ij).map_err(|e| e.to_string())?;
    if lhs != rhs {
        return Err(format!("β_{j}(β_{i}(A)) ≠ β_{ij}(A)"));
    }
    Ok(())
}

/// `Γ(r)` is an antichain, covers every allowed branch, and each word
/// satisfies `diam(E_i) ≤ r < diam(E_{i^-})` (the root excepted).
pub fn check_stopping_set(mc: &MoranConstruction, r: &Q) -> Result<(), String> {
    let gamma = mc.stopping_set(r).map_err(|e| e.to_string())?;
    let set: BTreeSet<Word> = gamma.iter().cloned().collect();
    for w in &gamma {
        if (1..w.len()).any(|k| set.contains(&w.prefix(k))) {
            return Err(format!("{w} has a proper prefix in Γ({r})"));
        }
        let d = mc.diameter(w).unwrap();
        if !d.le(r) {
            return Err(format!("diam(E_{w}) > {r}"));
        }
        if w.len() > 1 && mc.diameter(&w.prefix(w.len() - 1)).unwrap().le(r) {
            return Err(format!("parent of {w} already has diameter ≤ {r}"));
        }
    }
    let depth = gamma.iter().map(Word::len).max().unwrap_or(0);
    for w in mc.subshift().allowed_words(depth) {
        let hits = (1..=depth).filter(|&k| set.contains(&w.prefix(k))).count();
        if hits != 1 {
            return Err(format!("branch {w} meets Γ({r}) {hits} times"));
        }
    }
    Ok(())
}

/// `μ([ij]) = μ([i]) · μ_i([j])`, exactly.
pub fn check_cocycle(mu: &MarkovMeasure, i: &Word, j: &Word) -> Result<(), String> {
    let mi = mu.cylinder_mass(i);
    if mi.is_zero() {
        return Ok(());
    }
    let cond = mu.conditional(i).map_err(|e| e.to_string())?;
    let ij = i.concat(j).unwrap();
    if mu.cylinder_mass(&ij) != &mi * cond.cylinder_mass(j) {
        return Err(format!("cocycle fails for i = {i}, j = {j}"));
    }
    Ok(())
}

/// `Σ_{k<n} I(M^k(μ, i)) = −log μ([i|_n])`: the first-symbol masses along
/// the CP orbit multiply to `μ([i|_n])` exactly, and the information sum
/// agrees in floating point.
pub fn check_cp_telescoping(mu: &MarkovMeasure, path: &Word) -> Result<(), String> {
    let n = path.len();
    let mass = mu.cylinder_mass(path);
    if mass.is_zero() {
        return Ok(());
    }
    let factors = cp_orbit_masses(mu, path, n).map_err(|e| e.to_string())?;
    let product: Q = factors.iter().fold(q(1, 1), |acc, f| acc * f);
    if product != mass {
        return Err(format!("orbit masses of {path} do not multiply to μ([i])"));
    }
    let mut state = CpState::new(mu.clone());
    let mut sum = 0.0;
    for &s in path.symbols() {
        sum += state.information(s);
        state = state.step(s).map_err(|e| e.to_string())?;
    }
    let target = -ln_rational(&mass);
    if (sum - target).abs() > 1e-12 * target.abs().max(1.0) {
        return Err(format!("information sum {sum} vs −log μ = {target}"));
    }
    if state.consumed != *path {
        return Err("consumed word differs from the path".into());
    }
    let direct = mu.conditional(path).map_err(|e| e.to_string())?;
    if state.measure != direct {
        return Err(format!("M^{n}(μ, i) does not carry μ_(i|{n})"));
    }
    let _ = information(mu, path);
    Ok(())
}

/// Brute force over `Σ_{≤depth}` in length-then-lexicographic order: a word
/// is kept iff its map was not realised by an earlier word.
pub fn brute_force_kept(system: &IfsSystem, depth: usize) -> (Vec<BTreeSet<Word>>, Vec<usize>) {
    let k = system.alphabet();
    let mut seen: BTreeSet<SignatureKey> = BTreeSet::new();
    let mut kept = Vec::new();
    let mut distinct = Vec::new();
    let mut level = vec![Word::empty(k)];
    for _ in 1..=depth {
        level = level.iter().flat_map(|w| (1..=k).map(move |s| w.push(s))).collect();
        level.sort();
        let mut here = BTreeSet::new();
        let mut keys = BTreeSet::new();
        for w in &level {
            let key = map_signature(&system.compose(w).unwrap());
            keys.insert(key.clone());
            if seen.insert(key) {
                here.insert(w.clone());
            }
        }
        distinct.push(keys.len());
        kept.push(here);
    }
    (kept, distinct)
}

/// The deduplicated subshift realises every map of `Σ_n` exactly once for
/// `n ≤ depth`, and its per-level counts match the brute force.
pub fn check_dedup_closure(system: &IfsSystem, depth: usize) -> Result<(), String> {
    let result = dedup(system, depth, 1_000_000).map_err(|e| e.to_string())?;
    let (kept, distinct) = brute_force_kept(system, depth);
    for n in 1..=depth {
        let level = &result.levels[n - 1];
        if level.allowed as usize != kept[n - 1].len() || level.distinct_maps as usize != distinct[n - 1] {
            return Err(format!("level {n}: dedup counts {level:?}, brute force {} kept / {} maps", kept[n - 1].len(), distinct[n - 1]));
        }
        let allowed: BTreeSet<Word> = result.subshift.allowed_words(n).into_iter().collect();
        if allowed != kept[n - 1] {
            return Err(format!("level {n}: allowed words differ from the kept words"));
        }
        let keys: BTreeMap<SignatureKey, usize> = allowed.iter().fold(BTreeMap::new(), |mut m, w| {
            *m.entry(map_signature(&system.compose(w).unwrap())).or_insert(0) += 1;
            m
        });
        if keys.len() != distinct[n - 1] || keys.values().any(|&c| c != 1) {
            return Err(format!("level {n}: allowed words do not realise each map exactly once"));
        }
        for w in &allowed {
            if result.forbidden.iter().any(|f| w.contains_factor(f)) {
                return Err(format!("allowed word {w} contains a forbidden generator"));
            }
        }
    }
    Ok(())
}

/// Every window `β_u(T)` of a depth-`n` microset prefix set `T` is a
/// depth-`(n − |u|)` microset prefix set.
pub fn check_micro_closure(subshift: &Subshift, n: usize) -> Result<(), String> {
    let family = microset_family(subshift, n).map_err(|e| e.to_string())?;
    let mut smaller = BTreeMap::new();
    for member in &family.members {
        for u in member.tree.nodes().iter().filter(|u| !u.is_empty() && u.len() < n) {
            let k = n - u.len();
            let fam = smaller.entry(k).or_insert_with(|| microset_family(subshift, k).unwrap());
            let window = member.tree.subtree(u).unwrap();
            if !fam.contains(&window) {
                return Err(format!("window at {u} of a depth-{n} member is not a depth-{k} member"));
            }
        }
    }
    Ok(())
}

/// Homotheties with ratio `1/2` or `1/3` and shifts on a coarse grid, so
/// that compositions coincide often.
pub fn random_overlapping_system(rng: &mut impl Rng) -> IfsSystem {
    loop {
        let k = rng.gen_range(2..=3);
        let den = rng.gen_range(2..=3i64);
        let maps: Vec<ContractionMap> = (0..k)
            .map(|_| {
                let steps = 2 * (den - 1);
                let a = rng.gen_range(0..=steps);
                ContractionMap::homothety(q(1, den), q(a, 2 * den)).unwrap()
            })
            .collect();
        if let Ok(sys) = IfsSystem::new(maps) {
            return sys;
        }
    }
}
