//! Symbolic minisets and microsets at finite depth, the branching numbers
//! `N_n(A)` and the Assouad-dimension estimates built from them.
//!
//! A depth-`n` prefix set belongs to some microset iff it belongs to some
//! miniset `β_i(A)`, since Hausdorff convergence in the ultrametric is
//! eventual equality of prefix sets. For a subshift the prefix set of
//! `β_i(A)` depends only on the follower class of `i`, which makes the
//! family finite and exactly computable.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ifs::MoranConstruction;
use crate::rational::{ln_bigint, ln_rational, Q};
use crate::subshift::Subshift;
use crate::tree::CompactTree;
use crate::word::Word;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyMember {
    pub tree: CompactTree,
    /// Words `i` with this prefix set for `β_i(A)`; the first is lex-least.
    pub provenance: Vec<Word>,
}

impl FamilyMember {
    /// `#{i ∈ Γ_n : A' ∩ [i] ≠ ∅}` for the member's microsets.
    pub fn size(&self) -> usize {
        self.tree.leaves().len()
    }
}

#[derive(Clone, Debug)]
pub struct MicrosetFamily {
    pub depth: usize,
    pub members: Vec<FamilyMember>,
    /// Whether the family provably lists every microset prefix set.
    pub complete: bool,
}

impl MicrosetFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn max_size(&self) -> usize {
        self.members.iter().map(FamilyMember::size).max().unwrap_or(0)
    }

    pub fn contains(&self, tree: &CompactTree) -> bool {
        self.members.iter().any(|m| &m.tree == tree)
    }

    fn from_groups(depth: usize, groups: BTreeMap<Vec<Word>, (CompactTree, Vec<Word>)>, complete: bool) -> Self {
        // BTreeMap keyed by the sorted leaf list gives the canonical ordering
        let members = groups
            .into_values()
            .map(|(tree, mut provenance)| {
                provenance.sort();
                provenance.dedup();
                FamilyMember { tree, provenance }
            })
            .collect();
        MicrosetFamily { depth, members, complete }
    }
}

/// Every depth-`n` microset prefix set of a subshift, one per distinct
/// follower-class prefix set, with the class access words as provenance.
pub fn microset_family(subshift: &Subshift, n: usize) -> Result<MicrosetFamily> {
    if n == 0 {
        return Err(Error::Argument("depth must be at least 1".into()));
    }
    let mut groups = BTreeMap::new();
    for (state, access) in subshift.access_words().into_iter().enumerate() {
        let tree = CompactTree::from_subshift_state(subshift, state, n);
        groups
            .entry(tree.leaves())
            .or_insert_with(|| (tree, Vec::new()))
            .1
            .push(access);
    }
    Ok(MicrosetFamily::from_groups(n, groups, true))
}

/// Depth-`n` windows `β_i(A)` of a finite-depth tree for all nodes `i` with
/// `|i| ≤ depth − n`. Limits of minisets deeper than the tree are not seen,
/// so the family is flagged partial.
pub fn microset_family_of_tree(tree: &CompactTree, n: usize) -> Result<MicrosetFamily> {
    if n == 0 || n > tree.depth() {
        return Err(Error::DepthExceeded { requested: n, depth: tree.depth() });
    }
    let mut groups = BTreeMap::new();
    for node in tree.nodes().iter().filter(|w| w.len() + n <= tree.depth()) {
        let window = tree.subtree(node)?.truncate(n);
        groups
            .entry(window.leaves())
            .or_insert_with(|| (window, Vec::new()))
            .1
            .push(node.clone());
    }
    Ok(MicrosetFamily::from_groups(n, groups, false))
}

/// Family of the digit-schedule set whose level-`k` digits are
/// `schedule[k mod p]`. Minisets depend only on `|i| mod p`, so the `p`
/// phases give the complete family.
pub fn microset_family_of_schedule(alphabet: u8, schedule: &[Vec<u8>], n: usize) -> Result<MicrosetFamily> {
    let period = schedule.len();
    let tree = CompactTree::from_schedule(alphabet, period - 1 + n, schedule)?;
    let mut groups = BTreeMap::new();
    for phase in 0..period {
        let node = tree.level(phase).into_iter().next().expect("schedule trees have every level");
        let window = tree.subtree(&node)?.truncate(n);
        groups
            .entry(window.leaves())
            .or_insert_with(|| (window, Vec::new()))
            .1
            .push(node);
    }
    Ok(MicrosetFamily::from_groups(n, groups, true))
}

/// `N_n(A)` for a subshift: the largest number of length-`n` continuations
/// over all follower classes.
pub fn branching_count(subshift: &Subshift, n: usize) -> BigUint {
    subshift
        .counts_per_state(n)
        .into_iter()
        .max()
        .unwrap_or_else(BigUint::zero)
}

/// `N_n(A)` read off a (possibly partial) family.
pub fn branching_count_of_family(family: &MicrosetFamily) -> usize {
    family.max_size()
}

#[derive(Clone, Debug, Serialize)]
pub struct AssouadEstimate {
    pub alpha_bar: String,
    /// `(n, N_n, t_n)` with `t_n = log N_n / (n log(1/ᾱ))`.
    pub rows: Vec<(usize, String, f64)>,
    /// `inf_n t_n`, an upper bound for the limit by Fekete's lemma.
    pub fekete_bound: f64,
    /// `(n, (log N_{2n} − log N_n) / (n log(1/ᾱ)))`.
    pub difference_quotients: Vec<(usize, f64)>,
    /// The difference quotient at the largest `n`.
    pub estimate: f64,
}

/// Assouad estimate from `N_n` of a subshift under homogeneous ratio `ᾱ`.
/// Counts are computed up to `2 n_max` so that the difference quotient is
/// available for every `n ≤ n_max`.
pub fn assouad_estimate_for(subshift: &Subshift, alpha_bar: &Q, n_max: usize) -> Result<AssouadEstimate> {
    if n_max < 2 {
        return Err(Error::Argument("n_max must be at least 2".into()));
    }
    let scale = -ln_rational(alpha_bar);
    if !(scale > 0.0) {
        return Err(Error::Argument("alpha_bar must lie in (0, 1)".into()));
    }
    let mut counts = Vec::with_capacity(2 * n_max + 1);
    counts.push(BigUint::from(1u32));
    for n in 1..=2 * n_max {
        counts.push(branching_count(subshift, n));
    }
    let logs: Vec<f64> = counts.iter().map(|c| ln_bigint(&c.clone().into())).collect();
    let rows: Vec<(usize, String, f64)> = (1..=2 * n_max)
        .map(|n| (n, counts[n].to_string(), logs[n] / (n as f64 * scale)))
        .collect();
    let fekete_bound = rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    let difference_quotients: Vec<(usize, f64)> = (1..=n_max)
        .map(|n| (n, (logs[2 * n] - logs[n]) / (n as f64 * scale)))
        .collect();
    let estimate = difference_quotients.last().expect("n_max >= 2").1;
    Ok(AssouadEstimate {
        alpha_bar: crate::rational::format_rational(alpha_bar),
        rows,
        fekete_bound,
        difference_quotients,
        estimate,
    })
}

/// [`assouad_estimate_for`] on a construction, refusing unequal ratios.
pub fn assouad_estimate(mc: &MoranConstruction, n_max: usize) -> Result<AssouadEstimate> {
    let ratios = mc.system().similarity_ratios().ok_or(Error::NonHomogeneous)?;
    if ratios.iter().any(|r| r != &ratios[0]) {
        return Err(Error::NonHomogeneous);
    }
    assouad_estimate_for(mc.subshift(), &ratios[0], n_max)
}
