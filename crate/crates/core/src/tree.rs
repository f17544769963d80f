//! Depth-limited approximations of compact subsets of the shift space.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::subshift::Subshift;
use crate::word::{check_alphabet, Word};

/// The prefix set `{i|_k : i ∈ A, k ≤ n}` of a compact `A ⊂ Σ`.
///
/// Every node shorter than `depth` has at least one child, so each node
/// extends to a leaf at full depth. The empty tree stands for `A = ∅`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompactTree {
    alphabet: u8,
    depth: usize,
    nodes: BTreeSet<Word>,
}

impl CompactTree {
    pub fn new(alphabet: u8, depth: usize, nodes: impl IntoIterator<Item = Word>) -> Result<Self> {
        check_alphabet(alphabet as usize)?;
        let nodes: BTreeSet<Word> = nodes.into_iter().collect();
        let tree = CompactTree { alphabet, depth, nodes };
        tree.validate()?;
        Ok(tree)
    }

    pub fn empty(alphabet: u8, depth: usize) -> Self {
        CompactTree { alphabet, depth, nodes: BTreeSet::new() }
    }

    /// Tree whose leaves are exactly `leaves` (all of length `depth`).
    pub fn from_leaves(alphabet: u8, depth: usize, leaves: impl IntoIterator<Item = Word>) -> Result<Self> {
        let mut nodes = BTreeSet::new();
        for leaf in leaves {
            if leaf.len() != depth {
                return Err(Error::InvalidTree(format!("leaf {leaf} is not at depth {depth}")));
            }
            for k in 0..=depth {
                nodes.insert(leaf.prefix(k));
            }
        }
        CompactTree::new(alphabet, depth, nodes)
    }

    /// `Γ_{≤depth}` of a subshift.
    pub fn from_subshift(subshift: &Subshift, depth: usize) -> Self {
        Self::from_subshift_state(subshift, subshift.initial_state(), depth)
    }

    /// Prefix tree of the words readable from `state` of the follower automaton.
    pub fn from_subshift_state(subshift: &Subshift, state: usize, depth: usize) -> Self {
        let leaves = subshift.allowed_words_from(state, depth);
        let mut nodes = BTreeSet::new();
        for leaf in leaves {
            for k in 0..=depth {
                nodes.insert(leaf.prefix(k));
            }
        }
        CompactTree { alphabet: subshift.alphabet(), depth, nodes }
    }

    /// Cylinder `[i]` of the full shift, truncated at `depth ≥ |i|`.
    pub fn cylinder(word: &Word, depth: usize) -> Result<Self> {
        if word.len() > depth {
            return Err(Error::DepthExceeded { requested: word.len(), depth });
        }
        let k = word.alphabet() as usize;
        let free = depth - word.len();
        let mut nodes: BTreeSet<Word> = (0..=word.len()).map(|n| word.prefix(n)).collect();
        let mut frontier = vec![word.clone()];
        for _ in 0..free {
            frontier = frontier.iter().flat_map(|w| w.children().collect::<Vec<_>>()).collect();
            nodes.extend(frontier.iter().cloned());
            if nodes.len() > 10_000_000 / k {
                return Err(Error::Budget { limit: 10_000_000 });
            }
        }
        Ok(CompactTree { alphabet: word.alphabet(), depth, nodes })
    }

    /// Digit-set schedule: at level `k` (0-based) the allowed symbols are
    /// `schedule[k % schedule.len()]`.
    pub fn from_schedule(alphabet: u8, depth: usize, schedule: &[Vec<u8>]) -> Result<Self> {
        if schedule.is_empty() || schedule.iter().any(Vec::is_empty) {
            return Err(Error::InvalidTree("schedule needs a non-empty digit set per level".into()));
        }
        let mut nodes = BTreeSet::from([Word::empty(alphabet)]);
        let mut frontier = vec![Word::empty(alphabet)];
        for level in 0..depth {
            let digits = &schedule[level % schedule.len()];
            let mut next = Vec::new();
            for w in &frontier {
                for &d in digits {
                    let mut symbols = w.symbols().to_vec();
                    symbols.push(d);
                    next.push(Word::new(alphabet, symbols)?);
                }
            }
            nodes.extend(next.iter().cloned());
            frontier = next;
        }
        CompactTree::new(alphabet, depth, nodes)
    }

    fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Ok(());
        }
        if !self.nodes.contains(&Word::empty(self.alphabet)) {
            return Err(Error::InvalidTree("root missing".into()));
        }
        for node in &self.nodes {
            if node.alphabet() != self.alphabet {
                return Err(Error::AlphabetMismatch { left: self.alphabet, right: node.alphabet() });
            }
            if node.len() > self.depth {
                return Err(Error::InvalidTree(format!("node {node} deeper than {}", self.depth)));
            }
            if let Some(parent) = node.predecessor() {
                if !self.nodes.contains(&parent) {
                    return Err(Error::InvalidTree(format!("node {node} has no parent")));
                }
            }
            if node.len() < self.depth && !node.children().any(|c| self.nodes.contains(&c)) {
                return Err(Error::InvalidTree(format!("node {node} has no child")));
            }
        }
        Ok(())
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &BTreeSet<Word> {
        &self.nodes
    }

    pub fn contains(&self, word: &Word) -> bool {
        self.nodes.contains(word)
    }

    /// `A_n`: the nodes of length exactly `n`.
    pub fn level(&self, n: usize) -> Vec<Word> {
        self.nodes.iter().filter(|w| w.len() == n).cloned().collect()
    }

    pub fn leaves(&self) -> Vec<Word> {
        self.level(self.depth)
    }

    /// Symbolic magnification `β_i(A) = σ^{|i|}(A ∩ [i])` at finite depth.
    pub fn subtree(&self, word: &Word) -> Result<CompactTree> {
        if word.len() > self.depth {
            return Err(Error::DepthExceeded { requested: word.len(), depth: self.depth });
        }
        let depth = self.depth - word.len();
        if !self.nodes.contains(word) {
            return Ok(CompactTree::empty(self.alphabet, depth));
        }
        let start = word.clone();
        let nodes = self
            .nodes
            .range(start..)
            .take_while(|w| word.is_prefix_of(w))
            .map(|w| w.shift_by(word.len()))
            .collect();
        Ok(CompactTree { alphabet: self.alphabet, depth, nodes })
    }

    /// Restriction to depth `n ≤ depth`.
    pub fn truncate(&self, n: usize) -> CompactTree {
        let n = n.min(self.depth);
        CompactTree {
            alphabet: self.alphabet,
            depth: n,
            nodes: self.nodes.iter().filter(|w| w.len() <= n).cloned().collect(),
        }
    }

    /// First depth `k` at which the prefix sets differ, or `None` if they
    /// coincide up to the common depth.
    pub fn first_difference(&self, other: &CompactTree) -> Option<usize> {
        let depth = self.depth.min(other.depth);
        (0..=depth).find(|&k| self.level(k) != other.level(k))
    }

    /// Ultrametric Hausdorff distance `2^{-k}`, with `k` the first differing depth.
    pub fn symbolic_distance(&self, other: &CompactTree) -> f64 {
        match self.first_difference(other) {
            None => 0.0,
            Some(k) => 0.5f64.powi(k as i32),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn w(s: &str) -> Word {
        Word::parse(2, s).unwrap()
    }

    #[test]
    fn subtree_of_cylinder() {
        let a = CompactTree::cylinder(&w("12"), 2).unwrap();
        let b = a.subtree(&w("1")).unwrap();
        assert_eq!(b, CompactTree::cylinder(&w("2"), 1).unwrap());
        assert_eq!(a.subtree(&Word::empty(2)).unwrap(), a);
        assert!(a.subtree(&w("2")).unwrap().is_empty());
        assert!(matches!(a.subtree(&w("121")), Err(Error::DepthExceeded { .. })));
    }

    #[test]
    fn rejects_degenerate_trees() {
        let nodes = vec![Word::empty(2), w("1"), w("2"), w("11")];
        assert!(CompactTree::new(2, 2, nodes).is_err());
        assert!(CompactTree::new(2, 1, vec![w("1")]).is_err());
    }

    #[test]
    fn distance_is_ultrametric_in_first_difference() {
        let full = CompactTree::from_subshift(&Subshift::full(2).unwrap(), 4);
        let golden = CompactTree::from_subshift(&Subshift::from_strs(2, &["22"]).unwrap(), 4);
        assert_eq!(full.first_difference(&golden), Some(2));
        assert_eq!(full.symbolic_distance(&golden), 0.25);
        assert_eq!(full.symbolic_distance(&full), 0.0);
    }

    #[test]
    fn schedule_tree() {
        let t = CompactTree::from_schedule(3, 3, &[vec![1, 3], vec![2]]).unwrap();
        let leaves: Vec<String> = t.leaves().iter().map(|w| w.to_string()).collect();
        assert_eq!(leaves, vec!["121", "123", "321", "323"]);
    }

    pub(crate) fn random_tree(seed: u64, alphabet: u8, depth: usize) -> CompactTree {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut leaves = Vec::new();
        let mut frontier = vec![Word::empty(alphabet)];
        for _ in 0..depth {
            let mut next = Vec::new();
            for node in &frontier {
                let mut kids: Vec<Word> = node.children().filter(|_| rng.gen_bool(0.6)).collect();
                if kids.is_empty() {
                    kids.push(node.push(rng.gen_range(1..=alphabet)));
                }
                next.extend(kids);
            }
            frontier = next;
        }
        leaves.extend(frontier);
        CompactTree::from_leaves(alphabet, depth, leaves).unwrap()
    }

    proptest! {
        #[test]
        fn magnification_composes(seed in any::<u64>(), depth in 1usize..=8, a in 0usize..=8, b in 0usize..=8) {
            let tree = random_tree(seed, 2, depth);
            let nodes: Vec<&Word> = tree.nodes().iter().collect();
            let i = nodes[a * 7919 % nodes.len()].clone();
            let inner = tree.subtree(&i).unwrap();
            let rest: Vec<&Word> = inner.nodes().iter().collect();
            let j = if rest.is_empty() { Word::empty(2) } else { rest[b * 104729 % rest.len()].clone() };
            let lhs = inner.subtree(&j).unwrap();
            let rhs = tree.subtree(&i.concat(&j).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
