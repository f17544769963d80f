//! Subshifts `Σ[R]` given by a finite set of forbidden words, together with
//! their follower automaton.
//!
//! The automaton is built in three passes: an Aho–Corasick matcher for `R`
//! recognises the factorial language of `R`-avoiding words; states with no
//! infinite future are pruned, so that only prefixes of infinite allowed
//! sequences survive; the result is minimised so that its states are exactly
//! the follower classes.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::word::{check_alphabet, Word};

#[derive(Clone, Debug)]
pub struct Subshift {
    alphabet: u8,
    forbidden: Vec<Word>,
    /// `transitions[state][symbol - 1]`; `None` leaves the language.
    transitions: Vec<Vec<Option<usize>>>,
}

const INITIAL: usize = 0;

/// Equal languages. The automaton is minimal with breadth-first numbering,
/// so the transition tables are canonical.
impl PartialEq for Subshift {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet && self.transitions == other.transitions
    }
}

impl Eq for Subshift {}

impl Subshift {
    /// The full shift on `alphabet` symbols.
    pub fn full(alphabet: u8) -> Result<Self> {
        Subshift::new(alphabet, Vec::new())
    }

    pub fn new(alphabet: u8, forbidden: Vec<Word>) -> Result<Self> {
        check_alphabet(alphabet as usize)?;
        for w in &forbidden {
            if w.alphabet() != alphabet {
                return Err(Error::AlphabetMismatch { left: alphabet, right: w.alphabet() });
            }
            if w.is_empty() {
                return Err(Error::EmptyWord);
            }
        }
        let mut forbidden = forbidden;
        forbidden.sort();
        forbidden.dedup();

        let raw = matcher(alphabet, &forbidden);
        let transitions = minimise(prune_to_live(raw)?);
        Ok(Subshift { alphabet, forbidden, transitions })
    }

    /// Convenience constructor from digit strings, e.g. `(2, &["22"])`.
    pub fn from_strs(alphabet: u8, forbidden: &[&str]) -> Result<Self> {
        let words = forbidden
            .iter()
            .map(|s| Word::parse(alphabet, s))
            .collect::<Result<Vec<_>>>()?;
        if words.iter().any(Word::is_empty) {
            return Err(Error::EmptyWord);
        }
        Subshift::new(alphabet, words)
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    pub fn forbidden(&self) -> &[Word] {
        &self.forbidden
    }

    pub fn max_forbidden_len(&self) -> usize {
        self.forbidden.iter().map(Word::len).max().unwrap_or(0)
    }

    pub fn is_full_shift(&self) -> bool {
        self.transitions.len() == 1 && self.transitions[0].iter().all(Option::is_some)
    }

    /// Number of follower classes (live states).
    pub fn num_states(&self) -> usize {
        self.transitions.len()
    }

    pub fn initial_state(&self) -> usize {
        INITIAL
    }

    pub fn step(&self, state: usize, symbol: u8) -> Option<usize> {
        self.transitions[state][symbol as usize - 1]
    }

    /// Follower class reached after reading `word` from the initial state.
    pub fn state_after(&self, word: &Word) -> Option<usize> {
        self.state_after_from(INITIAL, word)
    }

    pub fn state_after_from(&self, state: usize, word: &Word) -> Option<usize> {
        word.symbols().iter().try_fold(state, |s, &a| self.step(s, a))
    }

    /// Membership in `Γ_*`: `word` is a prefix of some infinite allowed sequence.
    pub fn is_allowed(&self, word: &Word) -> bool {
        word.alphabet() == self.alphabet && self.state_after(word).is_some()
    }

    /// Whether `word` avoids every forbidden factor. Weaker than
    /// [`Subshift::is_allowed`], which also requires an infinite extension.
    pub fn avoids_forbidden(&self, word: &Word) -> bool {
        self.forbidden.iter().all(|f| !word.contains_factor(f))
    }

    /// `Γ_n`, in lexicographic order.
    pub fn allowed_words(&self, n: usize) -> Vec<Word> {
        self.allowed_words_from(INITIAL, n)
    }

    /// Words `w` of length `n` readable from `state`.
    pub fn allowed_words_from(&self, state: usize, n: usize) -> Vec<Word> {
        let mut out = Vec::new();
        let mut stack = Vec::with_capacity(n);
        self.collect(state, n, &mut stack, &mut out);
        out
    }

    fn collect(&self, state: usize, n: usize, stack: &mut Vec<u8>, out: &mut Vec<Word>) {
        if stack.len() == n {
            out.push(Word::from_raw(self.alphabet, stack.clone()));
            return;
        }
        for a in 1..=self.alphabet {
            if let Some(next) = self.step(state, a) {
                stack.push(a);
                self.collect(next, n, stack, out);
                stack.pop();
            }
        }
    }

    /// `#Γ_n`, counted on the automaton without enumerating.
    pub fn count_words(&self, n: usize) -> BigUint {
        self.counts_per_state(n).swap_remove(INITIAL)
    }

    /// For every state, the number of allowed continuations of length `n`.
    pub fn counts_per_state(&self, n: usize) -> Vec<BigUint> {
        let mut counts = vec![BigUint::one(); self.num_states()];
        for _ in 0..n {
            counts = self
                .transitions
                .iter()
                .map(|row| row.iter().flatten().fold(BigUint::zero(), |acc, &t| acc + &counts[t]))
                .collect();
        }
        counts
    }

    /// Lex-least shortest word leading to each state.
    pub fn access_words(&self) -> Vec<Word> {
        let mut words: Vec<Option<Word>> = vec![None; self.num_states()];
        words[INITIAL] = Some(Word::empty(self.alphabet));
        let mut queue = VecDeque::from([INITIAL]);
        while let Some(s) = queue.pop_front() {
            let base = words[s].clone().expect("visited");
            for a in 1..=self.alphabet {
                if let Some(t) = self.step(s, a) {
                    if words[t].is_none() {
                        words[t] = Some(base.push(a));
                        queue.push_back(t);
                    }
                }
            }
        }
        words.into_iter().map(|w| w.expect("all states reachable")).collect()
    }

    /// Edges `(from, symbol, to)` of the live automaton.
    pub fn edges(&self) -> impl Iterator<Item = (usize, u8, usize)> + '_ {
        self.transitions.iter().enumerate().flat_map(|(s, row)| {
            row.iter()
                .enumerate()
                .filter_map(move |(a, t)| t.map(|t| (s, a as u8 + 1, t)))
        })
    }
}

type Table = Vec<Vec<Option<usize>>>;

/// Aho–Corasick automaton over the non-matching trie nodes. State 0 is the root.
fn matcher(alphabet: u8, forbidden: &[Word]) -> Table {
    let k = alphabet as usize;
    let mut children: Vec<Vec<Option<usize>>> = vec![vec![None; k]];
    let mut terminal = vec![false];
    for w in forbidden {
        let mut node = 0;
        for &a in w.symbols() {
            let slot = a as usize - 1;
            node = match children[node][slot] {
                Some(c) => c,
                None => {
                    children.push(vec![None; k]);
                    terminal.push(false);
                    let c = children.len() - 1;
                    children[node][slot] = Some(c);
                    c
                }
            };
        }
        terminal[node] = true;
    }

    let n = children.len();
    let mut goto = vec![vec![0usize; k]; n];
    let mut fail = vec![0usize; n];
    let mut dead = terminal.clone();
    let mut queue = VecDeque::new();
    for a in 0..k {
        match children[0][a] {
            Some(c) => {
                goto[0][a] = c;
                queue.push_back(c);
            }
            None => goto[0][a] = 0,
        }
    }
    while let Some(node) = queue.pop_front() {
        dead[node] = dead[node] || dead[fail[node]];
        for a in 0..k {
            match children[node][a] {
                Some(c) => {
                    fail[c] = if node == 0 { 0 } else { goto[fail[node]][a] };
                    goto[node][a] = c;
                    queue.push_back(c);
                }
                None => goto[node][a] = goto[fail[node]][a],
            }
        }
    }

    // Renumber the surviving nodes so that the root stays at 0.
    let mut index = vec![None; n];
    let mut next = 0;
    for (node, d) in dead.iter().enumerate() {
        if !d {
            index[node] = Some(next);
            next += 1;
        }
    }
    (0..n)
        .filter(|&node| !dead[node])
        .map(|node| goto[node].iter().map(|&t| index[t]).collect())
        .collect()
}

/// Keeps the states from which an infinite path exists and that are
/// reachable from the root.
fn prune_to_live(table: Table) -> Result<Table> {
    if table.is_empty() {
        return Err(Error::EmptySubshift);
    }
    let n = table.len();
    let mut live = vec![true; n];
    loop {
        let mut changed = false;
        for s in 0..n {
            if live[s] && !table[s].iter().flatten().any(|&t| live[t]) {
                live[s] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if !live[0] {
        return Err(Error::EmptySubshift);
    }
    let mut order = vec![None; n];
    let mut reached = vec![0usize];
    order[0] = Some(0);
    let mut head = 0;
    while head < reached.len() {
        let s = reached[head];
        head += 1;
        for t in table[s].iter().flatten() {
            if live[*t] && order[*t].is_none() {
                order[*t] = Some(reached.len());
                reached.push(*t);
            }
        }
    }
    Ok(reached
        .iter()
        .map(|&s| {
            table[s]
                .iter()
                .map(|t| t.filter(|&t| live[t]).and_then(|t| order[t]))
                .collect()
        })
        .collect())
}

/// Moore partition refinement; the missing transition acts as a rejecting sink.
/// Classes are renumbered in breadth-first order from the root.
fn minimise(table: Table) -> Table {
    let n = table.len();
    let mut class = vec![0usize; n];
    let mut count = 1;
    loop {
        let mut ids: BTreeMap<(usize, Vec<Option<usize>>), usize> = BTreeMap::new();
        let mut next = vec![0usize; n];
        for s in 0..n {
            let sig = (class[s], table[s].iter().map(|t| t.map(|t| class[t])).collect());
            let len = ids.len();
            next[s] = *ids.entry(sig).or_insert(len);
        }
        let new_count = ids.len();
        class = next;
        if new_count == count {
            break;
        }
        count = new_count;
    }

    let mut rename: HashMap<usize, usize> = HashMap::new();
    let mut reps = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    rename.insert(class[0], 0);
    reps.push(0);
    while let Some(s) = queue.pop_front() {
        for t in table[s].iter().flatten() {
            if !rename.contains_key(&class[*t]) {
                rename.insert(class[*t], reps.len());
                reps.push(*t);
                queue.push_back(*t);
            }
        }
    }
    reps.iter()
        .map(|&s| table[s].iter().map(|t| t.map(|t| rename[&class[t]])).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn counts(s: &Subshift, upto: usize) -> Vec<usize> {
        (1..=upto).map(|n| s.allowed_words(n).len()).collect()
    }

    #[test]
    fn full_shift_counts() {
        let s = Subshift::full(2).unwrap();
        assert!(s.is_full_shift());
        assert_eq!(counts(&s, 5), vec![2, 4, 8, 16, 32]);
        assert_eq!(s.allowed_words(3).len(), 8);
    }

    #[test]
    fn golden_mean_counts() {
        let s = Subshift::from_strs(2, &["22"]).unwrap();
        assert_eq!(counts(&s, 4), vec![2, 3, 5, 8]);
        assert_eq!(s.num_states(), 2);
        assert_eq!(s.count_words(4), BigUint::from(8u32));
    }

    #[test]
    fn monotone_language_is_one_then_two() {
        let s = Subshift::from_strs(2, &["21"]).unwrap();
        let words: Vec<String> = s.allowed_words(3).iter().map(|w| w.to_string()).collect();
        assert_eq!(words, vec!["111", "112", "122", "222"]);
    }

    #[test]
    fn everything_forbidden_is_empty() {
        assert!(matches!(Subshift::from_strs(2, &["1", "2"]), Err(Error::EmptySubshift)));
    }

    #[test]
    fn dead_end_words_are_pruned() {
        // "12" can only be followed by 2 and "22" is forbidden, so [12] is empty.
        let s = Subshift::from_strs(2, &["121", "22"]).unwrap();
        assert!(!s.is_allowed(&Word::parse(2, "12").unwrap()));
        assert!(s.avoids_forbidden(&Word::parse(2, "12").unwrap()));
        assert!(s.is_allowed(&Word::parse(2, "11").unwrap()));
    }

    #[test]
    fn redundant_forbidden_words_collapse_to_same_classes() {
        let a = Subshift::from_strs(2, &["22"]).unwrap();
        let b = Subshift::from_strs(2, &["22", "122", "221"]).unwrap();
        assert_eq!(a.num_states(), b.num_states());
        for n in 1..8 {
            assert_eq!(a.allowed_words(n), b.allowed_words(n));
        }
    }

    #[test]
    fn access_words_reach_their_states() {
        let s = Subshift::from_strs(3, &["13", "22", "321"]).unwrap();
        for (state, w) in s.access_words().iter().enumerate() {
            assert_eq!(s.state_after(w), Some(state));
        }
    }

    fn arb_subshift() -> impl Strategy<Value = (u8, Vec<Vec<u8>>)> {
        (2u8..=3).prop_flat_map(|k| {
            let word = prop::collection::vec(1..=k, 1..=3);
            (Just(k), prop::collection::vec(word, 0..=4))
        })
    }

    /// Independent oracle: an R-avoiding word is a prefix of an infinite
    /// allowed sequence iff it has an R-avoiding extension by `horizon`
    /// symbols, once `horizon` exceeds the number of matcher states.
    fn extendable(k: u8, forbidden: &[Vec<u8>], word: &mut Vec<u8>, horizon: usize) -> bool {
        if horizon == 0 {
            return true;
        }
        for a in 1..=k {
            word.push(a);
            let ok = forbidden.iter().all(|f| !word.ends_with(f))
                && extendable(k, forbidden, word, horizon - 1);
            word.pop();
            if ok {
                return true;
            }
        }
        false
    }

    fn brute_gamma(k: u8, forbidden: &[Vec<u8>], n: usize, horizon: usize) -> Vec<Word> {
        let mut out = Vec::new();
        let total = (k as usize).pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let mut w = vec![0u8; n];
            for slot in w.iter_mut().rev() {
                *slot = (c % k as usize) as u8 + 1;
                c /= k as usize;
            }
            let avoids = forbidden.iter().all(|f| !w.windows(f.len()).any(|x| x == f.as_slice()));
            if avoids && extendable(k, forbidden, &mut w.clone(), horizon) {
                out.push(Word::new(k, w).unwrap());
            }
        }
        out.sort();
        out
    }

    proptest! {
        #[test]
        fn language_matches_brute_force((k, raw) in arb_subshift()) {
            let words: Vec<Word> = raw.iter().map(|w| Word::new(k, w.clone()).unwrap()).collect();
            let horizon = 1 + raw.iter().map(Vec::len).sum::<usize>();
            let built = Subshift::new(k, words);
            let Ok(s) = built else {
                prop_assert!(brute_gamma(k, &raw, 0, horizon).is_empty());
                return Ok(());
            };
            for n in 0..=4 {
                let live = s.allowed_words(n);
                prop_assert_eq!(&live, &brute_gamma(k, &raw, n, horizon));
                for w in &live {
                    for a in 0..w.len() {
                        for b in a..=w.len() {
                            let f = Word::new(k, w.symbols()[a..b].to_vec()).unwrap();
                            prop_assert!(s.is_allowed(&f));
                        }
                    }
                }
                let next = s.allowed_words(n + 1);
                for w in &live {
                    prop_assert!(next.iter().any(|v| w.is_prefix_of(v)));
                }
                prop_assert_eq!(s.count_words(n), BigUint::from(live.len()));
            }
        }
    }
}
