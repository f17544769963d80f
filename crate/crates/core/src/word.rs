//! Finite words over the alphabet `{1, .., κ}`.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// A finite word. Symbols are stored 1-based, as in the usual notation.
///
/// The `Ord` implementation is the lexicographic order on finite words in
/// which a proper prefix precedes its extensions: `1 < 12 < 13 < 2`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Word {
    alphabet: u8,
    symbols: Vec<u8>,
}

impl Word {
    pub fn new(alphabet: u8, symbols: Vec<u8>) -> Result<Self> {
        check_alphabet(alphabet as usize)?;
        if let Some(&bad) = symbols.iter().find(|&&s| s == 0 || s > alphabet) {
            return Err(Error::InvalidSymbol { symbol: bad as usize, alphabet });
        }
        Ok(Word { alphabet, symbols })
    }

    pub fn empty(alphabet: u8) -> Self {
        Word { alphabet, symbols: Vec::new() }
    }

    /// Parses digits (`"1213"`) for alphabets up to 9, or dot-separated
    /// symbols (`"1.12.3"`) for any alphabet.
    pub fn parse(alphabet: u8, text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() || text == "∅" {
            return Ok(Word::empty(alphabet));
        }
        let symbols: Option<Vec<u8>> = if text.contains('.') {
            text.split('.').map(|t| t.parse::<u8>().ok()).collect()
        } else {
            text.chars().map(|c| c.to_digit(10).map(|d| d as u8)).collect()
        };
        let symbols = symbols.ok_or_else(|| Error::WordSyntax(text.to_string()))?;
        Word::new(alphabet, symbols)
    }

    pub(crate) fn from_raw(alphabet: u8, symbols: Vec<u8>) -> Self {
        debug_assert!(symbols.iter().all(|&s| s >= 1 && s <= alphabet));
        Word { alphabet, symbols }
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn first(&self) -> Option<u8> {
        self.symbols.first().copied()
    }

    pub fn last(&self) -> Option<u8> {
        self.symbols.last().copied()
    }

    /// `i^-`, the word with its last symbol removed.
    pub fn predecessor(&self) -> Option<Word> {
        if self.is_empty() {
            None
        } else {
            Some(self.prefix(self.len() - 1))
        }
    }

    /// `i|_n`; saturates at the full word.
    pub fn prefix(&self, n: usize) -> Word {
        let n = n.min(self.len());
        Word { alphabet: self.alphabet, symbols: self.symbols[..n].to_vec() }
    }

    /// The left shift `σ`.
    pub fn shift(&self) -> Word {
        self.shift_by(1)
    }

    pub fn shift_by(&self, k: usize) -> Word {
        let k = k.min(self.len());
        Word { alphabet: self.alphabet, symbols: self.symbols[k..].to_vec() }
    }

    pub fn concat(&self, other: &Word) -> Result<Word> {
        same_alphabet(self, other)?;
        let mut symbols = self.symbols.clone();
        symbols.extend_from_slice(&other.symbols);
        Ok(Word { alphabet: self.alphabet, symbols })
    }

    pub fn push(&self, symbol: u8) -> Word {
        assert!(symbol >= 1 && symbol <= self.alphabet, "symbol out of range");
        let mut symbols = Vec::with_capacity(self.len() + 1);
        symbols.extend_from_slice(&self.symbols);
        symbols.push(symbol);
        Word { alphabet: self.alphabet, symbols }
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.symbols.starts_with(&self.symbols)
    }

    pub fn contains_factor(&self, factor: &Word) -> bool {
        if factor.is_empty() {
            return true;
        }
        self.symbols.windows(factor.len()).any(|w| w == factor.symbols.as_slice())
    }

    pub fn children(&self) -> impl Iterator<Item = Word> + '_ {
        (1..=self.alphabet).map(move |s| self.push(s))
    }

    /// The constant word `s^n`.
    pub fn repeat(alphabet: u8, symbol: u8, n: usize) -> Result<Word> {
        Word::new(alphabet, vec![symbol; n])
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.symbols.cmp(&other.symbols).then(self.alphabet.cmp(&other.alphabet))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.alphabet <= 9 {
            for s in &self.symbols {
                write!(f, "{s}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.symbols.iter().map(|s| s.to_string()).collect();
            write!(f, "{}", parts.join("."))
        }
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "Word(∅)")
        } else {
            write!(f, "Word({self})")
        }
    }
}

pub(crate) fn check_alphabet(alphabet: usize) -> Result<()> {
    if (2..=255).contains(&alphabet) {
        Ok(())
    } else {
        Err(Error::InvalidAlphabet(alphabet))
    }
}

fn same_alphabet(i: &Word, j: &Word) -> Result<()> {
    if i.alphabet == j.alphabet {
        Ok(())
    } else {
        Err(Error::AlphabetMismatch { left: i.alphabet, right: j.alphabet })
    }
}

/// Longest common prefix `i ∧ j`.
pub fn lcp(i: &Word, j: &Word) -> Result<Word> {
    same_alphabet(i, j)?;
    let n = i.symbols.iter().zip(&j.symbols).take_while(|(a, b)| a == b).count();
    Ok(i.prefix(n))
}

/// `i ⊥ j`: the cylinders `[i]` and `[j]` are disjoint, i.e. neither word
/// is a prefix of the other.
pub fn is_orthogonal(i: &Word, j: &Word) -> bool {
    !i.is_prefix_of(j) && !j.is_prefix_of(i)
}

/// Strict lexicographic order: `i ≺ j` when `i` is a proper prefix of `j`
/// or the first differing symbol of `i` is smaller.
pub fn lex_less(i: &Word, j: &Word) -> bool {
    i.symbols < j.symbols
}

/// Order by length first, then lexicographically.
pub fn shortlex_cmp(i: &Word, j: &Word) -> Ordering {
    i.len().cmp(&j.len()).then_with(|| i.symbols.cmp(&j.symbols))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(3, s).unwrap()
    }

    #[test]
    fn lcp_examples() {
        let a = Word::parse(3, "1213").unwrap();
        let b = Word::parse(3, "1221").unwrap();
        assert_eq!(lcp(&a, &b).unwrap(), w("12"));
        assert_eq!(lcp(&w("12"), &w("12")).unwrap(), w("12"));
        assert!(lcp(&w("3121"), &w("1")).unwrap().is_empty());
        let other = Word::parse(2, "1").unwrap();
        assert!(matches!(lcp(&w("1"), &other), Err(Error::AlphabetMismatch { .. })));
    }

    #[test]
    fn orthogonality() {
        assert!(is_orthogonal(&w("12"), &w("13")));
        assert!(!is_orthogonal(&w("12"), &w("123")));
        assert!(!is_orthogonal(&w("1"), &w("1")));
    }

    #[test]
    fn lexicographic_order() {
        assert!(lex_less(&w("1"), &w("12")));
        assert!(lex_less(&w("13"), &w("21")));
        assert!(!lex_less(&w("2"), &w("2")));
        assert!(!lex_less(&w("12"), &w("1")));
    }

    #[test]
    fn rejects_out_of_range_symbols() {
        assert!(matches!(Word::parse(3, "24"), Err(Error::InvalidSymbol { symbol: 4, .. })));
        assert!(Word::parse(3, "1x").is_err());
        assert!(Word::new(1, vec![]).is_err());
    }

    #[test]
    fn structural_helpers() {
        let i = w("1231");
        assert_eq!(i.predecessor().unwrap(), w("123"));
        assert!(Word::empty(3).predecessor().is_none());
        assert_eq!(i.shift(), w("231"));
        assert_eq!(i.prefix(2), w("12"));
        assert!(i.contains_factor(&w("23")));
        assert!(!i.contains_factor(&w("32")));
        assert_eq!(Word::parse(12, "1.12.3").unwrap().to_string(), "1.12.3");
    }
}
