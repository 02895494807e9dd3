//! Words in the free monoid on `d` generators.
//!
//! Words index the orthonormal basis of the Fock space and the moments of an
//! NC measure. The global basis order is degree-lexicographic: first by
//! length, then lexicographically by letters. With this order the words of
//! length at most `N` form a prefix of the words of length at most `N + 1`,
//! so level-`N` operators are leading blocks of level-`N + 1` operators.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A generator index in `1..=d`.
pub type Letter = u16;

/// A finite word over the letters `1..=d`; the empty word is the unit.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    /// Builds a word and checks every letter lies in `1..=d`.
    pub fn checked(letters: Vec<Letter>, d: usize) -> Result<Self> {
        if let Some(&bad) = letters.iter().find(|&&l| l == 0 || l as usize > d) {
            return Err(Error::LetterOutOfRange {
                letter: bad as usize,
                d,
            });
        }
        Ok(Word(letters))
    }

    pub fn letter(k: Letter) -> Self {
        Word(vec![k])
    }

    /// `k` repeated `n` times.
    pub fn power(k: Letter, n: usize) -> Self {
        Word(vec![k; n])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, k: Letter) -> bool {
        self.0.contains(&k)
    }

    pub fn max_letter(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0) as usize
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.0);
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    /// `k` followed by this word.
    pub fn prepend(&self, k: Letter) -> Word {
        let mut letters = Vec::with_capacity(self.len() + 1);
        letters.push(k);
        letters.extend_from_slice(&self.0);
        Word(letters)
    }

    /// This word followed by `k`.
    pub fn append(&self, k: Letter) -> Word {
        let mut letters = self.0.clone();
        letters.push(k);
        Word(letters)
    }

    /// The word with its letters reversed.
    pub fn transpose(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    /// If `self = prefix · rest`, returns `rest`.
    pub fn strip_prefix(&self, prefix: &Word) -> Option<Word> {
        self.0.strip_prefix(prefix.letters()).map(|s| Word(s.to_vec()))
    }

    /// Position of this word in the degree-lexicographic enumeration over `d`
    /// letters.
    pub fn index(&self, d: usize) -> usize {
        let offset = level_offset(d, self.len());
        let within = self
            .0
            .iter()
            .fold(0usize, |acc, &l| acc * d + (l as usize - 1));
        offset + within
    }

    /// Serialized form: letters run together for `d <= 9`, dot-separated
    /// otherwise, and `"e"` for the empty word.
    pub fn encode(&self, d: usize) -> String {
        if self.is_empty() {
            return "e".to_string();
        }
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        if d <= 9 {
            parts.concat()
        } else {
            parts.join(".")
        }
    }

    pub fn decode(s: &str, d: usize) -> Result<Word> {
        let s = s.trim();
        if s == "e" || s.is_empty() {
            return Ok(Word::empty());
        }
        let bad = || Error::InvalidWord(s.to_string());
        let letters: Vec<Letter> = if d <= 9 && !s.contains('.') {
            s.chars()
                .map(|c| c.to_digit(10).map(|v| v as Letter).ok_or_else(bad))
                .collect::<Result<_>>()?
        } else {
            s.split('.')
                .map(|p| p.parse::<Letter>().map_err(|_| bad()))
                .collect::<Result<_>>()?
        };
        Word::checked(letters, d)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = if self.max_letter() <= 9 { 9 } else { 10 };
        write!(f, "Word({})", self.encode(d))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = if self.max_letter() <= 9 { 9 } else { 10 };
        f.write_str(&self.encode(d))
    }
}

impl From<&[Letter]> for Word {
    fn from(letters: &[Letter]) -> Self {
        Word(letters.to_vec())
    }
}

/// Number of words of length exactly `len`.
pub fn level_size(d: usize, len: usize) -> usize {
    d.pow(len as u32)
}

/// Number of words of length strictly less than `len`.
pub fn level_offset(d: usize, len: usize) -> usize {
    if d == 1 {
        len
    } else {
        (d.pow(len as u32) - 1) / (d - 1)
    }
}

/// Number of words of length at most `n`.
pub fn word_count(d: usize, n: usize) -> usize {
    level_offset(d, n + 1)
}

/// All words of length at most `n` in degree-lexicographic order.
pub fn enumerate_words(d: usize, n: usize) -> Vec<Word> {
    assert!(d >= 1, "need at least one generator");
    let mut out = Vec::with_capacity(word_count(d, n));
    out.push(Word::empty());
    let mut start = 0;
    for _ in 0..n {
        let end = out.len();
        for i in start..end {
            for k in 1..=d as Letter {
                let w = out[i].append(k);
                out.push(w);
            }
        }
        start = end;
    }
    out
}

/// How `(L^α)* L^β` reduces under `L_k* L_j = δ_kj I`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PairReduction {
    /// `β = α·γ`, so the product is `L^γ`.
    RightResidual(Word),
    /// `α = β·γ` with `γ ≠ ∅`, so the product is `(L^γ)*`.
    LeftResidual(Word),
    Zero,
}

impl PairReduction {
    /// The same reduction for the swapped pair.
    pub fn swapped(self) -> PairReduction {
        match self {
            PairReduction::RightResidual(g) if g.is_empty() => PairReduction::RightResidual(g),
            PairReduction::RightResidual(g) => PairReduction::LeftResidual(g),
            PairReduction::LeftResidual(g) => PairReduction::RightResidual(g),
            PairReduction::Zero => PairReduction::Zero,
        }
    }
}

pub fn reduce_pair(alpha: &Word, beta: &Word) -> PairReduction {
    if let Some(gamma) = beta.strip_prefix(alpha) {
        PairReduction::RightResidual(gamma)
    } else if let Some(gamma) = alpha.strip_prefix(beta) {
        PairReduction::LeftResidual(gamma)
    } else {
        PairReduction::Zero
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        Word::decode(s, 9).unwrap()
    }

    #[test]
    fn enumerates_degree_lex() {
        let words: Vec<String> = enumerate_words(2, 2).iter().map(|w| w.encode(2)).collect();
        assert_eq!(words, ["e", "1", "2", "11", "12", "21", "22"]);
        let words: Vec<String> = enumerate_words(1, 3).iter().map(|w| w.encode(1)).collect();
        assert_eq!(words, ["e", "1", "11", "111"]);
        assert_eq!(enumerate_words(3, 2).len(), 13);
    }

    #[test]
    fn counts_match_closed_form() {
        for d in 1usize..5 {
            for n in 0..6 {
                let expected = if d == 1 {
                    n + 1
                } else {
                    (d.pow(n as u32 + 1) - 1) / (d - 1)
                };
                assert_eq!(enumerate_words(d, n).len(), expected);
                assert_eq!(word_count(d, n), expected);
            }
        }
    }

    #[test]
    fn index_agrees_with_enumeration() {
        for d in 1..4 {
            for (i, word) in enumerate_words(d, 4).iter().enumerate() {
                assert_eq!(word.index(d), i);
            }
        }
    }

    #[test]
    fn concat_and_transpose() {
        assert_eq!(w("12").concat(&w("2")), w("122"));
        assert_eq!(Word::empty().concat(&w("21")), w("21"));
        assert_eq!(w("1").concat(&Word::empty()), w("1"));
        assert_eq!(w("12").transpose(), w("21"));
        assert_eq!(Word::empty().transpose(), Word::empty());
        assert_eq!(w("112").transpose(), w("211"));
    }

    #[test]
    fn reduce_pair_examples() {
        assert_eq!(reduce_pair(&w("1"), &w("12")), PairReduction::RightResidual(w("2")));
        assert_eq!(reduce_pair(&w("11"), &w("1")), PairReduction::LeftResidual(w("1")));
        assert_eq!(reduce_pair(&w("1"), &w("2")), PairReduction::Zero);
        assert_eq!(
            reduce_pair(&w("21"), &w("21")),
            PairReduction::RightResidual(Word::empty())
        );
    }

    #[test]
    fn encoding_round_trip_and_formats() {
        assert_eq!(w("121").encode(2), "121");
        assert_eq!(w("121").encode(12), "1.2.1");
        assert_eq!(Word::empty().encode(3), "e");
        assert_eq!(Word::decode("10.2.11", 12).unwrap().letters(), &[10, 2, 11]);
        assert!(Word::decode("13", 2).is_err());
        assert!(Word::decode("1x", 2).is_err());
        assert!(Word::checked(vec![0], 2).is_err());
    }

    fn arb_word(d: Letter, max_len: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec(1..=d, 0..=max_len).prop_map(Word::new)
    }

    proptest! {
        #[test]
        fn reduce_pair_is_mirror_symmetric(a in arb_word(3, 5), b in arb_word(3, 5)) {
            prop_assert_eq!(reduce_pair(&a, &b).swapped(), reduce_pair(&b, &a));
        }

        #[test]
        fn prefix_extension_reduces_right(a in arb_word(3, 5), g in arb_word(3, 5)) {
            prop_assert_eq!(reduce_pair(&a, &a.concat(&g)), PairReduction::RightResidual(g));
        }

        #[test]
        fn transpose_is_involution(a in arb_word(4, 8)) {
            prop_assert_eq!(a.transpose().transpose(), a);
        }

        #[test]
        fn order_respects_length(a in arb_word(3, 6), b in arb_word(3, 6)) {
            if a.len() < b.len() {
                prop_assert!(a < b);
            }
            prop_assert_eq!(a.cmp(&b) == Ordering::Less, a.index(3) < b.index(3));
        }

        #[test]
        fn encode_decode_round_trip(a in arb_word(12, 6)) {
            prop_assert_eq!(Word::decode(&a.encode(12), 12).unwrap(), a.clone());
            let small = Word::new(a.letters().iter().map(|&l| 1 + l % 9).collect());
            prop_assert_eq!(Word::decode(&small.encode(9), 9).unwrap(), small);
        }
    }
}
