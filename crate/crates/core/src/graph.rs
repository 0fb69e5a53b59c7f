//! Binary de Bruijn words, their successor structure, and transition tables.
//!
//! A word of length `m` is stored as an integer in `[0, 2^m)` with the oldest
//! letter in the most significant bit, so `"10"` is word 2. Appending a letter
//! `b` to word `i` moves to `(2i + b) mod 2^m`.
//!
//! Edges are numbered `k = 2 * source + letter` for `k` in `[0, 2^(m+1))`;
//! the target of edge `k` is `k mod 2^m`, i.e. the (m+1)-letter window read
//! as an integer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upper bound on the word length.
pub const MAX_WORD_LENGTH: u32 = 10;

/// Number of letters per word, `1 <= m <= cap`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct WordLength(u32);

impl WordLength {
    pub fn new(m: u32) -> Result<Self> {
        Self::with_cap(m, MAX_WORD_LENGTH)
    }

    /// Validates against a caller-supplied cap instead of [`MAX_WORD_LENGTH`].
    /// Caps above 24 are clamped; word tables beyond that do not fit in memory.
    pub fn with_cap(m: u32, cap: u32) -> Result<Self> {
        let cap = cap.min(24);
        if m == 0 || m > cap {
            return Err(Error::WordLength { m, cap });
        }
        Ok(WordLength(m))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    /// `2^m`
    #[inline]
    pub fn num_words(self) -> usize {
        1usize << self.0
    }

    /// `2^(m+1)`
    #[inline]
    pub fn num_edges(self) -> usize {
        1usize << (self.0 + 1)
    }

    #[inline]
    pub(crate) fn mask(self) -> usize {
        self.num_words() - 1
    }

    /// All word lengths `1..=max`.
    pub fn range_to(max: WordLength) -> impl Iterator<Item = WordLength> {
        (1..=max.0).map(WordLength)
    }
}

impl TryFrom<u32> for WordLength {
    type Error = Error;
    fn try_from(m: u32) -> Result<Self> {
        WordLength::new(m)
    }
}

impl From<WordLength> for u32 {
    fn from(m: WordLength) -> u32 {
        m.0
    }
}

impl std::fmt::Display for WordLength {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An `m`-letter binary word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Word {
    index: usize,
    m: WordLength,
}

impl Word {
    pub fn new(index: usize, m: WordLength) -> Result<Self> {
        if index >= m.num_words() {
            return Err(Error::IndexOutOfRange {
                index: index as u64,
                bound: m.num_words() as u64,
            });
        }
        Ok(Word { index, m })
    }

    #[inline]
    pub fn index(self) -> usize {
        self.index
    }

    #[inline]
    pub fn len(self) -> WordLength {
        self.m
    }

    /// Letters oldest first.
    pub fn letters(self) -> Vec<u8> {
        decode_word(self)
    }

    /// Word reached by appending `letter`.
    #[inline]
    pub fn push(self, letter: u8) -> Word {
        Word {
            index: ((self.index << 1) | (letter as usize & 1)) & self.m.mask(),
            m: self.m,
        }
    }

    /// `(append-0, append-1)` successors.
    pub fn successors(self) -> (Word, Word) {
        (self.push(0), self.push(1))
    }
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in self.letters() {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Builds a word from `m` letters, oldest first.
pub fn encode_word(letters: &[u8], m: WordLength) -> Result<Word> {
    if letters.len() != m.get() as usize {
        return Err(Error::LengthMismatch {
            expected: m.get() as usize,
            found: letters.len(),
        });
    }
    let mut index = 0usize;
    for (position, &b) in letters.iter().enumerate() {
        if b > 1 {
            return Err(Error::InvalidLetter { position, value: b });
        }
        index = (index << 1) | b as usize;
    }
    Ok(Word { index, m })
}

pub fn decode_word(w: Word) -> Vec<u8> {
    let m = w.m.get();
    (0..m).map(|t| ((w.index >> (m - 1 - t)) & 1) as u8).collect()
}

pub fn successors(w: Word) -> (Word, Word) {
    w.successors()
}

/// Source word of edge `k`.
#[inline]
pub fn edge_source(k: usize) -> usize {
    k >> 1
}

/// Appended letter of edge `k`.
#[inline]
pub fn edge_letter(k: usize) -> u8 {
    (k & 1) as u8
}

#[inline]
pub fn edge_index(source: usize, letter: u8) -> usize {
    (source << 1) | (letter as usize & 1)
}

/// Validated transition probabilities of a de Bruijn process.
///
/// Only the append-1 probabilities `p[i]` are stored; the append-0 edge of
/// word `i` carries `1 - p[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionTable {
    m: WordLength,
    p: Vec<f64>,
}

impl TransitionTable {
    pub fn new(m: WordLength, p: Vec<f64>) -> Result<Self> {
        if p.len() != m.num_words() {
            return Err(Error::LengthMismatch {
                expected: m.num_words(),
                found: p.len(),
            });
        }
        for (index, &value) in p.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::ProbabilityOutOfRange { index, value });
            }
        }
        Ok(TransitionTable { m, p })
    }

    /// Uniform-letter table: every word appends 1 with probability one half.
    pub fn fair(m: WordLength) -> Self {
        TransitionTable {
            m,
            p: vec![0.5; m.num_words()],
        }
    }

    #[inline]
    pub fn word_length(&self) -> WordLength {
        self.m
    }

    #[inline]
    pub fn num_words(&self) -> usize {
        self.m.num_words()
    }

    /// Append-1 probabilities indexed by source word.
    #[inline]
    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    /// Probability of appending `letter` to word `source`.
    #[inline]
    pub fn letter_probability(&self, source: usize, letter: u8) -> f64 {
        let p1 = self.p[source];
        if letter == 1 {
            p1
        } else {
            1.0 - p1
        }
    }

    /// Probability of edge `k`.
    #[inline]
    pub fn edge_probability(&self, k: usize) -> f64 {
        self.letter_probability(edge_source(k), edge_letter(k))
    }

    /// Probability of moving from word `source` to word `target`; zero when
    /// `target` is not a successor of `source`.
    pub fn transition(&self, source: usize, target: usize) -> f64 {
        let mask = self.m.mask();
        let zero = (source << 1) & mask;
        let one = zero | 1;
        if target == one {
            self.p[source]
        } else if target == zero {
            1.0 - self.p[source]
        } else {
            0.0
        }
    }

    /// Dense row-major `2^m x 2^m` stochastic matrix.
    pub fn dense_matrix(&self) -> Vec<f64> {
        let k = self.num_words();
        let mut out = vec![0.0; k * k];
        for i in 0..k {
            let zero = (i << 1) & self.m.mask();
            out[i * k + zero] += 1.0 - self.p[i];
            out[i * k + zero + 1] += self.p[i];
        }
        out
    }
}

pub fn make_transition_table(m: WordLength, p: Vec<f64>) -> Result<TransitionTable> {
    TransitionTable::new(m, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wl(m: u32) -> WordLength {
        WordLength::new(m).unwrap()
    }

    #[test]
    fn encode_examples() {
        assert_eq!(encode_word(&[1, 0, 1], wl(3)).unwrap().index(), 5);
        assert_eq!(encode_word(&[0, 0], wl(2)).unwrap().index(), 0);
        assert_eq!(encode_word(&[1, 1, 1], wl(3)).unwrap().index(), 7);
    }

    #[test]
    fn encode_errors() {
        assert!(matches!(
            encode_word(&[1, 0], wl(3)),
            Err(Error::LengthMismatch { expected: 3, found: 2 })
        ));
        assert!(matches!(
            encode_word(&[1, 2], wl(2)),
            Err(Error::InvalidLetter { position: 1, value: 2 })
        ));
    }

    #[test]
    fn decode_examples() {
        assert_eq!(decode_word(Word::new(5, wl(3)).unwrap()), vec![1, 0, 1]);
        assert_eq!(decode_word(Word::new(0, wl(1)).unwrap()), vec![0]);
        assert_eq!(decode_word(Word::new(6, wl(3)).unwrap()), vec![1, 1, 0]);
        assert!(Word::new(8, wl(3)).is_err());
    }

    #[test]
    fn successor_examples() {
        let (a, b) = successors(Word::new(2, wl(2)).unwrap());
        assert_eq!((a.index(), b.index()), (0, 1));
        let (a, b) = successors(Word::new(3, wl(2)).unwrap());
        assert_eq!((a.index(), b.index()), (2, 3));
        let (a, b) = successors(Word::new(0, wl(3)).unwrap());
        assert_eq!((a.index(), b.index()), (0, 1));
    }

    #[test]
    fn word_length_cap() {
        assert!(WordLength::new(0).is_err());
        assert!(WordLength::new(10).is_ok());
        assert!(matches!(WordLength::new(11), Err(Error::WordLength { m: 11, cap: 10 })));
        assert!(WordLength::with_cap(12, 12).is_ok());
    }

    #[test]
    fn table_examples() {
        let t = make_transition_table(wl(2), vec![0.9, 0.25, 0.75, 0.1]).unwrap();
        // "10" -> "00" is the append-0 edge of word 2
        assert!((t.transition(2, 0) - 0.25).abs() < 1e-15);
        assert_eq!(t.transition(2, 1), 0.75);
        assert_eq!(t.transition(2, 3), 0.0);

        let fair = make_transition_table(wl(1), vec![0.5, 0.5]).unwrap();
        assert_eq!(fair, TransitionTable::fair(wl(1)));

        assert!(matches!(
            make_transition_table(wl(2), vec![0.9, 1.3, 0.5, 0.5]),
            Err(Error::ProbabilityOutOfRange { index: 1, .. })
        ));
        assert!(make_transition_table(wl(2), vec![0.5; 3]).is_err());
        assert!(make_transition_table(wl(2), vec![f64::NAN, 0.5, 0.5, 0.5]).is_err());
    }

    #[test]
    fn exhaustive_structure() {
        for m in 1..=MAX_WORD_LENGTH {
            let m = wl(m);
            let low = m.get() - 1;
            for i in 0..m.num_words() {
                let w = Word::new(i, m).unwrap();
                assert_eq!(encode_word(&w.letters(), m).unwrap(), w);
                let (a, b) = w.successors();
                // trailing m-1 letters of w are the leading m-1 of each successor
                let tail = i & ((1usize << low) - 1);
                assert_eq!(a.index() >> 1, tail);
                assert_eq!(b.index() >> 1, tail);
                assert_eq!(a.index() & 1, 0);
                assert_eq!(b.index() & 1, 1);
            }
        }
    }

    #[test]
    fn dense_rows_are_stochastic() {
        let t = TransitionTable::new(wl(3), vec![0.1, 0.7, 0.5, 0.8, 0.2, 0.5, 0.3, 0.9]).unwrap();
        let k = t.num_words();
        let dense = t.dense_matrix();
        for i in 0..k {
            let row = &dense[i * k..(i + 1) * k];
            assert_eq!(row.iter().filter(|&&x| x != 0.0).count(), 2);
            assert_eq!(row.iter().sum::<f64>(), 1.0);
            for (j, &x) in row.iter().enumerate() {
                assert_eq!(x, t.transition(i, j));
            }
        }
    }

    #[test]
    fn edge_numbering() {
        let m = wl(2);
        for k in 0..m.num_edges() {
            let src = edge_source(k);
            let target = Word::new(src, m).unwrap().push(edge_letter(k)).index();
            assert_eq!(target, k & m.mask());
            assert_eq!(edge_index(src, edge_letter(k)), k);
        }
    }
}
