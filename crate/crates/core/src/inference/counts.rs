use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{edge_letter, edge_source, WordLength};
use crate::sequence::BinarySequence;

/// Edge traversal counts for word length `m`.
///
/// `n1[i]` counts `i -> (2i+1) mod 2^m`, `n0[i]` counts `i -> 2i mod 2^m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionCounts {
    m: WordLength,
    n0: Vec<u64>,
    n1: Vec<u64>,
}

impl TransitionCounts {
    pub fn zeros(m: WordLength) -> Self {
        TransitionCounts {
            m,
            n0: vec![0; m.num_words()],
            n1: vec![0; m.num_words()],
        }
    }

    pub fn new(m: WordLength, n0: Vec<u64>, n1: Vec<u64>) -> Result<Self> {
        for v in [&n0, &n1] {
            if v.len() != m.num_words() {
                return Err(Error::LengthMismatch {
                    expected: m.num_words(),
                    found: v.len(),
                });
            }
        }
        Ok(TransitionCounts { m, n0, n1 })
    }

    #[inline]
    pub fn word_length(&self) -> WordLength {
        self.m
    }

    pub fn n0(&self) -> &[u64] {
        &self.n0
    }

    pub fn n1(&self) -> &[u64] {
        &self.n1
    }

    /// Number of departures from word `i`.
    pub fn visits(&self, i: usize) -> u64 {
        self.n0[i] + self.n1[i]
    }

    /// Count of edge `k = 2 * source + letter`.
    pub fn edge_count(&self, k: usize) -> u64 {
        let i = edge_source(k);
        if edge_letter(k) == 1 {
            self.n1[i]
        } else {
            self.n0[i]
        }
    }

    pub fn total_transitions(&self) -> u64 {
        self.n0.iter().chain(&self.n1).sum()
    }

    /// Every count multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Self {
        TransitionCounts {
            m: self.m,
            n0: self.n0.iter().map(|c| c * factor).collect(),
            n1: self.n1.iter().map(|c| c * factor).collect(),
        }
    }

    fn record(&mut self, word: usize, letter: u8) {
        if letter == 1 {
            self.n1[word] += 1;
        } else {
            self.n0[word] += 1;
        }
    }
}

/// Sliding-window counts over each gap-free segment; a segment of length `L`
/// contributes `max(L - m, 0)` transitions.
pub fn count_transitions(seq: &BinarySequence, m: WordLength) -> TransitionCounts {
    count_from(seq, m, m.get() as usize)
}

/// Counts only the transitions whose predicted letter sits at position
/// `offset` or later (0-based) inside its segment, so that several word
/// lengths can be scored on exactly the same letters. `offset` below `m` is
/// raised to `m`.
pub fn count_transitions_aligned(seq: &BinarySequence, m: WordLength, offset: usize) -> TransitionCounts {
    count_from(seq, m, offset.max(m.get() as usize))
}

fn count_from(seq: &BinarySequence, m: WordLength, first: usize) -> TransitionCounts {
    let mut counts = TransitionCounts::zeros(m);
    let mask = m.mask();
    let width = m.get() as usize;
    for seg in seq.segments() {
        if seg.len() <= first {
            continue;
        }
        let mut word = seg[first - width..first]
            .iter()
            .fold(0usize, |w, &b| (w << 1) | b as usize);
        for &b in &seg[first..] {
            counts.record(word, b);
            word = ((word << 1) | b as usize) & mask;
        }
    }
    counts
}
