//! Exact joint law of `n` letters emitted by a de Bruijn process, and
//! next-letter prediction.
//!
//! The process starts from a latent word drawn from the stationary
//! distribution and every observed letter is a transition output, so
//!
//! ```text
//! P(x_1..x_n) = sum_j pi(j) * prod_t P(append x_t | current word)
//! ```
//!
//! evaluated by a forward pass over the `2^m` words in `O(2^m n)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::TransitionTable;
use crate::process::{stationary_distribution, StationaryDistribution};
use crate::sequence::check_letters;

/// Largest `n` accepted by the indexed form.
pub const MAX_INDEXED_LENGTH: u32 = 24;

/// Letters to evaluate under a table.
#[derive(Debug, Clone, PartialEq)]
pub struct JointQuery {
    pub letters: Vec<u8>,
    pub table: TransitionTable,
}

/// A table together with its stationary distribution.
#[derive(Debug, Clone)]
pub struct JointDistribution {
    table: TransitionTable,
    stationary: StationaryDistribution,
}

impl JointDistribution {
    pub fn new(table: &TransitionTable) -> Result<Self> {
        Ok(JointDistribution {
            table: table.clone(),
            stationary: stationary_distribution(table)?,
        })
    }

    pub fn table(&self) -> &TransitionTable {
        &self.table
    }

    pub fn stationary(&self) -> &StationaryDistribution {
        &self.stationary
    }

    /// `P(X_1 = x_1, ..., X_n = x_n)`. Letters must be 0 or 1; `n` may be
    /// smaller than the word length.
    pub fn probability(&self, letters: &[u8]) -> f64 {
        let k = self.table.num_words();
        let mut alpha = self.stationary.pi.clone();
        let mut next = vec![0.0; k];
        for &x in letters {
            step(&self.table, &alpha, &mut next, Some(x));
            std::mem::swap(&mut alpha, &mut next);
        }
        alpha.iter().sum()
    }

    /// Natural log of [`probability`](Self::probability), rescaling at each
    /// step so long sequences do not underflow.
    pub fn ln_probability(&self, letters: &[u8]) -> f64 {
        let k = self.table.num_words();
        let mut alpha = self.stationary.pi.clone();
        let mut next = vec![0.0; k];
        let mut log_scale = 0.0;
        for &x in letters {
            step(&self.table, &alpha, &mut next, Some(x));
            std::mem::swap(&mut alpha, &mut next);
            let s: f64 = alpha.iter().sum();
            if s == 0.0 {
                return f64::NEG_INFINITY;
            }
            alpha.iter_mut().for_each(|a| *a /= s);
            log_scale += s.ln();
        }
        log_scale
    }

    /// Probability of the `n`-letter sequence whose binary representation is
    /// `i` (first letter most significant), evaluated term by term from the
    /// closed indexed product: a sum over the latent start word `j` of the
    /// `min(m, n)` boundary transitions out of `j` followed by the interior
    /// transitions between consecutive windows of `i`.
    pub fn probability_indexed(&self, n: u32, i: u64) -> Result<f64> {
        if n == 0 || n > MAX_INDEXED_LENGTH {
            return Err(Error::InvalidArgument(format!(
                "indexed length must be in 1..={MAX_INDEXED_LENGTH}, got {n}"
            )));
        }
        let bound = 1u64 << n;
        if i >= bound {
            return Err(Error::IndexOutOfRange { index: i, bound });
        }
        let m = self.table.word_length().get();
        let words = 1u64 << m;
        // leading k letters of i as an integer
        let prefix = |k: u32| i >> (n - k);
        let modp = |x: u64, e: u32| x % (1u64 << e);
        let mut total = 0.0;
        for j in 0..words {
            let mut term = self.stationary.pi[j as usize];
            for k in 0..m.min(n) {
                let source = (1u64 << k) * modp(j, m - k) + modp(prefix(k), m);
                let target = (1u64 << (k + 1)) * modp(j, m - k - 1) + modp(prefix(k + 1), m);
                term *= self.table.transition(source as usize, target as usize);
            }
            for s in m..n {
                let source = modp(prefix(s), m);
                let target = modp(prefix(s + 1), m);
                term *= self.table.transition(source as usize, target as usize);
            }
            total += term;
        }
        Ok(total)
    }

    /// Probability that the next letter is 1 given `history` (oldest first,
    /// `None` for a missing observation).
    pub fn predict_next(&self, history: &[Option<u8>], mode: PredictMode) -> Result<f64> {
        check_history(history, self.table.word_length().get() as usize, mode)?;
        match mode {
            PredictMode::Conditional => Ok(filtered_next(
                &self.table,
                &self.stationary.pi,
                history,
            )?),
            PredictMode::WindowMarginal => Ok(marginal_next(
                &self.table,
                history,
                self.stationary.letter_marginal(),
            )),
        }
    }
}

fn step(table: &TransitionTable, alpha: &[f64], next: &mut [f64], letter: Option<u8>) {
    let k = alpha.len();
    next.iter_mut().for_each(|v| *v = 0.0);
    for (w, &a) in alpha.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let zero = (w << 1) & (k - 1);
        match letter {
            Some(x) => next[zero | x as usize] += a * table.letter_probability(w, x),
            None => {
                next[zero] += a * table.letter_probability(w, 0);
                next[zero | 1] += a * table.letter_probability(w, 1);
            }
        }
    }
}

/// `P(X_1..X_n = letters)` under `q.table`.
pub fn sequence_probability(q: &JointQuery) -> Result<f64> {
    check_letters(&q.letters)?;
    Ok(JointDistribution::new(&q.table)?.probability(&q.letters))
}

/// Log-space variant of [`sequence_probability`].
pub fn sequence_ln_probability(q: &JointQuery) -> Result<f64> {
    check_letters(&q.letters)?;
    Ok(JointDistribution::new(&q.table)?.ln_probability(&q.letters))
}

pub fn sequence_probability_indexed(table: &TransitionTable, n: u32, i: u64) -> Result<f64> {
    JointDistribution::new(table)?.probability_indexed(n, i)
}

/// How the conditioning word for a prediction is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredictMode {
    /// Exact conditional probability given every observed letter; missing
    /// letters are integrated out under the process.
    #[default]
    Conditional,
    /// Only the last `m` slots are used; each missing slot in that window is
    /// replaced by a mixture over the stationary letter probabilities, treating
    /// the missing letters as independent.
    WindowMarginal,
}

fn check_history(history: &[Option<u8>], m: usize, mode: PredictMode) -> Result<()> {
    for (position, s) in history.iter().enumerate() {
        if let Some(v) = *s {
            if v > 1 {
                return Err(Error::InvalidLetter { position, value: v });
            }
        }
    }
    let needed = match mode {
        PredictMode::Conditional => m,
        PredictMode::WindowMarginal => 1,
    };
    if history.len() < needed {
        return Err(Error::HistoryTooShort {
            needed,
            found: history.len(),
        });
    }
    Ok(())
}

fn filtered_next(table: &TransitionTable, pi: &[f64], history: &[Option<u8>]) -> Result<f64> {
    let k = table.num_words();
    let mut alpha = pi.to_vec();
    let mut next = vec![0.0; k];
    for &slot in history {
        step(table, &alpha, &mut next, slot);
        std::mem::swap(&mut alpha, &mut next);
        let s: f64 = alpha.iter().sum();
        if s == 0.0 {
            return Err(Error::InvalidArgument(
                "history has probability zero under this table".into(),
            ));
        }
        alpha.iter_mut().for_each(|a| *a /= s);
    }
    Ok(alpha
        .iter()
        .zip(table.probabilities())
        .map(|(a, p)| a * p)
        .sum())
}

/// Window-marginal prediction with an explicit letter distribution
/// `[P(0), P(1)]` for the missing slots.
pub fn marginal_next(table: &TransitionTable, history: &[Option<u8>], letter_marginal: [f64; 2]) -> f64 {
    let m = table.word_length().get() as usize;
    let start = history.len().saturating_sub(m);
    let mut window = vec![None; m - (history.len() - start)];
    window.extend_from_slice(&history[start..]);
    // distribution over the conditioning word
    let mut words: Vec<(usize, f64)> = vec![(0, 1.0)];
    for slot in window {
        words = words
            .into_iter()
            .flat_map(|(w, weight)| {
                let options: Vec<(usize, f64)> = match slot {
                    Some(x) => vec![((w << 1) | x as usize, weight)],
                    None => vec![
                        (w << 1, weight * letter_marginal[0]),
                        ((w << 1) | 1, weight * letter_marginal[1]),
                    ],
                };
                options
            })
            .collect();
    }
    let p = table.probabilities();
    words.iter().map(|&(w, weight)| weight * p[w]).sum()
}

/// Next-letter probability. `Conditional` with the last `m` letters observed
/// needs no stationary solve and works for any table.
pub fn predict_next(table: &TransitionTable, history: &[Option<u8>], mode: PredictMode) -> Result<f64> {
    let m = table.word_length().get() as usize;
    check_history(history, m, mode)?;
    if mode == PredictMode::Conditional {
        let tail = &history[history.len() - m..];
        if let Some(letters) = tail.iter().copied().collect::<Option<Vec<u8>>>() {
            let w = letters.iter().fold(0usize, |w, &b| (w << 1) | b as usize);
            return Ok(table.probabilities()[w]);
        }
    }
    JointDistribution::new(table)?.predict_next(history, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WordLength;

    fn table(m: u32, p: &[f64]) -> TransitionTable {
        TransitionTable::new(WordLength::new(m).unwrap(), p.to_vec()).unwrap()
    }

    fn letters_of(i: u64, n: u32) -> Vec<u8> {
        (0..n).map(|t| ((i >> (n - 1 - t)) & 1) as u8).collect()
    }

    #[test]
    fn fair_coin_is_iid() {
        let d = JointDistribution::new(&table(1, &[0.5, 0.5])).unwrap();
        for n in 1..8u32 {
            for i in 0..(1u64 << n) {
                let x = letters_of(i, n);
                assert!((d.probability(&x) - 0.5f64.powi(n as i32)).abs() < 1e-15);
            }
        }
        assert_eq!(d.probability_indexed(3, 5).unwrap(), 0.125);
    }

    #[test]
    fn worked_example_101() {
        let t = table(2, &[0.9, 0.25, 0.75, 0.1]);
        let d = JointDistribution::new(&t).unwrap();
        let pi = &d.stationary().pi;
        let p = |s: usize, e: usize| t.transition(s, e);
        let expansion = pi[0] * p(0, 1) * p(1, 2) * p(2, 1)
            + pi[1] * p(1, 3) * p(3, 2) * p(2, 1)
            + pi[2] * p(2, 1) * p(1, 2) * p(2, 1)
            + pi[3] * p(3, 3) * p(3, 2) * p(2, 1);
        assert!((d.probability(&[1, 0, 1]) - expansion).abs() < 1e-15);
        assert!((d.probability_indexed(3, 5).unwrap() - expansion).abs() < 1e-15);
    }

    #[test]
    fn ln_probability_matches_for_short_and_survives_long() {
        let t = table(2, &[0.9, 0.25, 0.75, 0.1]);
        let d = JointDistribution::new(&t).unwrap();
        let x = [1, 0, 1, 1, 0, 0, 1, 0];
        assert!((d.ln_probability(&x) - d.probability(&x).ln()).abs() < 1e-12);
        let long: Vec<u8> = (0..5000).map(|t| (t % 2) as u8).collect();
        assert!(d.probability(&long) < 1e-300);
        assert!(d.ln_probability(&long).is_finite());
        assert!(d.ln_probability(&[0, 0, 0, 0]).is_finite());
    }

    #[test]
    fn indexed_bounds() {
        let d = JointDistribution::new(&table(2, &[0.5; 4])).unwrap();
        assert!(d.probability_indexed(3, 8).is_err());
        assert!(d.probability_indexed(0, 0).is_err());
        assert!(d.probability_indexed(25, 0).is_err());
    }

    #[test]
    fn short_queries_marginalize_stationary_words() {
        let t = table(3, &[0.1, 0.7, 0.5, 0.8, 0.2, 0.5, 0.3, 0.9]);
        let d = JointDistribution::new(&t).unwrap();
        let pi = &d.stationary().pi;
        // P(x1 x2 = "10") = sum over words whose last two letters are 10
        let expected = pi[0b010] + pi[0b110];
        assert!((d.probability(&[1, 0]) - expected).abs() < 1e-14);
        assert!((d.probability_indexed(2, 0b10).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn prediction_modes() {
        let (a, b) = (0.3, 0.8);
        let t = table(1, &[a, b]);
        for mode in [PredictMode::Conditional, PredictMode::WindowMarginal] {
            assert!((predict_next(&t, &[Some(0), Some(1)], mode).unwrap() - b).abs() < 1e-15);
        }
        let t2 = table(2, &[0.9, 0.25, 0.75, 0.1]);
        assert_eq!(predict_next(&t2, &[Some(1), Some(0)], PredictMode::Conditional).unwrap(), 0.75);
        assert!(matches!(
            predict_next(&t2, &[Some(1)], PredictMode::Conditional),
            Err(Error::HistoryTooShort { needed: 2, found: 1 })
        ));
        assert!(predict_next(&t2, &[], PredictMode::WindowMarginal).is_err());
        // gap in the window: window-marginal mixes with stationary letter odds
        let d = JointDistribution::new(&t2).unwrap();
        let [q0, q1] = d.stationary().letter_marginal();
        let got = predict_next(&t2, &[Some(1), None, Some(1)], PredictMode::WindowMarginal).unwrap();
        assert!((got - (0.25 * q0 + 0.1 * q1)).abs() < 1e-15);
    }

    #[test]
    fn conditional_filter_matches_direct_lookup() {
        let t = table(2, &[0.9, 0.25, 0.75, 0.1]);
        let d = JointDistribution::new(&t).unwrap();
        let h = [Some(0), Some(1), Some(1), Some(0)];
        assert!((d.predict_next(&h, PredictMode::Conditional).unwrap() - 0.75).abs() < 1e-14);
        // with a gap the filter equals the ratio of joint probabilities
        let h = [Some(1), None, Some(1)];
        let num: f64 = [0u8, 1].iter().map(|&g| d.probability(&[1, g, 1, 1])).sum();
        let den: f64 = [0u8, 1].iter().map(|&g| d.probability(&[1, g, 1])).sum();
        let got = d.predict_next(&h, PredictMode::Conditional).unwrap();
        assert!((got - num / den).abs() < 1e-14);
    }
}
