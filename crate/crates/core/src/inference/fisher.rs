//! Expected edge counts and Fisher information under the exact joint law.
//!
//! For the edge-level log-likelihood `n_k ln p_k`, the second derivative is
//! `-n_k / p_k^2`, so `I(p_k) = E[n_k] / p_k^2`. The expectation is over all
//! length-`n` sequences drawn from the stationary process.

use crate::distribution::JointDistribution;
use crate::error::{Error, Result};
use crate::graph::{edge_letter, edge_source, TransitionTable};
use crate::process::stationary_distribution;

/// Largest `n` accepted by [`expected_transition_count_indexed`].
pub const MAX_INDEXED_EXPECTATION_LENGTH: u32 = 16;

fn check_edge(table: &TransitionTable, n: usize, k: usize) -> Result<()> {
    let m = table.word_length();
    if n < m.get() as usize + 1 {
        return Err(Error::InvalidArgument(format!(
            "sequence length {n} must be at least m + 1 = {}",
            m.get() + 1
        )));
    }
    if k >= m.num_edges() {
        return Err(Error::IndexOutOfRange {
            index: k as u64,
            bound: m.num_edges() as u64,
        });
    }
    Ok(())
}

/// `(E[n0_i], E[n1_i])` for every word `i` over sequences of length `n`, by a
/// forward pass over word marginals.
pub fn expected_letter_counts(table: &TransitionTable, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = table.word_length().get() as usize;
    let k = table.num_words();
    let mut alpha = stationary_distribution(table)?.pi;
    let mut next = vec![0.0; k];
    let mut e0 = vec![0.0; k];
    let mut e1 = vec![0.0; k];
    for t in 1..=n {
        // after t-1 emitted letters the current word is fully observed once t-1 >= m
        let counted = t > m;
        next.iter_mut().for_each(|v| *v = 0.0);
        for (w, &a) in alpha.iter().enumerate() {
            let zero = (w << 1) & (k - 1);
            let q0 = a * table.letter_probability(w, 0);
            let q1 = a * table.letter_probability(w, 1);
            next[zero] += q0;
            next[zero | 1] += q1;
            if counted {
                e0[w] += q0;
                e1[w] += q1;
            }
        }
        std::mem::swap(&mut alpha, &mut next);
    }
    Ok((e0, e1))
}

/// `E[n_k]` for edge `k = 2 * source + letter` over sequences of length `n`.
pub fn expected_transition_count(table: &TransitionTable, n: usize, k: usize) -> Result<f64> {
    check_edge(table, n, k)?;
    let (e0, e1) = expected_letter_counts(table, n)?;
    let i = edge_source(k);
    Ok(if edge_letter(k) == 1 { e1[i] } else { e0[i] })
}

/// `E[n_k]` as the indexed double sum over window offsets `i` and the
/// remaining letters `j`:
///
/// ```text
/// sum_{i=0}^{n-m-1} sum_{j=0}^{2^(n-m-1)-1} P_n(2^(m+1) j + 2^i k - (2^(m+1) - 1)(j mod 2^i))
/// ```
///
/// where `P_n(x)` is the probability of the sequence with binary
/// representation `x`. Exponential in `n`; kept as a cross-check.
pub fn expected_transition_count_indexed(table: &TransitionTable, n: usize, k: usize) -> Result<f64> {
    check_edge(table, n, k)?;
    if n > MAX_INDEXED_EXPECTATION_LENGTH as usize {
        return Err(Error::BudgetExceeded(format!(
            "indexed expectation limited to n <= {MAX_INDEXED_EXPECTATION_LENGTH}"
        )));
    }
    let joint = JointDistribution::new(table)?;
    let m = table.word_length().get() as u64;
    let n = n as u64;
    let block = 1u64 << (m + 1);
    let k = k as u64;
    let mut total = 0.0;
    for i in 0..(n - m) {
        for j in 0..(1u64 << (n - m - 1)) {
            let low = j % (1u64 << i);
            let index = block * j + (1u64 << i) * k - (block - 1) * low;
            total += joint.probability_indexed(n as u32, index)?;
        }
    }
    Ok(total)
}

/// `I(p_k) = E[n_k] / p_k^2` for edge `k`.
pub fn fisher_information(table: &TransitionTable, n: usize, k: usize) -> Result<f64> {
    check_edge(table, n, k)?;
    let p = table.edge_probability(k);
    if p == 0.0 {
        return Err(Error::InvalidArgument(format!("edge {k} has probability zero")));
    }
    Ok(expected_transition_count(table, n, k)? / (p * p))
}

/// Information about the free parameter `p_i` (append-1 probability of word
/// `i`): `E[n0_i]/(1-p_i)^2 + E[n1_i]/p_i^2`. Terms with zero expected count
/// contribute nothing.
pub fn fisher_information_free(table: &TransitionTable, n: usize, word: usize) -> Result<f64> {
    check_edge(table, n, 2 * word)?;
    let (e0, e1) = expected_letter_counts(table, n)?;
    let p = table.probabilities()[word];
    let mut info = 0.0;
    if e0[word] > 0.0 {
        info += e0[word] / ((1.0 - p) * (1.0 - p));
    }
    if e1[word] > 0.0 {
        info += e1[word] / (p * p);
    }
    Ok(info)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WordLength;

    fn table(m: u32, p: &[f64]) -> TransitionTable {
        TransitionTable::new(WordLength::new(m).unwrap(), p.to_vec()).unwrap()
    }

    #[test]
    fn fair_coin_expected_counts() {
        let t = TransitionTable::fair(WordLength::new(1).unwrap());
        for k in 0..4 {
            assert!((expected_transition_count(&t, 3, k).unwrap() - 0.5).abs() < 1e-15);
            assert!((expected_transition_count_indexed(&t, 3, k).unwrap() - 0.5).abs() < 1e-15);
            assert!((fisher_information(&t, 3, k).unwrap() - 2.0).abs() < 1e-14);
        }
        assert!((fisher_information_free(&t, 3, 0).unwrap() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn stationary_closed_form() {
        let t = table(3, &[0.1, 0.7, 0.5, 0.8, 0.2, 0.5, 0.3, 0.9]);
        let pi = stationary_distribution(&t).unwrap().pi;
        let n = 17;
        for k in 0..16 {
            let closed = (n - 3) as f64 * pi[k >> 1] * t.edge_probability(k);
            let dp = expected_transition_count(&t, n, k).unwrap();
            assert!((dp - closed).abs() < 1e-12, "edge {k}: {dp} vs {closed}");
        }
    }

    #[test]
    fn n3_m2_edge_000() {
        let t = table(2, &[0.9, 0.25, 0.75, 0.1]);
        let joint = JointDistribution::new(&t).unwrap();
        let p000 = joint.probability(&[0, 0, 0]);
        assert!((expected_transition_count(&t, 3, 0).unwrap() - p000).abs() < 1e-15);
        let p = 1.0 - 0.9;
        assert!((fisher_information(&t, 3, 0).unwrap() - p000 / (p * p)).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let t = table(2, &[1.0, 0.5, 0.5, 0.5]);
        assert!(expected_transition_count(&t, 2, 0).is_err());
        assert!(expected_transition_count(&t, 5, 8).is_err());
        // edge 0 is 00 -> 00 with probability 0
        assert!(fisher_information(&t, 5, 0).is_err());
        assert!(fisher_information(&t, 5, 1).unwrap() >= 0.0);
        assert!(expected_transition_count_indexed(&t, 17, 0).is_err());
    }
}
