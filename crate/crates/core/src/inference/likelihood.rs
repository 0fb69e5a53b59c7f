use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{TransitionTable, WordLength};

use super::counts::TransitionCounts;

pub(crate) fn check_same_m(a: WordLength, b: WordLength) -> Result<()> {
    if a != b {
        return Err(Error::WordLengthMismatch {
            left: a.get(),
            right: b.get(),
        });
    }
    Ok(())
}

/// Log-likelihood of the counts, conditional on the first word of each
/// segment: `sum_i n0_i ln(1 - p_i) + n1_i ln(p_i)`.
///
/// Returns `-inf` when an observed edge has probability zero.
pub fn log_likelihood(table: &TransitionTable, counts: &TransitionCounts) -> Result<f64> {
    check_same_m(table.word_length(), counts.word_length())?;
    let mut total = 0.0;
    for (i, &p) in table.probabilities().iter().enumerate() {
        for (n, q) in [(counts.n0()[i], 1.0 - p), (counts.n1()[i], p)] {
            if n > 0 {
                total += n as f64 * q.ln();
            }
        }
    }
    Ok(total)
}

/// Maximum-likelihood estimate for one free edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeEstimate {
    pub visits: u64,
    /// `None` when the source word was never left.
    pub estimate: Option<f64>,
    /// Square root of the inverse observed information `n0/(1-p)^2 + n1/p^2`.
    pub std_error: Option<f64>,
}

impl EdgeEstimate {
    /// Wald interval clipped to `[0, 1]`.
    pub fn wald_interval(&self, z: f64) -> Option<(f64, f64)> {
        let (p, se) = (self.estimate?, self.std_error?);
        Some(((p - z * se).max(0.0), (p + z * se).min(1.0)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleFit {
    pub m: WordLength,
    pub edges: Vec<EdgeEstimate>,
}

impl MleFit {
    /// The fitted table, or `None` if any edge lacks data.
    pub fn table(&self) -> Option<TransitionTable> {
        let p: Option<Vec<f64>> = self.edges.iter().map(|e| e.estimate).collect();
        TransitionTable::new(self.m, p?).ok()
    }
}

pub fn mle(counts: &TransitionCounts) -> MleFit {
    let edges = (0..counts.word_length().num_words())
        .map(|i| {
            let (n0, n1) = (counts.n0()[i], counts.n1()[i]);
            let visits = n0 + n1;
            if visits == 0 {
                return EdgeEstimate {
                    visits,
                    estimate: None,
                    std_error: None,
                };
            }
            let p = n1 as f64 / visits as f64;
            // n0/(1-p)^2 + n1/p^2 collapses to visits / (p (1 - p))
            let se = (p * (1.0 - p) / visits as f64).sqrt();
            EdgeEstimate {
                visits,
                estimate: Some(p),
                std_error: Some(se),
            }
        })
        .collect();
    MleFit {
        m: counts.word_length(),
        edges,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::count_transitions;
    use crate::sequence::BinarySequence;

    fn wl(m: u32) -> WordLength {
        WordLength::new(m).unwrap()
    }

    #[test]
    fn likelihood_examples() {
        let t = TransitionTable::new(wl(2), vec![0.9, 0.25, 0.75, 0.1]).unwrap();
        assert_eq!(log_likelihood(&t, &TransitionCounts::zeros(wl(2))).unwrap(), 0.0);

        let c = count_transitions(&BinarySequence::from_str_letters("00111").unwrap(), wl(2));
        let expected = 0.9f64.ln() + 0.25f64.ln() + 0.1f64.ln();
        assert!((log_likelihood(&t, &c).unwrap() - expected).abs() < 1e-15);

        let fair = TransitionTable::fair(wl(1));
        let c = count_transitions(&BinarySequence::from_str_letters("0110100").unwrap(), wl(1));
        assert!((log_likelihood(&fair, &c).unwrap() - 6.0 * 0.5f64.ln()).abs() < 1e-14);

        assert!(log_likelihood(&fair, &TransitionCounts::zeros(wl(2))).is_err());
    }

    #[test]
    fn zero_probability_gives_neg_infinity() {
        let t = TransitionTable::new(wl(1), vec![0.0, 0.5]).unwrap();
        let c = count_transitions(&BinarySequence::from_str_letters("01").unwrap(), wl(1));
        assert_eq!(log_likelihood(&t, &c).unwrap(), f64::NEG_INFINITY);
        // unobserved zero-probability edges are fine
        let c = count_transitions(&BinarySequence::from_str_letters("000").unwrap(), wl(1));
        assert_eq!(log_likelihood(&t, &c).unwrap(), 0.0);
    }

    #[test]
    fn mle_examples() {
        let c = TransitionCounts::new(wl(1), vec![1, 0], vec![3, 0]).unwrap();
        let fit = mle(&c);
        assert_eq!(fit.edges[0].estimate, Some(0.75));
        assert_eq!(fit.edges[1].estimate, None);
        assert_eq!(fit.edges[1].std_error, None);
        assert!(fit.table().is_none());
        let se = fit.edges[0].std_error.unwrap();
        let info = 1.0 / 0.25f64.powi(2) + 3.0 / 0.75f64.powi(2);
        assert!((se - info.powf(-0.5)).abs() < 1e-15);

        let all_zero = mle(&TransitionCounts::zeros(wl(2)));
        assert!(all_zero.edges.iter().all(|e| e.estimate.is_none()));
    }
}
