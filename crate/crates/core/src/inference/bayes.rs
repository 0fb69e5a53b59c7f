//! Conjugate Beta inference, model evidence and word-length selection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{TransitionTable, WordLength};
use crate::sequence::BinarySequence;
use crate::stats::{beta_quantile, ln_gamma};

use super::counts::{count_transitions, count_transitions_aligned, TransitionCounts};
use super::likelihood::check_same_m;

/// Independent `Beta(alpha_i, beta_i)` priors on each append-1 probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaPrior {
    m: WordLength,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl BetaPrior {
    pub fn new(m: WordLength, alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        for v in [&alpha, &beta] {
            if v.len() != m.num_words() {
                return Err(Error::LengthMismatch {
                    expected: m.num_words(),
                    found: v.len(),
                });
            }
            if let Some(bad) = v.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "Beta prior parameters must be positive, got {bad}"
                )));
            }
        }
        Ok(BetaPrior { m, alpha, beta })
    }

    pub fn symmetric(m: WordLength, alpha: f64, beta: f64) -> Result<Self> {
        BetaPrior::new(m, vec![alpha; m.num_words()], vec![beta; m.num_words()])
    }

    /// `Beta(1, 1)` on every edge.
    pub fn uniform(m: WordLength) -> Self {
        BetaPrior::symmetric(m, 1.0, 1.0).expect("valid")
    }

    pub fn word_length(&self) -> WordLength {
        self.m
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }
}

/// Supplies a prior for any candidate word length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorRule {
    /// Same `Beta(alpha, beta)` on every edge, whatever `m`.
    Scalar { alpha: f64, beta: f64 },
    /// An explicit prior; only valid for its own word length.
    PerEdge(BetaPrior),
}

impl PriorRule {
    pub fn uniform() -> Self {
        PriorRule::Scalar {
            alpha: 1.0,
            beta: 1.0,
        }
    }

    pub fn prior_for(&self, m: WordLength) -> Result<BetaPrior> {
        match self {
            PriorRule::Scalar { alpha, beta } => BetaPrior::symmetric(m, *alpha, *beta),
            PriorRule::PerEdge(p) => {
                check_same_m(p.word_length(), m)?;
                Ok(p.clone())
            }
        }
    }
}

impl Default for PriorRule {
    fn default() -> Self {
        PriorRule::uniform()
    }
}

/// Posterior `Beta(alpha_i + n1_i, beta_i + n0_i)` for every edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSpec {
    pub m: WordLength,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// Edges whose source word was never left; their posterior is the prior.
    pub no_data: Vec<bool>,
}

/// Summary of one edge's posterior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgePosterior {
    pub alpha: f64,
    pub beta: f64,
    pub mean: f64,
    /// `None` when both shape parameters are at most one.
    pub mode: Option<f64>,
    pub lower: f64,
    pub upper: f64,
    pub no_data: bool,
}

impl PosteriorSpec {
    pub fn num_edges(&self) -> usize {
        self.alpha.len()
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.alpha[i] / (self.alpha[i] + self.beta[i])
    }

    pub fn mode(&self, i: usize) -> Option<f64> {
        let (a, b) = (self.alpha[i], self.beta[i]);
        match (a > 1.0, b > 1.0) {
            (true, true) => Some((a - 1.0) / (a + b - 2.0)),
            (false, true) => Some(0.0),
            (true, false) => Some(1.0),
            (false, false) => None,
        }
    }

    /// Equal-tailed credible interval at `level` (e.g. 0.95).
    pub fn credible_interval(&self, i: usize, level: f64) -> (f64, f64) {
        let tail = (1.0 - level) / 2.0;
        (
            beta_quantile(self.alpha[i], self.beta[i], tail),
            beta_quantile(self.alpha[i], self.beta[i], 1.0 - tail),
        )
    }

    pub fn summaries(&self, level: f64) -> Vec<EdgePosterior> {
        (0..self.num_edges())
            .map(|i| {
                let (lower, upper) = self.credible_interval(i, level);
                EdgePosterior {
                    alpha: self.alpha[i],
                    beta: self.beta[i],
                    mean: self.mean(i),
                    mode: self.mode(i),
                    lower,
                    upper,
                    no_data: self.no_data[i],
                }
            })
            .collect()
    }

    /// Table of posterior means.
    pub fn mean_table(&self) -> TransitionTable {
        TransitionTable::new(self.m, (0..self.num_edges()).map(|i| self.mean(i)).collect())
            .expect("means lie in (0, 1)")
    }
}

pub fn posterior(counts: &TransitionCounts, prior: &BetaPrior) -> Result<PosteriorSpec> {
    check_same_m(counts.word_length(), prior.word_length())?;
    let k = counts.word_length().num_words();
    Ok(PosteriorSpec {
        m: counts.word_length(),
        alpha: (0..k).map(|i| prior.alpha[i] + counts.n1()[i] as f64).collect(),
        beta: (0..k).map(|i| prior.beta[i] + counts.n0()[i] as f64).collect(),
        no_data: (0..k).map(|i| counts.visits(i) == 0).collect(),
    })
}

/// Log marginal likelihood of the counts under the prior, prior normalizing
/// constants included:
///
/// ```text
/// sum_i ln B(alpha_i + n1_i, beta_i + n0_i) - ln B(alpha_i, beta_i)
/// ```
pub fn log_evidence(counts: &TransitionCounts, prior: &BetaPrior) -> Result<f64> {
    check_same_m(counts.word_length(), prior.word_length())?;
    let mut total = 0.0;
    for i in 0..counts.word_length().num_words() {
        let (n0, n1) = (counts.n0()[i] as f64, counts.n1()[i] as f64);
        if n0 == 0.0 && n1 == 0.0 {
            continue;
        }
        let (a, b) = (prior.alpha[i], prior.beta[i]);
        total += ln_gamma(n0 + b) + ln_gamma(n1 + a) - ln_gamma(n0 + n1 + a + b)
            - (ln_gamma(b) + ln_gamma(a) - ln_gamma(a + b));
    }
    Ok(total)
}

/// Which letters each model is scored on when comparing word lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conditioning {
    /// Both models predict the same letters: those at position
    /// `max(m1, m2)` or later inside each segment.
    #[default]
    Aligned,
    /// Each model conditions on its own first `m` letters per segment.
    PerModel,
}

fn comparison_counts(
    seq: &BinarySequence,
    m1: WordLength,
    m2: WordLength,
    conditioning: Conditioning,
) -> (TransitionCounts, TransitionCounts) {
    match conditioning {
        Conditioning::PerModel => (count_transitions(seq, m1), count_transitions(seq, m2)),
        Conditioning::Aligned => {
            let offset = m1.get().max(m2.get()) as usize;
            (
                count_transitions_aligned(seq, m1, offset),
                count_transitions_aligned(seq, m2, offset),
            )
        }
    }
}

/// `ln P(X | m1) - ln P(X | m2)` with both models scored on the same letters.
pub fn log_bayes_factor(seq: &BinarySequence, m1: WordLength, m2: WordLength, rule: &PriorRule) -> Result<f64> {
    log_bayes_factor_with(seq, m1, m2, rule, Conditioning::Aligned)
}

pub fn log_bayes_factor_with(
    seq: &BinarySequence,
    m1: WordLength,
    m2: WordLength,
    rule: &PriorRule,
    conditioning: Conditioning,
) -> Result<f64> {
    if m1 == m2 {
        return Ok(0.0);
    }
    let (c1, c2) = comparison_counts(seq, m1, m2, conditioning);
    Ok(log_evidence(&c1, &rule.prior_for(m1)?)? - log_evidence(&c2, &rule.prior_for(m2)?)?)
}

/// Evidence table and pairwise Bayes factors over `m = 1..=m_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceReport {
    pub candidates: Vec<u32>,
    /// `ln P(X | m)` with each model conditioned on its own first word.
    pub log_evidence: Vec<f64>,
    pub transitions: Vec<u64>,
    /// `log_bayes_factors[a][b] = ln B_{m_a, m_b}`.
    pub log_bayes_factors: Vec<Vec<f64>>,
    /// Number of rivals each candidate beats by more than the tie tolerance.
    pub wins: Vec<usize>,
    pub conditioning: Conditioning,
    pub selected: u32,
}

impl EvidenceReport {
    pub fn log_bayes_factor(&self, m1: u32, m2: u32) -> Option<f64> {
        let a = self.candidates.iter().position(|&m| m == m1)?;
        let b = self.candidates.iter().position(|&m| m == m2)?;
        Some(self.log_bayes_factors[a][b])
    }
}

/// Log Bayes factors within this distance of zero count as ties.
pub const TIE_TOLERANCE: f64 = 1e-9;

pub fn select_word_length(seq: &BinarySequence, m_max: WordLength, rule: &PriorRule) -> Result<EvidenceReport> {
    select_word_length_with(seq, m_max, rule, Conditioning::Aligned)
}

/// Picks the word length that wins the most pairwise Bayes-factor
/// comparisons; ties go to the smaller `m`. Under [`Conditioning::PerModel`]
/// this is the argmax of the evidence.
pub fn select_word_length_with(
    seq: &BinarySequence,
    m_max: WordLength,
    rule: &PriorRule,
    conditioning: Conditioning,
) -> Result<EvidenceReport> {
    let candidates: Vec<WordLength> = WordLength::range_to(m_max).collect();
    let own: Vec<TransitionCounts> = candidates.iter().map(|&m| count_transitions(seq, m)).collect();
    if own.iter().all(|c| c.total_transitions() == 0) {
        return Err(Error::NoTransitions);
    }
    let log_ev = candidates
        .iter()
        .zip(&own)
        .map(|(&m, c)| log_evidence(c, &rule.prior_for(m)?))
        .collect::<Result<Vec<f64>>>()?;
    let n = candidates.len();
    let mut bf = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in (a + 1)..n {
            let v = match conditioning {
                Conditioning::PerModel => log_ev[a] - log_ev[b],
                Conditioning::Aligned => {
                    log_bayes_factor_with(seq, candidates[a], candidates[b], rule, conditioning)?
                }
            };
            bf[a][b] = v;
            bf[b][a] = -v;
        }
    }
    let wins: Vec<usize> = bf
        .iter()
        .map(|row| row.iter().filter(|&&v| v > TIE_TOLERANCE).count())
        .collect();
    let best = *wins.iter().max().expect("at least one candidate");
    let selected = candidates[wins.iter().position(|&w| w == best).expect("present")];
    Ok(EvidenceReport {
        candidates: candidates.iter().map(|m| m.get()).collect(),
        log_evidence: log_ev,
        transitions: own.iter().map(|c| c.total_transitions()).collect(),
        log_bayes_factors: bf,
        wins,
        conditioning,
        selected: selected.get(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wl(m: u32) -> WordLength {
        WordLength::new(m).unwrap()
    }

    fn seq(s: &str) -> BinarySequence {
        BinarySequence::from_str_letters(s).unwrap()
    }

    #[test]
    fn evidence_examples() {
        let u = BetaPrior::uniform(wl(1));
        assert_eq!(log_evidence(&TransitionCounts::zeros(wl(1)), &u).unwrap(), 0.0);
        let c = TransitionCounts::new(wl(1), vec![0, 0], vec![1, 0]).unwrap();
        assert!((log_evidence(&c, &u).unwrap() - 0.5f64.ln()).abs() < 1e-14);
        let c = TransitionCounts::new(wl(1), vec![1, 0], vec![2, 0]).unwrap();
        assert!((log_evidence(&c, &u).unwrap() - (1.0f64 / 12.0).ln()).abs() < 1e-13);
    }

    #[test]
    fn evidence_matches_unnormalized_form_under_uniform_prior() {
        let c = TransitionCounts::new(wl(2), vec![3, 1, 4, 0], vec![1, 5, 9, 2]).unwrap();
        let direct: f64 = (0..4)
            .map(|i| {
                let (n0, n1) = (c.n0()[i] as f64, c.n1()[i] as f64);
                ln_gamma(n0 + 1.0) + ln_gamma(n1 + 1.0) - ln_gamma(n0 + n1 + 2.0)
            })
            .sum();
        let got = log_evidence(&c, &BetaPrior::uniform(wl(2))).unwrap();
        assert!((got - direct).abs() < 1e-12);
    }

    #[test]
    fn posterior_examples() {
        let u = BetaPrior::uniform(wl(1));
        let post = posterior(&TransitionCounts::zeros(wl(1)), &u).unwrap();
        assert_eq!(post.alpha, vec![1.0, 1.0]);
        assert_eq!(post.no_data, vec![true, true]);
        assert_eq!(post.mode(0), None);

        let c = TransitionCounts::new(wl(1), vec![1, 0], vec![3, 0]).unwrap();
        let post = posterior(&c, &u).unwrap();
        assert_eq!((post.alpha[0], post.beta[0]), (4.0, 2.0));
        assert!((post.mean(0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(post.mode(0), Some(0.75));
        let (lo, hi) = post.credible_interval(0, 0.95);
        assert!(lo < 0.75 && hi > 0.75 && lo > 0.0 && hi < 1.0);
        assert!(!post.no_data[0] && post.no_data[1]);
    }

    #[test]
    fn prior_validation() {
        assert!(BetaPrior::new(wl(1), vec![1.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(BetaPrior::new(wl(1), vec![1.0], vec![1.0, 1.0]).is_err());
        let rule = PriorRule::PerEdge(BetaPrior::uniform(wl(2)));
        assert!(rule.prior_for(wl(3)).is_err());
        assert!(posterior(&TransitionCounts::zeros(wl(2)), &BetaPrior::uniform(wl(1))).is_err());
    }

    #[test]
    fn bayes_factor_identities() {
        let s = seq("0110100110010110100101100110");
        let rule = PriorRule::uniform();
        assert_eq!(log_bayes_factor(&s, wl(2), wl(2), &rule).unwrap(), 0.0);
        for c in [Conditioning::Aligned, Conditioning::PerModel] {
            let ab = log_bayes_factor_with(&s, wl(1), wl(3), &rule, c).unwrap();
            let ba = log_bayes_factor_with(&s, wl(3), wl(1), &rule, c).unwrap();
            assert_eq!(ab, -ba);
        }
    }

    #[test]
    fn constant_sequence_selects_one() {
        let s = seq(&"1".repeat(60));
        let report = select_word_length(&s, wl(10), &PriorRule::uniform()).unwrap();
        assert_eq!(report.selected, 1);
        // every aligned comparison is an exact tie
        assert!(report.log_bayes_factors.iter().flatten().all(|v| v.abs() < 1e-12));
        // per-model conditioning rewards dropping letters: ln(1/(n-m+1)) grows with m
        let per = select_word_length_with(&s, wl(10), &PriorRule::uniform(), Conditioning::PerModel).unwrap();
        assert_eq!(per.selected, 10);
        for (a, &m) in per.candidates.iter().enumerate() {
            let expected = -((60 - m + 1) as f64).ln();
            assert!((per.log_evidence[a] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn no_transitions_is_an_error() {
        let s = seq("1-0-1");
        assert_eq!(
            select_word_length(&s, wl(3), &PriorRule::uniform()).unwrap_err(),
            Error::NoTransitions
        );
    }

    #[test]
    fn report_is_antisymmetric() {
        let s = seq("00110101110001011010011101000110");
        let r = select_word_length(&s, wl(4), &PriorRule::uniform()).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(r.log_bayes_factors[a][b], -r.log_bayes_factors[b][a]);
            }
        }
        assert_eq!(r.log_bayes_factor(2, 2), Some(0.0));
    }
}
