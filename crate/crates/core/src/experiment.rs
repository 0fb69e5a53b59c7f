//! Replayable simulation studies and the boat-race analysis.
//!
//! Replicate `r` of a study simulates from stream `r` of the study seed, so
//! results do not depend on thread count or scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::{predict_next, marginal_next, PredictMode};
use crate::error::{Error, Result};
use crate::graph::{TransitionTable, WordLength};
use crate::inference::{
    count_transitions, mh_sample_posterior, mle, posterior, select_word_length, BetaPrior,
    EdgeEstimate, EdgePosterior, EvidenceReport, MhConfig, PriorRule, TransitionCounts,
};
use crate::io::{LabeledSeries, SeriesConfig};
use crate::process::{rng_for, InitialWord, Simulator};
use crate::sequence::BinarySequence;
use crate::stats::{mean, quantile_sorted, sorted_copy};

pub const TEINF_LEFT_TABLE: [f64; 4] = [0.9, 0.25, 0.75, 0.1];
pub const TEINF_RIGHT_TABLE: [f64; 8] = [0.1, 0.7, 0.5, 0.8, 0.2, 0.5, 0.3, 0.9];
pub const TEINF2_LENGTHS: [usize; 4] = [50, 100, 200, 500];

/// Names accepted by the `experiment` command.
pub const STUDIES: [&str; 5] = ["teinf-left", "teinf-right", "teinf2", "hist2i", "boatrace"];

pub fn teinf_left_table() -> TransitionTable {
    TransitionTable::new(WordLength::new(2).expect("valid"), TEINF_LEFT_TABLE.to_vec()).expect("valid")
}

pub fn teinf_right_table() -> TransitionTable {
    TransitionTable::new(WordLength::new(3).expect("valid"), TEINF_RIGHT_TABLE.to_vec()).expect("valid")
}

/// How each replicate turns counts into point estimates and intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    /// Exact Beta posterior mean and equal-tailed interval.
    Conjugate,
    /// Random-walk Metropolis–Hastings draws; the seed is replaced per
    /// replicate.
    Mcmc(MhConfig),
}

impl Estimator {
    fn estimate(&self, counts: &TransitionCounts, prior: &BetaPrior, stream: u64) -> Result<Vec<EdgeRow>> {
        match self {
            Estimator::Conjugate => Ok(posterior(counts, prior)?
                .summaries(0.95)
                .into_iter()
                .map(|e| EdgeRow {
                    estimate: e.mean,
                    lower: e.lower,
                    upper: e.upper,
                })
                .collect()),
            Estimator::Mcmc(cfg) => {
                let cfg = MhConfig {
                    seed: derive_seed(cfg.seed, stream),
                    ..cfg.clone()
                };
                Ok(mh_sample_posterior(counts, prior, &cfg)?
                    .edges
                    .into_iter()
                    .map(|e| EdgeRow {
                        estimate: e.mean,
                        lower: e.interval.0,
                        upper: e.interval.1,
                    })
                    .collect())
            }
        }
    }
}

fn derive_seed(seed: u64, stream: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ stream.wrapping_add(1).wrapping_mul(0xBF58_476D_1CE4_E5B9)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeRow {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

fn simulate_replicates(table: &TransitionTable, n: usize, replicates: usize, seed: u64) -> Result<Vec<BinarySequence>> {
    let sim = Simulator::new(table, InitialWord::StationaryDraw)?;
    (0..replicates)
        .into_par_iter()
        .map(|r| BinarySequence::from_letters(sim.run(n, &mut rng_for(seed, r as u64))))
        .collect()
}

/// Estimation accuracy over repeated sequences from one known table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationStudy {
    pub truth: Vec<f64>,
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub estimator: Estimator,
    /// Estimates for every replicate, `[replicate][edge]`.
    pub rows: Vec<Vec<EdgeRow>>,
    /// Mean absolute error over edges, per replicate.
    pub mean_abs_error: Vec<f64>,
    pub average_mean_abs_error: f64,
    /// Replicates whose interval contains the true value, per edge.
    pub coverage: Vec<usize>,
}

pub fn estimation_study(
    truth: &TransitionTable,
    n: usize,
    replicates: usize,
    seed: u64,
    prior: &PriorRule,
    estimator: &Estimator,
) -> Result<EstimationStudy> {
    let m = truth.word_length();
    let prior = prior.prior_for(m)?;
    let seqs = simulate_replicates(truth, n, replicates, seed)?;
    let rows = seqs
        .par_iter()
        .enumerate()
        .map(|(r, s)| estimator.estimate(&count_transitions(s, m), &prior, r as u64))
        .collect::<Result<Vec<_>>>()?;
    let p = truth.probabilities();
    let mean_abs_error: Vec<f64> = rows
        .iter()
        .map(|row| mean(&row.iter().zip(p).map(|(e, t)| (e.estimate - t).abs()).collect::<Vec<_>>()))
        .collect();
    let coverage = (0..m.num_words())
        .map(|i| rows.iter().filter(|row| row[i].lower <= p[i] && p[i] <= row[i].upper).count())
        .collect();
    Ok(EstimationStudy {
        truth: p.to_vec(),
        n,
        replicates,
        seed,
        estimator: estimator.clone(),
        average_mean_abs_error: mean(&mean_abs_error),
        rows,
        mean_abs_error,
        coverage,
    })
}

/// Summary across replicates for one sequence length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthRow {
    pub n: usize,
    /// Average estimate per edge.
    pub mean_estimate: Vec<f64>,
    /// 2.5% and 97.5% quantiles of the replicate estimates, per edge.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LengthRow {
    pub fn widths(&self) -> Vec<f64> {
        self.upper.iter().zip(&self.lower).map(|(u, l)| u - l).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthStudy {
    pub truth: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub rows: Vec<LengthRow>,
}

/// Spread of posterior-mean estimates as the sequence length grows. Each
/// length uses its own block of streams.
pub fn length_study(
    truth: &TransitionTable,
    lengths: &[usize],
    replicates: usize,
    seed: u64,
    prior: &PriorRule,
) -> Result<LengthStudy> {
    let m = truth.word_length();
    let k = m.num_words();
    let rows = lengths
        .iter()
        .enumerate()
        .map(|(li, &n)| {
            let study = estimation_study(truth, n, replicates, derive_seed(seed, li as u64), prior, &Estimator::Conjugate)?;
            let column = |i: usize| sorted_copy(&study.rows.iter().map(|r| r[i].estimate).collect::<Vec<_>>());
            Ok(LengthRow {
                n,
                mean_estimate: (0..k).map(|i| mean(&column(i))).collect(),
                lower: (0..k).map(|i| quantile_sorted(&column(i), 0.025)).collect(),
                upper: (0..k).map(|i| quantile_sorted(&column(i), 0.975)).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LengthStudy {
        truth: truth.probabilities().to_vec(),
        replicates,
        seed,
        rows,
    })
}

/// Histogram of selected word lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionStudy {
    pub truth: Vec<f64>,
    pub true_m: u32,
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub m_max: u32,
    /// `counts[m - 1]` replicates selected word length `m`.
    pub counts: Vec<usize>,
}

impl SelectionStudy {
    pub fn fraction(&self, m: u32) -> f64 {
        self.counts.get(m as usize - 1).copied().unwrap_or(0) as f64 / self.replicates as f64
    }

    /// `m,count` bin counts.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("m,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            s.push_str(&format!("{},{}\n", i + 1, c));
        }
        s
    }
}

pub fn selection_study(
    truth: &TransitionTable,
    n: usize,
    replicates: usize,
    seed: u64,
    m_max: WordLength,
    prior: &PriorRule,
) -> Result<SelectionStudy> {
    let seqs = simulate_replicates(truth, n, replicates, seed)?;
    let picks = seqs
        .par_iter()
        .map(|s| select_word_length(s, m_max, prior).map(|r| r.selected))
        .collect::<Result<Vec<u32>>>()?;
    let mut counts = vec![0usize; m_max.get() as usize];
    for m in picks {
        counts[m as usize - 1] += 1;
    }
    Ok(SelectionStudy {
        truth: truth.probabilities().to_vec(),
        true_m: truth.word_length().get(),
        n,
        replicates,
        seed,
        m_max: m_max.get(),
        counts,
    })
}

/// Occurrences of each length-`m` word inside gap-free segments.
pub fn word_occurrences(seq: &BinarySequence, m: WordLength) -> Vec<u64> {
    let width = m.get() as usize;
    let mut out = vec![0u64; m.num_words()];
    for seg in seq.segments() {
        for w in seg.windows(width) {
            out[w.iter().fold(0usize, |a, &b| (a << 1) | b as usize)] += 1;
        }
    }
    out
}

/// Next-result probabilities under one fitted table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NextPrediction {
    /// Missing slots in the last-`m` window mixed over the observed letter
    /// frequencies.
    pub window_marginal: f64,
    /// Exact filter over the whole history.
    pub conditional: f64,
}

fn next_prediction(table: &TransitionTable, history: &[Option<u8>], letter_freq: [f64; 2]) -> Result<NextPrediction> {
    Ok(NextPrediction {
        window_marginal: marginal_next(table, history, letter_freq),
        conditional: predict_next(table, history, PredictMode::Conditional)?,
    })
}

/// Fits at one word length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordLengthFit {
    pub m: u32,
    pub n0: Vec<u64>,
    pub n1: Vec<u64>,
    pub word_occurrences: Vec<u64>,
    pub posterior: Vec<EdgePosterior>,
    pub mle: Vec<EdgeEstimate>,
    pub prediction_posterior_mean: NextPrediction,
    pub prediction_mle: Option<NextPrediction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoatRaceStudy {
    pub first_year: i64,
    pub last_year: i64,
    pub usable: usize,
    pub zeros: usize,
    pub ones: usize,
    /// Observed letter frequencies `[P(0), P(1)]`.
    pub letter_frequency: [f64; 2],
    pub evidence: EvidenceReport,
    pub fits: Vec<WordLengthFit>,
}

impl BoatRaceStudy {
    pub fn fit(&self, m: u32) -> Option<&WordLengthFit> {
        self.fits.iter().find(|f| f.m == m)
    }
}

/// Word-length selection over `1..=m_max`, then fits at each of `fit_lengths`
/// and a prediction for the year after the series ends. Refuses series that
/// fail the bundled dataset's totals.
pub fn boat_race_study(
    series: &LabeledSeries,
    m_max: WordLength,
    fit_lengths: &[WordLength],
    prior: &PriorRule,
) -> Result<BoatRaceStudy> {
    let expected = SeriesConfig::boat_race().expected.expect("boat race totals");
    let (zeros, ones) = series.sequence.letter_totals();
    if (zeros + ones, zeros, ones) != (expected.usable, expected.zeros, expected.ones) {
        return Err(Error::Dataset(format!(
            "boat-race study needs {}/{}/{} usable/zero/one results, found {}/{}/{}",
            expected.usable,
            expected.zeros,
            expected.ones,
            zeros + ones,
            zeros,
            ones
        )));
    }
    let seq = &series.sequence;
    let usable = zeros + ones;
    let freq = [zeros as f64 / usable as f64, ones as f64 / usable as f64];
    let evidence = select_word_length(seq, m_max, prior)?;
    let fits = fit_lengths
        .iter()
        .map(|&m| {
            let counts = count_transitions(seq, m);
            let post = posterior(&counts, &prior.prior_for(m)?)?;
            let fit = mle(&counts);
            let prediction_mle = fit
                .table()
                .map(|t| next_prediction(&t, seq.slots(), freq))
                .transpose()?;
            Ok(WordLengthFit {
                m: m.get(),
                n0: counts.n0().to_vec(),
                n1: counts.n1().to_vec(),
                word_occurrences: word_occurrences(seq, m),
                posterior: post.summaries(0.95),
                prediction_posterior_mean: next_prediction(&post.mean_table(), seq.slots(), freq)?,
                mle: fit.edges,
                prediction_mle,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoatRaceStudy {
        first_year: series.first_year,
        last_year: series.last_year(),
        usable,
        zeros,
        ones,
        letter_frequency: freq,
        evidence,
        fits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::boat_race;

    fn wl(m: u32) -> WordLength {
        WordLength::new(m).unwrap()
    }

    #[test]
    fn boat_race_counts() {
        let s = boat_race().unwrap();
        let r = boat_race_study(&s, wl(10), &[wl(2), wl(3)], &PriorRule::uniform()).unwrap();
        let f2 = r.fit(2).unwrap();
        assert_eq!(f2.word_occurrences, vec![46, 29, 28, 49]);
        assert_eq!(f2.n0, vec![33, 14, 13, 13]);
        assert_eq!(f2.n1, vec![13, 12, 14, 34]);
        let f3 = r.fit(3).unwrap();
        assert_eq!(f3.word_occurrences, vec![33, 13, 14, 12, 13, 14, 13, 34]);
        assert_eq!(r.evidence.selected, 2);
    }

    #[test]
    fn replicates_are_reproducible() {
        let t = teinf_left_table();
        let a = estimation_study(&t, 60, 4, 9, &PriorRule::uniform(), &Estimator::Conjugate).unwrap();
        let b = estimation_study(&t, 60, 4, 9, &PriorRule::uniform(), &Estimator::Conjugate).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 4);
    }

    #[test]
    fn selection_histogram_sums() {
        let s = selection_study(&teinf_left_table(), 80, 10, 1, wl(4), &PriorRule::uniform()).unwrap();
        assert_eq!(s.counts.iter().sum::<usize>(), 10);
        assert!(s.to_csv().starts_with("m,count\n1,"));
    }

    #[test]
    fn rejects_wrong_totals() {
        let mut s = boat_race().unwrap();
        s.sequence = BinarySequence::from_str_letters("0101").unwrap();
        assert!(matches!(
            boat_race_study(&s, wl(3), &[wl(2)], &PriorRule::uniform()),
            Err(Error::Dataset(_))
        ));
    }
}
