//! Brute-force reference computations for small tables and lengths.
//!
//! Nothing here reuses the closed forms it checks: the stationary vector
//! comes from a dense null-space solve, joint probabilities from walking
//! every start word along every path, evidence from quadrature and Fisher
//! information from simulation.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::JointDistribution;
use crate::error::{Error, Result};
use crate::graph::{TransitionTable, WordLength};
use crate::inference::{
    count_transitions, expected_transition_count, expected_transition_count_indexed, log_evidence,
    BetaPrior, TransitionCounts, MAX_INDEXED_EXPECTATION_LENGTH,
};
use crate::process::{rng_for, stationary_distribution, InitialWord, Simulator};
use crate::sequence::BinarySequence;
use crate::stats::{mean, pairwise_sum, variance};

/// Limits on exhaustive work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationBudget {
    pub max_n: u32,
    pub max_m: u32,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget { max_n: 12, max_m: 4 }
    }
}

impl EnumerationBudget {
    fn check_n(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.max_n as usize {
            return Err(Error::BudgetExceeded(format!(
                "n = {n} outside 1..={}",
                self.max_n
            )));
        }
        Ok(())
    }

    fn check_m(&self, m: WordLength) -> Result<()> {
        if m.get() > self.max_m {
            return Err(Error::BudgetExceeded(format!(
                "m = {} exceeds {}",
                m.get(),
                self.max_m
            )));
        }
        Ok(())
    }
}

/// Stationary vector as the normalized null vector of `P^T - I`, via SVD.
pub fn eigen_stationary(table: &TransitionTable, budget: &EnumerationBudget) -> Result<Vec<f64>> {
    let m = table.word_length();
    budget.check_m(m)?;
    let k = table.num_words();
    let p = DMatrix::from_row_slice(k, k, &table.dense_matrix());
    let a = p.transpose() - DMatrix::identity(k, k);
    let svd = a.svd(false, true);
    let v_t = svd.v_t.ok_or(Error::NoConvergence)?;
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, &s)| if s < best.1 { (i, s) } else { best });
    let v: Vec<f64> = v_t.row(idx).iter().copied().collect();
    let s: f64 = v.iter().sum();
    if s.abs() < 1e-300 {
        return Err(Error::NoConvergence);
    }
    Ok(v.into_iter().map(|x| (x / s).max(0.0)).collect())
}

fn letters_of(i: usize, n: usize) -> impl Iterator<Item = u8> {
    (0..n).rev().map(move |b| ((i >> b) & 1) as u8)
}

/// All `2^n` sequence probabilities, indexed with the first letter as the
/// most significant bit.
pub fn brute_force_distribution(table: &TransitionTable, n: usize, budget: &EnumerationBudget) -> Result<Vec<f64>> {
    budget.check_n(n)?;
    let pi = eigen_stationary(table, budget)?;
    let k = table.num_words();
    let mask = k - 1;
    let probs = (0..1usize << n)
        .into_par_iter()
        .map(|seq| {
            let per_start: Vec<f64> = (0..k)
                .map(|start| {
                    let mut word = start;
                    let mut prob = pi[start];
                    for x in letters_of(seq, n) {
                        let next = ((word << 1) | x as usize) & mask;
                        prob *= table.transition(word, next);
                        word = next;
                    }
                    prob
                })
                .collect();
            pairwise_sum(&per_start)
        })
        .collect();
    Ok(probs)
}

fn window_count(letters: &[u8], m: usize, k: usize) -> u64 {
    letters
        .windows(m + 1)
        .filter(|w| w.iter().fold(0usize, |acc, &x| (acc << 1) | x as usize) == k)
        .count() as u64
}

/// `sum_x count_k(x) P(x)` over every sequence of length `n`.
pub fn brute_force_expected_count(
    table: &TransitionTable,
    n: usize,
    k: usize,
    budget: &EnumerationBudget,
) -> Result<f64> {
    let m = table.word_length();
    if k >= m.num_edges() {
        return Err(Error::IndexOutOfRange {
            index: k as u64,
            bound: m.num_edges() as u64,
        });
    }
    let probs = brute_force_distribution(table, n, budget)?;
    let terms: Vec<f64> = probs
        .iter()
        .enumerate()
        .map(|(seq, &p)| {
            let letters: Vec<u8> = letters_of(seq, n).collect();
            window_count(&letters, m.get() as usize, k) as f64 * p
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Edge counts written out as sums of indicator products over windows,
/// `sum_i prod_j (x_{i+j} or 1 - x_{i+j})`, one sum per edge.
pub fn exponent_form_counts(letters: &[u8], m: WordLength) -> Vec<u64> {
    let width = m.get() as usize + 1;
    (0..m.num_edges())
        .map(|k| {
            let mut total = 0u64;
            for i in 0..letters.len().saturating_sub(width - 1) {
                let mut prod = 1u64;
                for j in 0..width {
                    let bit = (k >> (width - 1 - j)) & 1;
                    let x = letters[i + j] as u64;
                    prod *= if bit == 1 { x } else { 1 - x };
                }
                total += prod;
            }
            total
        })
        .collect()
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `ln int_0^1 p^a (1-p)^b dp` for `a, b > -1` by the trapezoid rule after
/// the tanh-sinh substitution `p = (1 + tanh(pi/2 sinh x)) / 2`, which turns
/// endpoint singularities into double-exponential decay. Evaluated in log
/// space.
fn ln_beta_integral(a: f64, b: f64, points: usize) -> f64 {
    const HALF_WIDTH: f64 = 6.0;
    let h = 2.0 * HALF_WIDTH / points as f64;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let logs: Vec<f64> = (0..=points)
        .map(|j| {
            let x = -HALF_WIDTH + j as f64 * h;
            let u = half_pi * x.sinh();
            let ln_p = -softplus(-2.0 * u);
            let ln_q = -softplus(2.0 * u);
            (a + 1.0) * ln_p + (b + 1.0) * ln_q + (std::f64::consts::PI * x.cosh()).ln()
        })
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let terms: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    max + (h * pairwise_sum(&terms)).ln()
}

/// Default quadrature points per edge for [`grid_log_evidence`].
pub const DEFAULT_GRID_POINTS: usize = 400;

/// Log evidence by one-dimensional quadrature per edge; the prior's
/// normalizing constant is integrated the same way.
pub fn grid_log_evidence(counts: &TransitionCounts, prior: &BetaPrior, points: usize) -> Result<f64> {
    if counts.word_length() != prior.word_length() {
        return Err(Error::WordLengthMismatch {
            left: counts.word_length().get(),
            right: prior.word_length().get(),
        });
    }
    if points < 10 {
        return Err(Error::InvalidArgument("need at least 10 grid points".into()));
    }
    let mut total = 0.0;
    for i in 0..counts.word_length().num_words() {
        let (a, b) = (prior.alpha()[i], prior.beta()[i]);
        let (n0, n1) = (counts.n0()[i] as f64, counts.n1()[i] as f64);
        total += ln_beta_integral(n1 + a - 1.0, n0 + b - 1.0, points)
            - ln_beta_integral(a - 1.0, b - 1.0, points);
    }
    Ok(total)
}

pub fn grid_evidence(counts: &TransitionCounts, prior: &BetaPrior, points: usize) -> Result<f64> {
    grid_log_evidence(counts, prior, points).map(f64::exp)
}

/// Simulation estimates around edge `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloFisher {
    pub replicates: usize,
    /// Mean observed information `n_k / p_k^2`.
    pub information: f64,
    pub information_se: f64,
    /// Sample variance of the edge score `n_k / p_k`.
    pub edge_score_variance: f64,
    /// Sample variance of the score of the source word's append-1
    /// probability, `n1 / p - n0 / (1 - p)`.
    pub score_variance: f64,
    pub score_variance_se: f64,
}

pub const MIN_FISHER_REPLICATES: usize = 10_000;

fn variance_se(xs: &[f64]) -> f64 {
    let mu = mean(xs);
    let n = xs.len() as f64;
    let s2 = variance(xs);
    let m4 = xs.iter().map(|x| (x - mu).powi(4)).sum::<f64>() / n;
    ((m4 - s2 * s2).max(0.0) / n).sqrt()
}

/// Monte Carlo estimates of the information carried about edge `k` by
/// sequences of length `n` drawn from the stationary process.
pub fn monte_carlo_fisher(
    table: &TransitionTable,
    n: usize,
    k: usize,
    replicates: usize,
    seed: u64,
) -> Result<MonteCarloFisher> {
    let m = table.word_length();
    if replicates < MIN_FISHER_REPLICATES {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_FISHER_REPLICATES} replicates, got {replicates}"
        )));
    }
    if k >= m.num_edges() {
        return Err(Error::IndexOutOfRange {
            index: k as u64,
            bound: m.num_edges() as u64,
        });
    }
    let pk = table.edge_probability(k);
    if pk == 0.0 {
        return Err(Error::InvalidArgument(format!("edge {k} has probability zero")));
    }
    let source = k >> 1;
    let p1 = table.probabilities()[source];
    let sim = Simulator::new(table, InitialWord::StationaryDraw)?;
    let width = m.get() as usize;
    let draws: Vec<(f64, f64, f64)> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_for(seed, r as u64);
            let letters = sim.run(n, &mut rng);
            let nk = window_count(&letters, width, k) as f64;
            let n0 = window_count(&letters, width, 2 * source) as f64;
            let n1 = window_count(&letters, width, 2 * source + 1) as f64;
            let term = |c: f64, p: f64| if c == 0.0 { 0.0 } else { c / p };
            (nk / (pk * pk), nk / pk, term(n1, p1) - term(n0, 1.0 - p1))
        })
        .collect();
    let info: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let edge: Vec<f64> = draws.iter().map(|d| d.1).collect();
    let free: Vec<f64> = draws.iter().map(|d| d.2).collect();
    Ok(MonteCarloFisher {
        replicates,
        information: mean(&info),
        information_se: (variance(&info) / replicates as f64).sqrt(),
        edge_score_variance: variance(&edge),
        score_variance: variance(&free),
        score_variance_se: variance_se(&free),
    })
}

/// One family of comparisons in a [`VerifyReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub comparisons: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub m: u32,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct Tally {
    name: &'static str,
    tolerance: f64,
    relative: bool,
    count: usize,
    max_error: f64,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64, relative: bool) -> Self {
        Tally {
            name,
            tolerance,
            relative,
            count: 0,
            max_error: 0.0,
        }
    }

    fn add(&mut self, got: f64, want: f64) {
        let mut err = (got - want).abs();
        if self.relative {
            err /= want.abs().max(f64::MIN_POSITIVE);
        }
        if err.is_nan() {
            err = f64::INFINITY;
        }
        self.count += 1;
        self.max_error = self.max_error.max(err);
    }

    fn finish(self) -> Check {
        Check {
            name: self.name.to_string(),
            comparisons: self.count,
            max_error: self.max_error,
            tolerance: self.tolerance,
            passed: self.max_error <= self.tolerance,
        }
    }
}

/// A table with every append-1 probability drawn from `U(0.02, 0.98)`.
pub fn random_table<R: Rng + ?Sized>(m: WordLength, rng: &mut R) -> TransitionTable {
    let p = (0..m.num_words()).map(|_| 0.02 + 0.96 * rng.random::<f64>()).collect();
    TransitionTable::new(m, p).expect("probabilities in range")
}

/// Compares the closed-form paths against the oracles on `trials` random
/// tables of word length `m` and sequences of length `n`.
pub fn verify(m: WordLength, n: usize, trials: usize, seed: u64, budget: &EnumerationBudget) -> Result<VerifyReport> {
    budget.check_n(n)?;
    budget.check_m(m)?;
    let mut stationary = Tally::new("stationary vs dense eigenvector", 1e-12, false);
    let mut joint = Tally::new("joint probability vs enumeration", 1e-12, false);
    let mut indexed = Tally::new("indexed probability vs enumeration", 1e-12, false);
    let mut total = Tally::new("total probability", 1e-12, false);
    let mut expected = Tally::new("expected edge count vs enumeration", 1e-10, false);
    let mut expected_idx = Tally::new("indexed expected edge count vs enumeration", 1e-10, false);
    let mut counts = Tally::new("window counts vs indicator sums", 0.0, false);
    let mut evidence = Tally::new("log evidence vs quadrature (relative)", 1e-6, true);
    let mut rng = rng_for(seed, u64::MAX);
    for _ in 0..trials {
        let table = random_table(m, &mut rng);
        let pi = stationary_distribution(&table)?.pi;
        for (a, b) in pi.iter().zip(eigen_stationary(&table, budget)?) {
            stationary.add(*a, b);
        }
        let brute = brute_force_distribution(&table, n, budget)?;
        total.add(pairwise_sum(&brute), 1.0);
        let joint_dist = JointDistribution::new(&table)?;
        for (i, &want) in brute.iter().enumerate() {
            let letters: Vec<u8> = letters_of(i, n).collect();
            joint.add(joint_dist.probability(&letters), want);
            indexed.add(joint_dist.probability_indexed(n as u32, i as u64)?, want);
        }
        if n > m.get() as usize {
            for k in 0..m.num_edges() {
                let want: f64 = brute
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| {
                        let letters: Vec<u8> = letters_of(i, n).collect();
                        window_count(&letters, m.get() as usize, k) as f64 * p
                    })
                    .sum();
                expected.add(expected_transition_count(&table, n, k)?, want);
                if n as u32 <= MAX_INDEXED_EXPECTATION_LENGTH {
                    expected_idx.add(expected_transition_count_indexed(&table, n, k)?, want);
                }
            }
        }
        let letters: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();
        let c = count_transitions(&BinarySequence::from_letters(letters.clone())?, m);
        for (k, v) in exponent_form_counts(&letters, m).into_iter().enumerate() {
            counts.add(c.edge_count(k) as f64, v as f64);
        }
        let n0 = (0..m.num_words()).map(|_| rng.random_range(0..=20u64)).collect();
        let n1 = (0..m.num_words()).map(|_| rng.random_range(0..=20u64)).collect();
        let c = TransitionCounts::new(m, n0, n1)?;
        let a = 0.5 + 2.5 * rng.random::<f64>();
        let b = 0.5 + 2.5 * rng.random::<f64>();
        let prior = BetaPrior::symmetric(m, a, b)?;
        evidence.add(
            log_evidence(&c, &prior)?,
            grid_log_evidence(&c, &prior, DEFAULT_GRID_POINTS)?,
        );
    }
    Ok(VerifyReport {
        m: m.get(),
        n,
        trials,
        seed,
        checks: [stationary, joint, indexed, total, expected, expected_idx, counts, evidence]
            .into_iter()
            .filter(|t| t.count > 0)
            .map(Tally::finish)
            .collect(),
    })
}
