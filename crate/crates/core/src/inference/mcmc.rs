//! Random-walk Metropolis–Hastings on the edge posteriors.
//!
//! The posterior factorizes over source words, so each append-1 probability
//! gets its own one-dimensional chain with its own random stream.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::rng_for;
use crate::stats::{mean, quantile_sorted, sorted_copy};

use super::bayes::{posterior, BetaPrior};
use super::counts::TransitionCounts;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MhConfig {
    pub iterations: usize,
    pub burn_in: usize,
    /// Standard deviation of the Gaussian step.
    pub proposal_scale: f64,
    pub seed: u64,
    pub start: f64,
}

impl Default for MhConfig {
    fn default() -> Self {
        MhConfig {
            iterations: 20_000,
            burn_in: 2_000,
            proposal_scale: 0.05,
            seed: 0,
            start: 0.5,
        }
    }
}

impl MhConfig {
    fn validate(&self) -> Result<()> {
        if !(self.proposal_scale > 0.0) || !self.proposal_scale.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "proposal scale must be positive, got {}",
                self.proposal_scale
            )));
        }
        if self.iterations <= self.burn_in {
            return Err(Error::InvalidArgument(format!(
                "iterations ({}) must exceed burn-in ({})",
                self.iterations, self.burn_in
            )));
        }
        if !(0.0..=1.0).contains(&self.start) {
            return Err(Error::InvalidArgument(format!("start {} outside [0, 1]", self.start)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MhEdge {
    /// Post-burn-in draws.
    pub samples: Vec<f64>,
    pub acceptance_rate: f64,
    pub mean: f64,
    /// Equal-tailed 95% interval of the draws.
    pub interval: (f64, f64),
    pub no_data: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MhResult {
    pub edges: Vec<MhEdge>,
}

impl MhResult {
    pub fn means(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.mean).collect()
    }
}

fn log_kernel(p: f64, a: f64, b: f64) -> f64 {
    let term = |e: f64, x: f64| if e == 0.0 { 0.0 } else { e * x.ln() };
    term(a - 1.0, p) + term(b - 1.0, 1.0 - p)
}

/// Folds a real number back into `[0, 1]` by mirror reflection.
fn reflect(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    if r > 1.0 {
        2.0 - r
    } else {
        r
    }
}

fn run_chain(a: f64, b: f64, cfg: &MhConfig, stream: u64) -> (Vec<f64>, f64) {
    let mut rng = rng_for(cfg.seed, stream);
    let step = Normal::new(0.0, cfg.proposal_scale).expect("validated scale");
    let mut x = cfg.start;
    let mut lx = log_kernel(x, a, b);
    let mut accepted = 0usize;
    let mut out = Vec::with_capacity(cfg.iterations - cfg.burn_in);
    for it in 0..cfg.iterations {
        let y = reflect(x + step.sample(&mut rng));
        let ly = log_kernel(y, a, b);
        let u: f64 = rng.random();
        if ly.is_finite() && (!lx.is_finite() || u.ln() < ly - lx) {
            x = y;
            lx = ly;
            accepted += 1;
        }
        if it >= cfg.burn_in {
            out.push(x);
        }
    }
    (out, accepted as f64 / cfg.iterations as f64)
}

/// Samples every edge posterior `Beta(alpha + n1, beta + n0)` by
/// Metropolis–Hastings; chains run in parallel.
pub fn mh_sample_posterior(counts: &TransitionCounts, prior: &BetaPrior, cfg: &MhConfig) -> Result<MhResult> {
    cfg.validate()?;
    let post = posterior(counts, prior)?;
    let edges = (0..post.num_edges())
        .into_par_iter()
        .map(|i| {
            let (samples, acceptance_rate) = run_chain(post.alpha[i], post.beta[i], cfg, i as u64);
            let sorted = sorted_copy(&samples);
            MhEdge {
                mean: mean(&samples),
                interval: (quantile_sorted(&sorted, 0.025), quantile_sorted(&sorted, 0.975)),
                samples,
                acceptance_rate,
                no_data: post.no_data[i],
            }
        })
        .collect();
    Ok(MhResult { edges })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WordLength;
    use crate::stats::{beta_cdf, ks_distance};

    #[test]
    fn reflection_stays_in_unit_interval() {
        for x in [-2.3, -0.4, 0.0, 0.3, 1.0, 1.2, 3.7] {
            let r = reflect(x);
            assert!((0.0..=1.0).contains(&r), "{x} -> {r}");
        }
        assert!((reflect(-0.25) - 0.25).abs() < 1e-15);
        assert!((reflect(1.25) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        let c = TransitionCounts::zeros(WordLength::new(1).unwrap());
        let p = BetaPrior::uniform(WordLength::new(1).unwrap());
        let bad = MhConfig {
            proposal_scale: 0.0,
            ..MhConfig::default()
        };
        assert!(mh_sample_posterior(&c, &p, &bad).is_err());
        let bad = MhConfig {
            iterations: 10,
            burn_in: 10,
            ..MhConfig::default()
        };
        assert!(mh_sample_posterior(&c, &p, &bad).is_err());
    }

    #[test]
    fn chain_targets_beta_posterior() {
        let m = WordLength::new(1).unwrap();
        let c = TransitionCounts::new(m, vec![6, 20], vec![14, 2]).unwrap();
        let cfg = MhConfig {
            iterations: 60_000,
            burn_in: 5_000,
            proposal_scale: 0.15,
            seed: 11,
            ..MhConfig::default()
        };
        let res = mh_sample_posterior(&c, &BetaPrior::uniform(m), &cfg).unwrap();
        let d = ks_distance(&res.edges[0].samples, |x| beta_cdf(15.0, 7.0, x));
        assert!(d < 0.05, "ks {d}");
        assert!((res.edges[1].mean - 3.0 / 24.0).abs() < 0.02);
        assert!(res.edges.iter().all(|e| e.acceptance_rate > 0.1));
    }

    #[test]
    fn deterministic_per_seed() {
        let m = WordLength::new(2).unwrap();
        let c = TransitionCounts::new(m, vec![1, 2, 3, 4], vec![4, 3, 2, 1]).unwrap();
        let cfg = MhConfig {
            iterations: 2_000,
            burn_in: 100,
            seed: 5,
            ..MhConfig::default()
        };
        let a = mh_sample_posterior(&c, &BetaPrior::uniform(m), &cfg).unwrap();
        let b = mh_sample_posterior(&c, &BetaPrior::uniform(m), &cfg).unwrap();
        assert_eq!(a, b);
    }
}
