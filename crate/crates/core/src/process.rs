//! Stationary distribution of the word chain and forward simulation.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{TransitionTable, Word, WordLength};
use crate::sequence::BinarySequence;

const POWER_TOL: f64 = 1e-13;
const POWER_MAX_ITER: usize = 1_000_000;

/// Stationary word probabilities `pi[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryDistribution {
    pub m: WordLength,
    pub pi: Vec<f64>,
}

impl StationaryDistribution {
    /// Stationary probability of each letter, `[P(0), P(1)]`, read off the
    /// newest letter of each word.
    pub fn letter_marginal(&self) -> [f64; 2] {
        let one: f64 = self.pi.iter().skip(1).step_by(2).sum();
        let zero: f64 = self.pi.iter().step_by(2).sum();
        [zero, one]
    }

    /// Largest `|(pi P)_j - pi_j|`.
    pub fn balance_residual(&self, table: &TransitionTable) -> f64 {
        let k = table.num_words();
        let mut next = vec![0.0; k];
        for (i, &w) in self.pi.iter().enumerate() {
            let zero = (i << 1) & (k - 1);
            next[zero] += w * table.letter_probability(i, 0);
            next[zero | 1] += w * table.letter_probability(i, 1);
        }
        next.iter()
            .zip(&self.pi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Closed communicating classes of the support graph, each sorted.
pub fn closed_classes(table: &TransitionTable) -> Vec<Vec<usize>> {
    let k = table.num_words();
    let mask = k - 1;
    let succ = |i: usize| {
        let zero = (i << 1) & mask;
        let p = table.probabilities()[i];
        let mut v = Vec::with_capacity(2);
        if p < 1.0 {
            v.push(zero);
        }
        if p > 0.0 {
            v.push(zero | 1);
        }
        v
    };
    // reachability by BFS from every node; k <= 2^10 keeps this cheap
    let reach: Vec<Vec<bool>> = (0..k)
        .map(|s| {
            let mut seen = vec![false; k];
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(u) = stack.pop() {
                for v in succ(u) {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            seen
        })
        .collect();
    let mut assigned = vec![false; k];
    let mut classes = Vec::new();
    for s in 0..k {
        if assigned[s] {
            continue;
        }
        let class: Vec<usize> = (0..k).filter(|&t| reach[s][t] && reach[t][s]).collect();
        for &t in &class {
            assigned[t] = true;
        }
        // closed iff nothing outside the class is reachable
        let closed = (0..k).all(|t| !reach[s][t] || class.binary_search(&t).is_ok());
        if closed {
            classes.push(class);
        }
    }
    classes
}

/// Solves `pi P = pi`, `sum(pi) = 1` for an irreducible table.
///
/// Reducible tables (absorbing words, several closed classes, transient
/// words) are rejected with the closed classes attached; a fixed initial
/// word can still be simulated from.
pub fn stationary_distribution(table: &TransitionTable) -> Result<StationaryDistribution> {
    let classes = closed_classes(table);
    if classes.len() != 1 || classes[0].len() != table.num_words() {
        return Err(Error::Reducible {
            closed_classes: classes,
        });
    }
    let pi = match direct_solve(table) {
        Some(pi) => pi,
        None => power_iteration(table)?,
    };
    Ok(StationaryDistribution {
        m: table.word_length(),
        pi,
    })
}

fn direct_solve(table: &TransitionTable) -> Option<Vec<f64>> {
    let k = table.num_words();
    // (P^T - I) with the last balance equation replaced by normalization
    let mut a = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        let zero = (i << 1) & (k - 1);
        a[(zero, i)] += table.letter_probability(i, 0);
        a[(zero | 1, i)] += table.letter_probability(i, 1);
        a[(i, i)] -= 1.0;
    }
    for j in 0..k {
        a[(k - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(k);
    b[k - 1] = 1.0;
    let x = a.lu().solve(&b)?;
    if x.iter().any(|v| !v.is_finite() || *v < -1e-9) {
        return None;
    }
    let pi = normalize(x.iter().map(|v| v.max(0.0)).collect())?;
    let check = StationaryDistribution {
        m: table.word_length(),
        pi,
    };
    (check.balance_residual(table) <= 1e-10).then_some(check.pi)
}

fn power_iteration(table: &TransitionTable) -> Result<Vec<f64>> {
    let k = table.num_words();
    let mut pi = vec![1.0 / k as f64; k];
    let mut next = vec![0.0; k];
    for _ in 0..POWER_MAX_ITER {
        next.iter_mut().for_each(|v| *v = 0.0);
        // lazy chain (P + I)/2 has the same fixed point and is aperiodic
        for (i, &w) in pi.iter().enumerate() {
            let zero = (i << 1) & (k - 1);
            next[i] += 0.5 * w;
            next[zero] += 0.5 * w * table.letter_probability(i, 0);
            next[zero | 1] += 0.5 * w * table.letter_probability(i, 1);
        }
        let diff = next
            .iter()
            .zip(&pi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut pi, &mut next);
        if diff < POWER_TOL {
            return normalize(pi).ok_or(Error::NoConvergence);
        }
    }
    Err(Error::NoConvergence)
}

fn normalize(mut v: Vec<f64>) -> Option<Vec<f64>> {
    let s: f64 = v.iter().sum();
    if !(s > 0.0) || !s.is_finite() {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= s);
    Some(v)
}

/// How the first word of a simulated sequence is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialWord {
    /// Latent word drawn from the stationary distribution; every emitted
    /// letter is a transition output.
    StationaryDraw,
    /// Latent word drawn uniformly; every emitted letter is a transition output.
    Uniform,
    /// The word itself is emitted first, followed by `n - m` transition outputs.
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n: usize,
    pub seed: u64,
    pub init: InitialWord,
    /// Replicate index; selects an independent stream for the same seed.
    #[serde(default)]
    pub replicate: u64,
}

impl SimulationConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        SimulationConfig {
            n,
            seed,
            init: InitialWord::StationaryDraw,
            replicate: 0,
        }
    }
}

/// The generator behind every random draw in the crate: ChaCha8 seeded from
/// `seed`, stream number `replicate`.
pub fn rng_for(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// A table prepared for repeated simulation.
///
/// Draw order per sequence: one uniform for the initial word (none for a
/// fixed word), then one uniform per transition; a letter is 1 when its
/// uniform falls below the current word's append-1 probability.
#[derive(Debug, Clone)]
pub struct Simulator {
    table: TransitionTable,
    init: InitialWord,
    cumulative: Vec<f64>,
}

impl Simulator {
    pub fn new(table: &TransitionTable, init: InitialWord) -> Result<Self> {
        let cumulative = match init {
            InitialWord::StationaryDraw => {
                let st = stationary_distribution(table)?;
                let mut acc = 0.0;
                st.pi
                    .iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect()
            }
            InitialWord::Fixed(w) => {
                Word::new(w, table.word_length())?;
                Vec::new()
            }
            InitialWord::Uniform => Vec::new(),
        };
        Ok(Simulator {
            table: table.clone(),
            init,
            cumulative,
        })
    }

    pub fn table(&self) -> &TransitionTable {
        &self.table
    }

    pub fn run<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<u8> {
        let m = self.table.word_length();
        let k = m.num_words();
        let mut out = Vec::with_capacity(n);
        let mut word = match self.init {
            InitialWord::StationaryDraw => {
                let u: f64 = rng.random();
                self.cumulative
                    .iter()
                    .position(|&c| u < c)
                    .unwrap_or(k - 1)
            }
            InitialWord::Uniform => {
                let u: f64 = rng.random();
                ((u * k as f64) as usize).min(k - 1)
            }
            InitialWord::Fixed(w) => {
                let letters = Word::new(w, m).expect("validated").letters();
                out.extend(letters.into_iter().take(n));
                w
            }
        };
        let p = self.table.probabilities();
        while out.len() < n {
            let u: f64 = rng.random();
            let b = u8::from(u < p[word]);
            out.push(b);
            word = ((word << 1) | b as usize) & (k - 1);
        }
        out
    }
}

/// Simulates `cfg.n` letters. Deterministic given `(table, cfg)`.
pub fn simulate(table: &TransitionTable, cfg: &SimulationConfig) -> Result<BinarySequence> {
    if cfg.n < 1 {
        return Err(Error::InvalidArgument("sequence length must be at least 1".into()));
    }
    let sim = Simulator::new(table, cfg.init)?;
    let mut rng = rng_for(cfg.seed, cfg.replicate);
    BinarySequence::from_letters(sim.run(cfg.n, &mut rng))
}
