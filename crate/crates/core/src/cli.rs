//! Command-line front end. Every subcommand wraps one library operation and
//! writes a JSON [`RunReport`] or a CSV table.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::distribution::{marginal_next, JointDistribution, PredictMode, MAX_INDEXED_LENGTH};
use crate::error::Error;
use crate::experiment::{
    boat_race_study, estimation_study, length_study, selection_study, teinf_left_table, teinf_right_table,
    Estimator, TEINF2_LENGTHS,
};
use crate::graph::{TransitionTable, WordLength};
use crate::inference::{
    count_transitions, log_evidence, mh_sample_posterior, mle, posterior, select_word_length_with, BetaPrior,
    Conditioning, MhConfig, PriorRule,
};
use crate::io::{boat_race, load_labeled_series, parse_sequence_text, RunReport, SeriesConfig, BOAT_RACE_CSV};
use crate::oracle::{verify, EnumerationBudget};
use crate::process::{simulate, InitialWord, SimulationConfig};
use crate::sequence::BinarySequence;

/// Directory for reports when `--out` is not given.
pub const OUTPUT_DIR_ENV: &str = "DBP_OUTPUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "dbp", version, about = "de Bruijn process modelling of binary sequences")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Word length.
    #[arg(long, global = true)]
    pub m: Option<u32>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Beta prior alpha: one value for every edge or a comma-separated list.
    #[arg(long, global = true, value_delimiter = ',', default_value = "1")]
    pub prior_alpha: Vec<f64>,
    #[arg(long, global = true, value_delimiter = ',', default_value = "1")]
    pub prior_beta: Vec<f64>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub output: OutputFormat,
    /// Output file; defaults to stdout, or to `$DBP_OUTPUT_DIR/<command>.<ext>`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SequenceInput {
    /// Sequence file of 0, 1 and - characters.
    #[arg(long, group = "source")]
    pub input: Option<PathBuf>,
    /// Inline sequence, e.g. `0110-01`.
    #[arg(long, group = "source")]
    pub sequence: Option<String>,
    /// `year,winner` CSV file.
    #[arg(long, group = "source")]
    pub series: Option<PathBuf>,
    /// JSON label configuration for `--series`.
    #[arg(long, requires = "series")]
    pub series_config: Option<PathBuf>,
    /// The bundled boat-race results.
    #[arg(long, group = "source")]
    pub boat_race: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Stationary,
    Uniform,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Conditional,
    WindowMarginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitArg {
    PosteriorMean,
    Mle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MarginalArg {
    /// Letter probabilities of the table's stationary distribution.
    Stationary,
    /// Letter frequencies of the observed history.
    Observed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConditioningArg {
    Aligned,
    PerModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Study {
    TeinfLeft,
    TeinfRight,
    Teinf2,
    Hist2i,
    Boatrace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Conjugate,
    Mcmc,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a sequence from a transition table.
    Simulate {
        /// Comma-separated append-1 probabilities, one per word.
        #[arg(long, value_delimiter = ',', required = true)]
        table: Vec<f64>,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = InitArg::Stationary)]
        init: InitArg,
        /// Starting word for `--init fixed`.
        #[arg(long)]
        word: Option<usize>,
        #[arg(long, default_value_t = 0)]
        replicate: u64,
    },
    /// Exact probability of a gap-free sequence.
    Prob {
        #[arg(long, value_delimiter = ',', required = true)]
        table: Vec<f64>,
        #[command(flatten)]
        source: SequenceInput,
    },
    /// Transition counts inside gap-free segments.
    Counts {
        #[command(flatten)]
        source: SequenceInput,
    },
    /// Maximum-likelihood estimates with standard errors.
    FitMle {
        #[command(flatten)]
        source: SequenceInput,
    },
    /// Conjugate Beta posteriors.
    FitBayes {
        #[command(flatten)]
        source: SequenceInput,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
    },
    /// Metropolis–Hastings sampling of the edge posteriors.
    Mcmc {
        #[command(flatten)]
        source: SequenceInput,
        #[arg(long, default_value_t = 20_000)]
        iterations: usize,
        #[arg(long, default_value_t = 2_000)]
        burn_in: usize,
        #[arg(long, default_value_t = 0.05)]
        proposal_scale: f64,
        /// Include the draws in the report.
        #[arg(long)]
        samples: bool,
    },
    /// Log model evidence at one word length.
    Evidence {
        #[command(flatten)]
        source: SequenceInput,
    },
    /// Bayes-factor selection of the word length.
    SelectM {
        #[command(flatten)]
        source: SequenceInput,
        #[arg(long, default_value_t = 10)]
        m_max: u32,
        #[arg(long, value_enum, default_value_t = ConditioningArg::Aligned)]
        conditioning: ConditioningArg,
    },
    /// Probability that the next letter is 1.
    Predict {
        #[command(flatten)]
        source: SequenceInput,
        /// Table to predict with; fitted from the history at `--m` if absent.
        #[arg(long, value_delimiter = ',')]
        table: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value_t = FitArg::PosteriorMean)]
        fit: FitArg,
        #[arg(long, value_enum, default_value_t = ModeArg::Conditional)]
        mode: ModeArg,
        /// Letter probabilities for missing slots in window-marginal mode.
        #[arg(long, value_enum, default_value_t = MarginalArg::Stationary)]
        marginal: MarginalArg,
    },
    /// Check closed forms against brute-force oracles on random tables.
    Verify {
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 12)]
        max_n: u32,
    },
    /// Replay a named study.
    Experiment {
        #[arg(value_enum)]
        study: Study,
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 10)]
        m_max: u32,
        #[arg(long, value_enum, default_value_t = EstimatorArg::Mcmc)]
        estimator: EstimatorArg,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate { .. } => "simulate",
            Command::Prob { .. } => "prob",
            Command::Counts { .. } => "counts",
            Command::FitMle { .. } => "fit-mle",
            Command::FitBayes { .. } => "fit-bayes",
            Command::Mcmc { .. } => "mcmc",
            Command::Evidence { .. } => "evidence",
            Command::SelectM { .. } => "select-m",
            Command::Predict { .. } => "predict",
            Command::Verify { .. } => "verify",
            Command::Experiment { .. } => "experiment",
        }
    }
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    kind: &'static str,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::WordLength { .. }
            | Error::LengthMismatch { .. }
            | Error::ProbabilityOutOfRange { .. }
            | Error::IndexOutOfRange { .. }
            | Error::WordLengthMismatch { .. }
            | Error::InvalidArgument(_)
            | Error::BudgetExceeded(_) => (EXIT_USAGE, "usage"),
            _ => (EXIT_DATA, "data"),
        };
        Failure {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        kind: "usage",
        message: message.into(),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

struct Output {
    report: RunReport,
    csv: Option<String>,
    failed_check: bool,
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf8")
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn word_label(i: usize, m: WordLength) -> String {
    crate::graph::Word::new(i, m)
        .expect("index in range")
        .letters()
        .iter()
        .map(|b| char::from(b'0' + b))
        .collect()
}

struct Loaded {
    seq: BinarySequence,
    name: String,
    bytes: Vec<u8>,
}

fn load(source: &SequenceInput) -> CliResult<Loaded> {
    if let Some(path) = &source.input {
        let bytes = std::fs::read(path).map_err(Error::from)?;
        let text = String::from_utf8(bytes.clone()).map_err(|e| Error::Dataset(e.to_string()))?;
        return Ok(Loaded {
            seq: parse_sequence_text(&text)?,
            name: path.display().to_string(),
            bytes,
        });
    }
    if let Some(s) = &source.sequence {
        return Ok(Loaded {
            seq: parse_sequence_text(s)?,
            name: "sequence".into(),
            bytes: s.as_bytes().to_vec(),
        });
    }
    if let Some(path) = &source.series {
        let config = match &source.series_config {
            Some(c) => SeriesConfig::from_json(&std::fs::read_to_string(c).map_err(Error::from)?)?,
            None => return Err(usage("--series needs --series-config")),
        };
        let bytes = std::fs::read(path).map_err(Error::from)?;
        return Ok(Loaded {
            seq: load_labeled_series(path, &config)?.sequence,
            name: path.display().to_string(),
            bytes,
        });
    }
    if source.boat_race {
        return Ok(Loaded {
            seq: boat_race()?.sequence,
            name: "boat_race.csv".into(),
            bytes: BOAT_RACE_CSV.as_bytes().to_vec(),
        });
    }
    Err(usage("give one of --input, --sequence, --series or --boat-race"))
}

fn need_m(common: &Common) -> CliResult<WordLength> {
    let m = common.m.ok_or_else(|| usage("--m is required"))?;
    Ok(WordLength::new(m)?)
}

fn table_from(p: &[f64], m: Option<u32>) -> CliResult<TransitionTable> {
    let k = p.len();
    if !k.is_power_of_two() || k < 2 {
        return Err(usage(format!("table needs 2^m entries, got {k}")));
    }
    let inferred = k.trailing_zeros();
    if let Some(m) = m {
        if m != inferred {
            return Err(usage(format!("--m {m} does not match a table of {k} entries")));
        }
    }
    Ok(TransitionTable::new(WordLength::new(inferred)?, p.to_vec())?)
}

fn prior_rule(common: &Common) -> CliResult<PriorRule> {
    match (common.prior_alpha.as_slice(), common.prior_beta.as_slice()) {
        ([a], [b]) => {
            if !(*a > 0.0 && *b > 0.0) {
                return Err(usage("prior parameters must be positive"));
            }
            Ok(PriorRule::Scalar { alpha: *a, beta: *b })
        }
        (a, b) => {
            let m = need_m(common)?;
            let k = m.num_words();
            let expand = |v: &[f64]| if v.len() == 1 { vec![v[0]; k] } else { v.to_vec() };
            Ok(PriorRule::PerEdge(BetaPrior::new(m, expand(a), expand(b))?))
        }
    }
}

fn report<T: Serialize>(command: &str, payload: &T, common: &Common) -> CliResult<RunReport> {
    Ok(RunReport::new(command, payload)?.with_seed(common.seed))
}

fn execute(cli: &Cli) -> CliResult<Output> {
    let common = &cli.common;
    let name = cli.command.name();
    let plain = |report: RunReport, csv: Option<String>| Output {
        report,
        csv,
        failed_check: false,
    };
    match &cli.command {
        Command::Simulate {
            table,
            n,
            init,
            word,
            replicate,
        } => {
            let t = table_from(table, common.m)?;
            let init = match (init, word) {
                (InitArg::Stationary, _) => InitialWord::StationaryDraw,
                (InitArg::Uniform, _) => InitialWord::Uniform,
                (InitArg::Fixed, Some(w)) => InitialWord::Fixed(*w),
                (InitArg::Fixed, None) => return Err(usage("--init fixed needs --word")),
            };
            let cfg = SimulationConfig {
                n: *n,
                seed: common.seed,
                init,
                replicate: *replicate,
            };
            let seq = simulate(&t, &cfg)?;
            #[derive(Serialize)]
            struct P<'a> {
                table: &'a [f64],
                config: SimulationConfig,
                sequence: String,
            }
            let text = seq.to_letter_string();
            let csv = csv_table(
                &["position", "letter"],
                text.chars().enumerate().map(|(i, c)| vec![(i + 1).to_string(), c.to_string()]),
            );
            let payload = P {
                table: t.probabilities(),
                config: cfg,
                sequence: text,
            };
            Ok(plain(report(name, &payload, common)?, Some(csv)))
        }
        Command::Prob { table, source } => {
            let t = table_from(table, common.m)?;
            let input = load(source)?;
            let letters = input
                .seq
                .as_contiguous()
                .ok_or_else(|| Failure::from(Error::Dataset("prob needs a gap-free sequence".into())))?;
            let joint = JointDistribution::new(&t)?;
            let indexed = if letters.len() as u32 <= MAX_INDEXED_LENGTH {
                let i = letters.iter().fold(0u64, |a, &b| (a << 1) | b as u64);
                Some(joint.probability_indexed(letters.len() as u32, i)?)
            } else {
                None
            };
            #[derive(Serialize)]
            struct P {
                n: usize,
                probability: f64,
                ln_probability: f64,
                probability_indexed: Option<f64>,
            }
            let payload = P {
                n: letters.len(),
                probability: joint.probability(&letters),
                ln_probability: joint.ln_probability(&letters),
                probability_indexed: indexed,
            };
            let csv = csv_table(
                &["n", "probability", "ln_probability"],
                [vec![
                    payload.n.to_string(),
                    payload.probability.to_string(),
                    payload.ln_probability.to_string(),
                ]],
            );
            Ok(plain(report(name, &payload, common)?.with_input(&input.name, &input.bytes), Some(csv)))
        }
        Command::Counts { source } => {
            let m = need_m(common)?;
            let input = load(source)?;
            let c = count_transitions(&input.seq, m);
            let csv = csv_table(
                &["word", "n0", "n1"],
                (0..m.num_words()).map(|i| vec![word_label(i, m), c.n0()[i].to_string(), c.n1()[i].to_string()]),
            );
            Ok(plain(report(name, &c, common)?.with_input(&input.name, &input.bytes), Some(csv)))
        }
        Command::FitMle { source } => {
            let m = need_m(common)?;
            let input = load(source)?;
            let fit = mle(&count_transitions(&input.seq, m));
            let csv = csv_table(
                &["word", "visits", "estimate", "std_error", "lower", "upper"],
                fit.edges.iter().enumerate().map(|(i, e)| {
                    let ci = e.wald_interval(1.959_963_984_540_054);
                    vec![
                        word_label(i, m),
                        e.visits.to_string(),
                        opt(e.estimate),
                        opt(e.std_error),
                        opt(ci.map(|c| c.0)),
                        opt(ci.map(|c| c.1)),
                    ]
                }),
            );
            Ok(plain(report(name, &fit, common)?.with_input(&input.name, &input.bytes), Some(csv)))
        }
        Command::FitBayes { source, level } => {
            let m = need_m(common)?;
            if !(*level > 0.0 && *level < 1.0) {
                return Err(usage("--level must be in (0, 1)"));
            }
            let input = load(source)?;
            let counts = count_transitions(&input.seq, m);
            let prior = prior_rule(common)?.prior_for(m)?;
            let post = posterior(&counts, &prior)?;
            #[derive(Serialize)]
            struct P {
                m: u32,
                level: f64,
                log_evidence: f64,
                edges: Vec<crate::inference::EdgePosterior>,
            }
            let payload = P {
                m: m.get(),
                level: *level,
                log_evidence: log_evidence(&counts, &prior)?,
                edges: post.summaries(*level),
            };
            let csv = csv_table(
                &["word", "alpha", "beta", "mean", "mode", "lower", "upper", "no_data"],
                payload.edges.iter().enumerate().map(|(i, e)| {
                    vec![
                        word_label(i, m),
                        e.alpha.to_string(),
                        e.beta.to_string(),
                        e.mean.to_string(),
                        opt(e.mode),
                        e.lower.to_string(),
                        e.upper.to_string(),
                        e.no_data.to_string(),
                    ]
                }),
            );
            Ok(plain(report(name, &payload, common)?.with_input(&input.name, &input.bytes), Some(csv)))
        }
        Command::Mcmc {
            source,
            iterations,
            burn_in,
            proposal_scale,
            samples,
        } => {
            let m = need_m(common)?;
            let input = load(source)?;
            let counts = count_transitions(&input.seq, m);
            let prior = prior_rule(common)?.prior_for(m)?;
            let cfg = MhConfig {
                iterations: *iterations,
                burn_in: *burn_in,
                proposal_scale: *proposal_scale,
                seed: common.seed,
                ..MhConfig::default()
            };
            let mut res = mh_sample_posterior(&counts, &prior, &cfg)?;
            if !samples {
                res.edges.iter_mut().for_each(|e| e.samples.clear());
            }
            let csv = csv_table(
                &["word", "mean", "lower", "upper", "acceptance_rate", "no_data"],
                res.edges.iter().enumerate().map(|(i, e)| {
                    vec![
                        word_label(i, m),
                        e.mean.to_string(),
                        e.interval.0.to_string(),
                        e.interval.1.to_string(),
                        e.acceptance_rate.to_string(),
                        e.no_data.to_string(),
                    ]
                }),
            );
            #[derive(Serialize)]
            struct P {
                config: MhConfig,
                result: crate::inference::MhResult,
            }
            let payload = P { config: cfg, result: res };
            Ok(plain(report(name, &payload, common)?.with_input(&input.name, &input.bytes), Some(csv)))
        }
        Command::Evidence { source } => {
            let m = need_m(common)?;
            let input = load(source)?;
            let counts = count_transitions(&input.seq, m);
            let ev = log_evidence(&counts, &prior_rule(common)?.prior_for(m)?)?;
            #[derive(Serialize)]
            struct P {
                m: u32,
                transitions: u64,
                log_evidence: f64,
            }
            let payload = P {
                m: m.get(),
                transitions: counts.total_transitions(),
                log_evidence: ev,
            };
            let csv = csv_table(
                &["m", "transitions", "log_evidence"],
                [vec![m.get().to_string(), payload.transitions.to_string(), ev.to_string()]],
            );
            Ok(plain(report(name, &payload, common)?.with_input(&input.name, &input.bytes), Some(csv)))
        }
        Command::SelectM {
            source,
            m_max,
            conditioning,
        } => {
            let input = load(source)?;
            let cond = match conditioning {
                ConditioningArg::Aligned => Conditioning::Aligned,
                ConditioningArg::PerModel => Conditioning::PerModel,
            };
            let r = select_word_length_with(&input.seq, WordLength::new(*m_max)?, &prior_rule(common)?, cond)?;
            let csv = csv_table(
                &["m", "transitions", "log_evidence", "wins"],
                (0..r.candidates.len()).map(|a| {
                    vec![
                        r.candidates[a].to_string(),
                        r.transitions[a].to_string(),
                        r.log_evidence[a].to_string(),
                        r.wins[a].to_string(),
                    ]
                }),
            );
            Ok(plain(report(name, &r, common)?.with_input(&input.name, &input.bytes), Some(csv)))
        }
        Command::Predict {
            source,
            table,
            fit,
            mode,
            marginal,
        } => {
            let input = load(source)?;
            let t = match table {
                Some(p) => table_from(p, common.m)?,
                None => {
                    let m = need_m(common)?;
                    let counts = count_transitions(&input.seq, m);
                    match fit {
                        FitArg::PosteriorMean => posterior(&counts, &prior_rule(common)?.prior_for(m)?)?.mean_table(),
                        FitArg::Mle => mle(&counts).table().ok_or_else(|| {
                            Failure::from(Error::Dataset("some word is never left; MLE undefined".into()))
                        })?,
                    }
                }
            };
            let history = input.seq.slots();
            let p = match (mode, marginal) {
                (ModeArg::Conditional, _) => crate::distribution::predict_next(&t, history, PredictMode::Conditional)?,
                (ModeArg::WindowMarginal, MarginalArg::Stationary) => {
                    crate::distribution::predict_next(&t, history, PredictMode::WindowMarginal)?
                }
                (ModeArg::WindowMarginal, MarginalArg::Observed) => {
                    let (z, o) = input.seq.letter_totals();
                    let n = (z + o) as f64;
                    marginal_next(&t, history, [z as f64 / n, o as f64 / n])
                }
            };
            #[derive(Serialize)]
            struct P<'a> {
                table: &'a [f64],
                mode: &'static str,
                probability_one: f64,
            }
            let payload = P {
                table: t.probabilities(),
                mode: match mode {
                    ModeArg::Conditional => "conditional",
                    ModeArg::WindowMarginal => "window-marginal",
                },
                probability_one: p,
            };
            let csv = csv_table(&["mode", "probability_one"], [vec![payload.mode.to_string(), p.to_string()]]);
            Ok(plain(report(name, &payload, common)?.with_input(&input.name, &input.bytes), Some(csv)))
        }
        Command::Verify { n, trials, max_n } => {
            let m = need_m(common)?;
            let budget = EnumerationBudget {
                max_n: *max_n,
                ..EnumerationBudget::default()
            };
            let r = verify(m, *n, *trials, common.seed, &budget)?;
            let csv = csv_table(
                &["check", "comparisons", "max_error", "tolerance", "passed"],
                r.checks.iter().map(|c| {
                    vec![
                        c.name.clone(),
                        c.comparisons.to_string(),
                        c.max_error.to_string(),
                        c.tolerance.to_string(),
                        c.passed.to_string(),
                    ]
                }),
            );
            Ok(Output {
                failed_check: !r.passed(),
                report: report(name, &r, common)?,
                csv: Some(csv),
            })
        }
        Command::Experiment {
            study,
            replicates,
            n,
            m_max,
            estimator,
        } => run_study(*study, *replicates, *n, *m_max, *estimator, common).map(|(r, c)| plain(r, c)),
    }
}

fn estimation_csv(study: &crate::experiment::EstimationStudy, m: WordLength) -> String {
    let first = &study.rows[0];
    csv_table(
        &["word", "truth", "estimate", "lower", "upper", "coverage"],
        (0..m.num_words()).map(|i| {
            vec![
                word_label(i, m),
                study.truth[i].to_string(),
                first[i].estimate.to_string(),
                first[i].lower.to_string(),
                first[i].upper.to_string(),
                study.coverage[i].to_string(),
            ]
        }),
    )
}

fn run_study(
    study: Study,
    replicates: Option<usize>,
    n: Option<usize>,
    m_max: u32,
    estimator: EstimatorArg,
    common: &Common,
) -> CliResult<(RunReport, Option<String>)> {
    let prior = prior_rule(common)?;
    let seed = common.seed;
    let estimator = match estimator {
        EstimatorArg::Conjugate => Estimator::Conjugate,
        EstimatorArg::Mcmc => Estimator::Mcmc(MhConfig {
            seed,
            ..MhConfig::default()
        }),
    };
    let name = "experiment";
    match study {
        Study::TeinfLeft | Study::TeinfRight => {
            let t = if study == Study::TeinfLeft {
                teinf_left_table()
            } else {
                teinf_right_table()
            };
            let s = estimation_study(&t, n.unwrap_or(200), replicates.unwrap_or(100), seed, &prior, &estimator)?;
            let csv = estimation_csv(&s, t.word_length());
            Ok((report(name, &s, common)?, Some(csv)))
        }
        Study::Teinf2 => {
            let lengths: Vec<usize> = n.map(|n| vec![n]).unwrap_or_else(|| TEINF2_LENGTHS.to_vec());
            let s = length_study(&teinf_left_table(), &lengths, replicates.unwrap_or(100), seed, &prior)?;
            let m = WordLength::new(2).expect("valid");
            let csv = csv_table(
                &["n", "word", "mean_estimate", "lower", "upper"],
                s.rows.iter().flat_map(|r| {
                    (0..m.num_words())
                        .map(|i| {
                            vec![
                                r.n.to_string(),
                                word_label(i, m),
                                r.mean_estimate[i].to_string(),
                                r.lower[i].to_string(),
                                r.upper[i].to_string(),
                            ]
                        })
                        .collect::<Vec<_>>()
                }),
            );
            Ok((report(name, &s, common)?, Some(csv)))
        }
        Study::Hist2i => {
            let mm = WordLength::new(m_max)?;
            let reps = replicates.unwrap_or(1000);
            let len = n.unwrap_or(200);
            let left = selection_study(&teinf_left_table(), len, reps, seed, mm, &prior)?;
            let right = selection_study(&teinf_right_table(), len, reps, seed.wrapping_add(1), mm, &prior)?;
            let csv = csv_table(
                &["m", "count_m2_table", "count_m3_table"],
                (0..left.counts.len()).map(|i| {
                    vec![(i + 1).to_string(), left.counts[i].to_string(), right.counts[i].to_string()]
                }),
            );
            #[derive(Serialize)]
            struct P {
                m2_table: crate::experiment::SelectionStudy,
                m3_table: crate::experiment::SelectionStudy,
            }
            let payload = P {
                m2_table: left,
                m3_table: right,
            };
            Ok((report(name, &payload, common)?, Some(csv)))
        }
        Study::Boatrace => {
            let series = boat_race()?;
            let fits = [WordLength::new(2)?, WordLength::new(3)?];
            let s = boat_race_study(&series, WordLength::new(m_max)?, &fits, &prior)?;
            let csv = csv_table(
                &["m", "word", "n0", "n1", "posterior_mean", "lower", "upper", "mle"],
                s.fits.iter().flat_map(|f| {
                    let m = WordLength::new(f.m).expect("valid");
                    (0..m.num_words())
                        .map(|i| {
                            vec![
                                f.m.to_string(),
                                word_label(i, m),
                                f.n0[i].to_string(),
                                f.n1[i].to_string(),
                                f.posterior[i].mean.to_string(),
                                f.posterior[i].lower.to_string(),
                                f.posterior[i].upper.to_string(),
                                opt(f.mle[i].estimate),
                            ]
                        })
                        .collect::<Vec<_>>()
                }),
            );
            Ok((
                report(name, &s, common)?.with_input("boat_race.csv", BOAT_RACE_CSV.as_bytes()),
                Some(csv),
            ))
        }
    }
}

fn destination(common: &Common, command: &str) -> Option<PathBuf> {
    if let Some(p) = &common.out {
        return Some(p.clone());
    }
    let dir = std::env::var_os(OUTPUT_DIR_ENV)?;
    let ext = match common.output {
        OutputFormat::Json => "json",
        OutputFormat::Csv => "csv",
    };
    Some(Path::new(&dir).join(format!("{command}.{ext}")))
}

fn write_error(stderr: &mut dyn Write, f: &Failure) {
    let doc = serde_json::json!({ "error": { "kind": f.kind, "code": f.code, "message": f.message } });
    let _ = writeln!(stderr, "{doc}");
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run_cli<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            if code == EXIT_OK {
                let _ = write!(stdout, "{}", e.render());
            } else {
                let _ = write!(stderr, "{}", e.render());
            }
            return code;
        }
    };
    let out = match execute(&cli) {
        Ok(o) => o,
        Err(f) => {
            write_error(stderr, &f);
            return f.code;
        }
    };
    let text = match cli.common.output {
        OutputFormat::Json => out.report.to_json(),
        OutputFormat::Csv => match out.csv {
            Some(c) => c,
            None => {
                let f = usage("this command has no CSV output");
                write_error(stderr, &f);
                return f.code;
            }
        },
    };
    match destination(&cli.common, cli.command.name()) {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                if let Err(e) = std::fs::create_dir_all(parent) {
                    write_error(stderr, &Error::from(e).into());
                    return EXIT_DATA;
                }
            }
            if let Err(e) = std::fs::write(&path, text) {
                write_error(stderr, &Error::from(e).into());
                return EXIT_DATA;
            }
        }
        None => {
            let _ = stdout.write_all(text.as_bytes());
        }
    }
    if out.failed_check {
        EXIT_VERIFY
    } else {
        EXIT_OK
    }
}
