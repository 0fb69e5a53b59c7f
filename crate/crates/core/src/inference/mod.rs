//! Estimation of transition probabilities and word length from observed
//! sequences.

mod bayes;
mod counts;
mod fisher;
mod likelihood;
mod mcmc;

pub use bayes::{
    log_bayes_factor, log_bayes_factor_with, log_evidence, posterior, select_word_length,
    select_word_length_with, BetaPrior, Conditioning, EdgePosterior, EvidenceReport,
    PosteriorSpec, PriorRule, TIE_TOLERANCE,
};
pub use counts::{count_transitions, count_transitions_aligned, TransitionCounts};
pub use fisher::{
    expected_letter_counts, expected_transition_count, expected_transition_count_indexed,
    fisher_information, fisher_information_free, MAX_INDEXED_EXPECTATION_LENGTH,
};
pub use likelihood::{log_likelihood, mle, EdgeEstimate, MleFit};
pub use mcmc::{mh_sample_posterior, MhConfig, MhEdge, MhResult};
