#[cfg(feature = "oracle")]
pub mod cli;
pub mod distribution;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod inference;
pub mod io;
#[cfg(feature = "oracle")]
pub mod oracle;
pub mod process;
pub mod sequence;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{TransitionTable, Word, WordLength};
pub use sequence::BinarySequence;
