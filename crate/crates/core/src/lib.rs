//! Morpheme-level decoding of noisy spoken-Korean diphone streams.
//!
//! A recognizer's diphone output is matched against a trie of lexicon
//! headers with a Viterbi search, and the spotted morphemes are combined in a
//! triangular table under morpheme and phoneme connectivity constraints.
//! [`Model::bundled`] loads the bundled lexicon and grammar;
//! [`analyzer::analyze`] runs the whole chain for one eonjeol.

pub mod analyzer;
pub mod config;
pub mod corpus;
pub mod decoder;
pub mod eval;
pub mod lexicon;
pub mod model;
pub mod phonology;
pub mod pipeline;
pub mod simulator;
pub mod trie_hmm;

pub use analyzer::{analyze, Analysis, AnalyzeError, AnalyzerConfig, EojeolOutput, TriangularTable};
pub use config::{ConfigError, RunConfig};
pub use corpus::{CorpusError, GoldLine};
pub use decoder::{decode, decode_exact, CandidateLattice, DecodeError, MorphemeCandidate, ObservationSeq, PruneConfig, Search};
pub use eval::{align_and_count, format_rate, EvalCounts};
pub use lexicon::{EntryId, Grammar, Lexicon, LexiconError, TagSet, UpmEntry};
pub use model::{Model, ModelSources};
pub use phonology::{Diphone, DiphoneId, DiphoneInventory, DiphoneKind, Phonology, PhonologyError};
pub use simulator::{ConfusionMode, GoldRecord, NoiseConfig, SimError};
pub use trie_hmm::{HmmParams, IndexError, TrieHmmIndex};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Phonology(#[from] PhonologyError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Analyze(#[from] AnalyzeError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Runtime(String),
}
