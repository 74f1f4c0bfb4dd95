//! Turning step text into `(predecessor, successor, count)` triples.
//!
//! Three routes produce the same [`ExtractionResult`]: the deterministic
//! [`rule_extract`] scanner, [`parse_llm_output`] + [`resolve_names`] for raw
//! model output, and [`RemoteExtractor`], which ships the step to a model
//! endpoint and parses what comes back.

mod lexicon;
mod remote;
mod rules;
mod sft;
mod wire;

use thiserror::Error;

use crate::model::ExtractionResult;

pub use lexicon::{Lexicon, LexiconError};
pub use remote::{ExtractorConfig, ExtractorMode, RemoteExtractor, DEFAULT_TIMEOUT};
pub use rules::{
    rule_extract, rule_extract_detailed, Extraction, RuleExtractor, RuleSet, RuleSetError, DEFAULT_INSTRUCTION,
};
pub use sft::{emit_sft_dataset, generate_sft_corpus, read_sft_dataset, DatasetError};
pub use wire::{parse_llm_output, resolve_names, serialize_extraction, RawTriple};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtractError {
    #[error("no known component mentioned")]
    NoComponentsFound,
    #[error("only one component mentioned ({0}); no predecessor")]
    SingleComponent(String),
    #[error("cannot tell predecessor from successor among {0:?}")]
    AmbiguousRoles(Vec<String>),
    #[error("expected 3 comma-separated fields, got {0}")]
    WrongArity(usize),
    #[error("count {0:?} is not an integer >= 1")]
    BadCount(String),
    #[error("field {0:?} is not a usable component name")]
    BadName(String),
    #[error("predecessor and successor are the same component {0:?}")]
    SameComponent(String),
    #[error("unknown component {0:?}")]
    UnknownComponent(String),
    #[error("extractor endpoint timed out")]
    Timeout,
    #[error("extractor endpoint unreachable: {0}")]
    Transport(String),
    #[error("{source} (raw response {raw:?})")]
    BadResponse {
        raw: String,
        #[source]
        source: Box<ExtractError>,
    },
}

impl ExtractError {
    /// Stable variant name, used in structured error bodies.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::NoComponentsFound => "NoComponentsFound",
            Self::SingleComponent(_) => "SingleComponent",
            Self::AmbiguousRoles(_) => "AmbiguousRoles",
            Self::WrongArity(_) => "WrongArity",
            Self::BadCount(_) => "BadCount",
            Self::BadName(_) => "BadName",
            Self::SameComponent(_) => "SameComponent",
            Self::UnknownComponent(_) => "UnknownComponent",
            Self::Timeout => "Timeout",
            Self::Transport(_) => "TransportError",
            Self::BadResponse { source, .. } => source.kind(),
        }
    }

    /// The error with any raw-response wrapper removed.
    pub fn root(&self) -> &ExtractError {
        match self {
            Self::BadResponse { source, .. } => source.root(),
            other => other,
        }
    }
}

/// Anything that can turn one step's text into a triple.
pub trait Extractor: Send + Sync {
    fn extract(&self, text: &str) -> Result<ExtractionResult, ExtractError>;
}

/// Lowercases, trims and collapses internal whitespace to single spaces.
pub fn normalize_surface(text: &str) -> String {
    text.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>().join(" ")
}

/// Word tokens of normalized text; punctuation separates tokens.
pub(crate) fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase().split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_owned).collect()
}
