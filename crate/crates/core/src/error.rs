use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("letter {letter:?} is not in the {language} alphabet")]
    UnknownLetter { letter: char, language: String },

    #[error("word {0:?} contains no vowel")]
    NoVowel(String),

    #[error("no lexicon-free nonce for {root:?} after {attempts} attempts")]
    ExhaustedRetries { root: String, attempts: u32 },

    #[error("affix at position {0} is empty")]
    EmptyAffix(usize),

    #[error("{orderings} orderings exceed the combinatorial cap of {cap}")]
    CombinatorialCap { orderings: u128, cap: usize },

    #[error("record {0} has no negative candidate (single morpheme without a manual negative affix)")]
    NoNegativeAvailable(String),

    #[error("strategy {strategy} is not available for {language}")]
    UnsupportedStrategy { strategy: String, language: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("record {record_id}: composition {composed:?} does not match gold surface {gold:?}")]
    CompositionMismatch {
        record_id: String,
        composed: String,
        gold: String,
    },

    #[error("record {0} has no nonce root (run gen-nonce first)")]
    MissingNonce(String),

    #[error("record {0} has no context sentence")]
    MissingContext(String),

    #[error("need {needed} demonstrations with {morphemes} morphemes for {instance}, found {found}")]
    InsufficientDemos {
        instance: String,
        morphemes: usize,
        needed: usize,
        found: usize,
    },

    #[error("template {key}: {detail}")]
    PlaceholderMismatch { key: String, detail: String },

    #[error("missing templates: {}", .0.join(", "))]
    MissingTemplate(Vec<String>),

    #[error("transport error: {0}")]
    Transport(String),

    #[error("authentication failed: {0}")]
    Auth(String),

    #[error("rate limited (retry after {retry_after_secs:?}s)")]
    RateLimited { retry_after_secs: Option<u64> },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("record for instance {0} does not join to any suite instance")]
    OrphanRecord(String),

    #[error("profile {path}: {detail}")]
    Profile { path: String, detail: String },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Network-level failures; the CLI maps these to exit code 2.
    pub fn is_transport(&self) -> bool {
        matches!(
            self,
            Error::Transport(_) | Error::Auth(_) | Error::RateLimited { .. }
        )
    }
}
