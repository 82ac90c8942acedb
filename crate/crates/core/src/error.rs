use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("reserved token `{0}` used as a letter")]
    ReservedToken(String),

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("counter overflow")]
    CounterOverflow,

    #[error("search frontier exceeded the state cap of {cap}")]
    BoundExceededMemory { cap: usize },

    #[error("no positive path from `{state}` to any zero configuration with finite independence level")]
    NoAnchor { state: String },

    #[error("counter effect outside {{-1,0,+1}} in rule {0}")]
    UnshrunkInput(String),

    #[error("depth {depth} exceeds the enumeration guard of {max}")]
    DepthTooLarge { depth: usize, max: usize },

    #[error("invalid automaton: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
