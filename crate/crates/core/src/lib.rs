//! Deterministic one-counter automata with resets: trace semantics,
//! bounded equivalence, independence levels, and regularity checks.

pub mod analysis;
pub mod equivalence;
pub mod error;
pub mod fixtures;
pub mod generators;
pub mod model;
pub mod oracle;
pub mod paths;
pub mod semantics;
pub mod toolkit;
pub mod transform;

pub use error::{Error, Result};
