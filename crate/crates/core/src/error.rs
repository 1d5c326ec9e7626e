//! Error types shared across the crate.

use std::io;
use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("missing metadata keys: {}", keys.join(", "))]
    MissingMetadata { keys: Vec<String> },

    #[error("profile has {found} points, at least {min} required")]
    TooFewPoints { found: usize, min: usize },

    #[error("y_plus must be strictly increasing, violated at point {index}")]
    UnorderedPoints { index: usize },

    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },

    #[error("re_theta = {stated} inconsistent with U*theta/nu = {derived}")]
    InconsistentReTheta { stated: f64, derived: f64 },

    #[error("{context}: found {found} points, at least {needed} required")]
    InsufficientPoints {
        context: String,
        needed: usize,
        found: usize,
    },

    #[error("abscissa values are all equal, line fit is degenerate")]
    ConstantAbscissa,

    #[error("non-physical fit: {0}")]
    NonPhysicalFit(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no valid breakpoint in [{lo}, {hi}]: every candidate leaves fewer than 3 points on one side")]
    NoValidBreakpoint { lo: f64, hi: f64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("psi transform undefined at y_plus = {y_plus}: log argument is not positive")]
    PsiDomain { y_plus: f64 },

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("run {label}, stage {stage}: {source}")]
    Stage {
        label: String,
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("writing {path}: {source}")]
    WriteFile {
        path: String,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Wrap an error with the run label and pipeline stage it occurred in.
    pub fn at_stage(self, label: &str, stage: &'static str) -> Error {
        Error::Stage {
            label: label.to_string(),
            stage,
            source: Box::new(self),
        }
    }
}
