//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SiegelError {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular cocycle: CZ+D has condition number {cond:.3e} (cutoff {cutoff:.1e})")]
    SingularCocycle { cond: f64, cutoff: f64 },

    #[error("path too coarse: metric increment {increment:.3} at segment {segment} (must be < 0.5); refine the sampling")]
    RefinementRequired { segment: usize, increment: f64 },

    #[error("reduction did not terminate after {max_iter} iterations; best log-height {best_log_height:.6}")]
    NonTermination {
        max_iter: usize,
        best_log_height: f64,
    },

    #[error("trajectory window too short: {0}")]
    Window(String),

    #[error("solver precondition violated: {what}; defect {defect:.3e}")]
    Precondition { what: String, defect: f64 },

    #[error("resonant torus mode {mode:?}: frame divisor vanishes")]
    Resonance { mode: Vec<i64> },

    #[error("accuracy error: {0}")]
    Accuracy(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("compute budget exceeded: {0}")]
    Budget(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("no prediction for class {0}")]
    NoPrediction(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(String),
}

impl From<serde_json::Error> for SiegelError {
    fn from(e: serde_json::Error) -> Self {
        SiegelError::Serde(e.to_string())
    }
}
