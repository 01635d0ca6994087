use thiserror::Error;

use crate::config::ConfigViolation;

/// Errors raised across the crate.
///
/// Variants that correspond to a reason code carry the code in their
/// message, so the CLI and the report can surface it verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("ALPHA_RANGE: stability index {0} is outside the open interval (1, 2)")]
    AlphaRange(f64),

    #[error("DOMAIN: {0}")]
    Domain(String),

    #[error("QUADRATURE_NONCONVERGENCE: estimate {estimate:e} with error estimate {error:e}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("ENTRANCE_FAIL: {0}")]
    EntranceFail(String),

    #[error("NONPOSITIVE_SPECTRUM: leading Green eigenvalue {0:e}")]
    NonpositiveSpectrum(f64),

    #[error("NEGATIVE_EIGENVALUE: Green eigenvalue {value:e} below the noise floor -{floor:e}")]
    NegativeEigenvalue { value: f64, floor: f64 },

    #[error("DEGENERATE_GAP: lambda_1 - lambda_0 = {gap:e}")]
    DegenerateGap { gap: f64 },

    #[error("INSUFFICIENT_TAIL: {0}")]
    InsufficientTail(String),

    #[error("TOO_FEW_SURVIVORS: {survivors} survivors, at least {required} required")]
    TooFewSurvivors { survivors: usize, required: usize },

    #[error("invalid simulation config: {0}")]
    SimConfig(String),

    #[error("invalid sigma table: {0}")]
    Table(String),

    #[error("invalid configuration:\n{}", format_violations(.0))]
    Config(Vec<ConfigViolation>),

    #[error("io: {0}")]
    Io(String),
}

fn format_violations(v: &[ConfigViolation]) -> String {
    v.iter()
        .map(|x| format!("  {x}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
