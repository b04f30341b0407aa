use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// One violated density-matrix invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NotHermitian { defect: f64 },
    TraceNotOne { trace: f64 },
    NotPsd { min_eigenvalue: f64 },
    DimensionMismatch { dims: Vec<usize>, size: usize },
    NonFinite,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NotHermitian { defect } => write!(f, "NotHermitian (‖m−m†‖ = {defect:.3e})"),
            Violation::TraceNotOne { trace } => write!(f, "TraceNotOne (trace = {trace})"),
            Violation::NotPsd { min_eigenvalue } => {
                write!(f, "NotPSD (min eigenvalue = {min_eigenvalue:.3e})")
            }
            Violation::DimensionMismatch { dims, size } => {
                write!(
                    f,
                    "DimensionMismatch (dims {dims:?} for a {size}x{size} matrix)"
                )
            }
            Violation::NonFinite => write!(f, "NonFinite entries"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (‖m−m†‖_HS = {defect:.3e})")]
    NotHermitian { defect: f64 },
    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid density matrix: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))]
    InvalidState(Vec<Violation>),
    #[error("unknown state name `{0}`")]
    UnknownName(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("invalid bipartition: {0}")]
    InvalidCut(String),
    #[error("closest-state iteration did not terminate within {max} iterations")]
    MaxIterationsExceeded { max: usize },
    /// `distance_sq` is the distance to the rejected candidate, kept for diagnostics.
    #[error("final CSS is not a valid state (min eigenvalue {min_eigenvalue:.3e})")]
    InvalidCss {
        min_eigenvalue: f64,
        distance_sq: f64,
        violations: Vec<Violation>,
    },
    #[error("input is numerically separable (distance² {distance_sq:.3e}); no witness exists")]
    DegenerateInput { distance_sq: f64 },
    #[error("expected {expected} parameters, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// The list of violated invariants when this is a validation failure.
    pub fn violations(&self) -> &[Violation] {
        match self {
            Error::InvalidState(v) | Error::InvalidCss { violations: v, .. } => v,
            _ => &[],
        }
    }
}
