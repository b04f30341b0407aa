//! Numerical tolerances shared across the crate.

/// Global "is this zero" threshold for eigenvalues, ranks and sign tests.
pub const ZERO_TOL: f64 = 1e-9;

/// Hermiticity / trace checks on inputs, measured as an HS norm.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Trace-one check on density matrices.
pub const TRACE_TOL: f64 = 1e-10;

/// Smallest eigenvalue accepted for a PSD matrix.
pub const PSD_TOL: f64 = 1e-9;

/// Off-diagonal Frobenius mass (relative to ‖A‖_HS) at which Jacobi sweeps stop.
pub const EIG_OFF_TOL: f64 = 1e-12;

/// Default termination threshold |N_i| for the closest-separable-state loop.
pub const DEFAULT_CSS_TOL: f64 = 1e-12;

/// Environment variable that overrides [`DEFAULT_CSS_TOL`] in the CLI.
pub const TOL_ENV_VAR: &str = "CSSKIT_TOL";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub zero: f64,
    pub css: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            zero: ZERO_TOL,
            css: DEFAULT_CSS_TOL,
        }
    }
}

impl Tolerances {
    /// Defaults, with the CSS tolerance taken from `CSSKIT_TOL` when it parses
    /// as a positive number.
    pub fn from_env() -> Self {
        let mut t = Self::default();
        if let Some(v) = std::env::var(TOL_ENV_VAR)
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
        {
            if v > 0.0 && v.is_finite() {
                t.css = v;
            }
        }
        t
    }
}
