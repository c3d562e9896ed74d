use thiserror::Error;

/// Errors raised across the modeling pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("assembly error in element {element}: {reason}")]
    Assembly { element: usize, reason: String },

    #[error("factorization broke down at shift {shift_hz:.6e} Hz (pivot {pivot}); try a different shift")]
    Breakdown { shift_hz: f64, pivot: usize },

    #[error("eigensolver did not converge after {iterations} iterations (worst residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error("harmonic response is singular: drive frequency {frequency_hz} Hz hits mode {mode} with zero damping")]
    Singular { frequency_hz: f64, mode: usize },

    #[error("mixing angle undefined: shape has no component in the degenerate pair")]
    UndefinedAngle,

    #[error("at grid point (f = {frequency_hz} Hz, dphi = {phase_deg} deg): {source}")]
    GridPoint {
        frequency_hz: f64,
        phase_deg: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {value}")))
    }
}
