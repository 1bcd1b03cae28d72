use thiserror::Error;

/// Errors raised by the numerical layers. Poles and depletion are reported
/// as typed values so that sweeps can tell physics limits from bugs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: refinement changed the result by {change:.3e} (tolerance {tol:.1e})")]
    NonConvergence { change: f64, tol: f64 },

    #[error("photon too fast for source: ground amplitude depleted at t = {t:.4e} s")]
    PhotonTooFast { t: f64 },

    #[error(
        "trace drift {drift:.3e} at t = {t:.4e} s exceeds 1e-6; reduce the step (dt = {dt:.3e} s)"
    )]
    TraceDrift { drift: f64, t: f64, dt: f64 },

    #[error("kernel is not Hermitian (deviation {0:.3e})")]
    NonHermitian(f64),

    #[error(
        "kernel is not positive semidefinite (eigenvalue {eigenvalue:.3e}, trace {trace:.3e})"
    )]
    NotPositive { eigenvalue: f64, trace: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("singular transfer chain: |M11| = {0:.3e}")]
    SingularChain(f64),

    #[error("resampling cap exceeded after {attempts} draws for sample {sample}")]
    ResampleCap { sample: usize, attempts: usize },

    #[error("no root bracketed: {0}")]
    NoBracket(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
