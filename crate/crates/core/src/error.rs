use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the numerical kernels.
///
/// Variants that carry a `sigma` report where along an orbit the failure
/// happened, so callers can restart continuation from there.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid precision context: {0}")]
    InvalidContext(String),

    #[error("coupling angle {0} is outside [0, pi/2) or gives |q| >= 1")]
    InvalidCoupling(f64),

    #[error("series diverges: |q| >= 1")]
    Divergent,

    #[error("series not converged after {terms} terms; raise max_terms or precision")]
    RaiseTerms { terms: usize },

    #[error("value left the representable range at order {order}; raise precision")]
    RaisePrecision { order: usize },

    #[error("the argument u = 0 is outside the domain")]
    ZeroArgument,

    #[error("pole: {what} vanishes (relative magnitude {magnitude:e})")]
    Pole { what: &'static str, magnitude: f64 },

    #[error("Newton iteration did not converge at sigma = {sigma} after {iterations} steps")]
    NewtonFailed { sigma: f64, iterations: usize },

    #[error("derivative underflow near a branch point at sigma = {sigma}")]
    NearBranchPoint { sigma: f64 },

    #[error("continuation failed on sheet {sheet} at sigma = {sigma}")]
    ContinuationFailed { sheet: u32, sigma: f64 },

    #[error("R trajectory blew up at step {step}")]
    TrajectoryBlowup { step: usize },

    #[error("theta test point lies too close to a zero")]
    ThetaZero,

    #[error("inconsistent factorization: relative spread {spread:e} of rho")]
    RhoSpread { spread: f64 },

    #[error("quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },

    #[error("no sign change of the level function for n = {level} on eps in [{lo}, {hi}]")]
    Bracketing { level: u32, lo: f64, hi: f64 },

    #[error("spectral data not quantized ({0}); the eigenfunction would be multivalued")]
    Multivalued(String),

    #[error("path continuation failed: {0}")]
    PathFailed(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
