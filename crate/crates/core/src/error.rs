use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum CimError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "non-positive strip half-width: eps*pi/(2(alpha+beta)) = {limit} <= theta = {theta}; \
         reduce theta or raise epsilon"
    )]
    NonPositiveStrip { limit: f64, theta: f64 },

    #[error("argument {argument} of arcosh is below 1")]
    DomainError { argument: f64 },

    #[error("kernel evaluated at the singular point z = 0")]
    SingularPoint,

    #[error("|m(z) + 1| = {modulus} is numerically zero at z = {re}{im:+}i")]
    ResolventSingular { re: f64, im: f64, modulus: f64 },

    #[error("mesh size h = {h} is not the reciprocal of a positive integer")]
    BadMeshSize { h: f64 },

    #[error("shifted solve failed at node {node} (z = {re}{im:+}i): {reason}")]
    SolveFailure {
        node: usize,
        re: f64,
        im: f64,
        reason: String,
    },

    #[error("t = {t} lies outside the calibrated window [{t0}, {t1}]")]
    OutOfWindow { t: f64, t0: f64, t1: f64 },

    #[error("no ground truth available: {0}")]
    MissingReference(String),

    #[error("cache file {path} is corrupt: {reason}")]
    CacheCorrupt { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = CimError> = std::result::Result<T, E>;
