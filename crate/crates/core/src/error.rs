//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A point or feature was used with a model it does not belong to,
    /// or an input value lies outside its documented domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed structural input (bad matrix, bad model file, ...).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// The requested model has no analytic catalogue of geodesic circles;
    /// callers must fall back to a refined-sample oracle.
    #[error("no analytic circle catalogue for this model kind")]
    NoAnalyticCatalogue,

    /// A query radius exceeded the horizon the filtration was built with.
    #[error("radius {r} exceeds the build horizon rmax = {rmax}")]
    Horizon { r: f64, rmax: f64 },

    /// Bad parameter pair (e.g. p >= q for an inclusion-induced map).
    #[error("invalid arguments: {0}")]
    Argument(String),

    /// A point of a loop is farther than the claimed density from every
    /// sample point.
    #[error("density violation: point #{index} is {found} away from the nearest sample point (claimed density {claimed})")]
    DensityViolation {
        index: usize,
        found: f64,
        claimed: f64,
    },

    /// A stated inequality of a construction does not hold.
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    /// The nullhomotopy procedure emitted a triangle of diameter >= r.
    /// Indicates a marginal precondition; cannot occur when the stated
    /// inequalities hold strictly.
    #[error("construction failed: {0}")]
    ConstructionFailed(String),

    /// Bottleneck matching between a censored and a finite interval.
    #[error("censored/finite interval mismatch at rmax; rebuild with a larger rmax")]
    CensoredMismatch,

    /// The sample's classes fail to span the model homology near the start
    /// of the filtration; the sample is too sparse.
    #[error("persistence is not initially constant: {0}")]
    NotInitiallyConstant(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
