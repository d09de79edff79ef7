//! Crate-wide error type.

/// Errors surfaced by fallible operations.
///
/// Geometric dimension mismatches are programming errors and panic instead;
/// every constructor that accepts external data validates and returns
/// `Invalid` rather than panicking.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A semi-decidable search ran out of steps before finding a certificate.
    #[error("budget exhausted during {stage}")]
    BudgetExhausted { stage: &'static str },

    /// The two query points are provably at least `2^-threshold` apart, so a
    /// precondition of the form `d(x, y) < 2^-threshold` is violated.
    #[error("points are provably at least 2^-{threshold} apart")]
    SeparatedPoints { threshold: u32 },

    /// A query point does not lie on the continuum.
    #[error("point does not lie on the continuum")]
    PointNotOnSet,

    /// Arc queries require two distinct endpoints.
    #[error("the two query points coincide")]
    IdenticalPoints,

    /// Tree-only operations reject polylines whose edge graph has a cycle.
    #[error("polyline graph contains a cycle")]
    CyclicPolyline,

    /// A sampled certification was attempted at a grid too coarse for the
    /// requested scale.
    #[error("sampling depth {depth} too small to certify scale {scale}")]
    DepthTooSmall { depth: u32, scale: u32 },

    /// Malformed input data.
    #[error("invalid {what}: {why}")]
    Invalid { what: &'static str, why: String },
}

impl Error {
    pub fn invalid(what: &'static str, why: impl Into<String>) -> Self {
        Error::Invalid { what, why: why.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
