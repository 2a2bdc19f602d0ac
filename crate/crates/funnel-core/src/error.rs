use thiserror::Error;

/// Errors shared by all engine modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A point sits on a curve within the incidence tolerance, so crossing
    /// parity cannot be decided. The caller must perturb and retry.
    #[error("ambiguous incidence: {0}")]
    AmbiguousIncidence(String),

    /// The discretization cannot resolve the geometry (curve features
    /// thinner than the grid step, disconnected region labels, ...).
    #[error("resolution too coarse: {0}")]
    ResolutionTooCoarse(String),

    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// A trajectory left the configured bounding box. Cannot happen for a
    /// genuinely compactly supported field; signals a bad field.
    #[error("divergence: {0}")]
    Divergence(String),

    /// No ensemble solution reached the requested target point.
    #[error("selection failure: {0}")]
    SelectionFailure(String),

    /// The field does not generate a diffeotopy (detected non-uniqueness or
    /// non-invertible samples).
    #[error("not a diffeotopy: {0}")]
    NotADiffeotopy(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
