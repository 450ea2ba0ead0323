//! Error type shared across the crate.
//!
//! Scalar payloads are reported as `f64` regardless of the working scalar so
//! the error enum stays non-generic.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("mode outside truncation: |l| = {l} exceeds L = {l_max}")]
    ModeOutsideTruncation { l: i32, l_max: i32 },

    #[error("truncation mismatch: L = {left} vs L = {right}")]
    TruncationMismatch { left: i32, right: i32 },

    #[error("null state cannot be normalized")]
    NullState,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("grid geometry mismatch: {0}")]
    GridMismatch(String),

    #[error("grid resolution too coarse: N = {n}, minimum {min}")]
    ResolutionTooCoarse { n: usize, min: usize },

    #[error("spiral phase plate order must be nonzero")]
    ZeroSppOrder,

    #[error("truncation loss {loss:.3e} inside the interferometer exceeds budget; increase L")]
    TruncationLoss { loss: f64 },

    #[error("probability {p} outside [0, 1]; upstream normalization is broken")]
    ProbabilityOutOfRange { p: f64 },

    #[error("cosine fit is rank-deficient: need >= 5 distinct phases spanning more than pi")]
    FitRankDeficient,

    #[error("fitted baseline C0 = {c0} is not positive; visibility undefined")]
    NonPositiveBaseline { c0: f64 },

    #[error(
        "visibility target {target} unreachable for epsilon in [{eps_lo}, {eps_hi}]: \
         V({eps_lo}) = {v_lo:.6}, V({eps_hi}) = {v_hi:.6}"
    )]
    VisibilityTargetUnreachable {
        target: f64,
        eps_lo: f64,
        eps_hi: f64,
        v_lo: f64,
        v_hi: f64,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
