use thiserror::Error;

use crate::basis::BasisViolation;

/// Errors raised by the classification toolkit.
///
/// Every variant is a usage error: the caller handed in something that
/// violates an operation's precondition.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("length {0} is not a power of two in 2..=64")]
    BadLength(usize),

    #[error("invalid bit string {input:?}: {reason}")]
    Parse { input: String, reason: String },

    #[error("rank {rank} exceeds the cap of {cap}")]
    RankCap { rank: u32, cap: u32 },

    #[error("recipe is empty")]
    EmptyRecipe,

    #[error("unknown factor {0:?} (expected H, B1, C2 or Q2)")]
    UnknownFactor(String),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("radius {radius} exceeds vector length {len}")]
    RadiusTooLarge { radius: usize, len: usize },

    #[error("invalid basis: {0}")]
    InvalidBasis(BasisViolation),

    #[error("basis has no recipe; only recipe-built bases have classifiers")]
    MissingRecipe,

    #[error("classifier recipe {classifier} does not match basis recipe {basis}")]
    RecipeMismatch { classifier: String, basis: String },

    #[error("rank {rank} needs exhaustive mode at most {max}; use sampled mode")]
    ExhaustiveCap { rank: u32, max: u32 },

    #[error("sampled mode requires rank 5 or 6, got {0}")]
    SampledRank(u32),

    #[error("quota distance {distance} outside 1..={max}")]
    QuotaRange { distance: u32, max: u32 },

    #[error("profile metadata mismatch: {0}")]
    ProfileMismatch(String),

    #[error("profile has no populated buckets")]
    EmptyProfile,

    #[error("distance 0 is not allowed: the game excludes class members")]
    ZeroDistance,

    #[error("could not reach distance {distance} within the attempt cap")]
    UnreachableDistance { distance: u32 },

    #[error("trial count must be positive")]
    NoTrials,

    #[error("reference fixture error: {0}")]
    Fixture(String),
}

pub type Result<T> = std::result::Result<T, Error>;
