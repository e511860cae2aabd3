use thiserror::Error;

/// Which side of an alternating-projections run a step belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    A,
    B,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::A => f.write_str("A"),
            Side::B => f.write_str("B"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite coordinate in point")]
    NonFinite,

    #[error("invalid set description: {0}")]
    InvalidSpec(String),

    #[error("projection of the sphere center is the whole sphere")]
    DegenerateProjection,

    #[error("nearest-point query over an empty point set")]
    EmptyCloud,

    #[error("angle must be finite and nonnegative, got {0}")]
    InvalidAngle(f64),

    #[error("root bracket [{lo}, {hi}] has no sign change at alpha = {alpha}")]
    BracketInvalid { alpha: f64, lo: f64, hi: f64 },

    #[error("nearest neighbour of x_{0} is not x_{{n+1}}")]
    NearestPropertyViolated(usize),

    #[error("alternating projections left the predicted orbit at pair {0}")]
    CorollaryViolated(usize),

    #[error("projection onto {side} at iteration {iteration} is multivalued ({count} candidates)")]
    TieEncountered { iteration: usize, side: Side, count: usize },

    #[error("projection onto {side} failed at iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        side: Side,
        #[source]
        source: Box<Error>,
    },

    #[error("check '{check}' failed at index {index}: {detail}")]
    CheckFailed { check: &'static str, index: usize, detail: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
