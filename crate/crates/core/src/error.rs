use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty trajectory")]
    EmptyTrajectory,

    #[error("non-positive extent: {0}")]
    NonPositiveExtent(f64),

    #[error("frame regression: frame {frame} is not after stored frame {latest}")]
    FrameRegression { frame: u64, latest: u64 },

    #[error("k too large: k = {k} but only {distinct} distinct points")]
    KTooLarge { k: usize, distinct: usize },

    #[error("ragged polylines: expected {expected} points, found {found}")]
    RaggedPolylines { expected: usize, found: usize },

    #[error("bad dimension: {0} is not a positive multiple of 4")]
    BadDimension(usize),

    #[error("empty ground truth")]
    EmptyGroundTruth,

    #[error("invalid probability: {0}")]
    InvalidProbability(f64),

    #[error("no supervision: no valid timesteps")]
    NoSupervision,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid input: {0}")]
    Invalid(String),
}
