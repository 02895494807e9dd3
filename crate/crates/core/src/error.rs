use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("letter {letter} out of range for d = {d}")]
    LetterOutOfRange { letter: usize, d: usize },

    #[error("invalid word string {0:?}")]
    InvalidWord(String),

    #[error("mismatched number of generators: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("truncation overflow: word length {needed} exceeds level {level}")]
    TruncationOverflow { needed: usize, level: usize },

    #[error("moment depth {available} too small, need {needed}")]
    DepthExceeded { needed: usize, available: usize },

    #[error("point is not a row contraction (row norm squared {0})")]
    NotRowContraction(f64),

    #[error("point is not a strict row contraction (row norm {0})")]
    NotStrictContraction(f64),

    #[error("density takes negative value {value} at angle {angle}")]
    NegativeDensity { value: f64, angle: f64 },

    #[error("moment table is not positive: min Gram eigenvalue {0}")]
    NotPositive(f64),

    #[error("pencil is ill-conditioned: condition number {0:e}")]
    IllConditioned(f64),

    #[error("H + I is singular; truncation tail exceeded")]
    SingularResolvent,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigendecomposition failed to converge")]
    Convergence,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("measure spec: {0}")]
    Spec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
