use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("smoothness sequence is not nondecreasing at j = {j}")]
    NonMonotoneSequence { j: u32 },

    #[error("rate r_{j} = {value} is not a finite positive number")]
    NonPositiveRate { j: u32, value: f64 },

    #[error("smoothness exponents must satisfy alpha > beta >= 0 (alpha = {alpha}, beta = {beta})")]
    BadExponents { alpha: f64, beta: f64 },

    #[error("Korobov block r_1..r_(t+1) must all equal r = {r}; r_{j} = {found}")]
    BadPrefixBlock { j: u32, r: f64, found: f64 },

    #[error("m = 0 is only supported for the analytic variant with p = 0")]
    UnsupportedZeroM,

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("threshold T = {0} is below 1")]
    ThresholdBelowOne(f64),

    #[error("count exceeds 2^127 or an intermediate value does not fit")]
    Overflow,

    #[error("brute-force box has {points:.3e} points, above the limit of 1e8")]
    BoxTooLarge { points: f64 },

    #[error("the cross is infinite: {0}")]
    InfiniteCross(String),

    #[error("theorem hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("series diverges: {0}")]
    Diverges(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("constant c = {0} is not positive")]
    NonPositiveC(f64),

    #[error("field has an entry outside the cross")]
    SupportOutsideCross,

    #[error("diffusion is not uniformly elliptic (certified minimum {0})")]
    EllipticityViolated(f64),

    #[error("coefficient bound violated for s = {s:?}: margin {margin}")]
    BoundViolated { s: Vec<u32>, margin: f64 },

    #[error("linear system is singular")]
    Singular,
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Hypothesis,
    Overflow,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::HypothesisViolated(_)
            | Error::Diverges(_)
            | Error::PreconditionViolated(_)
            | Error::NonPositiveC(_) => ErrorKind::Hypothesis,
            Error::Overflow | Error::BoxTooLarge { .. } | Error::InfiniteCross(_) => {
                ErrorKind::Overflow
            }
            _ => ErrorKind::Validation,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
