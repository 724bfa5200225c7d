use thiserror::Error;

/// Errors produced by the denoising pipeline.
///
/// Variants split into two families: malformed input (shapes, invalid
/// probabilities, bad files) and degenerate estimation, where the data is
/// well formed but carries too little information to invert. The CLI maps
/// them to different exit codes via [`Error::is_degenerate`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("alphabet size must be at least 2, got {0}")]
    InvalidAlphabet(usize),
    #[error("probability entry {index} is invalid: {value}")]
    InvalidProbability { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("channel {channel} row {row} is not stochastic (sum {sum})")]
    NotStochastic { channel: usize, row: usize, sum: f64 },
    #[error("BSC parameter {0} outside [0, 1]")]
    BscOutOfRange(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid permutation {0:?}")]
    InvalidPermutation(Vec<usize>),
    #[error("a dependent component system needs at least one channel")]
    EmptySystem,
    #[error("symbol {symbol} is outside an alphabet of size {size}")]
    SymbolOutOfRange { symbol: usize, size: usize },
    #[error("empty input sequence")]
    EmptyInput,
    #[error("coordinate {index} out of range for {k} copies")]
    CoordinateOutOfRange { index: usize, k: usize },
    #[error("joint distribution with {cells} cells exceeds the dense limit of {limit}")]
    TooManyCells { cells: u128, limit: usize },
    #[error("alphabet of size {0} is too large for permutation enumeration")]
    AlphabetTooLarge(usize),
    #[error("operation requires a binary alphabet, got size {0}")]
    NonBinaryAlphabet(usize),
    #[error("operation requires an even number of copies, got {0}")]
    OddK(usize),
    #[error("operation requires at least {required} copies, got {found}")]
    TooFewCopies { required: usize, found: usize },
    #[error("conditioning on a null event (coordinate {index}, symbol {symbol})")]
    ConditioningOnNullEvent { index: usize, symbol: u8 },
    #[error("degenerate channel in {context}: correlation {value:e} below threshold")]
    DegenerateChannel { context: &'static str, value: f64 },
    #[error("degenerate source in {context}: bias {value:e} below threshold")]
    DegenerateSource { context: &'static str, value: f64 },
    #[error("every copy is constant; the joint empirical distribution is a point mass")]
    AllCopiesConstant,
    #[error("no restart reached the residual tolerance (best L1 residual {best:e})")]
    MaxRestartsExceeded { best: f64 },
    #[error("malformed image: {0}")]
    MalformedImage(String),
    #[error("malformed channel file: {0}")]
    MalformedChannels(String),
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by uninformative data rather than malformed input.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::DegenerateChannel { .. }
                | Error::DegenerateSource { .. }
                | Error::AllCopiesConstant
                | Error::ConditioningOnNullEvent { .. }
                | Error::MaxRestartsExceeded { .. }
        )
    }

    /// Replaces the context of a degeneracy error, leaving other errors unchanged.
    pub(crate) fn with_context(self, context: &'static str) -> Self {
        match self {
            Error::DegenerateChannel { value, .. } => Error::DegenerateChannel { context, value },
            Error::DegenerateSource { value, .. } => Error::DegenerateSource { context, value },
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
