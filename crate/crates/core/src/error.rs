use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("thickness factor must be positive, got {0}")]
    NonPositiveThickness(f64),

    #[error("photocurrent must be non-negative, got {0} A")]
    NegativePhotocurrent(f64),

    #[error("integration time must be non-negative, got {0} s")]
    NegativeDuration(f64),

    #[error("photodiode drop {value} V outside [0, {max}] V")]
    OutOfRange { value: f64, max: f64 },

    #[error("level {level} outside 1..={levels}")]
    LevelOutOfRange { level: u32, levels: u32 },

    #[error("row {row} out of range for an array with {rows} rows")]
    RowOutOfRange { row: usize, rows: usize },

    #[error("programming amplitude {value} V outside [{min}, {max}] V")]
    AmplitudeOutOfRange { value: f64, min: f64, max: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("readout gate drive would disturb pixel ({row}, {col}) by {delta_p}")]
    ReadDisturb {
        row: usize,
        col: usize,
        delta_p: f64,
    },

    #[error("pixel code {0} outside 0..=255")]
    CodeOutOfRange(u32),

    #[error("a transfer curve needs at least {min} points, got {got}")]
    TooFewPoints { min: usize, got: usize },

    #[error("transfer curve for level {level} rises at sample {index}")]
    NonMonotoneCurve { level: u32, index: usize },

    #[error("malformed key file (line {line}): {reason}")]
    MalformedKeyFile { line: usize, reason: String },

    #[error("malformed image: {0}")]
    MalformedImage(String),

    #[error("malformed config (line {line}): {reason}")]
    MalformedConfig { line: usize, reason: String },

    #[error("image has fewer than two pixels along the {0} direction")]
    TooSmall(&'static str),

    #[error("zero variance in adjacent-pixel marginal")]
    DegenerateVariance,

    #[error("empty batch")]
    EmptyBatch,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn mismatch(expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
