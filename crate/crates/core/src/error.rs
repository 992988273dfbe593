use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A configuration value is outside its allowed range.
    InvalidConfig(String),
    /// Fewer observations than the operation needs.
    TooFewRows { needed: usize, found: usize },
    /// The input contains NaN or infinite values.
    NonFinite,
    /// Every column of the table is constant.
    ZeroVariance,
    DimensionMismatch { expected: usize, found: usize },
    /// Segmentation found nothing usable in the recording.
    NoValidTaps,
    /// A signal is shorter than the number of samples requested from it.
    SignalTooShort { available: usize, needed: usize },
    /// k-means was asked for more clusters than there are distinct points.
    TooManyClusters { k: usize, distinct: usize },
    /// Cluster-to-label mapping needs at least one label per cluster.
    NotEnoughLabels { clusters: usize, labels: usize },
    UnknownLabel(String),
    /// A persisted or hand-built model breaks one of its invariants.
    InvariantViolation(String),
    /// Row data does not line up with the table layout.
    Malformed(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::TooFewRows { needed, found } => {
                write!(f, "need at least {needed} rows, found {found}")
            }
            Error::NonFinite => f.write_str("input contains NaN or infinite values"),
            Error::ZeroVariance => f.write_str("table has zero total variance"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NoValidTaps => f.write_str("no valid taps found"),
            Error::SignalTooShort { available, needed } => {
                write!(f, "signal has {available} samples, need {needed}")
            }
            Error::TooManyClusters { k, distinct } => {
                write!(f, "cannot form {k} clusters from {distinct} distinct points")
            }
            Error::NotEnoughLabels { clusters, labels } => {
                write!(f, "{clusters} clusters but only {labels} distinct labels")
            }
            Error::UnknownLabel(label) => write!(f, "unknown label {label:?}"),
            Error::InvariantViolation(msg) => write!(f, "invariant violated: {msg}"),
            Error::Malformed(msg) => write!(f, "malformed data: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
