use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value failed validation. `field` uses the dotted key of
    /// the scenario file (e.g. `array.num_antennas`) where one applies.
    #[error("invalid configuration `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    /// Caller passed an out-of-range index or mismatched dimensions.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}
