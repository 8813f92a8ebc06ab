//! Error types shared across the engine.

use thiserror::Error;

/// Errors raised by the CANFIS engine and its data plumbing.
#[derive(Debug, Error)]
pub enum CanfisError {
    /// A membership function parameter or network input is outside its domain.
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    /// A configuration value is inconsistent or degenerate.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A vector length does not match the expected dimension.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    /// A dataset is unusable (empty, non-finite values, ...).
    #[error("dataset error: {0}")]
    Data(String),

    /// Training produced a non-finite loss.
    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize },

    /// Pearson r (and NMSE) are undefined because the desired values are constant.
    #[error("correlation undefined: desired values for output {output} are constant")]
    CorrelationUndefined { output: String },

    /// Filesystem access failed.
    #[error("cannot access {path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// A CSV file does not start with the expected `X,Y,S,C` header.
    #[error("malformed CSV header: expected \"X,Y,S,C\", found \"{found}\"")]
    MalformedHeader { found: String },

    /// A CSV file has a header but no data rows.
    #[error("CSV body is empty")]
    EmptyBody,

    /// A CSV cell failed to parse as a number. Rows are 1-based file lines
    /// (the header is row 1), columns are 1-based.
    #[error("cannot parse cell at row {row}, column {col}: \"{value}\"")]
    ParseCell { row: usize, col: usize, value: String },

    /// A CSV row has the wrong number of fields.
    #[error("CSV row {row} has {found} fields, expected {expected}")]
    RowWidth {
        row: usize,
        expected: usize,
        found: usize,
    },

    /// A serialized network document could not be decoded.
    #[error("cannot decode network document: {0}")]
    NetworkDecode(String),
}

pub type Result<T> = std::result::Result<T, CanfisError>;
