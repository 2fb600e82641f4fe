use std::fmt;
use std::io;
use std::path::PathBuf;

/// Errors raised by matrix construction, file IO, selectors and the oracle.
#[derive(Debug)]
pub enum Error {
    /// Underlying file IO failure.
    Io { path: PathBuf, source: io::Error },
    /// Input could not be parsed under the declared format.
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    /// A parsed or constructed value is NaN or infinite.
    NonFinite { context: String },
    /// Matrix with zero rows or zero columns.
    EmptyMatrix,
    /// Shape mismatch between operands.
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// Column index outside the matrix.
    IndexOutOfRange { index: usize, cols: usize },
    /// Candidate column is already part of the selection.
    AlreadySelected(usize),
    /// Candidate whose residual is numerically zero cannot be committed.
    DeadCandidate(usize),
    /// Column with zero norm cannot be normalized.
    DegenerateColumn(usize),
    /// Invalid parameter value.
    InvalidParam(String),
    /// A size or combinatorial guard was exceeded.
    Guard {
        what: &'static str,
        limit: u64,
        requested: u64,
    },
    /// An iterative solver did not converge within its iteration budget.
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Io { path, source } => write!(f, "io error on {}: {}", path.display(), source),
            Error::Parse { path, line, msg } => {
                write!(f, "parse error in {} at line {}: {}", path.display(), line, msg)
            }
            Error::NonFinite { context } => write!(f, "non-finite value in {}", context),
            Error::EmptyMatrix => write!(f, "matrix must have at least one row and one column"),
            Error::DimensionMismatch {
                what,
                expected,
                found,
            } => write!(f, "dimension mismatch for {}: expected {}, found {}", what, expected, found),
            Error::IndexOutOfRange { index, cols } => {
                write!(f, "column index {} out of range for {} columns", index, cols)
            }
            Error::AlreadySelected(j) => write!(f, "column {} is already selected", j),
            Error::DeadCandidate(j) => {
                write!(f, "column {} has numerically zero residual and cannot be committed", j)
            }
            Error::DegenerateColumn(j) => write!(f, "column {} has zero norm", j),
            Error::InvalidParam(msg) => write!(f, "invalid parameter: {}", msg),
            Error::Guard {
                what,
                limit,
                requested,
            } => write!(f, "guard exceeded for {}: limit {}, requested {}", what, limit, requested),
            Error::NoConvergence { what, iterations } => {
                write!(f, "{} did not converge after {} iterations", what, iterations)
            }
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}
