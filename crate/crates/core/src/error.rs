use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{field}`: {reason}")]
    Domain { field: &'static str, reason: String },

    #[error("eigensolver did not converge for a {dim}x{dim} matrix after {iterations} iterations")]
    Convergence { dim: usize, iterations: usize },

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("line {line}: timestamp {timestamp} precedes previous timestamp {previous}")]
    Ordering {
        line: usize,
        timestamp: f64,
        previous: f64,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate intensity fit: only {occupied} occupied depth buckets (need at least 3)")]
    DegenerateFit { occupied: usize },

    #[error("best bid/ask columns are required but missing at line {line}")]
    MissingQuotes { line: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            field,
            reason: reason.into(),
        }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Convergence { .. } => 3,
            _ => 2,
        }
    }

    /// True when output was cut short by a closed pipe.
    pub fn is_broken_pipe(&self) -> bool {
        let io = match self {
            Error::Io(e) => Some(e),
            Error::Csv(e) => match e.kind() {
                csv::ErrorKind::Io(e) => Some(e),
                _ => None,
            },
            Error::Json(e) => return e.io_error_kind() == Some(std::io::ErrorKind::BrokenPipe),
            _ => None,
        };
        io.is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::Convergence { .. } => "convergence",
            Error::Parse { .. } => "parse",
            Error::Ordering { .. } => "ordering",
            Error::InsufficientData(_) => "insufficient_data",
            Error::DegenerateFit { .. } => "degenerate_fit",
            Error::MissingQuotes { .. } => "missing_quotes",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
