use std::fmt;
use std::path::PathBuf;

/// Errors raised anywhere in the library.
#[derive(Debug)]
pub enum Error {
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// Malformed input text. `line` is 1-based when known.
    Parse {
        line: Option<usize>,
        msg: String,
    },
    /// A value violated a documented invariant. `frame` names the offending mocap frame.
    Invariant {
        frame: Option<usize>,
        msg: String,
    },
    /// Inconsistent vector or matrix dimensions.
    Shape(String),
    /// Configuration rejected during validation.
    Config(String),
    /// Backward pass attempted with a cache produced by older parameters.
    StaleCache {
        cache: u64,
        params: u64,
    },
    /// NaN or infinity where a finite value is required.
    NonFinite(String),
    /// Bad CSV / checkpoint schema.
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line: Some(line), msg: msg.into() }
    }

    pub fn invariant(frame: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Invariant { frame, msg: msg.into() }
    }

    /// True for errors that stem from numerical blow-up rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonFinite(_))
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Io { path, source } => write!(f, "{}: {}", path.display(), source),
            Error::Parse { line: Some(l), msg } => write!(f, "parse error at line {l}: {msg}"),
            Error::Parse { line: None, msg } => write!(f, "parse error: {msg}"),
            Error::Invariant { frame: Some(t), msg } => write!(f, "frame {t}: {msg}"),
            Error::Invariant { frame: None, msg } => write!(f, "invariant violated: {msg}"),
            Error::Shape(msg) => write!(f, "shape mismatch: {msg}"),
            Error::Config(msg) => write!(f, "invalid config: {msg}"),
            Error::StaleCache { cache, params } => {
                write!(f, "stale forward cache (cache generation {cache}, parameters at {params})")
            }
            Error::NonFinite(msg) => write!(f, "non-finite value: {msg}"),
            Error::Schema(msg) => write!(f, "schema error: {msg}"),
        }
    }
}

/// The I/O cause is already part of the message, so no `source` is exposed.
impl std::error::Error for Error {}
