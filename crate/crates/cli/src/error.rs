use std::fmt;
use std::path::Path;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_TOLERANCE: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    /// The output was produced but a check failed.
    Tolerance(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Tolerance(_) => EXIT_TOLERANCE,
            CliError::Io(_) => EXIT_IO,
        }
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Tolerance(m) => write!(f, "tolerance check failed: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<weakbayes::Error> for CliError {
    fn from(e: weakbayes::Error) -> Self {
        match e {
            weakbayes::Error::Io(m) => CliError::Io(m),
            other => CliError::Usage(other.to_string()),
        }
    }
}
