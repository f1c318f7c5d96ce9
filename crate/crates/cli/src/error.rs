use std::fmt;

use otkit::ErrorClass;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_DOMAIN: i32 = 4;
pub const EXIT_NUMERIC: i32 = 5;
pub const EXIT_IO: i32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Failure {
    Usage,
    Config,
    Domain,
    Numeric,
    /// Unreadable or malformed input files, unwritable output.
    Io,
}

impl Failure {
    pub fn exit_code(self) -> i32 {
        match self {
            Failure::Usage => EXIT_USAGE,
            Failure::Config => EXIT_CONFIG,
            Failure::Domain => EXIT_DOMAIN,
            Failure::Numeric => EXIT_NUMERIC,
            Failure::Io => EXIT_IO,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Failure,
    pub message: String,
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn new(kind: Failure, message: impl Into<String>) -> Self {
        CliError { kind, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(Failure::Config, message)
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(Failure::Usage, message)
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self::new(Failure::Io, message)
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.kind {
            Failure::Usage => "usage error",
            Failure::Config => "configuration error",
            Failure::Domain => "domain error",
            Failure::Numeric => "numerical error",
            Failure::Io => "input/output error",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

impl std::error::Error for CliError {}

impl From<otkit::Error> for CliError {
    fn from(e: otkit::Error) -> Self {
        let kind = match e.class() {
            ErrorClass::Domain => Failure::Domain,
            ErrorClass::Numeric => Failure::Numeric,
            ErrorClass::Config => Failure::Config,
            ErrorClass::Io => Failure::Io,
        };
        let text = e.to_string();
        // the class tag is added on display
        let text = ["domain error: ", "configuration error: "]
            .iter()
            .find_map(|p| text.strip_prefix(p))
            .map_or(text.clone(), str::to_string);
        CliError::new(kind, text)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::io(e.to_string())
    }
}
