use std::fmt;

use copula_split::Error;

/// Process exit status for each failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Usage,
    Data,
    Convergence,
}

impl ExitKind {
    pub fn code(self) -> u8 {
        match self {
            ExitKind::Usage => 2,
            ExitKind::Data => 3,
            ExitKind::Convergence => 4,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            ExitKind::Usage => "usage",
            ExitKind::Data => "data",
            ExitKind::Convergence => "convergence",
        }
    }
}

/// A failure that ends the process. Displays as a single line
/// `error[<kind>]: <message>`.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::Usage,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::Data,
            message: message.into(),
        }
    }

    pub fn convergence(message: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::Convergence,
            message: message.into(),
        }
    }

    pub fn io(path: &std::path::Path, e: impl fmt::Display) -> Self {
        Self::data(format!("{}: {e}", path.display()))
    }

    /// Classify a library error raised while processing data.
    pub fn from_core(e: &Error) -> Self {
        match e {
            Error::Fit(_) | Error::AllBlocksFailed(_) => Self::convergence(e.to_string()),
            Error::Replicate { source, .. } => Self {
                kind: Self::from_core(source).kind,
                message: e.to_string(),
            },
            _ => Self::data(e.to_string()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // keep the report on one line whatever the message contains
        let msg = self.message.replace(['\n', '\r'], " ");
        write!(f, "error[{}]: {msg}", self.kind.tag())
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::from_core(&e)
    }
}
