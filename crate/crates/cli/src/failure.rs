//! Error kinds and their exit codes.

use std::fmt;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Missing or unreadable input file (exit 3).
    Input,
    /// Malformed bitstream, CSV or JSON (exit 4).
    Parse,
    /// Invalid parameters, profile or option combination (exit 5).
    Config,
    /// Fit, metric or statistics failure (exit 6).
    Numeric,
}

impl Kind {
    pub fn exit_code(self) -> ExitCode {
        ExitCode::from(match self {
            Kind::Input => 3,
            Kind::Parse => 4,
            Kind::Config => 5,
            Kind::Numeric => 6,
        })
    }

    fn label(self) -> &'static str {
        match self {
            Kind::Input => "input error",
            Kind::Parse => "parse error",
            Kind::Config => "config error",
            Kind::Numeric => "numeric failure",
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub kind: Kind,
    pub error: anyhow::Error,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {:#}", self.kind.label(), self.error)
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

pub trait Classify<T> {
    fn kind(self, kind: Kind) -> CmdResult<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn kind(self, kind: Kind) -> CmdResult<T> {
        self.map_err(|e| Failure {
            kind,
            error: e.into(),
        })
    }
}

pub fn fail<T>(kind: Kind, message: impl fmt::Display) -> CmdResult<T> {
    Err(Failure {
        kind,
        error: anyhow::anyhow!("{message}"),
    })
}
