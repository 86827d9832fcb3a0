//! CLI error taxonomy and the exit-code map.
//!
//! Exit codes: 0 ok, 1 I/O, 2 validation, 3 disconnected network,
//! 4 optimizer failure, 5 bad configuration. Every error prints a single
//! line `error[<code>]: <message>` on stderr.

use std::fmt;

use tdm_core::{EmbedError, InvalidSchedule, KspaceError, MetricError, RoadGraphError, RunError};

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Validation(String),
    Disconnected(String),
    Optimizer(String),
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io(_) => 1,
            Self::Validation(_) => 2,
            Self::Disconnected(_) => 3,
            Self::Optimizer(_) => 4,
            Self::Config(_) => 5,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            Self::Io(_) => "io",
            Self::Validation(_) => "validation",
            Self::Disconnected(_) => "disconnected",
            Self::Optimizer(_) => "optimizer",
            Self::Config(_) => "config",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            Self::Io(m)
            | Self::Validation(m)
            | Self::Disconnected(m)
            | Self::Optimizer(m)
            | Self::Config(m) => m,
        };
        // Single line, machine-parseable prefix.
        write!(f, "error[{}]: {}", self.code(), msg.replace('\n', " "))
    }
}

impl From<RoadGraphError> for CliError {
    fn from(e: RoadGraphError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::DisconnectedPair(_, _) => CliError::Disconnected(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<EmbedError> for CliError {
    fn from(e: EmbedError) -> Self {
        CliError::Optimizer(e.to_string())
    }
}

impl From<KspaceError> for CliError {
    fn from(e: KspaceError) -> Self {
        CliError::Optimizer(e.to_string())
    }
}

impl From<InvalidSchedule> for CliError {
    fn from(e: InvalidSchedule) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<RunError> for CliError {
    fn from(e: RunError) -> Self {
        CliError::Config(e.to_string())
    }
}

pub fn read_file(path: &std::path::Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

pub fn write_file(path: &std::path::Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}
