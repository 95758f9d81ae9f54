use std::fmt;
use std::path::Path;

use serde::Serialize;
use voronoi_bubbles::Error;

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    /// Checked and failed, or infeasible.
    Fail,
}

impl Outcome {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 2,
        }
    }
}

/// A diagnostic record, printed as one JSON line on stderr.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub kind: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(skip)]
    pub exit: i32,
}

impl CliError {
    pub fn new(kind: &str, message: impl Into<String>) -> Self {
        CliError { kind: kind.into(), message: message.into(), path: None, line: None, column: None, field: None, exit: 1 }
    }

    pub fn infeasible(message: impl Into<String>) -> Self {
        CliError { exit: 2, ..CliError::new("Infeasible", message) }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError { path: Some(path.display().to_string()), ..CliError::new("Io", err.to_string()) }
    }

    pub fn schema(path: &Path, err: &serde_json::Error) -> Self {
        let msg = err.to_string();
        // serde_json names offending fields in backticks.
        let field = msg.split('`').nth(1).map(str::to_string);
        CliError {
            path: Some(path.display().to_string()),
            line: Some(err.line()),
            column: Some(err.column()),
            field,
            ..CliError::new("Schema", msg)
        }
    }

    pub fn with_path(mut self, path: &Path) -> Self {
        self.path = Some(path.display().to_string());
        self
    }

    pub fn record(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let debug = format!("{e:?}");
        let kind: String = debug.chars().take_while(|c| c.is_alphanumeric()).collect();
        let exit = match e {
            Error::Infeasible { .. } | Error::EmptyRetainedSet => 2,
            _ => 1,
        };
        CliError { exit, ..CliError::new(&kind, e.to_string()) }
    }
}
