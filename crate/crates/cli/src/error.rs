//! Stage-tagged errors mapped onto process exit codes.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    /// Structural validation found errors.
    Validation,
    /// An input file was missing or unparsable.
    Parse,
    /// A stage failed at run time.
    Runtime,
}

impl ExitClass {
    pub fn code(self) -> i32 {
        match self {
            ExitClass::Validation => 2,
            ExitClass::Parse => 3,
            ExitClass::Runtime => 4,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub stage: &'static str,
    pub class: ExitClass,
    pub message: String,
}

impl CliError {
    pub fn parse(stage: &'static str, err: impl fmt::Display) -> Self {
        CliError {
            stage,
            class: ExitClass::Parse,
            message: err.to_string(),
        }
    }

    pub fn runtime(stage: &'static str, err: impl fmt::Display) -> Self {
        CliError {
            stage,
            class: ExitClass::Runtime,
            message: err.to_string(),
        }
    }

    /// The single structured line emitted on stderr.
    pub fn to_diagnostic(&self) -> String {
        serde_json::json!({
            "stage": self.stage,
            "error": self.message,
        })
        .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage, self.message)
    }
}
