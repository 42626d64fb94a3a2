use std::fmt;

use lexroad_core::bayes::BnError;
use lexroad_core::lawmap::LawmapError;
use lexroad_core::report::ReportError;
use lexroad_core::rulepack::RulepackError;

pub const EXIT_PARSE: u8 = 1;
pub const EXIT_COMPILE: u8 = 2;
pub const EXIT_INCOMPLETE: u8 = 3;
pub const EXIT_INFERENCE: u8 = 4;
pub const EXIT_INTEGRITY: u8 = 5;
pub const EXIT_USAGE: u8 = 64;

/// A diagnostic plus the exit code it maps to. Renders as
/// `file:line:col: error: message` when a position is known.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub file: Option<String>,
    pub position: Option<(usize, usize)>,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, file: Option<&str>, message: impl Into<String>) -> Failure {
        Failure {
            code,
            file: file.map(str::to_string),
            position: None,
            message: message.into(),
        }
    }

    pub fn io(path: &str, e: std::io::Error) -> Failure {
        Failure::new(EXIT_PARSE, Some(path), e.to_string())
    }

    pub fn usage(message: impl Into<String>) -> Failure {
        Failure::new(EXIT_USAGE, None, message)
    }

    /// Rule-compilation errors: parse errors exit 1, the rest 2.
    pub fn from_rule(e: RulepackError) -> Failure {
        match e {
            RulepackError::Io { path, message } => Failure::new(EXIT_PARSE, Some(&path), message),
            RulepackError::Parse { path, error } => Failure {
                code: EXIT_PARSE,
                file: Some(path),
                position: error.position(),
                message: error.message(),
            },
            RulepackError::Naming { path, error } => Failure::new(EXIT_COMPILE, Some(&path), error.to_string()),
            RulepackError::Compile { path, error } => Failure::new(EXIT_COMPILE, Some(&path), error.to_string()),
            other => Failure::integrity(other),
        }
    }

    pub fn integrity(e: RulepackError) -> Failure {
        Failure::new(EXIT_INTEGRITY, None, format!("rulepack: {e}"))
    }

    pub fn report(e: ReportError) -> Failure {
        match e {
            ReportError::Rulepack(e) => Failure::integrity(e),
            other => Failure::new(EXIT_INTEGRITY, None, other.to_string()),
        }
    }

    pub fn inference(e: BnError) -> Failure {
        Failure::new(EXIT_INFERENCE, None, e.to_string())
    }

    pub fn lawmap(e: LawmapError, scenario: Option<&str>) -> Failure {
        match e {
            LawmapError::IncompleteAssignment(missing) => Failure::new(
                EXIT_INCOMPLETE,
                scenario,
                format!("scenario leaves the path undecided; missing: {}", missing.join(", ")),
            ),
            other => Failure::new(EXIT_COMPILE, None, other.to_string()),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(file) = &self.file {
            write!(f, "{file}:")?;
            if let Some((line, col)) = self.position {
                write!(f, "{line}:{col}:")?;
            }
            f.write_str(" ")?;
        }
        write!(f, "error: {}", self.message)
    }
}
