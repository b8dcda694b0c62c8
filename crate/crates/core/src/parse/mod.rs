//! SOC description readers and the canonical writer.

mod canonical;
mod itc02;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use canonical::{emit_canonical, parse_canonical};
pub use itc02::parse_itc02;

use crate::model::SocSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseDiagnostic {
    /// 1-based; 0 when the problem concerns the file as a whole.
    pub line: usize,
    pub severity: Severity,
    pub message: String,
}

impl ParseDiagnostic {
    pub(crate) fn error(line: usize, message: impl Into<String>) -> Self {
        Self { line, severity: Severity::Error, message: message.into() }
    }

    pub(crate) fn warning(line: usize, message: impl Into<String>) -> Self {
        Self { line, severity: Severity::Warning, message: message.into() }
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "line {}: {kind}: {}", self.line, self.message)
    }
}

/// A failed parse. Holds every diagnostic found, errors and warnings alike.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}", render(.diagnostics))]
pub struct ParseError {
    pub diagnostics: Vec<ParseDiagnostic>,
}

impl ParseError {
    pub fn errors(&self) -> impl Iterator<Item = &ParseDiagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error)
    }
}

fn render(diagnostics: &[ParseDiagnostic]) -> String {
    diagnostics
        .iter()
        .filter(|d| d.severity == Severity::Error)
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("\n")
}

/// A successful parse plus any warnings raised on the way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parsed {
    pub soc: SocSpec,
    pub warnings: Vec<ParseDiagnostic>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    #[default]
    Auto,
    Canonical,
    Itc02,
}

/// True when the first meaningful token is the canonical `soc` header.
pub fn looks_canonical(text: &str) -> bool {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .find_map(|l| l.split_whitespace().next())
        .is_some_and(|t| t == "soc" || t == "core")
}

pub fn parse(text: &str, format: InputFormat) -> Result<Parsed, ParseError> {
    let canonical = match format {
        InputFormat::Auto => looks_canonical(text),
        InputFormat::Canonical => true,
        InputFormat::Itc02 => false,
    };
    if canonical {
        parse_canonical(text).map(|soc| Parsed { soc, warnings: Vec::new() })
    } else {
        parse_itc02(text)
    }
}

/// Strips a `#` comment and a trailing CR.
pub(crate) fn content(line: &str) -> &str {
    let line = line.strip_suffix('\r').unwrap_or(line);
    line.split('#').next().unwrap_or("")
}
