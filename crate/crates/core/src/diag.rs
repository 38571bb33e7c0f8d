//! Diagnostics, rendered as `file:line:col: severity: message`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::lexer::LexError;
use crate::parser::ParseError;
use crate::token::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl Severity {
    fn label(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub file: String,
    pub line: u32,
    pub col: u32,
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    pub fn error(file: &str, span: Span, message: String) -> Self {
        Diagnostic {
            file: String::from(file),
            line: span.line,
            col: span.col,
            severity: Severity::Error,
            message,
        }
    }

    pub fn from_lex(file: &str, err: &LexError) -> Self {
        Diagnostic {
            file: String::from(file),
            line: err.line,
            col: err.col,
            severity: Severity::Error,
            message: err.message.clone(),
        }
    }

    pub fn from_parse(file: &str, err: &ParseError) -> Self {
        Diagnostic {
            file: String::from(file),
            line: err.span.line,
            col: err.span.col,
            severity: Severity::Error,
            message: err.message(),
        }
    }
}

impl core::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "{}:{}:{}: {}: {}",
            self.file,
            self.line,
            self.col,
            self.severity.label(),
            self.message
        )
    }
}

/// Render one diagnostic per line, in the given (source) order.
pub fn render_all(diags: &[Diagnostic]) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    for d in diags {
        let _ = writeln!(out, "{}", d);
    }
    out
}

/// Convenience used by tests and the CLI: sorted copy is never needed because
/// producers emit in source order already.
pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

pub type Diagnostics = Vec<Diagnostic>;
