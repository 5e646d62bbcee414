//! Diagnostics with stable error codes.
//!
//! Every user-visible failure is a [`Diagnostic`] rendered as
//! `file:line:col: error[EXXX]: message`, so shell-level tests can assert on
//! the code without caring about wording.

use std::fmt;

/// A position in the source text, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Pos {
        Pos { line, col }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Stable diagnostic codes. The numeric ranges group the pipeline stages:
/// E0xx lexing/parsing, E1xx generation stage, E2xx type reconstruction,
/// E3xx normalization, E4xx backend, E5xx evaluation, E6xx command line.
pub mod codes {
    pub const LEX: &str = "E001";
    pub const PARSE: &str = "E002";
    pub const DESUGAR: &str = "E003";
    pub const DUPLICATE_DEF: &str = "E004";
    pub const UNBOUND_NAME: &str = "E101";
    pub const TYPE_CLASH: &str = "E102";
    pub const SPLICE_OF_NON_QUOTE: &str = "E103";
    pub const SPLICE_OUTSIDE_QUOTE: &str = "E104";
    pub const META_FUEL: &str = "E105";
    pub const ENTRY_NOT_QUOTED: &str = "E106";
    pub const TYPE_MISMATCH: &str = "E201";
    pub const AMBIGUOUS_OVERLOAD: &str = "E202";
    pub const UNREPRESENTABLE_INSTANCE: &str = "E203";
    pub const ENTRY_SIGNATURE: &str = "E204";
    pub const NORM_FUEL: &str = "E301";
    pub const NOT_FIRST_ORDER: &str = "E401";
    pub const FORBIDDEN_CONSTANT: &str = "E402";
    pub const LOWERING: &str = "E403";
    pub const IX_OUT_OF_BOUNDS: &str = "E501";
    pub const DIV_BY_ZERO_INT: &str = "E502";
    pub const INTERP_FUEL: &str = "E503";
    pub const USAGE: &str = "E601";
}

#[derive(Clone, Debug)]
pub struct Diagnostic {
    pub code: &'static str,
    pub message: String,
    pub pos: Option<Pos>,
}

impl Diagnostic {
    pub fn new(code: &'static str, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            code,
            message: message.into(),
            pos: None,
        }
    }

    pub fn at(code: &'static str, pos: Pos, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            code,
            message: message.into(),
            pos: Some(pos),
        }
    }

    /// Render with the conventional `file:line:col:` prefix.
    pub fn render(&self, file: &str) -> String {
        match self.pos {
            Some(p) => format!("{file}:{p}: error[{}]: {}", self.code, self.message),
            None => format!("{file}: error[{}]: {}", self.code, self.message),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pos {
            Some(p) => write!(f, "{p}: error[{}]: {}", self.code, self.message),
            None => write!(f, "error[{}]: {}", self.code, self.message),
        }
    }
}

impl std::error::Error for Diagnostic {}

pub type Result<T> = std::result::Result<T, Diagnostic>;
