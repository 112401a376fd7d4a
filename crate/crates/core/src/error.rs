use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

use crate::arch::ArchId;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Every failure the core can report. Messages are meant to be shown to a
/// user verbatim by the front end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    UnknownArchitecture(String),
    UnknownRegister {
        arch: ArchId,
        name: String,
    },
    UnknownConvention(String),
    UnknownType {
        col: usize,
        name: String,
    },
    /// `col` is a 1-based character column within the offending line.
    Syntax {
        col: usize,
        msg: String,
    },
    UnsupportedWidth(u8),
    /// A parsed value broke one of the documented invariants of its type.
    Invariant {
        rule: &'static str,
        detail: String,
    },
    NegativeWeight,
    EmptyCorpus,
    MissingTableEntry(String),
    ArchMismatch {
        expected: ArchId,
        found: ArchId,
    },
    EmptySpace,
    UnknownHotType(String),
    /// Wraps an error raised while reading line `line` (1-based) of a document.
    AtLine {
        line: usize,
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn syntax(col: usize, msg: impl Into<String>) -> Self {
        Error::Syntax { col, msg: msg.into() }
    }

    pub(crate) fn invariant(rule: &'static str, detail: impl Into<String>) -> Self {
        Error::Invariant { rule, detail: detail.into() }
    }

    pub(crate) fn at_line(self, line: usize) -> Self {
        match self {
            e @ Error::AtLine { .. } => e,
            e => Error::AtLine { line, source: Box::new(e) },
        }
    }

    /// Strips any line wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtLine { source, .. } => source.root(),
            e => e,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UnknownArchitecture(name) => write!(f, "unknown architecture `{name}`"),
            Error::UnknownRegister { arch, name } => {
                write!(f, "unknown register `{name}` on {arch}")
            }
            Error::UnknownConvention(name) => write!(f, "unknown calling convention `{name}`"),
            Error::UnknownType { col, name } => write!(f, "column {col}: unknown type `{name}`"),
            Error::Syntax { col, msg } => write!(f, "column {col}: syntax error: {msg}"),
            Error::UnsupportedWidth(w) => write!(f, "unsupported value width {w}"),
            Error::Invariant { rule, detail } => write!(f, "invariant `{rule}` violated: {detail}"),
            Error::NegativeWeight => f.write_str("weights must be non-negative"),
            Error::EmptyCorpus => f.write_str("corpus has no entry with a positive call weight"),
            Error::MissingTableEntry(step) => write!(f, "no cost table entry for {step}"),
            Error::ArchMismatch { expected, found } => {
                write!(f, "architecture mismatch: expected {expected}, found {found}")
            }
            Error::EmptySpace => f.write_str("search space contains no valid convention"),
            Error::UnknownHotType(sig) => write!(f, "hot type `{sig}` is not in the corpus"),
            Error::AtLine { line, source } => write!(f, "line {line}: {source}"),
        }
    }
}

impl core::error::Error for Error {}
