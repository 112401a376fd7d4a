//! Function types at the granularity conventions care about, and weighted
//! corpora of them.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::text::content_lines;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TypeKind {
    Void,
    Integer,
    Pointer,
    Float,
    Bool,
}

/// Width and kind of a scalar C type. Signedness is not tracked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeClass {
    width: u8,
    kind: TypeKind,
}

impl TypeClass {
    pub const VOID: TypeClass = TypeClass { width: 0, kind: TypeKind::Void };
    pub const BOOL: TypeClass = TypeClass { width: 8, kind: TypeKind::Bool };
    pub const I8: TypeClass = TypeClass { width: 8, kind: TypeKind::Integer };
    pub const I16: TypeClass = TypeClass { width: 16, kind: TypeKind::Integer };
    pub const I32: TypeClass = TypeClass { width: 32, kind: TypeKind::Integer };
    pub const PTR: TypeClass = TypeClass { width: 16, kind: TypeKind::Pointer };
    pub const F32: TypeClass = TypeClass { width: 32, kind: TypeKind::Float };

    /// Every distinct class, void first.
    pub const ALL: [TypeClass; 7] = [
        TypeClass::VOID,
        TypeClass::BOOL,
        TypeClass::I8,
        TypeClass::I16,
        TypeClass::I32,
        TypeClass::PTR,
        TypeClass::F32,
    ];

    pub fn width(self) -> u8 {
        self.width
    }

    pub fn kind(self) -> TypeKind {
        self.kind
    }

    pub fn is_void(self) -> bool {
        self.kind == TypeKind::Void
    }

    fn from_keyword(word: &str) -> Option<TypeClass> {
        Some(match word {
            "void" => TypeClass::VOID,
            "bool" => TypeClass::BOOL,
            "i8" | "u8" | "char" => TypeClass::I8,
            "i16" | "u16" => TypeClass::I16,
            "i32" | "u32" => TypeClass::I32,
            "f32" => TypeClass::F32,
            "ptr" => TypeClass::PTR,
            _ => return None,
        })
    }
}

impl fmt::Display for TypeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match (self.kind, self.width) {
            (TypeKind::Void, _) => "void",
            (TypeKind::Bool, _) => "bool",
            (TypeKind::Pointer, _) => "ptr",
            (TypeKind::Float, _) => "f32",
            (TypeKind::Integer, 8) => "i8",
            (TypeKind::Integer, 16) => "i16",
            _ => "i32",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FunctionSignature {
    ret: TypeClass,
    params: Vec<TypeClass>,
    varargs: bool,
}

impl FunctionSignature {
    pub fn new(ret: TypeClass, params: Vec<TypeClass>, varargs: bool) -> Result<Self> {
        if params.iter().any(|p| p.is_void()) {
            return Err(Error::syntax(1, "`void` cannot be a parameter type"));
        }
        if varargs && params.is_empty() {
            return Err(Error::syntax(1, "`...` needs at least one named parameter"));
        }
        Ok(FunctionSignature { ret, params, varargs })
    }

    pub fn return_type(&self) -> TypeClass {
        self.ret
    }

    pub fn params(&self) -> &[TypeClass] {
        &self.params
    }

    pub fn is_varargs(&self) -> bool {
        self.varargs
    }

    /// Same signature with `p` appended to the named parameters.
    pub fn with_param(&self, p: TypeClass) -> Result<Self> {
        let mut params = self.params.clone();
        params.push(p);
        FunctionSignature::new(self.ret, params, self.varargs)
    }
}

impl fmt::Display for FunctionSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} f(", self.ret)?;
        if self.params.is_empty() {
            f.write_str("void")?;
        }
        for (i, p) in self.params.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        if self.varargs {
            f.write_str(", ...")?;
        }
        f.write_str(")")
    }
}

impl FromStr for FunctionSignature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_signature(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Tok<'a> {
    Ident(&'a str),
    Open,
    Close,
    Comma,
    Ellipsis,
    End,
}

impl fmt::Display for Tok<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Open => f.write_str("`(`"),
            Tok::Close => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Ellipsis => f.write_str("`...`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    /// 1-based character column of byte offset `at`.
    fn col(&self, at: usize) -> usize {
        self.src[..at].chars().count() + 1
    }

    /// Returns the next token and its column.
    fn next(&mut self) -> Result<(Tok<'a>, usize)> {
        let rest = &self.src[self.pos..];
        let trimmed = rest.trim_start();
        self.pos += rest.len() - trimmed.len();
        let start = self.pos;
        let col = self.col(start);
        let Some(c) = trimmed.chars().next() else {
            return Ok((Tok::End, col));
        };
        let tok = match c {
            '(' => Tok::Open,
            ')' => Tok::Close,
            ',' => Tok::Comma,
            '.' if trimmed.starts_with("...") => Tok::Ellipsis,
            c if c.is_ascii_alphabetic() || c == '_' => {
                let len = trimmed.find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_')).unwrap_or(trimmed.len());
                self.pos += len;
                return Ok((Tok::Ident(&trimmed[..len]), col));
            }
            other => return Err(Error::syntax(col, format!("unexpected character `{other}`"))),
        };
        self.pos += if tok == Tok::Ellipsis { 3 } else { 1 };
        Ok((tok, col))
    }

    fn peek(&mut self) -> Result<(Tok<'a>, usize)> {
        let save = self.pos;
        let t = self.next();
        self.pos = save;
        t
    }

    fn expect(&mut self, want: Tok<'static>) -> Result<()> {
        let (t, col) = self.next()?;
        if t == want {
            Ok(())
        } else {
            Err(Error::syntax(col, format!("expected {want}, found {t}")))
        }
    }

    fn ty(&mut self) -> Result<TypeClass> {
        let (t, col) = self.next()?;
        let Tok::Ident(word) = t else {
            return Err(Error::syntax(col, format!("expected a type, found {t}")));
        };
        if word == "signed" || word == "unsigned" {
            return match self.next()? {
                (Tok::Ident("char"), _) => Ok(TypeClass::I8),
                (t, c) => Err(Error::syntax(c, format!("expected `char` after `{word}`, found {t}"))),
            };
        }
        TypeClass::from_keyword(word).ok_or_else(|| Error::UnknownType { col, name: word.to_string() })
    }
}

/// Parses `type ident "(" (params | "void") ")"` into canonical form.
///
/// Accepted types are `void bool i8 u8 i16 u16 i32 u32 f32 ptr char`, plus
/// the spellings `signed char` and `unsigned char`. The function name is
/// not retained.
pub fn parse_signature(text: &str) -> Result<FunctionSignature> {
    let mut lx = Lexer { src: text, pos: 0 };
    let ret = lx.ty()?;
    match lx.next()? {
        (Tok::Ident(_), _) => {}
        (t, col) => return Err(Error::syntax(col, format!("expected a function name, found {t}"))),
    }
    lx.expect(Tok::Open)?;
    let mut params = Vec::new();
    let mut varargs = false;
    let mut void_list = false;
    if lx.peek()?.0 == Tok::Ident("void") {
        let save = lx.pos;
        lx.next()?;
        void_list = lx.peek()?.0 == Tok::Close;
        if !void_list {
            lx.pos = save;
        }
    }
    if !void_list {
        loop {
            let (t, col) = lx.peek()?;
            if t == Tok::Ellipsis {
                if params.is_empty() {
                    return Err(Error::syntax(col, "`...` needs at least one named parameter"));
                }
                lx.next()?;
                varargs = true;
                break;
            }
            let p = lx.ty()?;
            if p.is_void() {
                return Err(Error::syntax(col, "`void` cannot be a parameter type"));
            }
            params.push(p);
            if lx.peek()?.0 != Tok::Comma {
                break;
            }
            lx.next()?;
        }
    }
    lx.expect(Tok::Close)?;
    match lx.next()? {
        (Tok::End, _) => {}
        (t, col) => return Err(Error::syntax(col, format!("expected end of input, found {t}"))),
    }
    FunctionSignature::new(ret, params, varargs)
}

/// One corpus line: a signature with its call-site and definition counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub sig: FunctionSignature,
    pub call_weight: u64,
    pub def_weight: u64,
}

/// A weighted set of distinct function signatures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corpus {
    entries: Vec<CorpusEntry>,
}

const DEFAULT_CORPUS: &str = include_str!("../data/default.corpus");

impl Corpus {
    /// Builds a corpus, merging duplicate signatures by summing weights
    /// (first occurrence keeps its position).
    pub fn new(entries: impl IntoIterator<Item = CorpusEntry>) -> Result<Self> {
        let mut merged: Vec<CorpusEntry> = Vec::new();
        for e in entries {
            match merged.iter_mut().find(|m| m.sig == e.sig) {
                Some(m) => {
                    m.call_weight += e.call_weight;
                    m.def_weight += e.def_weight;
                }
                None => merged.push(e),
            }
        }
        if !merged.iter().any(|e| e.call_weight > 0) {
            return Err(Error::EmptyCorpus);
        }
        Ok(Corpus { entries: merged })
    }

    /// Reads `<call_weight> <def_weight> <signature>` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in content_lines(text) {
            let entry = parse_entry(line).map_err(|e| e.at_line(n))?;
            entries.push(entry);
        }
        Corpus::new(entries)
    }

    /// The embedded default corpus: the most commonly called function
    /// types of the analysed code base with rank-based placeholder weights.
    pub fn builtin() -> Self {
        match Corpus::parse(DEFAULT_CORPUS) {
            Ok(c) => c,
            Err(e) => panic!("embedded default corpus is invalid: {e}"),
        }
    }

    pub fn builtin_source() -> &'static str {
        DEFAULT_CORPUS
    }

    pub fn entries(&self) -> &[CorpusEntry] {
        &self.entries
    }

    pub fn find(&self, sig: &FunctionSignature) -> Option<&CorpusEntry> {
        self.entries.iter().find(|e| &e.sig == sig)
    }

    pub fn print(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!("{} {} {}\n", e.call_weight, e.def_weight, e.sig));
        }
        out
    }
}

fn parse_weight(token: &str) -> Result<u64> {
    if let Some(rest) = token.strip_prefix('-') {
        if rest.parse::<f64>().is_ok() {
            return Err(Error::NegativeWeight);
        }
    }
    token.parse().map_err(|_| Error::syntax(1, format!("expected a weight, found `{token}`")))
}

fn parse_entry(line: &str) -> Result<CorpusEntry> {
    let mut parts = line.splitn(3, char::is_whitespace);
    let (Some(cw), Some(dw), Some(sig)) = (parts.next(), parts.next(), parts.next()) else {
        return Err(Error::syntax(1, "expected `<call_weight> <def_weight> <signature>`"));
    };
    let call_weight = parse_weight(cw)?;
    let def_weight = parse_weight(dw)?;
    let offset = line.len() - sig.len();
    let sig = parse_signature(sig).map_err(|e| match e {
        Error::Syntax { col, msg } => Error::Syntax { col: col + offset, msg },
        Error::UnknownType { col, name } => Error::UnknownType { col: col + offset, name },
        e => e,
    })?;
    Ok(CorpusEntry { sig, call_weight, def_weight })
}
