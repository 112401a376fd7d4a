//! Shared helpers for the line-oriented text formats.

use alloc::string::ToString;

use crate::error::{Error, Result};

/// Yields `(line_number, content)` for every line that is not blank after
/// stripping a trailing `#` comment.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

pub(crate) enum DocLine<'a> {
    Section(&'a str),
    Entry { key: &'a str, value: &'a str },
}

/// Parses one `[section]` or `key = value` line.
pub(crate) fn doc_line(line: &str) -> Result<DocLine<'_>> {
    if let Some(rest) = line.strip_prefix('[') {
        let name = rest.strip_suffix(']').ok_or_else(|| Error::syntax(line.len(), "expected `]`"))?;
        return Ok(DocLine::Section(name.trim()));
    }
    let eq = line.find('=').ok_or_else(|| Error::syntax(1, "expected `key = value` or `[section]`"))?;
    let key = line[..eq].trim();
    if key.is_empty() {
        return Err(Error::syntax(1, "missing key"));
    }
    Ok(DocLine::Entry { key, value: line[eq + 1..].trim() })
}

pub(crate) fn parse_bool(value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::syntax(1, alloc::format!("expected true or false, found `{other}`"))),
    }
}

pub(crate) fn parse_u64(token: &str) -> Result<u64> {
    token.parse().map_err(|_| Error::syntax(1, alloc::format!("expected an unsigned integer, found `{token}`")))
}

pub(crate) fn parse_width(token: &str) -> Result<u8> {
    match token {
        "0" => Ok(0),
        "8" => Ok(8),
        "16" => Ok(16),
        "32" => Ok(32),
        other => Err(Error::syntax(1, alloc::format!("expected a width in bits, found `{other}`"))),
    }
}

pub(crate) fn unknown_key(section: &str, key: &str) -> Error {
    let mut msg = "unknown key `".to_string();
    if !section.is_empty() {
        msg.push_str(section);
        msg.push('.');
    }
    msg.push_str(key);
    msg.push('`');
    Error::syntax(1, msg)
}
