//! Invocation parsing: shell-style tokenization and resolution against the surface.
//!
//! Grammar: whitespace separates tokens; single and double quotes group;
//! a backslash escapes the next character outside single quotes. Unquoted
//! tokens of the form `--name`, `-n` or `--name=value` are parameters.
//! Everything else is a value bound to the nearest preceding parameter.
//! Values that appear after the command path but before any parameter go
//! to the positional slot. An unquoted value binds a single token; any
//! further unbound token makes the line malformed.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Argument, MinedExample, POSITIONAL_SLOT};
use crate::surface::CommandSurface;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rejection {
    UnknownCommand,
    UnknownParameter,
    Malformed,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rejection::UnknownCommand => "unknown-command",
            Rejection::UnknownParameter => "unknown-parameter",
            Rejection::Malformed => "malformed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub quoted: bool,
}

impl Token {
    fn is_parameter(&self) -> bool {
        if self.quoted {
            return false;
        }
        let t = self.text.as_str();
        if let Some(rest) = t.strip_prefix("--") {
            rest.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        } else if let Some(rest) = t.strip_prefix('-') {
            rest.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        } else {
            false
        }
    }
}

/// Splits a line into tokens. Returns `None` on an unterminated quote or a
/// trailing escape.
pub fn tokenize(line: &str) -> Option<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut quoted = false;
    let mut in_token = false;
    let mut chars = line.chars();
    while let Some(c) = chars.next() {
        match c {
            '\'' => {
                in_token = true;
                quoted = true;
                loop {
                    match chars.next()? {
                        '\'' => break,
                        ch => current.push(ch),
                    }
                }
            }
            '"' => {
                in_token = true;
                quoted = true;
                loop {
                    match chars.next()? {
                        '"' => break,
                        '\\' => {
                            let next = chars.next()?;
                            if !matches!(next, '"' | '\\' | '$' | '`') {
                                current.push('\\');
                            }
                            current.push(next);
                        }
                        ch => current.push(ch),
                    }
                }
            }
            '\\' => {
                in_token = true;
                current.push(chars.next()?);
            }
            c if c.is_whitespace() => {
                if in_token {
                    tokens.push(Token { text: std::mem::take(&mut current), quoted });
                    in_token = false;
                    quoted = false;
                }
            }
            c => {
                in_token = true;
                current.push(c);
            }
        }
    }
    if in_token {
        tokens.push(Token { text: current, quoted });
    }
    Some(tokens)
}

/// Parses one invocation line against the surface.
pub fn parse_invocation(line: &str, surface: &CommandSurface) -> Result<MinedExample, Rejection> {
    parse_with_source(line, surface, "")
}

pub(crate) fn parse_with_source(
    line: &str,
    surface: &CommandSurface,
    source_id: &str,
) -> Result<MinedExample, Rejection> {
    let tokens = tokenize(line).ok_or(Rejection::Malformed)?;
    let mut iter = tokens.iter();
    match iter.next() {
        Some(t) if !t.quoted && t.text == surface.prefix => {}
        _ => return Err(Rejection::Malformed),
    }
    let rest: Vec<&Token> = iter.collect();
    let path_len = rest.iter().take_while(|t| !t.quoted && !t.text.starts_with('-')).count();
    let (spec, consumed) = (1..=path_len)
        .rev()
        .find_map(|n| {
            let name = rest[..n].iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" ");
            surface.lookup_command(&name).map(|spec| (spec, n))
        })
        .ok_or(Rejection::UnknownCommand)?;

    let mut arguments: Vec<Argument> = Vec::new();
    let mut positional = Vec::new();
    let mut i = consumed;
    while i < rest.len() && !rest[i].is_parameter() {
        positional.push(rest[i]);
        i += 1;
    }
    if !positional.is_empty() {
        if positional.len() > 1 || positional[0].text.is_empty() {
            return Err(Rejection::Malformed);
        }
        arguments.push(Argument::value(POSITIONAL_SLOT, &positional[0].text, positional[0].quoted));
    }

    while i < rest.len() {
        let token = rest[i];
        if !token.is_parameter() {
            // A second value token with no parameter to bind to.
            return Err(Rejection::Malformed);
        }
        let (raw_name, inline_value) = match token.text.split_once('=') {
            Some((n, v)) => (n, Some(v)),
            None => (token.text.as_str(), None),
        };
        let name = spec.canonical_parameter(raw_name).ok_or(Rejection::UnknownParameter)?.to_string();
        if arguments.iter().any(|a| a.name == name) {
            return Err(Rejection::Malformed);
        }
        i += 1;
        let argument = if let Some(v) = inline_value {
            let inner = tokenize(v).ok_or(Rejection::Malformed)?;
            match inner.as_slice() {
                [one] => Argument::value(&name, &one.text, one.quoted),
                _ => return Err(Rejection::Malformed),
            }
        } else if i < rest.len() && !rest[i].is_parameter() {
            let v = rest[i];
            i += 1;
            Argument::value(&name, &v.text, v.quoted)
        } else {
            Argument::flag(&name)
        };
        if argument.value.as_deref() == Some("") {
            return Err(Rejection::Malformed);
        }
        arguments.push(argument);
    }

    Ok(MinedExample { source_id: source_id.to_string(), command: spec.name.clone(), arguments, line: line.to_string() })
}
