//! Filling template placeholders with concrete values.
//!
//! Each parameter gets a predicted type. Mined values that pass that
//! type's recognizer win; String parameters can fall back to a name made up
//! from their description; anything else keeps its placeholder.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::classifier::{FlatPredictor, ParamContext, ParamType, TypePrediction, TypePredictor, STOP_WORDS};
use crate::miner::{ValueCount, ValueLookup};
use crate::surface::CommandSurface;
use crate::telemetry::{placeholder, ExampleTemplate};

pub const DEFAULT_MIN_CONFIDENCE: f64 = 0.5;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FillError {
    #[error("template command `{0}` is not in the command surface")]
    UnknownCommand(String),
    #[error("malformed filled-example record on line {line}: {message}")]
    Record { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Lookup,
    Synthesized,
    Placeholder,
    /// A bare switch; the value is empty.
    Flag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilledArgument {
    pub name: String,
    pub value: String,
    pub provenance: Provenance,
    /// Always wrap the value in double quotes when rendering.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub quoted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param_type: Option<ParamType>,
    #[serde(default)]
    pub confidence: f64,
}

impl FilledArgument {
    pub fn placeholder(name: &str) -> Self {
        FilledArgument {
            name: name.to_string(),
            value: placeholder(name),
            provenance: Provenance::Placeholder,
            quoted: false,
            param_type: None,
            confidence: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilledExample {
    pub command: String,
    pub arguments: Vec<FilledArgument>,
    pub rank: usize,
}

impl FilledExample {
    pub fn render(&self, prefix: &str) -> String {
        let mut line = format!("{prefix} {}", self.command);
        for a in &self.arguments {
            line.push_str(" --");
            line.push_str(&a.name);
            if a.provenance == Provenance::Flag {
                continue;
            }
            line.push(' ');
            if a.provenance == Provenance::Placeholder {
                line.push_str(&a.value);
            } else {
                line.push_str(&shell_quote(&a.value, a.quoted));
            }
        }
        line
    }

    pub fn placeholder_count(&self) -> usize {
        self.arguments.iter().filter(|a| a.provenance == Provenance::Placeholder).count()
    }
}

/// Wraps `value` in double quotes when forced, when the shell would split
/// or expand it, or when it would read as an option name.
pub fn shell_quote(value: &str, force: bool) -> String {
    let option_like =
        value.strip_prefix('-').is_some_and(|r| r.starts_with(|c: char| c == '-' || c.is_ascii_alphabetic()));
    let plain = !value.is_empty()
        && !option_like
        && value.chars().all(|c| {
            c.is_ascii_alphanumeric() || "-_./:=,@+%~^[]{}".contains(c) || (!c.is_ascii() && !c.is_whitespace())
        });
    if plain && !force {
        return value.to_string();
    }
    let mut out = String::with_capacity(value.len() + 2);
    out.push('"');
    for c in value.chars() {
        if matches!(c, '"' | '\\' | '$' | '`') {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

pub fn write_filled(examples: &[FilledExample]) -> String {
    let mut out = String::new();
    for e in examples {
        out.push_str(&serde_json::to_string(e).expect("filled example serializes"));
        out.push('\n');
    }
    out
}

/// Reads line-delimited filled examples; lines without a `command` key
/// (such as a leading header) are skipped.
pub fn read_filled(text: &str) -> Result<Vec<FilledExample>, FillError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(line).map_err(|e| FillError::Record { line: i + 1, message: e.to_string() })?;
        if value.get("command").is_none() {
            continue;
        }
        out.push(serde_json::from_value(value).map_err(|e| FillError::Record { line: i + 1, message: e.to_string() })?);
    }
    Ok(out)
}

static INTEGER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^-?[0-9]+$").unwrap());
static GUID: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[0-9a-fA-F]+(-[0-9a-fA-F]+){2,}$").unwrap());
static URL_EMAIL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(https?://\S+|\S+@\S+\.\S+)$").unwrap());
static VERSION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^v?[0-9]+(\.[0-9]+){1,3}$").unwrap());
static TIME: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^([0-9]{4}-[0-9]{2}-[0-9]{2}|[0-9]+[smhd]$)").unwrap());
static IDENT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[A-Za-z0-9][A-Za-z0-9._-]*$").unwrap());
static KEY: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[A-Za-z0-9+/=_-]{8,}$").unwrap());
static INT_FORMAT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[0-9]+([:.,/_-][0-9]+)+$").unwrap());
static PERMISSION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[rwxdlcap]+$").unwrap());
static ENUM: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[A-Za-z][A-Za-z0-9_-]*$").unwrap());
static NAME_OF: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)^\s*name\s+of\s+(?:the\s+)?([^.]*)").unwrap());

fn printable(value: &str) -> bool {
    !value.is_empty() && !value.chars().any(char::is_control)
}

fn ip_address(value: &str) -> bool {
    let (addr, prefix) = match value.split_once('/') {
        Some((a, p)) => (a, Some(p)),
        None => (value, None),
    };
    let octet = |s: &str| {
        !s.is_empty()
            && s.len() <= 3
            && s.bytes().all(|b| b.is_ascii_digit())
            && s.parse::<u16>().is_ok_and(|n| n <= 255)
    };
    let parts: Vec<&str> = addr.split('.').collect();
    let prefix_ok = prefix.is_none_or(|p| {
        !p.is_empty() && p.len() <= 2 && p.bytes().all(|b| b.is_ascii_digit()) && p.parse::<u8>().is_ok_and(|n| n <= 32)
    });
    parts.len() == 4 && parts.iter().all(|p| octet(p)) && prefix_ok
}

fn file_path(value: &str) -> bool {
    let b = value.as_bytes();
    value.contains(['/', '\\'])
        || value.starts_with('~')
        || (b.len() >= 2 && b[0].is_ascii_alphabetic() && b[1] == b':')
}

/// Whether `value` has acceptable syntax for `t`. Empty and non-printable
/// values are rejected for every type.
pub fn validate_value(value: &str, t: ParamType) -> bool {
    if !printable(value) {
        return false;
    }
    match t {
        ParamType::String | ParamType::QuotedStrings => true,
        ParamType::Integer => INTEGER.is_match(value),
        ParamType::Guid => GUID.is_match(value),
        ParamType::IpAddress => ip_address(value),
        ParamType::UrlEmail => URL_EMAIL.is_match(value),
        ParamType::FolderFilePath => file_path(value),
        ParamType::Version => VERSION.is_match(value),
        ParamType::TimeDuration => TIME.is_match(value),
        ParamType::BuildInfo => IDENT.is_match(value) && value.bytes().any(|b| b.is_ascii_digit()),
        ParamType::KeysTokens => KEY.is_match(value),
        ParamType::IntWithSpecificFormat => INT_FORMAT.is_match(value),
        ParamType::PermissionFormats => PERMISSION.is_match(value),
        ParamType::Enum => ENUM.is_match(value),
        ParamType::CommandSpecificUnknown => false,
    }
}

/// `"Name of the web app."` becomes `MyWebApp`.
pub fn synthesize_string_name(description: &str) -> Option<String> {
    let subject = NAME_OF.captures(description)?.get(1)?.as_str();
    let mut name = String::from("My");
    let mut any = false;
    for word in subject.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()) {
        if STOP_WORDS.contains(&word.to_lowercase().as_str()) {
            continue;
        }
        let mut chars = word.chars();
        if let Some(first) = chars.next() {
            name.extend(first.to_uppercase());
            name.push_str(chars.as_str());
            any = true;
        }
    }
    any.then_some(name)
}

/// Anything that can assign a type to a parameter context.
pub trait TypeModel: Sync {
    fn predict_type(&self, ctx: &ParamContext) -> TypePrediction;
}

impl TypeModel for TypePredictor {
    fn predict_type(&self, ctx: &ParamContext) -> TypePrediction {
        self.predict(ctx)
    }
}

impl TypeModel for FlatPredictor {
    fn predict_type(&self, ctx: &ParamContext) -> TypePrediction {
        self.predict(ctx)
    }
}

/// Turns a template into a concrete example.
pub trait ValueGenerator: Sync {
    fn generate(&self, tmpl: &ExampleTemplate) -> Result<FilledExample, FillError>;
}

fn looks_like_placeholder(value: &str) -> bool {
    value.starts_with('<') && value.ends_with('>')
}

fn first_valid(candidates: &[ValueCount], t: ParamType) -> Option<&str> {
    candidates.iter().map(|c| c.value.as_str()).find(|v| !looks_like_placeholder(v) && validate_value(v, t))
}

/// Fills each template parameter in order of preference: a valid lookup
/// value (per command, then global) when the type prediction is confident,
/// a bare switch if the corpus shows one, a name synthesized from a String
/// parameter's description, and finally the placeholder.
pub fn fill_template(
    tmpl: &ExampleTemplate,
    surface: &CommandSurface,
    model: &dyn TypeModel,
    lookup: &ValueLookup,
    min_confidence: f64,
) -> Result<FilledExample, FillError> {
    let cmd = surface.lookup_command(&tmpl.command).ok_or_else(|| FillError::UnknownCommand(tmpl.command.clone()))?;
    let arguments = tmpl
        .parameters
        .iter()
        .map(|tp| {
            let Some(spec) = cmd.parameter(&tp.name) else {
                return FilledArgument::placeholder(&tp.name);
            };
            let prediction = model.predict_type(&ParamContext::from_surface(cmd, spec));
            let t = prediction.param_type;
            let mut arg = FilledArgument {
                param_type: Some(t),
                confidence: prediction.confidence,
                ..FilledArgument::placeholder(&tp.name)
            };
            let confident = prediction.confidence >= min_confidence;
            if confident {
                let hit = first_valid(lookup.candidates(&cmd.name, &spec.name), t)
                    .or_else(|| first_valid(lookup.global_candidates(&spec.name), t));
                if let Some(v) = hit {
                    arg.value = v.to_string();
                    arg.provenance = Provenance::Lookup;
                    arg.quoted = t == ParamType::QuotedStrings;
                    return arg;
                }
            }
            if lookup.is_flag(&cmd.name, &spec.name) {
                arg.value = String::new();
                arg.provenance = Provenance::Flag;
            } else if confident && t == ParamType::String {
                if let Some(v) = synthesize_string_name(&spec.description) {
                    arg.value = v;
                    arg.provenance = Provenance::Synthesized;
                }
            }
            arg
        })
        .collect();
    Ok(FilledExample { command: cmd.name.clone(), arguments, rank: tmpl.rank })
}

/// The lookup-table generator behind the common [`ValueGenerator`] interface.
pub struct LookupFiller<'a> {
    pub surface: &'a CommandSurface,
    pub model: &'a dyn TypeModel,
    pub lookup: &'a ValueLookup,
    pub min_confidence: f64,
}

impl ValueGenerator for LookupFiller<'_> {
    fn generate(&self, tmpl: &ExampleTemplate) -> Result<FilledExample, FillError> {
        fill_template(tmpl, self.surface, self.model, self.lookup, self.min_confidence)
    }
}
