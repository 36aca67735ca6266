//! Mining concrete invocations from document corpora.
//!
//! Documents are scanned for CLI code blocks, each candidate line is parsed
//! against the current surface, and the surviving examples feed the value
//! lookup table used by the filler.

mod extract;
mod lookup;
mod parse;

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::surface::CommandSurface;

pub use extract::{extract_blocks, join_continuations, CodeBlock, ExtractConfig};
pub use lookup::{build_lookup, LookupBuilder, ValueCount, ValueLookup};
pub use parse::{parse_invocation, tokenize, Rejection, Token};

/// Argument name under which positional values after the command path are kept.
pub const POSITIONAL_SLOT: &str = "@positional";

/// Longest value kept by the sanity filter.
pub const MAX_VALUE_LEN: usize = 256;

#[derive(Debug, thiserror::Error)]
pub enum MinerError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed corpus manifest {path}: {source}")]
    Manifest {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("duplicate document id `{0}` in corpus")]
    DuplicateId(String),
    #[error("malformed mined-example record on line {line}: {message}")]
    Record { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DocKind {
    QaPost,
    Issue,
    DocPage,
    Blog,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceDocument {
    pub id: String,
    pub kind: DocKind,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Argument {
    pub name: String,
    /// `None` for a bare flag.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    /// The value was written inside quotes.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub quoted: bool,
}

impl Argument {
    pub fn value(name: &str, value: &str, quoted: bool) -> Self {
        Argument { name: name.to_string(), value: Some(value.to_string()), quoted }
    }

    pub fn flag(name: &str) -> Self {
        Argument { name: name.to_string(), value: None, quoted: false }
    }

    pub fn is_positional(&self) -> bool {
        self.name == POSITIONAL_SLOT
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinedExample {
    pub source_id: String,
    pub command: String,
    pub arguments: Vec<Argument>,
    pub line: String,
}

impl MinedExample {
    /// Named arguments, positional slot excluded.
    pub fn named_arguments(&self) -> impl Iterator<Item = &Argument> {
        self.arguments.iter().filter(|a| !a.is_positional())
    }

    pub fn parameter_names(&self) -> impl Iterator<Item = &str> {
        self.named_arguments().map(|a| a.name.as_str())
    }
}

/// Drop reasons tallied by [`filter_corpus`] and the mining pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DropReason {
    UnknownCommand,
    UnknownParameter,
    Malformed,
    InvalidValue,
    Duplicate,
}

impl From<Rejection> for DropReason {
    fn from(r: Rejection) -> Self {
        match r {
            Rejection::UnknownCommand => DropReason::UnknownCommand,
            Rejection::UnknownParameter => DropReason::UnknownParameter,
            Rejection::Malformed => DropReason::Malformed,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MiningReport {
    pub documents: usize,
    pub blocks: usize,
    pub candidate_lines: usize,
    pub parsed: usize,
    pub rejections: BTreeMap<Rejection, usize>,
}

/// Parses every candidate line of every document. Rejections are tallied,
/// not returned.
pub fn mine_documents(
    docs: &[SourceDocument],
    surface: &CommandSurface,
    cfg: &ExtractConfig,
) -> (Vec<MinedExample>, MiningReport) {
    let mut report = MiningReport { documents: docs.len(), ..MiningReport::default() };
    let mut examples = Vec::new();
    for doc in docs {
        let blocks = extract_blocks(doc, cfg);
        report.blocks += blocks.len();
        for block in &blocks {
            for line in block.invocations(&cfg.prefix) {
                report.candidate_lines += 1;
                match parse::parse_with_source(line, surface, &doc.id) {
                    Ok(ex) => {
                        report.parsed += 1;
                        examples.push(ex);
                    }
                    Err(r) => *report.rejections.entry(r).or_default() += 1,
                }
            }
        }
    }
    (examples, report)
}

fn value_is_sane(value: &str) -> bool {
    !value.is_empty() && value.chars().count() <= MAX_VALUE_LEN && !value.chars().any(char::is_control)
}

/// Checks an example against the surface invariants without re-parsing its line.
pub fn validate_example(ex: &MinedExample, surface: &CommandSurface) -> Result<(), DropReason> {
    let spec = surface.lookup_command(&ex.command).ok_or(DropReason::UnknownCommand)?;
    if spec.name != ex.command {
        return Err(DropReason::UnknownCommand);
    }
    let mut seen = HashSet::new();
    for arg in &ex.arguments {
        if !arg.is_positional() && spec.canonical_parameter(&arg.name) != Some(arg.name.as_str()) {
            return Err(DropReason::UnknownParameter);
        }
        if !seen.insert(arg.name.as_str()) {
            return Err(DropReason::Malformed);
        }
        if let Some(v) = &arg.value {
            if !value_is_sane(v) {
                return Err(DropReason::InvalidValue);
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FilterOutcome {
    pub retained: Vec<MinedExample>,
    pub drops: BTreeMap<DropReason, usize>,
}

/// Drops examples that are invalid against the current surface and removes
/// duplicates on (command, argument list), keeping first occurrences.
pub fn filter_corpus(examples: &[MinedExample], surface: &CommandSurface) -> FilterOutcome {
    let mut out = FilterOutcome::default();
    let mut seen: HashSet<(&str, &[Argument])> = HashSet::new();
    for ex in examples {
        if let Err(reason) = validate_example(ex, surface) {
            *out.drops.entry(reason).or_default() += 1;
            continue;
        }
        if !seen.insert((ex.command.as_str(), ex.arguments.as_slice())) {
            *out.drops.entry(DropReason::Duplicate).or_default() += 1;
            continue;
        }
        out.retained.push(ex.clone());
    }
    out
}

#[derive(Debug, Clone, Deserialize)]
struct ManifestEntry {
    id: String,
    kind: DocKind,
}

/// Loads a corpus directory: `manifest.json` maps file names (relative to
/// the directory) to `{id, kind}`. Documents come back ordered by file name.
pub fn load_corpus(dir: impl AsRef<Path>) -> Result<Vec<SourceDocument>, MinerError> {
    let dir = dir.as_ref();
    let manifest_path = dir.join("manifest.json");
    let text =
        fs::read_to_string(&manifest_path).map_err(|source| MinerError::Io { path: manifest_path.clone(), source })?;
    let manifest: BTreeMap<String, ManifestEntry> =
        serde_json::from_str(&text).map_err(|source| MinerError::Manifest { path: manifest_path, source })?;
    let mut ids = HashSet::new();
    let mut docs = Vec::with_capacity(manifest.len());
    for (file, entry) in manifest {
        if !ids.insert(entry.id.clone()) {
            return Err(MinerError::DuplicateId(entry.id));
        }
        let path = dir.join(&file);
        let body = fs::read_to_string(&path).map_err(|source| MinerError::Io { path, source })?;
        docs.push(SourceDocument { id: entry.id, kind: entry.kind, body });
    }
    Ok(docs)
}

pub fn write_examples(examples: &[MinedExample]) -> String {
    let mut out = String::new();
    for ex in examples {
        out.push_str(&serde_json::to_string(ex).expect("serializes"));
        out.push('\n');
    }
    out
}

/// Reads mined examples written by [`write_examples`]; objects without a
/// `command` field (headers) are skipped.
pub fn read_examples(text: &str) -> Result<Vec<MinedExample>, MinerError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |e: serde_json::Error| MinerError::Record { line: i + 1, message: e.to_string() };
        let value: serde_json::Value = serde_json::from_str(line).map_err(err)?;
        if value.get("command").is_none() {
            continue;
        }
        out.push(serde_json::from_value(value).map_err(err)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surface(renamed: bool) -> CommandSurface {
        let loc = if renamed { "region" } else { "location" };
        CommandSurface::from_json(&format!(
            r#"{{"prefix":"az","version":"2","commands":[
              {{"module":"group","name":"group create","parameters":[{{"name":"name","aliases":["n"]}},{{"name":"{loc}","aliases":["l"]}}]}},
              {{"module":"group","name":"group delete","parameters":[{{"name":"name"}},{{"name":"yes"}}]}}
            ]}}"#
        ))
        .unwrap()
    }

    fn parse(line: &str, s: &CommandSurface) -> MinedExample {
        parse_invocation(line, s).unwrap()
    }

    #[test]
    fn filter_drops_invalid_and_duplicates() {
        let s = surface(false);
        let mut mined = Vec::new();
        for i in 0..5 {
            mined.push(parse(&format!("az group create --name g{i} --location eastus"), &s));
        }
        for i in 0..3 {
            mined.push(parse(&format!("az group create --name g{i} --location eastus"), &s));
        }
        let mut bad = parse("az group delete --name x", &s);
        bad.arguments[0].name = "nam".into();
        mined.push(bad.clone());
        bad.arguments[0].name = "colour".into();
        mined.push(bad);
        assert_eq!(mined.len(), 10);
        let out = filter_corpus(&mined, &s);
        assert_eq!(out.retained.len(), 5);
        assert_eq!(out.drops[&DropReason::UnknownParameter], 2);
        assert_eq!(out.drops[&DropReason::Duplicate], 3);
    }

    #[test]
    fn empty_input_and_renamed_parameter() {
        let old = surface(false);
        let new = surface(true);
        assert!(filter_corpus(&[], &new).retained.is_empty());
        let ex = parse("az group create -n g -l westus", &old);
        let out = filter_corpus(&[ex], &new);
        assert!(out.retained.is_empty());
        assert_eq!(out.drops[&DropReason::UnknownParameter], 1);
    }

    #[test]
    fn control_characters_and_overlong_values_are_invalid() {
        let s = surface(false);
        let mut ex = parse("az group create --name g", &s);
        ex.arguments[0].value = Some("a\u{7}b".into());
        assert_eq!(validate_example(&ex, &s), Err(DropReason::InvalidValue));
        ex.arguments[0].value = Some("x".repeat(MAX_VALUE_LEN + 1));
        assert_eq!(validate_example(&ex, &s), Err(DropReason::InvalidValue));
    }

    #[test]
    fn filtering_is_idempotent() {
        let s = surface(false);
        let mined: Vec<MinedExample> =
            ["az group create -n a", "az group create -n a", "az group delete --name b --yes"]
                .iter()
                .map(|l| parse(l, &s))
                .collect();
        let once = filter_corpus(&mined, &s).retained;
        let twice = filter_corpus(&once, &s).retained;
        assert_eq!(once, twice);
    }

    #[test]
    fn mining_tallies_rejections() {
        let s = surface(false);
        let docs = vec![SourceDocument {
            id: "q1".into(),
            kind: DocKind::QaPost,
            body: "```azure-cli\naz group create -n a\naz group explode\naz group create --bogus 1\n```".into(),
        }];
        let (ex, report) = mine_documents(&docs, &s, &ExtractConfig::new("az", "azure-cli"));
        assert_eq!(ex.len(), 1);
        assert_eq!(ex[0].source_id, "q1");
        assert_eq!(report.candidate_lines, 3);
        assert_eq!(report.rejections[&Rejection::UnknownCommand], 1);
        assert_eq!(report.rejections[&Rejection::UnknownParameter], 1);
    }

    #[test]
    fn examples_file_round_trips() {
        let s = surface(false);
        let ex = vec![parse("az group delete --name 'b c' --yes", &s)];
        let text = format!("{{\"header\":{{}}}}\n{}", write_examples(&ex));
        assert_eq!(read_examples(&text).unwrap(), ex);
    }
}
