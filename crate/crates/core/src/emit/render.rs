use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::EmitError;
use crate::filler::FilledExample;
use crate::surface::CommandSpec;

pub const AUTOGENERATED_TAG: &str = "(autogenerated)";
pub const WRAP_WIDTH: usize = 100;
const CONTINUATION_INDENT: &str = "    ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DocFormat {
    HelpText,
    Markdown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleBlock {
    pub summary: String,
    pub body: Vec<String>,
    pub autogenerated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedDoc {
    pub command: String,
    pub summary_lines: Vec<String>,
    pub example_blocks: Vec<ExampleBlock>,
    pub format: DocFormat,
}

/// A human-written example: summary text and the command line(s) shown.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HumanExample {
    pub summary: String,
    pub lines: Vec<String>,
}

/// Splits on spaces outside quotes; quoted spans stay inside one piece.
fn shell_words(line: &str) -> Vec<&str> {
    let mut words = Vec::new();
    let mut start = None;
    let mut quote: Option<char> = None;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        if escaped {
            escaped = false;
            continue;
        }
        match (quote, c) {
            (_, '\\') if quote != Some('\'') => {
                escaped = true;
                start.get_or_insert(i);
            }
            (Some(q), c) if c == q => quote = None,
            (Some(_), _) => {}
            (None, '"' | '\'') => {
                quote = Some(c);
                start.get_or_insert(i);
            }
            (None, ' ') => {
                if let Some(s) = start.take() {
                    words.push(&line[s..i]);
                }
            }
            (None, _) => {
                start.get_or_insert(i);
            }
        }
    }
    if let Some(s) = start {
        words.push(&line[s..]);
    }
    words
}

fn is_option(word: &str) -> bool {
    word.strip_prefix('-').is_some_and(|r| r.starts_with(|c: char| c == '-' || c.is_ascii_alphabetic()))
}

/// Words grouped so an option and its value are never split across lines.
fn wrap_units(line: &str) -> Vec<String> {
    let words = shell_words(line);
    let mut units = Vec::with_capacity(words.len());
    let mut i = 0;
    while i < words.len() {
        let w = words[i];
        match words.get(i + 1) {
            Some(next) if is_option(w) && !is_option(next) => {
                units.push(format!("{w} {next}"));
                i += 2;
            }
            _ => {
                units.push(w.to_string());
                i += 1;
            }
        }
    }
    units
}

/// Wraps a command line at `width` columns, breaking only between options.
/// Continued lines end in ` \` and the following lines are indented four
/// more spaces. An option longer than the width is left on its own line.
pub fn wrap_command(line: &str, indent: &str, width: usize) -> Vec<String> {
    let words = wrap_units(line);
    let mut out = Vec::new();
    let mut current = String::from(indent);
    let mut has_word = false;
    let cont_indent = format!("{indent}{CONTINUATION_INDENT}");
    for w in words {
        // room for " word" plus the trailing " \" if we continue afterwards
        if has_word && current.len() + 1 + w.len() + 2 > width {
            current.push_str(" \\");
            out.push(std::mem::replace(&mut current, cont_indent.clone()));
            has_word = false;
        }
        if has_word {
            current.push(' ');
        }
        current.push_str(&w);
        has_word = true;
    }
    out.push(current);
    out
}

/// Summary for a generated example: the first sentence of the command
/// description, or a numbered usage pattern when there is none.
pub fn machine_summary(spec: &CommandSpec, ex: &FilledExample, prefix: &str) -> String {
    let first = spec.description.split(". ").next().unwrap_or("").trim().trim_end_matches('.').trim();
    if first.chars().next().is_some_and(char::is_alphabetic) {
        format!("{first} {AUTOGENERATED_TAG}")
    } else {
        format!("Usage pattern {} for {prefix} {} {AUTOGENERATED_TAG}", ex.rank, spec.name)
    }
}

fn check(spec: &CommandSpec, examples: &[FilledExample]) -> Result<(), EmitError> {
    match examples.iter().find(|e| e.command != spec.name) {
        Some(e) => Err(EmitError::MismatchedCommand { expected: spec.name.clone(), found: e.command.clone() }),
        None => Ok(()),
    }
}

pub fn build_doc(
    spec: &CommandSpec,
    examples: &[FilledExample],
    human: &[HumanExample],
    prefix: &str,
    format: DocFormat,
) -> Result<RenderedDoc, EmitError> {
    check(spec, examples)?;
    let mut blocks: Vec<ExampleBlock> = human
        .iter()
        .map(|h| ExampleBlock {
            summary: h.summary.clone(),
            body: h.lines.iter().flat_map(|l| wrap_command(l, "", WRAP_WIDTH)).collect(),
            autogenerated: false,
        })
        .collect();
    blocks.extend(examples.iter().map(|e| ExampleBlock {
        summary: machine_summary(spec, e, prefix),
        body: wrap_command(&e.render(prefix), "", WRAP_WIDTH),
        autogenerated: true,
    }));
    Ok(RenderedDoc {
        command: spec.name.clone(),
        summary_lines: spec.description.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_string).collect(),
        example_blocks: blocks,
        format,
    })
}

/// Terminal help for one command: Command, Arguments and Examples sections.
pub fn render_help(spec: &CommandSpec, examples: &[FilledExample], prefix: &str) -> Result<String, EmitError> {
    let doc = build_doc(spec, examples, &[], prefix, DocFormat::HelpText)?;
    let mut out = String::new();
    writeln!(out, "\nCommand").unwrap();
    let summary = doc.summary_lines.join(" ");
    if summary.is_empty() {
        writeln!(out, "    {prefix} {}", spec.name).unwrap();
    } else {
        writeln!(out, "    {prefix} {} : {summary}", spec.name).unwrap();
    }
    if !spec.parameters.is_empty() {
        writeln!(out, "\nArguments").unwrap();
        let labels: Vec<String> = spec
            .parameters
            .iter()
            .map(|p| {
                let mut l = format!("--{}", p.name);
                for a in &p.aliases {
                    l.push(' ');
                    l.push_str(if a.len() == 1 { "-" } else { "--" });
                    l.push_str(a);
                }
                if p.required {
                    l.push_str(" [Required]");
                }
                l
            })
            .collect();
        let width = labels.iter().map(String::len).max().unwrap_or(0);
        for (label, p) in labels.iter().zip(&spec.parameters) {
            if p.description.is_empty() {
                writeln!(out, "    {label}").unwrap();
            } else {
                writeln!(out, "    {label:<width$} : {}", p.description).unwrap();
            }
        }
    }
    if !doc.example_blocks.is_empty() {
        writeln!(out, "\nExamples").unwrap();
        for block in &doc.example_blocks {
            writeln!(out, "    {}", block.summary).unwrap();
            for line in block.body.iter() {
                writeln!(out, "        {line}").unwrap();
            }
            out.push('\n');
        }
    }
    Ok(out)
}

/// Reference documentation section for one command. Human examples come
/// first; generated ones follow with the autogenerated tag.
pub fn render_markdown(
    spec: &CommandSpec,
    examples: &[FilledExample],
    human: &[HumanExample],
    prefix: &str,
    cli_tag: &str,
) -> Result<String, EmitError> {
    let doc = build_doc(spec, examples, human, prefix, DocFormat::Markdown)?;
    let mut out = format!("## {prefix} {}\n", spec.name);
    if !doc.summary_lines.is_empty() {
        write!(out, "\n{}\n", doc.summary_lines.join("\n")).unwrap();
    }
    if !doc.example_blocks.is_empty() {
        out.push_str("\n### Examples\n");
        for block in &doc.example_blocks {
            out.push('\n');
            out.push_str(&render_block(block, cli_tag));
        }
    }
    Ok(out)
}

/// One example as markdown: summary paragraph, blank line, fenced body.
pub fn render_block(block: &ExampleBlock, cli_tag: &str) -> String {
    let mut out = format!("{}\n\n```{cli_tag}\n", block.summary);
    for line in &block.body {
        out.push_str(line);
        out.push('\n');
    }
    out.push_str("```\n");
    out
}

/// Markdown for the generated examples alone, as inserted by a patch.
pub fn render_fragment(
    spec: &CommandSpec,
    examples: &[FilledExample],
    prefix: &str,
    cli_tag: &str,
) -> Result<String, EmitError> {
    let doc = build_doc(spec, examples, &[], prefix, DocFormat::Markdown)?;
    Ok(doc.example_blocks.iter().map(|b| render_block(b, cli_tag)).collect::<Vec<_>>().join("\n"))
}

/// A whole group document: title line then one section per command.
pub fn render_group_doc(group: &str, sections: &[String], prefix: &str) -> String {
    let mut out = format!("# {prefix} {group}\n");
    for s in sections {
        out.push('\n');
        out.push_str(s);
    }
    out
}
