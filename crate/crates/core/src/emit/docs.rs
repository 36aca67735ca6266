use serde::{Deserialize, Serialize};

use super::render::{HumanExample, AUTOGENERATED_TAG};
use crate::miner::join_continuations;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocExample {
    pub summary: String,
    /// Logical command lines, continuations joined.
    pub lines: Vec<String>,
    pub autogenerated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocSection {
    pub command: String,
    /// Zero-based line of the `## prefix command` heading.
    pub line: usize,
    pub examples: Vec<DocExample>,
}

impl DocSection {
    pub fn human_examples(&self) -> Vec<HumanExample> {
        self.examples
            .iter()
            .filter(|e| !e.autogenerated)
            .map(|e| HumanExample { summary: e.summary.clone(), lines: e.lines.clone() })
            .collect()
    }
}

/// Command sections of a reference document together with the examples in
/// their Examples subsections. Each example is the paragraph before a
/// fenced block plus the block's lines.
pub fn parse_doc(text: &str, prefix: &str) -> Vec<DocSection> {
    let mut sections: Vec<DocSection> = Vec::new();
    let mut in_examples = false;
    let mut paragraph: Vec<String> = Vec::new();
    let mut fence: Option<Vec<String>> = None;
    let mut after_blank = false;
    for (i, line) in text.lines().enumerate() {
        if let Some(body) = fence.as_mut() {
            if line.trim_start().starts_with("```") {
                let lines = join_continuations(body.iter().map(String::as_str))
                    .into_iter()
                    .filter(|l| !l.trim().is_empty())
                    .collect();
                let summary = paragraph.join(" ");
                if let (true, Some(s)) = (in_examples, sections.last_mut()) {
                    s.examples.push(DocExample {
                        autogenerated: summary.trim_end().ends_with(AUTOGENERATED_TAG),
                        summary,
                        lines,
                    });
                }
                fence = None;
                paragraph.clear();
            } else {
                body.push(line.to_string());
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("## ") {
            let mut words = rest.split_whitespace();
            in_examples = false;
            paragraph.clear();
            if words.next() == Some(prefix) {
                sections.push(DocSection {
                    command: words.collect::<Vec<_>>().join(" "),
                    line: i,
                    examples: Vec::new(),
                });
            }
            continue;
        }
        if line.starts_with("### ") {
            in_examples = line.trim_end() == "### Examples";
            paragraph.clear();
            continue;
        }
        if line.starts_with("# ") {
            in_examples = false;
            continue;
        }
        if line.trim_start().starts_with("```") {
            fence = Some(Vec::new());
            continue;
        }
        if line.trim().is_empty() {
            after_blank = true;
            continue;
        }
        if after_blank {
            paragraph.clear();
            after_blank = false;
        }
        paragraph.push(line.trim().to_string());
    }
    sections
}
