use similar::TextDiff;

use super::EmitError;

pub const CONTEXT_LINES: usize = 3;

fn is_section_heading(line: &str) -> bool {
    line.starts_with("## ") || line == "##" || (line.starts_with("# ") && !line.starts_with("##"))
}

fn is_subsection_heading(line: &str) -> bool {
    line.starts_with("### ") || is_section_heading(line)
}

fn section_matches(line: &str, prefix: &str, command: &str) -> bool {
    let Some(rest) = line.strip_prefix("## ") else {
        return false;
    };
    let mut words = rest.split_whitespace();
    words.next() == Some(prefix) && words.collect::<Vec<_>>().join(" ") == command
}

fn describe(lines: &[&str], at: &[usize]) -> Vec<String> {
    at.iter().map(|&i| format!("line {}: {}", i + 1, lines[i].trim_end())).collect()
}

/// `doc` with `fragment` inserted into the Examples subsection of the
/// `prefix command` section. A missing subsection is created at the end of
/// the section; a missing section is appended to the document.
pub fn insert_fragment(doc: &str, fragment: &str, prefix: &str, command: &str) -> Result<String, EmitError> {
    let lines: Vec<&str> = doc.lines().collect();
    let frag: Vec<&str> = fragment.trim_end_matches('\n').lines().collect();
    let headings: Vec<usize> = (0..lines.len()).filter(|&i| section_matches(lines[i], prefix, command)).collect();
    let mut out: Vec<String> = lines.iter().map(|l| l.to_string()).collect();
    let insert = |out: &mut Vec<String>, at: usize, block: Vec<String>| {
        let tail = out.split_off(at);
        out.push(String::new());
        out.extend(block);
        if tail.first().is_some_and(|l| !l.is_empty()) {
            out.push(String::new());
        }
        out.extend(tail);
    };
    let frag_lines: Vec<String> = frag.iter().map(|l| l.to_string()).collect();
    match headings.as_slice() {
        [] => {
            let end = last_content(&lines, 0, lines.len()).map_or(0, |i| i + 1);
            out.truncate(end);
            let mut block = vec![format!("## {prefix} {command}"), String::new(), "### Examples".into()];
            block.push(String::new());
            block.extend(frag_lines);
            if end == 0 {
                out = block;
            } else {
                insert(&mut out, end, block);
            }
        }
        [start] => {
            let end = (start + 1..lines.len()).find(|&i| is_section_heading(lines[i])).unwrap_or(lines.len());
            let examples: Vec<usize> = (start + 1..end).filter(|&i| lines[i].trim_end() == "### Examples").collect();
            match examples.as_slice() {
                [] => {
                    let at = last_content(&lines, *start, end).map_or(start + 1, |i| i + 1);
                    let mut block = vec!["### Examples".to_string(), String::new()];
                    block.extend(frag_lines);
                    insert(&mut out, at, block);
                }
                [ex] => {
                    let sub_end = (ex + 1..end).find(|&i| is_subsection_heading(lines[i])).unwrap_or(end);
                    let at = last_content(&lines, *ex, sub_end).map_or(ex + 1, |i| i + 1);
                    insert(&mut out, at, frag_lines);
                }
                many => {
                    return Err(EmitError::AmbiguousAnchor {
                        command: command.to_string(),
                        candidates: describe(&lines, many),
                    })
                }
            }
        }
        many => {
            return Err(EmitError::AmbiguousAnchor { command: command.to_string(), candidates: describe(&lines, many) })
        }
    }
    let mut text = out.join("\n");
    text.push('\n');
    Ok(text)
}

fn last_content(lines: &[&str], from: usize, to: usize) -> Option<usize> {
    (from..to).rev().find(|&i| !lines[i].trim().is_empty())
}

/// Unified diff (3 context lines) that adds `fragment` to the examples of
/// `command` in `existing`. Empty when the fragment is already present.
pub fn render_patch(
    existing: &str,
    fragment: &str,
    path: &str,
    prefix: &str,
    command: &str,
) -> Result<String, EmitError> {
    let needle = fragment.trim_matches('\n');
    if needle.is_empty() || existing.contains(needle) {
        return Ok(String::new());
    }
    let updated = insert_fragment(existing, fragment, prefix, command)?;
    Ok(unified_diff(existing, &updated, path))
}

pub fn unified_diff(old: &str, new: &str, path: &str) -> String {
    if old == new {
        return String::new();
    }
    TextDiff::from_lines(old, new)
        .unified_diff()
        .context_radius(CONTEXT_LINES)
        .header(&format!("a/{path}"), &format!("b/{path}"))
        .to_string()
}

struct Hunk {
    old_start: usize,
    old_len: usize,
    lines: Vec<(char, String)>,
}

fn parse_range(s: &str) -> Option<(usize, usize)> {
    match s.split_once(',') {
        Some((a, b)) => Some((a.parse().ok()?, b.parse().ok()?)),
        None => Some((s.parse().ok()?, 1)),
    }
}

fn parse_hunks(diff: &str) -> Result<Vec<Hunk>, EmitError> {
    let bad = |line: usize, msg: &str| EmitError::PatchFailed(format!("line {line}: {msg}"));
    let mut hunks: Vec<Hunk> = Vec::new();
    for (i, raw) in diff.split_inclusive('\n').enumerate() {
        let n = i + 1;
        if let Some(rest) = raw.strip_prefix("@@ -") {
            let (old, _) = rest.split_once(" +").ok_or_else(|| bad(n, "malformed hunk header"))?;
            let (start, len) = parse_range(old).ok_or_else(|| bad(n, "malformed hunk range"))?;
            hunks.push(Hunk { old_start: start, old_len: len, lines: Vec::new() });
            continue;
        }
        let Some(h) = hunks.last_mut() else {
            continue; // preamble: comments, ---/+++ headers
        };
        if raw.starts_with('\\') {
            if let Some((_, text)) = h.lines.last_mut() {
                if text.ends_with('\n') {
                    text.pop();
                }
            }
            continue;
        }
        let mut chars = raw.chars();
        match chars.next() {
            Some(c @ (' ' | '-' | '+')) => h.lines.push((c, chars.as_str().to_string())),
            _ => return Err(bad(n, "unexpected line inside hunk")),
        }
    }
    Ok(hunks)
}

/// Applies a unified diff exactly (no fuzz). Every context and removed
/// line must match the original at the stated position.
pub fn apply_patch(original: &str, diff: &str) -> Result<String, EmitError> {
    if diff.trim().is_empty() {
        return Ok(original.to_string());
    }
    let old: Vec<&str> = original.split_inclusive('\n').collect();
    let mut out = String::with_capacity(original.len() + diff.len());
    let mut pos = 0usize;
    for h in parse_hunks(diff)? {
        let start = if h.old_len == 0 { h.old_start } else { h.old_start.saturating_sub(1) };
        if start < pos || start > old.len() {
            return Err(EmitError::PatchFailed(format!("hunk at line {} out of order", h.old_start)));
        }
        for l in &old[pos..start] {
            out.push_str(l);
        }
        pos = start;
        let mut consumed = 0;
        for (kind, text) in &h.lines {
            match kind {
                ' ' | '-' => {
                    if old.get(pos) != Some(&text.as_str()) {
                        return Err(EmitError::PatchFailed(format!("context mismatch at original line {}", pos + 1)));
                    }
                    if *kind == ' ' {
                        out.push_str(text);
                    }
                    pos += 1;
                    consumed += 1;
                }
                _ => out.push_str(text),
            }
        }
        if consumed != h.old_len {
            return Err(EmitError::PatchFailed(format!(
                "hunk at line {} covers {consumed} lines, header says {}",
                h.old_start, h.old_len
            )));
        }
    }
    for l in &old[pos..] {
        out.push_str(l);
    }
    Ok(out)
}
