//! Code-block extraction from markdown-like documents.

use super::SourceDocument;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractConfig {
    /// Invocation prefix, e.g. `az`.
    pub prefix: String,
    /// Fenced-block language tag that marks CLI snippets, e.g. `azure-cli`.
    pub cli_tag: String,
}

impl ExtractConfig {
    pub fn new(prefix: impl Into<String>, cli_tag: impl Into<String>) -> Self {
        ExtractConfig { prefix: prefix.into(), cli_tag: cli_tag.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeBlock {
    pub language: Option<String>,
    /// Logical lines, with backslash continuations already joined.
    pub lines: Vec<String>,
}

impl CodeBlock {
    /// Logical lines whose first token is the prefix.
    pub fn invocations<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.lines.iter().map(|l| l.trim()).filter(move |l| l.split_whitespace().next() == Some(prefix))
    }
}

struct Fence {
    marker: char,
    len: usize,
    language: Option<String>,
    lines: Vec<String>,
}

fn fence_open(line: &str) -> Option<(char, usize, Option<String>)> {
    let indent = line.len() - line.trim_start_matches(' ').len();
    if indent > 3 {
        return None;
    }
    let rest = &line[indent..];
    let marker = rest.chars().next()?;
    if marker != '`' && marker != '~' {
        return None;
    }
    let len = rest.chars().take_while(|&c| c == marker).count();
    if len < 3 {
        return None;
    }
    let info = rest[len..].trim();
    if marker == '`' && info.contains('`') {
        return None;
    }
    let language = info
        .split(|c: char| c.is_whitespace() || c == '{' || c == ',')
        .next()
        .filter(|s| !s.is_empty())
        .map(str::to_string);
    Some((marker, len, language))
}

fn fence_closes(line: &str, marker: char, len: usize) -> bool {
    let trimmed = line.trim();
    let indent = line.len() - line.trim_start_matches(' ').len();
    indent <= 3 && trimmed.chars().take_while(|&c| c == marker).count() >= len && trimmed.chars().all(|c| c == marker)
}

fn is_indented(line: &str) -> bool {
    line.starts_with("    ") || line.starts_with('\t')
}

fn dedent(line: &str) -> &str {
    if let Some(rest) = line.strip_prefix('\t') {
        rest
    } else {
        line.get(4..).unwrap_or("")
    }
}

/// Joins physical lines ending in a backslash into single logical lines.
pub fn join_continuations<'a>(lines: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    let mut out = Vec::new();
    let mut pending: Option<String> = None;
    for raw in lines {
        let line = raw.trim_end();
        let (body, continues) = match line.strip_suffix('\\') {
            Some(body) => (body.trim_end(), true),
            None => (line, false),
        };
        let joined = match pending.take() {
            Some(mut acc) => {
                let piece = body.trim_start();
                if !piece.is_empty() {
                    if !acc.is_empty() {
                        acc.push(' ');
                    }
                    acc.push_str(piece);
                }
                acc
            }
            None => body.to_string(),
        };
        if continues {
            pending = Some(joined);
        } else {
            out.push(joined);
        }
    }
    if let Some(acc) = pending {
        out.push(acc);
    }
    out
}

fn first_token(lines: &[String]) -> Option<&str> {
    lines.iter().find_map(|l| l.split_whitespace().next())
}

fn keep(block: &CodeBlock, cfg: &ExtractConfig) -> bool {
    let tagged = block.language.as_deref().is_some_and(|l| l.eq_ignore_ascii_case(&cfg.cli_tag));
    tagged || first_token(&block.lines) == Some(cfg.prefix.as_str())
}

/// Fenced blocks tagged with the CLI language, plus any fenced or indented
/// block whose first token is the prefix.
pub fn extract_blocks(doc: &SourceDocument, cfg: &ExtractConfig) -> Vec<CodeBlock> {
    let mut blocks = Vec::new();
    let mut fence: Option<Fence> = None;
    let mut indented: Option<Vec<String>> = None;
    let mut prev_blank = true;

    let flush_indented = |acc: &mut Option<Vec<String>>, blocks: &mut Vec<CodeBlock>| {
        if let Some(lines) = acc.take() {
            let block = CodeBlock { language: None, lines: join_continuations(lines.iter().map(String::as_str)) };
            if keep(&block, cfg) {
                blocks.push(block);
            }
        }
    };

    for line in doc.body.lines() {
        if let Some(f) = fence.as_mut() {
            if fence_closes(line, f.marker, f.len) {
                let f = fence.take().expect("open fence");
                let block =
                    CodeBlock { language: f.language, lines: join_continuations(f.lines.iter().map(String::as_str)) };
                if keep(&block, cfg) {
                    blocks.push(block);
                }
                prev_blank = false;
            } else {
                f.lines.push(line.to_string());
            }
            continue;
        }
        if let Some(acc) = indented.as_mut() {
            if is_indented(line) {
                acc.push(dedent(line).to_string());
                continue;
            }
            if line.trim().is_empty() {
                acc.push(String::new());
                continue;
            }
            flush_indented(&mut indented, &mut blocks);
        }
        if let Some((marker, len, language)) = fence_open(line) {
            fence = Some(Fence { marker, len, language, lines: Vec::new() });
            continue;
        }
        if prev_blank && is_indented(line) && !line.trim().is_empty() {
            indented = Some(vec![dedent(line).to_string()]);
            continue;
        }
        prev_blank = line.trim().is_empty();
    }
    flush_indented(&mut indented, &mut blocks);
    if let Some(f) = fence {
        // Unterminated fences run to the end of the document.
        let block = CodeBlock { language: f.language, lines: join_continuations(f.lines.iter().map(String::as_str)) };
        if keep(&block, cfg) {
            blocks.push(block);
        }
    }
    blocks
}
