//! Rendering filled examples as help text, reference markdown and patches
//! against existing documentation.

mod docs;
mod patch;
mod render;

use std::fs;
use std::io::Write;
use std::path::Path;

pub use docs::{parse_doc, DocExample, DocSection};
pub use patch::{apply_patch, insert_fragment, render_patch, unified_diff, CONTEXT_LINES};
pub use render::{
    build_doc, machine_summary, render_block, render_fragment, render_group_doc, render_help, render_markdown,
    wrap_command, DocFormat, ExampleBlock, HumanExample, RenderedDoc, AUTOGENERATED_TAG, WRAP_WIDTH,
};

#[derive(Debug, thiserror::Error)]
pub enum EmitError {
    #[error("example for `{found}` cannot be rendered under `{expected}`")]
    MismatchedCommand { expected: String, found: String },
    #[error("cannot place examples for `{command}`: several anchors match ({})", candidates.join("; "))]
    AmbiguousAnchor { command: String, candidates: Vec<String> },
    #[error("patch does not apply: {0}")]
    PatchFailed(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Writes through a temporary file in the same directory, then renames it
/// over `path`, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), EmitError> {
    let io = |source| EmitError::Io { path: path.to_path_buf(), source };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = std::env::temp_dir().join(format!("exforge-emit-{}", std::process::id()));
        let path = dir.join("nested").join("f.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "two");
        let leftovers: Vec<_> = fs::read_dir(path.parent().unwrap()).unwrap().collect();
        assert_eq!(leftovers.len(), 1);
        fs::remove_dir_all(dir).unwrap();
    }
}
