//! Pipeline configuration: a TOML file, overridden by `EXFORGE_*`
//! environment variables, overridden in turn by command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};

use exforge_core::augment::SpanMaskConfig;
use exforge_core::classifier::ForestParams;
use exforge_core::filler::DEFAULT_MIN_CONFIDENCE;
use exforge_core::metrics::DEFAULT_SESSION_GAP_MINUTES;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::CliError;

pub const ENV_PREFIX: &str = "EXFORGE_";

/// Keys holding paths. File values resolve against the config file's
/// directory; env and flag values against the working directory.
const PATH_KEYS: [&str; 6] = ["surface", "telemetry", "corpus", "docs", "labeled", "output"];

/// Keys whose env values are always strings, even if they look numeric.
const STRING_KEYS: [&str; 3] = ["cli_tag", "current_version", "backend"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    #[default]
    TypedLookup,
    Cooccurrence,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::TypedLookup => "typed-lookup",
            Backend::Cooccurrence => "cooccurrence",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub surface: Option<PathBuf>,
    pub telemetry: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    /// Existing reference docs: the human examples and the patch targets.
    pub docs: Option<PathBuf>,
    /// Hand-labeled parameter types; falls back to surface labels.
    pub labeled: Option<PathBuf>,
    pub output: PathBuf,
    pub k: usize,
    pub min_confidence: f64,
    pub seed: u64,
    pub backend: Backend,
    /// Fenced-block tag for CLI snippets.
    pub cli_tag: String,
    /// Telemetry version to keep; defaults to the surface version.
    pub current_version: Option<String>,
    pub cv_folds: usize,
    pub session_gap_minutes: i64,
    pub forest: ForestParams,
    pub masking: SpanMaskConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            surface: None,
            telemetry: None,
            corpus: None,
            docs: None,
            labeled: None,
            output: PathBuf::from("exforge-out"),
            k: 3,
            min_confidence: DEFAULT_MIN_CONFIDENCE,
            seed: 0,
            backend: Backend::default(),
            cli_tag: "azurecli".into(),
            current_version: None,
            cv_folds: 3,
            session_gap_minutes: DEFAULT_SESSION_GAP_MINUTES,
            forest: ForestParams::default(),
            masking: SpanMaskConfig::default(),
        }
    }
}

/// Flag values that beat both the file and the environment.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub min_confidence: Option<f64>,
    pub backend: Option<Backend>,
    pub output: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn require<'a>(&self, key: &str, value: &'a Option<PathBuf>) -> Result<&'a Path, CliError> {
        value.as_deref().ok_or_else(|| CliError::Config(format!("`{key}` is not set in the config or environment")))
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.k == 0 {
            return Err(CliError::Config("k must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.min_confidence) {
            return Err(CliError::Config(format!("min_confidence {} is outside [0, 1]", self.min_confidence)));
        }
        if self.cv_folds < 2 {
            return Err(CliError::Config("cv_folds must be at least 2".into()));
        }
        if self.session_gap_minutes <= 0 {
            return Err(CliError::Config("session_gap_minutes must be positive".into()));
        }
        let m = &self.masking;
        if !(m.mask_fraction > 0.0 && m.mask_fraction < 1.0) || m.mean_span < 1.0 {
            return Err(CliError::Config("masking needs 0 < mask_fraction < 1 and mean_span >= 1".into()));
        }
        if self.cli_tag.trim().is_empty() {
            return Err(CliError::Config("cli_tag is empty".into()));
        }
        Ok(())
    }
}

/// Env values are parsed as TOML literals when possible so numbers and
/// booleans keep their type; anything else is a string.
fn env_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

fn set_key(table: &mut Table, key: &str, value: Value) -> Result<(), CliError> {
    if let Some(rest) = key.strip_prefix("forest_") {
        let sub = table
            .entry("forest")
            .or_insert_with(|| Value::Table(Table::new()))
            .as_table_mut()
            .ok_or_else(|| CliError::Config("`forest` must be a table".into()))?;
        sub.insert(rest.to_string(), value);
    } else if let Some(rest) = key.strip_prefix("masking_") {
        let sub = table
            .entry("masking")
            .or_insert_with(|| Value::Table(Table::new()))
            .as_table_mut()
            .ok_or_else(|| CliError::Config("`masking` must be a table".into()))?;
        sub.insert(rest.to_string(), value);
    } else {
        table.insert(key.to_string(), value);
    }
    Ok(())
}

fn resolve_paths(table: &mut Table, base: &Path) {
    for key in PATH_KEYS {
        if let Some(Value::String(s)) = table.get(key) {
            let p = Path::new(s);
            if p.is_relative() {
                let joined = base.join(p).to_string_lossy().into_owned();
                table.insert(key.to_string(), Value::String(joined));
            }
        }
    }
}

/// Builds the effective configuration. `env` is passed in rather than read
/// here so callers (and tests) control it.
pub fn load_config(
    path: Option<&Path>,
    env: impl IntoIterator<Item = (String, String)>,
    overrides: &Overrides,
) -> Result<(PipelineConfig, Option<PathBuf>), CliError> {
    let mut table = Table::new();
    let mut base = None;
    if let Some(path) = path {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        table = text
            .parse::<Table>()
            .map_err(|e| CliError::Config(format!("malformed config {}: {}", path.display(), e.message())))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        resolve_paths(&mut table, &dir);
        base = Some(dir);
    }

    let mut env: Vec<(String, String)> =
        env.into_iter().filter_map(|(k, v)| k.strip_prefix(ENV_PREFIX).map(|k| (k.to_ascii_lowercase(), v))).collect();
    env.sort();
    for (key, raw) in env {
        let value = if PATH_KEYS.contains(&key.as_str()) || STRING_KEYS.contains(&key.as_str()) {
            Value::String(raw)
        } else {
            env_value(&raw)
        };
        set_key(&mut table, &key, value)?;
    }

    if let Some(k) = overrides.k {
        table.insert("k".into(), Value::Integer(k as i64));
    }
    if let Some(seed) = overrides.seed {
        // TOML integers are signed; keep the full u64 range by round-tripping the bits.
        table.insert("seed".into(), Value::Integer(seed as i64));
    }
    if let Some(m) = overrides.min_confidence {
        table.insert("min_confidence".into(), Value::Float(m));
    }
    if let Some(b) = overrides.backend {
        table.insert("backend".into(), Value::String(b.to_string()));
    }
    if let Some(o) = &overrides.output {
        table.insert("output".into(), Value::String(o.to_string_lossy().into_owned()));
    }

    let seed_bits = match table.get("seed") {
        Some(Value::Integer(i)) => Some(*i as u64),
        Some(_) => return Err(CliError::Config("seed must be an integer".into())),
        None => None,
    };
    table.remove("seed");
    let mut cfg: PipelineConfig =
        Value::Table(table).try_into().map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
    if let Some(s) = seed_bits {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok((cfg, base))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn precedence_flag_env_file_default() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "k = 5\nseed = 7\nsurface = \"s.json\"\n[forest]\ntree_count = 10\n").unwrap();
        let (cfg, _) = load_config(Some(&path), env(&[]), &Overrides::default()).unwrap();
        assert_eq!((cfg.k, cfg.seed, cfg.forest.tree_count), (5, 7, 10));
        assert_eq!(cfg.surface.unwrap(), dir.path().join("s.json"));
        assert_eq!(cfg.min_confidence, DEFAULT_MIN_CONFIDENCE);

        let e = env(&[("EXFORGE_K", "4"), ("EXFORGE_FOREST_TREE_COUNT", "20"), ("OTHER_K", "9")]);
        let (cfg, _) = load_config(Some(&path), e.clone(), &Overrides::default()).unwrap();
        assert_eq!((cfg.k, cfg.forest.tree_count), (4, 20));

        let flags = Overrides { k: Some(2), backend: Some(Backend::Cooccurrence), ..Overrides::default() };
        let (cfg, _) = load_config(Some(&path), e, &flags).unwrap();
        assert_eq!(cfg.k, 2);
        assert_eq!(cfg.backend, Backend::Cooccurrence);
    }

    #[test]
    fn large_seeds_survive() {
        let flags = Overrides { seed: Some(u64::MAX - 3), ..Overrides::default() };
        let (cfg, _) = load_config(None, env(&[]), &flags).unwrap();
        assert_eq!(cfg.seed, u64::MAX - 3);
    }

    #[test]
    fn bad_values_are_config_errors() {
        let flags = Overrides { k: Some(0), ..Overrides::default() };
        assert!(matches!(load_config(None, env(&[]), &flags), Err(CliError::Config(_))));
        let e = env(&[("EXFORGE_BACKEND", "neural")]);
        assert!(matches!(load_config(None, e, &Overrides::default()), Err(CliError::Config(_))));
        let e = env(&[("EXFORGE_TYPO", "1")]);
        assert!(matches!(load_config(None, e, &Overrides::default()), Err(CliError::Config(_))));
    }

    #[test]
    fn env_strings_and_numbers() {
        let e = env(&[
            ("EXFORGE_CLI_TAG", "bash"),
            ("EXFORGE_MIN_CONFIDENCE", "0.25"),
            ("EXFORGE_OUTPUT", "o"),
            ("EXFORGE_CURRENT_VERSION", "2.50"),
        ]);
        let (cfg, _) = load_config(None, e, &Overrides::default()).unwrap();
        assert_eq!(cfg.cli_tag, "bash");
        assert_eq!(cfg.min_confidence, 0.25);
        assert_eq!(cfg.output, PathBuf::from("o"));
        assert_eq!(cfg.current_version.as_deref(), Some("2.50"));
    }
}
