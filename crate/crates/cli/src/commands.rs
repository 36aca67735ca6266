//! One function per subcommand. Each reads its declared inputs and writes
//! its declared outputs under the output directory, nothing else.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use exforge_core::augment::{example_tokens, finetune_dataset, pretraining_dataset, train_cooccurrence, write_dataset};
use exforge_core::classifier::{
    cross_validate, cross_validate_single_stage, read_labeled_tsv, train_two_stage, LabeledParam, ParamContext,
    TypePredictor, MODEL_FORMAT_VERSION,
};
use exforge_core::emit::{
    apply_patch, insert_fragment, parse_doc, render_fragment, render_group_doc, render_help, render_markdown,
    unified_diff, write_atomic, HumanExample,
};
use exforge_core::filler::{read_filled, write_filled, FilledExample, LookupFiller, Provenance, ValueGenerator};
use exforge_core::metrics::{
    coverage, help_success, help_success_csv, rouge_text, sessionize, ExampleParams, HelpSuccessReport,
};
use exforge_core::miner::{
    build_lookup, filter_corpus, load_corpus, mine_documents, parse_invocation, read_examples, write_examples,
    ExtractConfig, MinedExample, ValueLookup,
};
use exforge_core::surface::{command_group, load_surface, CommandSurface};
use exforge_core::telemetry::{
    aggregate, build_templates, canonicalize, ingest, read_records, read_templates, write_templates,
};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::config::{Backend, PipelineConfig};
use crate::error::CliError;

pub const TEMPLATES_FILE: &str = "templates.jsonl";
pub const MINED_FILE: &str = "mined.jsonl";
pub const LOOKUP_FILE: &str = "lookup.json";
pub const MODEL_FILE: &str = "model.json";
pub const FILLED_FILE: &str = "filled.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Counts reported by a stage, keyed by name.
pub type Counts = BTreeMap<String, u64>;

pub struct Context {
    pub cfg: PipelineConfig,
    /// Directory of the config file; manifest paths are shown relative to it.
    pub base: Option<PathBuf>,
    inputs: BTreeMap<String, PathBuf>,
    written: BTreeSet<String>,
}

fn input_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

impl Context {
    pub fn new(cfg: PipelineConfig, base: Option<PathBuf>) -> Self {
        Context { cfg, base, inputs: BTreeMap::new(), written: BTreeSet::new() }
    }

    fn display(&self, path: &Path) -> String {
        let shown = self.base.as_deref().and_then(|b| path.strip_prefix(b).ok()).unwrap_or(path);
        shown.to_string_lossy().replace('\\', "/")
    }

    fn note_input(&mut self, path: &Path) {
        if path.is_dir() {
            let mut files = Vec::new();
            collect_files(path, &mut files);
            for f in files {
                self.inputs.insert(self.display(&f), f);
            }
        } else {
            self.inputs.insert(self.display(path), path.to_path_buf());
        }
    }

    fn read_input(&mut self, path: &Path) -> Result<String, CliError> {
        let text = fs::read_to_string(path).map_err(|e| input_err(path, e))?;
        self.note_input(path);
        Ok(text)
    }

    fn surface(&mut self) -> Result<CommandSurface, CliError> {
        let path = self.cfg.require("surface", &self.cfg.surface)?.to_path_buf();
        let surface = load_surface(&path)?;
        self.note_input(&path);
        Ok(surface)
    }

    /// An artifact written by an earlier stage.
    fn read_artifact(&self, name: &str) -> Result<String, CliError> {
        let path = self.cfg.output.join(name);
        fs::read_to_string(&path)
            .map_err(|e| CliError::Input(format!("{}: {e} (run the stage that produces it first)", path.display())))
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        write_atomic(&self.cfg.output.join(name), contents.as_bytes())?;
        self.written.insert(name.to_string());
        Ok(())
    }

    fn header(&self, artifact: &str) -> Value {
        json!({
            "tool": "exforge",
            "version": TOOL_VERSION,
            "artifact": artifact,
            "seed": self.cfg.seed,
        })
    }

    /// JSON lines with a leading `{"header": ...}` record.
    fn write_jsonl(&mut self, name: &str, artifact: &str, body: &str) -> Result<(), CliError> {
        let mut text = serde_json::to_string(&json!({ "header": self.header(artifact) })).expect("json");
        text.push('\n');
        text.push_str(body);
        self.write(name, &text)
    }

    /// A JSON object with a `header` member added.
    fn write_json(&mut self, name: &str, artifact: &str, value: Value) -> Result<(), CliError> {
        let mut map = match value {
            Value::Object(m) => m,
            other => {
                let mut m = Map::new();
                m.insert("data".into(), other);
                m
            }
        };
        map.insert("header".into(), self.header(artifact));
        let mut text = serde_json::to_string_pretty(&Value::Object(map)).expect("json");
        text.push('\n');
        self.write(name, &text)
    }
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) {
    let Ok(entries) = fs::read_dir(dir) else { return };
    let mut paths: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
    paths.sort();
    for p in paths {
        if p.is_dir() {
            collect_files(&p, out);
        } else {
            out.push(p);
        }
    }
}

fn sha256_file(path: &Path) -> Result<(String, u64), CliError> {
    let bytes = fs::read(path).map_err(|e| input_err(path, e))?;
    Ok((hex::encode(Sha256::digest(&bytes)), bytes.len() as u64))
}

fn counts<const N: usize>(pairs: [(&str, usize); N]) -> Counts {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v as u64)).collect()
}

pub fn templates(ctx: &mut Context) -> Result<Counts, CliError> {
    let surface = ctx.surface()?;
    let path = ctx.cfg.require("telemetry", &ctx.cfg.telemetry)?.to_path_buf();
    let file = fs::File::open(&path).map_err(|e| input_err(&path, e))?;
    let version = ctx.cfg.current_version.clone().unwrap_or_else(|| surface.version.clone());
    let mut report = ingest(BufReader::new(file), &version)?;
    ctx.note_input(&path);
    canonicalize(&mut report.records, &surface);
    let aggs = aggregate(&report.records);
    let build = build_templates(&aggs, &surface, ctx.cfg.k)?;

    ctx.write_jsonl(TEMPLATES_FILE, "templates", &write_templates(&build.templates, &surface.prefix))?;
    let excluded: Vec<Value> = build
        .excluded
        .iter()
        .map(|e| {
            let reason = match &e.reason {
                exforge_core::telemetry::ExclusionReason::UnknownCommand => "unknown-command".to_string(),
                exforge_core::telemetry::ExclusionReason::UnknownParameter(p) => format!("unknown-parameter:{p}"),
            };
            json!({ "command": e.command, "parameter_set": e.parameter_set, "reason": reason })
        })
        .collect();
    ctx.write_json(
        "reports/templates.json",
        "templates-report",
        json!({ "version": version, "ingest": report, "aggregates": aggs.len(), "excluded": excluded }),
    )?;
    Ok(counts([
        ("records_retained", report.retained),
        ("aggregates", aggs.len()),
        ("templates", build.templates.len()),
        ("excluded_aggregates", build.excluded.len()),
    ]))
}

pub fn mine(ctx: &mut Context) -> Result<Counts, CliError> {
    let surface = ctx.surface()?;
    let dir = ctx.cfg.require("corpus", &ctx.cfg.corpus)?.to_path_buf();
    let docs = load_corpus(&dir)?;
    ctx.note_input(&dir);
    let cfg = ExtractConfig::new(surface.prefix.clone(), ctx.cfg.cli_tag.clone());
    let (examples, report) = mine_documents(&docs, &surface, &cfg);
    let outcome = filter_corpus(&examples, &surface);
    let lookup = build_lookup(&outcome.retained);

    ctx.write_jsonl(MINED_FILE, "mined", &write_examples(&outcome.retained))?;
    ctx.write_json(LOOKUP_FILE, "lookup", serde_json::to_value(&lookup).expect("json"))?;
    ctx.write_json(
        "reports/mining.json",
        "mining-report",
        json!({ "mining": report, "drops": outcome.drops, "retained": outcome.retained.len() }),
    )?;
    Ok(counts([
        ("documents", report.documents),
        ("candidate_lines", report.candidate_lines),
        ("mined", outcome.retained.len()),
        ("lookup_entries", lookup.len()),
    ]))
}

fn labeled_rows(ctx: &mut Context, surface: &CommandSurface) -> Result<Vec<LabeledParam>, CliError> {
    if let Some(path) = ctx.cfg.labeled.clone() {
        let rows = read_labeled_tsv(&path)?;
        ctx.note_input(&path);
        return Ok(rows);
    }
    let rows: Vec<LabeledParam> = surface
        .commands()
        .iter()
        .flat_map(|c| {
            c.parameters.iter().filter_map(move |p| {
                p.labeled_type.map(|label| LabeledParam { context: ParamContext::from_surface(c, p), label })
            })
        })
        .collect();
    log::info!("no labeled file configured; using {} surface labels", rows.len());
    Ok(rows)
}

pub fn train_typer(ctx: &mut Context, cv: bool) -> Result<Counts, CliError> {
    let surface = ctx.surface()?;
    let rows = labeled_rows(ctx, &surface)?;
    let model = train_two_stage(&rows, &ctx.cfg.forest, ctx.cfg.seed)?;
    let value: Value = serde_json::from_str(&model.to_json()).expect("model json");
    ctx.write_json(MODEL_FILE, "model", value)?;
    let mut out = counts([("labeled_rows", rows.len()), ("vocabulary", model.vocabulary.len())]);
    if cv {
        let folds = ctx.cfg.cv_folds;
        let report = cross_validate(&rows, folds, &ctx.cfg.forest, ctx.cfg.seed)?;
        let single = cross_validate_single_stage(&rows, folds, &ctx.cfg.forest, ctx.cfg.seed)?;
        let text = format!("{}\n{}", report.render(), single.render());
        ctx.write("reports/cv.txt", &text)?;
        ctx.write_json("reports/cv.json", "cv-report", json!({ "two_stage": report, "single_stage": single }))?;
        out.insert("cv_folds".into(), folds as u64);
    }
    Ok(out)
}

pub fn fill(ctx: &mut Context) -> Result<Counts, CliError> {
    let surface = ctx.surface()?;
    let templates = read_templates(&ctx.read_artifact(TEMPLATES_FILE)?)?;
    let filled: Vec<FilledExample> = match ctx.cfg.backend {
        Backend::TypedLookup => {
            let model = TypePredictor::from_json(&ctx.read_artifact(MODEL_FILE)?)?;
            let lookup = ValueLookup::from_json(&ctx.read_artifact(LOOKUP_FILE)?)
                .map_err(|e| CliError::Input(format!("{LOOKUP_FILE}: {e}")))?;
            let filler = LookupFiller {
                surface: &surface,
                model: &model,
                lookup: &lookup,
                min_confidence: ctx.cfg.min_confidence,
            };
            generate_all(&filler, &templates)?
        }
        Backend::Cooccurrence => {
            let mined = read_examples(&ctx.read_artifact(MINED_FILE)?)?;
            let model = train_cooccurrence(&mined);
            for t in &templates {
                if surface.lookup_command(&t.command).is_none() {
                    return Err(CliError::Validation(format!("template for unknown command `{}`", t.command)));
                }
            }
            generate_all(&model, &templates)?
        }
    };
    let mut by_provenance: BTreeMap<&str, usize> = BTreeMap::new();
    for a in filled.iter().flat_map(|e| &e.arguments) {
        let key = match a.provenance {
            Provenance::Lookup => "lookup",
            Provenance::Synthesized => "synthesized",
            Provenance::Placeholder => "placeholder",
            Provenance::Flag => "flag",
        };
        *by_provenance.entry(key).or_default() += 1;
    }
    ctx.write_jsonl(FILLED_FILE, "filled", &write_filled(&filled))?;
    ctx.write_json(
        "reports/fill.json",
        "fill-report",
        json!({ "backend": ctx.cfg.backend.to_string(), "examples": filled.len(), "arguments": by_provenance }),
    )?;
    let mut out = counts([("filled", filled.len())]);
    for (k, v) in by_provenance {
        out.insert(format!("arguments_{k}"), v as u64);
    }
    Ok(out)
}

fn generate_all(
    generator: &dyn ValueGenerator,
    templates: &[exforge_core::telemetry::ExampleTemplate],
) -> Result<Vec<FilledExample>, CliError> {
    templates.iter().map(|t| generator.generate(t).map_err(CliError::from)).collect()
}

pub fn datasets(ctx: &mut Context) -> Result<Counts, CliError> {
    let surface = ctx.surface()?;
    let mined = read_examples(&ctx.read_artifact(MINED_FILE)?)?;
    let lines: Vec<Vec<String>> = mined.iter().map(|e| example_tokens(e, &surface.prefix).0).collect();
    let pretrain = pretraining_dataset(&lines, &ctx.cfg.masking, ctx.cfg.seed);
    let (finetune, skipped) = finetune_dataset(&mined, &surface.prefix);
    let cooc = train_cooccurrence(&mined);

    ctx.write_jsonl("datasets/pretrain.jsonl", "pretrain-dataset", &write_dataset(&pretrain))?;
    ctx.write_jsonl("datasets/finetune.jsonl", "finetune-dataset", &write_dataset(&finetune))?;
    let value: Value = serde_json::from_str(&cooc.to_json()).expect("model json");
    ctx.write_json("datasets/cooccurrence.json", "cooccurrence-model", value)?;
    Ok(counts([("pretrain_pairs", pretrain.len()), ("finetune_pairs", finetune.len()), ("finetune_skipped", skipped)]))
}

/// Output file stem for a command: words joined by dashes.
pub fn command_file_stem(command: &str) -> String {
    command.split_whitespace().collect::<Vec<_>>().join("-")
}

pub fn render(ctx: &mut Context) -> Result<Counts, CliError> {
    let surface = ctx.surface()?;
    let filled = read_filled(&ctx.read_artifact(FILLED_FILE)?)?;
    let prefix = surface.prefix.clone();
    let tag = ctx.cfg.cli_tag.clone();

    let mut by_command: BTreeMap<String, Vec<FilledExample>> = BTreeMap::new();
    for e in filled {
        let spec = surface
            .lookup_command(&e.command)
            .ok_or_else(|| CliError::Validation(format!("filled example for unknown command `{}`", e.command)))?;
        by_command.entry(spec.name.clone()).or_default().push(e);
    }

    let mut help_files = 0;
    for (command, examples) in &by_command {
        let spec = surface.lookup_command(command).expect("checked above");
        let text = render_help(spec, examples, &prefix)?;
        ctx.write(&format!("help/{}.txt", command_file_stem(command)), &text)?;
        help_files += 1;
    }

    let mut groups: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for command in by_command.keys() {
        groups.entry(command_group(command).to_string()).or_default().push(command.clone());
    }

    let (mut docs, mut patches) = (0, 0);
    for (group, commands) in &groups {
        let doc_name = format!("{group}.md");
        let existing = match ctx.cfg.docs.clone() {
            Some(dir) if dir.join(&doc_name).is_file() => Some(ctx.read_input(&dir.join(&doc_name))?),
            _ => None,
        };
        let mut human: BTreeMap<String, Vec<HumanExample>> = BTreeMap::new();
        if let Some(text) = &existing {
            for section in parse_doc(text, &prefix) {
                if let Some(spec) = surface.lookup_command(&section.command) {
                    human.entry(spec.name.clone()).or_default().extend(section.human_examples());
                }
            }
        }
        let names: BTreeSet<&String> = commands.iter().chain(human.keys()).collect();
        let mut sections = Vec::new();
        for name in names {
            let spec = surface.lookup_command(name).expect("known command");
            let machine = by_command.get(name).map(Vec::as_slice).unwrap_or(&[]);
            let h = human.get(name).map(Vec::as_slice).unwrap_or(&[]);
            sections.push(render_markdown(spec, machine, h, &prefix, &tag)?);
        }
        let doc = format!(
            "<!-- generated by exforge {TOOL_VERSION}, seed {} -->\n{}",
            ctx.cfg.seed,
            render_group_doc(group, &sections, &prefix)
        );
        ctx.write(&format!("docs/{doc_name}"), &doc)?;
        docs += 1;

        let Some(original) = existing else { continue };
        let mut updated = original.clone();
        for command in commands {
            let spec = surface.lookup_command(command).expect("known command");
            let fragment = render_fragment(spec, &by_command[command], &prefix, &tag)?;
            if !updated.contains(&fragment) {
                updated = insert_fragment(&updated, &fragment, &prefix, command)?;
            }
        }
        if updated == original {
            continue;
        }
        let diff = unified_diff(&original, &updated, &doc_name);
        if apply_patch(&original, &diff)? != updated {
            return Err(CliError::Validation(format!("patch for {doc_name} does not reproduce the update")));
        }
        let text = format!("# exforge {TOOL_VERSION} examples patch for {doc_name}, seed {}\n{diff}", ctx.cfg.seed);
        ctx.write(&format!("patches/{group}.patch"), &text)?;
        patches += 1;
    }
    Ok(counts([("help_files", help_files), ("docs", docs), ("patches", patches)]))
}

/// Human-written examples in every markdown file of the docs directory.
fn human_example_params(ctx: &mut Context, surface: &CommandSurface) -> Result<Vec<ExampleParams>, CliError> {
    let Some(dir) = ctx.cfg.docs.clone() else {
        return Ok(Vec::new());
    };
    let mut files = Vec::new();
    collect_files(&dir, &mut files);
    let mut out = Vec::new();
    for f in files.into_iter().filter(|f| f.extension().is_some_and(|e| e == "md")) {
        let text = ctx.read_input(&f)?;
        for section in parse_doc(&text, &surface.prefix) {
            for ex in section.examples.iter().filter(|e| !e.autogenerated) {
                for line in &ex.lines {
                    if let Ok(m) = parse_invocation(line, surface) {
                        out.push(ExampleParams::from(&m));
                    }
                }
            }
        }
    }
    Ok(out)
}

fn render_help_success(r: &HelpSuccessReport) -> String {
    let mut out = format!(
        "{:<16}{:>10}{:>10}{:>10}{:>10}{:>12}\n",
        "Group", "Human", "Machine", "Human n", "Machine n", "p-value"
    );
    for s in &r.stats {
        out.push_str(&format!(
            "{:<16}{:>10.3}{:>10.3}{:>10}{:>10}{:>12.4}\n",
            s.group, s.human_rate, s.machine_rate, s.human_n, s.machine_n, s.p_value
        ));
    }
    if !r.omitted_groups.is_empty() {
        out.push_str(&format!("Omitted (no matching examples): {}\n", r.omitted_groups.join(", ")));
    }
    out
}

/// Mean ROUGE F1 of each generated example against the best-matching mined
/// example with the same command and parameter set.
fn rouge_summary(filled: &[FilledExample], mined: &[MinedExample], prefix: &str) -> Value {
    let mut refs: BTreeMap<ExampleParams, Vec<&str>> = BTreeMap::new();
    for m in mined {
        refs.entry(ExampleParams::from(m)).or_default().push(m.line.as_str());
    }
    let (mut n, mut r1, mut r2, mut rl) = (0usize, 0.0, 0.0, 0.0);
    for e in filled {
        let Some(candidates) = refs.get(&ExampleParams::from(e)) else { continue };
        let rendered = e.render(prefix);
        let best = candidates
            .iter()
            .map(|r| rouge_text(&rendered, r))
            .max_by(|a, b| a.rl.f1.total_cmp(&b.rl.f1))
            .expect("non-empty");
        n += 1;
        r1 += best.r1.f1;
        r2 += best.r2.f1;
        rl += best.rl.f1;
    }
    let mean = |x: f64| if n == 0 { 0.0 } else { x / n as f64 };
    json!({ "matched": n, "rouge1_f1": mean(r1), "rouge2_f1": mean(r2), "rougeL_f1": mean(rl) })
}

pub fn evaluate(ctx: &mut Context) -> Result<Counts, CliError> {
    let surface = ctx.surface()?;
    let path = ctx.cfg.require("telemetry", &ctx.cfg.telemetry)?.to_path_buf();
    let open = |p: &Path| fs::File::open(p).map(BufReader::new).map_err(|e| input_err(p, e));
    let version = ctx.cfg.current_version.clone().unwrap_or_else(|| surface.version.clone());
    let mut report = ingest(open(&path)?, &version)?;
    let mut all = read_records(open(&path)?)?.records;
    canonicalize(&mut report.records, &surface);
    canonicalize(&mut all, &surface);
    ctx.note_input(&path);
    let aggs = aggregate(&report.records);

    let filled = read_filled(&ctx.read_artifact(FILLED_FILE)?)?;
    let machine: Vec<ExampleParams> = filled.iter().map(ExampleParams::from).collect();
    let human = human_example_params(ctx, &surface)?;

    let cov = coverage(&surface, &aggs, &human, &machine);
    ctx.write("reports/coverage.txt", &cov.render())?;
    ctx.write_json("reports/coverage.json", "coverage-report", serde_json::to_value(&cov).expect("json"))?;

    let gap = chrono::Duration::minutes(ctx.cfg.session_gap_minutes);
    let sessions = sessionize(&all, gap);
    let hs = help_success(&sessions, &machine, &human, |c| command_group(c).to_string());
    ctx.write("reports/help_success.txt", &render_help_success(&hs))?;
    ctx.write_json("reports/help_success.json", "help-success-report", serde_json::to_value(&hs).expect("json"))?;
    ctx.write("reports/help_success.csv", &help_success_csv(&hs.stats))?;

    let mut out = counts([
        ("commands_considered", cov.commands_considered),
        ("sessions", sessions.len()),
        ("help_groups", hs.stats.len()),
    ]);
    if let Ok(text) = ctx.read_artifact(MINED_FILE) {
        let mined = read_examples(&text)?;
        let summary = rouge_summary(&filled, &mined, &surface.prefix);
        out.insert("rouge_matched".into(), summary["matched"].as_u64().unwrap_or(0));
        ctx.write_json("reports/rouge.json", "rouge-report", summary)?;
    }
    Ok(out)
}

/// templates, mine, train-typer, fill and render in order, then the manifest.
pub fn pipeline(ctx: &mut Context) -> Result<BTreeMap<String, Counts>, CliError> {
    let mut stages = BTreeMap::new();
    stages.insert("templates".to_string(), templates(ctx)?);
    stages.insert("mine".to_string(), mine(ctx)?);
    stages.insert("train-typer".to_string(), train_typer(ctx, false)?);
    stages.insert("fill".to_string(), fill(ctx)?);
    stages.insert("render".to_string(), render(ctx)?);
    write_manifest(ctx, &stages)?;
    Ok(stages)
}

fn write_manifest(ctx: &mut Context, stages: &BTreeMap<String, Counts>) -> Result<(), CliError> {
    let mut inputs = Vec::new();
    for (shown, path) in &ctx.inputs {
        let (sha, bytes) = sha256_file(path)?;
        inputs.push(json!({ "path": shown, "sha256": sha, "bytes": bytes }));
    }
    let mut outputs = Vec::new();
    for name in &ctx.written {
        let (sha, bytes) = sha256_file(&ctx.cfg.output.join(name))?;
        outputs.push(json!({ "path": name, "sha256": sha, "bytes": bytes }));
    }
    let mut config = serde_json::to_value(&ctx.cfg).expect("config json");
    if let Value::Object(m) = &mut config {
        // The output location is where the tree lives, not part of its content.
        m.remove("output");
        for key in ["surface", "telemetry", "corpus", "docs", "labeled"] {
            if let Some(Value::String(s)) = m.get(key) {
                let shown = ctx.display(Path::new(s));
                m.insert(key.into(), Value::String(shown));
            }
        }
    }
    let manifest = json!({
        "started_at": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        "versions": { "exforge": TOOL_VERSION, "model_format": MODEL_FORMAT_VERSION },
        "config": config,
        "inputs": inputs,
        "outputs": outputs,
        "counts": stages,
    });
    ctx.write_json(MANIFEST_FILE, "manifest", manifest)
}
