//! Success telemetry: ingestion, unique-user aggregation and template ranking.
//!
//! Telemetry carries parameter *names* only. Any record that looks like it
//! carries values is rejected at the boundary and tallied separately.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::BufRead;

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::surface::{normalize_command, strip_dashes, CommandSurface};

#[derive(Debug, thiserror::Error)]
pub enum TelemetryError {
    #[error("cannot read telemetry: {0}")]
    Io(#[from] std::io::Error),
    #[error("k must be at least 1")]
    InvalidK,
    #[error("malformed template record on line {line}: {message}")]
    Template { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TelemetryRecord {
    pub timestamp: DateTime<Utc>,
    pub user_id: String,
    pub command: String,
    pub parameters: BTreeSet<String>,
    pub success: bool,
    pub version: String,
    pub is_help: bool,
}

const RECORD_FIELDS: [&str; 7] = ["timestamp", "user_id", "command", "parameters", "success", "version", "is_help"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineRejection {
    Malformed,
    PrivacyViolation,
}

/// Parses one telemetry line. Extra fields are malformed unless they look
/// value-bearing, in which case the record is a privacy violation.
pub fn parse_record(line: &str) -> Result<TelemetryRecord, LineRejection> {
    let value: Value = serde_json::from_str(line).map_err(|_| LineRejection::Malformed)?;
    let Value::Object(map) = &value else {
        return Err(LineRejection::Malformed);
    };
    let mut unknown = false;
    for key in map.keys() {
        if RECORD_FIELDS.contains(&key.as_str()) {
            continue;
        }
        let lower = key.to_ascii_lowercase();
        if lower.contains("value") || lower.contains("arg") {
            return Err(LineRejection::PrivacyViolation);
        }
        unknown = true;
    }
    match map.get("parameters") {
        Some(Value::Object(_)) => return Err(LineRejection::PrivacyViolation),
        Some(Value::Array(items)) => {
            for item in items {
                match item {
                    Value::String(s) if s.contains('=') => return Err(LineRejection::PrivacyViolation),
                    Value::String(_) => {}
                    _ => return Err(LineRejection::PrivacyViolation),
                }
            }
        }
        _ => return Err(LineRejection::Malformed),
    }
    if unknown {
        return Err(LineRejection::Malformed);
    }
    let mut record: TelemetryRecord = serde_json::from_value(value).map_err(|_| LineRejection::Malformed)?;
    if record.user_id.trim().is_empty() {
        return Err(LineRejection::Malformed);
    }
    record.command = normalize_command(&record.command);
    if record.command.is_empty() {
        return Err(LineRejection::Malformed);
    }
    record.parameters = record.parameters.iter().map(|p| strip_dashes(p).to_string()).collect();
    Ok(record)
}

/// Every well-formed record in a stream, help calls and failures included.
#[derive(Debug, Clone, Default)]
pub struct ParsedTelemetry {
    pub records: Vec<TelemetryRecord>,
    pub malformed: usize,
    pub privacy_violations: usize,
}

pub fn read_records(reader: impl BufRead) -> Result<ParsedTelemetry, TelemetryError> {
    let mut out = ParsedTelemetry::default();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_record(&line) {
            Ok(r) => out.records.push(r),
            Err(LineRejection::Malformed) => out.malformed += 1,
            Err(LineRejection::PrivacyViolation) => out.privacy_violations += 1,
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    #[serde(skip)]
    pub records: Vec<TelemetryRecord>,
    pub retained: usize,
    pub malformed: usize,
    pub privacy_violations: usize,
    pub dropped_failed: usize,
    pub dropped_help: usize,
    pub dropped_old_version: usize,
}

/// Keeps successful, non-help records of the current version.
pub fn ingest(reader: impl BufRead, current_version: &str) -> Result<IngestReport, TelemetryError> {
    let parsed = read_records(reader)?;
    let mut report = IngestReport {
        malformed: parsed.malformed,
        privacy_violations: parsed.privacy_violations,
        ..IngestReport::default()
    };
    for record in parsed.records {
        if record.is_help {
            report.dropped_help += 1;
        } else if record.version != current_version {
            report.dropped_old_version += 1;
        } else if !record.success {
            report.dropped_failed += 1;
        } else {
            report.records.push(record);
        }
    }
    report.retained = report.records.len();
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageAggregate {
    pub command: String,
    pub parameter_set: Vec<String>,
    pub unique_users: usize,
    pub total_calls: usize,
}

type UsageKey = (String, Vec<String>);

/// Mergeable partial aggregation. `merge` is associative and commutative, so
/// shards can be combined in any order.
#[derive(Debug, Clone, Default)]
pub struct UsageTable {
    cells: HashMap<UsageKey, (HashSet<String>, usize)>,
}

impl UsageTable {
    pub fn add(&mut self, record: &TelemetryRecord) {
        let key = (record.command.clone(), record.parameters.iter().cloned().collect::<Vec<_>>());
        let cell = self.cells.entry(key).or_default();
        cell.0.insert(record.user_id.clone());
        cell.1 += 1;
    }

    pub fn merge(mut self, other: UsageTable) -> UsageTable {
        if self.cells.len() < other.cells.len() {
            return other.merge(self);
        }
        for (key, (users, calls)) in other.cells {
            let cell = self.cells.entry(key).or_default();
            cell.0.extend(users);
            cell.1 += calls;
        }
        self
    }

    /// Aggregates sorted by command, then parameter set.
    pub fn into_aggregates(self) -> Vec<UsageAggregate> {
        let mut out: Vec<UsageAggregate> = self
            .cells
            .into_iter()
            .map(|((command, parameter_set), (users, calls))| UsageAggregate {
                command,
                parameter_set,
                unique_users: users.len(),
                total_calls: calls,
            })
            .collect();
        out.sort_by(|a, b| (&a.command, &a.parameter_set).cmp(&(&b.command, &b.parameter_set)));
        out
    }
}

/// Rewrites aliases to canonical parameter names, and command names to
/// their surface spelling, for records of commands the surface knows.
/// Unknown names are left alone so template building can exclude them.
pub fn canonicalize(records: &mut [TelemetryRecord], surface: &CommandSurface) {
    for r in records.iter_mut() {
        let Some(spec) = surface.lookup_command(&r.command) else {
            continue;
        };
        r.command = spec.name.clone();
        r.parameters = r.parameters.iter().map(|p| spec.canonical_parameter(p).unwrap_or(p).to_string()).collect();
    }
}

pub fn aggregate(records: &[TelemetryRecord]) -> Vec<UsageAggregate> {
    records
        .par_chunks(4096)
        .map(|chunk| {
            let mut table = UsageTable::default();
            chunk.iter().for_each(|r| table.add(r));
            table
        })
        .reduce(UsageTable::default, UsageTable::merge)
        .into_aggregates()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateParam {
    pub name: String,
    pub placeholder: String,
}

impl TemplateParam {
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        let placeholder = placeholder(&name);
        TemplateParam { name, placeholder }
    }
}

pub fn placeholder(name: &str) -> String {
    format!("<{name}>")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExampleTemplate {
    pub command: String,
    pub parameters: Vec<TemplateParam>,
    pub rank: usize,
    pub support_users: usize,
}

impl ExampleTemplate {
    pub fn render(&self, prefix: &str) -> String {
        let mut line = format!("{prefix} {}", self.command);
        for p in &self.parameters {
            line.push_str(" --");
            line.push_str(&p.name);
            line.push(' ');
            line.push_str(&p.placeholder);
        }
        line
    }

    pub fn parameter_names(&self) -> impl Iterator<Item = &str> {
        self.parameters.iter().map(|p| p.name.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExclusionReason {
    UnknownCommand,
    UnknownParameter(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExcludedAggregate {
    pub command: String,
    pub parameter_set: Vec<String>,
    pub reason: ExclusionReason,
}

#[derive(Debug, Clone, Default)]
pub struct TemplateBuild {
    pub templates: Vec<ExampleTemplate>,
    pub excluded: Vec<ExcludedAggregate>,
}

/// Total order used to rank parameter sets within a command.
pub fn rank_order(a: &UsageAggregate, b: &UsageAggregate) -> std::cmp::Ordering {
    b.unique_users
        .cmp(&a.unique_users)
        .then(b.total_calls.cmp(&a.total_calls))
        .then_with(|| a.parameter_set.cmp(&b.parameter_set))
}

/// Top-`k` parameter sets per command, ranked by unique users. Commands are
/// emitted in lexicographic order.
pub fn build_templates(
    aggregates: &[UsageAggregate],
    surface: &CommandSurface,
    k: usize,
) -> Result<TemplateBuild, TelemetryError> {
    if k == 0 {
        return Err(TelemetryError::InvalidK);
    }
    let mut build = TemplateBuild::default();
    let mut by_command: BTreeMap<&str, Vec<&UsageAggregate>> = BTreeMap::new();
    for agg in aggregates {
        let Some(spec) = surface.lookup_command(&agg.command) else {
            build.excluded.push(ExcludedAggregate {
                command: agg.command.clone(),
                parameter_set: agg.parameter_set.clone(),
                reason: ExclusionReason::UnknownCommand,
            });
            continue;
        };
        if let Some(bad) = agg.parameter_set.iter().find(|p| spec.parameter(p).is_none()) {
            build.excluded.push(ExcludedAggregate {
                command: agg.command.clone(),
                parameter_set: agg.parameter_set.clone(),
                reason: ExclusionReason::UnknownParameter(bad.clone()),
            });
            continue;
        }
        by_command.entry(spec.name.as_str()).or_default().push(agg);
    }

    for (command, mut aggs) in by_command {
        let spec = surface.lookup_command(command).expect("grouped by known command");
        aggs.sort_by(|a, b| rank_order(a, b));
        for (i, agg) in aggs.into_iter().take(k).enumerate() {
            build.templates.push(ExampleTemplate {
                command: command.to_string(),
                parameters: order_parameters(spec, &agg.parameter_set).into_iter().map(TemplateParam::new).collect(),
                rank: i + 1,
                support_users: agg.unique_users,
            });
        }
    }
    Ok(build)
}

/// Required parameters first in declaration order, then the rest alphabetically.
fn order_parameters(spec: &crate::surface::CommandSpec, set: &[String]) -> Vec<String> {
    let canonical: BTreeSet<&str> = set.iter().filter_map(|p| spec.canonical_parameter(p)).collect();
    let mut ordered: Vec<String> = spec
        .parameters
        .iter()
        .filter(|p| p.required && canonical.contains(p.name.as_str()))
        .map(|p| p.name.clone())
        .collect();
    let required: BTreeSet<String> = ordered.iter().cloned().collect();
    ordered.extend(canonical.into_iter().filter(|p| !required.contains(*p)).map(str::to_string));
    ordered
}

/// One line of the template output file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateRecord {
    pub command: String,
    pub rank: usize,
    pub support_users: usize,
    pub parameters: Vec<String>,
    pub rendered: String,
}

impl TemplateRecord {
    pub fn from_template(t: &ExampleTemplate, prefix: &str) -> Self {
        TemplateRecord {
            command: t.command.clone(),
            rank: t.rank,
            support_users: t.support_users,
            parameters: t.parameter_names().map(str::to_string).collect(),
            rendered: t.render(prefix),
        }
    }

    pub fn into_template(self) -> ExampleTemplate {
        ExampleTemplate {
            command: self.command,
            parameters: self.parameters.into_iter().map(TemplateParam::new).collect(),
            rank: self.rank,
            support_users: self.support_users,
        }
    }
}

pub fn write_templates(templates: &[ExampleTemplate], prefix: &str) -> String {
    let mut out = String::new();
    for t in templates {
        out.push_str(&serde_json::to_string(&TemplateRecord::from_template(t, prefix)).expect("serializes"));
        out.push('\n');
    }
    out
}

/// Reads a template file. Lines that are not template records (such as a
/// leading header object) are skipped only if they lack a `command` field.
pub fn read_templates(text: &str) -> Result<Vec<ExampleTemplate>, TelemetryError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: Value =
            serde_json::from_str(line).map_err(|e| TelemetryError::Template { line: i + 1, message: e.to_string() })?;
        if value.get("command").is_none() {
            continue;
        }
        let record: TemplateRecord = serde_json::from_value(value)
            .map_err(|e| TelemetryError::Template { line: i + 1, message: e.to_string() })?;
        out.push(record.into_template());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{CommandSpec, ParameterSpec};

    fn rec(user: &str, command: &str, params: &[&str]) -> TelemetryRecord {
        TelemetryRecord {
            timestamp: "2021-03-01T10:00:00Z".parse().unwrap(),
            user_id: user.into(),
            command: command.into(),
            parameters: params.iter().map(|s| s.to_string()).collect(),
            success: true,
            version: "2.20.0".into(),
            is_help: false,
        }
    }

    fn line(r: &TelemetryRecord) -> String {
        serde_json::to_string(r).unwrap()
    }

    fn param(name: &str, required: bool) -> ParameterSpec {
        ParameterSpec { name: name.into(), aliases: vec![], description: String::new(), required, labeled_type: None }
    }

    fn vm_surface() -> CommandSurface {
        let vm = CommandSpec::new(
            "vm",
            "vm create",
            "Create an Azure Virtual Machine.",
            vec![
                param("image", true),
                param("admin-username", false),
                param("name", true),
                param("ssh-key-value", false),
                param("resource-group", true),
                param("location", false),
            ],
        );
        let other = CommandSpec::new(
            "a",
            "a b",
            "",
            vec![param("w", false), param("x", false), param("y", false), param("z", false)],
        );
        CommandSurface::new("az", "2.20.0", vec![vm, other]).unwrap()
    }

    #[test]
    fn aliases_merge_into_one_aggregate() {
        let mut spec_params = vec![param("name", true), param("resource-group", true)];
        spec_params[0].aliases = vec!["n".into()];
        spec_params[1].aliases = vec!["g".into()];
        let surface = CommandSurface::new("az", "1", vec![CommandSpec::new("vm", "vm show", "", spec_params)]).unwrap();
        let mut records = vec![
            rec("a", "vm show", &["n", "resource-group"]),
            rec("b", "vm show", &["name", "g"]),
            rec("c", "vm show", &["name", "bogus"]),
        ];
        canonicalize(&mut records, &surface);
        let aggs = aggregate(&records);
        assert_eq!(aggs.len(), 2);
        assert_eq!(aggs[1].parameter_set, vec!["name", "resource-group"]);
        assert_eq!(aggs[1].unique_users, 2);
        assert_eq!(aggs[0].parameter_set, vec!["bogus", "name"]);
    }

    #[test]
    fn ingest_keeps_only_successful_current_non_help() {
        let mut lines = Vec::new();
        for i in 0..4 {
            lines.push(line(&rec(&format!("u{i}"), "vm create", &["name"])));
        }
        let mut help = rec("u9", "vm create", &[]);
        help.is_help = true;
        lines.push(line(&help));
        let mut old = rec("u8", "vm create", &["name"]);
        old.version = "2.19.0".into();
        lines.push(line(&old));
        let report = ingest(lines.join("\n").as_bytes(), "2.20.0").unwrap();
        assert_eq!(report.records.len(), 4);
        assert_eq!(report.dropped_help, 1);
        assert_eq!(report.dropped_old_version, 1);
        assert_eq!(report.malformed, 0);
    }

    #[test]
    fn empty_stream_yields_nothing() {
        let report = ingest(&b""[..], "1").unwrap();
        assert!(report.records.is_empty());
        assert_eq!(report.malformed, 0);
    }

    #[test]
    fn value_bearing_record_is_a_privacy_violation() {
        let r = rec("u1", "vm create", &["name"]);
        let mut v = serde_json::to_value(&r).unwrap();
        v["parameter_values"] = serde_json::json!({"name": "MyVM"});
        let report = ingest(v.to_string().as_bytes(), "2.20.0").unwrap();
        assert!(report.records.is_empty());
        assert_eq!(report.privacy_violations, 1);
        assert_eq!(report.malformed, 0);

        let mut v = serde_json::to_value(&r).unwrap();
        v["parameters"] = serde_json::json!(["name=MyVM"]);
        assert_eq!(parse_record(&v.to_string()), Err(LineRejection::PrivacyViolation));
    }

    #[test]
    fn garbage_lines_are_malformed() {
        let text = "not json\n{\"command\":\"x\"}\n[1,2]\n";
        let report = ingest(text.as_bytes(), "1").unwrap();
        assert_eq!(report.malformed, 3);
        let r = rec("u1", "vm create", &["name"]);
        let mut v = serde_json::to_value(&r).unwrap();
        v["extra"] = serde_json::json!(1);
        assert_eq!(parse_record(&v.to_string()), Err(LineRejection::Malformed));
        v = serde_json::to_value(&r).unwrap();
        v["user_id"] = serde_json::json!("");
        assert_eq!(parse_record(&v.to_string()), Err(LineRejection::Malformed));
    }

    #[test]
    fn aggregate_counts_distinct_users() {
        let records = vec![
            rec("u1", "A", &["x", "y"]),
            rec("u1", "A", &["y", "x"]),
            rec("u2", "A", &["x", "y"]),
            rec("u3", "B", &["x", "y"]),
        ];
        let aggs = aggregate(&records);
        assert_eq!(aggs.len(), 2);
        assert_eq!(aggs[0].command, "A");
        assert_eq!(aggs[0].parameter_set, vec!["x", "y"]);
        assert_eq!((aggs[0].unique_users, aggs[0].total_calls), (2, 3));
        assert_eq!((aggs[1].unique_users, aggs[1].total_calls), (1, 1));
    }

    #[test]
    fn merge_is_commutative_and_associative() {
        let shard = |rs: &[TelemetryRecord]| {
            let mut t = UsageTable::default();
            rs.iter().for_each(|r| t.add(r));
            t
        };
        let a = [rec("u1", "A", &["x"]), rec("u2", "A", &["x"])];
        let b = [rec("u1", "A", &["x"]), rec("u3", "B", &[])];
        let c = [rec("u4", "A", &["x"]), rec("u3", "B", &[])];
        let left = shard(&a).merge(shard(&b)).merge(shard(&c)).into_aggregates();
        let right = shard(&c).merge(shard(&b).merge(shard(&a))).into_aggregates();
        assert_eq!(left, right);
        assert_eq!(left[0].unique_users, 3);
        assert_eq!(left[0].total_calls, 4);
    }

    #[test]
    fn top_three_of_four_sets() {
        let s = vm_surface();
        let aggs: Vec<UsageAggregate> = [(vec!["w"], 1), (vec!["x"], 5), (vec!["y"], 3), (vec!["z"], 2)]
            .into_iter()
            .map(|(set, users)| UsageAggregate {
                command: "a b".into(),
                parameter_set: set.into_iter().map(String::from).collect(),
                unique_users: users,
                total_calls: users,
            })
            .collect();
        let build = build_templates(&aggs, &s, 3).unwrap();
        let got: Vec<(usize, usize)> = build.templates.iter().map(|t| (t.rank, t.support_users)).collect();
        assert_eq!(got, vec![(1, 5), (2, 3), (3, 2)]);
    }

    #[test]
    fn ties_break_on_calls_then_lexicographic_set() {
        let s = vm_surface();
        let mk = |set: &[&str], users, calls| UsageAggregate {
            command: "a b".into(),
            parameter_set: set.iter().map(|s| s.to_string()).collect(),
            unique_users: users,
            total_calls: calls,
        };
        let aggs = vec![mk(&["z"], 2, 2), mk(&["y"], 2, 2), mk(&["x"], 2, 3)];
        let names: Vec<String> =
            build_templates(&aggs, &s, 3).unwrap().templates.iter().map(|t| t.parameters[0].name.clone()).collect();
        assert_eq!(names, vec!["x", "y", "z"]);
    }

    #[test]
    fn fig1_parameter_set_renders_with_placeholders() {
        let s = vm_surface();
        let agg = UsageAggregate {
            command: "vm create".into(),
            parameter_set: ["admin-username", "image", "location", "name", "resource-group", "ssh-key-value"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            unique_users: 10,
            total_calls: 12,
        };
        let build = build_templates(&[agg], &s, 3).unwrap();
        assert_eq!(build.templates.len(), 1);
        assert_eq!(build.templates[0].rank, 1);
        assert_eq!(
            build.templates[0].render("az"),
            "az vm create --image <image> --name <name> --resource-group <resource-group> \
             --admin-username <admin-username> --location <location> --ssh-key-value <ssh-key-value>"
        );
    }

    #[test]
    fn unknown_command_excluded_and_k_zero_rejected() {
        let s = vm_surface();
        let agg = UsageAggregate { command: "nope".into(), parameter_set: vec![], unique_users: 1, total_calls: 1 };
        let build = build_templates(&[agg.clone()], &s, 3).unwrap();
        assert!(build.templates.is_empty());
        assert_eq!(build.excluded[0].reason, ExclusionReason::UnknownCommand);
        assert!(matches!(build_templates(&[agg], &s, 0), Err(TelemetryError::InvalidK)));
    }

    #[test]
    fn template_file_round_trips() {
        let t = ExampleTemplate {
            command: "a b".into(),
            parameters: vec![TemplateParam::new("x")],
            rank: 1,
            support_users: 4,
        };
        let text = format!("{{\"header\":{{\"seed\":1}}}}\n{}", write_templates(&[t.clone()], "az"));
        assert_eq!(read_templates(&text).unwrap(), vec![t]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn records() -> impl Strategy<Value = Vec<TelemetryRecord>> {
            prop::collection::vec((0..6usize, 0..3usize, prop::collection::btree_set(0..4usize, 0..4)), 0..200)
                .prop_map(|rows| {
                    rows.into_iter()
                        .map(|(u, c, ps)| {
                            let names: Vec<String> =
                                ps.into_iter().map(|p| ["w", "x", "y", "z"][p].to_string()).collect();
                            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
                            rec(&format!("u{u}"), ["a b", "vm create", "a c"][c], &refs)
                        })
                        .collect()
                })
        }

        proptest! {
            #[test]
            fn aggregation_is_permutation_invariant(rs in records(), seed in any::<u64>()) {
                use rand::seq::SliceRandom;
                use rand::SeedableRng;
                let mut shuffled = rs.clone();
                shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
                prop_assert_eq!(aggregate(&rs), aggregate(&shuffled));
            }

            #[test]
            fn ranks_are_dense_and_support_non_increasing(rs in records(), k in 1..5usize) {
                let s = vm_surface();
                let build = build_templates(&aggregate(&rs), &s, k).unwrap();
                let mut by_cmd: BTreeMap<String, Vec<&ExampleTemplate>> = BTreeMap::new();
                for t in &build.templates {
                    by_cmd.entry(t.command.clone()).or_default().push(t);
                    for p in &t.parameters {
                        prop_assert_eq!(&p.placeholder, &format!("<{}>", p.name));
                    }
                }
                for ts in by_cmd.values() {
                    prop_assert!(ts.len() <= k);
                    for (i, t) in ts.iter().enumerate() {
                        prop_assert_eq!(t.rank, i + 1);
                        if i > 0 {
                            prop_assert!(ts[i - 1].support_users >= t.support_users);
                        }
                    }
                }
            }
        }
    }
}
