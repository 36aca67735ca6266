use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::filler::{FillError, FilledArgument, FilledExample, Provenance, ValueGenerator};
use crate::miner::MinedExample;
use crate::telemetry::ExampleTemplate;

type Counts = BTreeMap<String, usize>;

/// Value tables for one command.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandTables {
    /// parameter -> space-joined sorted names of the other parameters -> value counts
    pub by_names: BTreeMap<String, BTreeMap<String, Counts>>,
    /// parameter -> value counts
    pub by_parameter: BTreeMap<String, Counts>,
    /// parameter -> other parameter -> other value -> value counts
    pub by_pair: BTreeMap<String, BTreeMap<String, BTreeMap<String, Counts>>>,
}

/// Frequency tables for context-aware value generation.
///
/// Back-off order for a parameter: values seen together with an already
/// chosen value of another parameter, then values seen with exactly the
/// same set of parameter names, then any value seen for the parameter on
/// the command, then any value for the parameter name on a known command.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CooccurrenceModel {
    pub commands: BTreeMap<String, CommandTables>,
    pub global: BTreeMap<String, Counts>,
}

/// Which back-off level produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Level {
    Pair,
    Names,
    Parameter,
    Global,
}

fn names_key<'a>(names: impl IntoIterator<Item = &'a str>, skip: &str) -> String {
    let set: BTreeSet<&str> = names.into_iter().filter(|n| *n != skip).collect();
    set.into_iter().collect::<Vec<_>>().join(" ")
}

fn bump(counts: &mut Counts, value: &str) {
    *counts.entry(value.to_string()).or_default() += 1;
}

/// Highest count, ties to the smaller value.
fn best(counts: &Counts) -> Option<&str> {
    counts.iter().max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0))).map(|(v, _)| v.as_str())
}

pub fn train_cooccurrence(corpus: &[MinedExample]) -> CooccurrenceModel {
    let mut m = CooccurrenceModel::default();
    for ex in corpus {
        let names: Vec<&str> = ex.named_arguments().map(|a| a.name.as_str()).collect();
        let valued: Vec<(&str, &str)> =
            ex.named_arguments().filter_map(|a| a.value.as_deref().map(|v| (a.name.as_str(), v))).collect();
        let tables = m.commands.entry(ex.command.clone()).or_default();
        for &(p, v) in &valued {
            let key = names_key(names.iter().copied(), p);
            bump(tables.by_names.entry(p.to_string()).or_default().entry(key).or_default(), v);
            bump(tables.by_parameter.entry(p.to_string()).or_default(), v);
            for &(o, ov) in &valued {
                if o != p {
                    bump(
                        tables
                            .by_pair
                            .entry(p.to_string())
                            .or_default()
                            .entry(o.to_string())
                            .or_default()
                            .entry(ov.to_string())
                            .or_default(),
                        v,
                    );
                }
            }
            bump(m.global.entry(p.to_string()).or_default(), v);
        }
    }
    m
}

impl CooccurrenceModel {
    pub fn is_empty(&self) -> bool {
        self.commands.is_empty()
    }

    /// Most likely value of `parameter` given the template's parameter names
    /// and the values fixed so far.
    pub fn predict(
        &self,
        command: &str,
        parameter: &str,
        names: &[&str],
        known: &[(String, String)],
    ) -> Option<(String, Level)> {
        let tables = self.commands.get(command)?;
        if let Some(pairs) = tables.by_pair.get(parameter) {
            let mut score = Counts::new();
            for (o, ov) in known {
                if o == parameter || !names.contains(&o.as_str()) {
                    continue;
                }
                if let Some(counts) = pairs.get(o).and_then(|m| m.get(ov)) {
                    for (v, c) in counts {
                        *score.entry(v.clone()).or_default() += c;
                    }
                }
            }
            if let Some(v) = best(&score) {
                return Some((v.to_string(), Level::Pair));
            }
        }
        let key = names_key(names.iter().copied(), parameter);
        if let Some(v) = tables.by_names.get(parameter).and_then(|m| m.get(&key)).and_then(best) {
            return Some((v.to_string(), Level::Names));
        }
        if let Some(v) = tables.by_parameter.get(parameter).and_then(best) {
            return Some((v.to_string(), Level::Parameter));
        }
        self.global.get(parameter).and_then(best).map(|v| (v.to_string(), Level::Global))
    }

    /// Fills a template, treating `known` values as fixed and decoding the
    /// remaining parameters in template order, each conditioned on the
    /// values chosen before it.
    pub fn generate_values_given(&self, tmpl: &ExampleTemplate, known: &[(String, String)]) -> FilledExample {
        let names: Vec<&str> = tmpl.parameter_names().collect();
        let mut fixed: Vec<(String, String)> = known.to_vec();
        let arguments = tmpl
            .parameters
            .iter()
            .map(|p| {
                if let Some((_, v)) = known.iter().find(|(n, _)| *n == p.name) {
                    return FilledArgument {
                        value: v.clone(),
                        provenance: Provenance::Lookup,
                        confidence: 1.0,
                        ..FilledArgument::placeholder(&p.name)
                    };
                }
                match self.predict(&tmpl.command, &p.name, &names, &fixed) {
                    Some((v, _)) if !v.is_empty() => {
                        fixed.push((p.name.clone(), v.clone()));
                        FilledArgument {
                            value: v,
                            provenance: Provenance::Lookup,
                            confidence: 1.0,
                            ..FilledArgument::placeholder(&p.name)
                        }
                    }
                    _ => FilledArgument::placeholder(&p.name),
                }
            })
            .collect();
        FilledExample { command: tmpl.command.clone(), arguments, rank: tmpl.rank }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

pub fn generate_values(m: &CooccurrenceModel, tmpl: &ExampleTemplate) -> FilledExample {
    m.generate_values_given(tmpl, &[])
}

impl ValueGenerator for CooccurrenceModel {
    fn generate(&self, tmpl: &ExampleTemplate) -> Result<FilledExample, FillError> {
        Ok(generate_values(self, tmpl))
    }
}
