use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::MinedExample;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueCount {
    pub value: String,
    pub count: usize,
}

/// Observed values per (command, parameter) plus a global fallback keyed by
/// parameter name. Every list is sorted by descending count, then value.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueLookup {
    pub entries: BTreeMap<String, BTreeMap<String, Vec<ValueCount>>>,
    pub global: BTreeMap<String, Vec<ValueCount>>,
    /// Per command, parameters seen as bare switches.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub flags: BTreeMap<String, BTreeSet<String>>,
    /// Parameters seen bare under any command.
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub global_flags: BTreeSet<String>,
}

impl ValueLookup {
    pub fn candidates(&self, command: &str, parameter: &str) -> &[ValueCount] {
        self.entries.get(command).and_then(|m| m.get(parameter)).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn global_candidates(&self, parameter: &str) -> &[ValueCount] {
        self.global.get(parameter).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty() && self.flags.is_empty()
    }

    /// Whether the corpus shows `parameter` as a bare switch, for this
    /// command or any other. Valued uses do not cancel this; callers try
    /// values first.
    pub fn is_flag(&self, command: &str, parameter: &str) -> bool {
        self.flags.get(command).is_some_and(|f| f.contains(parameter)) || self.global_flags.contains(parameter)
    }

    /// Total number of (command, parameter, value) entries.
    pub fn len(&self) -> usize {
        self.entries.values().flat_map(|m| m.values()).map(Vec::len).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("lookup serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, Default)]
pub struct LookupBuilder {
    entries: BTreeMap<String, BTreeMap<String, BTreeMap<String, usize>>>,
    bare: BTreeMap<String, BTreeSet<String>>,
}

impl LookupBuilder {
    pub fn add(&mut self, command: &str, parameter: &str, value: &str) {
        *self
            .entries
            .entry(command.to_string())
            .or_default()
            .entry(parameter.to_string())
            .or_default()
            .entry(value.to_string())
            .or_default() += 1;
    }

    pub fn add_example(&mut self, ex: &MinedExample) {
        for arg in ex.named_arguments() {
            match &arg.value {
                Some(v) => self.add(&ex.command, &arg.name, v),
                None => {
                    self.bare.entry(ex.command.clone()).or_default().insert(arg.name.clone());
                }
            }
        }
    }

    pub fn finish(self) -> ValueLookup {
        let mut global: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
        for params in self.entries.values() {
            for (param, values) in params {
                let g = global.entry(param.clone()).or_default();
                for (v, c) in values {
                    *g.entry(v.clone()).or_default() += c;
                }
            }
        }
        ValueLookup {
            global_flags: self.bare.values().flatten().cloned().collect(),
            flags: self.bare,
            entries: self
                .entries
                .into_iter()
                .map(|(cmd, params)| (cmd, params.into_iter().map(|(p, vs)| (p, sorted(vs))).collect()))
                .collect(),
            global: global.into_iter().map(|(p, vs)| (p, sorted(vs))).collect(),
        }
    }
}

fn sorted(values: BTreeMap<String, usize>) -> Vec<ValueCount> {
    let mut out: Vec<ValueCount> = values.into_iter().map(|(value, count)| ValueCount { value, count }).collect();
    out.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.value.cmp(&b.value)));
    out
}

/// Aggregates value counts over a filtered corpus. Positional values are
/// skipped; bare flags are recorded as flags, not values.
pub fn build_lookup(corpus: &[MinedExample]) -> ValueLookup {
    let mut builder = LookupBuilder::default();
    corpus.iter().for_each(|ex| builder.add_example(ex));
    builder.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::miner::Argument;

    fn ex(command: &str, args: &[(&str, &str)]) -> MinedExample {
        MinedExample {
            source_id: "s".into(),
            command: command.into(),
            arguments: args.iter().map(|(n, v)| Argument::value(n, v, false)).collect(),
            line: String::new(),
        }
    }

    fn vc(value: &str, count: usize) -> ValueCount {
        ValueCount { value: value.into(), count }
    }

    #[test]
    fn counts_sorted_descending() {
        let corpus = vec![
            ex("group create", &[("location", "westeurope")]),
            ex("group create", &[("location", "eastus")]),
            ex("group create", &[("location", "westeurope")]),
        ];
        let l = build_lookup(&corpus);
        assert_eq!(l.candidates("group create", "location"), &[vc("westeurope", 2), vc("eastus", 1)]);
    }

    #[test]
    fn empty_corpus_is_empty_lookup() {
        let l = build_lookup(&[]);
        assert!(l.is_empty());
        assert!(l.global.is_empty());
        assert!(l.candidates("a", "b").is_empty());
    }

    #[test]
    fn global_fallback_combines_commands() {
        let corpus = vec![
            ex("group create", &[("location", "eastus")]),
            ex("vm create", &[("location", "eastus")]),
            ex("vm create", &[("location", "westus")]),
        ];
        let l = build_lookup(&corpus);
        assert_eq!(l.candidates("group create", "location"), &[vc("eastus", 1)]);
        assert_eq!(l.candidates("vm create", "location"), &[vc("eastus", 1), vc("westus", 1)]);
        assert_eq!(l.global_candidates("location"), &[vc("eastus", 2), vc("westus", 1)]);
    }

    #[test]
    fn flags_and_positionals_are_not_values() {
        let mut e = ex("vm start", &[]);
        e.arguments.push(Argument::flag("no-wait"));
        e.arguments.push(Argument::value(crate::miner::POSITIONAL_SLOT, "x", false));
        let l = build_lookup(&[e]);
        assert!(l.entries.is_empty() && l.global.is_empty());
        assert!(l.is_flag("vm start", "no-wait"));
        assert!(l.is_flag("vm stop", "no-wait"));
        assert!(!l.is_flag("vm start", crate::miner::POSITIONAL_SLOT));
    }

    #[test]
    fn bare_and_valued_uses_are_both_kept() {
        let mut bare = ex("vm create", &[]);
        bare.arguments.push(Argument::flag("tags"));
        let valued = ex("group create", &[("tags", "env=dev")]);
        let l = build_lookup(&[bare, valued]);
        assert!(l.is_flag("vm create", "tags"));
        assert!(l.is_flag("group create", "tags"));
        assert_eq!(l.candidates("group create", "tags"), &[vc("env=dev", 1)]);
        assert!(!l.is_flag("vm create", "name"));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn counts_match_brute_force_recount(rows in prop::collection::vec((0..3usize, 0..3usize, 0..4usize), 0..60)) {
                let cmds = ["a", "b", "c"];
                let params = ["p", "q", "r"];
                let corpus: Vec<MinedExample> = rows
                    .iter()
                    .map(|&(c, p, v)| ex(cmds[c], &[(params[p], ["w", "x", "y", "z"][v])]))
                    .collect();
                let l = build_lookup(&corpus);
                for c in cmds {
                    for p in params {
                        for entry in l.candidates(c, p) {
                            let brute = corpus.iter().filter(|e| e.command == c && e.arguments[0].name == p
                                && e.arguments[0].value.as_deref() == Some(entry.value.as_str())).count();
                            prop_assert_eq!(entry.count, brute);
                            prop_assert!(entry.count >= 1);
                        }
                    }
                }
                for (p, list) in &l.global {
                    for entry in list {
                        let brute = corpus.iter().filter(|e| &e.arguments[0].name == p
                            && e.arguments[0].value.as_deref() == Some(entry.value.as_str())).count();
                        prop_assert_eq!(entry.count, brute);
                    }
                    prop_assert!(list.windows(2).all(|w| (w[0].count, &w[1].value) >= (w[1].count, &w[0].value)));
                }
            }
        }
    }
}
