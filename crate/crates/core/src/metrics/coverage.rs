use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ExampleParams;
use crate::surface::CommandSurface;
use crate::telemetry::UsageAggregate;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SourceCoverage {
    /// Share of used commands with at least one example.
    pub command_coverage: f64,
    /// Mean over used commands (with parameters) of the share of their
    /// parameters shown in some example; commands without examples count 0.
    pub mean_parameter_coverage: f64,
    pub commands_with_examples: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CoverageReport {
    /// Surface commands that appear in telemetry.
    pub commands_considered: usize,
    pub human: SourceCoverage,
    pub machine: SourceCoverage,
}

impl CoverageReport {
    pub fn render(&self) -> String {
        let pct = |x: f64| format!("{:.0}%", x * 100.0);
        let mut out = format!("Coverage over {} used commands\n", self.commands_considered);
        writeln!(out, "{:<22}{:>8}{:>10}", "", "Human", "Machine").unwrap();
        writeln!(
            out,
            "{:<22}{:>8}{:>10}",
            "Commands covered",
            pct(self.human.command_coverage),
            pct(self.machine.command_coverage)
        )
        .unwrap();
        writeln!(
            out,
            "{:<22}{:>8}{:>10}",
            "Parameters covered",
            pct(self.human.mean_parameter_coverage),
            pct(self.machine.mean_parameter_coverage)
        )
        .unwrap();
        out
    }
}

fn source_coverage(surface: &CommandSurface, used: &BTreeSet<&str>, examples: &[ExampleParams]) -> SourceCoverage {
    let mut shown: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for e in examples {
        let entry = shown.entry(e.command.as_str()).or_default();
        entry.extend(e.parameters.iter().map(String::as_str));
    }
    let mut with_examples = 0;
    let mut param_sum = 0.0;
    let mut param_commands = 0;
    for &c in used {
        let spec = surface.lookup_command(c).expect("used commands are in the surface");
        let names = shown.get(c);
        if names.is_some() {
            with_examples += 1;
        }
        if spec.parameters.is_empty() {
            continue;
        }
        param_commands += 1;
        if let Some(names) = names {
            let covered = spec.parameters.iter().filter(|p| names.contains(p.name.as_str())).count();
            param_sum += covered as f64 / spec.parameters.len() as f64;
        }
    }
    let ratio = |a: f64, b: usize| if b == 0 { 0.0 } else { a / b as f64 };
    SourceCoverage {
        command_coverage: ratio(with_examples as f64, used.len()),
        mean_parameter_coverage: ratio(param_sum, param_commands),
        commands_with_examples: with_examples,
    }
}

/// Command and parameter coverage of two example sources over the surface
/// commands that appear in telemetry.
pub fn coverage(
    surface: &CommandSurface,
    aggregates: &[UsageAggregate],
    human: &[ExampleParams],
    machine: &[ExampleParams],
) -> CoverageReport {
    let used: BTreeSet<&str> =
        aggregates.iter().filter_map(|a| surface.lookup_command(&a.command).map(|c| c.name.as_str())).collect();
    CoverageReport {
        commands_considered: used.len(),
        human: source_coverage(surface, &used, human),
        machine: source_coverage(surface, &used, machine),
    }
}
