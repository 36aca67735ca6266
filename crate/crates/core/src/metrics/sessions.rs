use std::collections::{BTreeMap, BTreeSet, HashSet};

use chrono::Duration;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fisher::fisher_exact;
use super::ExampleParams;
use crate::telemetry::TelemetryRecord;

pub const DEFAULT_SESSION_GAP_MINUTES: i64 = 30;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub user_id: String,
    pub records: Vec<TelemetryRecord>,
}

fn order_key(r: &TelemetryRecord) -> impl Ord + '_ {
    // help calls sort before a usage with the same timestamp
    (r.timestamp, !r.is_help, &r.command, &r.parameters, r.success, &r.version)
}

/// Per-user, time-ordered sessions split wherever consecutive records are
/// more than `gap` apart. Output order: user, then session start.
pub fn sessionize(records: &[TelemetryRecord], gap: Duration) -> Vec<Session> {
    let mut by_user: BTreeMap<&str, Vec<&TelemetryRecord>> = BTreeMap::new();
    for r in records {
        by_user.entry(r.user_id.as_str()).or_default().push(r);
    }
    let per_user: Vec<Vec<Session>> = by_user
        .into_par_iter()
        .map(|(user, mut recs)| {
            recs.sort_by(|a, b| order_key(a).cmp(&order_key(b)));
            let mut sessions: Vec<Session> = Vec::new();
            let mut last = None;
            for r in recs {
                let split = last.is_none_or(|t| r.timestamp - t > gap);
                if split {
                    sessions.push(Session { user_id: user.to_string(), records: Vec::new() });
                }
                sessions.last_mut().expect("session").records.push(r.clone());
                last = Some(r.timestamp);
            }
            sessions
        })
        .collect();
    per_user.into_iter().flatten().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HelpSuccessStat {
    pub group: String,
    pub machine_rate: f64,
    pub human_rate: f64,
    pub machine_n: usize,
    pub human_n: usize,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HelpSuccessReport {
    pub stats: Vec<HelpSuccessStat>,
    /// Groups with help follow-ups that matched no example of either source.
    pub omitted_groups: Vec<String>,
}

#[derive(Default)]
struct Tally {
    machine: [usize; 2],
    human: [usize; 2],
    seen: bool,
}

fn example_sets(examples: &[ExampleParams]) -> HashSet<(&str, &BTreeSet<String>)> {
    examples.iter().map(|e| (e.command.as_str(), &e.parameters)).collect()
}

/// Success of the usages that follow help calls, split by whether the
/// usage's parameter set matches a machine-generated or a human-written
/// example. A usage matching both counts for both. Each usage is the
/// outcome of at most one help call.
pub fn help_success(
    sessions: &[Session],
    machine: &[ExampleParams],
    human: &[ExampleParams],
    grouping: impl Fn(&str) -> String,
) -> HelpSuccessReport {
    let machine = example_sets(machine);
    let human = example_sets(human);
    let mut tallies: BTreeMap<String, Tally> = BTreeMap::new();
    for s in sessions {
        let mut claimed = HashSet::new();
        for (i, help) in s.records.iter().enumerate().filter(|(_, r)| r.is_help) {
            let next =
                s.records[i + 1..].iter().position(|r| !r.is_help && r.command == help.command).map(|p| p + i + 1);
            let Some(j) = next else { continue };
            if !claimed.insert(j) {
                continue;
            }
            let usage = &s.records[j];
            let key = (usage.command.as_str(), &usage.parameters);
            let t = tallies.entry(grouping(&usage.command)).or_default();
            t.seen = true;
            let slot = usize::from(!usage.success);
            if machine.contains(&key) {
                t.machine[slot] += 1;
            }
            if human.contains(&key) {
                t.human[slot] += 1;
            }
        }
    }
    let mut stats = Vec::new();
    let mut omitted_groups = Vec::new();
    for (group, t) in tallies {
        let machine_n = t.machine[0] + t.machine[1];
        let human_n = t.human[0] + t.human[1];
        if machine_n + human_n == 0 {
            if t.seen {
                omitted_groups.push(group);
            }
            continue;
        }
        let rate = |s: usize, n: usize| if n == 0 { 0.0 } else { s as f64 / n as f64 };
        stats.push(HelpSuccessStat {
            machine_rate: rate(t.machine[0], machine_n),
            human_rate: rate(t.human[0], human_n),
            machine_n,
            human_n,
            p_value: fisher_exact(t.machine[0] as u64, t.machine[1] as u64, t.human[0] as u64, t.human[1] as u64),
            group,
        });
    }
    HelpSuccessReport { stats, omitted_groups }
}

/// Plot rows: group, human_rate, machine_rate, usage_count, p_value.
pub fn help_success_csv(stats: &[HelpSuccessStat]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["group", "human_rate", "machine_rate", "usage_count", "p_value"]).expect("in-memory write");
    for s in stats {
        w.write_record([
            s.group.clone(),
            format!("{:.6}", s.human_rate),
            format!("{:.6}", s.machine_rate),
            (s.machine_n + s.human_n).to_string(),
            format!("{:.6e}", s.p_value),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
