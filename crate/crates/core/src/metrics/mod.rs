//! Evaluation: ROUGE, documentation coverage and help-call success.

mod coverage;
mod fisher;
mod rouge;
mod sessions;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use coverage::{coverage, CoverageReport, SourceCoverage};
pub use fisher::fisher_exact;
pub use rouge::{lcs_len, rouge, rouge_text, Prf, RougeScore};
pub use sessions::{
    help_success, help_success_csv, sessionize, HelpSuccessReport, HelpSuccessStat, Session,
    DEFAULT_SESSION_GAP_MINUTES,
};

/// The command and parameter-name set shown by one example.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ExampleParams {
    pub command: String,
    pub parameters: BTreeSet<String>,
}

impl From<&crate::filler::FilledExample> for ExampleParams {
    fn from(e: &crate::filler::FilledExample) -> Self {
        ExampleParams { command: e.command.clone(), parameters: e.arguments.iter().map(|a| a.name.clone()).collect() }
    }
}

impl From<&crate::miner::MinedExample> for ExampleParams {
    fn from(e: &crate::miner::MinedExample) -> Self {
        ExampleParams { command: e.command.clone(), parameters: e.parameter_names().map(str::to_string).collect() }
    }
}
