//! Generating documentation examples for a command-line product from
//! usage telemetry, mined snippets and learned parameter types.

pub mod augment;
pub mod classifier;
pub mod emit;
pub mod filler;
pub mod metrics;
pub mod miner;
pub mod surface;
pub mod telemetry;
