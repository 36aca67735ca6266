//! Training data for sequence models and a count-based contextual value
//! generator.

mod cooccur;
mod masking;

pub use cooccur::{generate_values, train_cooccurrence, CommandTables, CooccurrenceModel, Level};
pub use masking::{
    example_tokens, finetune_dataset, finetune_permutations, pretraining_dataset, span_mask, write_dataset,
    DatasetRecord, MaskedPair, SpanMaskConfig, MASK, MAX_PERMUTATION_PARAMS,
};

#[derive(Debug, thiserror::Error)]
pub enum AugmentError {
    #[error("example has no parameter values to mask")]
    NoParameters,
    #[error("example has {n} parameters; enumerating all subsets is capped at {max}, sample subsets instead")]
    TooManyParameters { n: usize, max: usize },
    #[error("mask fraction {0} must lie strictly between 0 and 1")]
    InvalidFraction(f64),
    #[error("cannot mask an empty line")]
    EmptyLine,
    #[error("input already contains the mask sentinel")]
    SentinelInInput,
}
