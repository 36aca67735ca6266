//! Parameter type prediction from text context.
//!
//! Parameters are featurized as bag-of-words counts over five raw fields and
//! routed through two random forests: one deciding string vs non-string and
//! one choosing among the fourteen non-string types.

mod data;
mod eval;
mod features;
mod forest;
mod param_type;
mod pipeline;
mod text;

use std::path::PathBuf;

pub use data::{parse_labeled_tsv, read_labeled_tsv, write_labeled_tsv};
pub use eval::{
    cross_validate, cross_validate_single_stage, stratified_folds, ClassificationReport, CvReport, MetricsRow,
};
pub use features::{
    build_vocabulary, chi_squared, featurize, select_tokens, FeatureKind, FeatureVector, LabeledParam, ParamContext,
    Segment, Vocabulary, DEFAULT_VOCAB_CAP,
};
pub use forest::{predict, train_forest, Forest, ForestParams, MaxFeatures, Node, Prediction, Tree};
pub use param_type::{ParamType, UnknownParamType};
pub use pipeline::{
    predict_type, train_single_stage, train_two_stage, FlatPredictor, TypePrediction, TypePredictor,
    MODEL_FORMAT_VERSION,
};
pub use text::{preprocess, stem, STOP_WORDS};

#[derive(Debug, thiserror::Error)]
pub enum ClassifierError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("{rows} feature rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("label {label} outside {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("invalid hyperparameters: {0}")]
    InvalidParams(String),
    #[error("training data has no String rows")]
    NoStringRows,
    #[error("training data has {0} non-string classes; at least 2 are required")]
    TooFewNonStringClasses(usize),
    #[error("{rows} usable rows cannot be split into {folds} folds")]
    TooFewRows { rows: usize, folds: usize },
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("labeled data, line {line}: {message}")]
    Data { line: usize, message: String },
    #[error("malformed model file: {0}")]
    Model(#[from] serde_json::Error),
    #[error("model format version {found} is not supported (expected {expected})")]
    UnsupportedModelVersion { found: u32, expected: u32 },
}
