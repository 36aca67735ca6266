use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::features::{build_vocabulary, featurize, LabeledParam, ParamContext, Vocabulary, DEFAULT_VOCAB_CAP};
use super::forest::{train_forest, Forest, ForestParams};
use super::{ClassifierError, ParamType};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Offset between the stage-one and stage-two training seeds.
const STAGE2_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypePrediction {
    pub param_type: ParamType,
    pub confidence: f64,
}

/// Stage one separates String (class 0) from everything else (class 1).
/// Stage two picks among [`ParamType::NON_STRING`] in that order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypePredictor {
    pub format_version: u32,
    pub seed: u64,
    pub params: ForestParams,
    pub vocabulary: Vocabulary,
    pub stage1: Forest,
    pub stage2: Forest,
}

impl TypePredictor {
    pub fn predict(&self, ctx: &ParamContext) -> TypePrediction {
        let x = featurize(ctx, &self.vocabulary);
        let s1 = self.stage1.predict(&x);
        if s1.label == 0 {
            return TypePrediction { param_type: ParamType::String, confidence: s1.probabilities[0] };
        }
        let s2 = self.stage2.predict(&x);
        let param_type = ParamType::NON_STRING[s2.label];
        assert!(!param_type.is_string(), "stage two emitted String");
        TypePrediction { param_type, confidence: s1.probabilities[1] * s2.probabilities[s2.label] }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ClassifierError> {
        #[derive(Deserialize)]
        struct Version {
            format_version: u32,
        }
        let v: Version = serde_json::from_str(text)?;
        if v.format_version != MODEL_FORMAT_VERSION {
            return Err(ClassifierError::UnsupportedModelVersion {
                found: v.format_version,
                expected: MODEL_FORMAT_VERSION,
            });
        }
        Ok(serde_json::from_str(text)?)
    }
}

pub fn predict_type(tp: &TypePredictor, ctx: &ParamContext) -> (ParamType, f64) {
    let p = tp.predict(ctx);
    (p.param_type, p.confidence)
}

pub fn train_two_stage(
    train: &[LabeledParam],
    params: &ForestParams,
    seed: u64,
) -> Result<TypePredictor, ClassifierError> {
    if train.is_empty() {
        return Err(ClassifierError::EmptyTrainingSet);
    }
    if !train.iter().any(|p| p.label.is_string()) {
        return Err(ClassifierError::NoStringRows);
    }
    let non_string: Vec<&LabeledParam> = train.iter().filter(|p| !p.label.is_string()).collect();
    let classes: BTreeSet<ParamType> = non_string.iter().map(|p| p.label).collect();
    if classes.len() < 2 {
        return Err(ClassifierError::TooFewNonStringClasses(classes.len()));
    }

    let vocabulary = build_vocabulary(train, DEFAULT_VOCAB_CAP)?;
    let n_features = vocabulary.len();
    let x: Vec<_> = train.iter().map(|p| featurize(&p.context, &vocabulary)).collect();
    let y1: Vec<usize> = train.iter().map(|p| usize::from(!p.label.is_string())).collect();
    let stage1 = train_forest(&x, &y1, 2, n_features, params, seed)?;

    let (x2, y2): (Vec<_>, Vec<usize>) =
        train.iter().zip(x).filter_map(|(p, v)| p.label.non_string_index().map(|i| (v, i))).unzip();
    let stage2 =
        train_forest(&x2, &y2, ParamType::NON_STRING.len(), n_features, params, seed.wrapping_add(STAGE2_SEED_OFFSET))?;
    Ok(TypePredictor { format_version: MODEL_FORMAT_VERSION, seed, params: *params, vocabulary, stage1, stage2 })
}

/// One forest over all fifteen classes, for comparison with the two-stage model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatPredictor {
    pub vocabulary: Vocabulary,
    pub forest: Forest,
}

impl FlatPredictor {
    pub fn predict(&self, ctx: &ParamContext) -> TypePrediction {
        let p = self.forest.predict(&featurize(ctx, &self.vocabulary));
        TypePrediction { param_type: ParamType::ALL[p.label], confidence: p.probabilities[p.label] }
    }
}

pub fn train_single_stage(
    train: &[LabeledParam],
    params: &ForestParams,
    seed: u64,
) -> Result<FlatPredictor, ClassifierError> {
    let vocabulary = build_vocabulary(train, DEFAULT_VOCAB_CAP)?;
    let x: Vec<_> = train.iter().map(|p| featurize(&p.context, &vocabulary)).collect();
    let y: Vec<usize> = train.iter().map(|p| p.label.index()).collect();
    let forest = train_forest(&x, &y, ParamType::ALL.len(), vocabulary.len(), params, seed)?;
    Ok(FlatPredictor { vocabulary, forest })
}
