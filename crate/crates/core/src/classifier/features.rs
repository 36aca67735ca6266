//! Bag-of-words features over the five raw text fields of a parameter.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::text::preprocess;
use super::{ClassifierError, ParamType};

/// Raw text context of one parameter.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ParamContext {
    pub parameter_name: String,
    pub command_name: String,
    pub module_name: String,
    pub parameter_description: String,
    pub command_description: String,
}

impl ParamContext {
    pub fn field(&self, kind: FeatureKind) -> &str {
        match kind {
            FeatureKind::ParameterName => &self.parameter_name,
            FeatureKind::CommandName => &self.command_name,
            FeatureKind::ModuleName => &self.module_name,
            FeatureKind::ParameterDescription => &self.parameter_description,
            FeatureKind::CommandDescription => &self.command_description,
        }
    }

    pub fn from_surface(command: &crate::surface::CommandSpec, param: &crate::surface::ParameterSpec) -> Self {
        ParamContext {
            parameter_name: param.name.clone(),
            command_name: command.name.clone(),
            module_name: command.module.clone(),
            parameter_description: param.description.clone(),
            command_description: command.description.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LabeledParam {
    #[serde(flatten)]
    pub context: ParamContext,
    pub label: ParamType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    ParameterName,
    CommandName,
    ModuleName,
    ParameterDescription,
    CommandDescription,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 5] = [
        FeatureKind::ParameterName,
        FeatureKind::CommandName,
        FeatureKind::ModuleName,
        FeatureKind::ParameterDescription,
        FeatureKind::CommandDescription,
    ];

    /// Description fields get per-class vocabulary selection; the name
    /// fields keep every token.
    pub fn is_description(self) -> bool {
        matches!(self, FeatureKind::ParameterDescription | FeatureKind::CommandDescription)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub feature: FeatureKind,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
struct RawVocabulary {
    cap: usize,
    segments: Vec<Segment>,
}

/// Column layout: segments in [`FeatureKind::ALL`] order, tokens sorted
/// within each segment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "RawVocabulary")]
pub struct Vocabulary {
    pub cap: usize,
    pub segments: Vec<Segment>,
    #[serde(skip)]
    offsets: Vec<u32>,
    #[serde(skip)]
    index: HashMap<(FeatureKind, String), u32>,
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.cap == other.cap && self.segments == other.segments
    }
}

impl From<RawVocabulary> for Vocabulary {
    fn from(raw: RawVocabulary) -> Self {
        Vocabulary::from_segments(raw.cap, raw.segments)
    }
}

impl Vocabulary {
    fn from_segments(cap: usize, segments: Vec<Segment>) -> Self {
        let mut offsets = Vec::with_capacity(segments.len());
        let mut index = HashMap::new();
        let mut next = 0u32;
        for seg in &segments {
            offsets.push(next);
            for token in &seg.tokens {
                index.insert((seg.feature, token.clone()), next);
                next += 1;
            }
        }
        Vocabulary { cap, segments, offsets, index }
    }

    /// Total column count.
    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn column(&self, feature: FeatureKind, token: &str) -> Option<u32> {
        self.index.get(&(feature, token.to_string())).copied()
    }

    pub fn segment(&self, feature: FeatureKind) -> Option<&Segment> {
        self.segments.iter().find(|s| s.feature == feature)
    }

    pub fn segment_offset(&self, feature: FeatureKind) -> Option<u32> {
        self.segments.iter().position(|s| s.feature == feature).map(|i| self.offsets[i])
    }
}

/// Chi-squared statistic of a 2x2 presence table:
/// `a` = in class with token, `b` = other classes with token,
/// `c` = in class without token, `d` = other classes without token.
pub fn chi_squared(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let n = a + b + c + d;
    let denom = (a + b) * (c + d) * (a + c) * (b + d);
    if denom == 0.0 {
        return 0.0;
    }
    let diff = a * d - b * c;
    n * diff * diff / denom
}

/// Top-`cap` tokens per class by chi-squared association, among tokens
/// present in that class; ties break lexicographically. Returns the union.
pub fn select_tokens(rows: &[(BTreeSet<String>, usize)], cap: usize) -> BTreeSet<String> {
    let n = rows.len() as f64;
    let mut class_rows: BTreeMap<usize, f64> = BTreeMap::new();
    let mut token_rows: BTreeMap<&str, f64> = BTreeMap::new();
    let mut joint: BTreeMap<(usize, &str), f64> = BTreeMap::new();
    for (tokens, class) in rows {
        *class_rows.entry(*class).or_default() += 1.0;
        for t in tokens {
            *token_rows.entry(t.as_str()).or_default() += 1.0;
            *joint.entry((*class, t.as_str())).or_default() += 1.0;
        }
    }
    let mut selected = BTreeSet::new();
    for (&class, &in_class) in &class_rows {
        let mut scored: Vec<(f64, &str)> = joint
            .range((class, "")..)
            .take_while(|((c, _), _)| *c == class)
            .map(|(&(_, token), &a)| {
                let with_token = token_rows[token];
                let b = with_token - a;
                let c = in_class - a;
                let d = n - a - b - c;
                (chi_squared(a, b, c, d), token)
            })
            .collect();
        scored.sort_by(|x, y| y.0.total_cmp(&x.0).then_with(|| x.1.cmp(y.1)));
        selected.extend(scored.into_iter().take(cap).map(|(_, t)| t.to_string()));
    }
    selected
}

pub const DEFAULT_VOCAB_CAP: usize = 75;

pub fn build_vocabulary(train: &[LabeledParam], cap: usize) -> Result<Vocabulary, ClassifierError> {
    if train.is_empty() {
        return Err(ClassifierError::EmptyTrainingSet);
    }
    let mut segments = Vec::with_capacity(FeatureKind::ALL.len());
    for feature in FeatureKind::ALL {
        let rows: Vec<(BTreeSet<String>, usize)> = train
            .iter()
            .map(|p| (preprocess(p.context.field(feature)).into_iter().collect(), p.label.index()))
            .collect();
        let tokens: BTreeSet<String> = if feature.is_description() {
            select_tokens(&rows, cap)
        } else {
            rows.into_iter().flat_map(|(t, _)| t).collect()
        };
        segments.push(Segment { feature, tokens: tokens.into_iter().collect() });
    }
    Ok(Vocabulary::from_segments(cap, segments))
}

/// Sparse token counts; indices strictly increasing, counts at least one.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FeatureVector {
    pub entries: Vec<(u32, u32)>,
}

impl FeatureVector {
    pub fn get(&self, column: u32) -> u32 {
        self.entries.binary_search_by_key(&column, |&(i, _)| i).map(|pos| self.entries[pos].1).unwrap_or(0)
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }
}

pub fn featurize(ctx: &ParamContext, vocab: &Vocabulary) -> FeatureVector {
    let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
    for seg in &vocab.segments {
        for token in preprocess(ctx.field(seg.feature)) {
            if let Some(col) = vocab.column(seg.feature, &token) {
                *counts.entry(col).or_default() += 1;
            }
        }
    }
    FeatureVector { entries: counts.into_iter().collect() }
}
