//! Random forest of CART trees over sparse count features.
//!
//! Training is a pure function of (rows, labels, hyperparameters, seed).
//! Rows are sorted canonically before bootstrapping, so row order in the
//! input does not matter. Tree `i` draws from its own generator seeded with
//! `seed + i`, which makes the ensemble independent of scheduling.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::FeatureVector;
use super::ClassifierError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// `round(sqrt(feature count))`
    Sqrt,
    /// `ceil(fraction * feature count)`
    Fraction(f64),
    All,
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> usize {
        let k = match self {
            MaxFeatures::Sqrt => (n_features as f64).sqrt().round() as usize,
            MaxFeatures::Fraction(f) => (f.clamp(0.0, 1.0) * n_features as f64).ceil() as usize,
            MaxFeatures::All => n_features,
        };
        k.clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub tree_count: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams { tree_count: 100, max_depth: 16, min_samples_leaf: 2, max_features: MaxFeatures::Sqrt }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    /// Rows with `value <= threshold` go left.
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        counts: Vec<u32>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf_counts(&self, x: &FeatureVector) -> &[u32] {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Leaf { counts } => return counts,
                Node::Split { feature, threshold, left, right } => {
                    i = if f64::from(x.get(*feature)) <= *threshold { *left as usize } else { *right as usize };
                }
            }
        }
    }

    /// Majority class of the reached leaf; ties go to the lower label.
    pub fn predict(&self, x: &FeatureVector) -> usize {
        argmax_u32(self.leaf_counts(x))
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left as usize).max(walk(nodes, *right as usize)),
            }
        }
        walk(&self.nodes, 0)
    }
}

fn argmax_u32(counts: &[u32]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub n_classes: usize,
    pub n_features: usize,
    pub params: ForestParams,
    pub seed: u64,
    pub trees: Vec<Tree>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: usize,
    /// Vote fractions per class.
    pub probabilities: Vec<f64>,
}

impl Forest {
    pub fn predict(&self, x: &FeatureVector) -> Prediction {
        let mut votes = vec![0u32; self.n_classes];
        for tree in &self.trees {
            votes[tree.predict(x)] += 1;
        }
        let total = self.trees.len().max(1) as f64;
        Prediction { label: argmax_u32(&votes), probabilities: votes.iter().map(|&v| f64::from(v) / total).collect() }
    }
}

pub fn predict(forest: &Forest, x: &FeatureVector) -> Prediction {
    forest.predict(x)
}

/// Trains `params.tree_count` trees on seeded bootstrap samples.
///
/// A single-class training set is accepted and yields a forest that always
/// predicts that class.
pub fn train_forest(
    x: &[FeatureVector],
    y: &[usize],
    n_classes: usize,
    n_features: usize,
    params: &ForestParams,
    seed: u64,
) -> Result<Forest, ClassifierError> {
    if x.len() != y.len() {
        return Err(ClassifierError::LengthMismatch { rows: x.len(), labels: y.len() });
    }
    if x.is_empty() {
        return Err(ClassifierError::EmptyTrainingSet);
    }
    if params.tree_count == 0 || params.min_samples_leaf == 0 {
        return Err(ClassifierError::InvalidParams("tree_count and min_samples_leaf must be at least 1".into()));
    }
    if let Some(&bad) = y.iter().find(|&&l| l >= n_classes) {
        return Err(ClassifierError::LabelOutOfRange { label: bad, n_classes });
    }
    if let Some(bad) = x.iter().flat_map(|v| v.entries.iter()).find(|(i, _)| *i as usize >= n_features) {
        return Err(ClassifierError::InvalidParams(format!("feature index {} outside {} columns", bad.0, n_features)));
    }
    let first = y[0];
    if y.iter().all(|&l| l == first) {
        log::warn!("training data has a single class ({first}); forest will be constant");
    }

    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| (y[a], &x[a]).cmp(&(y[b], &x[b])));
    let rows: Vec<&FeatureVector> = order.iter().map(|&i| &x[i]).collect();
    let labels: Vec<usize> = order.iter().map(|&i| y[i]).collect();

    let data = TrainingData {
        rows: &rows,
        labels: &labels,
        n_classes,
        n_features,
        mtry: params.max_features.resolve(n_features),
        params,
    };
    let trees = (0..params.tree_count).into_par_iter().map(|t| data.grow_tree(seed.wrapping_add(t as u64))).collect();
    Ok(Forest { n_classes, n_features, params: *params, seed, trees })
}

struct TrainingData<'a> {
    rows: &'a [&'a FeatureVector],
    labels: &'a [usize],
    n_classes: usize,
    n_features: usize,
    mtry: usize,
    params: &'a ForestParams,
}

#[derive(Clone, Copy)]
struct Sample {
    row: u32,
    weight: u32,
}

struct BestSplit {
    feature: u32,
    threshold: f64,
    score: f64,
}

/// Per-tree scratch space: nonzero (value, class, weight) triples bucketed by feature.
struct Scratch {
    buckets: Vec<Vec<(u32, u16, u32)>>,
    touched: Vec<u32>,
}

fn gini_mass(counts: &[f64], total: f64) -> f64 {
    // total * gini impurity = total - sum(c^2) / total
    if total <= 0.0 {
        return 0.0;
    }
    total - counts.iter().map(|c| c * c).sum::<f64>() / total
}

impl TrainingData<'_> {
    fn grow_tree(&self, seed: u64) -> Tree {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.rows.len();
        let mut weights = vec![0u32; n];
        for _ in 0..n {
            weights[rng.gen_range(0..n)] += 1;
        }
        let samples: Vec<Sample> = weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0)
            .map(|(i, &w)| Sample { row: i as u32, weight: w })
            .collect();
        let mut scratch = Scratch { buckets: vec![Vec::new(); self.n_features], touched: Vec::new() };
        let mut nodes = Vec::new();
        self.grow(samples, 0, &mut nodes, &mut scratch, &mut rng);
        Tree { nodes }
    }

    fn class_counts(&self, samples: &[Sample]) -> Vec<u32> {
        let mut counts = vec![0u32; self.n_classes];
        for s in samples {
            counts[self.labels[s.row as usize]] += s.weight;
        }
        counts
    }

    fn grow(
        &self,
        samples: Vec<Sample>,
        depth: usize,
        nodes: &mut Vec<Node>,
        scratch: &mut Scratch,
        rng: &mut ChaCha8Rng,
    ) -> u32 {
        let id = nodes.len() as u32;
        let counts = self.class_counts(&samples);
        let total: u32 = counts.iter().sum();
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let min_leaf = self.params.min_samples_leaf as u32;
        if pure || depth >= self.params.max_depth || total < 2 * min_leaf {
            nodes.push(Node::Leaf { counts });
            return id;
        }
        let Some(split) = self.best_split(&samples, &counts, scratch, rng) else {
            nodes.push(Node::Leaf { counts });
            return id;
        };
        let (left, right): (Vec<Sample>, Vec<Sample>) = samples
            .into_iter()
            .partition(|s| f64::from(self.rows[s.row as usize].get(split.feature)) <= split.threshold);
        nodes.push(Node::Leaf { counts: Vec::new() });
        let l = self.grow(left, depth + 1, nodes, scratch, rng);
        let r = self.grow(right, depth + 1, nodes, scratch, rng);
        nodes[id as usize] = Node::Split { feature: split.feature, threshold: split.threshold, left: l, right: r };
        id
    }

    fn best_split(
        &self,
        samples: &[Sample],
        node_counts: &[u32],
        scratch: &mut Scratch,
        rng: &mut ChaCha8Rng,
    ) -> Option<BestSplit> {
        for s in samples {
            let class = self.labels[s.row as usize] as u16;
            for &(f, v) in &self.rows[s.row as usize].entries {
                let bucket = &mut scratch.buckets[f as usize];
                if bucket.is_empty() {
                    scratch.touched.push(f);
                }
                bucket.push((v, class, s.weight));
            }
        }
        let mut candidates = std::mem::take(&mut scratch.touched);
        candidates.sort_unstable();
        candidates.shuffle(rng);

        let total: u32 = node_counts.iter().sum();
        let parent = gini_mass(&node_counts.iter().map(|&c| f64::from(c)).collect::<Vec<_>>(), f64::from(total));
        let mut best: Option<BestSplit> = None;
        let mut evaluated = 0;
        for &f in &candidates {
            if evaluated >= self.mtry {
                break;
            }
            let bucket = &mut scratch.buckets[f as usize];
            if let Some((threshold, score)) = self.best_threshold(bucket, node_counts, total) {
                evaluated += 1;
                if score < parent - 1e-12 && best.as_ref().is_none_or(|b| score < b.score) {
                    best = Some(BestSplit { feature: f, threshold, score });
                }
            }
        }
        for &f in &candidates {
            scratch.buckets[f as usize].clear();
        }
        candidates.clear();
        scratch.touched = candidates;
        best
    }

    /// Best threshold for one feature, or `None` when the feature is
    /// constant within the node or no threshold respects the leaf minimum.
    fn best_threshold(&self, bucket: &mut [(u32, u16, u32)], node_counts: &[u32], total: u32) -> Option<(f64, f64)> {
        bucket.sort_unstable_by_key(|&(v, c, _)| (v, c));
        let nonzero_weight: u32 = bucket.iter().map(|b| b.2).sum();
        let zero_weight = total - nonzero_weight;
        let constant = zero_weight == 0 && bucket.first().map(|b| b.0) == bucket.last().map(|b| b.0);
        if constant {
            return None;
        }
        let min_leaf = self.params.min_samples_leaf as u32;
        let mut left = vec![0f64; self.n_classes];
        for (c, &n) in node_counts.iter().enumerate() {
            left[c] = f64::from(n);
        }
        for &(_, c, w) in bucket.iter() {
            left[c as usize] -= f64::from(w);
        }
        let mut right: Vec<f64> = node_counts.iter().zip(&left).map(|(&n, &l)| f64::from(n) - l).collect();
        let mut left_weight = zero_weight;
        let mut best: Option<(f64, f64)> = None;
        let mut consider = |low: u32, high: u32, lw: u32, left: &[f64], right: &[f64]| {
            let rw = total - lw;
            if lw < min_leaf || rw < min_leaf {
                return;
            }
            let score = gini_mass(left, f64::from(lw)) + gini_mass(right, f64::from(rw));
            if best.is_none_or(|(_, s)| score < s) {
                best = Some(((f64::from(low) + f64::from(high)) / 2.0, score));
            }
        };
        let mut prev_value = 0u32;
        let mut i = 0;
        while i < bucket.len() {
            let v = bucket[i].0;
            if left_weight > 0 {
                consider(prev_value, v, left_weight, &left, &right);
            }
            while i < bucket.len() && bucket[i].0 == v {
                let (_, c, w) = bucket[i];
                left[c as usize] += f64::from(w);
                right[c as usize] -= f64::from(w);
                left_weight += w;
                i += 1;
            }
            prev_value = v;
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(entries: &[(u32, u32)]) -> FeatureVector {
        FeatureVector { entries: entries.to_vec() }
    }

    fn separable() -> (Vec<FeatureVector>, Vec<usize>) {
        // Feature 0 separates: class 0 has count <= 1, class 1 has count >= 3.
        // Feature 1 is noise shared by both classes.
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..12u32 {
            x.push(fv(&[(0, i % 2), (1, 1 + i % 3)].iter().copied().filter(|e| e.1 > 0).collect::<Vec<_>>()));
            y.push(0);
            x.push(fv(&[(0, 3 + i % 2), (1, 1 + (i + 1) % 3)]));
            y.push(1);
        }
        (x, y)
    }

    /// Exhaustive search for a single-feature threshold that separates the data.
    fn stump_oracle(x: &[FeatureVector], y: &[usize], n_features: u32) -> Option<(u32, u32)> {
        for f in 0..n_features {
            let max = x.iter().map(|v| v.get(f)).max().unwrap_or(0);
            for t in 0..=max {
                for (lo, hi) in [(0, 1), (1, 0)] {
                    if x.iter().zip(y).all(|(v, &l)| if v.get(f) <= t { l == lo } else { l == hi }) {
                        return Some((f, t));
                    }
                }
            }
        }
        None
    }

    #[test]
    fn separable_toy_set_is_fit_exactly() {
        let (x, y) = separable();
        assert!(stump_oracle(&x, &y, 2).is_some(), "fixture must be separable");
        let params = ForestParams { tree_count: 15, min_samples_leaf: 1, ..ForestParams::default() };
        let forest = train_forest(&x, &y, 2, 2, &params, 7).unwrap();
        let acc = x.iter().zip(&y).filter(|(v, &l)| forest.predict(v).label == l).count();
        assert_eq!(acc, x.len());
    }

    #[test]
    fn single_class_gives_constant_forest() {
        let x = vec![fv(&[(0, 1)]), fv(&[(1, 2)]), fv(&[])];
        let y = vec![2, 2, 2];
        let forest = train_forest(&x, &y, 3, 2, &ForestParams::default(), 1).unwrap();
        for v in [fv(&[]), fv(&[(0, 5), (1, 1)])] {
            let p = forest.predict(&v);
            assert_eq!(p.label, 2);
            assert_eq!(p.probabilities[2], 1.0);
        }
    }

    #[test]
    fn training_is_deterministic_and_order_independent() {
        let (x, y) = separable();
        let params = ForestParams { tree_count: 5, ..ForestParams::default() };
        let a = train_forest(&x, &y, 2, 2, &params, 42).unwrap();
        let b = train_forest(&x, &y, 2, 2, &params, 42).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let mut idx: Vec<usize> = (0..x.len()).rev().collect();
        idx.rotate_left(5);
        let xs: Vec<FeatureVector> = idx.iter().map(|&i| x[i].clone()).collect();
        let ys: Vec<usize> = idx.iter().map(|&i| y[i]).collect();
        let c = train_forest(&xs, &ys, 2, 2, &params, 42).unwrap();
        assert_eq!(a, c);
        let d = train_forest(&x, &y, 2, 2, &params, 43).unwrap();
        assert_eq!(d.trees.len(), 5);
    }

    #[test]
    fn vote_fractions_follow_tree_votes() {
        let leaf = |c0: u32, c1: u32| Tree { nodes: vec![Node::Leaf { counts: vec![c0, c1] }] };
        let mut trees: Vec<Tree> = (0..6).map(|_| leaf(3, 1)).collect();
        trees.extend((0..4).map(|_| leaf(0, 2)));
        let forest = Forest { n_classes: 2, n_features: 1, params: ForestParams::default(), seed: 0, trees };
        let p = forest.predict(&fv(&[]));
        assert_eq!(p.label, 0);
        assert!((p.probabilities[0] - 0.6).abs() < 1e-12);
        assert!((p.probabilities[1] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn hand_walked_forest() {
        // Tree A: f0 <= 0.5 ? leaf[0,3,0] : (f2 <= 1.5 ? leaf[2,0,0] : leaf[0,0,4])
        // Tree B: f2 <= 0.5 ? leaf[1,1,0] : leaf[0,1,5]
        // Tree C: leaf[0,2,2]
        let a = Tree {
            nodes: vec![
                Node::Split { feature: 0, threshold: 0.5, left: 1, right: 2 },
                Node::Leaf { counts: vec![0, 3, 0] },
                Node::Split { feature: 2, threshold: 1.5, left: 3, right: 4 },
                Node::Leaf { counts: vec![2, 0, 0] },
                Node::Leaf { counts: vec![0, 0, 4] },
            ],
        };
        let b = Tree {
            nodes: vec![
                Node::Split { feature: 2, threshold: 0.5, left: 1, right: 2 },
                Node::Leaf { counts: vec![1, 1, 0] },
                Node::Leaf { counts: vec![0, 1, 5] },
            ],
        };
        let c = Tree { nodes: vec![Node::Leaf { counts: vec![0, 2, 2] }] };
        let forest =
            Forest { n_classes: 3, n_features: 3, params: ForestParams::default(), seed: 0, trees: vec![a, b, c] };
        // x = {f0: 1, f2: 2}: A -> right -> f2=2 > 1.5 -> class 2; B -> class 2; C -> tie -> class 1.
        let p = forest.predict(&fv(&[(0, 1), (2, 2)]));
        assert_eq!(p.label, 2);
        assert!((p.probabilities[2] - 2.0 / 3.0).abs() < 1e-12);
        // x = {}: A -> class 1; B -> tie [1,1,0] -> class 0; C -> class 1.
        let p = forest.predict(&fv(&[]));
        assert_eq!(p.label, 1);
        assert_eq!(p.probabilities, vec![1.0 / 3.0, 2.0 / 3.0, 0.0]);
    }

    #[test]
    fn leaves_respect_min_samples_and_depth() {
        let (x, y) = separable();
        let params = ForestParams { tree_count: 10, max_depth: 3, min_samples_leaf: 3, max_features: MaxFeatures::All };
        let forest = train_forest(&x, &y, 2, 2, &params, 3).unwrap();
        for tree in &forest.trees {
            assert!(tree.depth() <= 3);
            for node in &tree.nodes {
                if let Node::Leaf { counts } = node {
                    assert!(counts.iter().sum::<u32>() >= 3);
                }
            }
        }
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let x = vec![fv(&[])];
        assert!(matches!(
            train_forest(&x, &[0, 1], 2, 1, &ForestParams::default(), 0),
            Err(ClassifierError::LengthMismatch { .. })
        ));
        assert!(matches!(
            train_forest(&x, &[5], 2, 1, &ForestParams::default(), 0),
            Err(ClassifierError::LabelOutOfRange { .. })
        ));
        assert!(matches!(
            train_forest(&[], &[], 2, 1, &ForestParams::default(), 0),
            Err(ClassifierError::EmptyTrainingSet)
        ));
    }

    #[test]
    fn max_features_resolution() {
        assert_eq!(MaxFeatures::Sqrt.resolve(100), 10);
        assert_eq!(MaxFeatures::Sqrt.resolve(0), 1);
        assert_eq!(MaxFeatures::Fraction(0.25).resolve(10), 3);
        assert_eq!(MaxFeatures::All.resolve(7), 7);
    }
}
