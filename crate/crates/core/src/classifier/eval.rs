use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::{featurize, LabeledParam};
use super::forest::ForestParams;
use super::pipeline::{train_single_stage, train_two_stage};
use super::{ClassifierError, ParamType};

pub const COLUMNS: [&str; 4] = ["Precision", "Recall", "F-1 Score", "Support"];
pub const WEIGHTED_AVG: &str = "Weighted Avg.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub title: String,
    /// One row per class with nonzero support, in label order.
    pub rows: Vec<MetricsRow>,
    pub weighted_avg: MetricsRow,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

impl ClassificationReport {
    /// Builds the report from paired true and predicted label indices.
    /// Precision of a never-predicted class is 0.
    pub fn from_labels(title: &str, names: &[&str], truth: &[usize], predicted: &[usize]) -> Self {
        assert_eq!(truth.len(), predicted.len());
        let k = names.len();
        let mut tp = vec![0usize; k];
        let mut support = vec![0usize; k];
        let mut predicted_n = vec![0usize; k];
        for (&t, &p) in truth.iter().zip(predicted) {
            support[t] += 1;
            predicted_n[p] += 1;
            if t == p {
                tp[t] += 1;
            }
        }
        let rows: Vec<MetricsRow> = (0..k)
            .filter(|&c| support[c] > 0)
            .map(|c| {
                let precision = ratio(tp[c], predicted_n[c]);
                let recall = ratio(tp[c], support[c]);
                MetricsRow {
                    label: names[c].to_string(),
                    precision,
                    recall,
                    f1: f1(precision, recall),
                    support: support[c],
                }
            })
            .collect();
        let weighted_avg = weighted(WEIGHTED_AVG, rows.iter());
        ClassificationReport { title: title.to_string(), rows, weighted_avg }
    }

    pub fn row(&self, label: &str) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    /// Support-weighted average restricted to the named classes.
    pub fn weighted_over(&self, labels: &[&str]) -> MetricsRow {
        weighted(WEIGHTED_AVG, self.rows.iter().filter(|r| labels.contains(&r.label.as_str())))
    }

    pub fn render(&self) -> String {
        let width = self.rows.iter().map(|r| r.label.len()).chain([WEIGHTED_AVG.len(), 5]).max().unwrap_or(5);
        let mut out = String::new();
        writeln!(out, "{}", self.title).unwrap();
        write!(out, "{:<width$}", "Class").unwrap();
        for c in COLUMNS {
            write!(out, "  {c:>9}").unwrap();
        }
        out.push('\n');
        for r in self.rows.iter().chain(std::iter::once(&self.weighted_avg)) {
            writeln!(
                out,
                "{:<width$}  {:>9.2}  {:>9.2}  {:>9.2}  {:>9}",
                r.label, r.precision, r.recall, r.f1, r.support
            )
            .unwrap();
        }
        out
    }
}

fn weighted<'a>(label: &str, rows: impl Iterator<Item = &'a MetricsRow>) -> MetricsRow {
    let mut acc = MetricsRow { label: label.to_string(), precision: 0.0, recall: 0.0, f1: 0.0, support: 0 };
    for r in rows {
        let w = r.support as f64;
        acc.precision += w * r.precision;
        acc.recall += w * r.recall;
        acc.f1 += w * r.f1;
        acc.support += r.support;
    }
    if acc.support > 0 {
        let n = acc.support as f64;
        acc.precision /= n;
        acc.recall /= n;
        acc.f1 /= n;
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: usize,
    pub seed: u64,
    /// Classes with fewer members than folds, left out of training and scoring.
    pub unsupported: Vec<ParamType>,
    pub stage1: ClassificationReport,
    pub stage2: ClassificationReport,
    pub pipeline: ClassificationReport,
}

impl CvReport {
    pub fn render(&self) -> String {
        let mut out = format!("{}-fold cross validation, seed {}\n", self.folds, self.seed);
        if !self.unsupported.is_empty() {
            let names: Vec<&str> = self.unsupported.iter().map(|t| t.display_name()).collect();
            writeln!(out, "Unsupported (fewer than {} rows): {}", self.folds, names.join(", ")).unwrap();
        }
        for r in [&self.stage1, &self.stage2, &self.pipeline] {
            out.push('\n');
            out.push_str(&r.render());
        }
        out
    }
}

/// Canonically sorted rows of supported classes, their fold assignment and
/// the classes that were left out.
pub fn stratified_folds(
    data: &[LabeledParam],
    folds: usize,
    seed: u64,
) -> Result<(Vec<LabeledParam>, Vec<usize>, Vec<ParamType>), ClassifierError> {
    if folds < 2 {
        return Err(ClassifierError::InvalidParams("at least 2 folds are required".into()));
    }
    let mut by_class: BTreeMap<ParamType, Vec<&LabeledParam>> = BTreeMap::new();
    for p in data {
        by_class.entry(p.label).or_default().push(p);
    }
    let unsupported: Vec<ParamType> = by_class.iter().filter(|(_, rows)| rows.len() < folds).map(|(&t, _)| t).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut assignment = Vec::new();
    for (label, mut members) in by_class {
        if unsupported.contains(&label) {
            continue;
        }
        members.sort();
        members.shuffle(&mut rng);
        for (i, p) in members.into_iter().enumerate() {
            rows.push(p.clone());
            assignment.push(i % folds);
        }
    }
    if rows.len() < folds {
        return Err(ClassifierError::TooFewRows { rows: rows.len(), folds });
    }
    Ok((rows, assignment, unsupported))
}

fn split(rows: &[LabeledParam], assignment: &[usize], fold: usize) -> (Vec<LabeledParam>, Vec<usize>) {
    let train = rows.iter().zip(assignment).filter(|(_, &f)| f != fold).map(|(p, _)| p.clone()).collect();
    let test = (0..rows.len()).filter(|&i| assignment[i] == fold).collect();
    (train, test)
}

/// Stratified k-fold evaluation of the two-stage model with predictions
/// pooled across folds. Reports stage one (String vs Non-String), stage two
/// on truly non-string rows, and the full routed pipeline.
pub fn cross_validate(
    data: &[LabeledParam],
    folds: usize,
    params: &ForestParams,
    seed: u64,
) -> Result<CvReport, ClassifierError> {
    let (rows, assignment, unsupported) = stratified_folds(data, folds, seed)?;
    let mut s1 = (Vec::new(), Vec::new());
    let mut s2 = (Vec::new(), Vec::new());
    let mut full = (Vec::new(), Vec::new());
    for fold in 0..folds {
        let (train, test) = split(&rows, &assignment, fold);
        let tp = train_two_stage(&train, params, seed.wrapping_add(fold as u64))?;
        for i in test {
            let p = &rows[i];
            let x = featurize(&p.context, &tp.vocabulary);
            s1.0.push(usize::from(!p.label.is_string()));
            s1.1.push(tp.stage1.predict(&x).label);
            if let Some(ns) = p.label.non_string_index() {
                s2.0.push(ns);
                s2.1.push(tp.stage2.predict(&x).label);
            }
            full.0.push(p.label.index());
            full.1.push(tp.predict(&p.context).param_type.index());
        }
    }
    let fine: Vec<&str> = ParamType::NON_STRING.iter().map(|t| t.display_name()).collect();
    let all: Vec<&str> = ParamType::ALL.iter().map(|t| t.display_name()).collect();
    Ok(CvReport {
        folds,
        seed,
        unsupported,
        stage1: ClassificationReport::from_labels("String vs Non-String", &["String", "Non-String"], &s1.0, &s1.1),
        stage2: ClassificationReport::from_labels("Non-String types", &fine, &s2.0, &s2.1),
        pipeline: ClassificationReport::from_labels("Two-stage pipeline", &all, &full.0, &full.1),
    })
}

/// The same folds scored with one fifteen-way forest.
pub fn cross_validate_single_stage(
    data: &[LabeledParam],
    folds: usize,
    params: &ForestParams,
    seed: u64,
) -> Result<ClassificationReport, ClassifierError> {
    let (rows, assignment, _) = stratified_folds(data, folds, seed)?;
    let (mut truth, mut pred) = (Vec::new(), Vec::new());
    for fold in 0..folds {
        let (train, test) = split(&rows, &assignment, fold);
        let fp = train_single_stage(&train, params, seed.wrapping_add(fold as u64))?;
        for i in test {
            truth.push(rows[i].label.index());
            pred.push(fp.predict(&rows[i].context).param_type.index());
        }
    }
    let all: Vec<&str> = ParamType::ALL.iter().map(|t| t.display_name()).collect();
    Ok(ClassificationReport::from_labels("Single-stage forest", &all, &truth, &pred))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::ParamContext;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn twelve_row_confusion_matrix() {
        let truth = [0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2];
        let pred = [0, 0, 0, 1, 1, 1, 2, 2, 2, 2, 2, 0];
        let r = ClassificationReport::from_labels("t", &["A", "B", "C"], &truth, &pred);
        let a = r.row("A").unwrap();
        assert!(close(a.precision, 0.75) && close(a.recall, 0.75) && close(a.f1, 0.75));
        let b = r.row("B").unwrap();
        assert!(close(b.precision, 2.0 / 3.0) && close(b.recall, 0.5) && close(b.f1, 4.0 / 7.0));
        let c = r.row("C").unwrap();
        assert!(close(c.precision, 0.6) && close(c.recall, 0.75) && close(c.f1, 2.0 / 3.0));
        let w = &r.weighted_avg;
        assert_eq!(w.support, 12);
        assert!(close(w.precision, 121.0 / 180.0));
        assert!(close(w.recall, 2.0 / 3.0));
        assert!(close(w.f1, 167.0 / 252.0));
    }

    #[test]
    fn unpredicted_class_has_zero_precision() {
        let r = ClassificationReport::from_labels("t", &["A", "B"], &[0, 1], &[0, 0]);
        assert_eq!(r.row("B").unwrap().precision, 0.0);
        assert_eq!(r.row("B").unwrap().f1, 0.0);
    }

    #[test]
    fn render_has_table_columns() {
        let r = ClassificationReport::from_labels("t", &["A", "B"], &[0, 1], &[0, 1]);
        let text = r.render();
        let header = text.lines().nth(1).unwrap();
        let cols: Vec<&str> = header.split("  ").map(str::trim).filter(|s| !s.is_empty()).collect();
        assert_eq!(cols, ["Class", "Precision", "Recall", "F-1 Score", "Support"]);
        assert!(text.lines().last().unwrap().starts_with("Weighted Avg."));
    }

    fn row(name: &str, desc: &str, label: ParamType) -> LabeledParam {
        LabeledParam {
            context: ParamContext {
                parameter_name: name.into(),
                command_name: "vm create".into(),
                module_name: "vm".into(),
                parameter_description: desc.into(),
                command_description: "Create a VM.".into(),
            },
            label,
        }
    }

    fn separable() -> Vec<LabeledParam> {
        let mut rows = Vec::new();
        for i in 0..9 {
            rows.push(row(&format!("name{i}"), "Display name", ParamType::String));
            rows.push(row("size", "Number of cores", ParamType::Integer));
            rows.push(row("source", "Path to the folder", ParamType::FolderFilePath));
        }
        rows.push(row("perm", "Permission letters", ParamType::PermissionFormats));
        rows
    }

    #[test]
    fn separable_data_scores_perfectly() {
        let params = ForestParams { tree_count: 10, min_samples_leaf: 1, ..ForestParams::default() };
        let cv = cross_validate(&separable(), 3, &params, 4).unwrap();
        assert_eq!(cv.unsupported, vec![ParamType::PermissionFormats]);
        for report in [&cv.stage1, &cv.stage2, &cv.pipeline] {
            for r in &report.rows {
                assert_eq!(r.f1, 1.0, "{}: {}", report.title, r.label);
            }
        }
        assert_eq!(cv.pipeline.weighted_avg.support, 27);
        assert_eq!(cv.stage2.weighted_avg.support, 18);
        let flat = cross_validate_single_stage(&separable(), 3, &params, 4).unwrap();
        assert_eq!(flat.weighted_avg.f1, 1.0);
    }

    #[test]
    fn folds_are_stratified_and_seeded() {
        let (rows, a, _) = stratified_folds(&separable(), 3, 1).unwrap();
        for label in [ParamType::String, ParamType::Integer] {
            let mut per_fold = [0; 3];
            for (p, &f) in rows.iter().zip(&a) {
                if p.label == label {
                    per_fold[f] += 1;
                }
            }
            assert_eq!(per_fold, [3, 3, 3]);
        }
        let mut shuffled = separable();
        shuffled.reverse();
        assert_eq!(stratified_folds(&shuffled, 3, 1).unwrap().1, a);
    }

    #[test]
    fn too_few_rows() {
        let data = vec![row("a", "", ParamType::String)];
        assert!(matches!(stratified_folds(&data, 3, 0), Err(ClassifierError::TooFewRows { rows: 0, folds: 3 })));
    }
}
