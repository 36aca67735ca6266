use std::collections::HashMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    fn from_overlap(overlap: usize, candidate: usize, reference: usize) -> Prf {
        let precision = if candidate == 0 { 0.0 } else { overlap as f64 / candidate as f64 };
        let recall = if reference == 0 { 0.0 } else { overlap as f64 / reference as f64 };
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        Prf { precision, recall, f1 }
    }

    fn perfect() -> Prf {
        Prf { precision: 1.0, recall: 1.0, f1: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RougeScore {
    pub r1: Prf,
    pub r2: Prf,
    pub rl: Prf,
    /// Set when the reference was empty; all recalls are then 0.
    pub empty_reference: bool,
}

fn ngrams<'a, T: AsRef<str>>(tokens: &'a [T], n: usize) -> HashMap<Vec<&'a str>, usize> {
    let mut out = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *out.entry(w.iter().map(AsRef::as_ref).collect()).or_default() += 1;
        }
    }
    out
}

fn ngram_prf<T: AsRef<str>>(candidate: &[T], reference: &[T], n: usize) -> Prf {
    let c = ngrams(candidate, n);
    let r = ngrams(reference, n);
    let c_total: usize = c.values().sum();
    let r_total: usize = r.values().sum();
    if c_total == 0 && r_total == 0 && !candidate.is_empty() && same(candidate, reference) {
        // Identical sequences too short to have n-grams.
        return Prf::perfect();
    }
    let overlap = c.iter().map(|(g, &k)| k.min(r.get(g).copied().unwrap_or(0))).sum();
    Prf::from_overlap(overlap, c_total, r_total)
}

fn same<T: AsRef<str>>(a: &[T], b: &[T]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.as_ref() == y.as_ref())
}

/// Length of the longest common subsequence.
pub fn lcs_len<T: AsRef<str>>(a: &[T], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x.as_ref() == y.as_ref() { prev[j] + 1 } else { cur[j].max(prev[j + 1]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// ROUGE-1, ROUGE-2 and ROUGE-L (LCS, beta = 1). Precision is measured
/// against the candidate length, recall against the reference length.
pub fn rouge<T: AsRef<str>>(candidate: &[T], reference: &[T]) -> RougeScore {
    RougeScore {
        r1: ngram_prf(candidate, reference, 1),
        r2: ngram_prf(candidate, reference, 2),
        rl: Prf::from_overlap(lcs_len(candidate, reference), candidate.len(), reference.len()),
        empty_reference: reference.is_empty(),
    }
}

/// [`rouge`] on whitespace-split text.
pub fn rouge_text(candidate: &str, reference: &str) -> RougeScore {
    let c: Vec<&str> = candidate.split_whitespace().collect();
    let r: Vec<&str> = reference.split_whitespace().collect();
    rouge(&c, &r)
}
