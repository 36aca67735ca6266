use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AugmentError;
use crate::filler::shell_quote;
use crate::miner::{MinedExample, POSITIONAL_SLOT};

pub const MASK: &str = "<MASK>";

/// Largest parameter count for which every subset is enumerated.
pub const MAX_PERMUTATION_PARAMS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskedPair {
    pub input: Vec<String>,
    pub target: Vec<String>,
}

impl MaskedPair {
    pub fn sentinel_count(&self) -> usize {
        self.input.iter().filter(|t| *t == MASK).count()
    }

    /// Masked spans, in order.
    pub fn spans(&self) -> Vec<&[String]> {
        self.target.split(|t| t == MASK).collect()
    }

    /// The original sequence, or `None` when sentinels and spans disagree.
    pub fn reconstruct(&self) -> Option<Vec<String>> {
        let spans = self.spans();
        if spans.len() != self.sentinel_count() || spans.iter().any(|s| s.is_empty()) {
            return None;
        }
        let mut spans = spans.into_iter();
        let mut out = Vec::new();
        for t in &self.input {
            if t == MASK {
                out.extend(spans.next()?.iter().cloned());
            } else {
                out.push(t.clone());
            }
        }
        Some(out)
    }

    fn from_spans(tokens: &[String], spans: &[(usize, usize)]) -> MaskedPair {
        let mut input = Vec::new();
        let mut target = Vec::new();
        let mut pos = 0;
        for (i, &(start, len)) in spans.iter().enumerate() {
            input.extend_from_slice(&tokens[pos..start]);
            input.push(MASK.to_string());
            if i > 0 {
                target.push(MASK.to_string());
            }
            target.extend_from_slice(&tokens[start..start + len]);
            pos = start + len;
        }
        input.extend_from_slice(&tokens[pos..]);
        MaskedPair { input, target }
    }
}

/// One exported training record: space-joined input and target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub input: String,
    pub target: String,
}

impl From<&MaskedPair> for DatasetRecord {
    fn from(p: &MaskedPair) -> Self {
        DatasetRecord { input: p.input.join(" "), target: p.target.join(" ") }
    }
}

pub fn write_dataset(pairs: &[MaskedPair]) -> String {
    let mut out = String::new();
    for p in pairs {
        out.push_str(&serde_json::to_string(&DatasetRecord::from(p)).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// Token sequence of a mined example plus the positions of its value tokens,
/// keyed by parameter name.
pub fn example_tokens(ex: &MinedExample, prefix: &str) -> (Vec<String>, Vec<(String, usize)>) {
    let mut tokens: Vec<String> =
        std::iter::once(prefix).chain(ex.command.split_whitespace()).map(str::to_string).collect();
    let mut values = Vec::new();
    for arg in &ex.arguments {
        if arg.name == POSITIONAL_SLOT {
            if let Some(v) = &arg.value {
                tokens.push(shell_quote(v, arg.quoted));
            }
            continue;
        }
        tokens.push(format!("--{}", arg.name));
        if let Some(v) = &arg.value {
            values.push((arg.name.clone(), tokens.len()));
            tokens.push(shell_quote(v, arg.quoted));
        }
    }
    (tokens, values)
}

/// Every non-empty subset of parameter values masked, in binary counting
/// order. Bit `i` stands for the `i`-th valued parameter by name; parameter
/// names stay visible.
pub fn finetune_permutations(ex: &MinedExample, prefix: &str) -> Result<Vec<MaskedPair>, AugmentError> {
    let (tokens, mut values) = example_tokens(ex, prefix);
    if tokens.iter().any(|t| t == MASK) {
        return Err(AugmentError::SentinelInInput);
    }
    let n = values.len();
    if n == 0 {
        return Err(AugmentError::NoParameters);
    }
    if n > MAX_PERMUTATION_PARAMS {
        return Err(AugmentError::TooManyParameters { n, max: MAX_PERMUTATION_PARAMS });
    }
    values.sort();
    let mut pairs = Vec::with_capacity((1usize << n) - 1);
    for subset in 1u32..(1u32 << n) {
        let mut spans: Vec<(usize, usize)> =
            (0..n).filter(|&i| subset & (1 << i) != 0).map(|i| (values[i].1, 1)).collect();
        spans.sort_unstable();
        pairs.push(MaskedPair::from_spans(&tokens, &spans));
    }
    Ok(pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpanMaskConfig {
    pub mask_fraction: f64,
    pub mean_span: f64,
}

impl Default for SpanMaskConfig {
    fn default() -> Self {
        SpanMaskConfig { mask_fraction: 0.15, mean_span: 3.0 }
    }
}

fn geometric(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    if mean <= 1.0 {
        return 1;
    }
    let p = 1.0 / mean;
    let u: f64 = 1.0 - rng.gen::<f64>();
    1 + (u.ln() / (1.0 - p).ln()).floor() as usize
}

/// Replaces `round(n * mask_fraction)` tokens (at least one) with sentinels,
/// grouped into spans of geometrically distributed length. Masked spans
/// are never adjacent, so each sentinel covers exactly one span.
pub fn span_mask(tokens: &[String], cfg: &SpanMaskConfig, seed: u64) -> Result<MaskedPair, AugmentError> {
    if !(cfg.mask_fraction > 0.0 && cfg.mask_fraction < 1.0) {
        return Err(AugmentError::InvalidFraction(cfg.mask_fraction));
    }
    if tokens.is_empty() {
        return Err(AugmentError::EmptyLine);
    }
    if tokens.iter().any(|t| t == MASK) {
        return Err(AugmentError::SentinelInInput);
    }
    let n = tokens.len();
    let masked = ((n as f64 * cfg.mask_fraction).round() as usize).clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut lengths = Vec::new();
    let mut left = masked;
    while left > 0 {
        let len = geometric(&mut rng, cfg.mean_span).min(left);
        lengths.push(len);
        left -= len;
    }
    let unmasked = n - masked;
    while lengths.len() > unmasked + 1 {
        let last = lengths.pop().unwrap();
        *lengths.last_mut().unwrap() += last;
    }
    let k = lengths.len();
    let mut gaps = vec![0usize; k + 1];
    for g in gaps.iter_mut().take(k).skip(1) {
        *g = 1;
    }
    for _ in 0..unmasked - (k - 1) {
        gaps[rng.gen_range(0..=k)] += 1;
    }
    let mut spans = Vec::with_capacity(k);
    let mut pos = 0;
    for (i, &len) in lengths.iter().enumerate() {
        pos += gaps[i];
        spans.push((pos, len));
        pos += len;
    }
    Ok(MaskedPair::from_spans(tokens, &spans))
}

/// Span-masked pretraining pairs; line `i` uses seed `seed + i`. Lines that
/// cannot be masked (empty, or containing the sentinel) are skipped.
pub fn pretraining_dataset(lines: &[Vec<String>], cfg: &SpanMaskConfig, seed: u64) -> Vec<MaskedPair> {
    lines
        .par_iter()
        .enumerate()
        .filter_map(|(i, line)| span_mask(line, cfg, seed.wrapping_add(i as u64)).ok())
        .collect()
}

/// Fine-tuning pairs for a corpus. Examples without valued parameters or
/// above the permutation guard are skipped and counted.
pub fn finetune_dataset(examples: &[MinedExample], prefix: &str) -> (Vec<MaskedPair>, usize) {
    let results: Vec<_> = examples.par_iter().map(|e| finetune_permutations(e, prefix)).collect();
    let mut pairs = Vec::new();
    let mut skipped = 0;
    for r in results {
        match r {
            Ok(p) => pairs.extend(p),
            Err(AugmentError::TooManyParameters { n, .. }) => {
                log::warn!("skipping example with {n} parameters; sample subsets instead");
                skipped += 1;
            }
            Err(_) => skipped += 1,
        }
    }
    (pairs, skipped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::miner::Argument;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn example(args: &[(&str, &str)]) -> MinedExample {
        MinedExample {
            source_id: "d".into(),
            command: "vm create".into(),
            arguments: args.iter().map(|(n, v)| Argument::value(n, v, false)).collect(),
            line: String::new(),
        }
    }

    #[test]
    fn two_parameters_give_three_pairs() {
        let ex = example(&[("name", "MyVM"), ("image", "UbuntuLTS")]);
        let pairs = finetune_permutations(&ex, "az").unwrap();
        let inputs: Vec<String> = pairs.iter().map(|p| p.input.join(" ")).collect();
        // bit 0 = image, bit 1 = name (sorted by name)
        assert_eq!(
            inputs,
            vec![
                "az vm create --name MyVM --image <MASK>",
                "az vm create --name <MASK> --image UbuntuLTS",
                "az vm create --name <MASK> --image <MASK>",
            ]
        );
        assert_eq!(pairs[2].target, toks("MyVM <MASK> UbuntuLTS"));
    }

    #[test]
    fn three_parameters_give_seven_reconstructible_pairs() {
        let ex = example(&[("a", "1"), ("b", "two words"), ("c", "3")]);
        let (tokens, _) = example_tokens(&ex, "az");
        let pairs = finetune_permutations(&ex, "az").unwrap();
        assert_eq!(pairs.len(), 7);
        let mut seen = std::collections::HashSet::new();
        for p in &pairs {
            assert_eq!(p.reconstruct().as_ref(), Some(&tokens));
            assert!(seen.insert(p.input.clone()));
        }
        assert_eq!(tokens[6], "\"two words\"");
    }

    #[test]
    fn one_parameter_and_guards() {
        assert_eq!(finetune_permutations(&example(&[("a", "1")]), "az").unwrap().len(), 1);
        assert!(matches!(finetune_permutations(&example(&[]), "az"), Err(AugmentError::NoParameters)));
        let names: Vec<String> = (0..21).map(|i| format!("p{i}")).collect();
        let args: Vec<(&str, &str)> = names.iter().map(|n| (n.as_str(), "v")).collect();
        assert!(matches!(
            finetune_permutations(&example(&args), "az"),
            Err(AugmentError::TooManyParameters { n: 21, .. })
        ));
    }

    #[test]
    fn positional_and_flags_stay_visible() {
        let mut ex = example(&[("name", "x")]);
        ex.arguments.insert(0, Argument::value(POSITIONAL_SLOT, "pos", false));
        ex.arguments.push(Argument::flag("no-wait"));
        let pairs = finetune_permutations(&ex, "az").unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].input.join(" "), "az vm create pos --name <MASK> --no-wait");
    }

    #[test]
    fn single_short_span() {
        let line = toks("a b c d e f g h i j");
        let cfg = SpanMaskConfig { mask_fraction: 0.05, mean_span: 3.0 };
        let p = span_mask(&line, &cfg, 1).unwrap();
        assert_eq!(p.sentinel_count(), 1);
        assert_eq!(p.target.len(), 1);
        assert_eq!(p.reconstruct().unwrap(), line);
    }

    #[test]
    fn span_mask_is_deterministic() {
        let line = toks("az vm create --name MyVM --image UbuntuLTS --size Standard_DS1 --no-wait");
        let cfg = SpanMaskConfig::default();
        assert_eq!(span_mask(&line, &cfg, 9).unwrap(), span_mask(&line, &cfg, 9).unwrap());
    }

    #[test]
    fn span_mask_rejects_bad_input() {
        let cfg = SpanMaskConfig { mask_fraction: 1.0, mean_span: 2.0 };
        assert!(span_mask(&toks("a b"), &cfg, 0).is_err());
        assert!(span_mask(&[], &SpanMaskConfig::default(), 0).is_err());
        assert!(span_mask(&toks("a <MASK> b"), &SpanMaskConfig::default(), 0).is_err());
    }

    #[test]
    fn dataset_records_join_tokens() {
        let p = MaskedPair { input: toks("az vm <MASK>"), target: toks("create") };
        assert_eq!(write_dataset(&[p]), "{\"input\":\"az vm <MASK>\",\"target\":\"create\"}\n");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn span_mask_round_trips(words in prop::collection::vec("[a-z]{1,5}", 1..40),
                                     frac in 0.01f64..0.99, mean in 1.0f64..6.0, seed in any::<u64>()) {
                let cfg = SpanMaskConfig { mask_fraction: frac, mean_span: mean };
                let p = span_mask(&words, &cfg, seed).unwrap();
                prop_assert_eq!(p.reconstruct(), Some(words.clone()));
                prop_assert_eq!(p.sentinel_count(), p.spans().len());
                let masked = p.target.iter().filter(|t| *t != MASK).count();
                prop_assert_eq!(masked, ((words.len() as f64 * frac).round() as usize).clamp(1, words.len()));
            }
        }
    }
}
