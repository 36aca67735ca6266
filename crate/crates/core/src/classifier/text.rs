//! Text normalization for the bag-of-words features.

use unicode_normalization::UnicodeNormalization;

/// Fixed stop-word table. Exactly fifty entries.
pub const STOP_WORDS: [&str; 50] = [
    "a", "an", "the", "of", "to", "in", "for", "on", "at", "by", //
    "with", "from", "and", "or", "is", "are", "be", "been", "was", "were", //
    "it", "its", "this", "that", "these", "those", "as", "if", "not", "can", //
    "will", "should", "may", "which", "when", "where", "who", "what", "how", "than", //
    "then", "into", "only", "also", "any", "such", "other", "do", "does", "their",
];

pub fn is_stop_word(word: &str) -> bool {
    STOP_WORDS.contains(&word)
}

/// Lowercases, folds accents, drops remaining non-ASCII and punctuation,
/// removes stop words and stems what is left.
pub fn preprocess(text: &str) -> Vec<String> {
    let ascii: String = text
        .nfd()
        .filter(char::is_ascii)
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { ' ' })
        .collect();
    ascii.split_whitespace().filter(|w| !is_stop_word(w)).map(stem).collect()
}

fn is_consonant(word: &[u8], i: usize) -> bool {
    match word[i] {
        b'a' | b'e' | b'i' | b'o' | b'u' => false,
        b'y' => i == 0 || !is_consonant(word, i - 1),
        _ => true,
    }
}

/// Number of vowel-consonant sequences in `word`.
fn measure(word: &[u8]) -> usize {
    let mut m = 0;
    let mut prev_vowel = false;
    for i in 0..word.len() {
        let consonant = is_consonant(word, i);
        if consonant && prev_vowel {
            m += 1;
        }
        prev_vowel = !consonant;
    }
    m
}

fn has_vowel(word: &[u8]) -> bool {
    (0..word.len()).any(|i| !is_consonant(word, i))
}

/// Ends consonant-vowel-consonant, the last not w, x or y.
fn ends_cvc(word: &[u8]) -> bool {
    let n = word.len();
    n >= 3
        && is_consonant(word, n - 3)
        && !is_consonant(word, n - 2)
        && is_consonant(word, n - 1)
        && !matches!(word[n - 1], b'w' | b'x' | b'y')
}

fn undouble(stem: &str) -> &str {
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 2 && b[n - 1] == b[n - 2] && is_consonant(b, n - 1) && !matches!(b[n - 1], b'l' | b's' | b'z') {
        &stem[..n - 1]
    } else {
        stem
    }
}

/// Suffix-stripping stemmer. Rules, applied in this order:
///
/// 1. plurals: `sses`->`ss`, `ies`->`y`, `es` after s/x/z/ch/sh, bare `s`
///    (not after `s`, `u` or `i`);
/// 2. at most one of `ing`, `ed` (stem must keep a vowel, doubled final
///    consonant undone) or `tion`->`t`;
/// 3. a final `e` goes when the remaining stem has measure > 1, or measure 1
///    without a consonant-vowel-consonant ending.
pub fn stem(word: &str) -> String {
    if !word.is_ascii() || word.len() <= 3 {
        return word.to_string();
    }
    let mut w: String = if let Some(s) = word.strip_suffix("sses") {
        format!("{s}ss")
    } else if let Some(s) = word.strip_suffix("ies").filter(|s| s.len() >= 2) {
        format!("{s}y")
    } else if let Some(s) =
        word.strip_suffix("es").filter(|s| s.ends_with(['s', 'x', 'z']) || s.ends_with("ch") || s.ends_with("sh"))
    {
        s.to_string()
    } else if word.ends_with('s') && !word.ends_with("ss") && !word.ends_with("us") && !word.ends_with("is") {
        word[..word.len() - 1].to_string()
    } else {
        word.to_string()
    };

    if let Some(s) = w.strip_suffix("ing").filter(|s| s.len() >= 3 && has_vowel(s.as_bytes())) {
        w = undouble(s).to_string();
    } else if let Some(s) = w.strip_suffix("ed").filter(|s| s.len() >= 3 && has_vowel(s.as_bytes())) {
        w = undouble(s).to_string();
    } else if let Some(s) = w.strip_suffix("tion").filter(|s| s.len() >= 2) {
        w = format!("{s}t");
    }

    if let Some(s) = w.strip_suffix('e') {
        let b = s.as_bytes();
        let m = measure(b);
        if m > 1 || (m == 1 && !ends_cvc(b)) {
            w = s.to_string();
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stop_list_has_fifty_unique_words() {
        let set: std::collections::HashSet<_> = STOP_WORDS.iter().collect();
        assert_eq!(set.len(), 50);
    }

    #[test]
    fn web_app_description() {
        assert_eq!(preprocess("Name of the Web App."), vec!["name", "web", "app"]);
    }

    #[test]
    fn empty_text() {
        assert!(preprocess("").is_empty());
        assert!(preprocess("  ... ").is_empty());
    }

    #[test]
    fn accented_text_folds_and_stems() {
        assert_eq!(preprocess("Résumé files"), vec!["resum", "file"]);
    }

    #[test]
    fn kebab_case_splits_into_words() {
        assert_eq!(preprocess("resource-group"), vec!["resourc", "group"]);
        assert_eq!(preprocess("--ip-address"), vec!["ip", "address"]);
    }

    #[test]
    fn stemmer_rules() {
        let cases = [
            ("files", "file"),
            ("names", "name"),
            ("addresses", "address"),
            ("policies", "policy"),
            ("boxes", "box"),
            ("keys", "key"),
            ("status", "status"),
            ("running", "run"),
            ("created", "creat"),
            ("creation", "creat"),
            ("update", "updat"),
            ("updated", "updat"),
            ("state", "state"),
            ("image", "imag"),
            ("app", "app"),
        ];
        for (word, want) in cases {
            assert_eq!(stem(word), want, "{word}");
        }
    }

    #[test]
    fn measure_matches_porter_examples() {
        for (w, m) in [("tr", 0), ("ee", 0), ("tree", 0), ("trouble", 1), ("oats", 1), ("troubles", 2), ("private", 2)]
        {
            assert_eq!(measure(w.as_bytes()), m, "{w}");
        }
    }
}
