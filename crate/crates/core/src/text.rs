//! Shared tokenizer, stopword list and bag-of-words similarity helpers.
//!
//! Every lexical feature in the crate goes through [`tokenize`]: text is
//! lowercased and split on any character that is not a letter or digit,
//! empty pieces are dropped. Offsets are counted in Unicode scalar values.

use std::collections::{BTreeMap, HashMap, HashSet};

/// Bumped whenever [`STOPWORDS`] changes; persisted artifacts record it.
pub const STOPWORDS_VERSION: &str = "en-1";

/// Fixed English stopword list (sorted, lowercase).
pub const STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
    "by", "can", "could", "d", "de", "did", "do", "does", "doing", "down", "during", "each", "few",
    "for", "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers",
    "herself", "him", "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its",
    "itself", "just", "ll", "m", "me", "more", "most", "my", "myself", "no", "nor", "not", "now",
    "o", "of", "off", "on", "once", "only", "or", "other", "our", "ours", "ourselves", "out",
    "over", "own", "re", "s", "same", "she", "should", "so", "some", "such", "t", "than", "that",
    "the", "their", "theirs", "them", "themselves", "then", "there", "these", "they", "this",
    "those", "through", "to", "too", "under", "until", "up", "ve", "very", "was", "we", "were",
    "what", "when", "where", "which", "while", "who", "whom", "why", "will", "with", "would", "y",
    "you", "your", "yours", "yourself", "yourselves",
];

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.binary_search(&token).is_ok()
}

/// A token with its character span in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut start = 0;
    let mut pos = 0;
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            if current.is_empty() {
                start = pos;
            }
            current.extend(ch.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(Token {
                text: std::mem::take(&mut current),
                start,
                end: pos,
            });
        }
        pos += 1;
    }
    if !current.is_empty() {
        tokens.push(Token {
            text: current,
            start,
            end: pos,
        });
    }
    tokens
}

/// Token strings only.
pub fn words(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(|t| t.text).collect()
}

/// Term frequencies of the non-stopword tokens of `text`.
pub fn term_frequencies(text: &str) -> HashMap<String, u64> {
    let mut tf = HashMap::new();
    for token in tokenize(text) {
        if !is_stopword(&token.text) {
            *tf.entry(token.text).or_insert(0) += 1;
        }
    }
    tf
}

/// Number of maximal runs of consecutive non-stopword tokens.
pub fn chunk_count(tokens: &[Token]) -> usize {
    let mut chunks = 0;
    let mut in_chunk = false;
    for token in tokens {
        let content = !is_stopword(&token.text);
        if content && !in_chunk {
            chunks += 1;
        }
        in_chunk = content;
    }
    chunks
}

pub fn norm<'a>(weights: impl IntoIterator<Item = &'a u64>) -> f64 {
    weights
        .into_iter()
        .map(|&w| (w as f64) * (w as f64))
        .sum::<f64>()
        .sqrt()
}

/// Cosine between a sparse query bag and a sparse ordered bag with a known norm.
pub fn cosine_with(query: &HashMap<String, u64>, target: &BTreeMap<String, u64>, target_norm: f64) -> f64 {
    let query_norm = norm(query.values());
    if query_norm == 0.0 || target_norm == 0.0 {
        return 0.0;
    }
    let dot: f64 = query
        .iter()
        .filter_map(|(term, &w)| target.get(term).map(|&v| (w as f64) * (v as f64)))
        .sum();
    (dot / (query_norm * target_norm)).clamp(0.0, 1.0)
}

pub fn cosine(a: &HashMap<String, u64>, b: &HashMap<String, u64>) -> f64 {
    let (na, nb) = (norm(a.values()), norm(b.values()));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let dot: f64 = small
        .iter()
        .filter_map(|(term, &w)| large.get(term).map(|&v| (w as f64) * (v as f64)))
        .sum();
    (dot / (na * nb)).clamp(0.0, 1.0)
}

/// Jaccard similarity of the two term sets; 0 when both are empty.
pub fn jaccard<K: Eq + std::hash::Hash>(a: &HashSet<K>, b: &HashSet<K>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Lowercases, trims and collapses internal whitespace.
pub fn normalize_heading(raw: &str) -> String {
    raw.split_whitespace()
        .map(|w| w.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Maps character offsets of a string to byte offsets.
#[derive(Debug, Clone)]
pub struct CharIndex {
    byte_offsets: Vec<usize>,
}

impl CharIndex {
    pub fn new(text: &str) -> Self {
        let mut byte_offsets: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        byte_offsets.push(text.len());
        CharIndex { byte_offsets }
    }

    pub fn char_len(&self) -> usize {
        self.byte_offsets.len() - 1
    }

    /// Slice `[start, end)` in characters; `None` when out of range.
    pub fn slice<'a>(&self, text: &'a str, start: usize, end: usize) -> Option<&'a str> {
        if start > end || end > self.char_len() {
            return None;
        }
        Some(&text[self.byte_offsets[start]..self.byte_offsets[end]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stopwords_sorted_and_unique() {
        assert!(STOPWORDS.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn tokenizer_splits_and_lowercases() {
        let tokens = tokenize("Anne Blair met Bob. Blair's 2012-05-03!");
        let texts: Vec<_> = tokens.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(
            texts,
            ["anne", "blair", "met", "bob", "blair", "s", "2012", "05", "03"]
        );
        assert_eq!((tokens[1].start, tokens[1].end), (5, 10));
    }

    #[test]
    fn tokenizer_counts_chars_not_bytes() {
        let tokens = tokenize("Zoë Ünal x");
        assert_eq!(tokens[0].text, "zoë");
        assert_eq!((tokens[1].start, tokens[1].end), (4, 8));
        assert_eq!(tokens[2].start, 9);
    }

    #[test]
    fn profile_length_example() {
        assert_eq!(tokenize("Anne Blair is a judge").len(), 5);
    }

    #[test]
    fn chunks_are_runs_of_content_words() {
        // [anne blair] is a [judge] in [seattle]
        assert_eq!(chunk_count(&tokenize("Anne Blair is a judge in Seattle")), 3);
        assert_eq!(chunk_count(&tokenize("of the and")), 0);
    }

    #[test]
    fn cosine_hand_value() {
        let doc: HashMap<_, _> = [("coached".to_string(), 1)].into_iter().collect();
        let aspect: BTreeMap<_, _> = [("coached".to_string(), 2), ("football".to_string(), 1)]
            .into_iter()
            .collect();
        let c = cosine_with(&doc, &aspect, norm(aspect.values()));
        assert!((c - 2.0 / 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn jaccard_basic() {
        let a: HashSet<_> = ["x", "y"].into_iter().collect();
        let b: HashSet<_> = ["y", "z"].into_iter().collect();
        assert!((jaccard(&a, &b) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(jaccard::<&str>(&HashSet::new(), &HashSet::new()), 0.0);
    }

    #[test]
    fn heading_normalization() {
        assert_eq!(normalize_heading("  Early   Life\t"), "early life");
    }

    #[test]
    fn char_index_slices_multibyte() {
        let text = "naïve café";
        let idx = CharIndex::new(text);
        assert_eq!(idx.char_len(), 10);
        assert_eq!(idx.slice(text, 6, 10), Some("café"));
        assert_eq!(idx.slice(text, 6, 11), None);
    }
}
