//! Per-document token and sentence views, computed once and shared by all
//! feature extractors.

use std::collections::{HashMap, HashSet};
use std::ops::Range;

use crate::corpus::{Document, Span};
use crate::text::{self, CharIndex, Token};

pub struct AnalyzedDocument<'a> {
    pub doc: &'a Document,
    pub tokens: Vec<Token>,
    /// Sentence spans; the whole text counts as one sentence when the
    /// document carries no sentence annotation.
    pub sentences: Vec<Span>,
    /// Token index range of each sentence: the tokens whose start offset
    /// falls inside the sentence span.
    pub sentence_ranges: Vec<Range<usize>>,
    pub term_frequencies: HashMap<String, u64>,
    pub chars: CharIndex,
}

impl<'a> AnalyzedDocument<'a> {
    pub fn new(doc: &'a Document) -> Self {
        let index = CharIndex::new(&doc.text);
        let tokens = text::tokenize(&doc.text);
        let sentences = if doc.sentences.is_empty() {
            if index.char_len() > 0 {
                vec![Span::new(0, index.char_len())]
            } else {
                Vec::new()
            }
        } else {
            doc.sentences.clone()
        };
        let sentence_ranges = sentences
            .iter()
            .map(|s| {
                let lo = tokens.partition_point(|t| t.start < s.start);
                let hi = tokens.partition_point(|t| t.start < s.end);
                lo..hi
            })
            .collect();
        let mut term_frequencies = HashMap::new();
        for t in &tokens {
            if !text::is_stopword(&t.text) {
                *term_frequencies.entry(t.text.clone()).or_insert(0) += 1;
            }
        }
        AnalyzedDocument {
            doc,
            tokens,
            sentences,
            sentence_ranges,
            term_frequencies,
            chars: index,
        }
    }

    pub fn sentence_tokens(&self, i: usize) -> &[Token] {
        &self.tokens[self.sentence_ranges[i].clone()]
    }

    /// Text of sentence `i`.
    pub fn sentence_text(&self, i: usize) -> &'a str {
        let s = self.sentences[i];
        self.chars.slice(&self.doc.text, s.start, s.end).unwrap_or_default()
    }

    pub fn token_count(&self) -> usize {
        self.tokens.len()
    }

    pub fn term_set(&self) -> HashSet<&str> {
        self.term_frequencies.keys().map(String::as_str).collect()
    }

    pub fn token_set(&self) -> HashSet<&str> {
        self.tokens.iter().map(|t| t.text.as_str()).collect()
    }

    /// True when `needle` occurs as a contiguous token run.
    pub fn contains_sequence(&self, needle: &[String]) -> bool {
        !needle.is_empty()
            && self
                .tokens
                .windows(needle.len())
                .any(|w| w.iter().zip(needle).all(|(t, n)| &t.text == n))
    }
}
