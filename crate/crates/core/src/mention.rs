//! Full and partial mentions of a target entity and their positions.
//!
//! A full mention is a case-insensitive contiguous token match of any alias
//! (longest alias wins, matches do not overlap). A partial mention is a
//! single token equal to one of the canonical name's tokens, provided that
//! token has at least two characters, is not a stopword and does not sit
//! inside a counted full mention. Positions are token indices.

use std::collections::HashSet;

use crate::analyzed::AnalyzedDocument;
use crate::corpus::{Document, Span};
use crate::entity::EntityTopic;
use crate::error::{Error, Result};
use crate::text;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MentionStats {
    pub num_full: usize,
    pub num_partial: usize,
    pub fpos_full: i64,
    pub lpos_full: i64,
    pub lpos_part: i64,
    /// Last minus first position over full and partial mentions.
    pub spread: usize,
    /// Last minus first position over full mentions only.
    pub spread_full: usize,
    pub fpos_full_n: f64,
    pub lpos_full_n: f64,
    pub lpos_part_n: f64,
    pub spread_n: f64,
    pub spread_full_n: f64,
    pub num_sent: usize,
}

impl MentionStats {
    pub fn total(&self) -> usize {
        self.num_full + self.num_partial
    }
}

/// Compiled alias and name-token sets for one topic.
#[derive(Debug, Clone)]
pub struct NameMatcher {
    /// Tokenized aliases, longest first, then lexicographic.
    aliases: Vec<Vec<String>>,
    canonical: Vec<String>,
    partial_tokens: HashSet<String>,
}

impl NameMatcher {
    pub fn new(topic: &EntityTopic) -> Result<Self> {
        let canonical = text::words(&topic.canonical_name);
        if canonical.is_empty() {
            return Err(Error::InvalidTopic {
                entity_id: topic.entity_id.clone(),
                reason: "canonical name has no tokens".into(),
            });
        }
        let mut aliases: Vec<Vec<String>> = topic
            .aliases
            .iter()
            .map(|a| text::words(a))
            .filter(|a| !a.is_empty())
            .collect();
        aliases.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        aliases.dedup();
        let partial_tokens = canonical
            .iter()
            .filter(|t| t.chars().count() >= 2 && !text::is_stopword(t))
            .cloned()
            .collect();
        Ok(NameMatcher {
            aliases,
            canonical,
            partial_tokens,
        })
    }

    pub fn canonical_tokens(&self) -> &[String] {
        &self.canonical
    }

    /// Token ranges `[start, end)` of full mentions, leftmost-longest.
    pub fn full_matches(&self, tokens: &[text::Token]) -> Vec<(usize, usize)> {
        let mut found = Vec::new();
        let mut i = 0;
        'scan: while i < tokens.len() {
            for alias in &self.aliases {
                let end = i + alias.len();
                if end <= tokens.len() && tokens[i..end].iter().zip(alias).all(|(t, a)| &t.text == a) {
                    found.push((i, end));
                    i = end;
                    continue 'scan;
                }
            }
            i += 1;
        }
        found
    }

    /// Whether the document contains the full canonical name.
    pub fn passes_prefilter(&self, doc: &AnalyzedDocument<'_>) -> bool {
        doc.contains_sequence(&self.canonical)
    }

    pub fn stats(&self, doc: &AnalyzedDocument<'_>) -> MentionStats {
        let tokens = &doc.tokens;
        let full = self.full_matches(tokens);
        let mut covered = vec![false; tokens.len()];
        for &(s, e) in &full {
            covered[s..e].iter_mut().for_each(|c| *c = true);
        }
        let partial: Vec<usize> = tokens
            .iter()
            .enumerate()
            .filter(|(i, t)| !covered[*i] && self.partial_tokens.contains(&t.text))
            .map(|(i, _)| i)
            .collect();

        let mut stats = MentionStats {
            num_full: full.len(),
            num_partial: partial.len(),
            fpos_full: full.first().map_or(-1, |m| m.0 as i64),
            lpos_full: full.last().map_or(-1, |m| m.0 as i64),
            lpos_part: partial.last().map_or(-1, |&p| p as i64),
            ..Default::default()
        };

        let positions = full.iter().map(|m| m.0).chain(partial.iter().copied());
        let (lo, hi) = positions.fold((usize::MAX, 0), |(lo, hi), p| (lo.min(p), hi.max(p)));
        if stats.total() > 0 {
            stats.spread = hi - lo;
        }
        if let (Some(f), Some(l)) = (full.first(), full.last()) {
            stats.spread_full = l.0 - f.0;
        }

        let n = tokens.len() as f64;
        if stats.total() > 0 {
            let norm = |p: i64| if p < 0 { 0.0 } else { p as f64 / n };
            stats.fpos_full_n = norm(stats.fpos_full);
            stats.lpos_full_n = norm(stats.lpos_full);
            stats.lpos_part_n = norm(stats.lpos_part);
            stats.spread_n = stats.spread as f64 / n;
            stats.spread_full_n = stats.spread_full as f64 / n;
        }

        let spans: Vec<Span> = full
            .iter()
            .map(|&(s, e)| Span::new(tokens[s].start, tokens[e - 1].end))
            .chain(partial.iter().map(|&p| Span::new(tokens[p].start, tokens[p].end)))
            .collect();
        stats.num_sent = doc
            .sentences
            .iter()
            .filter(|s| spans.iter().any(|m| s.overlaps(m)))
            .count();
        stats
    }

    /// Distinct canonical tokens present in the document over distinct
    /// canonical tokens.
    pub fn name_fraction(&self, doc: &AnalyzedDocument<'_>) -> f64 {
        let name: HashSet<&str> = self.canonical.iter().map(String::as_str).collect();
        let present = doc.token_set();
        name.iter().filter(|t| present.contains(*t)).count() as f64 / name.len() as f64
    }
}

pub fn find_mentions(doc: &Document, topic: &EntityTopic) -> Result<MentionStats> {
    let matcher = NameMatcher::new(topic)?;
    Ok(matcher.stats(&AnalyzedDocument::new(doc)))
}

pub fn name_fraction(doc: &Document, topic: &EntityTopic) -> f64 {
    match NameMatcher::new(topic) {
        Ok(m) => m.name_fraction(&AnalyzedDocument::new(doc)),
        Err(_) => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Source;
    use crate::entity::{EntityType, Profile};
    use proptest::prelude::*;

    fn doc(text: &str) -> Document {
        Document {
            doc_id: "d".into(),
            stream_time: 0,
            source: Source::News,
            language: "en".into(),
            text: text.into(),
            sentences: vec![],
            mentions: vec![],
            relations: vec![],
        }
    }

    fn topic(canonical: &str, aliases: &[&str]) -> EntityTopic {
        let mut all: Vec<String> = aliases.iter().map(|s| s.to_string()).collect();
        all.push(canonical.into());
        EntityTopic {
            entity_id: "e".into(),
            canonical_name: canonical.into(),
            aliases: all,
            entity_type: EntityType::Per,
            profile: Profile::null(),
            related_entities: vec![],
            train_cutoff: 0,
        }
    }

    /// Independent scan: count alias occurrences greedily by re-tokenizing
    /// with a plain split.
    fn naive_full_count(text: &str, alias: &str) -> usize {
        let toks: Vec<String> = text
            .split(|c: char| !c.is_alphanumeric())
            .filter(|s| !s.is_empty())
            .map(|s| s.to_lowercase())
            .collect();
        let a: Vec<String> = alias.split_whitespace().map(|s| s.to_lowercase()).collect();
        let mut i = 0;
        let mut n = 0;
        while i + a.len() <= toks.len() {
            if toks[i..i + a.len()] == a[..] {
                n += 1;
                i += a.len();
            } else {
                i += 1;
            }
        }
        n
    }

    #[test]
    fn worked_example() {
        let d = doc("Anne Blair met Bob. Blair smiled.");
        let s = find_mentions(&d, &topic("Anne Blair", &[])).unwrap();
        // tokens: anne(0) blair(1) met(2) bob(3) blair(4) smiled(5)
        assert_eq!(s.num_full, naive_full_count(&d.text, "Anne Blair"));
        assert_eq!((s.num_full, s.num_partial), (1, 1));
        assert_eq!((s.fpos_full, s.lpos_full, s.lpos_part), (0, 0, 4));
        assert_eq!(s.spread, 4);
        assert_eq!(s.spread_full, 0);
        assert!((s.spread_n - 4.0 / 6.0).abs() < 1e-15);
        assert_eq!(s.num_sent, 1);
    }

    #[test]
    fn num_sent_counts_annotated_sentences() {
        let mut d = doc("Anne Blair met Bob. Blair smiled. Nothing here.");
        d.sentences = vec![Span::new(0, 19), Span::new(20, 33), Span::new(34, 47)];
        let s = find_mentions(&d, &topic("Anne Blair", &[])).unwrap();
        assert_eq!(s.num_sent, 2);
    }

    #[test]
    fn no_occurrence() {
        let s = find_mentions(&doc("Nothing to see here."), &topic("Anne Blair", &[])).unwrap();
        assert_eq!((s.num_full, s.num_partial), (0, 0));
        assert_eq!((s.fpos_full, s.lpos_full, s.lpos_part), (-1, -1, -1));
        assert_eq!(s.spread, 0);
        assert_eq!(s.fpos_full_n, 0.0);
    }

    #[test]
    fn case_insensitive_full_matches() {
        let text = "anne blair ANNE BLAIR";
        let s = find_mentions(&doc(text), &topic("Anne Blair", &[])).unwrap();
        assert_eq!(s.num_full, 2);
        assert_eq!(s.num_full, naive_full_count(text, "anne blair"));
        assert_eq!(s.num_partial, 0);
    }

    #[test]
    fn aliases_count_as_full_mentions() {
        let s = find_mentions(
            &doc("Judge Blair ruled. Anne Blair left."),
            &topic("Anne Blair", &["Judge Blair"]),
        )
        .unwrap();
        assert_eq!((s.num_full, s.num_partial), (2, 0));
    }

    #[test]
    fn stopword_and_short_name_tokens_are_not_partials() {
        let t = topic("Bank of A America", &[]);
        let s = find_mentions(&doc("a bank of a kind in America"), &t).unwrap();
        // only "bank" and "america" qualify
        assert_eq!(s.num_partial, 2);
    }

    #[test]
    fn empty_canonical_name_is_invalid() {
        let t = topic("  ", &[]);
        assert!(matches!(find_mentions(&doc("x"), &t), Err(Error::InvalidTopic { .. })));
    }

    #[test]
    fn name_fraction_examples() {
        let t = topic("Anne Blair", &[]);
        assert_eq!(name_fraction(&doc("Anne Blair spoke"), &t), 1.0);
        assert_eq!(name_fraction(&doc("only blair spoke"), &t), 0.5);
        assert_eq!(name_fraction(&doc("nobody spoke"), &t), 0.0);
    }

    proptest! {
        #[test]
        fn invariants_hold(words in proptest::collection::vec(
            prop_oneof!["anne", "blair", "Anne Blair", "met", "bob", "the", "x"], 0..30)
        ) {
            let text = words.join(" ");
            let t = topic("Anne Blair", &["Blair Anne"]);
            let d = doc(&text);
            let s = find_mentions(&d, &t).unwrap();
            prop_assert_eq!(s, find_mentions(&d, &t).unwrap());
            if s.num_full > 0 {
                prop_assert!(s.fpos_full <= s.lpos_full);
            }
            for v in [s.fpos_full_n, s.lpos_full_n, s.lpos_part_n, s.spread_n, s.spread_full_n] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            // full and partial mentions never share a token
            prop_assert!(s.num_partial + 2 * s.num_full <= d.text.split_whitespace().count());

            let matcher = NameMatcher::new(&t).unwrap();
            let a = AnalyzedDocument::new(&d);
            if matcher.passes_prefilter(&a) {
                prop_assert!(s.num_full >= 1);
                prop_assert_eq!(matcher.name_fraction(&a), 1.0);
            }

            let longer = doc(&format!("{text} Anne Blair"));
            prop_assert!(find_mentions(&longer, &t).unwrap().num_full >= s.num_full);
        }
    }
}
