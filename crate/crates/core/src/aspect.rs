//! Bag-of-words aspect models built from encyclopedia section headings.
//!
//! Articles of one category are grouped by normalized section heading. The
//! `m` headings with the highest document frequency become aspects (ties by
//! ascending heading); each aspect's term weights are the raw, stopword-free
//! term frequencies of all its sections concatenated. Documents are scored by
//! cosine similarity against every aspect.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analyzed::AnalyzedDocument;
use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::text;

pub const DEFAULT_ASPECTS: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WikiArticle {
    pub title: String,
    pub categories: Vec<String>,
    /// `(heading, text)` pairs in page order.
    pub sections: Vec<(String, String)>,
}

impl WikiArticle {
    fn validate(&self) -> Result<()> {
        if let Some((h, _)) = self.sections.iter().find(|(h, _)| h.trim().is_empty()) {
            return Err(Error::schema(format!(
                "article {:?} has an empty section heading {h:?}",
                self.title
            )));
        }
        Ok(())
    }

    fn in_category(&self, category: &str) -> bool {
        self.categories.iter().any(|c| c.trim().eq_ignore_ascii_case(category.trim()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Aspect {
    pub heading_key: String,
    pub term_weights: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AspectModel {
    pub category: String,
    pub requested: usize,
    pub stopwords: String,
    pub aspects: Vec<Aspect>,
    #[serde(default)]
    pub warnings: Vec<String>,
    #[serde(skip)]
    norms: Vec<f64>,
}

impl AspectModel {
    fn new(category: &str, requested: usize, aspects: Vec<Aspect>, warnings: Vec<String>) -> Self {
        let mut model = AspectModel {
            category: category.to_string(),
            requested,
            stopwords: text::STOPWORDS_VERSION.to_string(),
            aspects,
            warnings,
            norms: Vec::new(),
        };
        model.compute_norms();
        model
    }

    fn compute_norms(&mut self) {
        self.norms = self.aspects.iter().map(|a| text::norm(a.term_weights.values())).collect();
    }

    pub fn len(&self) -> usize {
        self.aspects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aspects.is_empty()
    }

    pub fn headings(&self) -> impl Iterator<Item = &str> {
        self.aspects.iter().map(|a| a.heading_key.as_str())
    }

    pub fn similarities(&self, doc: &AnalyzedDocument<'_>) -> Vec<f64> {
        self.similarities_tf(&doc.term_frequencies)
    }

    pub fn similarities_tf(&self, tf: &HashMap<String, u64>) -> Vec<f64> {
        self.aspects
            .iter()
            .zip(&self.norms)
            .map(|(a, &n)| text::cosine_with(tf, &a.term_weights, n))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("aspect model serializes")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let mut model: AspectModel =
            serde_json::from_str(json).map_err(|e| Error::from_json(e.line(), e))?;
        let mut seen = BTreeSet::new();
        for a in &model.aspects {
            if !seen.insert(a.heading_key.as_str()) {
                return Err(Error::schema(format!("duplicate aspect heading {:?}", a.heading_key)));
            }
            if a.term_weights.iter().any(|(t, &w)| w == 0 || text::is_stopword(t)) {
                return Err(Error::schema(format!("aspect {:?} has zero weights or stopwords", a.heading_key)));
            }
        }
        model.compute_norms();
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

pub fn build_aspect_model<I>(articles: I, category: &str, m: usize) -> Result<AspectModel>
where
    I: IntoIterator<Item = WikiArticle>,
{
    if m == 0 {
        return Err(Error::Parameter("number of aspects must be at least 1".into()));
    }
    // Aggregation is order independent: document frequency counts and
    // term-frequency sums commute.
    let mut doc_freq: HashMap<String, usize> = HashMap::new();
    let mut terms: HashMap<String, HashMap<String, u64>> = HashMap::new();
    let mut used = 0usize;
    for article in articles {
        article.validate()?;
        if !article.in_category(category) {
            continue;
        }
        used += 1;
        let mut headings = BTreeSet::new();
        for (heading, body) in &article.sections {
            let key = text::normalize_heading(heading);
            let bag = terms.entry(key.clone()).or_default();
            for (t, c) in text::term_frequencies(body) {
                *bag.entry(t).or_insert(0) += c;
            }
            headings.insert(key);
        }
        for key in headings {
            *doc_freq.entry(key).or_insert(0) += 1;
        }
    }

    let mut ranked: Vec<(String, usize)> = doc_freq.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let mut warnings = Vec::new();
    if used == 0 {
        warnings.push(format!("no articles in category {category:?}"));
    }
    if ranked.len() < m {
        warnings.push(format!(
            "only {} distinct headings available, {} requested",
            ranked.len(),
            m
        ));
    }
    for w in &warnings {
        log::warn!("aspect model: {w}");
    }

    let aspects = ranked
        .into_iter()
        .take(m)
        .map(|(key, _)| {
            let term_weights = terms.remove(&key).unwrap_or_default().into_iter().collect();
            Aspect {
                heading_key: key,
                term_weights,
            }
        })
        .collect();
    Ok(AspectModel::new(category, m, aspects, warnings))
}

pub fn aspect_similarities(doc: &Document, model: &AspectModel) -> Vec<f64> {
    model.similarities(&AnalyzedDocument::new(doc))
}

/// Reads a JSONL file of articles, validating headings.
pub fn read_articles(path: impl AsRef<Path>) -> Result<Vec<WikiArticle>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let article: WikiArticle = serde_json::from_str(&line).map_err(|e| Error::from_json(i + 1, e))?;
        article.validate()?;
        out.push(article);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn article(title: &str, sections: &[(&str, &str)]) -> WikiArticle {
        WikiArticle {
            title: title.into(),
            categories: vec!["Person".into()],
            sections: sections.iter().map(|(h, t)| (h.to_string(), t.to_string())).collect(),
        }
    }

    #[test]
    fn top_headings_by_document_frequency() {
        let arts = vec![
            article("a", &[("Career", "x"), ("Early life", "y"), ("Trivia", "z")]),
            article("b", &[("Career", "x"), ("Early  Life", "y")]),
            article("c", &[("career", "x")]),
        ];
        let model = build_aspect_model(arts, "person", 2).unwrap();
        assert_eq!(model.headings().collect::<Vec<_>>(), ["career", "early life"]);
        assert!(model.warnings.is_empty());
    }

    #[test]
    fn term_weights_are_raw_frequencies() {
        let model =
            build_aspect_model(vec![article("a", &[("Career", "coached football coached")])], "Person", 1)
                .unwrap();
        let w = &model.aspects[0].term_weights;
        assert_eq!(w.len(), 2);
        assert_eq!((w["coached"], w["football"]), (2, 1));
    }

    #[test]
    fn stopwords_are_dropped_from_weights() {
        let model = build_aspect_model(vec![article("a", &[("Career", "He coached the team")])], "Person", 1)
            .unwrap();
        assert!(model.aspects[0].term_weights.keys().all(|t| !text::is_stopword(t)));
    }

    #[test]
    fn empty_category_gives_empty_model_with_warning() {
        let model = build_aspect_model(vec![article("a", &[("Career", "x")])], "Location", 5).unwrap();
        assert!(model.is_empty());
        assert!(!model.warnings.is_empty());
    }

    #[test]
    fn ties_break_lexicographically() {
        let arts = vec![article("a", &[("Zeta", "x"), ("Alpha", "y")])];
        let model = build_aspect_model(arts, "Person", 1).unwrap();
        assert_eq!(model.aspects[0].heading_key, "alpha");
        assert!(model.warnings.is_empty());
    }

    #[test]
    fn empty_heading_is_rejected() {
        let arts = vec![article("a", &[("  ", "x")])];
        assert!(build_aspect_model(arts, "Person", 1).is_err());
    }

    #[test]
    fn similarity_examples() {
        let model = build_aspect_model(
            vec![article("a", &[("Career", "coached football coached"), ("Death", "died peacefully")])],
            "Person",
            2,
        )
        .unwrap();
        let tf = |pairs: &[(&str, u64)]| -> HashMap<String, u64> {
            pairs.iter().map(|(t, c)| (t.to_string(), *c)).collect()
        };
        let career = model.headings().position(|h| h == "career").unwrap();
        let sims = model.similarities_tf(&tf(&[("coached", 1)]));
        assert!((sims[career] - 2.0 / 5f64.sqrt()).abs() < 1e-12);
        assert_eq!(sims[1 - career], 0.0);

        let same = model.similarities_tf(&tf(&[("coached", 2), ("football", 1)]));
        assert!((same[career] - 1.0).abs() < 1e-12);
        assert_eq!(model.similarities_tf(&HashMap::new()), vec![0.0, 0.0]);
    }

    #[test]
    fn json_roundtrip_restores_norms() {
        let model = build_aspect_model(vec![article("a", &[("Career", "coached football coached")])], "Person", 1)
            .unwrap();
        let back = AspectModel::from_json(&model.to_json()).unwrap();
        assert_eq!(back, model);
    }
}
