//! Open-relation phrase catalog and per-document relation counts.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analyzed::AnalyzedDocument;
use crate::corpus::{Document, NeType, RelationType};
use crate::error::{Error, Result};
use crate::lemma::lemmatize;
use crate::text::{self, Token};

pub const DEFAULT_PATTERNS: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhraseCount {
    pub phrase: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternGroup {
    pub lemma_key: String,
    pub surface_forms: BTreeSet<String>,
    pub agg_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternCatalog {
    pub requested: usize,
    pub patterns: Vec<PatternGroup>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

/// How pattern text is matched against sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    /// Token match of any member phrase against the raw sentence tokens.
    #[default]
    Surface,
    /// Token match of the lemma key against the lemmatized sentence.
    Lemma,
}

impl std::str::FromStr for MatchMode {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> crate::error::Result<Self> {
        crate::harness::parse_variant(s)
    }
}

pub fn lemma_key(phrase: &str) -> String {
    text::words(phrase)
        .iter()
        .map(|w| lemmatize(w))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn build_pattern_catalog<I>(phrases: I, n: usize) -> Result<PatternCatalog>
where
    I: IntoIterator<Item = PhraseCount>,
{
    if n == 0 {
        return Err(Error::Parameter("number of patterns must be at least 1".into()));
    }
    let mut groups: BTreeMap<String, PatternGroup> = BTreeMap::new();
    for pc in phrases {
        let key = lemma_key(&pc.phrase);
        if key.is_empty() {
            continue;
        }
        let surface = text::words(&pc.phrase).join(" ");
        let group = groups.entry(key.clone()).or_insert_with(|| PatternGroup {
            lemma_key: key,
            surface_forms: BTreeSet::new(),
            agg_count: 0,
        });
        group.surface_forms.insert(surface);
        group.agg_count += pc.count;
    }

    let mut warnings = Vec::new();
    if groups.is_empty() {
        warnings.push("no relation phrases supplied".to_string());
    } else if groups.len() < n {
        warnings.push(format!("only {} pattern groups available, {} requested", groups.len(), n));
    }
    for w in &warnings {
        log::warn!("pattern catalog: {w}");
    }

    let mut ranked: Vec<PatternGroup> = groups.into_values().collect();
    ranked.sort_by(|a, b| b.agg_count.cmp(&a.agg_count).then_with(|| a.lemma_key.cmp(&b.lemma_key)));
    ranked.truncate(n);
    Ok(PatternCatalog {
        requested: n,
        patterns: ranked,
        warnings,
    })
}

/// Reads `phrase<TAB>count` lines.
pub fn read_phrase_counts(path: impl AsRef<Path>) -> Result<Vec<PhraseCount>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let (phrase, count) = line.rsplit_once('\t').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: "expected phrase<TAB>count".into(),
        })?;
        let count = count.trim().parse::<u64>().map_err(|e| Error::Parse {
            line: i + 1,
            message: format!("bad count {count:?}: {e}"),
        })?;
        out.push(PhraseCount {
            phrase: phrase.to_string(),
            count,
        });
    }
    Ok(out)
}

impl PatternCatalog {
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.patterns.iter().map(|p| p.lemma_key.as_str())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("catalog serializes")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let catalog: PatternCatalog = serde_json::from_str(json).map_err(|e| Error::from_json(e.line(), e))?;
        let keys: BTreeSet<_> = catalog.keys().collect();
        if keys.len() != catalog.len() {
            return Err(Error::schema("duplicate pattern keys in catalog"));
        }
        Ok(catalog)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn matcher(&self, mode: MatchMode) -> PatternMatcher {
        let forms = self
            .patterns
            .iter()
            .map(|g| {
                let mut forms: Vec<Vec<String>> = match mode {
                    MatchMode::Surface => g.surface_forms.iter().map(|s| text::words(s)).collect(),
                    MatchMode::Lemma => vec![g.lemma_key.split(' ').map(str::to_string).collect()],
                };
                forms.retain(|f| !f.is_empty());
                forms.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
                forms
            })
            .collect();
        PatternMatcher { mode, forms }
    }
}

/// Compiled per-pattern token sequences.
#[derive(Debug, Clone)]
pub struct PatternMatcher {
    mode: MatchMode,
    forms: Vec<Vec<Vec<String>>>,
}

/// Non-overlapping, leftmost-first occurrences of any of `forms` in `tokens`.
fn count_non_overlapping(tokens: &[String], forms: &[Vec<String>]) -> usize {
    let mut count = 0;
    let mut i = 0;
    'scan: while i < tokens.len() {
        for f in forms {
            if tokens[i..].starts_with(f) {
                count += 1;
                i += f.len();
                continue 'scan;
            }
        }
        i += 1;
    }
    count
}

impl PatternMatcher {
    pub fn count(&self, doc: &AnalyzedDocument<'_>) -> Vec<f64> {
        let sentences: Vec<Vec<String>> = (0..doc.sentences.len())
            .map(|i| self.prepare(doc.sentence_tokens(i)))
            .collect();
        self.forms
            .iter()
            .map(|forms| {
                sentences
                    .iter()
                    .map(|s| count_non_overlapping(s, forms))
                    .sum::<usize>() as f64
            })
            .collect()
    }

    fn prepare(&self, tokens: &[Token]) -> Vec<String> {
        match self.mode {
            MatchMode::Surface => tokens.iter().map(|t| t.text.clone()).collect(),
            MatchMode::Lemma => tokens.iter().map(|t| lemmatize(&t.text)).collect(),
        }
    }
}

pub fn count_open_relations(doc: &Document, catalog: &PatternCatalog, mode: MatchMode) -> Vec<f64> {
    catalog.matcher(mode).count(&AnalyzedDocument::new(doc))
}

/// Relation counts per catalog type. A relation counts only when each
/// argument lies inside a PER, ORG or LOC mention.
pub fn count_schema_relations(doc: &Document) -> Vec<f64> {
    let mut counts = vec![0.0; RelationType::ALL.len()];
    let typed_ok = |span: &crate::corpus::Span| {
        doc.mentions
            .iter()
            .any(|m| matches!(m.ne_type, NeType::Per | NeType::Org | NeType::Loc) && m.span.contains(span))
    };
    for r in &doc.relations {
        if typed_ok(&r.arg1) && typed_ok(&r.arg2) {
            counts[r.rel_type.index()] += 1.0;
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{MentionAnnotation, RelationAnnotation, Source, Span};

    fn pc(phrase: &str, count: u64) -> PhraseCount {
        PhraseCount {
            phrase: phrase.into(),
            count,
        }
    }

    fn doc(text: &str, sentences: Vec<Span>) -> Document {
        Document {
            doc_id: "d".into(),
            stream_time: 0,
            source: Source::News,
            language: "en".into(),
            text: text.into(),
            sentences,
            mentions: vec![],
            relations: vec![],
        }
    }

    #[test]
    fn groups_by_lemma_and_ranks() {
        let cat = build_pattern_catalog(
            vec![pc("was born in", 10), pc("is born in", 5), pc("works for", 8)],
            1,
        )
        .unwrap();
        assert_eq!(cat.keys().collect::<Vec<_>>(), ["be born in"]);
        assert_eq!(cat.patterns[0].agg_count, 15);
        assert_eq!(cat.patterns[0].surface_forms.len(), 2);
        assert!(cat.warnings.is_empty());
    }

    #[test]
    fn short_catalog_warns() {
        let cat = build_pattern_catalog(vec![pc("works for", 8)], 5).unwrap();
        assert_eq!(cat.len(), 1);
        assert_eq!(cat.warnings.len(), 1);
        let empty = build_pattern_catalog(Vec::new(), 5).unwrap();
        assert!(empty.is_empty() && !empty.warnings.is_empty());
    }

    #[test]
    fn equal_counts_break_ties_lexicographically() {
        let cat = build_pattern_catalog(vec![pc("works for", 3), pc("lives in", 3)], 2).unwrap();
        assert_eq!(cat.keys().collect::<Vec<_>>(), ["live in", "work for"]);
    }

    #[test]
    fn counts_per_sentence() {
        let cat = build_pattern_catalog(vec![pc("was born in", 10), pc("is born in", 5)], 1).unwrap();
        let text = "He was born in Seattle. She is born in May.";
        let d = doc(text, vec![Span::new(0, 23), Span::new(24, 43)]);
        assert_eq!(count_open_relations(&d, &cat, MatchMode::Surface), vec![2.0]);
        assert_eq!(count_open_relations(&d, &cat, MatchMode::Lemma), vec![2.0]);
        assert_eq!(count_open_relations(&doc("Nothing here.", vec![]), &cat, MatchMode::Surface), vec![0.0]);
    }

    #[test]
    fn lemma_mode_matches_unseen_inflections() {
        let cat = build_pattern_catalog(vec![pc("was born in", 10)], 1).unwrap();
        let d = doc("They were born in Paris.", vec![]);
        assert_eq!(count_open_relations(&d, &cat, MatchMode::Surface), vec![0.0]);
        assert_eq!(count_open_relations(&d, &cat, MatchMode::Lemma), vec![1.0]);
    }

    #[test]
    fn matches_do_not_cross_sentences() {
        let cat = build_pattern_catalog(vec![pc("was born in", 10)], 1).unwrap();
        let text = "He was born. In Seattle.";
        let d = doc(text, vec![Span::new(0, 12), Span::new(13, 24)]);
        assert_eq!(count_open_relations(&d, &cat, MatchMode::Surface), vec![0.0]);
    }

    #[test]
    fn schema_relations_filter_on_argument_types() {
        let text = "Ann works at Acme. Bob is Ann's brother. Zed of Foo.";
        let mention = |s, e, surface: &str, ne_type| MentionAnnotation {
            span: Span::new(s, e),
            surface: surface.into(),
            ne_type,
        };
        let mut d = doc(text, vec![Span::new(0, 18), Span::new(19, 40), Span::new(41, 52)]);
        d.mentions = vec![
            mention(0, 3, "Ann", NeType::Per),
            mention(13, 17, "Acme", NeType::Org),
            mention(19, 22, "Bob", NeType::Per),
            mention(26, 29, "Ann", NeType::Per),
            mention(41, 44, "Zed", NeType::Other),
            mention(48, 51, "Foo", NeType::Org),
        ];
        let rel = |t, a: (usize, usize), b: (usize, usize)| RelationAnnotation {
            rel_type: t,
            arg1: Span::new(a.0, a.1),
            arg2: Span::new(b.0, b.1),
        };
        d.relations = vec![
            rel(RelationType::OrgAffiliationEmployment, (0, 3), (13, 17)),
            rel(RelationType::OrgAffiliationEmployment, (0, 3), (13, 17)),
            rel(RelationType::PersonSocialFamily, (19, 22), (26, 29)),
            rel(RelationType::OrgAffiliationMembership, (41, 44), (48, 51)),
        ];
        d.validate().unwrap();
        let counts = count_schema_relations(&d);
        assert_eq!(counts.len(), 15);
        assert_eq!(counts[RelationType::OrgAffiliationEmployment.index()], 2.0);
        assert_eq!(counts[RelationType::PersonSocialFamily.index()], 1.0);
        assert_eq!(counts.iter().sum::<f64>(), 3.0);
        assert_eq!(count_schema_relations(&doc(text, vec![])), vec![0.0; 15]);
    }

    #[test]
    fn reads_tsv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.tsv");
        std::fs::write(&path, "was born in\t10\nworks for\t8\n").unwrap();
        let got = read_phrase_counts(&path).unwrap();
        assert_eq!(got, vec![pc("was born in", 10), pc("works for", 8)]);
        std::fs::write(&path, "was born in 10\n").unwrap();
        assert!(matches!(read_phrase_counts(&path), Err(Error::Parse { line: 1, .. })));
    }
}
