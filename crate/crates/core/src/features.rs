//! Named feature vectors for (document, entity) pairs.
//!
//! The column order is fixed by [`FeatureSchema`]: document features,
//! entity features, document-entity features, temporal burst counts,
//! saliency, informativeness (aspects, open relations, schema relations)
//! and timeliness. Categorical features are one-hot expanded as
//! `NAME=value`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::analyzed::AnalyzedDocument;
use crate::aspect::AspectModel;
use crate::corpus::{Document, RelationType, Source};
use crate::entity::{profile_features, EntityTopic, EntityType, ProfileKind, Registry};
use crate::error::{Error, Result};
use crate::evaluation::RawLabel;
use crate::mention::NameMatcher;
use crate::relation::{count_schema_relations, MatchMode, PatternCatalog, PatternMatcher};
use crate::text;
use crate::timeliness::timeliness;

/// Languages with their own one-hot column; everything else is `OTHER`.
pub const LANGUAGES: [&str; 11] = ["en", "es", "fr", "de", "it", "pt", "nl", "ru", "zh", "ja", "ar"];

pub const PREMENTION_HOURS: usize = 10;

/// Columns that come from prior document-filtering work; the `basic_only`
/// feature set keeps exactly these.
const BASIC_PRIOR: &[&str] = &[
    "REL", "DOCREL", "NUMFULL", "NUMPARTIAL", "FPOSFULL", "LPOSPART", "SPRPOS", "SIM_COS", "SIM_JAC",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSet {
    #[default]
    Full,
    BasicOnly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSchema {
    names: Vec<String>,
    index: HashMap<String, usize>,
    fingerprint: String,
}

pub fn fingerprint_of(names: &[String]) -> String {
    let mut h = Sha256::new();
    for n in names {
        h.update(n.as_bytes());
        h.update([0u8]);
    }
    hex::encode(&h.finalize()[..16])
}

impl FeatureSchema {
    pub fn from_names(names: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(Error::Config(format!("duplicate feature name {n:?}")));
            }
        }
        let fingerprint = fingerprint_of(&names);
        Ok(FeatureSchema {
            names,
            index,
            fingerprint,
        })
    }

    /// The full column list for the given informativeness resources.
    pub fn new(aspects: &AspectModel, catalog: &PatternCatalog) -> Self {
        let mut names: Vec<String> = Vec::new();
        let mut push = |s: String| names.push(s);
        for s in Source::ALL {
            push(format!("SRC={}", s.as_str()));
        }
        for l in LANGUAGES {
            push(format!("LANG={l}"));
        }
        push("LANG=OTHER".into());
        push("DOCLEN_SENT".into());
        push("DOCLEN_CHUNK".into());
        push("REL".into());
        push("PROFILELEN".into());
        for k in ProfileKind::ALL {
            push(format!("PROFILETYPE={}", k.as_str()));
        }
        for t in EntityType::ALL {
            push(format!("ENTITYTYPE={}", t.as_str()));
        }
        for n in [
            "NUMFULL", "NUMPARTIAL", "FPOSFULL", "LPOSFULL", "LPOSPART", "SPRPOS", "FPOSFULL_N", "LPOSFULL_N",
            "LPOSPART_N", "SPRPOS_N", "LSPRFULL_N", "SIM_COS", "SIM_JAC", "DOCREL",
        ] {
            push(n.into());
        }
        for h in 1..=PREMENTION_HOURS {
            push(format!("PREMENTION_{h}"));
        }
        for n in ["NUMENTITIES", "NUMMENTIONS", "NUMSENT", "FULLFRAC", "MENTIONFRAC"] {
            push(n.into());
        }
        for h in aspects.headings() {
            push(format!("ASPECTSIM[{h}]"));
        }
        for k in catalog.keys() {
            push(format!("RELOPEN[{k}]"));
        }
        for r in RelationType::ALL {
            push(format!("RELSCHEMA[{}]", r.as_str()));
        }
        for n in ["TMATCH_Y", "TMATCH_YM", "TMATCH_YMD"] {
            push(n.into());
        }
        Self::from_names(names).expect("aspect headings and pattern keys are unique")
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn count_with_prefix(&self, prefix: &str) -> usize {
        self.names.iter().filter(|n| n.starts_with(prefix)).count()
    }

    /// Column indices kept by `set`, in schema order.
    pub fn columns_for(&self, set: FeatureSet) -> Vec<usize> {
        match set {
            FeatureSet::Full => (0..self.len()).collect(),
            FeatureSet::BasicOnly => self
                .names
                .iter()
                .enumerate()
                .filter(|(_, n)| {
                    n.starts_with("SRC=")
                        || n.starts_with("LANG=")
                        || n.starts_with("PREMENTION_")
                        || BASIC_PRIOR.contains(&n.as_str())
                })
                .map(|(i, _)| i)
                .collect(),
        }
    }

    pub fn project(&self, columns: &[usize]) -> Self {
        Self::from_names(columns.iter().map(|&i| self.names[i].clone()).collect())
            .expect("subset of unique names")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub schema: Arc<FeatureSchema>,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn names(&self) -> &[String] {
        self.schema.names()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.schema.position(name).map(|i| self.values[i])
    }

    pub fn project(&self, schema: &Arc<FeatureSchema>, columns: &[usize]) -> FeatureVector {
        FeatureVector {
            schema: schema.clone(),
            values: columns.iter().map(|&i| self.values[i]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledInstance {
    pub entity_id: String,
    pub doc_id: String,
    pub stream_time: i64,
    pub features: FeatureVector,
    pub raw_label: RawLabel,
}

impl LabeledInstance {
    pub fn label(&self) -> bool {
        self.raw_label.is_vital()
    }
}

pub fn hour_bucket(t: i64) -> i64 {
    t.div_euclid(3600)
}

/// Per-entity hourly mention counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MentionHistory {
    counts: BTreeMap<String, BTreeMap<i64, u64>>,
}

impl MentionHistory {
    pub fn add(&mut self, entity_id: &str, stream_time: i64, mentions: u64) {
        if mentions == 0 {
            return;
        }
        *self
            .counts
            .entry(entity_id.to_string())
            .or_default()
            .entry(hour_bucket(stream_time))
            .or_insert(0) += mentions;
    }

    pub fn count(&self, entity_id: &str, bucket: i64) -> u64 {
        self.counts
            .get(entity_id)
            .and_then(|b| b.get(&bucket))
            .copied()
            .unwrap_or(0)
    }

    pub fn buckets(&self, entity_id: &str) -> Option<&BTreeMap<i64, u64>> {
        self.counts.get(entity_id)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// `PREMENTION_h` for h = 1..=10: mentions in the h whole hour-buckets
    /// strictly before the bucket of `stream_time`.
    pub fn prementions(&self, entity_id: &str, stream_time: i64) -> [f64; PREMENTION_HOURS] {
        let bucket = hour_bucket(stream_time);
        let mut out = [0.0; PREMENTION_HOURS];
        let mut acc = 0u64;
        for (h, slot) in out.iter_mut().enumerate() {
            acc += self.count(entity_id, bucket - 1 - h as i64);
            *slot = acc as f64;
        }
        out
    }
}

/// Single chronological pass counting full and partial mentions of every
/// topic per hour bucket.
pub fn build_mention_history<I>(stream: I, registry: &Registry) -> Result<MentionHistory>
where
    I: IntoIterator<Item = Result<Document>>,
{
    let matchers: Vec<(&str, NameMatcher)> = registry
        .iter()
        .map(|t| Ok((t.entity_id.as_str(), NameMatcher::new(t)?)))
        .collect::<Result<_>>()?;
    let mut history = MentionHistory::default();
    let mut previous: Option<(String, i64)> = None;
    for doc in stream {
        let doc = doc?;
        if let Some((prev_id, prev_t)) = &previous {
            if doc.stream_time < *prev_t {
                return Err(Error::Ordering {
                    earlier: prev_id.clone(),
                    earlier_time: *prev_t,
                    later: doc.doc_id.clone(),
                    later_time: doc.stream_time,
                });
            }
        }
        let analyzed = AnalyzedDocument::new(&doc);
        for (id, matcher) in &matchers {
            let stats = matcher.stats(&analyzed);
            history.add(id, doc.stream_time, stats.total() as u64);
        }
        previous = Some((doc.doc_id, doc.stream_time));
    }
    Ok(history)
}

struct TopicCache {
    matcher: NameMatcher,
    profile_tf: HashMap<String, u64>,
    profile_len: usize,
    related: Vec<Vec<String>>,
}

/// Precompiled extraction context shared across documents.
pub struct FeatureExtractor<'a> {
    schema: Arc<FeatureSchema>,
    registry: &'a Registry,
    aspects: &'a AspectModel,
    patterns: PatternMatcher,
    history: &'a MentionHistory,
    topics: HashMap<&'a str, TopicCache>,
}

impl<'a> FeatureExtractor<'a> {
    pub fn new(
        registry: &'a Registry,
        aspects: &'a AspectModel,
        catalog: &'a PatternCatalog,
        history: &'a MentionHistory,
        mode: MatchMode,
    ) -> Result<Self> {
        let schema = Arc::new(FeatureSchema::new(aspects, catalog));
        Self::with_schema(schema, registry, aspects, catalog, history, mode)
    }

    /// Uses an existing schema; fails when the resources do not produce the
    /// same columns.
    pub fn with_schema(
        schema: Arc<FeatureSchema>,
        registry: &'a Registry,
        aspects: &'a AspectModel,
        catalog: &'a PatternCatalog,
        history: &'a MentionHistory,
        mode: MatchMode,
    ) -> Result<Self> {
        let expected = FeatureSchema::new(aspects, catalog);
        if expected.fingerprint() != schema.fingerprint() {
            return Err(Error::Config(format!(
                "feature schema mismatch: resources give {} aspects and {} patterns, schema has {} and {}",
                aspects.len(),
                catalog.len(),
                schema.count_with_prefix("ASPECTSIM["),
                schema.count_with_prefix("RELOPEN[")
            )));
        }
        let mut topics = HashMap::new();
        for t in registry.iter() {
            let related = t
                .related_entities
                .iter()
                .map(|id| match registry.get(id) {
                    Some(r) => text::words(&r.canonical_name),
                    None => text::words(&id.replace('_', " ")),
                })
                .filter(|w| !w.is_empty())
                .collect();
            topics.insert(
                t.entity_id.as_str(),
                TopicCache {
                    matcher: NameMatcher::new(t)?,
                    profile_tf: text::term_frequencies(&t.profile.text),
                    profile_len: profile_features(t).profile_len,
                    related,
                },
            );
        }
        Ok(FeatureExtractor {
            schema,
            registry,
            aspects,
            patterns: catalog.matcher(mode),
            history,
            topics,
        })
    }

    pub fn schema(&self) -> &Arc<FeatureSchema> {
        &self.schema
    }

    pub fn passes_prefilter(&self, doc: &AnalyzedDocument<'_>, entity_id: &str) -> bool {
        self.topics
            .get(entity_id)
            .is_some_and(|c| c.matcher.passes_prefilter(doc))
    }

    pub fn name_fraction(&self, doc: &AnalyzedDocument<'_>, entity_id: &str) -> f64 {
        self.topics
            .get(entity_id)
            .map_or(0.0, |c| c.matcher.name_fraction(doc))
    }

    pub fn extract(&self, doc: &AnalyzedDocument<'_>, topic: &EntityTopic) -> Result<FeatureVector> {
        let cache = self.topics.get(topic.entity_id.as_str()).ok_or_else(|| {
            Error::Config(format!("topic {} is not in the registry", topic.entity_id))
        })?;
        let d = doc.doc;
        let mut v: Vec<f64> = Vec::with_capacity(self.schema.len());

        for s in Source::ALL {
            v.push(f64::from(d.source == s));
        }
        let lang = d.language.to_lowercase();
        for l in LANGUAGES {
            v.push(f64::from(lang == l));
        }
        v.push(f64::from(!LANGUAGES.contains(&lang.as_str())));
        v.push(d.sentences.len() as f64);
        v.push(text::chunk_count(&doc.tokens) as f64);

        v.push(topic.related_entities.len() as f64);
        v.push(cache.profile_len as f64);
        for k in ProfileKind::ALL {
            v.push(f64::from(topic.profile.kind == k));
        }
        for t in EntityType::ALL {
            v.push(f64::from(topic.entity_type == t));
        }

        let m = cache.matcher.stats(doc);
        let profile_terms: HashSet<&str> = cache.profile_tf.keys().map(String::as_str).collect();
        let docrel = cache.related.iter().filter(|r| doc.contains_sequence(r)).count();
        v.extend([
            m.num_full as f64,
            m.num_partial as f64,
            m.fpos_full as f64,
            m.lpos_full as f64,
            m.lpos_part as f64,
            m.spread as f64,
            m.fpos_full_n,
            m.lpos_full_n,
            m.lpos_part_n,
            m.spread_n,
            m.spread_full_n,
            text::cosine(&doc.term_frequencies, &cache.profile_tf),
            text::jaccard(&doc.term_set(), &profile_terms),
            docrel as f64,
        ]);
        v.extend(self.history.prementions(&topic.entity_id, d.stream_time));

        let num_mentions = d.mentions.len();
        let distinct: HashSet<String> = d.mentions.iter().map(|x| text::normalize_heading(&x.surface)).collect();
        let frac = |n: usize| {
            if num_mentions == 0 {
                0.0
            } else {
                (n as f64 / num_mentions as f64).min(1.0)
            }
        };
        v.extend([
            distinct.len() as f64,
            num_mentions as f64,
            m.num_sent as f64,
            frac(m.num_full),
            frac(m.total()),
        ]);

        v.extend(self.aspects.similarities(doc));
        v.extend(self.patterns.count(doc));
        v.extend(count_schema_relations(d));
        let t = timeliness(doc);
        v.extend([t.tmatch_y as f64, t.tmatch_ym as f64, t.tmatch_ymd as f64]);

        debug_assert_eq!(v.len(), self.schema.len());
        Ok(FeatureVector {
            schema: self.schema.clone(),
            values: v,
        })
    }

    pub fn registry(&self) -> &Registry {
        self.registry
    }
}

/// One-shot extraction for a single pair.
pub fn extract_features(
    doc: &Document,
    topic: &EntityTopic,
    registry: &Registry,
    aspects: &AspectModel,
    catalog: &PatternCatalog,
    history: &MentionHistory,
) -> Result<FeatureVector> {
    let extractor = FeatureExtractor::new(registry, aspects, catalog, history, MatchMode::Surface)?;
    extractor.extract(&AnalyzedDocument::new(doc), topic)
}

const TSV_FIXED: [&str; 4] = ["entity_id", "doc_id", "stream_time", "raw_label"];
const UNJUDGED: &str = "-";

/// A feature vector for a pair that may be unjudged.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub entity_id: String,
    pub doc_id: String,
    pub stream_time: i64,
    pub raw_label: Option<RawLabel>,
    pub features: FeatureVector,
}

impl From<LabeledInstance> for FeatureRow {
    fn from(i: LabeledInstance) -> Self {
        FeatureRow {
            entity_id: i.entity_id,
            doc_id: i.doc_id,
            stream_time: i.stream_time,
            raw_label: Some(i.raw_label),
            features: i.features,
        }
    }
}

/// Writes instances as TSV with a header naming every feature.
pub fn write_instances(instances: &[LabeledInstance], schema: &FeatureSchema, path: impl AsRef<Path>) -> Result<()> {
    let rows: Vec<FeatureRow> = instances.iter().cloned().map(FeatureRow::from).collect();
    write_rows(&rows, schema, path)
}

/// Like [`write_instances`]; unjudged rows carry `-` as their label.
pub fn write_rows(rows: &[FeatureRow], schema: &FeatureSchema, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    let header: Vec<&str> = TSV_FIXED
        .iter()
        .copied()
        .chain(schema.names().iter().map(String::as_str))
        .collect();
    writeln!(out, "{}", header.join("\t")).map_err(io)?;
    for row in rows {
        if row.features.schema.fingerprint() != schema.fingerprint() {
            return Err(Error::Config(format!(
                "row {}/{} does not match the output schema",
                row.entity_id, row.doc_id
            )));
        }
        write!(
            out,
            "{}\t{}\t{}\t{}",
            row.entity_id,
            row.doc_id,
            row.stream_time,
            row.raw_label.map_or(UNJUDGED, RawLabel::as_str)
        )
        .map_err(io)?;
        for x in &row.features.values {
            write!(out, "\t{x}").map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Reads labeled instances; an unjudged row is an error.
pub fn read_instances(path: impl AsRef<Path>) -> Result<(Arc<FeatureSchema>, Vec<LabeledInstance>)> {
    let (schema, rows) = read_rows(path)?;
    let instances = rows
        .into_iter()
        .map(|r| match r.raw_label {
            Some(raw_label) => Ok(LabeledInstance {
                entity_id: r.entity_id,
                doc_id: r.doc_id,
                stream_time: r.stream_time,
                features: r.features,
                raw_label,
            }),
            None => Err(Error::Config(format!("instance {}/{} has no label", r.entity_id, r.doc_id))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((schema, instances))
}

pub fn read_rows(path: impl AsRef<Path>) -> Result<(Arc<FeatureSchema>, Vec<FeatureRow>)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, message: "missing header".into() })?
        .map_err(|e| Error::io(path, e))?;
    let cols: Vec<&str> = header.split('\t').collect();
    if cols.len() < TSV_FIXED.len() || cols[..TSV_FIXED.len()] != TSV_FIXED {
        return Err(Error::Parse {
            line: 1,
            message: format!("header must start with {}", TSV_FIXED.join(", ")),
        });
    }
    let schema = Arc::new(FeatureSchema::from_names(
        cols[TSV_FIXED.len()..].iter().map(|s| s.to_string()).collect(),
    )?);
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line: line_no, message };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != cols.len() {
            return Err(parse_err(format!("expected {} columns, found {}", cols.len(), fields.len())));
        }
        let stream_time = fields[2].parse().map_err(|e| parse_err(format!("stream_time: {e}")))?;
        let raw_label = match fields[3] {
            UNJUDGED => None,
            f => Some(RawLabel::parse(f).ok_or_else(|| parse_err(format!("unknown label {f:?}")))?),
        };
        let values = fields[4..]
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| parse_err(format!("feature value {f:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(FeatureRow {
            entity_id: fields[0].to_string(),
            doc_id: fields[1].to_string(),
            stream_time,
            raw_label,
            features: FeatureVector {
                schema: schema.clone(),
                values,
            },
        });
    }
    Ok((schema, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aspect::{build_aspect_model, WikiArticle};
    use crate::corpus::Span;
    use crate::entity::Profile;
    use crate::relation::{build_pattern_catalog, PhraseCount};

    fn topic(id: &str, kind: ProfileKind, profile: &str) -> EntityTopic {
        EntityTopic {
            entity_id: id.into(),
            canonical_name: "Anne Blair".into(),
            aliases: vec!["Anne Blair".into()],
            entity_type: EntityType::Per,
            profile: Profile {
                kind,
                text: profile.into(),
                timestamp: None,
            },
            related_entities: vec!["bob_smith".into()],
            train_cutoff: 0,
        }
    }

    fn doc(text: &str, t: i64) -> Document {
        Document {
            doc_id: format!("d{t}"),
            stream_time: t,
            source: Source::Blog,
            language: "xx".into(),
            text: text.into(),
            sentences: vec![Span::new(0, text.chars().count())],
            mentions: vec![],
            relations: vec![],
        }
    }

    fn resources() -> (AspectModel, PatternCatalog) {
        let aspects = build_aspect_model(
            vec![WikiArticle {
                title: "t".into(),
                categories: vec!["Person".into()],
                sections: vec![("Career".into(), "judge court ruling".into())],
            }],
            "Person",
            2,
        )
        .unwrap();
        let catalog = build_pattern_catalog(
            vec![PhraseCount {
                phrase: "was appointed".into(),
                count: 3,
            }],
            3,
        )
        .unwrap();
        (aspects, catalog)
    }

    #[test]
    fn schema_is_stable_and_one_hot_groups_sum_to_one() {
        let (aspects, catalog) = resources();
        let registry = Registry::from_topics(vec![topic("e", ProfileKind::Wiki, "Anne Blair is a judge")]).unwrap();
        let history = MentionHistory::default();
        let ex = FeatureExtractor::new(&registry, &aspects, &catalog, &history, MatchMode::Surface).unwrap();
        let t = registry.get("e").unwrap();
        let d1 = doc("Anne Blair was appointed judge.", 100);
        let d2 = doc("Nothing. Anne Blair.", 200);
        let v1 = ex.extract(&AnalyzedDocument::new(&d1), t).unwrap();
        let v2 = ex.extract(&AnalyzedDocument::new(&d2), t).unwrap();
        assert_eq!(v1.names(), v2.names());
        for prefix in ["SRC=", "LANG=", "PROFILETYPE=", "ENTITYTYPE="] {
            let sum: f64 = v1
                .names()
                .iter()
                .zip(&v1.values)
                .filter(|(n, _)| n.starts_with(prefix))
                .map(|(_, x)| x)
                .sum();
            assert_eq!(sum, 1.0, "{prefix}");
        }
        assert_eq!(v1.get("LANG=OTHER"), Some(1.0));
        assert_eq!(v1.get("RELOPEN[be appoint]"), Some(1.0));
        assert_eq!(v1.names().len(), ex.schema().len());
    }

    #[test]
    fn profile_similarity_examples() {
        let (aspects, catalog) = resources();
        let text = "Anne Blair is a judge";
        let registry = Registry::from_topics(vec![topic("w", ProfileKind::Wiki, text), topic("n", ProfileKind::Null, "")])
            .unwrap();
        let history = MentionHistory::default();
        let d = doc(text, 5);
        let w = extract_features(&d, registry.get("w").unwrap(), &registry, &aspects, &catalog, &history).unwrap();
        assert!((w.get("SIM_COS").unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(w.get("SIM_JAC"), Some(1.0));
        assert_eq!(w.get("PROFILELEN"), Some(5.0));

        let n = extract_features(&d, registry.get("n").unwrap(), &registry, &aspects, &catalog, &history).unwrap();
        assert_eq!(n.get("SIM_COS"), Some(0.0));
        assert_eq!(n.get("SIM_JAC"), Some(0.0));
        assert_eq!(n.get("PROFILELEN"), Some(0.0));
        assert_eq!(n.get("PROFILETYPE=null"), Some(1.0));
    }

    #[test]
    fn prementions_sum_previous_buckets() {
        let mut h = MentionHistory::default();
        h.add("e", 100 * 3600, 1);
        h.add("e", 100 * 3600 + 59, 1);
        h.add("e", 102 * 3600, 1);
        let p = h.prementions("e", 103 * 3600 + 10);
        assert_eq!(p[0], 1.0);
        assert_eq!(p[2], 3.0);
        assert_eq!(p[9], 3.0);
        assert!(p.windows(2).all(|w| w[0] <= w[1]));
        // the document's own bucket is excluded
        assert_eq!(h.prementions("e", 102 * 3600 + 5)[0], 0.0);
        let only_own = {
            let mut h = MentionHistory::default();
            h.add("e", 50 * 3600, 4);
            h
        };
        assert_eq!(only_own.prementions("e", 50 * 3600 + 1), [0.0; 10]);
    }

    #[test]
    fn history_counts_full_and_partial() {
        let registry = Registry::from_topics(vec![topic("e", ProfileKind::Null, "")]).unwrap();
        let empty = build_mention_history(Vec::<Result<Document>>::new(), &registry).unwrap();
        assert!(empty.is_empty());

        let h = build_mention_history(vec![Ok(doc("Anne Blair and Blair.", 7200))], &registry).unwrap();
        assert_eq!(h.count("e", 2), 2);

        let unordered = vec![Ok(doc("Anne Blair", 7200)), Ok(doc("Anne Blair", 3600))];
        assert!(matches!(build_mention_history(unordered, &registry), Err(Error::Ordering { .. })));
    }

    #[test]
    fn docrel_counts_related_entity_names() {
        let (aspects, catalog) = resources();
        let registry = Registry::from_topics(vec![topic("e", ProfileKind::Null, "")]).unwrap();
        let history = MentionHistory::default();
        let d = doc("Anne Blair met Bob Smith.", 1);
        let v = extract_features(&d, registry.get("e").unwrap(), &registry, &aspects, &catalog, &history).unwrap();
        assert_eq!(v.get("DOCREL"), Some(1.0));
    }

    #[test]
    fn mismatched_schema_is_config_error() {
        let (aspects, catalog) = resources();
        let registry = Registry::from_topics(vec![topic("e", ProfileKind::Null, "")]).unwrap();
        let history = MentionHistory::default();
        let other = build_pattern_catalog(Vec::new(), 1).unwrap();
        let schema = Arc::new(FeatureSchema::new(&aspects, &other));
        let r = FeatureExtractor::with_schema(schema, &registry, &aspects, &catalog, &history, MatchMode::Surface);
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn basic_only_columns() {
        let (aspects, catalog) = resources();
        let schema = FeatureSchema::new(&aspects, &catalog);
        let cols = schema.columns_for(FeatureSet::BasicOnly);
        let sub = schema.project(&cols);
        assert!(sub.position("NUMFULL").is_some());
        assert!(sub.position("PREMENTION_10").is_some());
        assert!(sub.position("FULLFRAC").is_none());
        assert!(sub.position("PROFILELEN").is_none());
        assert_eq!(sub.count_with_prefix("ASPECTSIM["), 0);
        assert_ne!(sub.fingerprint(), schema.fingerprint());
    }

    #[test]
    fn instances_tsv_roundtrip() {
        let (aspects, catalog) = resources();
        let registry = Registry::from_topics(vec![topic("e", ProfileKind::Wiki, "Anne Blair is a judge")]).unwrap();
        let history = MentionHistory::default();
        let ex = FeatureExtractor::new(&registry, &aspects, &catalog, &history, MatchMode::Surface).unwrap();
        let d = doc("Anne Blair was appointed on May 3, 2012. Blair.", 1_336_046_400);
        let fv = ex.extract(&AnalyzedDocument::new(&d), registry.get("e").unwrap()).unwrap();
        let inst = LabeledInstance {
            entity_id: "e".into(),
            doc_id: d.doc_id.clone(),
            stream_time: d.stream_time,
            features: fv,
            raw_label: RawLabel::Vital,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.tsv");
        write_instances(std::slice::from_ref(&inst), ex.schema(), &path).unwrap();
        let (schema, back) = read_instances(&path).unwrap();
        assert_eq!(schema.fingerprint(), ex.schema().fingerprint());
        assert_eq!(back[0].features.values, inst.features.values);
        assert_eq!(back[0].raw_label, RawLabel::Vital);
    }
}
