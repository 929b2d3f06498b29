//! Seeded synthetic inputs for end-to-end runs.
//!
//! The generator plants the signals the intrinsic features look for in
//! vital documents: vocabulary of frequent article sections, event relation
//! phrases, an explicit mention of the document's own date, typed relation
//! annotations and few competing entity mentions. Each signal appears in a
//! vital document with probability [`SynthConfig::vital_signal`] and in
//! other documents with a smaller, label-dependent probability, so no single
//! feature separates the classes. Target mention counts and positions are
//! drawn from the same distribution for every label.

use std::path::Path;

use chrono::{DateTime, Datelike};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aspect::WikiArticle;
use crate::corpus::{
    write_corpus, Document, MentionAnnotation, NeType, RelationAnnotation, RelationType, Source, Span,
};
use crate::entity::{EntityTopic, EntityType, Profile, ProfileKind};
use crate::error::{Error, Result};
use crate::evaluation::{JudgmentSet, RawLabel};
use crate::harness::Paths;
use crate::relation::PhraseCount;

/// 2012-01-01T00:00:00Z
pub const START_TIME: i64 = 1_325_376_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub documents: usize,
    /// Multiple of 3; split evenly over wiki, web and null profiles.
    pub entities: usize,
    /// Unjudged documents appended after the last regular document.
    pub future_documents: usize,
    /// Fraction of documents without a judgment.
    pub unjudged_fraction: f64,
    pub vital_signal: f64,
    pub useful_signal: f64,
    pub other_signal: f64,
    /// Label shares for vital, useful, neutral, garbage.
    pub label_weights: [f64; 4],
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            documents: 2000,
            entities: 30,
            future_documents: 0,
            unjudged_fraction: 0.1,
            vital_signal: 0.65,
            useful_signal: 0.25,
            other_signal: 0.15,
            label_weights: [0.35, 0.35, 0.15, 0.15],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub documents: Vec<Document>,
    pub topics: Vec<EntityTopic>,
    pub judgments: JudgmentSet,
    pub articles: Vec<WikiArticle>,
    pub phrases: Vec<PhraseCount>,
}

const FIRST: [&str; 30] = [
    "Anne", "Boris", "Clara", "Dmitri", "Elena", "Farid", "Greta", "Hugo", "Ingrid", "Jonas", "Katya", "Lionel",
    "Marta", "Nils", "Olga", "Pavel", "Quinn", "Rosa", "Stefan", "Tamsin", "Ulrich", "Vera", "Walter", "Xenia",
    "Yusuf", "Zora", "Alma", "Bruno", "Celia", "Dario",
];
const LAST: [&str; 30] = [
    "Blair", "Okafor", "Lindqvist", "Moreau", "Castell", "Havel", "Quist", "Ravensworth", "Sato", "Tiller",
    "Umber", "Voss", "Wexford", "Yarrow", "Zeller", "Abernethy", "Brandt", "Corrigan", "Delacroix", "Eastwick",
    "Fairbanks", "Galloway", "Holm", "Ivanova", "Jessup", "Kowal", "Lorimer", "Mabry", "Nakamura", "Oyelaran",
];
const OTHER_FIRST: [&str; 12] = [
    "Peter", "Susan", "Mark", "Laura", "James", "Nina", "Oscar", "Helen", "Victor", "Irene", "Simon", "Paula",
];
const OTHER_LAST: [&str; 12] = [
    "Grant", "Hughes", "Pike", "Rowe", "Sutton", "Tate", "Vance", "Wade", "Young", "Hale", "Marsh", "Kerr",
];
const CITIES: [&str; 10] = [
    "Lisbon", "Oslo", "Denver", "Quebec", "Nairobi", "Perth", "Austin", "Krakow", "Seville", "Tucson",
];
const ORG_SUFFIX: [&str; 4] = ["Group", "Labs", "Media", "Council"];
const MONTH_NAMES: [&str; 12] = [
    "January", "February", "March", "April", "May", "June", "July", "August", "September", "October",
    "November", "December",
];

/// Event verbs; their phrases mark vital documents.
const EVENT_VERBS: [&str; 15] = [
    "appointed", "elected", "arrested", "married", "hired", "fired", "promoted", "sentenced", "awarded",
    "charged", "nominated", "indicted", "acquitted", "inducted", "suspended",
];
/// Everyday verbs used in filler sentences.
const CHATTER_VERBS: [&str; 15] = [
    "talked", "looked", "joked", "posted", "shared", "walked", "laughed", "commented", "watched", "played",
    "chatted", "waved", "smiled", "listened", "wandered",
];
const PREPOSITIONS: [&str; 8] = ["to", "in", "by", "as", "at", "with", "for", "on"];

const SYLLABLES: [&str; 24] = [
    "bar", "cel", "dov", "fen", "gir", "hul", "jas", "kor", "lun", "mib", "nox", "pel", "quor", "ril", "sav",
    "tum", "vek", "wol", "yst", "zan", "bri", "dra", "gle", "tho",
];

const HEADING_ADJ: [&str; 10] = [
    "early", "later", "political", "business", "film", "music", "sports", "coaching", "academic", "public",
];
const HEADING_NOUN: [&str; 6] = ["career", "life", "work", "activities", "honors", "controversies"];

/// Deterministic pseudo-word for index `i` (three syllables, never a name,
/// month, number or stopword).
fn pseudo_word(i: usize) -> String {
    let n = SYLLABLES.len();
    format!("{}{}{}", SYLLABLES[i % n], SYLLABLES[(i / n) % n], SYLLABLES[(i / (n * n)) % n])
}

struct Vocabulary {
    headings: Vec<String>,
    /// Words per heading, same order as `headings`.
    heading_words: Vec<Vec<String>>,
    filler: Vec<String>,
}

impl Vocabulary {
    fn new() -> Self {
        let headings: Vec<String> = HEADING_ADJ
            .iter()
            .flat_map(|a| HEADING_NOUN.iter().map(move |n| format!("{a} {n}")))
            .collect();
        let mut next = 1;
        let mut take = |k: usize| -> Vec<String> {
            let out = (next..next + k).map(pseudo_word).collect();
            next += k;
            out
        };
        let heading_words = headings.iter().map(|_| take(12)).collect();
        let filler = take(200);
        Vocabulary {
            headings,
            heading_words,
            filler,
        }
    }

    /// Headings are ranked by how often articles carry them; vital documents
    /// draw from the most frequent ones.
    fn event_words(&self) -> impl Iterator<Item = &String> {
        self.heading_words[..8].iter().flatten()
    }
}

/// Incrementally builds a document with sentence, mention and relation
/// annotations. Text is ASCII, so byte and char offsets coincide.
struct DocBuilder {
    text: String,
    sentences: Vec<Span>,
    mentions: Vec<MentionAnnotation>,
    relations: Vec<RelationAnnotation>,
    sentence_start: usize,
    fresh: bool,
}

impl DocBuilder {
    fn new() -> Self {
        DocBuilder {
            text: String::new(),
            sentences: Vec::new(),
            mentions: Vec::new(),
            relations: Vec::new(),
            sentence_start: 0,
            fresh: true,
        }
    }

    fn begin(&mut self) {
        if !self.text.is_empty() {
            self.text.push(' ');
        }
        self.sentence_start = self.text.len();
        self.fresh = true;
    }

    fn word(&mut self, w: &str) -> Span {
        if !self.fresh {
            self.text.push(' ');
        }
        self.fresh = false;
        let start = self.text.len();
        self.text.push_str(w);
        Span::new(start, self.text.len())
    }

    fn words<S: AsRef<str>>(&mut self, ws: impl IntoIterator<Item = S>) {
        for w in ws {
            self.word(w.as_ref());
        }
    }

    fn mention(&mut self, surface: &str, ne_type: NeType) -> Span {
        let span = self.word(surface);
        self.mentions.push(MentionAnnotation {
            span,
            surface: surface.to_string(),
            ne_type,
        });
        span
    }

    fn end(&mut self) {
        self.text.push('.');
        self.sentences.push(Span::new(self.sentence_start, self.text.len()));
    }

    fn finish(self, doc_id: String, stream_time: i64, source: Source, language: &str) -> Document {
        Document {
            doc_id,
            stream_time,
            source,
            language: language.into(),
            text: self.text,
            sentences: self.sentences,
            mentions: self.mentions,
            relations: self.relations,
        }
    }
}

struct Target {
    topic: EntityTopic,
    ne_type: NeType,
    partial: String,
}

fn make_targets(cfg: &SynthConfig, rng: &mut ChaCha8Rng, vocab: &Vocabulary) -> Result<Vec<Target>> {
    if cfg.entities == 0 || cfg.entities % 3 != 0 || cfg.entities > FIRST.len() {
        return Err(Error::Parameter(format!(
            "entity count must be a positive multiple of 3 up to {}, got {}",
            FIRST.len(),
            cfg.entities
        )));
    }
    let profile_words: Vec<&String> = vocab.heading_words[8..20].iter().flatten().collect();
    let mut targets = Vec::new();
    for i in 0..cfg.entities {
        let kind = ProfileKind::ALL[i % 3];
        let (entity_type, ne_type, canonical, partial) = match i % 10 {
            3 => {
                let w = capitalize(&pseudo_word(5000 + i));
                (EntityType::Org, NeType::Org, format!("{w} Holdings"), w)
            }
            7 => {
                let w = capitalize(&pseudo_word(6000 + i));
                (EntityType::Fac, NeType::Fac, format!("{w} Arena"), w)
            }
            _ => (
                EntityType::Per,
                NeType::Per,
                format!("{} {}", FIRST[i], LAST[i]),
                LAST[i].to_string(),
            ),
        };
        let mut aliases = vec![canonical.clone()];
        if entity_type == EntityType::Per && rng.random_bool(0.5) {
            aliases.push(format!("{} {}", &FIRST[i][..1], LAST[i]));
        }
        let profile = match kind {
            ProfileKind::Null => Profile::null(),
            _ => {
                let len = if kind == ProfileKind::Wiki { 80 } else { 25 };
                let words: Vec<&str> = (0..len).map(|_| profile_words.choose(rng).unwrap().as_str()).collect();
                Profile {
                    kind,
                    text: format!("{canonical} {}.", words.join(" ")),
                    timestamp: Some(START_TIME - 86_400),
                }
            }
        };
        targets.push(Target {
            topic: EntityTopic {
                entity_id: format!("ent{i:02}_{}", canonical.to_lowercase().replace(' ', "_")),
                canonical_name: canonical,
                aliases,
                entity_type,
                profile,
                related_entities: Vec::new(),
                train_cutoff: 0,
            },
            ne_type,
            partial,
        });
    }
    let ids: Vec<String> = targets.iter().map(|t| t.topic.entity_id.clone()).collect();
    for (i, t) in targets.iter_mut().enumerate() {
        t.topic.related_entities = vec![ids[(i + 1) % ids.len()].clone(), ids[(i + 7) % ids.len()].clone()];
    }
    Ok(targets)
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_ascii_uppercase().to_string() + c.as_str(),
        None => String::new(),
    }
}

fn other_person(rng: &mut ChaCha8Rng) -> String {
    format!("{} {}", OTHER_FIRST.choose(rng).unwrap(), OTHER_LAST.choose(rng).unwrap())
}

fn other_org(rng: &mut ChaCha8Rng) -> String {
    format!(
        "{} {}",
        capitalize(&pseudo_word(rng.random_range(7000..7040))),
        ORG_SUFFIX.choose(rng).unwrap()
    )
}

struct Generator<'a> {
    cfg: &'a SynthConfig,
    vocab: &'a Vocabulary,
    event_words: Vec<&'a String>,
}

impl Generator<'_> {
    fn filler(&self, b: &mut DocBuilder, rng: &mut ChaCha8Rng, n: usize) {
        for _ in 0..n {
            b.word(self.vocab.filler.choose(rng).unwrap());
        }
    }

    fn target_surface(&self, t: &Target, rng: &mut ChaCha8Rng) -> String {
        t.topic.aliases.choose(rng).unwrap().clone()
    }

    fn date_words(t: i64) -> Vec<String> {
        let dt = DateTime::from_timestamp(t, 0).expect("valid timestamp");
        vec![
            "on".into(),
            MONTH_NAMES[dt.month0() as usize].into(),
            format!("{},", dt.day()),
            dt.year().to_string(),
        ]
    }

    fn document(
        &self,
        rng: &mut ChaCha8Rng,
        doc_id: String,
        time: i64,
        target: &Target,
        label: Option<RawLabel>,
        targets: &[Target],
    ) -> Document {
        let p = match label {
            Some(RawLabel::Vital) => self.cfg.vital_signal,
            Some(RawLabel::Useful) => self.cfg.useful_signal,
            _ => self.cfg.other_signal,
        };
        let aspect = rng.random_bool(p);
        let relation = rng.random_bool(p);
        let same_date = rng.random_bool(p);
        let schema = rng.random_bool(p);
        let salient = rng.random_bool(p);

        let mut b = DocBuilder::new();
        let full_mentions = rng.random_range(1..=3);
        let partial_mentions = rng.random_range(0..=2);
        let others = if salient { rng.random_range(0..=1) } else { rng.random_range(3..=7) };
        let sentences = rng.random_range(6..=9);

        // Sentence slots: which sentence carries which element.
        let mut slots: Vec<Vec<u8>> = vec![Vec::new(); sentences];
        slots[0].push(b'F');
        for _ in 1..full_mentions {
            slots[rng.random_range(0..sentences)].push(b'F');
        }
        for _ in 0..partial_mentions {
            slots[rng.random_range(1..sentences)].push(b'P');
        }
        for _ in 0..others {
            slots[rng.random_range(0..sentences)].push(b'O');
        }
        if rng.random_bool(0.2) {
            slots[rng.random_range(0..sentences)].push(b'R');
        }
        let event_sentence = rng.random_range(0..sentences);
        if relation {
            slots[event_sentence].push(b'E');
        }
        if schema {
            slots[event_sentence].push(b'S');
        }
        if aspect {
            for _ in 0..rng.random_range(2..=3) {
                slots[rng.random_range(0..sentences)].push(b'A');
            }
        }
        let date_sentence = rng.random_range(0..sentences);
        slots[date_sentence].push(if same_date { b'D' } else { b'd' });

        let mut canonical_pending = true;
        for slot in slots {
            b.begin();
            let mut target_span = None;
            for item in slot {
                match item {
                    b'F' => {
                        // the first mention uses the canonical name so the
                        // document passes the full-name pre-filter
                        let s = if canonical_pending {
                            canonical_pending = false;
                            target.topic.canonical_name.clone()
                        } else {
                            self.target_surface(target, rng)
                        };
                        target_span = Some(b.mention(&s, target.ne_type));
                        let n = rng.random_range(1..=3);
                        self.filler(&mut b, rng, n);
                    }
                    b'P' => {
                        self.filler(&mut b, rng, 1);
                        b.mention(&target.partial, target.ne_type);
                    }
                    b'O' => {
                        if rng.random_bool(0.6) {
                            b.mention(&other_person(rng), NeType::Per);
                        } else {
                            b.mention(&other_org(rng), NeType::Org);
                        }
                        self.filler(&mut b, rng, 1);
                    }
                    b'R' => {
                        let rel = targets.iter().find(|t| t.topic.entity_id == target.topic.related_entities[0]);
                        if let Some(rel) = rel {
                            b.mention(&rel.topic.canonical_name, rel.ne_type);
                        }
                    }
                    b'E' => {
                        let span = match target_span {
                            Some(s) => s,
                            None => b.mention(&self.target_surface(target, rng), target.ne_type),
                        };
                        target_span = Some(span);
                        if rng.random_bool(0.5) {
                            b.word("was");
                        }
                        b.word(EVENT_VERBS.choose(rng).unwrap());
                        b.word(PREPOSITIONS.choose(rng).unwrap());
                        b.mention(CITIES.choose(rng).unwrap(), NeType::Loc);
                    }
                    b'S' => {
                        let arg1 = match target_span {
                            Some(s) => s,
                            None => b.mention(&self.target_surface(target, rng), target.ne_type),
                        };
                        b.word("joined");
                        let org = other_org(rng);
                        let arg2 = b.mention(&org, NeType::Org);
                        let rel_type = *[
                            RelationType::OrgAffiliationEmployment,
                            RelationType::OrgAffiliationMembership,
                            RelationType::PersonSocialBusiness,
                        ]
                            .choose(rng)
                            .unwrap();
                        b.relations.push(RelationAnnotation { rel_type, arg1, arg2 });
                    }
                    b'A' => {
                        for _ in 0..4 {
                            b.word(self.event_words.choose(rng).unwrap());
                        }
                    }
                    b'D' => b.words(Self::date_words(time)),
                    _ => {
                        let shift = rng.random_range(3..40) * 86_400 * if rng.random_bool(0.5) { 1 } else { -1 };
                        if rng.random_bool(0.5) {
                            b.words(Self::date_words(time + shift));
                        } else {
                            b.word("in");
                            b.word(&(DateTime::from_timestamp(time, 0).unwrap().year() - 1).to_string());
                        }
                    }
                }
            }
            b.word(CHATTER_VERBS.choose(rng).unwrap());
            b.word(PREPOSITIONS.choose(rng).unwrap());
            let n = rng.random_range(3..=6);
            self.filler(&mut b, rng, n);
            b.end();
        }
        let source = *Source::ALL.choose(rng).unwrap();
        let language = if rng.random_bool(0.95) { "en" } else { "es" };
        b.finish(doc_id, time, source, language)
    }
}

fn articles(rng: &mut ChaCha8Rng, vocab: &Vocabulary) -> Vec<WikiArticle> {
    let mut out = Vec::new();
    for a in 0..60 {
        let category = if a % 5 == 4 { "Organization" } else { "Person" };
        let mut sections = Vec::new();
        for (h, heading) in vocab.headings.iter().enumerate() {
            // Earlier headings are more common.
            let p = 0.95 - 0.9 * h as f64 / vocab.headings.len() as f64;
            if rng.random_bool(p) {
                let words: Vec<&str> = (0..30)
                    .map(|_| vocab.heading_words[h].choose(rng).unwrap().as_str())
                    .collect();
                sections.push((capitalize(heading), words.join(" ")));
            }
        }
        out.push(WikiArticle {
            title: format!("Article {a}"),
            categories: vec![category.into()],
            sections,
        });
    }
    out
}

fn phrases(rng: &mut ChaCha8Rng) -> Vec<PhraseCount> {
    let mut out = Vec::new();
    for (verbs, base) in [(&EVENT_VERBS, 500u64), (&CHATTER_VERBS, 300u64)] {
        for v in verbs.iter() {
            for p in PREPOSITIONS {
                out.push(PhraseCount {
                    phrase: format!("{v} {p}"),
                    count: base + rng.random_range(0..200),
                });
                out.push(PhraseCount {
                    phrase: format!("was {v} {p}"),
                    count: base / 2 + rng.random_range(0..200),
                });
            }
        }
    }
    out
}

fn pick_label(rng: &mut ChaCha8Rng, weights: &[f64; 4]) -> RawLabel {
    let total: f64 = weights.iter().sum();
    let mut x = rng.random::<f64>() * total;
    for (w, l) in weights.iter().zip(RawLabel::ALL) {
        if x < *w {
            return l;
        }
        x -= w;
    }
    RawLabel::Garbage
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthData> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let vocab = Vocabulary::new();
    let mut targets = make_targets(cfg, &mut rng, &vocab)?;
    let articles = articles(&mut rng, &vocab);
    let phrases = phrases(&mut rng);
    let generator = Generator {
        cfg,
        vocab: &vocab,
        event_words: vocab.event_words().collect(),
    };

    let mut times = Vec::with_capacity(cfg.documents);
    let mut t = START_TIME;
    for _ in 0..cfg.documents {
        t += rng.random_range(0..7200);
        times.push(t);
    }
    let end = t;
    for target in &mut targets {
        let frac = rng.random_range(0.45..0.6);
        let idx = ((cfg.documents as f64 * frac) as usize).min(cfg.documents.saturating_sub(1));
        target.topic.train_cutoff = times.get(idx).copied().unwrap_or(START_TIME);
    }

    let mut documents = Vec::with_capacity(cfg.documents + cfg.future_documents);
    let mut judgments = JudgmentSet::new();
    for (i, &time) in times.iter().enumerate() {
        let target = targets.choose(&mut rng).unwrap();
        let label = if rng.random_bool(cfg.unjudged_fraction) {
            None
        } else {
            Some(pick_label(&mut rng, &cfg.label_weights))
        };
        let doc_id = format!("doc{i:05}");
        if let Some(l) = label {
            judgments.insert(&target.topic.entity_id, &doc_id, l);
        }
        documents.push(generator.document(&mut rng, doc_id, time, target, label, &targets));
    }

    // Future documents come from an independent stream so the regular
    // documents do not depend on how many are appended.
    let mut future_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_f00d);
    let mut t = end + 3600;
    for i in 0..cfg.future_documents {
        t += future_rng.random_range(0..7200);
        let target = targets.choose(&mut future_rng).unwrap();
        let doc_id = format!("future{i:05}");
        documents.push(generator.document(&mut future_rng, doc_id, t, target, None, &targets));
    }

    Ok(SynthData {
        documents,
        topics: targets.into_iter().map(|t| t.topic).collect(),
        judgments,
        articles,
        phrases,
    })
}

impl SynthData {
    /// Writes all inputs into `dir` and returns their paths; outputs go to
    /// `dir/out`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<Paths> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let paths = Paths {
            corpus: dir.join("corpus.jsonl"),
            topics: dir.join("topics.json"),
            judgments: dir.join("judgments.tsv"),
            aspects: dir.join("articles.jsonl"),
            patterns: dir.join("phrases.tsv"),
            output_dir: dir.join("out"),
        };
        write_corpus(&self.documents, &paths.corpus)?;
        let topics = serde_json::to_string_pretty(&self.topics).expect("topics serialize");
        std::fs::write(&paths.topics, topics).map_err(|e| Error::io(&paths.topics, e))?;
        self.judgments.write_tsv(&paths.judgments)?;
        let mut articles = String::new();
        for a in &self.articles {
            articles.push_str(&serde_json::to_string(a).expect("article serializes"));
            articles.push('\n');
        }
        std::fs::write(&paths.aspects, articles).map_err(|e| Error::io(&paths.aspects, e))?;
        let phrases: String = self.phrases.iter().map(|p| format!("{}\t{}\n", p.phrase, p.count)).collect();
        std::fs::write(&paths.patterns, phrases).map_err(|e| Error::io(&paths.patterns, e))?;
        Ok(paths)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entity::Registry;
    use crate::mention::find_mentions;

    fn small() -> SynthConfig {
        SynthConfig {
            documents: 200,
            ..Default::default()
        }
    }

    #[test]
    fn documents_validate_and_are_ordered() {
        let data = generate(&small()).unwrap();
        assert_eq!(data.documents.len(), 200);
        for d in &data.documents {
            d.validate().unwrap();
        }
        assert!(data.documents.windows(2).all(|w| w[0].stream_time <= w[1].stream_time));
        Registry::from_topics(data.topics.clone()).unwrap();
    }

    #[test]
    fn judged_documents_mention_their_target() {
        let data = generate(&small()).unwrap();
        let reg = Registry::from_topics(data.topics.clone()).unwrap();
        for (e, d, _) in data.judgments.iter() {
            let doc = data.documents.iter().find(|x| x.doc_id == d).unwrap();
            let stats = find_mentions(doc, reg.get(e).unwrap()).unwrap();
            assert!(stats.num_full >= 1, "{d} lacks {e}");
        }
    }

    #[test]
    fn generation_is_deterministic_and_future_docs_append() {
        let a = generate(&small()).unwrap();
        assert_eq!(a, generate(&small()).unwrap());
        let b = generate(&SynthConfig {
            future_documents: 20,
            ..small()
        })
        .unwrap();
        assert_eq!(b.documents[..200], a.documents[..]);
        assert_eq!(b.documents.len(), 220);
        assert!(b.documents[200].stream_time > a.documents[199].stream_time);
        assert_eq!(a.judgments, b.judgments);
    }

    #[test]
    fn segments_are_balanced() {
        let data = generate(&small()).unwrap();
        for kind in ProfileKind::ALL {
            assert_eq!(data.topics.iter().filter(|t| t.profile.kind == kind).count(), 10);
        }
    }

    #[test]
    fn pseudo_words_are_not_stopwords_or_months() {
        for i in 0..8000 {
            let w = pseudo_word(i);
            assert!(!crate::text::is_stopword(&w));
            assert!(crate::timeliness::month_of_name(&w).is_none());
        }
    }
}
