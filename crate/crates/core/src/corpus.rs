//! Document model and the JSONL stream corpus format.
//!
//! One JSON object per line. Keys are written in this order:
//!
//! ```text
//! doc_id, stream_time, source, language, text, sentences, mentions, relations
//! ```
//!
//! `sentences` is a list of `{"start","end"}` spans, `mentions` a list of
//! `{"span","surface","ne_type"}` and `relations` a list of
//! `{"rel_type","arg1","arg2"}`. Offsets are character (Unicode scalar)
//! offsets into `text`, end-exclusive.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::CharIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    News,
    #[serde(rename = "mainstream_news")]
    MainstreamNews,
    Social,
    Blog,
    Forum,
    Arxiv,
    Classifieds,
    Reviews,
    Memetracker,
}

impl Source {
    pub const ALL: [Source; 9] = [
        Source::News,
        Source::MainstreamNews,
        Source::Social,
        Source::Blog,
        Source::Forum,
        Source::Arxiv,
        Source::Classifieds,
        Source::Reviews,
        Source::Memetracker,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Source::News => "news",
            Source::MainstreamNews => "mainstream_news",
            Source::Social => "social",
            Source::Blog => "blog",
            Source::Forum => "forum",
            Source::Arxiv => "arxiv",
            Source::Classifieds => "classifieds",
            Source::Reviews => "reviews",
            Source::Memetracker => "memetracker",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NeType {
    #[serde(rename = "PER")]
    Per,
    #[serde(rename = "ORG")]
    Org,
    #[serde(rename = "FAC")]
    Fac,
    #[serde(rename = "LOC")]
    Loc,
    #[serde(rename = "OTHER")]
    Other,
}

macro_rules! relation_types {
    ($($variant:ident => $name:literal),+ $(,)?) => {
        /// The fixed catalog of ACE relation types.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum RelationType {
            $(#[serde(rename = $name)] $variant,)+
        }

        impl RelationType {
            pub const ALL: [RelationType; 15] = [$(RelationType::$variant,)+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(RelationType::$variant => $name,)+
                }
            }
        }
    };
}

relation_types! {
    LocatedIn => "located-in",
    Near => "near",
    PartWholeGeo => "part-whole-geo",
    PartWholeOrg => "part-whole-org",
    OrgAffiliationEmployment => "org-affiliation-employment",
    OrgAffiliationFounder => "org-affiliation-founder",
    OrgAffiliationOwnership => "org-affiliation-ownership",
    OrgAffiliationMembership => "org-affiliation-membership",
    PersonSocialFamily => "person-social-family",
    PersonSocialBusiness => "person-social-business",
    PersonSocialLasting => "person-social-lasting",
    AgentArtifact => "agent-artifact",
    CitizenResident => "citizen-resident",
    Ethnicity => "ethnicity",
    OrgLocation => "org-location",
}

impl RelationType {
    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionAnnotation {
    pub span: Span,
    pub surface: String,
    pub ne_type: NeType,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationAnnotation {
    pub rel_type: RelationType,
    pub arg1: Span,
    pub arg2: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    /// Creation time, seconds since the epoch.
    pub stream_time: i64,
    pub source: Source,
    pub language: String,
    pub text: String,
    #[serde(default)]
    pub sentences: Vec<Span>,
    #[serde(default)]
    pub mentions: Vec<MentionAnnotation>,
    #[serde(default)]
    pub relations: Vec<RelationAnnotation>,
}

impl Document {
    /// Checks every span and annotation invariant.
    pub fn validate(&self) -> Result<()> {
        let index = CharIndex::new(&self.text);
        let len = index.char_len();
        let fail = |msg: String| Err(Error::schema(format!("document {}: {msg}", self.doc_id)));

        let check_span = |span: &Span, what: &str| -> Result<()> {
            if span.start >= span.end || span.end > len {
                return fail(format!(
                    "{what} span [{}, {}) invalid for text of length {len}",
                    span.start, span.end
                ));
            }
            Ok(())
        };

        for (i, s) in self.sentences.iter().enumerate() {
            check_span(s, "sentence")?;
            if i > 0 && self.sentences[i - 1].end > s.start {
                return fail(format!("sentence {i} overlaps or precedes sentence {}", i - 1));
            }
        }
        let in_one_sentence = |span: &Span| {
            self.sentences.iter().filter(|s| s.contains(span)).count() == 1
        };
        for m in &self.mentions {
            check_span(&m.span, "mention")?;
            let slice = index.slice(&self.text, m.span.start, m.span.end).unwrap_or_default();
            if slice != m.surface {
                return fail(format!(
                    "mention surface {:?} does not match text slice {:?}",
                    m.surface, slice
                ));
            }
            if !in_one_sentence(&m.span) {
                return fail(format!("mention {:?} is not inside exactly one sentence", m.surface));
            }
        }
        for r in &self.relations {
            for arg in [&r.arg1, &r.arg2] {
                check_span(arg, "relation argument")?;
                if !in_one_sentence(arg) {
                    return fail(format!(
                        "{} argument [{}, {}) is not inside exactly one sentence",
                        r.rel_type.as_str(),
                        arg.start,
                        arg.end
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Lazy, line-by-line corpus reader. Holds at most one parsed document.
pub struct CorpusReader<R> {
    lines: std::io::Lines<R>,
    line_no: usize,
    require_ordered: bool,
    previous: Option<(String, i64)>,
    path: PathBuf,
    failed: bool,
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(reader: R, require_ordered: bool) -> Self {
        CorpusReader {
            lines: reader.lines(),
            line_no: 0,
            require_ordered,
            previous: None,
            path: PathBuf::from("<reader>"),
            failed: false,
        }
    }

    fn next_document(&mut self) -> Option<Result<Document>> {
        loop {
            let line = match self.lines.next()? {
                Ok(line) => line,
                Err(e) => return Some(Err(Error::io(&self.path, e))),
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            let doc: Document = match serde_json::from_str(&line) {
                Ok(doc) => doc,
                Err(e) => return Some(Err(Error::from_json(self.line_no, e))),
            };
            if let Err(e) = doc.validate() {
                let message = match e {
                    Error::Schema { message, .. } => message,
                    other => other.to_string(),
                };
                return Some(Err(Error::Schema {
                    line: Some(self.line_no),
                    message,
                }));
            }
            if self.require_ordered {
                if let Some((prev_id, prev_time)) = &self.previous {
                    if doc.stream_time < *prev_time {
                        return Some(Err(Error::Ordering {
                            earlier: prev_id.clone(),
                            earlier_time: *prev_time,
                            later: doc.doc_id.clone(),
                            later_time: doc.stream_time,
                        }));
                    }
                }
                self.previous = Some((doc.doc_id.clone(), doc.stream_time));
            }
            return Some(Ok(doc));
        }
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<Document>;

    /// Yields `None` after the first error.
    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let item = self.next_document();
        if matches!(item, Some(Err(_))) {
            self.failed = true;
        }
        item
    }
}

/// Opens a corpus file for lazy reading in file order.
pub fn read_corpus(path: impl AsRef<Path>, require_ordered: bool) -> Result<CorpusReader<BufReader<File>>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = CorpusReader::new(BufReader::new(file), require_ordered);
    reader.path = path.to_path_buf();
    Ok(reader)
}

/// Serializes one document as a single JSON line (no trailing newline).
pub fn to_json_line(doc: &Document) -> String {
    serde_json::to_string(doc).expect("documents always serialize")
}

/// Validates every document, then writes them one per line.
pub fn write_corpus(docs: &[Document], path: impl AsRef<Path>) -> Result<usize> {
    let path = path.as_ref();
    for doc in docs {
        doc.validate()?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for doc in docs {
        serde_json::to_writer(&mut out, doc).map_err(|e| Error::io(path, e.into()))?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))?;
    Ok(docs.len())
}
