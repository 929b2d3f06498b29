//! Entity-independent vital document filtering.
//!
//! Given a time-ordered document stream and a set of target entities, the
//! crate scores each (document, entity) pair by how likely the document is
//! to carry new, citation-worthy information about the entity. Features do
//! not depend on the entity's identity, so a single model transfers to
//! entities without training data.
//!
//! Pipeline: [`corpus`] and [`entity`] load inputs, [`mention`],
//! [`aspect`], [`relation`] and [`timeliness`] compute signals,
//! [`features`] assembles named vectors, [`gbdt`] learns a classifier,
//! [`evaluation`] scores run files and [`harness`] ties it together.

pub mod analyzed;
pub mod aspect;
pub mod corpus;
pub mod entity;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod gbdt;
pub mod harness;
pub mod lemma;
pub mod mention;
pub mod relation;
pub mod synth;
pub mod text;
pub mod timeliness;

pub use analyzed::AnalyzedDocument;
pub use aspect::{build_aspect_model, AspectModel, WikiArticle};
pub use corpus::{read_corpus, write_corpus, Document, Source, Span};
pub use entity::{load_topics, EntityTopic, ProfileKind, Registry};
pub use error::{Error, Result};
pub use evaluation::{sweep_f_macro, JudgmentSet, RawLabel, RunFile, ScoreReport};
pub use features::{extract_features, FeatureSchema, FeatureVector, LabeledInstance, MentionHistory};
pub use gbdt::{predict_confidence, predict_probability, train, GbdtModel, GbdtParams};
pub use harness::{run_experiment, ExperimentConfig};
pub use mention::{find_mentions, MentionStats};
pub use relation::{build_pattern_catalog, MatchMode, PatternCatalog};
