//! End-to-end experiments driven by a TOML config.
//!
//! An experiment builds the aspect model and pattern catalog, makes one pass
//! over the corpus to build the mention history and a second pass to extract
//! features for every (document, entity) pair that passes the full-name
//! pre-filter. Pairs at or before an entity's cutoff with a vital or useful
//! judgment train the model; pairs after the cutoff are scored.
//!
//! Every output file is listed with its sha256 in `manifest.json`, together
//! with the config and the hashes of all inputs, so a run can be repeated
//! from the manifest alone.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analyzed::AnalyzedDocument;
use crate::aspect::{build_aspect_model, read_articles, AspectModel, DEFAULT_ASPECTS};
use crate::corpus::{read_corpus, Document};
use crate::entity::{load_topics, ProfileKind, Registry};
use crate::error::{Error, Result};
use crate::evaluation::{
    cv_split_entities, segment_report, sweep_f_macro, JudgmentSet, RawLabel, RunEntry, RunFile, ScoreReport,
};
use crate::features::{
    build_mention_history, FeatureExtractor, FeatureRow, FeatureSchema, FeatureSet, FeatureVector, LabeledInstance,
};
use crate::gbdt::{
    self, confidence_from_probability, feature_importance, predict_confidence, GbdtModel, GbdtParams, LeafEstimate, DEFAULT_DEPTH,
    DEFAULT_SHRINKAGE, DEFAULT_TREES,
};
use crate::relation::{build_pattern_catalog, read_phrase_counts, MatchMode, PatternCatalog, DEFAULT_PATTERNS};

const EXTRACT_CHUNK: usize = 256;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// One global model, scored overall and per profile segment.
    #[default]
    MainLongtail,
    /// Entity-level k-fold cross-validation.
    UnseenCv,
    /// One global model, scored overall.
    AllEntities,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    EidfFull,
    BasicOnly,
    NameFractionBaseline,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::EidfFull, ModelKind::BasicOnly, ModelKind::NameFractionBaseline];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::EidfFull => "eidf_full",
            ModelKind::BasicOnly => "basic_only",
            ModelKind::NameFractionBaseline => "name_fraction_baseline",
        }
    }

    /// Feature subset the model consumes; `None` for the untrained baseline.
    pub fn feature_set(self) -> Option<FeatureSet> {
        match self {
            ModelKind::EidfFull => Some(FeatureSet::Full),
            ModelKind::BasicOnly => Some(FeatureSet::BasicOnly),
            ModelKind::NameFractionBaseline => None,
        }
    }
}

/// Parses the config spelling of a unit enum, e.g. `unseen_cv`.
pub fn parse_variant<T: serde::de::DeserializeOwned>(s: &str) -> Result<T> {
    use serde::de::IntoDeserializer;
    T::deserialize(s.into_deserializer()).map_err(|e: serde::de::value::Error| Error::Config(e.to_string()))
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_variant(s)
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_variant(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub corpus: PathBuf,
    pub topics: PathBuf,
    pub judgments: PathBuf,
    /// Wiki articles (JSONL) for the aspect model.
    pub aspects: PathBuf,
    /// Relation phrase counts (TSV) for the pattern catalog.
    pub patterns: PathBuf,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Hyperparameters {
    pub k: usize,
    pub d: usize,
    pub m: usize,
    pub n: usize,
    pub shrinkage: f64,
    pub seed: u64,
    pub leaf_estimate: LeafEstimate,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            k: DEFAULT_TREES,
            d: DEFAULT_DEPTH,
            m: DEFAULT_ASPECTS,
            n: DEFAULT_PATTERNS,
            shrinkage: DEFAULT_SHRINKAGE,
            seed: 0,
            leaf_estimate: LeafEstimate::Newton,
        }
    }
}

impl Hyperparameters {
    pub fn gbdt(&self) -> GbdtParams {
        GbdtParams {
            trees: self.k,
            max_depth: self.d,
            shrinkage: self.shrinkage,
            seed: self.seed,
            leaf_estimate: self.leaf_estimate,
        }
    }
}

fn default_name() -> String {
    "experiment".into()
}

fn default_folds() -> usize {
    5
}

fn default_category() -> String {
    "Person".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub model: ModelKind,
    /// Train one model per profile kind.
    #[serde(default)]
    pub segmented: bool,
    #[serde(default = "default_folds")]
    pub folds: usize,
    /// Article category used for the aspect model.
    #[serde(default = "default_category")]
    pub category: String,
    #[serde(default)]
    pub match_mode: MatchMode,
    pub paths: Paths,
    #[serde(default)]
    pub hyper: Hyperparameters,
}

impl ExperimentConfig {
    pub fn new(paths: Paths) -> Self {
        ExperimentConfig {
            name: default_name(),
            mode: Mode::default(),
            model: ModelKind::default(),
            segmented: false,
            folds: default_folds(),
            category: default_category(),
            match_mode: MatchMode::default(),
            paths,
            hyper: Hyperparameters::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Loads a config file; relative paths are taken from the file's
    /// directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_toml(&text)?;
        let base = std::path::absolute(path).map_err(|e| Error::io(path, e))?;
        if let Some(base) = base.parent() {
            config.paths.rebase(base);
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let h = &self.hyper;
        if h.d == 0 || h.m == 0 || h.n == 0 {
            return Err(Error::Config("d, m and n must be positive".into()));
        }
        if !(h.shrinkage > 0.0 && h.shrinkage <= 1.0) {
            return Err(Error::Config(format!("shrinkage {} outside (0, 1]", h.shrinkage)));
        }
        if self.mode == Mode::UnseenCv && self.folds < 2 {
            return Err(Error::Config(format!("unseen_cv needs at least 2 folds, got {}", self.folds)));
        }
        Ok(())
    }

    /// Hash of everything that affects results; the output directory is
    /// left out so reruns elsewhere produce identical files.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.paths.output_dir = PathBuf::new();
        hex::encode(Sha256::digest(c.to_toml().as_bytes()))
    }
}

impl Paths {
    fn rebase(&mut self, base: &Path) {
        for p in [
            &mut self.corpus,
            &mut self.topics,
            &mut self.judgments,
            &mut self.aspects,
            &mut self.patterns,
            &mut self.output_dir,
        ] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    fn inputs(&self) -> [(&'static str, &Path); 5] {
        [
            ("corpus", &self.corpus),
            ("topics", &self.topics),
            ("judgments", &self.judgments),
            ("aspects", &self.aspects),
            ("patterns", &self.patterns),
        ]
    }
}

pub fn sha256_file(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// A pre-filtered (document, entity) pair with its features.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub entity_id: String,
    pub doc_id: String,
    pub stream_time: i64,
    pub features: FeatureVector,
    pub name_fraction: f64,
    pub raw_label: Option<RawLabel>,
}

impl Candidate {
    pub fn row(&self) -> FeatureRow {
        FeatureRow {
            entity_id: self.entity_id.clone(),
            doc_id: self.doc_id.clone(),
            stream_time: self.stream_time,
            raw_label: self.raw_label,
            features: self.features.clone(),
        }
    }

    fn instance(&self, label: RawLabel) -> LabeledInstance {
        LabeledInstance {
            entity_id: self.entity_id.clone(),
            doc_id: self.doc_id.clone(),
            stream_time: self.stream_time,
            features: self.features.clone(),
            raw_label: label,
        }
    }
}

/// Inputs loaded and features extracted, ready for any model kind.
pub struct Prepared {
    pub config: ExperimentConfig,
    pub registry: Registry,
    pub judgments: JudgmentSet,
    /// Judged pairs whose document falls after the entity's cutoff.
    pub test_judgments: JudgmentSet,
    pub aspects: AspectModel,
    pub catalog: PatternCatalog,
    pub schema: Arc<FeatureSchema>,
    pub candidates: Vec<Candidate>,
    pub documents: usize,
    pub warnings: Vec<String>,
}

impl Prepared {
    pub fn load(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let p = &config.paths;
        let registry = load_topics(&p.topics)?;
        let judgments = JudgmentSet::read_tsv(&p.judgments)?;
        let aspects = build_aspect_model(read_articles(&p.aspects)?, &config.category, config.hyper.m)?;
        let catalog = build_pattern_catalog(read_phrase_counts(&p.patterns)?, config.hyper.n)?;
        let mut warnings: Vec<String> = registry.warnings().to_vec();
        warnings.extend(aspects.warnings.iter().cloned());
        warnings.extend(catalog.warnings.iter().cloned());

        let history = build_mention_history(read_corpus(&p.corpus, true)?, &registry)?;
        let extractor = FeatureExtractor::new(&registry, &aspects, &catalog, &history, config.match_mode)?;
        let mut candidates = Vec::new();
        let mut chunk: Vec<Document> = Vec::with_capacity(EXTRACT_CHUNK);
        let mut documents = 0;
        let mut judged_docs: HashMap<String, Vec<(String, RawLabel)>> = HashMap::new();
        for (e, d, l) in judgments.iter() {
            judged_docs.entry(d.to_string()).or_default().push((e.to_string(), l));
        }
        let mut test_judgments = JudgmentSet::new();
        for doc in read_corpus(&p.corpus, true)? {
            let doc = doc?;
            if let Some(pairs) = judged_docs.remove(&doc.doc_id) {
                for (e, l) in pairs {
                    if registry.get(&e).is_some_and(|t| doc.stream_time > t.train_cutoff) {
                        test_judgments.insert(e, doc.doc_id.clone(), l);
                    }
                }
            }
            chunk.push(doc);
            documents += 1;
            if chunk.len() == EXTRACT_CHUNK {
                candidates.extend(extract_chunk(&chunk, &extractor, &registry, &judgments)?);
                chunk.clear();
            }
        }
        candidates.extend(extract_chunk(&chunk, &extractor, &registry, &judgments)?);
        if !judged_docs.is_empty() {
            warnings.push(format!("{} judged documents are not in the corpus", judged_docs.len()));
        }
        let schema = extractor.schema().clone();
        log::info!("{documents} documents, {} candidate pairs", candidates.len());
        Ok(Prepared {
            config: config.clone(),
            registry,
            judgments,
            test_judgments,
            aspects,
            catalog,
            schema,
            candidates,
            documents,
            warnings,
        })
    }

    fn cutoff(&self, entity_id: &str) -> i64 {
        self.registry.get(entity_id).map_or(i64::MIN, |t| t.train_cutoff)
    }

    /// Training instances of `entities`: at or before the cutoff, labeled
    /// vital or useful.
    pub fn training_instances(&self, entities: &BTreeSet<String>) -> Vec<LabeledInstance> {
        self.candidates
            .iter()
            .filter(|c| entities.contains(&c.entity_id) && c.stream_time <= self.cutoff(&c.entity_id))
            .filter_map(|c| c.raw_label.filter(|l| l.is_trainable()).map(|l| c.instance(l)))
            .collect()
    }

    pub fn test_candidates(&self, entities: &BTreeSet<String>) -> Vec<&Candidate> {
        self.candidates
            .iter()
            .filter(|c| entities.contains(&c.entity_id) && c.stream_time > self.cutoff(&c.entity_id))
            .collect()
    }

    pub fn all_entities(&self) -> BTreeSet<String> {
        self.registry.ids().map(str::to_string).collect()
    }

    /// Trains `kind` on the training entities and scores the test
    /// entities. Returns the run and the models used.
    pub fn run_split(
        &self,
        kind: ModelKind,
        segmented: bool,
        train_entities: &BTreeSet<String>,
        test_entities: &BTreeSet<String>,
        run_name: &str,
    ) -> Result<SplitOutcome> {
        let tests = self.test_candidates(test_entities);
        let mut warnings = Vec::new();
        let (entries, models) = match kind.feature_set() {
            None => (
                tests
                    .iter()
                    .map(|c| RunEntry {
                        entity_id: c.entity_id.clone(),
                        doc_id: c.doc_id.clone(),
                        confidence: (1000.0 * c.name_fraction).round().clamp(0.0, 1000.0) as u16,
                    })
                    .collect(),
                Models::default(),
            ),
            Some(set) => {
                let columns = self.schema.columns_for(set);
                let schema = Arc::new(self.schema.project(&columns));
                let train: Vec<LabeledInstance> = self
                    .training_instances(train_entities)
                    .into_iter()
                    .map(|mut i| {
                        i.features = i.features.project(&schema, &columns);
                        i
                    })
                    .collect();
                if train.is_empty() {
                    return Err(Error::Experiment(format!(
                        "training split for {run_name} ({}) is empty",
                        kind.as_str()
                    )));
                }
                let params = self.config.hyper.gbdt();
                let models = if segmented {
                    let seg = train_segmented(&train, &self.registry, &params)?;
                    warnings.extend(seg.warnings.iter().cloned());
                    seg
                } else {
                    Models {
                        global: Some(gbdt::train(&train, &params)?),
                        ..Default::default()
                    }
                };
                let entries = tests
                    .par_iter()
                    .map(|c| {
                        let fv = c.features.project(&schema, &columns);
                        let kind = self.registry.segment_of(&c.entity_id).unwrap_or(ProfileKind::Null);
                        let confidence = predict_confidence(models.model_for(kind), &fv)?;
                        Ok(RunEntry {
                            entity_id: c.entity_id.clone(),
                            doc_id: c.doc_id.clone(),
                            confidence,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                (entries, models)
            }
        };
        let run = RunFile::from_entries(run_name, self.config.hash(), entries)?;
        Ok(SplitOutcome { run, models, warnings })
    }

    /// Runs one model kind under the configured mode.
    pub fn evaluate(&self, kind: ModelKind, segmented: bool) -> Result<Evaluation> {
        let all = self.all_entities();
        let name = format!("{}-{}", self.config.name, kind.as_str());
        let mut warnings = self.warnings.clone();
        match self.config.mode {
            Mode::MainLongtail | Mode::AllEntities => {
                let split = self.run_split(kind, segmented, &all, &all, &name)?;
                warnings.extend(split.warnings.iter().cloned());
                let mut report = sweep_f_macro(&split.run, &self.test_judgments)?;
                if self.config.mode == Mode::MainLongtail {
                    report.segments = Some(segment_report(&report.per_entity, &self.registry)?);
                }
                report.warnings.extend(warnings.iter().cloned());
                Ok(Evaluation {
                    kind,
                    report,
                    run: split.run,
                    folds: Vec::new(),
                    models: vec![("model".into(), split.models)],
                    warnings,
                })
            }
            Mode::UnseenCv => {
                let ids: Vec<String> = all.iter().cloned().collect();
                let splits = cv_split_entities(&ids, self.config.folds, self.config.hyper.seed)?;
                let mut folds = Vec::new();
                let mut models = Vec::new();
                let mut merged = Vec::new();
                for (i, fold) in splits.iter().enumerate() {
                    let train: BTreeSet<String> = fold.train.iter().cloned().collect();
                    let test: BTreeSet<String> = fold.test.iter().cloned().collect();
                    let split = self.run_split(kind, segmented, &train, &test, &format!("{name}-fold{i}"))?;
                    warnings.extend(split.warnings.iter().cloned());
                    let judged = self.test_judgments.restrict(&test);
                    let report = if judged.is_empty() {
                        warnings.push(format!("fold {i} has no judged test entities; not scored"));
                        None
                    } else {
                        Some(sweep_f_macro(&split.run, &judged)?)
                    };
                    merged.extend(split.run.entries().iter().cloned());
                    folds.push(FoldOutcome {
                        test_entities: fold.test.clone(),
                        run: split.run,
                        report,
                    });
                    models.push((format!("fold{i}"), split.models));
                }
                let run = RunFile::from_entries(&name, self.config.hash(), merged)?;
                let mut report = sweep_f_macro(&run, &self.test_judgments)?;
                report.warnings.extend(warnings.iter().cloned());
                Ok(Evaluation {
                    kind,
                    report,
                    run,
                    folds,
                    models,
                    warnings,
                })
            }
        }
    }
}

fn extract_chunk(
    chunk: &[Document],
    extractor: &FeatureExtractor<'_>,
    registry: &Registry,
    judgments: &JudgmentSet,
) -> Result<Vec<Candidate>> {
    let per_doc = chunk
        .par_iter()
        .map(|doc| {
            let analyzed = AnalyzedDocument::new(doc);
            registry
                .iter()
                .filter(|t| extractor.passes_prefilter(&analyzed, &t.entity_id))
                .map(|t| {
                    Ok(Candidate {
                        entity_id: t.entity_id.clone(),
                        doc_id: doc.doc_id.clone(),
                        stream_time: doc.stream_time,
                        features: extractor.extract(&analyzed, t)?,
                        name_fraction: extractor.name_fraction(&analyzed, &t.entity_id),
                        raw_label: judgments.get(&t.entity_id, &doc.doc_id),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_doc.into_iter().flatten().collect())
}

/// A global model and optional per-segment models.
#[derive(Debug, Clone, Default)]
pub struct Models {
    pub global: Option<GbdtModel>,
    pub segments: BTreeMap<ProfileKind, GbdtModel>,
    pub warnings: Vec<String>,
}

impl Models {
    /// The segment's own model when trained, otherwise the global one.
    pub fn model_for(&self, kind: ProfileKind) -> &GbdtModel {
        self.segments
            .get(&kind)
            .or(self.global.as_ref())
            .expect("at least one model is trained")
    }

    /// File names and models: `{label}.json` for the global model and
    /// `{label}_{kind}.json` per segment.
    pub fn files<'a>(&'a self, label: &str) -> Vec<(String, &'a GbdtModel)> {
        let mut out = Vec::new();
        if let Some(g) = &self.global {
            out.push((format!("{label}.json"), g));
        }
        for (kind, m) in &self.segments {
            out.push((format!("{label}_{}.json", kind.as_str()), m));
        }
        out
    }

    pub fn save(&self, dir: &Path, label: &str) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.files(label)
            .into_iter()
            .map(|(name, m)| {
                let path = dir.join(name);
                m.save(&path)?;
                Ok(path)
            })
            .collect()
    }

    /// Loads whichever of the files written by [`Models::save`] exist.
    pub fn load(dir: &Path, label: &str) -> Result<Self> {
        let mut models = Models::default();
        let global = dir.join(format!("{label}.json"));
        if global.exists() {
            models.global = Some(GbdtModel::load(&global)?);
        }
        for kind in ProfileKind::ALL {
            let path = dir.join(format!("{label}_{}.json", kind.as_str()));
            if path.exists() {
                models.segments.insert(kind, GbdtModel::load(&path)?);
            }
        }
        if models.global.is_none() && models.segments.len() < ProfileKind::ALL.len() {
            return Err(Error::Load(format!(
                "{}: no {label}.json and not every segment has a model",
                dir.display()
            )));
        }
        Ok(models)
    }
}

/// Picks the model's columns out of a wider feature vector by name.
pub fn align_features(model: &GbdtModel, features: &FeatureVector) -> Result<Vec<f64>> {
    model
        .feature_names
        .iter()
        .map(|name| {
            features
                .get(name)
                .ok_or_else(|| Error::Config(format!("feature {name} required by the model is missing")))
        })
        .collect()
}

/// Scores feature rows with per-segment models. Entities missing from the
/// registry use the null-profile model.
pub fn predict_rows(
    rows: &[FeatureRow],
    models: &Models,
    registry: &Registry,
    run_name: &str,
    config_hash: &str,
) -> Result<RunFile> {
    let entries = rows
        .par_iter()
        .map(|r| {
            let kind = registry.segment_of(&r.entity_id).unwrap_or(ProfileKind::Null);
            let model = models.model_for(kind);
            let x = align_features(model, &r.features)?;
            Ok(RunEntry {
                entity_id: r.entity_id.clone(),
                doc_id: r.doc_id.clone(),
                confidence: confidence_from_probability(model.probability_of_row(&x)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    RunFile::from_entries(run_name, config_hash, entries)
}

/// One model per profile kind whose training subset has both classes; the
/// remaining kinds fall back to a global model.
pub fn train_segmented(instances: &[LabeledInstance], registry: &Registry, params: &GbdtParams) -> Result<Models> {
    let mut models = Models::default();
    let mut need_global = false;
    for kind in ProfileKind::ALL {
        let subset: Vec<LabeledInstance> = instances
            .iter()
            .filter(|i| registry.segment_of(&i.entity_id) == Some(kind))
            .cloned()
            .collect();
        let positives = subset.iter().filter(|i| i.label()).count();
        if positives == 0 || positives == subset.len() {
            let msg = format!(
                "segment {} has {} training instances ({positives} vital); using the global model",
                kind.as_str(),
                subset.len()
            );
            log::warn!("{msg}");
            models.warnings.push(msg);
            need_global = true;
            continue;
        }
        models.segments.insert(kind, gbdt::train(&subset, params)?);
    }
    if need_global {
        models.global = Some(gbdt::train(instances, params)?);
    }
    Ok(models)
}

#[derive(Debug, Clone)]
pub struct SplitOutcome {
    pub run: RunFile,
    pub models: Models,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct FoldOutcome {
    pub test_entities: Vec<String>,
    pub run: RunFile,
    pub report: Option<ScoreReport>,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub kind: ModelKind,
    pub report: ScoreReport,
    pub run: RunFile,
    pub folds: Vec<FoldOutcome>,
    /// Models per split label ("model" or "foldN").
    pub models: Vec<(String, Models)>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputRecord {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub documents: usize,
    pub candidates: usize,
    pub train_instances: usize,
    pub test_candidates: usize,
    pub judgments: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub seed: u64,
    pub inputs: BTreeMap<String, InputRecord>,
    pub counts: Counts,
    pub outputs: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Load(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub evaluation: Evaluation,
    pub manifest: Manifest,
}

fn write_file(dir: &Path, name: &str, contents: &[u8], outputs: &mut BTreeMap<String, String>) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    outputs.insert(name.to_string(), hex::encode(Sha256::digest(contents)));
    Ok(())
}

fn importance_of(models: &Models) -> BTreeMap<String, BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    if let Some(g) = &models.global {
        out.insert("global".to_string(), feature_importance(g));
    }
    for (kind, m) in &models.segments {
        out.insert(kind.as_str().to_string(), feature_importance(m));
    }
    out
}

/// Runs the configured experiment and writes its artifacts to
/// `config.paths.output_dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let inputs = config
        .paths
        .inputs()
        .into_iter()
        .map(|(name, path)| {
            Ok((
                name.to_string(),
                InputRecord {
                    path: path.to_path_buf(),
                    sha256: sha256_file(path)?,
                },
            ))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    let prepared = Prepared::load(config)?;
    let evaluation = prepared.evaluate(config.model, config.segmented)?;
    write_outputs(config, &prepared, evaluation, inputs)
}

fn write_outputs(
    config: &ExperimentConfig,
    prepared: &Prepared,
    evaluation: Evaluation,
    inputs: BTreeMap<String, InputRecord>,
) -> Result<ExperimentOutcome> {
    let dir = &config.paths.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut outputs = BTreeMap::new();

    write_file(dir, "aspects.json", prepared.aspects.to_json().as_bytes(), &mut outputs)?;
    write_file(dir, "patterns.json", prepared.catalog.to_json().as_bytes(), &mut outputs)?;
    write_file(dir, "run.tsv", evaluation.run.to_tsv().as_bytes(), &mut outputs)?;
    write_file(dir, "report.json", evaluation.report.to_json().as_bytes(), &mut outputs)?;
    write_file(dir, "report.txt", evaluation.report.to_table().as_bytes(), &mut outputs)?;
    for (i, fold) in evaluation.folds.iter().enumerate() {
        write_file(dir, &format!("run_fold{i}.tsv"), fold.run.to_tsv().as_bytes(), &mut outputs)?;
        if let Some(r) = &fold.report {
            write_file(dir, &format!("report_fold{i}.json"), r.to_json().as_bytes(), &mut outputs)?;
        }
    }
    let mut importance = BTreeMap::new();
    for (label, models) in &evaluation.models {
        for (file, model) in models.files(label) {
            write_file(dir, &file, model.to_json().as_bytes(), &mut outputs)?;
        }
        let imp = importance_of(models);
        if !imp.is_empty() {
            importance.insert(label.clone(), imp);
        }
    }
    if !importance.is_empty() {
        let json = serde_json::to_string_pretty(&importance).expect("importance serializes");
        write_file(dir, "importance.json", json.as_bytes(), &mut outputs)?;
    }

    let all = prepared.all_entities();
    let counts = Counts {
        documents: prepared.documents,
        candidates: prepared.candidates.len(),
        train_instances: prepared.training_instances(&all).len(),
        test_candidates: prepared.test_candidates(&all).len(),
        judgments: prepared.judgments.len(),
    };
    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        config_hash: config.hash(),
        seed: config.hyper.seed,
        inputs,
        counts,
        outputs,
        warnings: evaluation.warnings.clone(),
    };
    let path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(ExperimentOutcome { evaluation, manifest })
}

/// Reruns the experiment recorded in a manifest, after checking that every
/// input still has its recorded hash. `output_dir` overrides the recorded
/// output directory.
pub fn rerun_from_manifest(manifest_path: impl AsRef<Path>, output_dir: Option<&Path>) -> Result<ExperimentOutcome> {
    let manifest = Manifest::load(manifest_path)?;
    for (name, rec) in &manifest.inputs {
        let actual = sha256_file(&rec.path)?;
        if actual != rec.sha256 {
            return Err(Error::Experiment(format!(
                "input {name} ({}) changed: expected sha256 {}, found {actual}",
                rec.path.display(),
                rec.sha256
            )));
        }
    }
    let mut config = manifest.config.clone();
    if let Some(dir) = output_dir {
        config.paths.output_dir = dir.to_path_buf();
    }
    run_experiment(&config)
}
