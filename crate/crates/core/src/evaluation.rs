//! Vital-filtering scorer: threshold-swept macro F, scaled utility,
//! per-entity and per-segment tables, paired t-tests and entity-level
//! cross-validation splits.
//!
//! Conventions applied by every report:
//! * judged pairs missing from the run are scored at confidence 0;
//! * an entity with no vital document has recall 1 at every threshold and is
//!   left out of scaled-utility averages;
//! * precision is 0 when nothing is retrieved.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::entity::Registry;
use crate::error::{Error, Result};

pub const MAX_CONFIDENCE: u16 = 1000;
/// Threshold above every confidence: nothing is retrieved.
pub const SENTINEL_THETA: u16 = 1001;
pub const DEFAULT_MIN_U: f64 = -0.5;

pub const CONVENTIONS: [&str; 3] = [
    "judged pairs absent from the run are scored at confidence 0",
    "entities without vital documents have recall 1 and are excluded from SU averages",
    "precision is 0 when nothing is retrieved",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RawLabel {
    Vital,
    Useful,
    Neutral,
    Garbage,
}

impl RawLabel {
    pub const ALL: [RawLabel; 4] = [RawLabel::Vital, RawLabel::Useful, RawLabel::Neutral, RawLabel::Garbage];

    pub fn as_str(self) -> &'static str {
        match self {
            RawLabel::Vital => "vital",
            RawLabel::Useful => "useful",
            RawLabel::Neutral => "neutral",
            RawLabel::Garbage => "garbage",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        RawLabel::ALL.into_iter().find(|l| l.as_str() == s)
    }

    pub fn is_vital(self) -> bool {
        self == RawLabel::Vital
    }

    /// Labels kept for training.
    pub fn is_trainable(self) -> bool {
        matches!(self, RawLabel::Vital | RawLabel::Useful)
    }
}

fn split_tsv<const N: usize>(line: &str, line_no: usize) -> Result<[&str; N]> {
    let fields: Vec<&str> = line.split('\t').collect();
    fields.try_into().map_err(|f: Vec<&str>| Error::Parse {
        line: line_no,
        message: format!("expected {N} tab-separated fields, found {}", f.len()),
    })
}

/// Raw labels keyed by (entity_id, doc_id).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JudgmentSet {
    labels: BTreeMap<(String, String), RawLabel>,
}

impl JudgmentSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Later entries for the same pair replace earlier ones.
    pub fn insert(&mut self, entity_id: impl Into<String>, doc_id: impl Into<String>, label: RawLabel) {
        self.labels.insert((entity_id.into(), doc_id.into()), label);
    }

    pub fn get(&self, entity_id: &str, doc_id: &str) -> Option<RawLabel> {
        self.labels.get(&(entity_id.to_string(), doc_id.to_string())).copied()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, RawLabel)> {
        self.labels.iter().map(|((e, d), l)| (e.as_str(), d.as_str(), *l))
    }

    pub fn entities(&self) -> BTreeSet<&str> {
        self.labels.keys().map(|(e, _)| e.as_str()).collect()
    }

    /// Judgments restricted to the given entities.
    pub fn restrict(&self, entities: &BTreeSet<String>) -> JudgmentSet {
        JudgmentSet {
            labels: self
                .labels
                .iter()
                .filter(|((e, _), _)| entities.contains(e))
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
        }
    }

    pub fn parse_tsv(reader: impl BufRead) -> Result<Self> {
        let mut set = JudgmentSet::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let [e, d, l] = split_tsv::<3>(&line, i + 1)?;
            let label = RawLabel::parse(l).ok_or_else(|| Error::Schema {
                line: Some(i + 1),
                message: format!("unknown label {l:?}"),
            })?;
            set.insert(e, d, label);
        }
        Ok(set)
    }

    pub fn read_tsv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse_tsv(BufReader::new(file))
    }

    pub fn write_tsv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut s = String::new();
        for (e, d, l) in self.iter() {
            let _ = writeln!(s, "{e}\t{d}\t{}", l.as_str());
        }
        std::fs::write(path, s).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunEntry {
    pub entity_id: String,
    pub doc_id: String,
    pub confidence: u16,
}

/// System output: one confidence per (entity, document) pair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunFile {
    pub run_name: String,
    pub config_hash: String,
    entries: Vec<RunEntry>,
}

impl RunFile {
    pub fn new(run_name: impl Into<String>, config_hash: impl Into<String>) -> Self {
        RunFile {
            run_name: run_name.into(),
            config_hash: config_hash.into(),
            entries: Vec::new(),
        }
    }

    /// Builds a run, rejecting duplicate pairs and out-of-range confidences.
    /// Entries are kept sorted by (entity, document).
    pub fn from_entries(
        run_name: impl Into<String>,
        config_hash: impl Into<String>,
        mut entries: Vec<RunEntry>,
    ) -> Result<Self> {
        entries.sort_by(|a, b| (&a.entity_id, &a.doc_id).cmp(&(&b.entity_id, &b.doc_id)));
        for w in entries.windows(2) {
            if w[0].entity_id == w[1].entity_id && w[0].doc_id == w[1].doc_id {
                return Err(Error::Evaluation(format!(
                    "duplicate run entry for ({}, {})",
                    w[0].entity_id, w[0].doc_id
                )));
            }
        }
        if let Some(e) = entries.iter().find(|e| e.confidence > MAX_CONFIDENCE) {
            return Err(Error::Evaluation(format!(
                "confidence {} for ({}, {}) is outside [0, 1000]",
                e.confidence, e.entity_id, e.doc_id
            )));
        }
        Ok(RunFile {
            run_name: run_name.into(),
            config_hash: config_hash.into(),
            entries,
        })
    }

    pub fn entries(&self) -> &[RunEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn confidence(&self, entity_id: &str, doc_id: &str) -> Option<u16> {
        self.entries
            .binary_search_by(|e| (e.entity_id.as_str(), e.doc_id.as_str()).cmp(&(entity_id, doc_id)))
            .ok()
            .map(|i| self.entries[i].confidence)
    }

    pub fn to_tsv(&self) -> String {
        let mut s = format!("# run_name: {}\n# config_hash: {}\n", self.run_name, self.config_hash);
        for e in &self.entries {
            let _ = writeln!(s, "{}\t{}\t{}", e.entity_id, e.doc_id, e.confidence);
        }
        s
    }

    pub fn write_tsv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        out.write_all(self.to_tsv().as_bytes())
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn parse_tsv(reader: impl BufRead) -> Result<Self> {
        let mut run_name = String::new();
        let mut config_hash = String::new();
        let mut entries = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((k, v)) = meta.split_once(':') {
                    match k.trim() {
                        "run_name" => run_name = v.trim().to_string(),
                        "config_hash" => config_hash = v.trim().to_string(),
                        _ => {}
                    }
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let [e, d, c] = split_tsv::<3>(&line, line_no)?;
            let confidence = c.trim().parse::<u16>().map_err(|err| Error::Parse {
                line: line_no,
                message: format!("confidence {c:?}: {err}"),
            })?;
            entries.push(RunEntry {
                entity_id: e.to_string(),
                doc_id: d.to_string(),
                confidence,
            });
        }
        Self::from_entries(run_name, config_hash, entries)
    }

    pub fn read_tsv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse_tsv(BufReader::new(file))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub theta: u16,
    pub avg_p: f64,
    pub avg_r: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityScore {
    pub entity_id: String,
    pub p: f64,
    pub r: f64,
    pub f: f64,
    /// `None` for entities without vital documents.
    pub su: Option<f64>,
    pub vital: usize,
    pub judged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityTable {
    pub theta: u16,
    pub rows: Vec<EntityScore>,
    pub mean_p: f64,
    pub mean_r: f64,
    pub mean_f: f64,
    pub mean_su: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentStats {
    pub n: usize,
    pub p: f64,
    pub r: f64,
    pub f: f64,
    /// Mean over the segment's entities that have vital documents.
    pub su: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentReport {
    pub groups: BTreeMap<String, SegmentStats>,
    /// Profile kinds with no entity in the table.
    pub omitted: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub run_name: String,
    pub f_macro: f64,
    pub best_theta: u16,
    pub su_max: f64,
    pub su_at_theta: f64,
    pub min_u: f64,
    pub curve: Vec<CurvePoint>,
    pub per_entity: EntityTable,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segments: Option<SegmentReport>,
    pub conventions: Vec<String>,
    pub warnings: Vec<String>,
}

/// Judged pairs of one entity, as (confidence, is_vital), sorted by
/// descending confidence.
struct EntityPool {
    entity_id: String,
    scored: Vec<(u16, bool)>,
    vital: usize,
}

impl EntityPool {
    /// Retrieved (vital, total) counts at threshold `theta`.
    fn retrieved(&self, theta: u16) -> (usize, usize) {
        let n = self.scored.partition_point(|(c, _)| *c >= theta);
        let v = self.scored[..n].iter().filter(|(_, v)| *v).count();
        (v, n)
    }

    fn prf(&self, theta: u16) -> (f64, f64, f64) {
        let (tp, n) = self.retrieved(theta);
        prf(tp, n, self.vital)
    }
}

fn prf(tp: usize, retrieved: usize, vital: usize) -> (f64, f64, f64) {
    let p = if retrieved == 0 { 0.0 } else { tp as f64 / retrieved as f64 };
    let r = if vital == 0 { 1.0 } else { tp as f64 / vital as f64 };
    (p, r, harmonic(p, r))
}

pub fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// SU of one entity with `vital > 0`.
pub fn su_value(tp: usize, fp: usize, vital: usize, min_u: f64) -> f64 {
    let u = 2.0 * tp as f64 - fp as f64;
    let norm_u = u / (2.0 * vital as f64);
    (norm_u.max(min_u) - min_u) / (1.0 - min_u)
}

fn check_min_u(min_u: f64) -> Result<()> {
    if min_u.is_finite() && min_u < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("min_u must be below 1, got {min_u}")))
    }
}

fn mean(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (s, n) = xs.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

fn build_pools(run: &RunFile, judgments: &JudgmentSet, warnings: &mut Vec<String>) -> Result<Vec<EntityPool>> {
    if judgments.is_empty() {
        return Err(Error::Evaluation("judgment set is empty".into()));
    }
    let judged = judgments.entities();
    let unknown: BTreeSet<&str> = run
        .entries()
        .iter()
        .map(|e| e.entity_id.as_str())
        .filter(|e| !judged.contains(e))
        .collect();
    if !unknown.is_empty() {
        let msg = format!(
            "run entries for {} unjudged entities ignored: {}",
            unknown.len(),
            unknown.iter().copied().collect::<Vec<_>>().join(", ")
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let mut pools: BTreeMap<&str, EntityPool> = BTreeMap::new();
    for (e, d, label) in judgments.iter() {
        let pool = pools.entry(e).or_insert_with(|| EntityPool {
            entity_id: e.to_string(),
            scored: Vec::new(),
            vital: 0,
        });
        let c = run.confidence(e, d).unwrap_or(0);
        pool.scored.push((c, label.is_vital()));
        pool.vital += usize::from(label.is_vital());
    }
    let mut pools: Vec<EntityPool> = pools.into_values().collect();
    for p in &mut pools {
        p.scored.sort_by(|a, b| b.cmp(a));
    }
    Ok(pools)
}

fn table_at(pools: &[EntityPool], theta: u16, min_u: f64) -> EntityTable {
    let rows: Vec<EntityScore> = pools
        .iter()
        .map(|pool| {
            let (tp, n) = pool.retrieved(theta);
            let (p, r, f) = prf(tp, n, pool.vital);
            EntityScore {
                entity_id: pool.entity_id.clone(),
                p,
                r,
                f,
                su: (pool.vital > 0).then(|| su_value(tp, n - tp, pool.vital, min_u)),
                vital: pool.vital,
                judged: pool.scored.len(),
            }
        })
        .collect();
    EntityTable {
        theta,
        mean_p: mean(rows.iter().map(|r| r.p)).unwrap_or(0.0),
        mean_r: mean(rows.iter().map(|r| r.r)).unwrap_or(0.0),
        mean_f: mean(rows.iter().map(|r| r.f)).unwrap_or(0.0),
        mean_su: mean(rows.iter().filter_map(|r| r.su)).unwrap_or(0.0),
        rows,
    }
}

fn curve_point(pools: &[EntityPool], theta: u16) -> CurvePoint {
    let n = pools.len() as f64;
    let (sp, sr) = pools.iter().fold((0.0, 0.0), |(sp, sr), pool| {
        let (p, r, _) = pool.prf(theta);
        (sp + p, sr + r)
    });
    let (avg_p, avg_r) = (sp / n, sr / n);
    CurvePoint {
        theta,
        avg_p,
        avg_r,
        h: harmonic(avg_p, avg_r),
    }
}

/// Candidate thresholds: 0, every distinct run confidence, and the sentinel.
fn thresholds(pools: &[EntityPool]) -> Vec<u16> {
    let mut t: BTreeSet<u16> = pools.iter().flat_map(|p| p.scored.iter().map(|(c, _)| *c)).collect();
    t.insert(0);
    t.insert(SENTINEL_THETA);
    t.into_iter().collect()
}

pub fn sweep_f_macro(run: &RunFile, judgments: &JudgmentSet) -> Result<ScoreReport> {
    sweep_f_macro_with(run, judgments, DEFAULT_MIN_U)
}

pub fn sweep_f_macro_with(run: &RunFile, judgments: &JudgmentSet, min_u: f64) -> Result<ScoreReport> {
    check_min_u(min_u)?;
    let mut warnings = Vec::new();
    let pools = build_pools(run, judgments, &mut warnings)?;
    if pools.iter().all(|p| p.vital == 0) {
        warnings.push("no entity has vital documents; SU values are 0".into());
    }
    let curve: Vec<CurvePoint> = thresholds(&pools).into_iter().map(|t| curve_point(&pools, t)).collect();
    let best = curve
        .iter()
        .fold(curve[0], |best, c| if c.h > best.h { *c } else { best });
    let su_max = curve
        .iter()
        .map(|c| table_at(&pools, c.theta, min_u).mean_su)
        .fold(f64::NEG_INFINITY, f64::max);
    let per_entity = table_at(&pools, best.theta, min_u);
    Ok(ScoreReport {
        run_name: run.run_name.clone(),
        f_macro: best.h,
        best_theta: best.theta,
        su_max,
        su_at_theta: per_entity.mean_su,
        min_u,
        curve,
        per_entity,
        segments: None,
        conventions: CONVENTIONS.iter().map(|s| s.to_string()).collect(),
        warnings,
    })
}

pub fn per_entity_prf(run: &RunFile, judgments: &JudgmentSet, theta: u16) -> Result<EntityTable> {
    if theta > SENTINEL_THETA {
        return Err(Error::Parameter(format!("theta {theta} is outside [0, 1001]")));
    }
    let pools = build_pools(run, judgments, &mut Vec::new())?;
    Ok(table_at(&pools, theta, DEFAULT_MIN_U))
}

/// Per-entity SU for explicit retrieval sets, with the mean over entities
/// that have vital documents.
pub fn scaled_utility(
    retrieved: &BTreeMap<String, BTreeSet<String>>,
    judgments: &JudgmentSet,
    min_u: f64,
) -> Result<(BTreeMap<String, f64>, f64)> {
    check_min_u(min_u)?;
    let mut vital: BTreeMap<&str, usize> = BTreeMap::new();
    for (e, _, l) in judgments.iter() {
        *vital.entry(e).or_insert(0) += usize::from(l.is_vital());
    }
    let empty = BTreeSet::new();
    let mut out = BTreeMap::new();
    for (&e, &r_e) in &vital {
        if r_e == 0 {
            continue;
        }
        let docs = retrieved.get(e).unwrap_or(&empty);
        let tp = docs
            .iter()
            .filter(|d| judgments.get(e, d).is_some_and(RawLabel::is_vital))
            .count();
        out.insert(e.to_string(), su_value(tp, docs.len() - tp, r_e, min_u));
    }
    let avg = mean(out.values().copied()).unwrap_or(0.0);
    Ok((out, avg))
}

/// Means of the per-entity table grouped by profile kind.
pub fn segment_report(table: &EntityTable, registry: &Registry) -> Result<SegmentReport> {
    let mut groups: BTreeMap<&str, Vec<&EntityScore>> = BTreeMap::new();
    for row in &table.rows {
        let kind = registry.segment_of(&row.entity_id).ok_or_else(|| {
            Error::Evaluation(format!("entity {} is not in the topic registry", row.entity_id))
        })?;
        groups.entry(kind.as_str()).or_default().push(row);
    }
    let omitted = crate::entity::ProfileKind::ALL
        .iter()
        .map(|k| k.as_str())
        .filter(|k| !groups.contains_key(k))
        .map(str::to_string)
        .collect();
    let groups = groups
        .into_iter()
        .map(|(k, rows)| {
            let stats = SegmentStats {
                n: rows.len(),
                p: mean(rows.iter().map(|r| r.p)).unwrap_or(0.0),
                r: mean(rows.iter().map(|r| r.r)).unwrap_or(0.0),
                f: mean(rows.iter().map(|r| r.f)).unwrap_or(0.0),
                su: mean(rows.iter().filter_map(|r| r.su)),
            };
            (k.to_string(), stats)
        })
        .collect();
    Ok(SegmentReport { groups, omitted })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub p: f64,
    pub n: usize,
}

/// Two-sided paired t-test on aligned per-entity scores.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(Error::Parameter(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::Parameter(format!("paired t-test needs at least 2 pairs, got {n}")));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let m = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    if sd == 0.0 {
        if m == 0.0 {
            return Ok(TTest { t: 0.0, p: 1.0, n });
        }
        return Err(Error::Degenerate(format!(
            "all paired differences equal {m}; t is undefined"
        )));
    }
    let t = m / (sd / (n as f64).sqrt());
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).map_err(|e| Error::Parameter(e.to_string()))?;
    let p = (2.0 * dist.cdf(-t.abs())).min(1.0);
    Ok(TTest { t, p, n })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

/// Seeded shuffle of the sorted ids, cut into `folds` contiguous parts whose
/// sizes differ by at most one (larger parts first).
pub fn cv_split_entities(entity_ids: &[String], folds: usize, seed: u64) -> Result<Vec<Fold>> {
    if folds < 2 {
        return Err(Error::Parameter(format!("need at least 2 folds, got {folds}")));
    }
    if entity_ids.len() < folds {
        return Err(Error::Parameter(format!(
            "{} entities cannot fill {folds} folds",
            entity_ids.len()
        )));
    }
    let mut ids: Vec<String> = entity_ids.to_vec();
    ids.sort();
    ids.dedup();
    if ids.len() != entity_ids.len() {
        return Err(Error::Parameter("entity ids must be unique".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    let (base, extra) = (ids.len() / folds, ids.len() % folds);
    let mut parts = Vec::with_capacity(folds);
    let mut start = 0;
    for i in 0..folds {
        let size = base + usize::from(i < extra);
        parts.push(ids[start..start + size].to_vec());
        start += size;
    }
    Ok((0..folds)
        .map(|i| Fold {
            test: parts[i].clone(),
            train: parts
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .flat_map(|(_, p)| p.iter().cloned())
                .collect(),
        })
        .collect())
}

impl ScoreReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned-column text rendering.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "run: {}", self.run_name);
        for c in &self.conventions {
            let _ = writeln!(s, "# {c}");
        }
        let _ = writeln!(
            s,
            "F_macro {:.4}  theta {}  SU_max {:.4}  SU@theta {:.4}  MinU {}",
            self.f_macro, self.best_theta, self.su_max, self.su_at_theta, self.min_u
        );
        let width = self
            .per_entity
            .rows
            .iter()
            .map(|r| r.entity_id.len())
            .max()
            .unwrap_or(6)
            .max(6);
        let _ = writeln!(s, "{:<width$}  {:>6}  {:>6}  {:>6}  {:>6}  {:>5}", "entity", "P", "R", "F", "SU", "vital");
        for r in &self.per_entity.rows {
            let su = r.su.map_or("-".to_string(), |x| format!("{x:.4}"));
            let _ = writeln!(
                s,
                "{:<width$}  {:>6.4}  {:>6.4}  {:>6.4}  {:>6}  {:>5}",
                r.entity_id, r.p, r.r, r.f, su, r.vital
            );
        }
        let t = &self.per_entity;
        let _ = writeln!(
            s,
            "{:<width$}  {:>6.4}  {:>6.4}  {:>6.4}  {:>6.4}",
            "mean", t.mean_p, t.mean_r, t.mean_f, t.mean_su
        );
        if let Some(seg) = &self.segments {
            let _ = writeln!(s, "{:<8}  {:>4}  {:>6}  {:>6}  {:>6}  {:>6}", "segment", "n", "P", "R", "F", "SU");
            for (k, g) in &seg.groups {
                let su = g.su.map_or("-".to_string(), |x| format!("{x:.4}"));
                let _ = writeln!(s, "{k:<8}  {:>4}  {:>6.4}  {:>6.4}  {:>6.4}  {su:>6}", g.n, g.p, g.r, g.f);
            }
            for k in &seg.omitted {
                let _ = writeln!(s, "# segment {k} has no entities");
            }
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entity::{EntityTopic, EntityType, Profile, ProfileKind};

    fn judgments(rows: &[(&str, &str, RawLabel)]) -> JudgmentSet {
        let mut j = JudgmentSet::new();
        for (e, d, l) in rows {
            j.insert(*e, *d, *l);
        }
        j
    }

    fn run(rows: &[(&str, &str, u16)]) -> RunFile {
        RunFile::from_entries(
            "r",
            "h",
            rows.iter()
                .map(|(e, d, c)| RunEntry {
                    entity_id: e.to_string(),
                    doc_id: d.to_string(),
                    confidence: *c,
                })
                .collect(),
        )
        .unwrap()
    }

    use RawLabel::*;

    #[test]
    fn two_entity_average() {
        // e1: 2 vital, retrieve 1 vital only -> P 1, R 0.5
        // e2: 1 vital, retrieve it plus one non-vital -> P 0.5, R 1
        let j = judgments(&[
            ("e1", "a", Vital),
            ("e1", "b", Vital),
            ("e2", "c", Vital),
            ("e2", "d", Neutral),
        ]);
        let r = run(&[("e1", "a", 800), ("e2", "c", 800), ("e2", "d", 800)]);
        let table = per_entity_prf(&r, &j, 500).unwrap();
        assert_eq!((table.rows[0].p, table.rows[0].r), (1.0, 0.5));
        assert_eq!((table.rows[1].p, table.rows[1].r), (0.5, 1.0));
        let report = sweep_f_macro(&r, &j).unwrap();
        let point = report.curve.iter().find(|c| c.theta == 800).unwrap();
        assert_eq!((point.avg_p, point.avg_r, point.h), (0.75, 0.75, 0.75));
    }

    #[test]
    fn perfect_and_empty_runs() {
        let j = judgments(&[
            ("e1", "a", Vital),
            ("e1", "b", Garbage),
            ("e2", "c", Vital),
            ("e2", "d", Useful),
        ]);
        let perfect = sweep_f_macro(&run(&[("e1", "a", 1000), ("e2", "c", 1000)]), &j).unwrap();
        assert_eq!(perfect.f_macro, 1.0);
        assert_eq!(perfect.su_at_theta, 1.0);
        assert_eq!(perfect.su_max, 1.0);

        let empty = per_entity_prf(&RunFile::new("x", ""), &j, 1001).unwrap();
        assert_eq!(empty.mean_su, 1.0 / 3.0);
        assert!(empty.rows.iter().all(|r| (r.p, r.r, r.f) == (0.0, 0.0, 0.0)));
    }

    #[test]
    fn su_clamps_at_min_u() {
        assert_eq!(su_value(1, 4, 2, -0.5), 0.0);
        assert_eq!(su_value(0, 0, 2, -0.5), 1.0 / 3.0);
        assert_eq!(su_value(2, 0, 2, -0.5), 1.0);
        let j = judgments(&[
            ("e", "v1", Vital),
            ("e", "v2", Vital),
            ("e", "n1", Neutral),
            ("e", "n2", Neutral),
            ("e", "n3", Garbage),
            ("e", "n4", Useful),
        ]);
        let retrieved: BTreeMap<String, BTreeSet<String>> =
            [("e".to_string(), ["v1", "n1", "n2", "n3", "n4"].map(String::from).into())].into();
        let (per, avg) = scaled_utility(&retrieved, &j, -0.5).unwrap();
        assert_eq!(per["e"], 0.0);
        assert_eq!(avg, 0.0);
        assert!(matches!(scaled_utility(&retrieved, &j, 1.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn per_entity_example_and_sentinels() {
        let j = judgments(&[
            ("e", "v1", Vital),
            ("e", "v2", Vital),
            ("e", "n1", Neutral),
            ("e", "n2", Garbage),
            ("e", "n3", Garbage),
        ]);
        let r = run(&[("e", "v1", 900), ("e", "v2", 900), ("e", "n1", 900), ("e", "n2", 900), ("e", "n3", 10)]);
        let row = &per_entity_prf(&r, &j, 500).unwrap().rows[0];
        assert_eq!((row.p, row.r), (0.5, 1.0));
        assert!((row.f - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(per_entity_prf(&r, &j, 0).unwrap().rows[0].r, 1.0);
        assert!(per_entity_prf(&r, &j, 1002).is_err());
    }

    #[test]
    fn missing_run_entries_score_zero_and_unknown_entities_warn() {
        let j = judgments(&[("e", "v", Vital), ("e", "n", Neutral)]);
        let r = run(&[("e", "v", 700), ("ghost", "x", 1000)]);
        let report = sweep_f_macro(&r, &j).unwrap();
        assert_eq!(report.f_macro, 1.0);
        assert_eq!(report.best_theta, 700);
        assert_eq!(report.warnings.len(), 1);
        assert!(sweep_f_macro(&r, &JudgmentSet::new()).is_err());
    }

    #[test]
    fn zero_vital_entity_has_recall_one() {
        let j = judgments(&[("e", "n", Neutral)]);
        let t = per_entity_prf(&RunFile::new("x", ""), &j, 1001).unwrap();
        assert_eq!(t.rows[0].r, 1.0);
        assert_eq!(t.rows[0].su, None);
    }

    fn topic(id: &str, kind: ProfileKind) -> EntityTopic {
        EntityTopic {
            entity_id: id.into(),
            canonical_name: id.into(),
            aliases: vec![id.into()],
            entity_type: EntityType::Per,
            profile: Profile {
                kind,
                text: if kind == ProfileKind::Null { String::new() } else { "x".into() },
                timestamp: None,
            },
            related_entities: vec![],
            train_cutoff: 0,
        }
    }

    fn row(id: &str, f: f64) -> EntityScore {
        EntityScore {
            entity_id: id.into(),
            p: f,
            r: f,
            f,
            su: None,
            vital: 0,
            judged: 0,
        }
    }

    #[test]
    fn segment_means() {
        let reg = Registry::from_topics(vec![
            topic("a", ProfileKind::Null),
            topic("b", ProfileKind::Null),
            topic("c", ProfileKind::Wiki),
        ])
        .unwrap();
        let table = EntityTable {
            theta: 0,
            rows: vec![row("a", 0.4), row("b", 0.6), row("c", 0.3)],
            mean_p: 0.0,
            mean_r: 0.0,
            mean_f: 0.0,
            mean_su: 0.0,
        };
        let s = segment_report(&table, &reg).unwrap();
        assert!((s.groups["null"].f - 0.5).abs() < 1e-15);
        assert_eq!(s.groups["wiki"].f, 0.3);
        assert_eq!(s.omitted, vec!["web".to_string()]);

        let mut missing = table.clone();
        missing.rows.push(row("zzz", 0.1));
        assert!(segment_report(&missing, &reg).is_err());
    }

    #[test]
    fn t_test_examples() {
        let a = [0.3, 0.5, 0.9];
        let same = paired_t_test(&a, &a).unwrap();
        assert_eq!((same.t, same.p), (0.0, 1.0));

        let b = [0.0, 0.0, 0.0];
        let d = [1.0, 2.0, 3.0];
        let r = paired_t_test(&d, &b).unwrap();
        assert!((r.t - 2.0 * 3f64.sqrt()).abs() < 1e-12);
        // two degrees of freedom: two-sided p = 1 - t / sqrt(t^2 + 2)
        let oracle = 1.0 - r.t / (r.t * r.t + 2.0).sqrt();
        assert!((r.p - oracle).abs() < 1e-10, "{} vs {}", r.p, oracle);

        let swapped = paired_t_test(&b, &d).unwrap();
        assert_eq!(swapped.t, -r.t);
        assert_eq!(swapped.p, r.p);

        assert!(matches!(paired_t_test(&[1.0, 2.0], &[0.0, 1.0]), Err(Error::Degenerate(_))));
        assert!(matches!(paired_t_test(&[1.0], &[0.0]), Err(Error::Parameter(_))));
    }

    #[test]
    fn cv_split_sizes_and_partition() {
        let ids: Vec<String> = (0..74).map(|i| format!("e{i:02}")).collect();
        let folds = cv_split_entities(&ids, 5, 7).unwrap();
        let sizes: Vec<usize> = folds.iter().map(|f| f.test.len()).collect();
        assert_eq!(sizes, vec![15, 15, 15, 15, 14]);
        let mut all: Vec<String> = folds.iter().flat_map(|f| f.test.clone()).collect();
        all.sort();
        assert_eq!(all, ids);
        for f in &folds {
            assert_eq!(f.train.len() + f.test.len(), 74);
            assert!(f.test.iter().all(|t| !f.train.contains(t)));
        }
        assert_eq!(folds, cv_split_entities(&ids, 5, 7).unwrap());
        assert!(matches!(cv_split_entities(&ids, 1, 7), Err(Error::Parameter(_))));
    }

    #[test]
    fn run_file_roundtrip() {
        let r = run(&[("e", "b", 3), ("e", "a", 1000)]);
        let back = RunFile::parse_tsv(r.to_tsv().as_bytes()).unwrap();
        assert_eq!(back, r);
        assert!(RunFile::parse_tsv("e\ta\t1001\n".as_bytes()).is_err());
        assert!(RunFile::parse_tsv("e\ta\t1\ne\ta\t2\n".as_bytes()).is_err());
    }
}
