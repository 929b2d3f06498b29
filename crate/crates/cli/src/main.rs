//! Command-line front end: build resources, extract features, train,
//! predict, score and run whole experiments from a TOML config.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use vitalfilter::aspect::{build_aspect_model, read_articles};
use vitalfilter::entity::{load_topics, Registry};
use vitalfilter::evaluation::{segment_report, sweep_f_macro_with, DEFAULT_MIN_U};
use vitalfilter::features::{read_instances, read_rows, write_instances, write_rows, FeatureRow};
use vitalfilter::gbdt::{self, feature_importance, LeafEstimate};
use vitalfilter::harness::{
    predict_rows, rerun_from_manifest, run_experiment, train_segmented, Mode, ModelKind, Models, Paths, Prepared,
};
use vitalfilter::relation::{build_pattern_catalog, read_phrase_counts, MatchMode};
use vitalfilter::synth::{generate, SynthConfig};
use vitalfilter::{Error, ExperimentConfig, JudgmentSet, RunFile};

#[derive(Parser, Debug)]
#[command(name = "vitalfilter", version, about = "Entity-independent vital document filtering")]
struct Cli {
    #[command(flatten)]
    global: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Config file plus per-field overrides. Flags win over the file.
#[derive(Args, Debug, Default)]
struct Overrides {
    /// TOML experiment config; relative paths resolve against its directory.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    name: Option<String>,
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    #[arg(long, global = true)]
    topics: Option<PathBuf>,
    #[arg(long, global = true)]
    judgments: Option<PathBuf>,
    /// Article JSONL for the aspect model.
    #[arg(long, global = true)]
    aspects: Option<PathBuf>,
    /// Phrase count TSV for the pattern catalog.
    #[arg(long, global = true)]
    patterns: Option<PathBuf>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// main_longtail, unseen_cv or all_entities.
    #[arg(long, global = true)]
    mode: Option<Mode>,
    /// eidf_full, basic_only or name_fraction_baseline.
    #[arg(long, global = true)]
    model: Option<ModelKind>,
    /// Train one model per profile kind.
    #[arg(long, global = true)]
    segmented: bool,
    #[arg(long, global = true)]
    folds: Option<usize>,
    #[arg(long, global = true)]
    category: Option<String>,
    /// surface or lemma.
    #[arg(long, global = true)]
    match_mode: Option<MatchMode>,
    /// Number of trees.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Maximum tree depth.
    #[arg(long, global = true)]
    d: Option<usize>,
    /// Number of aspects.
    #[arg(long, global = true)]
    m: Option<usize>,
    /// Number of relation patterns.
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    shrinkage: Option<f64>,
    /// newton or mean_residual.
    #[arg(long, global = true)]
    leaf_estimate: Option<LeafEstimate>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the aspect model from the article collection.
    BuildAspects {
        /// Output file; defaults to <output-dir>/aspects.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the relation pattern catalog from phrase counts.
    BuildPatterns {
        /// Output file; defaults to <output-dir>/patterns.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract features for every candidate pair. Writes train.tsv
    /// (trainable pairs up to each cutoff), candidates.tsv (pairs after it)
    /// and test_judgments.tsv (judged pairs after it).
    Extract,
    /// Train a model (or one per segment with --segmented) on an instance TSV.
    Train {
        #[arg(long)]
        instances: PathBuf,
        /// Model file stem inside the output directory.
        #[arg(long, default_value = "model")]
        label: String,
    },
    /// Score feature rows with trained models and write a run file.
    Predict {
        #[arg(long)]
        instances: PathBuf,
        /// Directory holding the trained model files.
        #[arg(long)]
        models: PathBuf,
        #[arg(long, default_value = "model")]
        label: String,
        /// Run file; defaults to <output-dir>/run.tsv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a run file against judgments.
    Score {
        #[arg(long)]
        run: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MIN_U)]
        min_u: f64,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run a full experiment from the config, or rerun one from a manifest.
    Experiment {
        #[arg(long, conflicts_with = "config")]
        manifest: Option<PathBuf>,
    },
    /// Generate a synthetic corpus with planted vital signals, plus a config.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = SynthConfig::default().documents)]
        documents: usize,
        #[arg(long, default_value_t = SynthConfig::default().entities)]
        entities: usize,
        /// Documents appended after every cutoff.
        #[arg(long, default_value_t = 0)]
        future_documents: usize,
    },
}

impl Overrides {
    fn resolve(&self) -> vitalfilter::Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::new(Paths {
                corpus: PathBuf::new(),
                topics: PathBuf::new(),
                judgments: PathBuf::new(),
                aspects: PathBuf::new(),
                patterns: PathBuf::new(),
                output_dir: PathBuf::from("out"),
            }),
        };
        let p = &mut c.paths;
        for (target, value) in [
            (&mut p.corpus, &self.corpus),
            (&mut p.topics, &self.topics),
            (&mut p.judgments, &self.judgments),
            (&mut p.aspects, &self.aspects),
            (&mut p.patterns, &self.patterns),
            (&mut p.output_dir, &self.output_dir),
        ] {
            if let Some(v) = value {
                *target = v.clone();
            }
        }
        if let Some(v) = &self.name {
            c.name = v.clone();
        }
        if let Some(v) = self.mode {
            c.mode = v;
        }
        if let Some(v) = self.model {
            c.model = v;
        }
        if self.segmented {
            c.segmented = true;
        }
        if let Some(v) = self.folds {
            c.folds = v;
        }
        if let Some(v) = &self.category {
            c.category = v.clone();
        }
        if let Some(v) = self.match_mode {
            c.match_mode = v;
        }
        let h = &mut c.hyper;
        if let Some(v) = self.seed {
            h.seed = v;
        }
        if let Some(v) = self.k {
            h.k = v;
        }
        if let Some(v) = self.d {
            h.d = v;
        }
        if let Some(v) = self.m {
            h.m = v;
        }
        if let Some(v) = self.n {
            h.n = v;
        }
        if let Some(v) = self.shrinkage {
            h.shrinkage = v;
        }
        if let Some(v) = self.leaf_estimate {
            h.leaf_estimate = v;
        }
        c.validate()?;
        Ok(c)
    }
}

fn require<'a>(path: &'a Path, flag: &str) -> vitalfilter::Result<&'a Path> {
    if path.as_os_str().is_empty() {
        Err(Error::Config(format!("{flag} is required (flag or config file)")))
    } else {
        Ok(path)
    }
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| anyhow::anyhow!("creating {}: {e}", dir.display()))
}

fn registry_or_empty(path: &Path) -> vitalfilter::Result<Registry> {
    if path.as_os_str().is_empty() {
        Registry::from_topics(Vec::new())
    } else {
        load_topics(path)
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Command::Experiment { manifest: Some(path) } = &cli.command {
        let outcome = rerun_from_manifest(path, cli.global.output_dir.as_deref())?;
        print!("{}", outcome.evaluation.report.to_table());
        return Ok(());
    }
    if let Command::Synth {
        out,
        documents,
        entities,
        future_documents,
    } = &cli.command
    {
        let synth = SynthConfig {
            seed: cli.global.seed.unwrap_or(0),
            documents: *documents,
            entities: *entities,
            future_documents: *future_documents,
            ..Default::default()
        };
        let data = generate(&synth)?;
        // Paths relative to the config file keep the directory relocatable.
        let name = |p: &Path| PathBuf::from(p.file_name().expect("synthetic inputs are files"));
        let written = data.write(out)?;
        let config = ExperimentConfig::new(Paths {
            corpus: name(&written.corpus),
            topics: name(&written.topics),
            judgments: name(&written.judgments),
            aspects: name(&written.aspects),
            patterns: name(&written.patterns),
            output_dir: PathBuf::from("out"),
        });
        let path = out.join("config.toml");
        std::fs::write(&path, config.to_toml())?;
        println!("wrote {} documents and {}", data.documents.len(), path.display());
        return Ok(());
    }

    let config = cli.global.resolve()?;
    let out_dir = config.paths.output_dir.clone();
    match cli.command {
        Command::BuildAspects { out } => {
            let articles = read_articles(require(&config.paths.aspects, "--aspects")?)?;
            let model = build_aspect_model(articles, &config.category, config.hyper.m)?;
            for w in &model.warnings {
                log::warn!("{w}");
            }
            let out = out.unwrap_or_else(|| out_dir.join("aspects.json"));
            if let Some(dir) = out.parent() {
                create_dir(dir)?;
            }
            model.save(&out)?;
            println!("{} aspects -> {}", model.len(), out.display());
        }
        Command::BuildPatterns { out } => {
            let phrases = read_phrase_counts(require(&config.paths.patterns, "--patterns")?)?;
            let catalog = build_pattern_catalog(phrases, config.hyper.n)?;
            for w in &catalog.warnings {
                log::warn!("{w}");
            }
            let out = out.unwrap_or_else(|| out_dir.join("patterns.json"));
            if let Some(dir) = out.parent() {
                create_dir(dir)?;
            }
            catalog.save(&out)?;
            println!("{} patterns -> {}", catalog.len(), out.display());
        }
        Command::Extract => {
            let p = &config.paths;
            for (path, flag) in [
                (&p.corpus, "--corpus"),
                (&p.topics, "--topics"),
                (&p.judgments, "--judgments"),
                (&p.aspects, "--aspects"),
                (&p.patterns, "--patterns"),
            ] {
                require(path, flag)?;
            }
            let prepared = Prepared::load(&config)?;
            for w in &prepared.warnings {
                log::warn!("{w}");
            }
            let all = prepared.all_entities();
            let train = prepared.training_instances(&all);
            let test: Vec<FeatureRow> = prepared.test_candidates(&all).into_iter().map(|c| c.row()).collect();
            create_dir(&out_dir)?;
            write_instances(&train, &prepared.schema, out_dir.join("train.tsv"))?;
            write_rows(&test, &prepared.schema, out_dir.join("candidates.tsv"))?;
            prepared.test_judgments.write_tsv(out_dir.join("test_judgments.tsv"))?;
            println!(
                "{} documents, {} training instances, {} test candidates -> {}",
                prepared.documents,
                train.len(),
                test.len(),
                out_dir.display()
            );
        }
        Command::Train { instances, label } => {
            let set = config.model.feature_set().ok_or_else(|| {
                Error::Config(format!("{} is not a trained model kind", config.model.as_str()))
            })?;
            let (schema, mut train) = read_instances(&instances)?;
            train.retain(|i| i.raw_label.is_trainable());
            if train.is_empty() {
                return Err(Error::Experiment(format!("{} has no vital or useful instances", instances.display())).into());
            }
            let columns = schema.columns_for(set);
            let projected = Arc::new(schema.project(&columns));
            for inst in &mut train {
                inst.features = inst.features.project(&projected, &columns);
            }
            let params = config.hyper.gbdt();
            let models = if config.segmented {
                let registry = load_topics(require(&config.paths.topics, "--topics")?)?;
                let models = train_segmented(&train, &registry, &params)?;
                for w in &models.warnings {
                    log::warn!("{w}");
                }
                models
            } else {
                Models {
                    global: Some(gbdt::train(&train, &params)?),
                    ..Default::default()
                }
            };
            let written = models.save(&out_dir, &label)?;
            let importance: BTreeMap<String, BTreeMap<String, f64>> = models
                .files(&label)
                .into_iter()
                .map(|(name, m)| (name, feature_importance(m)))
                .collect();
            let path = out_dir.join(format!("{label}_importance.json"));
            std::fs::write(&path, serde_json::to_string_pretty(&importance)?)?;
            for p in written {
                println!("{}", p.display());
            }
        }
        Command::Predict {
            instances,
            models,
            label,
            out,
        } => {
            let (_, rows) = read_rows(&instances)?;
            let models = Models::load(&models, &label)?;
            let registry = registry_or_empty(&config.paths.topics)?;
            let run_name = format!("{}-{}", config.name, config.model.as_str());
            let run = predict_rows(&rows, &models, &registry, &run_name, &config.hash())?;
            let out = out.unwrap_or_else(|| out_dir.join("run.tsv"));
            if let Some(dir) = out.parent() {
                create_dir(dir)?;
            }
            run.write_tsv(&out)?;
            println!("{} entries -> {}", run.len(), out.display());
        }
        Command::Score { run, min_u, json } => {
            let run = RunFile::read_tsv(&run)?;
            let judgments = JudgmentSet::read_tsv(require(&config.paths.judgments, "--judgments")?)?;
            let mut report = sweep_f_macro_with(&run, &judgments, min_u)?;
            if !config.paths.topics.as_os_str().is_empty() {
                let registry = load_topics(&config.paths.topics)?;
                report.segments = Some(segment_report(&report.per_entity, &registry)?);
            }
            if let Some(path) = json {
                std::fs::write(&path, report.to_json())?;
            }
            print!("{}", report.to_table());
        }
        Command::Experiment { manifest: None } => {
            let outcome = run_experiment(&config)?;
            for w in &outcome.manifest.warnings {
                log::warn!("{w}");
            }
            print!("{}", outcome.evaluation.report.to_table());
            println!("artifacts in {}", out_dir.display());
        }
        Command::Experiment { manifest: Some(_) } | Command::Synth { .. } => unreachable!("handled above"),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match e.downcast_ref::<Error>() {
                Some(err) => {
                    eprintln!("error: {err}");
                    ExitCode::from(err.exit_code() as u8)
                }
                None => {
                    eprintln!("error: {e:#}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
