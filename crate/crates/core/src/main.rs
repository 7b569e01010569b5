//! `shortguard` — batch pipeline driver. Subcommands cover every stage:
//! corpus generation, labeling, feature extraction, training,
//! cross-validation, evaluation, feature ranking, encoder profiling,
//! liveness probing, report rendering, and the whole experiment pipeline.
//!
//! All randomness flows from `--seed` through named child streams, so a
//! single number reproduces a run exactly. Offline by default: every lookup
//! is served from fixture files; `--live` is reserved and fails fast until
//! a live provider exists.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use shortguard::corpus::io::{
    load_corpus, save_corpus, save_truth, write_jsonl, Manifest, TRUTH_FILE,
};
use shortguard::corpus::synth::{generate, short_url, GeneratorConfig};
use shortguard::error::{Error, Result};
use shortguard::eval::{compute_metrics, confusion_matrix, rank_features, render_metrics_table, render_ranking};
use shortguard::features::{extract_dataset, read_features_csv, write_features_csv, FeatureSchema};
use shortguard::labeling::{
    domain_liveness_report, probe_link_state, FixtureProbe, LabelValue, LinkStateKind,
    WarningPattern,
};
use shortguard::learn::{
    cross_validate, load_model, predict_dataset, save_model, ClassifierConfig, Dataset,
    ForestParams, TreeParams,
};
use shortguard::pipeline::{
    label_corpus, load_fixture_providers, load_report, load_whitelist, read_labels, run_pipeline,
    Experiment, ExperimentConfig, PipelineReport, TestSummary, PROBES_FILE,
};
use shortguard::profile::{
    activity_timeline, cross_account_overlap, suspicion_report, OverlapReport,
};

#[derive(Parser)]
#[command(name = "shortguard", version, about = "Detect malicious short links and profile the accounts that create them")]
struct Cli {
    /// Root seed; every randomized stage derives a named child stream.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Feature schema, FULL or NON_CLICK (extraction-stage commands).
    #[arg(long, global = true)]
    schema: Option<String>,

    /// Experiment for `pipeline`: FULL_ALL_FEATURES, NONCLICK_SUBSET, or
    /// FULL_NONCLICK_FEATURES.
    #[arg(long, global = true, default_value = "FULL_ALL_FEATURES")]
    experiment: String,

    /// Output directory for produced files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads for stage-internal parallelism; never changes outputs.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    /// Allow live provider lookups instead of fixtures.
    #[arg(long, global = true)]
    live: bool,

    #[command(subcommand)]
    command: Command,
}

/// Classifier choice plus hyperparameters, shared by the training commands.
#[derive(Args, Clone)]
struct ClassifierArgs {
    /// NB (naive Bayes), DT (decision tree), or RF (random forest).
    #[arg(long, default_value = "RF")]
    classifier: String,

    /// Trees in the forest.
    #[arg(long)]
    trees: Option<usize>,

    /// Feature candidates per split; default floor(log2 F) + 1.
    #[arg(long)]
    features_per_split: Option<usize>,

    /// Grow forest trees on the original sample instead of bootstraps.
    #[arg(long)]
    no_bootstrap: bool,

    /// Tree depth cap.
    #[arg(long)]
    max_depth: Option<u32>,

    /// Minimum instances in each side of a split.
    #[arg(long)]
    min_leaf: Option<usize>,

    /// Rank splits by gain ratio instead of raw information gain.
    #[arg(long)]
    gain_ratio: bool,
}

impl ClassifierArgs {
    fn build(&self) -> Result<ClassifierConfig> {
        let tree = TreeParams {
            max_depth: self.max_depth,
            min_leaf: self.min_leaf.unwrap_or_else(|| TreeParams::default().min_leaf),
            use_gain_ratio: self.gain_ratio,
        };
        let config = match self.classifier.as_str() {
            "NB" | "NAIVE_BAYES" => ClassifierConfig::NaiveBayes,
            "DT" | "DECISION_TREE" => ClassifierConfig::DecisionTree(tree),
            "RF" | "RANDOM_FOREST" => ClassifierConfig::RandomForest(ForestParams {
                n_trees: self.trees.unwrap_or_else(|| ForestParams::default().n_trees),
                features_per_split: self.features_per_split,
                bootstrap: !self.no_bootstrap,
                tree,
            }),
            other => {
                return Err(Error::InvalidParams(format!(
                    "unknown classifier {other:?} (expected NB, DT, or RF)"
                )))
            }
        };
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus with fixtures and ground truth.
    Generate {
        /// Benign link count (ignored when --config is given).
        #[arg(long, default_value_t = 1000)]
        benign: usize,
        /// Malicious link count (ignored when --config is given).
        #[arg(long, default_value_t = 1000)]
        malicious: usize,
        /// Full generator configuration as JSON.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Label a corpus from blacklist and probe fixtures.
    Label {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        fixtures: PathBuf,
    },
    /// Extract feature vectors into features.csv.
    Features {
        #[arg(long)]
        corpus: PathBuf,
        /// labels.jsonl produced by `label`.
        #[arg(long)]
        labels: PathBuf,
    },
    /// Train a classifier on a features.csv.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[command(flatten)]
        classifier: ClassifierArgs,
    },
    /// Stratified k-fold cross-validation on a features.csv.
    Crossval {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[command(flatten)]
        classifier: ClassifierArgs,
    },
    /// Score a features.csv with a trained model and report metrics.
    Eval {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Rank features by information gain.
    Rank {
        #[arg(long)]
        features: PathBuf,
    },
    /// Encoder-account analytics: suspicion, timelines, overlap.
    Profile {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Probe link states and domain liveness from fixtures.
    Probe {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        fixtures: PathBuf,
    },
    /// Render one metrics table from report.json files.
    Report {
        /// report.json files, one column each.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Full experiment: label, extract, split, cross-validate, train, test,
    /// rank; writes report.json, report.txt, model.json, features.csv.
    Pipeline {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        fixtures: PathBuf,
        #[arg(long, default_value_t = 0.75)]
        train_fraction: f64,
        /// Split without per-class stratification.
        #[arg(long)]
        unstratified: bool,
        #[arg(long, default_value_t = 10)]
        cv_k: usize,
        #[command(flatten)]
        classifier: ClassifierArgs,
    },
}

/// Print to stdout, exiting quietly when the reader has gone away (for
/// example when output is piped through `head`).
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if out
        .write_all(text.as_bytes())
        .and_then(|()| out.flush())
        .is_err()
    {
        std::process::exit(0);
    }
}

fn parse_schema(raw: &Option<String>, default: FeatureSchema) -> Result<FeatureSchema> {
    match raw {
        Some(s) => FeatureSchema::parse(s),
        None => Ok(default),
    }
}

fn ensure_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    Dataset::new(read_features_csv(path)?)
}

fn safe_file_component(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn cmd_generate(cli: &Cli, benign: usize, malicious: usize, config: &Option<PathBuf>) -> Result<()> {
    let config = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&text).map_err(|e| Error::Schema {
                path: path.clone(),
                line: e.line(),
                message: e.to_string(),
            })?
        }
        None => GeneratorConfig {
            benign_links: benign,
            malicious_links: malicious,
            ..GeneratorConfig::default()
        },
    };
    let artifacts = generate(&config, cli.seed)?;
    ensure_out(&cli.out)?;
    save_corpus(
        &cli.out.join("corpus"),
        &artifacts.corpus,
        &Manifest::synthetic(cli.seed, config),
    )?;
    artifacts.fixtures.write(&cli.out.join("fixtures"))?;
    save_truth(&cli.out.join(TRUTH_FILE), &artifacts.truth)?;
    let malicious_truth = artifacts.truth.values().filter(|&&m| m).count();
    emit(&format!(
        "generated {} links ({} malicious), {} encoder profiles -> {}\n",
        artifacts.corpus.links.len(),
        malicious_truth,
        artifacts.corpus.encoders.len(),
        cli.out.display()
    ));
    Ok(())
}

fn cmd_label(cli: &Cli, corpus_dir: &Path, fixtures_dir: &Path) -> Result<()> {
    let corpus = load_corpus(corpus_dir)?;
    let providers = load_fixture_providers(fixtures_dir)?;
    let probes = FixtureProbe::from_file(&fixtures_dir.join(PROBES_FILE))?;
    let whitelist = load_whitelist(fixtures_dir)?;
    let labels = label_corpus(&corpus, &providers, &probes, whitelist.as_ref());
    ensure_out(&cli.out)?;
    let path = cli.out.join("labels.jsonl");
    write_jsonl(&path, &labels)?;
    let malicious = labels
        .iter()
        .filter(|l| l.label.value == LabelValue::Malicious)
        .count();
    emit(&format!(
        "labeled {} links: {} malicious, {} benign -> {}\n",
        labels.len(),
        malicious,
        labels.len() - malicious,
        path.display()
    ));
    Ok(())
}

fn cmd_features(cli: &Cli, corpus_dir: &Path, labels_path: &Path) -> Result<()> {
    let schema = parse_schema(&cli.schema, FeatureSchema::Full)?;
    let corpus = load_corpus(corpus_dir)?;
    let labels = read_labels(labels_path)?;
    let instances = extract_dataset(&corpus.links, &labels, schema)?;
    ensure_out(&cli.out)?;
    let path = cli.out.join("features.csv");
    write_features_csv(&path, &instances)?;
    emit(&format!(
        "extracted {} {} instances -> {}\n",
        instances.len(),
        schema,
        path.display()
    ));
    Ok(())
}

fn cmd_train(cli: &Cli, features: &Path, classifier: &ClassifierArgs) -> Result<()> {
    let data = load_dataset(features)?;
    let config = classifier.build()?;
    let model = config.train(&data, cli.seed, cli.jobs)?;
    ensure_out(&cli.out)?;
    let path = cli.out.join("model.json");
    save_model(&path, &model)?;
    emit(&format!(
        "trained {} on {} instances -> {}\n",
        model.kind,
        data.len(),
        path.display()
    ));
    Ok(())
}

fn cmd_crossval(cli: &Cli, features: &Path, k: usize, classifier: &ClassifierArgs) -> Result<()> {
    let data = load_dataset(features)?;
    let config = classifier.build()?;
    let result = cross_validate(&data, k, &config, cli.seed, cli.jobs)?;
    emit(&format!("{}\n", serde_json::to_string_pretty(&result).expect("serializes")));
    Ok(())
}

fn cmd_eval(cli: &Cli, features: &Path, model_path: &Path) -> Result<()> {
    let data = load_dataset(features)?;
    let model = load_model(model_path)?;
    let predictions = predict_dataset(&model, &data, cli.jobs)?;
    let predicted: Vec<LabelValue> = predictions.iter().map(|p| p.label).collect();
    let truth: Vec<LabelValue> = data.instances.iter().map(|i| i.label).collect();
    let confusion = confusion_matrix(&predicted, &truth)?;
    let metrics = compute_metrics(&confusion)?;
    let summary = TestSummary { confusion, metrics };
    emit(&format!("{}\n", serde_json::to_string_pretty(&summary).expect("serializes")));
    Ok(())
}

fn cmd_rank(features: &Path) -> Result<()> {
    let data = load_dataset(features)?;
    let ranking = rank_features(&data)?;
    emit(&render_ranking(&ranking));
    Ok(())
}

fn cmd_profile(cli: &Cli, corpus_dir: &Path) -> Result<()> {
    let corpus = load_corpus(corpus_dir)?;
    ensure_out(&cli.out)?;

    let mut suspicion = Vec::new();
    let mut timelines = 0usize;
    for profile in corpus.encoders.values() {
        if profile.history.is_empty() {
            continue;
        }
        suspicion.push(suspicion_report(profile));
        let timeline = activity_timeline(profile)?;
        let mut csv = String::from("month,links,clicks\n");
        for month in &timeline.months {
            csv.push_str(&format!(
                "{},{},{}\n",
                month.month, month.links_created, month.clicks_received
            ));
        }
        let path = cli
            .out
            .join(format!("timeline_{}.csv", safe_file_component(&profile.account_id)));
        std::fs::write(&path, csv).map_err(|e| Error::io(&path, e))?;
        timelines += 1;
    }
    write_jsonl(&cli.out.join("suspicion.jsonl"), &suspicion)?;

    let with_posts: Vec<_> = corpus
        .encoders
        .values()
        .filter(|p| p.posts.as_ref().is_some_and(|posts| !posts.is_empty()))
        .collect();
    let overlap = if with_posts.len() >= 2 {
        cross_account_overlap(&with_posts)?
    } else {
        OverlapReport {
            accounts: Vec::new(),
            pairs: Vec::new(),
        }
    };
    let overlap_path = cli.out.join("overlap.json");
    let mut text = serde_json::to_string_pretty(&overlap).expect("serializes");
    text.push('\n');
    std::fs::write(&overlap_path, text).map_err(|e| Error::io(&overlap_path, e))?;

    let highly = suspicion.iter().filter(|s| s.highly_suspicious).count();
    emit(&format!(
        "profiled {} accounts ({} highly suspicious), {} timelines, {} overlap pairs -> {}\n",
        suspicion.len(),
        highly,
        timelines,
        overlap.pairs.len(),
        cli.out.display()
    ));
    Ok(())
}

fn cmd_probe(cli: &Cli, corpus_dir: &Path, fixtures_dir: &Path) -> Result<()> {
    let corpus = load_corpus(corpus_dir)?;
    let probes = FixtureProbe::from_file(&fixtures_dir.join(PROBES_FILE))?;
    let pattern = WarningPattern::default();
    let at = shortguard::pipeline::corpus_instant(&corpus);

    let mut active = 0usize;
    let mut warning = 0usize;
    let mut dead = 0usize;
    for link in &corpus.links {
        match probe_link_state(&short_url(&link.short_hash), &probes, &pattern, at).state {
            LinkStateKind::Active => active += 1,
            LinkStateKind::Warning => warning += 1,
            LinkStateKind::Dead => dead += 1,
        }
    }
    let liveness = domain_liveness_report(&corpus, &probes, &pattern, at);

    let summary = serde_json::json!({
        "links": {
            "total": corpus.links.len(),
            "active": active,
            "warning": warning,
            "dead": dead,
        },
        "domains": {
            "total": liveness.domains.len(),
            "dead_fraction": liveness.dead_fraction,
            "dead_warning_sum": liveness.dead_warning_sum,
        },
    });
    ensure_out(&cli.out)?;
    let path = cli.out.join("probe.json");
    let mut text = serde_json::to_string_pretty(&summary).expect("serializes");
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    emit(&format!(
        "probed {} links ({} active, {} warning, {} dead); {:.4} of domains dead -> {}\n",
        corpus.links.len(),
        active,
        warning,
        dead,
        liveness.dead_fraction,
        path.display()
    ));
    Ok(())
}

fn cmd_report(cli: &Cli, inputs: &[PathBuf]) -> Result<()> {
    let mut columns = Vec::with_capacity(inputs.len());
    for path in inputs {
        let report: PipelineReport = load_report(path)?;
        columns.push((
            report.classifier.display_name().to_string(),
            report.test.metrics,
        ));
    }
    let table = render_metrics_table(&columns);
    ensure_out(&cli.out)?;
    let path = cli.out.join("report.txt");
    std::fs::write(&path, &table).map_err(|e| Error::io(&path, e))?;
    emit(&table);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_pipeline(
    cli: &Cli,
    corpus_dir: &Path,
    fixtures_dir: &Path,
    train_fraction: f64,
    unstratified: bool,
    cv_k: usize,
    classifier: &ClassifierArgs,
) -> Result<()> {
    let experiment = Experiment::parse(&cli.experiment)?;
    if let Some(schema) = &cli.schema {
        if FeatureSchema::parse(schema)? != experiment.schema() {
            return Err(Error::InvalidConfig(format!(
                "experiment {experiment} runs under schema {}, not {schema}",
                experiment.schema()
            )));
        }
    }
    let mut config = ExperimentConfig::new(
        corpus_dir,
        fixtures_dir,
        &cli.out,
        experiment,
        classifier.build()?,
        cli.seed,
    );
    config.split.train_fraction = train_fraction;
    config.split.stratified = !unstratified;
    config.cv_k = cv_k;
    config.jobs = cli.jobs;
    let report = run_pipeline(&config)?;
    emit(&format!(
        "{} with {}: accuracy {:.4}, F-measure (malicious) {:.4} on {} test instances -> {}\n",
        report.experiment,
        report.classifier.display_name(),
        report.test.metrics.accuracy,
        report.test.metrics.malicious.f_measure.value,
        report.split.test_instances,
        cli.out.display()
    ));
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    if cli.live {
        return Err(Error::Provider {
            provider: "live".to_string(),
            message: "no live providers are configured; this build answers from fixtures only"
                .to_string(),
        });
    }
    match &cli.command {
        Command::Generate {
            benign,
            malicious,
            config,
        } => cmd_generate(cli, *benign, *malicious, config),
        Command::Label { corpus, fixtures } => cmd_label(cli, corpus, fixtures),
        Command::Features { corpus, labels } => cmd_features(cli, corpus, labels),
        Command::Train {
            features,
            classifier,
        } => cmd_train(cli, features, classifier),
        Command::Crossval {
            features,
            k,
            classifier,
        } => cmd_crossval(cli, features, *k, classifier),
        Command::Eval { features, model } => cmd_eval(cli, features, model),
        Command::Rank { features } => cmd_rank(features),
        Command::Profile { corpus } => cmd_profile(cli, corpus),
        Command::Probe { corpus, fixtures } => cmd_probe(cli, corpus, fixtures),
        Command::Report { inputs } => cmd_report(cli, inputs),
        Command::Pipeline {
            corpus,
            fixtures,
            train_fraction,
            unstratified,
            cv_k,
            classifier,
        } => cmd_pipeline(
            cli,
            corpus,
            fixtures,
            *train_fraction,
            *unstratified,
            *cv_k,
            classifier,
        ),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = err.exit_code();
            let detail = serde_json::json!({
                "error": err.to_string(),
                "exit_code": code,
            });
            eprintln!("{detail}");
            if matches!(cli.command, Command::Pipeline { .. }) {
                let path = cli.out.join("error.json");
                if std::fs::create_dir_all(&cli.out).is_ok() {
                    let _ = std::fs::write(&path, format!("{detail:#}\n"));
                }
            }
            ExitCode::from(code as u8)
        }
    }
}
