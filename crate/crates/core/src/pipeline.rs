//! End-to-end experiment orchestration: label a corpus from fixtures,
//! extract features, split, cross-validate, train, test, rank — then write
//! `report.json`, `report.txt`, `model.json`, and `features.csv`.
//!
//! Every stage draws its randomness from a named child stream of the single
//! experiment seed, so one number reproduces an entire run byte for byte,
//! with any worker count.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::corpus::io::{load_corpus, read_jsonl};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::eval::{
    compute_metrics, confusion_matrix, rank_features, render_metrics_table, render_ranking,
    ConfusionMatrix, FeatureRanking, MetricsReport,
};
use crate::features::{extract_dataset, write_features_csv, FeatureSchema};
use crate::labeling::{
    label_instance, probe_link_state, query_blacklists, BlacklistProvider, FixtureProbe,
    FixtureProvider, Label, LabelValue, WarningPattern, Whitelist,
};
use crate::learn::{
    cross_validate, predict_dataset, save_model, split_dataset, CVResult, ClassifierConfig,
    Dataset, ModelKind, SplitSpec,
};
use crate::rng::child_seed;
use crate::Scalar;

/// Version stamp written into `report.json`.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Probe responses live in this file inside the fixtures directory.
pub const PROBES_FILE: &str = "probes.jsonl";
/// Optional whitelist file inside the fixtures directory.
pub const WHITELIST_FILE: &str = "whitelist.txt";

/// The three classification runs: everything with all seven features,
/// zero-click links with the five non-click features, and everything with
/// the five non-click features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Experiment {
    FullAllFeatures,
    NonclickSubset,
    FullNonclickFeatures,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::FullAllFeatures => "FULL_ALL_FEATURES",
            Experiment::NonclickSubset => "NONCLICK_SUBSET",
            Experiment::FullNonclickFeatures => "FULL_NONCLICK_FEATURES",
        }
    }

    pub fn parse(raw: &str) -> Result<Experiment> {
        match raw {
            "FULL_ALL_FEATURES" => Ok(Experiment::FullAllFeatures),
            "NONCLICK_SUBSET" => Ok(Experiment::NonclickSubset),
            "FULL_NONCLICK_FEATURES" => Ok(Experiment::FullNonclickFeatures),
            other => Err(Error::InvalidParams(format!(
                "unknown experiment {other:?} (expected FULL_ALL_FEATURES, \
                 NONCLICK_SUBSET, or FULL_NONCLICK_FEATURES)"
            ))),
        }
    }

    /// The feature schema this experiment classifies under.
    pub fn schema(self) -> FeatureSchema {
        match self {
            Experiment::FullAllFeatures => FeatureSchema::Full,
            Experiment::NonclickSubset | Experiment::FullNonclickFeatures => {
                FeatureSchema::NonClick
            }
        }
    }
}

impl std::fmt::Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything one experiment run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub corpus_dir: PathBuf,
    pub fixtures_dir: PathBuf,
    pub out_dir: PathBuf,
    pub experiment: Experiment,
    pub schema: FeatureSchema,
    pub classifier: ClassifierConfig,
    pub seed: u64,
    pub split: SplitSpec,
    pub cv_k: usize,
    pub jobs: usize,
}

impl ExperimentConfig {
    /// Standard configuration: split seed derived from the experiment seed,
    /// 75/25 stratified split, 10-fold cross-validation.
    pub fn new(
        corpus_dir: impl Into<PathBuf>,
        fixtures_dir: impl Into<PathBuf>,
        out_dir: impl Into<PathBuf>,
        experiment: Experiment,
        classifier: ClassifierConfig,
        seed: u64,
    ) -> ExperimentConfig {
        ExperimentConfig {
            corpus_dir: corpus_dir.into(),
            fixtures_dir: fixtures_dir.into(),
            out_dir: out_dir.into(),
            experiment,
            schema: experiment.schema(),
            classifier,
            seed,
            split: SplitSpec {
                train_fraction: 0.75,
                seed: child_seed(seed, "split", 0),
                stratified: true,
            },
            cv_k: 10,
            jobs: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != self.experiment.schema() {
            return Err(Error::InvalidConfig(format!(
                "experiment {} runs under schema {}, not {}",
                self.experiment,
                self.experiment.schema(),
                self.schema
            )));
        }
        if self.cv_k < 2 {
            return Err(Error::InvalidConfig(format!(
                "cv_k must be at least 2, got {}",
                self.cv_k
            )));
        }
        if self.jobs == 0 {
            return Err(Error::InvalidConfig("jobs must be positive".to_string()));
        }
        self.split.validate()
    }
}

/// One labeled link, as a `labels.jsonl` line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkLabel {
    pub link_id: String,
    #[serde(flatten)]
    pub label: Label,
}

/// Load `blacklist_*.txt` providers from a fixtures directory, boxed for
/// [`query_blacklists`].
pub fn load_fixture_providers(dir: &Path) -> Result<Vec<Box<dyn BlacklistProvider>>> {
    Ok(FixtureProvider::discover(dir)?
        .into_iter()
        .map(|p| Box::new(p) as Box<dyn BlacklistProvider>)
        .collect())
}

/// Load the optional whitelist from a fixtures directory.
pub fn load_whitelist(dir: &Path) -> Result<Option<Whitelist>> {
    let path = dir.join(WHITELIST_FILE);
    if path.exists() {
        Ok(Some(Whitelist::from_file(&path)?))
    } else {
        Ok(None)
    }
}

/// The instant labeling stamps on verdicts: the newest link creation, so
/// a corpus labels identically no matter when the run happens.
pub fn corpus_instant(corpus: &Corpus) -> DateTime<Utc> {
    corpus
        .links
        .iter()
        .map(|l| l.created_at)
        .max()
        .unwrap_or(DateTime::UNIX_EPOCH)
}

/// Label every link in the corpus from blacklist fixtures and probed
/// warning states, in corpus order.
pub fn label_corpus(
    corpus: &Corpus,
    providers: &[Box<dyn BlacklistProvider>],
    probes: &FixtureProbe,
    whitelist: Option<&Whitelist>,
) -> Vec<LinkLabel> {
    let pattern = WarningPattern::default();
    let at = corpus_instant(corpus);
    corpus
        .links
        .iter()
        .map(|link| {
            let verdicts = query_blacklists(&link.long_url, providers, whitelist, at);
            let state = probe_link_state(
                &crate::corpus::synth::short_url(&link.short_hash),
                probes,
                &pattern,
                at,
            );
            LinkLabel {
                link_id: link.short_hash.clone(),
                label: label_instance(&verdicts, &state),
            }
        })
        .collect()
}

/// Collapse labels to a lookup map for feature extraction.
pub fn labels_map(labels: &[LinkLabel]) -> BTreeMap<String, LabelValue> {
    labels
        .iter()
        .map(|l| (l.link_id.clone(), l.label.value))
        .collect()
}

/// Read a `labels.jsonl` file back into a lookup map.
pub fn read_labels(path: &Path) -> Result<BTreeMap<String, LabelValue>> {
    let labels: Vec<LinkLabel> = read_jsonl(path)?;
    Ok(labels_map(&labels))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub instances: usize,
    pub malicious: usize,
    pub benign: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub train_fraction: Scalar,
    pub stratified: bool,
    pub train_instances: usize,
    pub test_instances: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvSummary {
    pub k: usize,
    #[serde(flatten)]
    pub result: CVResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSummary {
    pub confusion: ConfusionMatrix,
    pub metrics: MetricsReport,
}

/// The machine-readable experiment report (`report.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub schema_version: u32,
    pub experiment: Experiment,
    pub schema: FeatureSchema,
    pub classifier: ModelKind,
    pub seed: u64,
    pub dataset: DatasetSummary,
    pub split: SplitSummary,
    pub cross_validation: CvSummary,
    pub test: TestSummary,
    pub ranking: FeatureRanking,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_pretty_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    write_text(path, &text)
}

/// Load a `report.json`, refusing unknown versions.
pub fn load_report(path: &Path) -> Result<PipelineReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Schema {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })?;
    match value.get("schema_version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(REPORT_SCHEMA_VERSION) => {}
        Some(v) => {
            return Err(Error::SchemaMismatch {
                expected: format!("report schema_version {REPORT_SCHEMA_VERSION}"),
                found: format!("report schema_version {v}"),
            })
        }
        None => {
            return Err(Error::Schema {
                path: path.to_path_buf(),
                line: 1,
                message: "missing schema_version".to_string(),
            })
        }
    }
    serde_json::from_value(value).map_err(|e| Error::Schema {
        path: path.to_path_buf(),
        line: 1,
        message: e.to_string(),
    })
}

/// Render `report.txt`: the metrics table (one classifier column) plus the
/// ranked feature list.
pub fn render_report_text(report: &PipelineReport) -> String {
    let mut out = format!(
        "Experiment {} ({} schema, {} instances: {} malicious / {} benign)\n\n",
        report.experiment,
        report.schema,
        report.dataset.instances,
        report.dataset.malicious,
        report.dataset.benign
    );
    out.push_str(&render_metrics_table(&[(
        report.classifier.display_name().to_string(),
        report.test.metrics,
    )]));
    out.push_str(&format!(
        "\nCross-validation ({}-fold, training split): accuracy {:.4}, F-measure (malicious) {:.4}\n",
        report.cross_validation.k,
        report.cross_validation.result.mean_accuracy,
        report.cross_validation.result.mean_f1
    ));
    out.push_str("\nFeature ranking (information gain, bits)\n");
    out.push_str(&render_ranking(&report.ranking));
    out
}

/// The links an experiment classifies: everything, or only the links that
/// never received a click.
fn select_links(corpus: &Corpus, experiment: Experiment) -> Vec<crate::corpus::ShortLinkRecord> {
    match experiment {
        Experiment::FullAllFeatures | Experiment::FullNonclickFeatures => corpus.links.clone(),
        Experiment::NonclickSubset => corpus
            .links
            .iter()
            .filter(|l| l.clicks.iter().map(|c| c.count).sum::<u64>() == 0)
            .cloned()
            .collect(),
    }
}

/// Run one experiment end to end and write its four artifacts into
/// `out_dir`. Returns the in-memory report.
pub fn run_pipeline(config: &ExperimentConfig) -> Result<PipelineReport> {
    config.validate()?;
    let corpus = load_corpus(&config.corpus_dir)?;
    let providers = load_fixture_providers(&config.fixtures_dir)?;
    let probes = FixtureProbe::from_file(&config.fixtures_dir.join(PROBES_FILE))?;
    let whitelist = load_whitelist(&config.fixtures_dir)?;

    let labels = label_corpus(&corpus, &providers, &probes, whitelist.as_ref());
    let label_lookup = labels_map(&labels);

    let links = select_links(&corpus, config.experiment);
    let instances = extract_dataset(&links, &label_lookup, config.schema)?;
    let data = Dataset::new(instances)?;
    let (malicious, benign) = data.class_counts();

    let (train, test) = split_dataset(&data, &config.split)?;
    let cv = cross_validate(
        &train,
        config.cv_k,
        &config.classifier,
        child_seed(config.seed, "cv", 0),
        config.jobs,
    )?;
    let model = config.classifier.train(
        &train,
        child_seed(config.seed, "train", 0),
        config.jobs,
    )?;

    let predictions = predict_dataset(&model, &test, config.jobs)?;
    let predicted: Vec<LabelValue> = predictions.iter().map(|p| p.label).collect();
    let truth: Vec<LabelValue> = test.instances.iter().map(|i| i.label).collect();
    let confusion = confusion_matrix(&predicted, &truth)?;
    let metrics = compute_metrics(&confusion)?;

    let ranking = rank_features(&data)?;

    let report = PipelineReport {
        schema_version: REPORT_SCHEMA_VERSION,
        experiment: config.experiment,
        schema: config.schema,
        classifier: config.classifier.kind(),
        seed: config.seed,
        dataset: DatasetSummary {
            instances: data.len(),
            malicious,
            benign,
        },
        split: SplitSummary {
            train_fraction: config.split.train_fraction,
            stratified: config.split.stratified,
            train_instances: train.len(),
            test_instances: test.len(),
        },
        cross_validation: CvSummary {
            k: config.cv_k,
            result: cv,
        },
        test: TestSummary { confusion, metrics },
        ranking,
    };

    std::fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;
    write_features_csv(&config.out_dir.join("features.csv"), &data.instances)?;
    save_model(&config.out_dir.join("model.json"), &model)?;
    write_pretty_json(&config.out_dir.join("report.json"), &report)?;
    write_text(&config.out_dir.join("report.txt"), &render_report_text(&report))?;
    Ok(report)
}
