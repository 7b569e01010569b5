//! From-scratch classifiers over feature vectors: Gaussian naive Bayes, a
//! CART-style decision tree, and a random forest, plus dataset splitting and
//! stratified k-fold cross-validation.
//!
//! Conventions shared by all three classifiers:
//! - MISSING values never reach a model. Each trainer computes per-feature
//!   medians over its *training* instances only, stores them on the model,
//!   and `predict` imputes with them, so evaluation data leaks nothing back
//!   into training.
//! - Scores are the malicious probability: the naive-Bayes posterior, a
//!   leaf's malicious fraction, or the forest's malicious vote fraction.
//!   A score of exactly 0.5 classifies as malicious — a detector on the
//!   fence fails closed.
//! - Everything randomized draws from child streams of (seed, label, index)
//!   (see [`crate::rng`]), so identical inputs give identical models no
//!   matter how many worker threads run.
//!
//! Models serialize to versioned JSON and refuse to load files written
//! under a different `schema_version`.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::ConfusionMatrix;
use crate::features::{FeatureSchema, FeatureVector, LabeledInstance};
use crate::labeling::LabelValue;
use crate::num;
use crate::parallel::run_indexed;
use crate::rng::{child_rng, child_seed};
use crate::Scalar;

/// Labeled instances under one schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub instances: Vec<LabeledInstance>,
    pub schema: FeatureSchema,
}

impl Dataset {
    /// Build a dataset, requiring at least one instance and a uniform schema.
    pub fn new(instances: Vec<LabeledInstance>) -> Result<Dataset> {
        let schema = match instances.first() {
            Some(first) => first.features.schema,
            None => {
                return Err(Error::Degenerate(
                    "a dataset needs at least one instance".to_string(),
                ))
            }
        };
        for inst in &instances {
            if inst.features.schema != schema {
                return Err(Error::SchemaMismatch {
                    expected: schema.as_str().to_string(),
                    found: inst.features.schema.as_str().to_string(),
                });
            }
        }
        Ok(Dataset { instances, schema })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.schema.feature_names().len()
    }

    /// (malicious, benign) instance counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let malicious = self
            .instances
            .iter()
            .filter(|i| i.label == LabelValue::Malicious)
            .count();
        (malicious, self.instances.len() - malicious)
    }

    /// Training additionally needs two instances and both classes.
    fn ensure_trainable(&self) -> Result<()> {
        let (malicious, benign) = self.class_counts();
        if self.len() < 2 || malicious == 0 || benign == 0 {
            return Err(Error::Degenerate(format!(
                "training needs at least 2 instances with both classes present \
                 (got {malicious} malicious, {benign} benign)"
            )));
        }
        Ok(())
    }
}

/// Per-feature medians over the present (non-MISSING) values of these
/// instances; features with no present values fall back to 0.
pub fn imputation_medians(instances: &[LabeledInstance], schema: FeatureSchema) -> Vec<Scalar> {
    let width = schema.feature_names().len();
    let mut columns: Vec<Vec<Scalar>> = vec![Vec::new(); width];
    for inst in instances {
        for (j, value) in inst.features.to_row().into_iter().enumerate() {
            if let Some(v) = value {
                columns[j].push(v);
            }
        }
    }
    columns
        .into_iter()
        .map(|mut column| {
            column.sort_by(|a, b| a.partial_cmp(b).expect("finite feature values"));
            num::median_of_sorted(&column).unwrap_or(0.0)
        })
        .collect()
}

fn impute_row(values: Vec<Option<Scalar>>, medians: &[Scalar]) -> Vec<Scalar> {
    values
        .into_iter()
        .zip(medians)
        .map(|(v, &m)| v.unwrap_or(m))
        .collect()
}

/// Training matrix: imputed rows, labels, and the medians used.
fn imputed_matrix(data: &Dataset) -> (Vec<Vec<Scalar>>, Vec<LabelValue>, Vec<Scalar>) {
    let medians = imputation_medians(&data.instances, data.schema);
    let rows = data
        .instances
        .iter()
        .map(|inst| impute_row(inst.features.to_row(), &medians))
        .collect();
    let labels = data.instances.iter().map(|inst| inst.label).collect();
    (rows, labels, medians)
}

// ---------------------------------------------------------------------------
// Model representation
// ---------------------------------------------------------------------------

/// Version stamp written into model files.
pub const MODEL_SCHEMA_VERSION: u32 = 1;

/// Gaussian variances are floored here so constant features never divide
/// by zero.
pub const VARIANCE_FLOOR: Scalar = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ModelKind {
    NaiveBayes,
    DecisionTree,
    RandomForest,
}

impl ModelKind {
    /// Human-readable name, used as a results-table column header.
    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::NaiveBayes => "Naive Bayes",
            ModelKind::DecisionTree => "Decision Tree",
            ModelKind::RandomForest => "Random Forest",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::NaiveBayes => "NAIVE_BAYES",
            ModelKind::DecisionTree => "DECISION_TREE",
            ModelKind::RandomForest => "RANDOM_FOREST",
        })
    }
}

/// One class's Gaussian summary: prior and per-feature mean/variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianClass {
    pub prior: Scalar,
    pub means: Vec<Scalar>,
    pub variances: Vec<Scalar>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesParams {
    pub malicious: GaussianClass,
    pub benign: GaussianClass,
}

/// A binary tree over numeric features. Leaves keep their training class
/// counts; their malicious fraction is the prediction score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    Leaf {
        malicious: usize,
        benign: usize,
    },
    Split {
        feature: usize,
        threshold: Scalar,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    /// Malicious fraction at the leaf this (fully imputed) row lands in.
    /// Follows `value <= threshold` to the left.
    pub fn score(&self, row: &[Scalar]) -> Scalar {
        match self {
            TreeNode::Leaf { malicious, benign } => {
                let total = malicious + benign;
                if total == 0 {
                    0.5
                } else {
                    *malicious as Scalar / total as Scalar
                }
            }
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if row[*feature] <= *threshold {
                    left.score(row)
                } else {
                    right.score(row)
                }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => 1 + left.node_count() + right.node_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

fn default_min_leaf() -> usize {
    2
}

/// Decision-tree induction parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeParams {
    /// Depth cap; `None` grows until leaves are pure or too small.
    pub max_depth: Option<u32>,
    /// Minimum instances in each child of an admissible split.
    pub min_leaf: usize,
    /// Rank candidate splits by gain ratio instead of raw information gain.
    pub use_gain_ratio: bool,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_leaf: default_min_leaf(),
            use_gain_ratio: false,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_leaf == 0 {
            return Err(Error::InvalidParams("min_leaf must be positive".to_string()));
        }
        if self.max_depth == Some(0) {
            return Err(Error::InvalidParams(
                "max_depth must be positive when set".to_string(),
            ));
        }
        Ok(())
    }
}

fn default_n_trees() -> usize {
    100
}

fn default_bootstrap() -> bool {
    true
}

/// Random-forest parameters. `features_per_split = None` uses the
/// conventional `floor(log2(F)) + 1` candidates per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
    pub tree: TreeParams,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: default_n_trees(),
            features_per_split: None,
            bootstrap: default_bootstrap(),
            tree: TreeParams::default(),
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidParams("n_trees must be positive".to_string()));
        }
        if self.features_per_split == Some(0) {
            return Err(Error::InvalidParams(
                "features_per_split must be positive when set".to_string(),
            ));
        }
        self.tree.validate()
    }
}

/// Default node-level feature-candidate count for `F` features.
pub fn default_features_per_split(feature_count: usize) -> usize {
    debug_assert!(feature_count >= 1);
    feature_count.ilog2() as usize + 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTreeModel {
    pub params: TreeParams,
    pub root: TreeNode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForestModel {
    pub params: ForestParams,
    /// Seed each tree's stream was built from; reproduces the forest.
    pub tree_seeds: Vec<u64>,
    pub trees: Vec<TreeNode>,
}

/// Kind-specific learned structure. Serialized untagged — the variants'
/// field sets are disjoint, and the envelope's `kind` field is checked
/// against the variant on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelParameters {
    NaiveBayes(NaiveBayesParams),
    DecisionTree(DecisionTreeModel),
    RandomForest(RandomForestModel),
}

impl ModelParameters {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParameters::NaiveBayes(_) => ModelKind::NaiveBayes,
            ModelParameters::DecisionTree(_) => ModelKind::DecisionTree,
            ModelParameters::RandomForest(_) => ModelKind::RandomForest,
        }
    }
}

/// A trained classifier plus everything needed to apply it: schema,
/// training-median imputation table, and the seed it was trained under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ModelKind,
    pub schema: FeatureSchema,
    pub training_seed: u64,
    pub imputation_medians: Vec<Scalar>,
    pub parameters: ModelParameters,
}

impl TrainedModel {
    fn check_consistent(&self) -> Result<()> {
        if self.kind != self.parameters.kind() {
            return Err(Error::invariant(
                "model",
                format!(
                    "kind {} does not match parameter structure {}",
                    self.kind,
                    self.parameters.kind()
                ),
            ));
        }
        let width = self.schema.feature_names().len();
        if self.imputation_medians.len() != width {
            return Err(Error::invariant(
                "model",
                format!(
                    "{} imputation medians for a {}-feature schema",
                    self.imputation_medians.len(),
                    width
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct ModelEnvelope {
    schema_version: u32,
    #[serde(flatten)]
    model: TrainedModel,
}

/// Write a model as versioned pretty JSON.
pub fn save_model(path: &Path, model: &TrainedModel) -> Result<()> {
    let envelope = ModelEnvelope {
        schema_version: MODEL_SCHEMA_VERSION,
        model: model.clone(),
    };
    let mut text = serde_json::to_string_pretty(&envelope).expect("model serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Load a model file, refusing unknown `schema_version`s.
pub fn load_model(path: &Path) -> Result<TrainedModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Schema {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })?;
    let version = value.get("schema_version").and_then(|v| v.as_u64());
    match version {
        Some(v) if v == u64::from(MODEL_SCHEMA_VERSION) => {}
        Some(v) => {
            return Err(Error::SchemaMismatch {
                expected: format!("model schema_version {MODEL_SCHEMA_VERSION}"),
                found: format!("model schema_version {v}"),
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
    let envelope: ModelEnvelope =
        serde_json::from_value(value).map_err(|e| Error::Schema {
            path: path.to_path_buf(),
            line: 1,
            message: e.to_string(),
        })?;
    envelope.model.check_consistent()?;
    Ok(envelope.model)
}

// ---------------------------------------------------------------------------
// Naive Bayes
// ---------------------------------------------------------------------------

/// Gaussian naive Bayes: class priors are class frequencies; each feature
/// gets a per-class mean and (floored) population variance.
pub fn train_naive_bayes(train: &Dataset, seed: u64) -> Result<TrainedModel> {
    train.ensure_trainable()?;
    let (rows, labels, medians) = imputed_matrix(train);
    let width = train.feature_count();

    let class_stats = |wanted: LabelValue| -> GaussianClass {
        let class_rows: Vec<&Vec<Scalar>> = rows
            .iter()
            .zip(&labels)
            .filter(|(_, &l)| l == wanted)
            .map(|(r, _)| r)
            .collect();
        let mut means = Vec::with_capacity(width);
        let mut variances = Vec::with_capacity(width);
        for j in 0..width {
            let column: Vec<Scalar> = class_rows.iter().map(|r| r[j]).collect();
            let mean = num::mean(&column);
            means.push(mean);
            variances.push(num::population_variance(&column, mean).max(VARIANCE_FLOOR));
        }
        GaussianClass {
            prior: class_rows.len() as Scalar / rows.len() as Scalar,
            means,
            variances,
        }
    };

    Ok(TrainedModel {
        kind: ModelKind::NaiveBayes,
        schema: train.schema,
        training_seed: seed,
        imputation_medians: medians,
        parameters: ModelParameters::NaiveBayes(NaiveBayesParams {
            malicious: class_stats(LabelValue::Malicious),
            benign: class_stats(LabelValue::Benign),
        }),
    })
}

fn naive_bayes_score(params: &NaiveBayesParams, row: &[Scalar]) -> Scalar {
    let log_joint = |class: &GaussianClass| -> Scalar {
        let mut log = class.prior.ln();
        for (j, &x) in row.iter().enumerate() {
            log += num::log_gaussian(x, class.means[j], class.variances[j]);
        }
        log
    };
    let lm = log_joint(&params.malicious);
    let lb = log_joint(&params.benign);
    (lm - num::log_sum_exp2(lm, lb)).exp()
}

// ---------------------------------------------------------------------------
// Decision tree
// ---------------------------------------------------------------------------

/// Node-level feature selection: all features (plain tree, or a forest with
/// enough candidates), or a seeded sample per node. One sampler lives per
/// tree build, so the RNG-carrying variant's size is irrelevant.
#[allow(clippy::large_enum_variant)]
enum NodeSampler {
    All,
    Random { rng: ChaCha8Rng, count: usize },
}

impl NodeSampler {
    fn candidates(&mut self, feature_count: usize) -> Vec<usize> {
        match self {
            NodeSampler::All => (0..feature_count).collect(),
            NodeSampler::Random { rng, count } => {
                let mut picked: Vec<usize> =
                    rand::seq::index::sample(rng, feature_count, *count).into_vec();
                // Evaluation order is ascending so score ties break toward
                // the lowest feature index, same as the plain tree.
                picked.sort_unstable();
                picked
            }
        }
    }
}

struct Grower<'a> {
    rows: &'a [Vec<Scalar>],
    labels: &'a [LabelValue],
    params: &'a TreeParams,
    feature_count: usize,
}

struct BestSplit {
    score: Scalar,
    feature: usize,
    threshold: Scalar,
}

impl Grower<'_> {
    fn tally(&self, indices: &[usize]) -> (usize, usize) {
        let malicious = indices
            .iter()
            .filter(|&&i| self.labels[i] == LabelValue::Malicious)
            .count();
        (malicious, indices.len() - malicious)
    }

    /// Best admissible split over the candidate features, or `None` when no
    /// split has positive information gain. Candidates are scanned in
    /// ascending (feature, threshold) order and replaced only on a strictly
    /// better score, so ties resolve to the first candidate.
    fn best_split(&self, indices: &[usize], candidates: &[usize]) -> Option<BestSplit> {
        let parent = self.tally(indices);
        let mut best: Option<BestSplit> = None;
        for &feature in candidates {
            let mut column: Vec<(Scalar, LabelValue)> = indices
                .iter()
                .map(|&i| (self.rows[i][feature], self.labels[i]))
                .collect();
            column.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite feature values"));

            let mut left = (0usize, 0usize);
            let mut run_start = 0;
            for boundary in 1..column.len() {
                let prev = column[boundary - 1].0;
                let here = column[boundary].0;
                if prev == here {
                    continue;
                }
                for &(_, label) in &column[run_start..boundary] {
                    match label {
                        LabelValue::Malicious => left.0 += 1,
                        LabelValue::Benign => left.1 += 1,
                    }
                }
                run_start = boundary;

                let threshold = (prev + here) / 2.0;
                if threshold >= here {
                    // Midpoint rounded onto the right value; the split
                    // would not separate the runs.
                    continue;
                }
                let n_left = left.0 + left.1;
                let n_right = column.len() - n_left;
                if n_left < self.params.min_leaf || n_right < self.params.min_leaf {
                    continue;
                }
                let right = (parent.0 - left.0, parent.1 - left.1);
                let gain: Scalar = num::split_gain(parent, left, right);
                if gain <= 1e-12 {
                    continue;
                }
                let score = if self.params.use_gain_ratio {
                    gain / num::split_info::<Scalar>(n_left, n_right)
                } else {
                    gain
                };
                if best.as_ref().is_none_or(|b| score > b.score) {
                    best = Some(BestSplit {
                        score,
                        feature,
                        threshold,
                    });
                }
            }
        }
        best
    }

    fn grow(&self, indices: Vec<usize>, depth: u32, sampler: &mut NodeSampler) -> TreeNode {
        let (malicious, benign) = self.tally(&indices);
        let leaf = TreeNode::Leaf { malicious, benign };
        if malicious == 0 || benign == 0 {
            return leaf;
        }
        if let Some(cap) = self.params.max_depth {
            if depth >= cap {
                return leaf;
            }
        }
        if indices.len() < 2 * self.params.min_leaf {
            return leaf;
        }
        let candidates = sampler.candidates(self.feature_count);
        let Some(split) = self.best_split(&indices, &candidates) else {
            return leaf;
        };
        let (lhs, rhs): (Vec<usize>, Vec<usize>) = indices
            .into_iter()
            .partition(|&i| self.rows[i][split.feature] <= split.threshold);
        TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: Box::new(self.grow(lhs, depth + 1, sampler)),
            right: Box::new(self.grow(rhs, depth + 1, sampler)),
        }
    }
}

/// Greedy top-down induction with binary numeric splits at midpoints
/// between sorted distinct values, maximizing information gain (or gain
/// ratio when configured).
pub fn train_decision_tree(
    train: &Dataset,
    params: &TreeParams,
    seed: u64,
) -> Result<TrainedModel> {
    params.validate()?;
    train.ensure_trainable()?;
    let (rows, labels, medians) = imputed_matrix(train);
    let grower = Grower {
        rows: &rows,
        labels: &labels,
        params,
        feature_count: train.feature_count(),
    };
    let root = grower.grow((0..rows.len()).collect(), 0, &mut NodeSampler::All);
    Ok(TrainedModel {
        kind: ModelKind::DecisionTree,
        schema: train.schema,
        training_seed: seed,
        imputation_medians: medians,
        parameters: ModelParameters::DecisionTree(DecisionTreeModel {
            params: params.clone(),
            root,
        }),
    })
}

// ---------------------------------------------------------------------------
// Random forest
// ---------------------------------------------------------------------------

/// Bagged trees with per-node feature sampling. Each tree owns a recorded
/// child seed, so training is deterministic and independent of `jobs`.
/// With `n_trees=1`, `bootstrap=false`, and `features_per_split >= F`, no
/// randomness is consumed and the single tree equals [`train_decision_tree`].
pub fn train_random_forest(
    train: &Dataset,
    params: &ForestParams,
    seed: u64,
    jobs: usize,
) -> Result<TrainedModel> {
    params.validate()?;
    train.ensure_trainable()?;
    let (rows, labels, medians) = imputed_matrix(train);
    let feature_count = train.feature_count();
    let per_split = params
        .features_per_split
        .unwrap_or_else(|| default_features_per_split(feature_count));

    let tree_seeds: Vec<u64> = (0..params.n_trees)
        .map(|i| child_seed(seed, "forest_tree", i as u64))
        .collect();
    let grower = Grower {
        rows: &rows,
        labels: &labels,
        params: &params.tree,
        feature_count,
    };
    let trees = run_indexed(params.n_trees, jobs, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(tree_seeds[i]);
        let indices: Vec<usize> = if params.bootstrap {
            (0..rows.len()).map(|_| rng.gen_range(0..rows.len())).collect()
        } else {
            (0..rows.len()).collect()
        };
        let mut sampler = if per_split >= feature_count {
            NodeSampler::All
        } else {
            NodeSampler::Random {
                rng,
                count: per_split,
            }
        };
        grower.grow(indices, 0, &mut sampler)
    });

    Ok(TrainedModel {
        kind: ModelKind::RandomForest,
        schema: train.schema,
        training_seed: seed,
        imputation_medians: medians,
        parameters: ModelParameters::RandomForest(RandomForestModel {
            params: params.clone(),
            tree_seeds,
            trees,
        }),
    })
}

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

/// A classified instance: malicious probability and the thresholded label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: LabelValue,
    pub score: Scalar,
}

/// Score a feature vector. MISSING fields are imputed with the model's
/// training medians; the vector's schema must match the model's.
pub fn predict(model: &TrainedModel, fv: &FeatureVector) -> Result<Prediction> {
    if fv.schema != model.schema {
        return Err(Error::SchemaMismatch {
            expected: model.schema.as_str().to_string(),
            found: fv.schema.as_str().to_string(),
        });
    }
    let row = impute_row(fv.to_row(), &model.imputation_medians);
    let score = match &model.parameters {
        ModelParameters::NaiveBayes(params) => naive_bayes_score(params, &row),
        ModelParameters::DecisionTree(dt) => dt.root.score(&row),
        ModelParameters::RandomForest(rf) => {
            let votes = rf
                .trees
                .iter()
                .filter(|tree| tree.score(&row) >= 0.5)
                .count();
            votes as Scalar / rf.trees.len() as Scalar
        }
    };
    Ok(Prediction {
        label: if score >= 0.5 {
            LabelValue::Malicious
        } else {
            LabelValue::Benign
        },
        score,
    })
}

/// Convenience: predictions for a whole dataset, parallel across instances.
pub fn predict_dataset(
    model: &TrainedModel,
    data: &Dataset,
    jobs: usize,
) -> Result<Vec<Prediction>> {
    if data.schema != model.schema {
        return Err(Error::SchemaMismatch {
            expected: model.schema.as_str().to_string(),
            found: data.schema.as_str().to_string(),
        });
    }
    let predictions = run_indexed(data.len(), jobs, |i| {
        predict(model, &data.instances[i].features).expect("schema already checked")
    });
    Ok(predictions)
}

// ---------------------------------------------------------------------------
// Classifier dispatch
// ---------------------------------------------------------------------------

/// Which classifier to train, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClassifierConfig {
    NaiveBayes,
    DecisionTree(TreeParams),
    RandomForest(ForestParams),
}

impl ClassifierConfig {
    pub fn kind(&self) -> ModelKind {
        match self {
            ClassifierConfig::NaiveBayes => ModelKind::NaiveBayes,
            ClassifierConfig::DecisionTree(_) => ModelKind::DecisionTree,
            ClassifierConfig::RandomForest(_) => ModelKind::RandomForest,
        }
    }

    pub fn train(&self, data: &Dataset, seed: u64, jobs: usize) -> Result<TrainedModel> {
        match self {
            ClassifierConfig::NaiveBayes => train_naive_bayes(data, seed),
            ClassifierConfig::DecisionTree(params) => train_decision_tree(data, params, seed),
            ClassifierConfig::RandomForest(params) => {
                train_random_forest(data, params, seed, jobs)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Splitting and cross-validation
// ---------------------------------------------------------------------------

/// How to divide a dataset into train and test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Fraction that becomes training data, strictly between 0 and 1.
    pub train_fraction: Scalar,
    pub seed: u64,
    pub stratified: bool,
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidParams(format!(
                "train_fraction must lie strictly between 0 and 1, got {}",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

/// Disjoint, exhaustive train/test partition. Stratified splits take
/// `floor(fraction × n)` of each class; both sides keep the dataset's
/// original instance order.
pub fn split_dataset(data: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    spec.validate()?;
    let mut train_marks = vec![false; data.len()];

    if spec.stratified {
        for (class_index, class) in [LabelValue::Malicious, LabelValue::Benign]
            .into_iter()
            .enumerate()
        {
            let mut indices: Vec<usize> = (0..data.len())
                .filter(|&i| data.instances[i].label == class)
                .collect();
            if indices.is_empty() {
                return Err(Error::Degenerate(format!(
                    "stratified split requires both classes; {class:?} is absent"
                )));
            }
            let take = (spec.train_fraction * indices.len() as Scalar).floor() as usize;
            indices.shuffle(&mut child_rng(spec.seed, "split_strata", class_index as u64));
            for &i in &indices[..take] {
                train_marks[i] = true;
            }
        }
    } else {
        let mut indices: Vec<usize> = (0..data.len()).collect();
        let take = (spec.train_fraction * indices.len() as Scalar).floor() as usize;
        indices.shuffle(&mut child_rng(spec.seed, "split", 0));
        for &i in &indices[..take] {
            train_marks[i] = true;
        }
    }

    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, inst) in data.instances.iter().enumerate() {
        if train_marks[i] {
            train.push(inst.clone());
        } else {
            test.push(inst.clone());
        }
    }
    Ok((Dataset::new(train)?, Dataset::new(test)?))
}

/// One fold's held-out metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub fold: usize,
    pub accuracy: Scalar,
    pub f1_malicious: Scalar,
}

/// Cross-validation summary: per-fold metrics plus their means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CVResult {
    pub folds: Vec<FoldOutcome>,
    pub mean_accuracy: Scalar,
    pub mean_f1: Scalar,
}

/// Build stratified fold membership: `assignment[i]` is instance i's test
/// fold. Each class is shuffled and dealt round-robin, with the fold
/// counter carried across classes, so per-class fold sizes differ by at
/// most one and no fold is empty while k <= N. This is the exact partition
/// `cross_validate` uses for the same (data, k, seed).
pub fn stratified_folds(data: &Dataset, k: usize, seed: u64) -> Vec<usize> {
    let mut assignment = vec![0usize; data.len()];
    let mut next_fold = 0usize;
    for (class_index, class) in [LabelValue::Malicious, LabelValue::Benign]
        .into_iter()
        .enumerate()
    {
        let mut indices: Vec<usize> = (0..data.len())
            .filter(|&i| data.instances[i].label == class)
            .collect();
        indices.shuffle(&mut child_rng(seed, "cv_strata", class_index as u64));
        for &i in &indices {
            assignment[i] = next_fold % k;
            next_fold += 1;
        }
    }
    assignment
}

/// Stratified k-fold cross-validation: every instance is tested exactly
/// once; each fold's model (and its imputation medians) sees only the other
/// folds. Deterministic for fixed (data, k, config, seed) regardless of
/// `jobs`.
pub fn cross_validate(
    data: &Dataset,
    k: usize,
    config: &ClassifierConfig,
    seed: u64,
    jobs: usize,
) -> Result<CVResult> {
    if k < 2 || k > data.len() {
        return Err(Error::InvalidParams(format!(
            "k must satisfy 2 <= k <= {}, got {k}",
            data.len()
        )));
    }
    let assignment = stratified_folds(data, k, seed);

    let outcomes = run_indexed(k, jobs, |fold| -> Result<FoldOutcome> {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (i, inst) in data.instances.iter().enumerate() {
            if assignment[i] == fold {
                test.push(inst.clone());
            } else {
                train.push(inst.clone());
            }
        }
        let train = Dataset::new(train)?;
        let test = Dataset::new(test)?;
        let model = config.train(&train, child_seed(seed, "cv_fold", fold as u64), 1)?;
        let mut matrix = ConfusionMatrix::default();
        for inst in &test.instances {
            let prediction = predict(&model, &inst.features)?;
            matrix.record(inst.label, prediction.label);
        }
        Ok(FoldOutcome {
            fold,
            accuracy: matrix.accuracy(),
            f1_malicious: matrix.f_measure(LabelValue::Malicious),
        })
    });

    let mut folds = Vec::with_capacity(k);
    for outcome in outcomes {
        folds.push(outcome?);
    }
    let mean_accuracy = num::mean(&folds.iter().map(|f| f.accuracy).collect::<Vec<_>>());
    let mean_f1 = num::mean(&folds.iter().map(|f| f.f1_malicious).collect::<Vec<_>>());
    Ok(CVResult {
        folds,
        mean_accuracy,
        mean_f1,
    })
}
