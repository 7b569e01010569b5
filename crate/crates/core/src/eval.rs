//! Classifier evaluation: confusion matrices, accuracy / precision /
//! recall / F-measure (with both classes taken as positive in turn),
//! support-weighted F averaging, information-gain feature ranking, and an
//! aligned plain-text results table.
//!
//! Division-by-zero metrics (for example precision with no positive
//! predictions) report a value of 0 carrying `defined: false` rather than
//! NaN, so downstream arithmetic and serialization stay total.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labeling::LabelValue;
use crate::learn::{imputation_medians, Dataset};
use crate::num;
use crate::Scalar;

/// 2x2 count table with MALICIOUS as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// Count one (truth, prediction) pair.
    pub fn record(&mut self, truth: LabelValue, predicted: LabelValue) {
        match (truth, predicted) {
            (LabelValue::Malicious, LabelValue::Malicious) => self.tp += 1,
            (LabelValue::Malicious, LabelValue::Benign) => self.fn_ += 1,
            (LabelValue::Benign, LabelValue::Malicious) => self.fp += 1,
            (LabelValue::Benign, LabelValue::Benign) => self.tn += 1,
        }
    }

    /// The four cells with `class` treated as positive.
    fn oriented(&self, class: LabelValue) -> (usize, usize, usize, usize) {
        match class {
            LabelValue::Malicious => (self.tp, self.fp, self.fn_, self.tn),
            LabelValue::Benign => (self.tn, self.fn_, self.fp, self.tp),
        }
    }

    /// Actual instances of `class`.
    pub fn support(&self, class: LabelValue) -> usize {
        let (tp, _, fn_, _) = self.oriented(class);
        tp + fn_
    }

    pub fn accuracy(&self) -> Scalar {
        (self.tp + self.tn) as Scalar / self.total() as Scalar
    }

    pub fn precision(&self, class: LabelValue) -> MetricValue {
        let (tp, fp, _, _) = self.oriented(class);
        MetricValue::ratio(tp as Scalar, (tp + fp) as Scalar)
    }

    pub fn recall(&self, class: LabelValue) -> MetricValue {
        let (tp, _, fn_, _) = self.oriented(class);
        MetricValue::ratio(tp as Scalar, (tp + fn_) as Scalar)
    }

    /// Harmonic mean of precision and recall, as a bare value (0 when
    /// undefined); see [`ConfusionMatrix::f_measure_value`] for the flag.
    pub fn f_measure(&self, class: LabelValue) -> Scalar {
        self.f_measure_value(class).value
    }

    pub fn f_measure_value(&self, class: LabelValue) -> MetricValue {
        let p = self.precision(class).value;
        let r = self.recall(class).value;
        MetricValue::ratio(2.0 * p * r, p + r)
    }
}

/// Tally predictions against truth, index by index.
pub fn confusion_matrix(
    predictions: &[LabelValue],
    truth: &[LabelValue],
) -> Result<ConfusionMatrix> {
    if predictions.len() != truth.len() {
        return Err(Error::InvalidParams(format!(
            "{} predictions against {} truth labels",
            predictions.len(),
            truth.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::Degenerate(
            "cannot evaluate zero predictions".to_string(),
        ));
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &t) in predictions.iter().zip(truth) {
        cm.record(t, p);
    }
    Ok(cm)
}

/// A ratio that may have had a 0/0 denominator: `value` is then 0 and
/// `defined` is false.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub value: Scalar,
    pub defined: bool,
}

impl MetricValue {
    fn ratio(numerator: Scalar, denominator: Scalar) -> MetricValue {
        if denominator == 0.0 {
            MetricValue {
                value: 0.0,
                defined: false,
            }
        } else {
            MetricValue {
                value: numerator / denominator,
                defined: true,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: MetricValue,
    pub recall: MetricValue,
    pub f_measure: MetricValue,
}

/// The full metric set for one classifier run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: Scalar,
    pub malicious: ClassMetrics,
    pub benign: ClassMetrics,
    /// Per-class F-measures averaged with class support as weights.
    pub weighted_f_measure: MetricValue,
}

/// Accuracy plus per-class precision/recall/F with malicious and benign
/// each taken as the positive class, and the support-weighted F average.
pub fn compute_metrics(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    if cm.total() == 0 {
        return Err(Error::Degenerate(
            "confusion matrix has no observations".to_string(),
        ));
    }
    let class_metrics = |class: LabelValue| ClassMetrics {
        precision: cm.precision(class),
        recall: cm.recall(class),
        f_measure: cm.f_measure_value(class),
    };
    let malicious = class_metrics(LabelValue::Malicious);
    let benign = class_metrics(LabelValue::Benign);

    let support_mal = cm.support(LabelValue::Malicious) as Scalar;
    let support_ben = cm.support(LabelValue::Benign) as Scalar;
    let weighted_f_measure = MetricValue {
        value: (support_mal * malicious.f_measure.value + support_ben * benign.f_measure.value)
            / cm.total() as Scalar,
        // A class with no actual instances carries zero weight, so its
        // undefined F cannot poison the average.
        defined: (support_mal == 0.0 || malicious.f_measure.defined)
            && (support_ben == 0.0 || benign.f_measure.defined),
    };

    Ok(MetricsReport {
        accuracy: cm.accuracy(),
        malicious,
        benign,
        weighted_f_measure,
    })
}

// ---------------------------------------------------------------------------
// Feature ranking
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature {
    pub feature: String,
    /// Class-entropy reduction in bits from the feature's best binary
    /// threshold.
    pub gain: Scalar,
}

pub type FeatureRanking = Vec<RankedFeature>;

/// Best single-threshold information gain for one (value, label) column.
/// Candidates are midpoints between consecutive distinct sorted values;
/// any child size is admissible.
fn best_gain(column: &mut [(Scalar, LabelValue)]) -> Scalar {
    column.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite feature values"));
    let malicious = column
        .iter()
        .filter(|(_, l)| *l == LabelValue::Malicious)
        .count();
    let parent = (malicious, column.len() - malicious);

    let mut best: Scalar = 0.0;
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
        let right = (parent.0 - left.0, parent.1 - left.1);
        let gain: Scalar = num::split_gain(parent, left, right);
        if gain > best {
            best = gain;
        }
    }
    best
}

/// Rank every feature of the dataset by its best-threshold information
/// gain against the class label, in bits. MISSING values are imputed with
/// the dataset's per-feature medians first. Descending by gain; equal gains
/// order by feature name.
pub fn rank_features(data: &Dataset) -> Result<FeatureRanking> {
    let (n_malicious, n_benign) = data.class_counts();
    if n_malicious == 0 || n_benign == 0 {
        return Err(Error::Degenerate(
            "feature ranking needs both classes present".to_string(),
        ));
    }
    let medians = imputation_medians(&data.instances, data.schema);
    let names = data.schema.feature_names();

    let mut ranking: FeatureRanking = names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let mut column: Vec<(Scalar, LabelValue)> = data
                .instances
                .iter()
                .map(|inst| {
                    let value = inst.features.to_row()[j].unwrap_or(medians[j]);
                    (value, inst.label)
                })
                .collect();
            RankedFeature {
                feature: name.to_string(),
                gain: best_gain(&mut column),
            }
        })
        .collect();
    ranking.sort_by(|a, b| {
        b.gain
            .partial_cmp(&a.gain)
            .expect("gains are finite")
            .then_with(|| a.feature.cmp(&b.feature))
    });
    Ok(ranking)
}

// ---------------------------------------------------------------------------
// Plain-text results table
// ---------------------------------------------------------------------------

/// Row labels for [`render_metrics_table`], in print order.
pub const METRIC_ROWS: [&str; 7] = [
    "Accuracy",
    "Recall (malicious)",
    "Recall (Benign)",
    "Precision (malicious)",
    "Precision (Benign)",
    "F-measure (malicious)",
    "F-measure (benign)",
];

fn metric_row_values(report: &MetricsReport) -> [Scalar; 7] {
    [
        report.accuracy,
        report.malicious.recall.value,
        report.benign.recall.value,
        report.malicious.precision.value,
        report.benign.precision.value,
        report.malicious.f_measure.value,
        report.benign.f_measure.value,
    ]
}

/// Render one aligned table: a metric-name column followed by one column
/// per classifier, values as percentages with two decimals.
pub fn render_metrics_table(columns: &[(String, MetricsReport)]) -> String {
    let mut header: Vec<String> = vec!["Evaluation Metric".to_string()];
    header.extend(columns.iter().map(|(name, _)| name.clone()));

    let mut rows: Vec<Vec<String>> = Vec::with_capacity(METRIC_ROWS.len());
    for (i, label) in METRIC_ROWS.iter().enumerate() {
        let mut row = vec![label.to_string()];
        for (_, report) in columns {
            row.push(format!("{:.2}%", metric_row_values(report)[i] * 100.0));
        }
        rows.push(row);
    }

    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    for row in &rows {
        for (j, cell) in row.iter().enumerate() {
            widths[j] = widths[j].max(cell.len());
        }
    }

    let render_row = |cells: &[String]| -> String {
        let mut line = String::new();
        for (j, cell) in cells.iter().enumerate() {
            if j > 0 {
                line.push_str("  ");
            }
            line.push_str(cell);
            let pad = widths[j] - cell.len();
            if j + 1 < cells.len() {
                line.push_str(&" ".repeat(pad));
            }
        }
        line.push('\n');
        line
    };

    let mut out = render_row(&header);
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
    out.push('\n');
    for row in &rows {
        out.push_str(&render_row(row));
    }
    out
}

/// Render the ranked feature list as `rank. name  gain` lines.
pub fn render_ranking(ranking: &FeatureRanking) -> String {
    let width = ranking
        .iter()
        .map(|r| r.feature.len())
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    for (i, entry) in ranking.iter().enumerate() {
        out.push_str(&format!(
            "{}. {:<width$}  {:.6}\n",
            i + 1,
            entry.feature,
            entry.gain,
            width = width
        ));
    }
    out
}
