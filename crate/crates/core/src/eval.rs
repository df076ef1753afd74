//! Thresholding, classification metrics and score-distribution summaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Percentile of `scores` by linear interpolation between closest ranks,
/// `rank = (p/100)·(n − 1)` over the sorted scores.
pub fn compute_threshold(scores: &[f64], percentile: f64) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::Input("cannot take a percentile of no scores".into()));
    }
    if !(0.0..=100.0).contains(&percentile) {
        return Err(Error::Input(format!(
            "percentile {percentile} is not in [0, 100]"
        )));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(interpolated_quantile(&sorted, percentile / 100.0))
}

fn interpolated_quantile(sorted: &[f64], q: f64) -> f64 {
    let rank = q * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    sorted[lo] + (rank - lo as f64) * (sorted[hi] - sorted[lo])
}

/// 1 (anomalous) iff the score is strictly above the threshold.
pub fn classify(scores: &[f64], threshold: f64) -> Vec<u8> {
    scores.iter().map(|&s| u8::from(s > threshold)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn from_predictions(labels: &[u8], predictions: &[u8]) -> Self {
        let mut c = Confusion::default();
        for (&l, &p) in labels.iter().zip(predictions) {
            match (l, p) {
                (1, 1) => c.tp += 1,
                (0, 1) => c.fp += 1,
                (0, 0) => c.tn += 1,
                _ => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// `None` when the labels contain a single class.
    pub auc: Option<f64>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub balanced_accuracy: f64,
    pub threshold: f64,
    pub counts: Confusion,
}

/// Row labels of the results tables, in order.
pub const METRIC_NAMES: [&str; 6] = ["AUC", "Precision", "Recall", "F1", "Acc.", "Bal. Acc."];

impl MetricsReport {
    /// The six table metrics in [`METRIC_NAMES`] order; AUC may be undefined.
    pub fn values(&self) -> [(&'static str, Option<f64>); 6] {
        let v = [
            self.auc,
            Some(self.precision),
            Some(self.recall),
            Some(self.f1),
            Some(self.accuracy),
            Some(self.balanced_accuracy),
        ];
        std::array::from_fn(|i| (METRIC_NAMES[i], v[i]))
    }
}

/// Confusion-matrix metrics of `predictions` plus the rank AUC of `scores`.
///
/// Empty denominators give 0. Balanced accuracy averages the per-class
/// recall over the classes present in `labels`.
pub fn compute_metrics(
    labels: &[u8],
    predictions: &[u8],
    scores: &[f64],
    threshold: f64,
) -> Result<MetricsReport> {
    if labels.len() != predictions.len() || labels.len() != scores.len() {
        return Err(Error::Input(format!(
            "lengths differ: {} labels, {} predictions, {} scores",
            labels.len(),
            predictions.len(),
            scores.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::Input("no samples to evaluate".into()));
    }
    let c = Confusion::from_predictions(labels, predictions);
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let specificity = ratio(c.tn, c.tn + c.fp);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    let has_pos = c.tp + c.fn_ > 0;
    let has_neg = c.tn + c.fp > 0;
    let balanced_accuracy = match (has_pos, has_neg) {
        (true, true) => 0.5 * (recall + specificity),
        (true, false) => recall,
        _ => specificity,
    };
    Ok(MetricsReport {
        auc: roc_auc(labels, scores)?,
        precision,
        recall,
        f1,
        accuracy: ratio(c.tp + c.tn, c.total()),
        balanced_accuracy,
        threshold,
        counts: c,
    })
}

/// Classifies `scores` at `threshold` and computes the metrics.
pub fn evaluate(labels: &[u8], scores: &[f64], threshold: f64) -> Result<MetricsReport> {
    compute_metrics(labels, &classify(scores, threshold), scores, threshold)
}

/// Area under the ROC curve as the Mann-Whitney statistic with mid-ranks:
/// the fraction of (anomalous, normal) pairs ordered correctly, ties
/// counting one half. `None` if either class is absent.
pub fn roc_auc(labels: &[u8], scores: &[f64]) -> Result<Option<f64>> {
    if labels.len() != scores.len() {
        return Err(Error::Input("labels and scores differ in length".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Input("NaN score".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Ok(None);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut pos_rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks are 1-based; the tie block i..=j shares the mean rank
        let mid = (i + j) as f64 / 2.0 + 1.0;
        pos_rank_sum += mid * order[i..=j].iter().filter(|&&k| labels[k] == 1).count() as f64;
        i = j + 1;
    }
    let u = pos_rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(Some(u / (n_pos as f64 * n_neg as f64)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreGroup {
    Train,
    TestNormal,
    TestAnomalous,
}

impl ScoreGroup {
    pub fn name(self) -> &'static str {
        match self {
            ScoreGroup::Train => "train",
            ScoreGroup::TestNormal => "test-normal",
            ScoreGroup::TestAnomalous => "test-anomalous",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet {
    pub group: ScoreGroup,
    pub scores: Vec<f64>,
    pub labels: Vec<u8>,
}

impl ScoreSet {
    /// Train scores plus test scores split by label.
    pub fn standard_groups(train: &[f64], test: &[f64], test_labels: &[u8]) -> Vec<ScoreSet> {
        let pick = |want: u8| -> Vec<f64> {
            test.iter()
                .zip(test_labels)
                .filter(|(_, &l)| l == want)
                .map(|(&s, _)| s)
                .collect()
        };
        let normal = pick(0);
        let anomalous = pick(1);
        vec![
            ScoreSet {
                group: ScoreGroup::Train,
                labels: vec![0; train.len()],
                scores: train.to_vec(),
            },
            ScoreSet {
                group: ScoreGroup::TestNormal,
                labels: vec![0; normal.len()],
                scores: normal,
            },
            ScoreSet {
                group: ScoreGroup::TestAnomalous,
                labels: vec![1; anomalous.len()],
                scores: anomalous,
            },
        ]
    }
}

pub const DENSITY_POINTS: usize = 128;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Density {
    /// All scores equal: a zero-width spike.
    Spike { at: f64 },
    /// Gaussian KDE sampled at evenly spaced points over `[min, max]`.
    Curve {
        bandwidth: f64,
        xs: Vec<f64>,
        ys: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolinSummary {
    pub group: ScoreGroup,
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub density: Density,
}

/// Quartiles, extremes and a KDE curve (Silverman bandwidth) per group.
/// Empty groups are skipped with a warning.
pub fn violin_summary(sets: &[ScoreSet]) -> Vec<ViolinSummary> {
    sets.iter()
        .filter_map(|set| {
            if set.scores.is_empty() {
                log::warn!(
                    "score group {} is empty; omitted from summary",
                    set.group.name()
                );
                return None;
            }
            Some(summarize(set.group, &set.scores))
        })
        .collect()
}

fn summarize(group: ScoreGroup, scores: &[f64]) -> ViolinSummary {
    let mut s = scores.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let (min, max) = (s[0], s[n - 1]);
    let q1 = interpolated_quantile(&s, 0.25);
    let median = interpolated_quantile(&s, 0.5);
    let q3 = interpolated_quantile(&s, 0.75);

    let density = match silverman_bandwidth(&s, q3 - q1) {
        Some(h) if max > min => {
            let xs: Vec<f64> = (0..DENSITY_POINTS)
                .map(|i| min + (max - min) * i as f64 / (DENSITY_POINTS - 1) as f64)
                .collect();
            let norm = 1.0 / (n as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
            let ys = xs
                .iter()
                .map(|&x| {
                    norm * s
                        .iter()
                        .map(|&v| (-0.5 * ((x - v) / h).powi(2)).exp())
                        .sum::<f64>()
                })
                .collect();
            Density::Curve {
                bandwidth: h,
                xs,
                ys,
            }
        }
        _ => Density::Spike { at: median },
    };
    ViolinSummary {
        group,
        n,
        min,
        q1,
        median,
        q3,
        max,
        density,
    }
}

/// `0.9 · min(σ, IQR/1.34) · n^(-1/5)`, falling back to whichever spread is
/// non-zero. `None` when the sample has no spread.
fn silverman_bandwidth(sorted: &[f64], iqr: f64) -> Option<f64> {
    let n = sorted.len() as f64;
    if sorted.len() < 2 {
        return None;
    }
    let mean = sorted.iter().sum::<f64>() / n;
    let sd = (sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let spread = match (sd > 0.0, iqr > 0.0) {
        (true, true) => sd.min(iqr / 1.34),
        (true, false) => sd,
        (false, true) => iqr / 1.34,
        (false, false) => return None,
    };
    Some(0.9 * spread * n.powf(-0.2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_examples() {
        let s: Vec<f64> = (1..=100).map(f64::from).collect();
        assert!((compute_threshold(&s, 99.0).unwrap() - 99.01).abs() < 1e-12);
        let mixed = [3.0, -1.0, 7.5, 2.0];
        assert_eq!(compute_threshold(&mixed, 100.0).unwrap(), 7.5);
        for p in [0.0, 37.0, 99.0, 100.0] {
            assert_eq!(compute_threshold(&[4.2], p).unwrap(), 4.2);
        }
        assert!(matches!(compute_threshold(&[], 99.0), Err(Error::Input(_))));
        assert!(compute_threshold(&[1.0], 101.0).is_err());
    }

    #[test]
    fn classify_boundary_is_normal() {
        assert_eq!(classify(&[0.5], 0.5), vec![0]);
        assert_eq!(classify(&[0.1, 0.9], 0.5), vec![0, 1]);
        assert_eq!(classify(&[1e300, -3.0], f64::INFINITY), vec![0, 0]);
    }

    #[test]
    fn metric_examples() {
        let m = compute_metrics(&[1, 1, 0, 0], &[1, 0, 0, 0], &[0.9, 0.4, 0.2, 0.1], 0.5).unwrap();
        assert_eq!(m.precision, 1.0);
        assert_eq!(m.recall, 0.5);
        assert_eq!(m.accuracy, 0.75);
        assert_eq!(m.balanced_accuracy, 0.75);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(
            roc_auc(&[1, 1, 0, 0], &[0.9, 0.8, 0.2, 0.1]).unwrap(),
            Some(1.0)
        );
        assert_eq!(
            roc_auc(&[1, 0, 1, 0], &[0.9, 0.8, 0.3, 0.1]).unwrap(),
            Some(0.75)
        );
    }

    #[test]
    fn auc_ties_count_half() {
        assert_eq!(roc_auc(&[1, 0], &[0.5, 0.5]).unwrap(), Some(0.5));
        assert_eq!(roc_auc(&[1, 1, 0], &[0.5, 0.9, 0.5]).unwrap(), Some(0.75));
    }

    #[test]
    fn single_class_auc_is_undefined() {
        let m = evaluate(&[0, 0, 0], &[0.1, 0.6, 0.2], 0.5).unwrap();
        assert_eq!(m.auc, None);
        assert_eq!(m.accuracy, 2.0 / 3.0);
    }

    #[test]
    fn all_anomalous_predictions_give_half_balanced_accuracy() {
        let m = compute_metrics(&[1, 0, 0, 1, 0], &[1; 5], &[1.0; 5], 0.0).unwrap();
        assert_eq!(m.balanced_accuracy, 0.5);
    }

    #[test]
    fn violin_quartiles() {
        let v = violin_summary(&[ScoreSet {
            group: ScoreGroup::Train,
            scores: vec![5., 3., 1., 4., 2.],
            labels: vec![0; 5],
        }]);
        assert_eq!((v[0].q1, v[0].median, v[0].q3), (2.0, 3.0, 4.0));
        assert_eq!((v[0].min, v[0].max), (1.0, 5.0));
        match &v[0].density {
            Density::Curve { xs, ys, bandwidth } => {
                assert_eq!(xs.len(), DENSITY_POINTS);
                assert_eq!(ys.len(), DENSITY_POINTS);
                assert!(*bandwidth > 0.0);
                assert_eq!((xs[0], xs[DENSITY_POINTS - 1]), (1.0, 5.0));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constant_group_is_a_spike() {
        let v = violin_summary(&[ScoreSet {
            group: ScoreGroup::TestNormal,
            scores: vec![0.7; 4],
            labels: vec![0; 4],
        }]);
        assert_eq!(v[0].density, Density::Spike { at: 0.7 });
        assert_eq!((v[0].q1, v[0].median, v[0].q3), (0.7, 0.7, 0.7));
    }

    #[test]
    fn empty_groups_are_omitted() {
        let sets = ScoreSet::standard_groups(&[0.1, 0.2], &[0.3, 0.4], &[0, 0]);
        let v = violin_summary(&sets);
        assert_eq!(v.len(), 2);
        assert!(v.iter().all(|s| s.group != ScoreGroup::TestAnomalous));
    }
}
