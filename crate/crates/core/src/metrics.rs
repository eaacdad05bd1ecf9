//! Confusion-matrix algebra, classification reports, log loss and ROC/AUC.
//!
//! Rows of the confusion matrix are the actual class and columns the
//! predicted class; class 1 is positive unless a metric is asked for class 0.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{KpiError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 2]; 2],
}

impl ConfusionMatrix {
    pub fn from_counts(counts: [[u64; 2]; 2]) -> Self {
        Self { counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn tp(&self) -> u64 {
        self.counts[1][1]
    }

    pub fn fp(&self) -> u64 {
        self.counts[0][1]
    }

    pub fn fn_(&self) -> u64 {
        self.counts[1][0]
    }

    pub fn tn(&self) -> u64 {
        self.counts[0][0]
    }

    /// Number of samples whose actual class is `class`.
    pub fn support(&self, class: usize) -> u64 {
        self.counts[class][0] + self.counts[class][1]
    }

    /// Number of samples predicted as `class`.
    pub fn predicted(&self, class: usize) -> u64 {
        self.counts[0][class] + self.counts[1][class]
    }
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(KpiError::LengthMismatch { left: a, right: b });
    }
    Ok(())
}

fn check_label(v: u8) -> Result<usize> {
    match v {
        0 | 1 => Ok(v as usize),
        other => Err(KpiError::InvalidArgument(format!("label {other} is not 0 or 1"))),
    }
}

pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix> {
    check_lengths(y_true.len(), y_pred.len())?;
    let mut cm = ConfusionMatrix::default();
    for (&a, &p) in y_true.iter().zip(y_pred) {
        cm.counts[check_label(a)?][check_label(p)?] += 1;
    }
    Ok(cm)
}

pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    let total = cm.total();
    if total == 0 {
        return Err(KpiError::EmptyMatrix);
    }
    Ok((cm.tp() + cm.tn()) as f64 / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

/// Zero-denominator precision or recall is reported as 0.
fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

pub fn class_metrics(cm: &ConfusionMatrix, positive_class: u8) -> Result<ClassMetrics> {
    let c = check_label(positive_class)?;
    let tp = cm.counts[c][c];
    let precision = ratio(tp, cm.predicted(c));
    let recall = ratio(tp, cm.support(c));
    Ok(ClassMetrics { precision, recall, f1: f1_score(precision, recall), support: cm.support(c) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AverageMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

/// Classification report in the familiar per-class / macro / weighted layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub classes: BTreeMap<String, ClassMetrics>,
    pub accuracy: f64,
    pub macro_avg: AverageMetrics,
    pub weighted_avg: AverageMetrics,
    /// Metrics that hit a zero denominator and were reported as 0.
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl Report {
    pub fn from_confusion(cm: &ConfusionMatrix) -> Result<Self> {
        let accuracy = accuracy(cm)?;
        let per = [class_metrics(cm, 0)?, class_metrics(cm, 1)?];
        let mut warnings = Vec::new();
        for c in 0..2 {
            if cm.predicted(c) == 0 {
                warnings.push(format!("precision of class {c} is undefined (no predicted samples); reported as 0"));
            }
            if cm.support(c) == 0 {
                warnings.push(format!("recall of class {c} is undefined (no true samples); reported as 0"));
            }
        }
        let total = cm.total();
        let macro_avg = AverageMetrics {
            precision: (per[0].precision + per[1].precision) / 2.0,
            recall: (per[0].recall + per[1].recall) / 2.0,
            f1: (per[0].f1 + per[1].f1) / 2.0,
            support: total,
        };
        let weighted = |f: fn(&ClassMetrics) -> f64| {
            (per[0].support as f64 * f(&per[0]) + per[1].support as f64 * f(&per[1])) / total as f64
        };
        let weighted_avg = AverageMetrics {
            precision: weighted(|m| m.precision),
            recall: weighted(|m| m.recall),
            f1: weighted(|m| m.f1),
            support: total,
        };
        let classes = [("0".to_string(), per[0]), ("1".to_string(), per[1])].into_iter().collect();
        Ok(Self { classes, accuracy, macro_avg, weighted_avg, warnings })
    }

    pub fn class(&self, c: u8) -> &ClassMetrics {
        &self.classes[if c == 0 { "0" } else { "1" }]
    }
}

pub fn report(y_true: &[u8], y_pred: &[u8]) -> Result<Report> {
    Report::from_confusion(&confusion(y_true, y_pred)?)
}

/// Weights on precision, recall and F1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
}

impl WeightSpec {
    pub fn new(w1: f64, w2: f64, w3: f64) -> Result<Self> {
        for w in [w1, w2, w3] {
            if !(w.is_finite() && w >= 0.0) {
                return Err(KpiError::BadWeights(format!("{w} is not a nonnegative finite weight")));
            }
        }
        if w1 + w2 + w3 == 0.0 {
            return Err(KpiError::ZeroWeights);
        }
        Ok(Self { w1, w2, w3 })
    }

    /// Precision and recall weights with F1 fixed at 1.
    pub fn precision_recall(w_p: f64, w_r: f64) -> Result<Self> {
        Self::new(w_p, w_r, 1.0)
    }

    /// Recall emphasis: precision and F1 fixed at 1.
    pub fn recall_emphasis(w_r: f64) -> Result<Self> {
        Self::new(1.0, w_r, 1.0)
    }
}

/// `(w1 * precision + w2 * recall + w3 * f1) / (w1 + w2 + w3)`.
pub fn weighted_score(m: &ClassMetrics, w: &WeightSpec) -> Result<f64> {
    let w = WeightSpec::new(w.w1, w.w2, w.w3)?;
    Ok((w.w1 * m.precision + w.w2 * m.recall + w.w3 * m.f1) / (w.w1 + w.w2 + w.w3))
}

pub const LOG_LOSS_EPS: f64 = 1e-15;

/// Mean binary cross-entropy with probabilities clipped to `[1e-15, 1 - 1e-15]`.
pub fn log_loss(y_true: &[u8], probs: &[f64]) -> Result<f64> {
    check_lengths(y_true.len(), probs.len())?;
    if y_true.is_empty() {
        return Err(KpiError::InvalidArgument("log loss of an empty sample".into()));
    }
    let mut sum = 0.0;
    for (&y, &p) in y_true.iter().zip(probs) {
        if !(0.0..=1.0).contains(&p) {
            return Err(KpiError::InvalidArgument(format!("probability {p} outside [0, 1]")));
        }
        let p = p.clamp(LOG_LOSS_EPS, 1.0 - LOG_LOSS_EPS);
        sum += if check_label(y)? == 1 { p.ln() } else { (1.0 - p).ln() };
    }
    Ok(-sum / y_true.len() as f64)
}

/// ROC points from `(0, 0)` to `(1, 1)`. `thresholds[i]` is the score cutoff
/// (predict positive when `score >= cutoff`) that yields `points[i + 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
    pub thresholds: Vec<f64>,
}

impl RocCurve {
    /// Trapezoidal area under the curve.
    pub fn area(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0).sum()
    }
}

/// Curve over the distinct scores in descending order; tied scores enter at
/// the same step, which makes the area equal `P(pos > neg) + P(tie) / 2`.
pub fn roc_auc(y_true: &[u8], scores: &[f64]) -> Result<(RocCurve, f64)> {
    check_lengths(y_true.len(), scores.len())?;
    if scores.iter().any(|s| s.is_nan()) {
        return Err(KpiError::InvalidArgument("scores contain NaN".into()));
    }
    let mut pos = 0u64;
    for &y in y_true {
        pos += check_label(y)? as u64;
    }
    let neg = y_true.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Err(KpiError::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![(0.0, 0.0)];
    let mut thresholds = Vec::new();
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut k = 0;
    while k < order.len() {
        let cutoff = scores[order[k]];
        while k < order.len() && scores[order[k]] == cutoff {
            if y_true[order[k]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
        thresholds.push(cutoff);
    }
    let curve = RocCurve { points, thresholds };
    let auc = curve.area();
    Ok((curve, auc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const REFERENCE: ConfusionMatrix = ConfusionMatrix { counts: [[5, 4], [3, 1]] };

    /// Label pairs that reproduce the 13-sample logistic-regression matrix.
    fn reference_labels() -> (Vec<u8>, Vec<u8>) {
        let mut t = Vec::new();
        let mut p = Vec::new();
        for (a, q, n) in [(0, 0, 5), (0, 1, 4), (1, 0, 3), (1, 1, 1)] {
            t.extend(std::iter::repeat_n(a, n));
            p.extend(std::iter::repeat_n(q, n));
        }
        (t, p)
    }

    #[test]
    fn confusion_examples() {
        let (t, p) = reference_labels();
        assert_eq!(t.iter().filter(|&&v| v == 0).count(), 9);
        assert_eq!(confusion(&t, &p).unwrap(), REFERENCE);
        let same = confusion(&t, &t).unwrap();
        assert_eq!((same.fp(), same.fn_()), (0, 0));
        assert_eq!(confusion(&[1, 0], &[0, 1]).unwrap().counts, [[0, 1], [1, 0]]);
        assert!(matches!(confusion(&[1], &[1, 0]), Err(KpiError::LengthMismatch { .. })));
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&REFERENCE).unwrap(), 0.46153846153846156);
        assert_eq!(accuracy(&ConfusionMatrix::from_counts([[9, 0], [0, 4]])).unwrap(), 1.0);
        assert_eq!(accuracy(&ConfusionMatrix::from_counts([[0, 9], [4, 0]])).unwrap(), 0.0);
        assert!(matches!(accuracy(&ConfusionMatrix::default()), Err(KpiError::EmptyMatrix)));
    }

    #[test]
    fn class_metric_examples() {
        let one = class_metrics(&REFERENCE, 1).unwrap();
        assert_abs_diff_eq!(one.precision, 0.20, epsilon = 1e-15);
        assert_abs_diff_eq!(one.recall, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(one.f1, 2.0 / 9.0, epsilon = 1e-15);
        assert_eq!(one.support, 4);
        let zero = class_metrics(&REFERENCE, 0).unwrap();
        assert_abs_diff_eq!(zero.precision, 0.625, epsilon = 1e-15);
        assert_abs_diff_eq!(zero.recall, 5.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(zero.f1, 10.0 / 17.0, epsilon = 1e-15);
        assert_eq!(zero.support, 9);

        let none_predicted = class_metrics(&ConfusionMatrix::from_counts([[3, 0], [2, 0]]), 1).unwrap();
        assert_eq!((none_predicted.precision, none_predicted.f1), (0.0, 0.0));
    }

    #[test]
    fn report_examples() {
        let r = Report::from_confusion(&REFERENCE).unwrap();
        assert_abs_diff_eq!(r.macro_avg.precision, 0.4125, epsilon = 1e-15);
        assert_abs_diff_eq!(r.weighted_avg.precision, (9.0 * 0.625 + 4.0 * 0.2) / 13.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.weighted_avg.f1, 0.4756, epsilon = 1e-4);
        assert_eq!(r.weighted_avg.recall, r.accuracy);
        assert!(r.warnings.is_empty());

        let y = [0, 1, 1, 0, 1];
        let perfect = report(&y, &y).unwrap();
        for m in perfect.classes.values() {
            assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
        }
        assert_eq!(perfect.accuracy, 1.0);

        let degenerate = report(&[0, 1], &[0, 0]).unwrap();
        assert_eq!(degenerate.warnings.len(), 1);
    }

    #[test]
    fn report_json_shape() {
        let v = serde_json::to_value(Report::from_confusion(&REFERENCE).unwrap()).unwrap();
        assert!(v["classes"]["0"]["precision"].is_number());
        assert!(v["classes"]["1"]["support"].is_number());
        for key in ["accuracy", "macro_avg", "weighted_avg"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn weighted_score_examples() {
        let m = ClassMetrics { precision: 0.6, recall: 0.4, f1: 0.48, support: 1 };
        let s = weighted_score(&m, &WeightSpec::new(1.0, 1.0, 1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(s, 1.48 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s, 0.493333, epsilon = 1e-6);
        assert_eq!(weighted_score(&m, &WeightSpec::new(1.0, 0.0, 0.0).unwrap()).unwrap(), 0.6);

        let class0 = ClassMetrics { precision: 0.625, recall: 0.5556, f1: 0.5882, support: 9 };
        let s = weighted_score(&class0, &WeightSpec::precision_recall(2.0, 1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(s, 0.59845, epsilon = 1e-12);
        let s = weighted_score(&class0, &WeightSpec::recall_emphasis(2.0).unwrap()).unwrap();
        assert_abs_diff_eq!(s, (0.625 + 2.0 * 0.5556 + 0.5882) / 4.0, epsilon = 1e-12);

        assert!(matches!(WeightSpec::new(0.0, 0.0, 0.0), Err(KpiError::ZeroWeights)));
        let raw = WeightSpec { w1: 0.0, w2: 0.0, w3: 0.0 };
        assert!(matches!(weighted_score(&m, &raw), Err(KpiError::ZeroWeights)));
        assert!(WeightSpec::new(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn log_loss_examples() {
        assert_abs_diff_eq!(log_loss(&[1], &[1.0]).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(log_loss(&[1, 0], &[0.5, 0.5]).unwrap(), std::f64::consts::LN_2, epsilon = 1e-15);
        let clipped = log_loss(&[1], &[0.0]).unwrap();
        assert_abs_diff_eq!(clipped, -(1e-15f64).ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(clipped, 34.54, epsilon = 0.01);
        assert!(log_loss(&[1, 0], &[0.5]).is_err());
        assert!(log_loss(&[1], &[1.5]).is_err());
    }

    #[test]
    fn roc_examples() {
        let (_, auc) = roc_auc(&[0, 0, 1, 1], &[0.1, 0.2, 0.8, 0.9]).unwrap();
        assert_eq!(auc, 1.0);
        // Pairs (pos, neg): (0.8,0.9)=0 (0.8,0.2)=1 (0.7,0.9)=0 (0.7,0.2)=1.
        let (curve, auc) = roc_auc(&[1, 0, 1, 0], &[0.8, 0.9, 0.7, 0.2]).unwrap();
        assert_eq!(auc, 0.5);
        assert_eq!(curve.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(curve.points.last(), Some(&(1.0, 1.0)));
        assert_eq!(curve.thresholds, vec![0.9, 0.8, 0.7, 0.2]);
        let (curve, auc) = roc_auc(&[1, 0, 0, 1], &[0.3; 4]).unwrap();
        assert_eq!(auc, 0.5);
        assert_eq!(curve.points, vec![(0.0, 0.0), (1.0, 1.0)]);
        assert!(matches!(roc_auc(&[1, 1], &[0.2, 0.4]), Err(KpiError::SingleClass)));
    }
}
