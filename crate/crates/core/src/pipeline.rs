//! End-to-end study: clean, split, standardise, fit, evaluate, compare.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FeatureMatrix, LabelVector};
use crate::error::{KpiError, Result};
use crate::metrics::{self, ConfusionMatrix, Report, RocCurve};
use crate::models::{self, ModelKind, TrainConfig, TrainedModel};
use crate::preprocess::{drop_missing, split_xy, train_test_split, Scaler, Split};

/// Smallest cleaned dataset `compare` will split.
pub const MIN_COMPARE_ROWS: usize = 10;

/// One shared split of a cleaned dataset, standardised on its training rows.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub n_rows: usize,
    pub split: Split,
    pub scaler: Scaler,
    pub x_train: FeatureMatrix,
    pub y_train: LabelVector,
    pub x_test_raw: FeatureMatrix,
    pub x_test: FeatureMatrix,
    pub y_test: LabelVector,
}

pub fn prepare(dataset: &Dataset, test_fraction: f64, seed: u64) -> Result<Prepared> {
    let clean = drop_missing(dataset)?;
    let (x, y) = split_xy(&clean)?;
    let split = train_test_split(x.n_rows(), test_fraction, seed)?;
    let x_train_raw = x.select_rows(&split.train_indices);
    let scaler = Scaler::fit(&x_train_raw);
    let x_test_raw = x.select_rows(&split.test_indices);
    Ok(Prepared {
        n_rows: x.n_rows(),
        x_train: scaler.transform(&x_train_raw)?,
        y_train: y.select(&split.train_indices),
        x_test: scaler.transform(&x_test_raw)?,
        x_test_raw,
        y_test: y.select(&split.test_indices),
        scaler,
        split,
    })
}

pub fn train(
    kind: ModelKind,
    data: &Prepared,
    config: &TrainConfig,
    trained_at: DateTime<Utc>,
) -> Result<TrainedModel> {
    config.validate()?;
    let params = models::fit(kind, &data.x_train, &data.y_train, config)?;
    TrainedModel::new(params, data.scaler.clone(), data.x_train.feature_names().to_vec(), config.clone(), trained_at)
}

/// Threshold-dependent and threshold-free metrics for one set of scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub threshold: f64,
    pub confusion_matrix: ConfusionMatrix,
    pub report: Report,
    /// Absent when the evaluated labels hold a single class.
    pub roc: Option<RocCurve>,
    pub auc: Option<f64>,
    pub log_loss: f64,
}

impl Evaluation {
    pub fn from_scores(y_true: &[u8], probabilities: &[f64], threshold: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(KpiError::InvalidArgument(format!("threshold {threshold} outside [0, 1]")));
        }
        let y_pred: Vec<u8> = probabilities.iter().map(|&p| models::predict(p, threshold)).collect();
        let confusion_matrix = metrics::confusion(y_true, &y_pred)?;
        let report = Report::from_confusion(&confusion_matrix)?;
        let (roc, auc) = match metrics::roc_auc(y_true, probabilities) {
            Ok((curve, auc)) => (Some(curve), Some(auc)),
            Err(KpiError::SingleClass) => (None, None),
            Err(e) => return Err(e),
        };
        Ok(Self { threshold, confusion_matrix, report, roc, auc, log_loss: metrics::log_loss(y_true, probabilities)? })
    }
}

/// Scores raw (unscaled) rows with `model` and evaluates them.
pub fn evaluate(model: &TrainedModel, x_raw: &FeatureMatrix, y: &LabelVector, threshold: f64) -> Result<Evaluation> {
    let probs = model.probabilities(x_raw)?;
    Evaluation::from_scores(y.as_slice(), &probs, threshold)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: ModelKind,
    pub accuracy: f64,
    pub log_loss: f64,
    pub auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub seed: u64,
    pub test_fraction: f64,
    pub threshold: f64,
    pub n_rows: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub rows: Vec<ComparisonRow>,
    /// Every model tied for the highest accuracy.
    pub best: Vec<ModelKind>,
}

/// Trains all five kinds on one shared split and scores them on its test rows.
pub fn compare(dataset: &Dataset, seed: u64, test_fraction: f64, config: &TrainConfig) -> Result<Comparison> {
    config.validate()?;
    let clean_rows = drop_missing(dataset)?.row_count();
    if clean_rows < MIN_COMPARE_ROWS {
        return Err(KpiError::TooFewRows { needed: MIN_COMPARE_ROWS, got: clean_rows });
    }
    let data = prepare(dataset, test_fraction, seed)?;
    // The timestamp is not part of the comparison output.
    let stamp = DateTime::<Utc>::UNIX_EPOCH;

    let results: Vec<Result<ComparisonRow>> = std::thread::scope(|s| {
        let handles: Vec<_> = ModelKind::ALL
            .into_iter()
            .map(|kind| {
                let data = &data;
                s.spawn(move || {
                    let model = train(kind, data, config, stamp)?;
                    let eval = evaluate(&model, &data.x_test_raw, &data.y_test, config.threshold)?;
                    Ok(ComparisonRow {
                        model: kind,
                        accuracy: eval.report.accuracy,
                        log_loss: eval.log_loss,
                        auc: eval.auc,
                    })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("training thread panicked")).collect()
    });
    let rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    let top = rows.iter().map(|r| r.accuracy).fold(f64::NEG_INFINITY, f64::max);
    let best = rows.iter().filter(|r| r.accuracy == top).map(|r| r.model).collect();
    Ok(Comparison {
        seed,
        test_fraction,
        threshold: config.threshold,
        n_rows: data.n_rows,
        n_train: data.split.train_indices.len(),
        n_test: data.split.test_indices.len(),
        rows,
        best,
    })
}
