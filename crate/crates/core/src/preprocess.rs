//! Cleaning and transforming: drop incomplete rows, separate X from y,
//! split deterministically, standardise on the training rows only.

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FeatureMatrix, LabelVector};
use crate::error::{KpiError, Result};
use crate::rng::SplitMix64;

/// Keeps the rows with no missing cells, in their original order.
pub fn drop_missing(dataset: &Dataset) -> Result<Dataset> {
    let rows: Vec<_> = dataset.rows.iter().filter(|r| r.iter().all(Option::is_some)).cloned().collect();
    if rows.is_empty() {
        return Err(KpiError::EmptyResult);
    }
    Ok(Dataset::new(dataset.schema.clone(), rows))
}

/// Feature columns in schema order become X; the target column becomes y.
pub fn split_xy(dataset: &Dataset) -> Result<(FeatureMatrix, LabelVector)> {
    let target = dataset.target_index().ok_or(KpiError::MissingTarget)?;
    let features = dataset.feature_indices();
    let mut x = Vec::with_capacity(dataset.row_count());
    let mut y = Vec::with_capacity(dataset.row_count());
    for (i, row) in dataset.rows.iter().enumerate() {
        let cell = |j: usize| {
            row.get(j)
                .copied()
                .flatten()
                .ok_or_else(|| KpiError::HasMissing { row: i, column: dataset.schema[j].name.clone() })
        };
        x.push(features.iter().map(|&j| cell(j)).collect::<Result<Vec<_>>>()?);
        let label = cell(target)?;
        if label != 0.0 && label != 1.0 {
            return Err(KpiError::InvalidDataset(format!("target {label} at row {i} is not 0 or 1")));
        }
        y.push(label as u8);
    }
    if y.is_empty() {
        return Err(KpiError::EmptyResult);
    }
    Ok((FeatureMatrix::from_rows(x, dataset.feature_names())?, LabelVector::new(y)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
    pub test_fraction: f64,
}

/// Shuffles `0..n` with splitmix64-driven Fisher-Yates and takes the first
/// `ceil(test_fraction * n)` indices as the test set.
pub fn train_test_split(n: usize, test_fraction: f64, seed: u64) -> Result<Split> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(KpiError::BadFraction(test_fraction));
    }
    if n < 2 {
        return Err(KpiError::TooFewRows { needed: 2, got: n });
    }
    let order = SplitMix64::new(seed).permutation(n);
    let n_test = test_size(n, test_fraction);
    Ok(Split { test_indices: order[..n_test].to_vec(), train_indices: order[n_test..].to_vec(), seed, test_fraction })
}

/// `ceil(fraction * n)`, kept within `1..n` so neither side is empty.
pub fn test_size(n: usize, fraction: f64) -> usize {
    // Guard against products like 0.3 * 10 = 3.0000000000000004.
    let raw = fraction * n as f64;
    let rounded = raw.round();
    let k = if (raw - rounded).abs() < 1e-9 { rounded } else { raw.ceil() };
    (k as usize).clamp(1, n - 1)
}

/// Per-column mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Scaler {
    pub fn fit(x: &FeatureMatrix) -> Self {
        let n = x.n_rows() as f64;
        let (means, stds) = (0..x.n_cols())
            .map(|j| {
                let mean = x.column(j).sum::<f64>() / n;
                let var = x.column(j).map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                (mean, var.sqrt())
            })
            .unzip();
        Self { means, stds }
    }

    /// Identity transform for `p` features.
    pub fn identity(p: usize) -> Self {
        Self { means: vec![0.0; p], stds: vec![1.0; p] }
    }

    pub fn width(&self) -> usize {
        self.means.len()
    }

    /// `(x - mean) / std` per column; columns with zero spread map to 0.
    pub fn transform(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        self.check_width(x.n_cols())?;
        Ok(x.map_entries(|j, v| self.scale(j, v)))
    }

    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        self.check_width(row.len())?;
        Ok(row.iter().enumerate().map(|(j, &v)| self.scale(j, v)).collect())
    }

    fn scale(&self, j: usize, v: f64) -> f64 {
        if self.stds[j] == 0.0 {
            0.0
        } else {
            (v - self.means[j]) / self.stds[j]
        }
    }

    fn check_width(&self, got: usize) -> Result<()> {
        if got != self.width() {
            return Err(KpiError::WidthMismatch { expected: self.width(), got });
        }
        Ok(())
    }
}
