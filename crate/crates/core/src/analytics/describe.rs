//! Descriptive statistics: group averages, histograms and IQR screening.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{ColumnRole, Dataset};
use crate::error::{KpiError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub count: usize,
    /// Per-feature means; `None` for an empty group.
    pub means: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub target: String,
    pub features: Vec<String>,
    /// Keyed by target value `"0"` and `"1"`.
    pub groups: BTreeMap<String, GroupStats>,
    pub empty_groups: Vec<u8>,
}

impl GroupSummary {
    pub fn mean(&self, group: u8, feature: &str) -> Option<f64> {
        let j = self.features.iter().position(|f| f == feature)?;
        self.groups.get(&group.to_string())?.means.as_ref().map(|m| m[j])
    }
}

/// Mean of every feature column within each value of the binary `target`.
pub fn group_means(dataset: &Dataset, target: &str) -> Result<GroupSummary> {
    let t = dataset.column_index(target).ok_or_else(|| KpiError::UnknownColumn(target.into()))?;
    let features: Vec<usize> = dataset
        .schema
        .iter()
        .enumerate()
        .filter(|&(j, c)| j != t && c.role == ColumnRole::Feature)
        .map(|(j, _)| j)
        .collect();
    let mut sums = [vec![0.0; features.len()], vec![0.0; features.len()]];
    let mut counts = [0usize; 2];
    for (i, row) in dataset.rows.iter().enumerate() {
        let missing = |j: usize| KpiError::HasMissing { row: i, column: dataset.schema[j].name.clone() };
        let label = row[t].ok_or_else(|| missing(t))?;
        let g = if label == 0.0 {
            0
        } else if label == 1.0 {
            1
        } else {
            return Err(KpiError::InvalidDataset(format!("target {label} at row {i} is not 0 or 1")));
        };
        counts[g] += 1;
        for (k, &j) in features.iter().enumerate() {
            sums[g][k] += row[j].ok_or_else(|| missing(j))?;
        }
    }
    let mut groups = BTreeMap::new();
    let mut empty_groups = Vec::new();
    for g in 0..2 {
        let means = (counts[g] > 0).then(|| sums[g].iter().map(|s| s / counts[g] as f64).collect());
        if counts[g] == 0 {
            empty_groups.push(g as u8);
        }
        groups.insert(g.to_string(), GroupStats { count: counts[g], means });
    }
    Ok(GroupSummary {
        target: target.into(),
        features: features.iter().map(|&j| dataset.schema[j].name.clone()).collect(),
        groups,
        empty_groups,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Sturges' rule, `ceil(log2 n) + 1`.
pub fn sturges_bins(n: usize) -> usize {
    if n <= 1 {
        1
    } else {
        (n as f64).log2().ceil() as usize + 1
    }
}

/// Equal-width bins over `[min, max]` of the finite values. Bins are
/// half-open except the last, which is closed. With all values equal a
/// single bin `[v - 0.5, v + 0.5]` holds everything.
pub fn histogram(values: &[f64], bin_count: Option<usize>) -> Result<Histogram> {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return Err(KpiError::InvalidArgument("histogram needs at least one finite value".into()));
    }
    let k = bin_count.unwrap_or_else(|| sturges_bins(finite.len()));
    if k == 0 {
        return Err(KpiError::InvalidArgument("bin count must be at least 1".into()));
    }
    let min = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let max = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Ok(Histogram { bin_edges: vec![min - 0.5, min + 0.5], counts: vec![finite.len()] });
    }
    let mut bin_edges: Vec<f64> = (0..k).map(|i| min + (max - min) * i as f64 / k as f64).collect();
    bin_edges.push(max);
    let mut counts = vec![0; k];
    for v in finite {
        let bin = bin_edges.partition_point(|&e| e <= v).saturating_sub(1).min(k - 1);
        counts[bin] += 1;
    }
    Ok(Histogram { bin_edges, counts })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierScreen {
    pub q1: f64,
    pub q3: f64,
    pub lower_fence: f64,
    pub upper_fence: f64,
    /// Positions in the input outside the fences, ascending.
    pub outliers: Vec<usize>,
}

/// Linear-interpolation quantile at position `(n - 1) q` of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = (sorted.len() - 1) as f64 * q;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Tukey fences at `Q1 - 1.5 IQR` and `Q3 + 1.5 IQR`.
pub fn iqr_outliers(values: &[f64]) -> Result<OutlierScreen> {
    if values.len() < 4 {
        return Err(KpiError::TooFewValues(values.len()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(KpiError::InvalidArgument("values must be finite".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let lower_fence = q1 - 1.5 * iqr;
    let upper_fence = q3 + 1.5 * iqr;
    let outliers =
        values.iter().enumerate().filter(|(_, &v)| v < lower_fence || v > upper_fence).map(|(i, _)| i).collect();
    Ok(OutlierScreen { q1, q3, lower_fence, upper_fence, outliers })
}
