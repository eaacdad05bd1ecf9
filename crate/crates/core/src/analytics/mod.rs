//! Exploratory analysis over a cleaned dataset, plus KPI forecasting.

pub mod correlation;
pub mod describe;
pub mod holt;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use self::correlation::{pearson_matrix, CorrelationMatrix};
pub use self::describe::{group_means, histogram, iqr_outliers, GroupSummary, Histogram, OutlierScreen};
pub use self::holt::{holt_fit_forecast, ForecastResult, ForecastStep, HoltState};
use crate::dataset::{Dataset, FeatureMatrix};
use crate::error::{KpiError, Result};

/// Everything the heatmap, group-average and distribution panels show.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub correlations: CorrelationMatrix,
    pub groups: GroupSummary,
    pub histograms: BTreeMap<String, Histogram>,
    /// Columns with fewer than four rows are left out.
    pub outliers: BTreeMap<String, OutlierScreen>,
}

/// Runs every analysis over a dataset with no missing cells. The correlation
/// matrix covers all columns, target included.
pub fn analyze(dataset: &Dataset) -> Result<AnalysisReport> {
    let target = dataset.target_index().ok_or(KpiError::MissingTarget)?;
    let names: Vec<String> = dataset.schema.iter().map(|c| c.name.clone()).collect();
    let mut rows = Vec::with_capacity(dataset.row_count());
    for (i, row) in dataset.rows.iter().enumerate() {
        let full: Option<Vec<f64>> = row.iter().copied().collect();
        rows.push(full.ok_or_else(|| KpiError::HasMissing {
            row: i,
            column: names[row.iter().position(Option::is_none).unwrap_or(0)].clone(),
        })?);
    }
    let matrix = FeatureMatrix::from_rows(rows, names.clone())?;

    let mut histograms = BTreeMap::new();
    let mut outliers = BTreeMap::new();
    for (j, name) in names.iter().enumerate() {
        let values: Vec<f64> = matrix.column(j).collect();
        histograms.insert(name.clone(), histogram(&values, None)?);
        if values.len() >= 4 {
            outliers.insert(name.clone(), iqr_outliers(&values)?);
        }
    }
    Ok(AnalysisReport {
        correlations: pearson_matrix(&matrix)?,
        groups: group_means(dataset, &names[target])?,
        histograms,
        outliers,
    })
}
