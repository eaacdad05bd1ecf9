use serde::{Deserialize, Serialize};

use crate::dataset::FeatureMatrix;
use crate::error::{KpiError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
    /// Zero-variance columns; their off-diagonal entries are 0.
    pub constant_columns: Vec<String>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        Some(self.values[i][j])
    }

    /// Smallest off-diagonal coefficient.
    pub fn min_off_diagonal(&self) -> Option<f64> {
        let p = self.names.len();
        (0..p)
            .flat_map(|i| (0..p).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| self.values[i][j])
            .min_by(f64::total_cmp)
    }
}

/// Pearson coefficients between all column pairs, population moments.
pub fn pearson_matrix(x: &FeatureMatrix) -> Result<CorrelationMatrix> {
    let n = x.n_rows();
    if n < 2 {
        return Err(KpiError::TooFewRows { needed: 2, got: n });
    }
    let p = x.n_cols();
    let centered: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            let mean = x.column(j).sum::<f64>() / n as f64;
            x.column(j).map(|v| v - mean).collect()
        })
        .collect();
    let ss: Vec<f64> = centered.iter().map(|c| c.iter().map(|v| v * v).sum()).collect();
    let constant: Vec<bool> = ss.iter().map(|&s| s == 0.0).collect();

    let mut values = vec![vec![0.0; p]; p];
    for i in 0..p {
        values[i][i] = 1.0;
        for j in i + 1..p {
            let r = if constant[i] || constant[j] {
                0.0
            } else {
                let cov: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
                (cov / (ss[i].sqrt() * ss[j].sqrt())).clamp(-1.0, 1.0)
            };
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    let constant_columns =
        x.feature_names().iter().zip(&constant).filter(|(_, &c)| c).map(|(n, _)| n.clone()).collect();
    Ok(CorrelationMatrix { names: x.feature_names().to_vec(), values, constant_columns })
}
