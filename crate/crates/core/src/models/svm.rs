//! Linear soft-margin SVM trained by deterministic Pegasos-style subgradient
//! descent on `0.5 |w|^2 + c * sum(max(0, 1 - y (w.x + b)))`.

use serde::{Deserialize, Serialize};

use super::config::SvmConfig;
use super::{check_width, dot};
use crate::dataset::{FeatureMatrix, LabelVector};
use crate::error::{KpiError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub w: Vec<f64>,
    pub b: f64,
    pub c: f64,
}

/// Primal objective split into its two terms; `total = regularization + c * hinge`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmObjective {
    pub regularization: f64,
    pub hinge: f64,
    pub total: f64,
}

pub fn hinge_loss(signed_label: f64, score: f64) -> f64 {
    (1.0 - signed_label * score).max(0.0)
}

fn signed(label: u8) -> f64 {
    if label == 1 {
        1.0
    } else {
        -1.0
    }
}

impl SvmModel {
    /// `w.x + b`; non-negative scores predict class 1.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        check_width(self.w.len(), x.len())?;
        Ok(dot(&self.w, x) + self.b)
    }

    pub fn norm(&self) -> f64 {
        dot(&self.w, &self.w).sqrt()
    }

    pub fn objective(&self, x: &FeatureMatrix, y: &LabelVector) -> Result<SvmObjective> {
        let regularization = 0.5 * dot(&self.w, &self.w);
        let mut hinge = 0.0;
        for (row, &label) in x.rows().zip(y.as_slice()) {
            hinge += hinge_loss(signed(label), self.score(row)?);
        }
        Ok(SvmObjective { regularization, hinge, total: regularization + self.c * hinge })
    }
}

pub fn fit(x: &FeatureMatrix, y: &LabelVector, config: &SvmConfig) -> Result<SvmModel> {
    fit_with_trace(x, y, config).map(|(m, _)| m)
}

/// Trains and also returns the primal objective after every epoch.
///
/// Step size at update `t` (counted across epochs, from 1) is `1 / (lambda t)`
/// with `lambda = 1 / (c n)`; samples are visited in index order.
pub fn fit_with_trace(x: &FeatureMatrix, y: &LabelVector, config: &SvmConfig) -> Result<(SvmModel, Vec<f64>)> {
    let n = x.n_rows();
    let lambda = 1.0 / (config.c * n as f64);
    let mut model = SvmModel { w: vec![0.0; x.n_cols()], b: 0.0, c: config.c };
    let mut trace = Vec::with_capacity(config.epochs);
    let mut t = 0u64;
    for epoch in 0..config.epochs {
        for (row, &label) in x.rows().zip(y.as_slice()) {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let yi = signed(label);
            let violated = yi * (dot(&model.w, row) + model.b) < 1.0;
            let shrink = 1.0 - eta * lambda;
            model.w.iter_mut().for_each(|w| *w *= shrink);
            if violated {
                for (w, &xi) in model.w.iter_mut().zip(row) {
                    *w += eta * yi * xi;
                }
                model.b += eta * yi;
            }
        }
        let obj = model.objective(x, y)?;
        if !obj.total.is_finite() || !model.b.is_finite() {
            return Err(KpiError::NonFinite(format!("svm objective at epoch {epoch}")));
        }
        trace.push(obj.total);
    }
    Ok((model, trace))
}
