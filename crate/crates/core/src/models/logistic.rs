//! Logistic regression fitted by full-batch gradient descent.

use serde::{Deserialize, Serialize};

use super::config::LogregConfig;
use super::{check_width, dot};
use crate::dataset::{FeatureMatrix, LabelVector};
use crate::error::{KpiError, Result};

/// Logistic link, evaluated through `exp(-|z|)` so neither tail overflows.
pub fn sigmoid(z: f64) -> f64 {
    let e = (-z.abs()).exp();
    if z >= 0.0 {
        1.0 / (1.0 + e)
    } else {
        e / (1.0 + e)
    }
}

/// `ln(1 + e^u)` without overflow.
pub(crate) fn softplus(u: f64) -> f64 {
    u.max(0.0) + (-u.abs()).exp().ln_1p()
}

/// Binary cross-entropy of a logit against a 0/1 label.
pub(crate) fn bce_from_logit(z: f64, y: f64) -> f64 {
    // -[y ln s(z) + (1-y) ln(1 - s(z))] = y softplus(-z) + (1-y) softplus(z)
    y * softplus(-z) + (1.0 - y) * softplus(z)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub beta0: f64,
    pub beta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticGradient {
    pub loss: f64,
    pub intercept: f64,
    pub weights: Vec<f64>,
}

impl LogisticModel {
    pub fn zeros(p: usize) -> Self {
        Self { beta0: 0.0, beta: vec![0.0; p] }
    }

    pub fn logit(&self, x: &[f64]) -> Result<f64> {
        check_width(self.beta.len(), x.len())?;
        Ok(self.beta0 + dot(&self.beta, x))
    }

    pub fn probability(&self, x: &[f64]) -> Result<f64> {
        self.logit(x).map(sigmoid)
    }

    /// Mean negative log-likelihood and its gradient
    /// `(1/n) X^T (sigmoid(X beta + beta0) - y)`.
    pub fn loss_and_gradient(&self, x: &FeatureMatrix, y: &LabelVector) -> Result<LogisticGradient> {
        check_width(self.beta.len(), x.n_cols())?;
        let n = x.n_rows() as f64;
        let mut loss = 0.0;
        let mut intercept = 0.0;
        let mut weights = vec![0.0; self.beta.len()];
        for (row, &label) in x.rows().zip(y.as_slice()) {
            let z = self.beta0 + dot(&self.beta, row);
            let target = f64::from(label);
            loss += bce_from_logit(z, target);
            let residual = sigmoid(z) - target;
            intercept += residual;
            for (g, &xi) in weights.iter_mut().zip(row) {
                *g += residual * xi;
            }
        }
        weights.iter_mut().for_each(|g| *g /= n);
        Ok(LogisticGradient { loss: loss / n, intercept: intercept / n, weights })
    }
}

pub fn fit(x: &FeatureMatrix, y: &LabelVector, config: &LogregConfig) -> Result<LogisticModel> {
    let mut model = LogisticModel::zeros(x.n_cols());
    for iter in 0..config.iterations {
        let grad = model.loss_and_gradient(x, y)?;
        if !grad.loss.is_finite() {
            return Err(KpiError::NonFinite(format!("logistic loss at iteration {iter}")));
        }
        model.beta0 -= config.learning_rate * grad.intercept;
        for (b, g) in model.beta.iter_mut().zip(&grad.weights) {
            *b -= config.learning_rate * g;
        }
        if !model.beta0.is_finite() || model.beta.iter().any(|b| !b.is_finite()) {
            return Err(KpiError::NonFinite(format!("logistic parameters at iteration {iter}")));
        }
    }
    Ok(model)
}
