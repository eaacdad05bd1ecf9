//! One-hidden-layer network `p -> h (ReLU) -> 1 (sigmoid)` trained with
//! full-batch Adam on binary cross-entropy.

use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::config::AnnConfig;
use super::logistic::{bce_from_logit, sigmoid};
use super::{check_width, dot};
use crate::dataset::{FeatureMatrix, LabelVector};
use crate::error::{KpiError, Result};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnModel {
    /// `h x p`, one row per hidden unit.
    pub hidden_weights: Vec<Vec<f64>>,
    pub hidden_bias: Vec<f64>,
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
}

impl AnnModel {
    pub fn zeros(p: usize, h: usize) -> Self {
        Self {
            hidden_weights: vec![vec![0.0; p]; h],
            hidden_bias: vec![0.0; h],
            output_weights: vec![0.0; h],
            output_bias: 0.0,
        }
    }

    /// Glorot-uniform weights drawn from splitmix64 (hidden rows first, then
    /// the output layer); biases start at zero.
    pub fn init(p: usize, h: usize, seed: u64) -> Self {
        let mut rng = SplitMix64::new(seed);
        let mut uniform = |limit: f64| (2.0 * rng.next_f64() - 1.0) * limit;
        let hidden_limit = (6.0 / (p + h) as f64).sqrt();
        let output_limit = (6.0 / (h + 1) as f64).sqrt();
        let hidden_weights = (0..h).map(|_| (0..p).map(|_| uniform(hidden_limit)).collect()).collect();
        let output_weights = (0..h).map(|_| uniform(output_limit)).collect();
        Self { hidden_weights, hidden_bias: vec![0.0; h], output_weights, output_bias: 0.0 }
    }

    pub fn n_inputs(&self) -> usize {
        self.hidden_weights.first().map_or(0, Vec::len)
    }

    pub fn n_hidden(&self) -> usize {
        self.hidden_bias.len()
    }

    fn hidden_pre(&self, x: &[f64]) -> Vec<f64> {
        self.hidden_weights.iter().zip(&self.hidden_bias).map(|(w, b)| dot(w, x) + b).collect()
    }

    pub fn logit(&self, x: &[f64]) -> Result<f64> {
        check_width(self.n_inputs(), x.len())?;
        let hidden: Vec<f64> = self.hidden_pre(x).into_iter().map(|z| z.max(0.0)).collect();
        Ok(dot(&self.output_weights, &hidden) + self.output_bias)
    }

    pub fn probability(&self, x: &[f64]) -> Result<f64> {
        self.logit(x).map(sigmoid)
    }

    /// Parameters in a fixed order: hidden weights (row-major), hidden bias,
    /// output weights, output bias.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.hidden_weights.iter().flatten().copied().collect();
        v.extend(&self.hidden_bias);
        v.extend(&self.output_weights);
        v.push(self.output_bias);
        v
    }

    pub fn from_flat(p: usize, h: usize, flat: &[f64]) -> Self {
        assert_eq!(flat.len(), h * p + 2 * h + 1, "flat parameter length");
        let hidden_weights = flat[..h * p].chunks_exact(p.max(1)).map(<[f64]>::to_vec).collect();
        let hidden_bias = flat[h * p..h * p + h].to_vec();
        let output_weights = flat[h * p + h..h * p + 2 * h].to_vec();
        Self { hidden_weights, hidden_bias, output_weights, output_bias: flat[flat.len() - 1] }
    }

    /// Mean binary cross-entropy and its gradient by backpropagation, laid
    /// out like [`AnnModel::to_flat`].
    pub fn loss_and_gradient(&self, x: &FeatureMatrix, y: &LabelVector) -> Result<(f64, Vec<f64>)> {
        let (p, h) = (self.n_inputs(), self.n_hidden());
        check_width(p, x.n_cols())?;
        let n = x.n_rows() as f64;
        let mut grad = AnnModel::zeros(p, h);
        let mut loss = 0.0;
        for (row, &label) in x.rows().zip(y.as_slice()) {
            let pre = self.hidden_pre(row);
            let act: Vec<f64> = pre.iter().map(|z| z.max(0.0)).collect();
            let z = dot(&self.output_weights, &act) + self.output_bias;
            let target = f64::from(label);
            loss += bce_from_logit(z, target);
            let delta = (sigmoid(z) - target) / n;
            grad.output_bias += delta;
            for k in 0..h {
                grad.output_weights[k] += delta * act[k];
                if pre[k] > 0.0 {
                    let dk = delta * self.output_weights[k];
                    grad.hidden_bias[k] += dk;
                    for (g, &xi) in grad.hidden_weights[k].iter_mut().zip(row) {
                        *g += dk * xi;
                    }
                }
            }
        }
        Ok((loss / n, grad.to_flat()))
    }
}

pub fn fit(x: &FeatureMatrix, y: &LabelVector, config: &AnnConfig) -> Result<AnnModel> {
    let (p, h) = (x.n_cols(), config.hidden_units);
    let mut model = AnnModel::init(p, h, config.adam.init_seed);
    let mut params = model.to_flat();
    let mut adam = Adam::new(&config.adam, params.len());
    for epoch in 0..config.adam.epochs {
        let (loss, grad) = model.loss_and_gradient(x, y)?;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(KpiError::NonFinite(format!("ann loss at epoch {epoch}")));
        }
        adam.step(&mut params, &grad);
        model = AnnModel::from_flat(p, h, &params);
    }
    if params.iter().any(|v| !v.is_finite()) {
        return Err(KpiError::NonFinite("ann parameters".into()));
    }
    Ok(model)
}
