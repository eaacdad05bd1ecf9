use serde::{Deserialize, Serialize};

use crate::error::{KpiError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub init_seed: u64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { learning_rate: 0.001, beta1: 0.9, beta2: 0.999, epsilon: 1e-8, epochs: 500, init_seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogregConfig {
    pub learning_rate: f64,
    pub iterations: usize,
}

impl Default for LogregConfig {
    fn default() -> Self {
        Self { learning_rate: 0.1, iterations: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    pub c: f64,
    pub epochs: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self { c: 1.0, epochs: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeConfig {
    /// `None` grows until every leaf is pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self { max_depth: None, min_samples_split: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BnbConfig {
    pub alpha: f64,
    pub binarize_threshold: f64,
}

impl Default for BnbConfig {
    fn default() -> Self {
        Self { alpha: 1.0, binarize_threshold: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnConfig {
    pub hidden_units: usize,
    pub adam: AdamConfig,
}

impl Default for AnnConfig {
    fn default() -> Self {
        Self { hidden_units: 8, adam: AdamConfig::default() }
    }
}

/// Hyperparameters for every model kind plus the decision threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub logreg: LogregConfig,
    pub svm: SvmConfig,
    pub tree: TreeConfig,
    pub bnb: BnbConfig,
    pub ann: AnnConfig,
    pub threshold: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            logreg: LogregConfig::default(),
            svm: SvmConfig::default(),
            tree: TreeConfig::default(),
            bnb: BnbConfig::default(),
            ann: AnnConfig::default(),
            threshold: 0.5,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(KpiError::BadHyperparameter(format!("{name} must be positive and finite, got {v}")))
    }
}

fn nonzero(name: &str, v: usize) -> Result<()> {
    if v > 0 {
        Ok(())
    } else {
        Err(KpiError::BadHyperparameter(format!("{name} must be at least 1")))
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        positive("adam.learning_rate", self.learning_rate)?;
        positive("adam.epsilon", self.epsilon)?;
        nonzero("adam.epochs", self.epochs)?;
        for (name, b) in [("adam.beta1", self.beta1), ("adam.beta2", self.beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return Err(KpiError::BadHyperparameter(format!("{name} must lie in (0, 1), got {b}")));
            }
        }
        Ok(())
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        positive("logreg.learning_rate", self.logreg.learning_rate)?;
        nonzero("logreg.iterations", self.logreg.iterations)?;
        positive("svm.c", self.svm.c)?;
        nonzero("svm.epochs", self.svm.epochs)?;
        if let Some(d) = self.tree.max_depth {
            nonzero("tree.max_depth", d)?;
        }
        if self.tree.min_samples_split < 2 {
            return Err(KpiError::BadHyperparameter("tree.min_samples_split must be at least 2".into()));
        }
        positive("bnb.alpha", self.bnb.alpha)?;
        if !self.bnb.binarize_threshold.is_finite() {
            return Err(KpiError::BadHyperparameter("bnb.binarize_threshold must be finite".into()));
        }
        nonzero("ann.hidden_units", self.ann.hidden_units)?;
        self.ann.adam.validate()?;
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(KpiError::BadHyperparameter(format!("threshold must lie in [0, 1], got {}", self.threshold)));
        }
        Ok(())
    }
}
