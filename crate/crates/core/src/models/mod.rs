//! The five binary classifiers behind one contract: fit on standardised
//! features, map a row to a probability-like score, threshold it.

pub mod adam;
pub mod ann;
pub mod bayes;
pub mod config;
pub mod logistic;
pub mod svm;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

pub use self::ann::AnnModel;
pub use self::bayes::BernoulliNbModel;
pub use self::config::{AdamConfig, AnnConfig, BnbConfig, LogregConfig, SvmConfig, TrainConfig, TreeConfig};
pub use self::logistic::{sigmoid, LogisticModel};
pub use self::svm::SvmModel;
pub use self::tree::{DecisionTree, TreeNode};
use crate::dataset::{FeatureMatrix, LabelVector};
use crate::error::{KpiError, Result};
use crate::preprocess::Scaler;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_width(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(KpiError::WidthMismatch { expected, got });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Logreg,
    Svm,
    Tree,
    Bnb,
    Ann,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] =
        [ModelKind::Logreg, ModelKind::Svm, ModelKind::Tree, ModelKind::Bnb, ModelKind::Ann];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Logreg => "logreg",
            ModelKind::Svm => "svm",
            ModelKind::Tree => "tree",
            ModelKind::Bnb => "bnb",
            ModelKind::Ann => "ann",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = KpiError;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| KpiError::InvalidArgument(format!("unknown model kind {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters", rename_all = "lowercase")]
pub enum ModelParameters {
    Logreg(LogisticModel),
    Svm(SvmModel),
    Tree(DecisionTree),
    Bnb(BernoulliNbModel),
    Ann(AnnModel),
}

impl ModelParameters {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParameters::Logreg(_) => ModelKind::Logreg,
            ModelParameters::Svm(_) => ModelKind::Svm,
            ModelParameters::Tree(_) => ModelKind::Tree,
            ModelParameters::Bnb(_) => ModelKind::Bnb,
            ModelParameters::Ann(_) => ModelKind::Ann,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            ModelParameters::Logreg(m) => m.beta.len(),
            ModelParameters::Svm(m) => m.w.len(),
            ModelParameters::Tree(m) => m.n_features,
            ModelParameters::Bnb(m) => m.n_features(),
            ModelParameters::Ann(m) => m.n_inputs(),
        }
    }

    /// Score in `[0, 1]` compared against the decision threshold. The SVM
    /// margin goes through the logistic link, so 0.5 sits on its hyperplane.
    pub fn probability(&self, x: &[f64]) -> Result<f64> {
        match self {
            ModelParameters::Logreg(m) => m.probability(x),
            ModelParameters::Svm(m) => m.score(x).map(sigmoid),
            ModelParameters::Tree(m) => m.probability(x),
            ModelParameters::Bnb(m) => m.probability(x),
            ModelParameters::Ann(m) => m.probability(x),
        }
    }

    pub fn predict(&self, x: &[f64], threshold: f64) -> Result<u8> {
        self.probability(x).map(|p| predict(p, threshold))
    }
}

/// Class 1 iff `probability >= threshold`.
pub fn predict(probability: f64, threshold: f64) -> u8 {
    u8::from(probability >= threshold)
}

/// Fits one model kind on already-standardised features.
pub fn fit(kind: ModelKind, x: &FeatureMatrix, y: &LabelVector, config: &TrainConfig) -> Result<ModelParameters> {
    if x.n_rows() != y.len() {
        return Err(KpiError::LengthMismatch { left: x.n_rows(), right: y.len() });
    }
    Ok(match kind {
        ModelKind::Logreg => ModelParameters::Logreg(logistic::fit(x, y, &config.logreg)?),
        ModelKind::Svm => ModelParameters::Svm(svm::fit(x, y, &config.svm)?),
        ModelKind::Tree => ModelParameters::Tree(tree::fit(x, y, &config.tree)),
        ModelKind::Bnb => ModelParameters::Bnb(bayes::fit(x, y, &config.bnb)?),
        ModelKind::Ann => ModelParameters::Ann(ann::fit(x, y, &config.ann)?),
    })
}

fn rfc3339<S: serde::Serializer>(t: &DateTime<Utc>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&t.to_rfc3339_opts(SecondsFormat::Millis, true))
}

/// A fitted classifier with the scaler it expects in front of it. Inputs to
/// [`TrainedModel::probability`] are raw, unscaled feature rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    #[serde(flatten)]
    pub parameters: ModelParameters,
    pub scaler: Scaler,
    pub feature_names: Vec<String>,
    pub training_config: TrainConfig,
    #[serde(serialize_with = "rfc3339")]
    pub trained_at: DateTime<Utc>,
}

impl TrainedModel {
    pub fn new(
        parameters: ModelParameters,
        scaler: Scaler,
        feature_names: Vec<String>,
        training_config: TrainConfig,
        trained_at: DateTime<Utc>,
    ) -> Result<Self> {
        let p = feature_names.len();
        check_width(p, parameters.n_features())?;
        check_width(p, scaler.width())?;
        Ok(Self { parameters, scaler, feature_names, training_config, trained_at })
    }

    pub fn kind(&self) -> ModelKind {
        self.parameters.kind()
    }

    pub fn probability(&self, raw: &[f64]) -> Result<f64> {
        self.parameters.probability(&self.scaler.transform_row(raw)?)
    }

    pub fn predict(&self, raw: &[f64], threshold: f64) -> Result<u8> {
        self.probability(raw).map(|p| predict(p, threshold))
    }

    pub fn probabilities(&self, raw: &FeatureMatrix) -> Result<Vec<f64>> {
        raw.rows().map(|r| self.probability(r)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text)?;
        Self::new(m.parameters, m.scaler, m.feature_names, m.training_config, m.trained_at)
    }
}
