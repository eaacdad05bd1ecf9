//! Analytics engine for city KPI tables.
//!
//! Ingests KPI datasets, trains five binary classifiers of a governance
//! outcome (logistic regression, linear SVM, decision tree, Bernoulli naive
//! Bayes and a small neural network), evaluates them with confusion-matrix
//! metrics, log loss and ROC/AUC, and provides exploratory statistics and
//! Holt trend forecasts for a dashboard.
//!
//! ```
//! use citykpi_core::metrics::{ConfusionMatrix, Report};
//!
//! let cm = ConfusionMatrix::from_counts([[5, 4], [3, 1]]);
//! let report = Report::from_confusion(&cm).unwrap();
//! assert!((report.accuracy - 6.0 / 13.0).abs() < 1e-15);
//! ```

pub mod analytics;
pub mod dataset;
pub mod error;
pub mod metrics;
pub mod models;
pub mod pipeline;
pub mod preprocess;
pub mod rng;

pub use dataset::{ColumnRole, ColumnSchema, Dataset, FeatureMatrix, LabelVector, Violation};
pub use error::{KpiError, Result};
pub use models::{ModelKind, ModelParameters, TrainConfig, TrainedModel};
pub use preprocess::{Scaler, Split};
