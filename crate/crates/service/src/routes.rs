use std::collections::HashMap;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use citykpi_core::analytics::{self, holt, AnalysisReport, ForecastResult};
use citykpi_core::pipeline::{self, Evaluation};
use citykpi_core::preprocess::drop_missing;
use citykpi_core::{ColumnRole, Dataset, ModelKind, TrainConfig};
use serde::{Deserialize, Serialize};
use tower_http::cors::{Any, CorsLayer};

use crate::error::ApiError;
use crate::jobs::{JobKind, JobRecord, JobStatus};
use crate::registry;
use crate::state::AppState;

type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: AppState) -> Router {
    let cors = match state.config().cors_origin.as_deref().map(HeaderValue::from_str) {
        Some(Ok(origin)) => CorsLayer::new().allow_origin(origin),
        _ => CorsLayer::new().allow_origin(Any),
    }
    .allow_methods(Any)
    .allow_headers(Any);

    Router::new()
        .route("/api/health", get(|| async { Json(serde_json::json!({ "status": "ok" })) }))
        .route("/api/summary", get(summary))
        .route("/api/dataset", post(replace_dataset))
        .route("/api/train", post(train))
        .route("/api/jobs/{id}", get(job))
        .route("/api/models", get(list_models))
        .route("/api/models/{id}", get(get_model))
        .route("/api/models/{id}/metrics", get(model_metrics))
        .route("/api/analytics", get(analytics_report))
        .route("/api/forecast", get(forecast))
        .layer(cors)
        .with_state(state)
}

fn require_dataset(state: &AppState) -> ApiResult<std::sync::Arc<Dataset>> {
    state.dataset().ok_or_else(ApiError::no_dataset)
}

fn parse_param<T: std::str::FromStr>(params: &HashMap<String, String>, name: &str) -> ApiResult<Option<T>> {
    params
        .get(name)
        .map(|v| v.parse::<T>().map_err(|_| ApiError::bad_request(format!("invalid {name}: {v:?}"))))
        .transpose()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub name: String,
    pub role: ColumnRole,
    pub unit: Option<String>,
    pub non_null: usize,
    pub nulls: usize,
    pub mean: Option<f64>,
    /// Population standard deviation.
    pub std: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub row_count: usize,
    pub column_count: usize,
    pub clean_row_count: usize,
    pub columns: Vec<ColumnSummary>,
}

pub fn summarize(dataset: &Dataset) -> ApiResult<DatasetSummary> {
    let clean = drop_missing(dataset)?;
    let columns = dataset
        .schema
        .iter()
        .enumerate()
        .map(|(j, col)| {
            let values: Vec<f64> = dataset.column(j).flatten().collect();
            let n = values.len();
            let mean = (n > 0).then(|| values.iter().sum::<f64>() / n as f64);
            let std = mean.map(|m| (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64).sqrt());
            ColumnSummary {
                name: col.name.clone(),
                role: col.role,
                unit: col.unit.clone(),
                non_null: n,
                nulls: dataset.row_count() - n,
                mean,
                std,
                min: values.iter().copied().reduce(f64::min),
                max: values.iter().copied().reduce(f64::max),
            }
        })
        .collect();
    Ok(DatasetSummary {
        row_count: dataset.row_count(),
        column_count: dataset.column_count(),
        clean_row_count: clean.row_count(),
        columns,
    })
}

async fn summary(State(state): State<AppState>) -> ApiResult<Json<DatasetSummary>> {
    let dataset = require_dataset(&state)?;
    summarize(&dataset).map(Json)
}

async fn replace_dataset(State(state): State<AppState>, body: Bytes) -> ApiResult<Json<DatasetSummary>> {
    let dataset: Dataset =
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(format!("invalid dataset JSON: {e}")))?;
    let violations = dataset.validate();
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(ApiError::unprocessable(list.join("; ")));
    }
    let summary = summarize(&dataset)?;
    state.replace_dataset(dataset);
    Ok(Json(summary))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainRequest {
    pub model_kind: String,
    pub seed: Option<u64>,
    pub test_fraction: Option<f64>,
    #[serde(default)]
    pub hyperparameters: Option<serde_json::Value>,
}

async fn train(State(state): State<AppState>, body: Bytes) -> ApiResult<impl IntoResponse> {
    let req: TrainRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(format!("invalid train request: {e}")))?;
    let kind: ModelKind =
        req.model_kind.parse().map_err(|e: citykpi_core::KpiError| ApiError::bad_request(e.to_string()))?;
    let config: TrainConfig = match req.hyperparameters {
        None | Some(serde_json::Value::Null) => TrainConfig::default(),
        Some(v) => {
            serde_json::from_value(v).map_err(|e| ApiError::bad_request(format!("invalid hyperparameters: {e}")))?
        }
    };
    config.validate().map_err(|e| ApiError::bad_request(e.to_string()))?;
    let seed = req.seed.unwrap_or(state.config().default_seed);
    let test_fraction = req.test_fraction.unwrap_or(state.config().default_test_fraction);
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(ApiError::bad_request(format!("test_fraction {test_fraction} outside (0, 1)")));
    }
    let dataset = require_dataset(&state)?;
    let prepared = pipeline::prepare(&dataset, test_fraction, seed)?;

    let model_id = registry::model_id(kind, seed, test_fraction, &config, &dataset);
    let job = JobRecord::queued(state.next_job_id(), JobKind::Train, Some(model_id.clone()));
    state.put_job(job.clone());

    let job_id = job.id.clone();
    let bg = state.clone();
    tokio::spawn(async move {
        let lock = bg.train_lock(&model_id);
        let _guard = lock.lock().await;
        bg.update_job(&job_id, JobStatus::Running, None, None);
        let dir = bg.config().models_dir.clone();
        let id = model_id.clone();
        let outcome = tokio::task::spawn_blocking(move || {
            let stored = registry::build(id, kind, &prepared, &config, Utc::now())?;
            registry::save(&dir, &stored)?;
            Ok::<_, crate::error::ServiceError>(stored)
        })
        .await;
        match outcome {
            Ok(Ok(stored)) => {
                bg.insert_model(stored);
                bg.update_job(&job_id, JobStatus::Done, Some(format!("/api/models/{model_id}")), None);
            }
            Ok(Err(e)) => bg.update_job(&job_id, JobStatus::Failed, None, Some(e.to_string())),
            Err(e) => bg.update_job(&job_id, JobStatus::Failed, None, Some(format!("training task aborted: {e}"))),
        }
    });
    Ok((StatusCode::ACCEPTED, Json(job)))
}

async fn job(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<JobRecord>> {
    state.job(&id).map(Json).ok_or_else(|| ApiError::not_found(format!("unknown job {id:?}")))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ModelListing {
    pub id: String,
    pub kind: ModelKind,
    pub seed: u64,
    pub test_fraction: f64,
    pub trained_at: DateTime<Utc>,
    pub threshold: f64,
    pub accuracy: f64,
    pub log_loss: f64,
    pub auc: Option<f64>,
}

async fn list_models(State(state): State<AppState>) -> ApiResult<Json<Vec<ModelListing>>> {
    let models = state.models();
    let mut out = Vec::with_capacity(models.len());
    for m in models.values() {
        let threshold = m.model.training_config.threshold;
        let eval = m.evaluate(threshold)?;
        out.push(ModelListing {
            id: m.id.clone(),
            kind: m.kind(),
            seed: m.seed,
            test_fraction: m.test_fraction,
            trained_at: m.model.trained_at,
            threshold,
            accuracy: eval.report.accuracy,
            log_loss: eval.log_loss,
            auc: eval.auc,
        });
    }
    Ok(Json(out))
}

async fn get_model(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<registry::StoredModel>> {
    let m = state.model(&id).ok_or_else(|| ApiError::not_found(format!("unknown model {id:?}")))?;
    Ok(Json((*m).clone()))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MetricsResponse {
    pub model_id: String,
    pub kind: ModelKind,
    #[serde(flatten)]
    pub evaluation: Evaluation,
}

async fn model_metrics(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<Json<MetricsResponse>> {
    let m = state.model(&id).ok_or_else(|| ApiError::not_found(format!("unknown model {id:?}")))?;
    let threshold = parse_param::<f64>(&params, "threshold")?.unwrap_or(0.5);
    if !(0.0..=1.0).contains(&threshold) {
        return Err(ApiError::bad_request(format!("threshold {threshold} outside [0, 1]")));
    }
    let evaluation = m.evaluate(threshold)?;
    Ok(Json(MetricsResponse { model_id: m.id.clone(), kind: m.kind(), evaluation }))
}

async fn analytics_report(State(state): State<AppState>) -> ApiResult<Json<AnalysisReport>> {
    let dataset = require_dataset(&state)?;
    let clean = drop_missing(&dataset)?;
    Ok(Json(analytics::analyze(&clean)?))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ForecastResponse {
    pub column: String,
    pub history: Vec<f64>,
    #[serde(flatten)]
    pub forecast: ForecastResult,
}

async fn forecast(
    State(state): State<AppState>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<Json<ForecastResponse>> {
    let column = params.get("column").ok_or_else(|| ApiError::bad_request("missing column"))?.clone();
    let horizon = parse_param::<usize>(&params, "horizon")?.ok_or_else(|| ApiError::bad_request("missing horizon"))?;
    if horizon == 0 {
        return Err(ApiError::bad_request("horizon must be at least 1"));
    }
    let confidence = parse_param(&params, "confidence")?.unwrap_or(holt::DEFAULT_CONFIDENCE);
    let alpha = parse_param(&params, "alpha")?.unwrap_or(holt::DEFAULT_ALPHA);
    let beta = parse_param(&params, "beta")?.unwrap_or(holt::DEFAULT_BETA);

    let dataset = require_dataset(&state)?;
    let j = dataset.column_index(&column).ok_or_else(|| ApiError::not_found(format!("unknown column {column:?}")))?;
    let history: Vec<f64> = dataset.column(j).flatten().collect();
    let forecast = holt::holt_fit_forecast(&history, horizon, alpha, beta, confidence)?;
    Ok(Json(ForecastResponse { column, history, forecast }))
}
