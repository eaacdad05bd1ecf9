//! HTTP/JSON API for the city KPI engine.
//!
//! Serves dataset summaries, analytics, forecasts and model training to the
//! dashboard. Trained models are flat JSON files in the models directory,
//! stored with their held-out scores so threshold what-ifs never retrain.
//!
//! Endpoints:
//!
//! - `GET  /api/summary`: shape, per-column null counts and stats
//! - `POST /api/dataset`: replace the dataset (canonical JSON)
//! - `POST /api/train`: queue a training job, returns a [`jobs::JobRecord`]
//! - `GET  /api/jobs/{id}`
//! - `GET  /api/models`, `GET /api/models/{id}`
//! - `GET  /api/models/{id}/metrics?threshold=t`
//! - `GET  /api/analytics`
//! - `GET  /api/forecast?column=c&horizon=h&confidence=g`

pub mod config;
pub mod error;
pub mod jobs;
pub mod registry;
pub mod routes;
pub mod state;

pub use config::ServiceConfig;
pub use error::{ApiError, ServiceError};
pub use routes::router;
pub use state::AppState;

/// Loads state from `config` and serves until the process is stopped.
pub async fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    let addr = config.addr;
    let state = AppState::load(config)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await?;
    Ok(())
}
