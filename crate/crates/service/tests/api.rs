use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use citykpi_core::pipeline;
use citykpi_core::{ColumnSchema, Dataset};
use citykpi_service::jobs::{JobRecord, JobStatus};
use citykpi_service::registry;
use citykpi_service::routes::MetricsResponse;
use citykpi_service::{router, AppState, ServiceConfig};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn noisy_dataset(n: usize) -> Dataset {
    let schema = vec![
        ColumnSchema::feature("a"),
        ColumnSchema::feature("b"),
        ColumnSchema::feature("c"),
        ColumnSchema::target("y"),
    ];
    let rows = (0..n)
        .map(|i| {
            let a = ((i * 37) % 23) as f64 / 23.0 - 0.5;
            let b = ((i * 11) % 17) as f64 / 17.0 - 0.5;
            let c = (i % 5) as f64;
            let flip = i % 9 == 0;
            let y = u8::from((a + 0.5 * b > 0.0) != flip);
            vec![Some(a), Some(b), Some(c), Some(f64::from(y))]
        })
        .collect();
    Dataset::new(schema, rows)
}

fn app(dir: &std::path::Path, dataset: Option<Dataset>) -> (AppState, Router) {
    let config = ServiceConfig { models_dir: dir.to_path_buf(), ..ServiceConfig::default() };
    let state = AppState::new(config, dataset, Default::default());
    (state.clone(), router(state))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

async fn train(app: &Router, body: Value) -> String {
    let (status, job) = call(app, "POST", "/api/train", Some(body)).await;
    assert_eq!(status, StatusCode::ACCEPTED, "{job}");
    let job: JobRecord = serde_json::from_value(job).unwrap();
    for _ in 0..600 {
        let (_, v) = call(app, "GET", &format!("/api/jobs/{}", job.id), None).await;
        let rec: JobRecord = serde_json::from_value(v).unwrap();
        match rec.status {
            JobStatus::Done => return rec.model_id.unwrap(),
            JobStatus::Failed => panic!("job failed: {:?}", rec.error),
            _ => tokio::time::sleep(Duration::from_millis(20)).await,
        }
    }
    panic!("job did not finish");
}

#[tokio::test]
async fn no_dataset_is_503() {
    let dir = tempfile::tempdir().unwrap();
    let (_, app) = app(dir.path(), None);
    for uri in ["/api/summary", "/api/analytics", "/api/forecast?column=a&horizon=2"] {
        let (status, body) = call(&app, "GET", uri, None).await;
        assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE, "{uri}");
        assert_eq!(body["error"]["code"], "no_dataset");
    }
    let (status, _) = call(&app, "POST", "/api/train", Some(json!({ "model_kind": "logreg" }))).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
}

#[tokio::test]
async fn summary_counts_nulls() {
    let dir = tempfile::tempdir().unwrap();
    let mut ds = noisy_dataset(20);
    ds.rows[3][0] = None;
    ds.rows[4][1] = None;
    let (_, app) = app(dir.path(), Some(ds));
    let (status, body) = call(&app, "GET", "/api/summary", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["row_count"], 20);
    assert_eq!(body["column_count"], 4);
    assert_eq!(body["clean_row_count"], 18);
    assert_eq!(body["columns"][0]["nulls"], 1);
    assert_eq!(body["columns"][2]["min"], 0.0);
    assert_eq!(body["columns"][2]["max"], 4.0);
}

#[tokio::test]
async fn dataset_replacement_validates() {
    let dir = tempfile::tempdir().unwrap();
    let (state, app) = app(dir.path(), None);
    let mut bad = noisy_dataset(12);
    bad.rows[0][3] = Some(2.0);
    let (status, body) = call(&app, "POST", "/api/dataset", Some(serde_json::to_value(&bad).unwrap())).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body["error"]["message"].as_str().unwrap().contains("target"));
    assert!(state.dataset().is_none());

    let good = noisy_dataset(12);
    let (status, body) = call(&app, "POST", "/api/dataset", Some(serde_json::to_value(&good).unwrap())).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["row_count"], 12);
    assert_eq!(*state.dataset().unwrap(), good);
}

#[tokio::test]
async fn metrics_match_library_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let ds = noisy_dataset(60);
    let (_, app) = app(dir.path(), Some(ds.clone()));
    let id = train(&app, json!({ "model_kind": "logreg", "seed": 7, "test_fraction": 0.3 })).await;

    let (status, body) = call(&app, "GET", &format!("/api/models/{id}/metrics?threshold=0.5"), None).await;
    assert_eq!(status, StatusCode::OK);
    let served: MetricsResponse = serde_json::from_value(body).unwrap();
    assert_eq!(served.model_id, id);

    let stored = registry::load(&registry::path_for(dir.path(), &id)).unwrap();
    let prepared = pipeline::prepare(&ds, 0.3, 7).unwrap();
    assert_eq!(stored.test_indices, prepared.split.test_indices);
    let expected = pipeline::evaluate(&stored.model, &prepared.x_test_raw, &prepared.y_test, 0.5).unwrap();
    assert_eq!(served.evaluation, expected);

    let (_, zero) = call(&app, "GET", &format!("/api/models/{id}/metrics?threshold=0"), None).await;
    assert_eq!(zero["report"]["classes"]["1"]["recall"], 1.0);

    let (_, lo) = call(&app, "GET", &format!("/api/models/{id}/metrics?threshold=0.3"), None).await;
    let (_, hi) = call(&app, "GET", &format!("/api/models/{id}/metrics?threshold=0.7"), None).await;
    assert_eq!(lo["auc"], hi["auc"]);
    assert_eq!(lo["roc"], hi["roc"]);
    assert_eq!(lo["log_loss"], hi["log_loss"]);
}

#[tokio::test]
async fn metrics_error_paths() {
    let dir = tempfile::tempdir().unwrap();
    let (_, app) = app(dir.path(), Some(noisy_dataset(30)));
    let (status, _) = call(&app, "GET", "/api/models/nope/metrics?threshold=0.5", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let id = train(&app, json!({ "model_kind": "tree", "seed": 1 })).await;
    for t in ["1.5", "-0.1", "abc", "NaN"] {
        let (status, body) = call(&app, "GET", &format!("/api/models/{id}/metrics?threshold={t}"), None).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{t}");
        assert_eq!(body["error"]["code"], "bad_request");
    }
    let (status, _) = call(&app, "GET", &format!("/api/models/{id}/metrics?threshold=1"), None).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn train_rejects_bad_requests() {
    let dir = tempfile::tempdir().unwrap();
    let (_, app) = app(dir.path(), Some(noisy_dataset(30)));
    let bad = [
        json!({ "model_kind": "forest" }),
        json!({ "model_kind": "svm", "hyperparameters": { "svm": { "c": -1.0 } } }),
        json!({ "model_kind": "svm", "hyperparameters": { "svm": { "gamma": 1.0 } } }),
        json!({ "model_kind": "ann", "test_fraction": 1.0 }),
        json!({ "kind": "ann" }),
    ];
    for body in bad {
        let (status, _) = call(&app, "POST", "/api/train", Some(body.clone())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
    }
}

#[tokio::test]
async fn training_is_deterministic_and_persisted() {
    let dir = tempfile::tempdir().unwrap();
    let ds = noisy_dataset(40);
    let (state, app) = app(dir.path(), Some(ds.clone()));
    let req = json!({ "model_kind": "ann", "seed": 3, "hyperparameters": { "ann": { "hidden_units": 4 } } });
    let a = train(&app, req.clone()).await;
    let (_, first) = call(&app, "GET", &format!("/api/models/{a}"), None).await;
    let b = train(&app, req).await;
    assert_eq!(a, b);
    let (_, second) = call(&app, "GET", &format!("/api/models/{b}"), None).await;
    assert_eq!(first["model"]["parameters"], second["model"]["parameters"]);

    // a fresh process sees the same models
    let reloaded = AppState::load(state.config().clone()).unwrap();
    let stored = reloaded.model(&a).unwrap();
    assert_eq!(stored.model.parameters, state.model(&a).unwrap().model.parameters);
    let app2 = router(reloaded);
    let (_, m1) = call(&app, "GET", &format!("/api/models/{a}/metrics?threshold=0.4"), None).await;
    let (_, m2) = call(&app2, "GET", &format!("/api/models/{a}/metrics?threshold=0.4"), None).await;
    assert_eq!(m1, m2);
}

#[tokio::test]
async fn model_listing_reports_all_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let (_, app) = app(dir.path(), Some(noisy_dataset(50)));
    for kind in ["logreg", "svm", "tree", "bnb", "ann"] {
        train(&app, json!({ "model_kind": kind, "seed": 11 })).await;
    }
    let (status, list) = call(&app, "GET", "/api/models", None).await;
    assert_eq!(status, StatusCode::OK);
    let list = list.as_array().unwrap();
    assert_eq!(list.len(), 5);
    for entry in list {
        let acc = entry["accuracy"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&acc), "{entry}");
        assert!(entry["log_loss"].as_f64().unwrap() >= 0.0);
    }
    let (status, _) = call(&app, "GET", "/api/models/missing", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn forecast_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let schema = vec![ColumnSchema::feature("kpi"), ColumnSchema::feature("sparse"), ColumnSchema::target("y")];
    let rows = (0..8)
        .map(|i| {
            let sparse = (i < 2).then_some(1.0);
            vec![Some(2.0 + 3.0 * i as f64), sparse, Some(f64::from(i % 2))]
        })
        .collect();
    let (_, app) = app(dir.path(), Some(Dataset::new(schema, rows)));

    let (status, body) = call(&app, "GET", "/api/forecast?column=kpi&horizon=3&confidence=0.9", None).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["history"].as_array().unwrap().len(), 8);
    let steps = body["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 3);
    for (h, step) in steps.iter().enumerate() {
        let expected = 2.0 + 3.0 * (8 + h) as f64;
        assert!((step["point"].as_f64().unwrap() - expected).abs() < 1e-9);
    }

    let cases = [
        ("/api/forecast?column=nope&horizon=2", StatusCode::NOT_FOUND),
        ("/api/forecast?column=sparse&horizon=2", StatusCode::UNPROCESSABLE_ENTITY),
        ("/api/forecast?column=kpi&horizon=0", StatusCode::BAD_REQUEST),
        ("/api/forecast?column=kpi", StatusCode::BAD_REQUEST),
        ("/api/forecast?column=kpi&horizon=2&confidence=1.5", StatusCode::BAD_REQUEST),
    ];
    for (uri, want) in cases {
        let (status, body) = call(&app, "GET", uri, None).await;
        assert_eq!(status, want, "{uri}: {body}");
        assert!(body["error"]["message"].is_string());
    }
}

#[tokio::test]
async fn analytics_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let (_, app) = app(dir.path(), Some(noisy_dataset(30)));
    let (status, body) = call(&app, "GET", "/api/analytics", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["correlations"]["names"].as_array().unwrap().len(), 4);
    assert_eq!(body["correlations"]["values"][0][0], 1.0);
    let (status, body) = call(&app, "GET", "/api/health", None).await;
    assert_eq!((status, body), (StatusCode::OK, json!({ "status": "ok" })));
}
