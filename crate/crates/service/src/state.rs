use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use citykpi_core::Dataset;

use crate::config::ServiceConfig;
use crate::error::ServiceError;
use crate::jobs::{JobRecord, JobStatus};
use crate::registry::{self, StoredModel};

pub type ModelMap = BTreeMap<String, Arc<StoredModel>>;

/// Shared service state. Dataset and model map are replaced wholesale
/// (copy-on-write) so readers keep a consistent snapshot for a whole request.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    config: ServiceConfig,
    dataset: RwLock<Option<Arc<Dataset>>>,
    models: RwLock<Arc<ModelMap>>,
    jobs: RwLock<HashMap<String, JobRecord>>,
    train_locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
    next_job: AtomicU64,
}

pub fn load_dataset(path: &Path) -> Result<Dataset, ServiceError> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        Ok(Dataset::from_json(&std::fs::read_to_string(path)?)?)
    } else {
        Ok(Dataset::from_csv(std::fs::File::open(path)?, None)?)
    }
}

impl AppState {
    pub fn new(config: ServiceConfig, dataset: Option<Dataset>, models: ModelMap) -> Self {
        Self {
            inner: Arc::new(Inner {
                config,
                dataset: RwLock::new(dataset.map(Arc::new)),
                models: RwLock::new(Arc::new(models)),
                jobs: RwLock::new(HashMap::new()),
                train_locks: Mutex::new(HashMap::new()),
                next_job: AtomicU64::new(1),
            }),
        }
    }

    /// Reads the configured dataset and every persisted model.
    pub fn load(config: ServiceConfig) -> Result<Self, ServiceError> {
        config.validate()?;
        let dataset = config.dataset_path.as_deref().map(load_dataset).transpose()?;
        let models = registry::load_all(&config.models_dir)?.into_iter().map(|(id, m)| (id, Arc::new(m))).collect();
        Ok(Self::new(config, dataset, models))
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.inner.config
    }

    pub fn dataset(&self) -> Option<Arc<Dataset>> {
        self.inner.dataset.read().expect("dataset lock").clone()
    }

    pub fn replace_dataset(&self, dataset: Dataset) {
        *self.inner.dataset.write().expect("dataset lock") = Some(Arc::new(dataset));
    }

    pub fn models(&self) -> Arc<ModelMap> {
        self.inner.models.read().expect("models lock").clone()
    }

    pub fn model(&self, id: &str) -> Option<Arc<StoredModel>> {
        self.models().get(id).cloned()
    }

    pub fn insert_model(&self, model: StoredModel) {
        let mut guard = self.inner.models.write().expect("models lock");
        let mut next = (**guard).clone();
        next.insert(model.id.clone(), Arc::new(model));
        *guard = Arc::new(next);
    }

    pub fn next_job_id(&self) -> String {
        format!("job-{}", self.inner.next_job.fetch_add(1, Ordering::Relaxed))
    }

    pub fn put_job(&self, job: JobRecord) {
        self.inner.jobs.write().expect("jobs lock").insert(job.id.clone(), job);
    }

    pub fn job(&self, id: &str) -> Option<JobRecord> {
        self.inner.jobs.read().expect("jobs lock").get(id).cloned()
    }

    pub fn update_job(&self, id: &str, status: JobStatus, result: Option<String>, error: Option<String>) {
        if let Some(job) = self.inner.jobs.write().expect("jobs lock").get_mut(id) {
            if job.advance(status) {
                job.result = result.or(job.result.take());
                job.error = error.or(job.error.take());
            }
        }
    }

    /// One lock per model id so trains of the same id run one at a time.
    pub fn train_lock(&self, model_id: &str) -> Arc<tokio::sync::Mutex<()>> {
        self.inner.train_locks.lock().expect("train lock map").entry(model_id.to_string()).or_default().clone()
    }
}
