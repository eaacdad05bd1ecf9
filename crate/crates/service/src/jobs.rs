use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobKind {
    Train,
    Evaluate,
    Forecast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
}

impl JobStatus {
    pub fn is_terminal(self) -> bool {
        matches!(self, JobStatus::Done | JobStatus::Failed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub id: String,
    pub kind: JobKind,
    pub status: JobStatus,
    pub model_id: Option<String>,
    /// Where the finished result can be fetched.
    pub result: Option<String>,
    pub error: Option<String>,
}

impl JobRecord {
    pub fn queued(id: String, kind: JobKind, model_id: Option<String>) -> Self {
        Self { id, kind, status: JobStatus::Queued, model_id, result: None, error: None }
    }

    /// Moves to `next` if that is a forward transition; returns whether it moved.
    pub fn advance(&mut self, next: JobStatus) -> bool {
        let allowed = matches!(
            (self.status, next),
            (JobStatus::Queued, JobStatus::Running)
                | (JobStatus::Queued, JobStatus::Failed)
                | (JobStatus::Running, JobStatus::Done)
                | (JobStatus::Running, JobStatus::Failed)
        );
        if allowed {
            self.status = next;
        }
        allowed
    }
}
