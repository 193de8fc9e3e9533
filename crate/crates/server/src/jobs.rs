use std::collections::HashMap;
use std::sync::RwLock;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JobKind {
    Evaluate,
    Debias,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JobState {
    Pending,
    Running,
    Done,
    Failed,
}

impl JobState {
    fn can_become(self, next: JobState) -> bool {
        matches!(
            (self, next),
            (JobState::Pending, JobState::Running) | (JobState::Running, JobState::Done | JobState::Failed)
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct JobRecord {
    pub id: String,
    pub kind: JobKind,
    pub state: JobState,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result_ref: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

struct Job {
    record: JobRecord,
    /// Serialized result body for jobs whose output is not a space.
    body: Option<String>,
}

#[derive(Default)]
pub struct JobStore {
    jobs: RwLock<HashMap<String, Job>>,
}

impl JobStore {
    pub fn create(&self, kind: JobKind) -> JobRecord {
        let record = JobRecord {
            id: uuid::Uuid::new_v4().simple().to_string(),
            kind,
            state: JobState::Pending,
            result_ref: None,
            error: None,
        };
        self.jobs.write().unwrap().insert(
            record.id.clone(),
            Job {
                record: record.clone(),
                body: None,
            },
        );
        record
    }

    pub fn get(&self, id: &str) -> Option<JobRecord> {
        self.jobs.read().unwrap().get(id).map(|j| j.record.clone())
    }

    pub fn body(&self, id: &str) -> Option<String> {
        self.jobs.read().unwrap().get(id).and_then(|j| j.body.clone())
    }

    fn transition(&self, id: &str, next: JobState, apply: impl FnOnce(&mut Job)) {
        let mut jobs = self.jobs.write().unwrap();
        if let Some(job) = jobs.get_mut(id) {
            if job.record.state.can_become(next) {
                job.record.state = next;
                apply(job);
            } else {
                tracing::warn!(id, from = ?job.record.state, to = ?next, "ignored job state regression");
            }
        }
    }

    pub fn start(&self, id: &str) {
        self.transition(id, JobState::Running, |_| {});
    }

    pub fn finish(&self, id: &str, result_ref: String, body: Option<String>) {
        self.transition(id, JobState::Done, |job| {
            job.record.result_ref = Some(result_ref);
            job.body = body;
        });
    }

    pub fn fail(&self, id: &str, message: String) {
        self.transition(id, JobState::Failed, |job| job.record.error = Some(message));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn states_only_move_forward() {
        let store = JobStore::default();
        let job = store.create(JobKind::Debias);
        store.finish(&job.id, "x".into(), None);
        assert_eq!(store.get(&job.id).unwrap().state, JobState::Pending);
        store.start(&job.id);
        store.finish(&job.id, "x".into(), None);
        store.fail(&job.id, "late".into());
        store.start(&job.id);
        let rec = store.get(&job.id).unwrap();
        assert_eq!(rec.state, JobState::Done);
        assert_eq!(rec.result_ref.as_deref(), Some("x"));
        assert!(rec.error.is_none());
    }
}
