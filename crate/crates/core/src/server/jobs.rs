//! Offline jobs: state machine, job table with optional journal, and the
//! worker pipeline that fetches, decodes, looks up, tags and notifies.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};

use super::tags::book_tags;
use super::wire::JobView;
use crate::barcode::{decode_image, Ean13};
use crate::catalog::{BookInfo, Catalog};
use crate::imagekit::load_pgm;
use crate::imagestore::{ImageStore, PhotoId};
use crate::notifier::{Msisdn, Notifier};
use crate::rng::IdSource;
use crate::timefmt::{self, Timestamp};

/// Pipeline stages in execution order. `Failed` may follow any
/// non-terminal state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum JobState {
    Received,
    Fetching,
    Decoding,
    LookingUp,
    Tagging,
    Notifying,
    Done,
    Failed,
}

impl JobState {
    pub const ALL: [JobState; 8] = [
        JobState::Received,
        JobState::Fetching,
        JobState::Decoding,
        JobState::LookingUp,
        JobState::Tagging,
        JobState::Notifying,
        JobState::Done,
        JobState::Failed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            JobState::Received => "RECEIVED",
            JobState::Fetching => "FETCHING",
            JobState::Decoding => "DECODING",
            JobState::LookingUp => "LOOKING_UP",
            JobState::Tagging => "TAGGING",
            JobState::Notifying => "NOTIFYING",
            JobState::Done => "DONE",
            JobState::Failed => "FAILED",
        }
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, JobState::Done | JobState::Failed)
    }

    /// Whether a job may move from `self` to `next`.
    pub fn can_advance_to(self, next: JobState) -> bool {
        if self.is_terminal() {
            return false;
        }
        match next {
            JobState::Failed => true,
            JobState::Done => self == JobState::Notifying,
            _ => next > self,
        }
    }
}

impl FromStr for JobState {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        JobState::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OfflineJob {
    pub job_id: String,
    pub photo_id: PhotoId,
    pub msisdn: Msisdn,
    pub state: JobState,
    pub failed_stage: Option<JobState>,
    pub error_code: Option<String>,
    #[serde(with = "timefmt")]
    pub created_at: Timestamp,
    #[serde(with = "timefmt")]
    pub updated_at: Timestamp,
    pub decoded: Option<Ean13>,
    pub book: Option<BookInfo>,
}

impl OfflineJob {
    pub fn view(&self) -> JobView {
        JobView {
            job_id: self.job_id.clone(),
            photo_id: self.photo_id.to_string(),
            state: self.state,
            failed_stage: self.failed_stage,
            error_code: self.error_code.clone(),
            barcode: self.decoded.map(|c| c.to_string()),
            created_at: timefmt::format(&self.created_at),
            updated_at: timefmt::format(&self.updated_at),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JobError {
    #[error("job not found")]
    NotFound,
    #[error("illegal transition {from:?} -> {to:?}")]
    IllegalTransition { from: JobState, to: JobState },
}

#[derive(Debug)]
struct Entry {
    job: OfflineJob,
    history: Vec<JobState>,
}

/// Job table. Transitions for one job are serialized by the table lock and
/// checked against the state order.
#[derive(Debug)]
pub struct JobStore {
    jobs: RwLock<HashMap<String, Entry>>,
    ids: IdSource,
    journal: Option<Mutex<File>>,
}

impl JobStore {
    pub fn new(seed: Option<u64>) -> Self {
        Self {
            jobs: RwLock::new(HashMap::new()),
            ids: IdSource::new(seed),
            journal: None,
        }
    }

    /// Also appends every job snapshot, one JSON object per line, to `path`.
    pub fn with_journal(seed: Option<u64>, path: &Path) -> std::io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self {
            journal: Some(Mutex::new(file)),
            ..Self::new(seed)
        })
    }

    fn record(&self, job: &OfflineJob) {
        if let Some(journal) = &self.journal {
            let mut line = serde_json::to_string(job).expect("job serializes");
            line.push('\n');
            if let Err(e) = journal.lock().write_all(line.as_bytes()) {
                log::warn!("job journal write failed: {e}");
            }
        }
    }

    pub fn create(&self, photo_id: PhotoId, msisdn: Msisdn) -> OfflineJob {
        let now = timefmt::now();
        let mut jobs = self.jobs.write();
        let job_id = loop {
            let id = self.ids.next_id();
            if !jobs.contains_key(&id) {
                break id;
            }
        };
        let job = OfflineJob {
            job_id: job_id.clone(),
            photo_id,
            msisdn,
            state: JobState::Received,
            failed_stage: None,
            error_code: None,
            created_at: now,
            updated_at: now,
            decoded: None,
            book: None,
        };
        jobs.insert(
            job_id,
            Entry {
                job: job.clone(),
                history: vec![JobState::Received],
            },
        );
        drop(jobs);
        self.record(&job);
        job
    }

    /// Drops a job that never ran (its queue slot could not be obtained).
    pub fn discard(&self, job_id: &str) {
        self.jobs.write().remove(job_id);
    }

    pub fn get(&self, job_id: &str) -> Option<OfflineJob> {
        self.jobs.read().get(job_id).map(|e| e.job.clone())
    }

    /// Every state the job has entered, in order.
    pub fn history(&self, job_id: &str) -> Option<Vec<JobState>> {
        self.jobs.read().get(job_id).map(|e| e.history.clone())
    }

    pub fn len(&self) -> usize {
        self.jobs.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn all(&self) -> Vec<OfflineJob> {
        self.jobs.read().values().map(|e| e.job.clone()).collect()
    }

    /// Moves a job to `to`, applying `update` to the record first.
    pub fn transition(
        &self,
        job_id: &str,
        to: JobState,
        update: impl FnOnce(&mut OfflineJob),
    ) -> Result<OfflineJob, JobError> {
        let mut jobs = self.jobs.write();
        let entry = jobs.get_mut(job_id).ok_or(JobError::NotFound)?;
        let from = entry.job.state;
        if !from.can_advance_to(to) {
            return Err(JobError::IllegalTransition { from, to });
        }
        update(&mut entry.job);
        entry.job.state = to;
        entry.job.updated_at = timefmt::now();
        entry.history.push(to);
        let snapshot = entry.job.clone();
        drop(jobs);
        self.record(&snapshot);
        Ok(snapshot)
    }
}

pub fn success_message(photo_id: &PhotoId) -> String {
    format!("pervascan: info ready for photo {photo_id}")
}

pub fn failure_message(photo_id: &PhotoId, error_code: &str) -> String {
    format!("pervascan: lookup failed for photo {photo_id} ({error_code})")
}

/// Everything a worker needs to run jobs.
pub struct Pipeline {
    pub store: Arc<dyn ImageStore>,
    pub catalog: Arc<dyn Catalog>,
    pub notifier: Arc<dyn Notifier>,
    pub jobs: Arc<JobStore>,
    pub scanlines: usize,
}

struct StageFailure {
    stage: JobState,
    code: String,
}

impl Pipeline {
    fn enter(&self, job_id: &str, stage: JobState) -> Result<(), StageFailure> {
        self.jobs
            .transition(job_id, stage, |_| {})
            .map(|_| ())
            .map_err(|e| StageFailure {
                stage,
                code: format!("internal: {e}"),
            })
    }

    fn steps(&self, job: &OfflineJob) -> Result<(), StageFailure> {
        let id = job.job_id.as_str();
        let fail = |stage: JobState| move |code: &str| StageFailure {
            stage,
            code: code.to_string(),
        };

        self.enter(id, JobState::Fetching)?;
        let bytes = self
            .store
            .fetch(&job.photo_id)
            .map_err(|e| fail(JobState::Fetching)(e.code()))?;

        self.enter(id, JobState::Decoding)?;
        let image = load_pgm(&bytes).map_err(|_| fail(JobState::Decoding)("invalid_image"))?;
        let report = decode_image(&image, self.scanlines)
            .map_err(|e| fail(JobState::Decoding)(e.code()))?;

        self.jobs
            .transition(id, JobState::LookingUp, |j| j.decoded = Some(report.code))
            .map_err(|e| fail(JobState::LookingUp)(&format!("internal: {e}")))?;
        let book = self
            .catalog
            .lookup(&report.code)
            .map_err(|e| fail(JobState::LookingUp)(e.code()))?;

        let tags = book_tags(&book);
        self.jobs
            .transition(id, JobState::Tagging, |j| j.book = Some(book))
            .map_err(|e| fail(JobState::Tagging)(&format!("internal: {e}")))?;
        self.store
            .add_tags(&job.photo_id, &tags)
            .map_err(|e| fail(JobState::Tagging)(e.code()))?;

        self.enter(id, JobState::Notifying)?;
        self.notifier
            .send(&job.msisdn, &success_message(&job.photo_id))
            .map_err(|e| fail(JobState::Notifying)(e.code()))?;
        Ok(())
    }

    /// Runs a RECEIVED job to a terminal state. Errors are recorded in the
    /// job; a failed job gets a failure SMS instead of the success SMS.
    pub fn run_job(&self, job_id: &str) -> Option<OfflineJob> {
        let job = self.jobs.get(job_id)?;
        if job.state != JobState::Received {
            return Some(job);
        }
        match self.steps(&job) {
            Ok(()) => {
                if let Err(e) = self.jobs.transition(job_id, JobState::Done, |_| {}) {
                    log::error!("job {job_id}: {e}");
                }
            }
            Err(failure) => {
                let recorded = self.jobs.transition(job_id, JobState::Failed, |j| {
                    j.failed_stage = Some(failure.stage);
                    j.error_code = Some(failure.code.clone());
                });
                match recorded {
                    Ok(_) => {
                        let body = failure_message(&job.photo_id, &failure.code);
                        if let Err(e) = self.notifier.send(&job.msisdn, &body) {
                            log::warn!("job {job_id}: failure SMS not sent: {e}");
                        }
                    }
                    Err(e) => log::error!("job {job_id}: {e}"),
                }
            }
        }
        self.jobs.get(job_id)
    }
}
