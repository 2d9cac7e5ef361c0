//! The image computation server.
//!
//! [`Service`] holds the transport-free request logic: the synchronous
//! online lookup, offline job submission and status, and wire metrics.
//! Offline jobs are queued on a bounded channel and executed by a pool of
//! worker threads running [`jobs::Pipeline`]. [`http::router`] exposes the
//! service over REST/JSON and the XML envelope encoding.

mod config;
pub mod http;
pub mod jobs;
mod metrics;
mod runtime;
pub mod tags;
pub mod wire;

use std::sync::Arc;
use std::thread::JoinHandle;

use crossbeam_channel::{Sender, TrySendError};

pub use config::{ConfigError, ServerConfig};
pub use jobs::{JobState, JobStore, OfflineJob, Pipeline};
pub use metrics::{Metrics, WireMetrics};
pub use runtime::{build_app, AppParts, RunningServer, SetupError};

use crate::barcode::decode_image;
use crate::catalog::{BookInfo, Catalog, CatalogError};
use crate::imagekit::load_pgm;
use crate::imagestore::{ImageStore, PhotoId};
use crate::notifier::{Msisdn, Notifier};
use wire::{CheapestOffer, ErrorResponse, JobView, LookupResponse, SubmitJobRequest, SubmitJobResponse};

/// Request failure with its wire status and code.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ApiError {
    #[error("request body is not a valid PGM image")]
    InvalidImage,
    #[error("barcode decoding failed: {0}")]
    DecodeFailed(String),
    #[error("product not found")]
    ProductNotFound,
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("job not found")]
    JobNotFound,
    #[error("malformed body: {0}")]
    MalformedBody(String),
    #[error("job queue is full")]
    QueueFull,
    #[error("internal error: {0}")]
    Internal(String),
}

impl ApiError {
    pub fn status(&self) -> u16 {
        match self {
            ApiError::InvalidImage | ApiError::InvalidRequest(_) | ApiError::MalformedBody(_) => 400,
            ApiError::DecodeFailed(_) => 422,
            ApiError::ProductNotFound | ApiError::JobNotFound => 404,
            ApiError::QueueFull => 503,
            ApiError::Internal(_) => 500,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ApiError::InvalidImage => "invalid_image",
            ApiError::DecodeFailed(_) => "decode_failed",
            ApiError::ProductNotFound => "product_not_found",
            ApiError::InvalidRequest(_) => "invalid_request",
            ApiError::JobNotFound => "job_not_found",
            ApiError::MalformedBody(_) => "malformed_body",
            ApiError::QueueFull => "queue_full",
            ApiError::Internal(_) => "internal_error",
        }
    }

    /// Only decode failures carry a detail: the decoder's error code.
    pub fn to_wire(&self) -> ErrorResponse {
        ErrorResponse {
            error: self.code().to_string(),
            detail: match self {
                ApiError::DecodeFailed(code) => Some(code.clone()),
                _ => None,
            },
        }
    }
}

pub fn lookup_response(book: &BookInfo) -> LookupResponse {
    LookupResponse {
        barcode: book.barcode.to_string(),
        title: book.title.clone(),
        authors: book.authors.clone(),
        list_price_cents: book.list_price.price_cents,
        currency: book.currency().to_string(),
        cheapest: book.cheapest_offer().map(|o| CheapestOffer {
            seller: o.seller.clone(),
            price_cents: o.price_cents,
        }),
    }
}

/// Collaborators and tuning for a [`Service`].
pub struct Components {
    pub store: Arc<dyn ImageStore>,
    pub catalog: Arc<dyn Catalog>,
    pub notifier: Arc<dyn Notifier>,
    pub jobs: Arc<JobStore>,
    pub worker_count: usize,
    pub queue_capacity: usize,
    pub scanlines: usize,
}

/// Worker threads. They exit once every [`Service`] handle feeding them has
/// been dropped and the queue is drained.
pub struct WorkerPool {
    handles: Vec<JoinHandle<()>>,
}

impl WorkerPool {
    pub fn size(&self) -> usize {
        self.handles.len()
    }

    pub fn join(self) {
        for h in self.handles {
            let _ = h.join();
        }
    }
}

pub struct Service {
    pipeline: Arc<Pipeline>,
    queue: Sender<String>,
    metrics: Metrics,
}

impl Service {
    pub fn start(components: Components) -> (Arc<Service>, WorkerPool) {
        let (tx, rx) = crossbeam_channel::bounded::<String>(components.queue_capacity.max(1));
        let pipeline = Arc::new(Pipeline {
            store: components.store,
            catalog: components.catalog,
            notifier: components.notifier,
            jobs: components.jobs,
            scanlines: components.scanlines.max(1),
        });
        let handles = (0..components.worker_count.max(1))
            .map(|n| {
                let rx = rx.clone();
                let pipeline = pipeline.clone();
                std::thread::Builder::new()
                    .name(format!("pervascan-worker-{n}"))
                    .spawn(move || {
                        for job_id in rx {
                            pipeline.run_job(&job_id);
                        }
                    })
                    .expect("spawn worker thread")
            })
            .collect();
        let service = Arc::new(Service {
            pipeline,
            queue: tx,
            metrics: Metrics::default(),
        });
        (service, WorkerPool { handles })
    }

    pub fn jobs(&self) -> &JobStore {
        &self.pipeline.jobs
    }

    pub fn store(&self) -> &Arc<dyn ImageStore> {
        &self.pipeline.store
    }

    pub fn notifier(&self) -> &Arc<dyn Notifier> {
        &self.pipeline.notifier
    }

    /// Online path: decode the posted image and look the code up.
    pub fn handle_online(&self, image_bytes: &[u8]) -> Result<LookupResponse, ApiError> {
        let image = load_pgm(image_bytes).map_err(|_| ApiError::InvalidImage)?;
        let report = decode_image(&image, self.pipeline.scanlines)
            .map_err(|e| ApiError::DecodeFailed(e.code().to_string()))?;
        let book = self
            .pipeline
            .catalog
            .lookup(&report.code)
            .map_err(|e| match e {
                CatalogError::ProductNotFound => ApiError::ProductNotFound,
                other => ApiError::Internal(other.to_string()),
            })?;
        Ok(lookup_response(&book))
    }

    /// Offline path: validate, record the job as RECEIVED and queue it.
    /// Returns before any work is done.
    pub fn submit_job(&self, req: &SubmitJobRequest) -> Result<SubmitJobResponse, ApiError> {
        let photo_id: PhotoId = req
            .photo_id
            .parse()
            .map_err(|_| ApiError::InvalidRequest("photo_id".into()))?;
        let msisdn: Msisdn = req
            .msisdn
            .parse()
            .map_err(|_| ApiError::InvalidRequest("msisdn".into()))?;
        let job = self.jobs().create(photo_id, msisdn);
        match self.queue.try_send(job.job_id.clone()) {
            Ok(()) => Ok(SubmitJobResponse { job_id: job.job_id }),
            Err(TrySendError::Full(_)) => {
                self.jobs().discard(&job.job_id);
                Err(ApiError::QueueFull)
            }
            Err(TrySendError::Disconnected(_)) => {
                self.jobs().discard(&job.job_id);
                Err(ApiError::Internal("workers stopped".into()))
            }
        }
    }

    pub fn job_status(&self, job_id: &str) -> Result<JobView, ApiError> {
        self.jobs()
            .get(job_id)
            .map(|j| j.view())
            .ok_or(ApiError::JobNotFound)
    }

    pub fn metrics(&self) -> WireMetrics {
        self.metrics.snapshot()
    }

    pub fn record_online_bytes(&self, body_len: usize) {
        self.metrics.record_online(body_len);
    }

    pub fn record_offline_bytes(&self, body_len: usize) {
        self.metrics.record_offline(body_len);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::FixtureCatalog;
    use crate::imagekit::{render_ean13, save_pgm, GrayImage, RenderSpec};
    use crate::imagestore::MemoryStore;
    use crate::notifier::SmsInbox;
    use std::time::{Duration, Instant};

    const FIXTURE: &str = concat!(
        r#"{"barcode":"9780131103627","title":"The C Programming Language","authors":["Brian W. Kernighan","Dennis M. Ritchie"],"currency":"USD","list_price_cents":6799,"offers":[{"seller":"readmore","price_cents":1299},{"seller":"paperback-exchange","price_cents":950}]}"#,
        "\n"
    );

    fn service(workers: usize, capacity: usize) -> (Arc<Service>, WorkerPool, Arc<SmsInbox>) {
        let notifier = Arc::new(SmsInbox::in_memory());
        let (svc, pool) = Service::start(Components {
            store: Arc::new(MemoryStore::new(Some(1))),
            catalog: Arc::new(FixtureCatalog::parse(FIXTURE).unwrap()),
            notifier: notifier.clone(),
            jobs: Arc::new(JobStore::new(Some(2))),
            worker_count: workers,
            queue_capacity: capacity,
            scanlines: 7,
        });
        (svc, pool, notifier)
    }

    fn pgm(code: &str) -> Vec<u8> {
        save_pgm(&render_ean13(code, &RenderSpec::default()).unwrap())
    }

    fn wait_terminal(svc: &Service, job_id: &str) -> JobView {
        let deadline = Instant::now() + Duration::from_secs(5);
        loop {
            let v = svc.job_status(job_id).unwrap();
            if v.state.is_terminal() {
                return v;
            }
            assert!(Instant::now() < deadline, "job stuck in {:?}", v.state);
            std::thread::sleep(Duration::from_millis(5));
        }
    }

    #[test]
    fn online_examples() {
        let (svc, _pool, _) = service(1, 4);
        let resp = svc.handle_online(&pgm("9780131103627")).unwrap();
        assert_eq!(resp.title, "The C Programming Language");
        assert_eq!(
            resp.cheapest,
            Some(CheapestOffer { seller: "paperback-exchange".into(), price_cents: 950 })
        );
        let gray = save_pgm(&GrayImage::filled(120, 40, 128).unwrap());
        assert_eq!(svc.handle_online(&gray), Err(ApiError::DecodeFailed("no_contrast".into())));
        assert_eq!(svc.handle_online(&pgm("4006381333931")), Err(ApiError::ProductNotFound));
        assert_eq!(svc.handle_online(b"nope"), Err(ApiError::InvalidImage));
    }

    #[test]
    fn submit_validation() {
        let (svc, _pool, _) = service(1, 4);
        let bad = |photo: &str, msisdn: &str| {
            svc.submit_job(&SubmitJobRequest { photo_id: photo.into(), msisdn: msisdn.into() })
        };
        assert_eq!(bad("", "+15551234567").unwrap_err().code(), "invalid_request");
        assert_eq!(bad("abc", "phone").unwrap_err().code(), "invalid_request");
        assert!(svc.jobs().is_empty());
    }

    #[test]
    fn offline_success_and_failures() {
        let (svc, _pool, inbox) = service(2, 8);
        let to: Msisdn = "+15551234567".parse().unwrap();
        let photo = svc.store().upload(&pgm("9780131103627")).unwrap();
        let gray = svc
            .store()
            .upload(&save_pgm(&GrayImage::filled(50, 20, 90).unwrap()))
            .unwrap();

        let submit = |p: &str| {
            svc.submit_job(&SubmitJobRequest { photo_id: p.into(), msisdn: to.to_string() })
                .unwrap()
                .job_id
        };
        let ok = wait_terminal(&svc, &submit(photo.as_str()));
        assert_eq!(ok.state, JobState::Done);
        assert_eq!(ok.barcode.as_deref(), Some("9780131103627"));
        let tags = svc.store().get_tags(&photo).unwrap();
        assert!(tags.contains(&"barcode:9780131103627".to_string()));
        assert!(tags.contains(&"cheapest:paperback-exchange 950 USD".to_string()));

        let missing = wait_terminal(&svc, &submit("0000000000000000"));
        assert_eq!(missing.state, JobState::Failed);
        assert_eq!(missing.failed_stage, Some(JobState::Fetching));
        assert_eq!(missing.error_code.as_deref(), Some("photo_not_found"));

        let flat = wait_terminal(&svc, &submit(gray.as_str()));
        assert_eq!(flat.failed_stage, Some(JobState::Decoding));
        assert_eq!(flat.error_code.as_deref(), Some("no_contrast"));

        let bodies: Vec<String> = inbox.inbox(&to).unwrap().into_iter().map(|m| m.body).collect();
        assert_eq!(bodies.len(), 3);
        assert_eq!(bodies[0], format!("pervascan: info ready for photo {photo}"));
        assert_eq!(
            bodies[1],
            "pervascan: lookup failed for photo 0000000000000000 (photo_not_found)"
        );
        assert!(bodies[2].ends_with("(no_contrast)"));
    }

    #[test]
    fn product_not_found_offline() {
        let (svc, _pool, _) = service(1, 4);
        let photo = svc.store().upload(&pgm("4006381333931")).unwrap();
        let job = svc
            .submit_job(&SubmitJobRequest { photo_id: photo.to_string(), msisdn: "5551234567".into() })
            .unwrap();
        let v = wait_terminal(&svc, &job.job_id);
        assert_eq!(v.failed_stage, Some(JobState::LookingUp));
        assert_eq!(v.error_code.as_deref(), Some("product_not_found"));
        assert_eq!(v.barcode.as_deref(), Some("4006381333931"));
    }

    #[test]
    fn terminal_records_are_stable() {
        let (svc, _pool, _) = service(1, 4);
        let job = svc
            .submit_job(&SubmitJobRequest { photo_id: "missing".into(), msisdn: "5551234567".into() })
            .unwrap();
        let first = wait_terminal(&svc, &job.job_id);
        for _ in 0..5 {
            assert_eq!(svc.job_status(&job.job_id).unwrap(), first);
        }
        assert_eq!(svc.job_status("unknown"), Err(ApiError::JobNotFound));
    }

    /// Store whose fetch blocks until released, to hold a worker busy.
    struct GatedStore {
        inner: MemoryStore,
        gate: crossbeam_channel::Receiver<()>,
    }

    impl ImageStore for GatedStore {
        fn upload(&self, b: &[u8]) -> Result<PhotoId, crate::imagestore::StoreError> {
            self.inner.upload(b)
        }
        fn fetch(&self, id: &PhotoId) -> Result<Vec<u8>, crate::imagestore::StoreError> {
            let _ = self.gate.recv();
            self.inner.fetch(id)
        }
        fn add_tags(&self, id: &PhotoId, t: &[String]) -> Result<Vec<String>, crate::imagestore::StoreError> {
            self.inner.add_tags(id, t)
        }
        fn get_tags(&self, id: &PhotoId) -> Result<Vec<String>, crate::imagestore::StoreError> {
            self.inner.get_tags(id)
        }
    }

    #[test]
    fn full_queue_rejects_without_leaving_a_job() {
        let (release, gate) = crossbeam_channel::unbounded();
        let (svc, _pool) = Service::start(Components {
            store: Arc::new(GatedStore { inner: MemoryStore::new(None), gate }),
            catalog: Arc::new(FixtureCatalog::parse(FIXTURE).unwrap()),
            notifier: Arc::new(SmsInbox::in_memory()),
            jobs: Arc::new(JobStore::new(None)),
            worker_count: 1,
            queue_capacity: 1,
            scanlines: 7,
        });
        let req = SubmitJobRequest { photo_id: "p".into(), msisdn: "5551234567".into() };
        let first = svc.submit_job(&req).unwrap();
        // wait for the worker to take the first job off the queue
        let deadline = Instant::now() + Duration::from_secs(5);
        while svc.job_status(&first.job_id).unwrap().state == JobState::Received {
            assert!(Instant::now() < deadline);
            std::thread::sleep(Duration::from_millis(1));
        }
        let second = svc.submit_job(&req).unwrap();
        assert_eq!(svc.submit_job(&req), Err(ApiError::QueueFull));
        assert_eq!(ApiError::QueueFull.status(), 503);
        assert_eq!(svc.jobs().len(), 2);
        release.send(()).unwrap();
        release.send(()).unwrap();
        for id in [first.job_id, second.job_id] {
            assert_eq!(wait_terminal(&svc, &id).error_code.as_deref(), Some("photo_not_found"));
        }
    }

    #[test]
    fn workers_stop_when_service_is_dropped() {
        let (svc, pool, _) = service(3, 4);
        assert_eq!(pool.size(), 3);
        drop(svc);
        pool.join();
    }
}
