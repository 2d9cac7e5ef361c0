#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use pervascan::imagekit::{render_ean13, save_pgm, RenderSpec};
use pervascan::server::jobs::JobState;
use pervascan::server::wire::JobView;
use pervascan::server::{build_app, RunningServer, ServerConfig, Service, WorkerPool};

pub const BOOK: &str = "9780131103627";
pub const BOOK_TITLE: &str = "The C Programming Language";
/// Decodable and checksum-valid, but absent from the fixture catalog.
pub const UNKNOWN_BOOK: &str = "4006381333931";
pub const MSISDN: &str = "+15551234567";

pub fn fixture_catalog() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/catalog.jsonl")
}

pub fn rendered_pgm(code: &str) -> Vec<u8> {
    save_pgm(&render_ean13(code, &RenderSpec::default()).unwrap())
}

/// In-process server on a free port, with the store mounted alongside.
pub struct TestServer {
    pub server: Option<RunningServer>,
    pub service: Arc<Service>,
    pub workers: Option<WorkerPool>,
    pub url: String,
    pub inbox: PathBuf,
    pub dir: tempfile::TempDir,
}

impl TestServer {
    pub fn start() -> Self {
        Self::start_with(|_| {})
    }

    pub fn start_with(tweak: impl FnOnce(&mut ServerConfig)) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let mut config = ServerConfig {
            listen: "127.0.0.1:0".into(),
            catalog: fixture_catalog(),
            inbox: dir.path().join("inbox.jsonl"),
            seed: Some(11),
            ..ServerConfig::default()
        };
        tweak(&mut config);
        let app = build_app(&config).unwrap();
        let server = RunningServer::spawn(app.router, &config.listen).unwrap();
        Self {
            url: server.url(),
            server: Some(server),
            service: app.service,
            workers: Some(app.workers),
            inbox: config.inbox.clone(),
            dir,
        }
    }

    pub fn wait_terminal(&self, job_id: &str, timeout: Duration) -> JobView {
        let deadline = Instant::now() + timeout;
        loop {
            let v = self.service.job_status(job_id).unwrap();
            if v.state.is_terminal() {
                return v;
            }
            assert!(Instant::now() < deadline, "job {job_id} stuck in {:?}", v.state);
            std::thread::sleep(Duration::from_millis(2));
        }
    }
}

impl Drop for TestServer {
    fn drop(&mut self) {
        self.server.take();
    }
}

/// Non-decreasing in the state order, terminal last, at most one terminal.
pub fn history_is_monotone(history: &[JobState]) -> bool {
    let ordered = history.windows(2).all(|w| w[0] < w[1]);
    let terminals = history.iter().filter(|s| s.is_terminal()).count();
    ordered && terminals == 1 && history.last().is_some_and(|s| s.is_terminal())
}
