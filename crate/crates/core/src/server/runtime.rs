use std::net::{SocketAddr, TcpListener};
use std::path::PathBuf;
use std::sync::Arc;
use std::thread::JoinHandle;

use axum::Router;
use tokio::sync::oneshot;

use super::{http, Components, ConfigError, JobStore, Service, ServerConfig, WorkerPool};
use crate::catalog::{Catalog, CatalogError, FixtureCatalog};
use crate::imagestore::{self, DirStore, HttpStore, ImageStore, MemoryStore, StoreError};
use crate::notifier::SmsInbox;

#[derive(Debug, thiserror::Error)]
pub enum SetupError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("catalog: {0}")]
    Catalog(#[from] CatalogError),
    #[error("image store: {0}")]
    Store(#[from] StoreError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl SetupError {
    pub fn code(&self) -> &'static str {
        match self {
            SetupError::Config(_) => "invalid_config",
            SetupError::Catalog(e) => e.code(),
            SetupError::Store(e) => e.code(),
            SetupError::Io { .. } => "io_error",
        }
    }
}

/// A ready-to-serve application.
pub struct AppParts {
    pub service: Arc<Service>,
    pub workers: WorkerPool,
    pub router: Router,
}

/// Wires the collaborators named by `config`. With neither `store_dir` nor
/// `store_url` set, an in-memory store is used and its `/store` routes are
/// mounted on the same router.
pub fn build_app(config: &ServerConfig) -> Result<AppParts, SetupError> {
    config.check()?;
    let catalog: Arc<dyn Catalog> = Arc::new(FixtureCatalog::load(&config.catalog)?);
    let (store, mount_store): (Arc<dyn ImageStore>, bool) = match (&config.store_dir, &config.store_url) {
        (Some(dir), _) => (Arc::new(DirStore::open(dir, config.seed)?), false),
        (None, Some(url)) => (Arc::new(HttpStore::new(url.clone())?), false),
        (None, None) => (Arc::new(MemoryStore::new(config.seed)), true),
    };
    let jobs = match &config.journal {
        Some(path) => JobStore::with_journal(config.seed.map(|s| s ^ 0x5a5a), path).map_err(|source| {
            SetupError::Io {
                path: path.clone(),
                source,
            }
        })?,
        None => JobStore::new(config.seed.map(|s| s ^ 0x5a5a)),
    };
    let (service, workers) = Service::start(Components {
        store: store.clone(),
        catalog,
        notifier: Arc::new(SmsInbox::with_log(&config.inbox)),
        jobs: Arc::new(jobs),
        worker_count: config.worker_count,
        queue_capacity: config.queue_capacity,
        scanlines: config.scanlines,
    });
    let mut router = http::router(service.clone());
    if mount_store {
        router = router.merge(imagestore::router(store));
    }
    Ok(AppParts {
        service,
        workers,
        router,
    })
}

/// An HTTP server on its own runtime thread. Dropping it shuts the server
/// down gracefully.
pub struct RunningServer {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<std::io::Result<()>>>,
}

impl RunningServer {
    /// Binds `addr` (port 0 picks a free port) before returning, so the
    /// server accepts connections as soon as this succeeds.
    pub fn spawn(router: Router, addr: &str) -> std::io::Result<Self> {
        let listener = TcpListener::bind(addr)?;
        listener.set_nonblocking(true)?;
        let local = listener.local_addr()?;
        let (tx, rx) = oneshot::channel::<()>();
        let thread = std::thread::Builder::new()
            .name("pervascan-http".into())
            .spawn(move || {
                let rt = tokio::runtime::Builder::new_multi_thread()
                    .worker_threads(4)
                    .enable_all()
                    .build()?;
                rt.block_on(async move {
                    let listener = tokio::net::TcpListener::from_std(listener)?;
                    axum::serve(listener, router)
                        .with_graceful_shutdown(async {
                            let _ = rx.await;
                        })
                        .await
                })
            })?;
        Ok(Self {
            addr: local,
            shutdown: Some(tx),
            thread: Some(thread),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Blocks until the server stops on its own (a fatal serve error).
    pub fn wait(mut self) -> std::io::Result<()> {
        match self.thread.take().map(|t| t.join()) {
            Some(Ok(r)) => r,
            Some(Err(_)) => Err(std::io::Error::other("server thread panicked")),
            None => Ok(()),
        }
    }
}

impl Drop for RunningServer {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}
