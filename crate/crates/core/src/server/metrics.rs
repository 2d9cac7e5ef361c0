use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

/// Request counters at the computation server.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WireMetrics {
    pub online_requests: u64,
    pub online_bytes_in: u64,
    pub offline_requests: u64,
    pub offline_bytes_in: u64,
}

#[derive(Debug, Default)]
pub struct Metrics {
    online_requests: AtomicU64,
    online_bytes_in: AtomicU64,
    offline_requests: AtomicU64,
    offline_bytes_in: AtomicU64,
}

impl Metrics {
    pub fn record_online(&self, body_len: usize) {
        self.online_requests.fetch_add(1, Ordering::Relaxed);
        self.online_bytes_in.fetch_add(body_len as u64, Ordering::Relaxed);
    }

    pub fn record_offline(&self, body_len: usize) {
        self.offline_requests.fetch_add(1, Ordering::Relaxed);
        self.offline_bytes_in.fetch_add(body_len as u64, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> WireMetrics {
        WireMetrics {
            online_requests: self.online_requests.load(Ordering::Relaxed),
            online_bytes_in: self.online_bytes_in.load(Ordering::Relaxed),
            offline_requests: self.offline_requests.load(Ordering::Relaxed),
            offline_bytes_in: self.offline_bytes_in.load(Ordering::Relaxed),
        }
    }
}
