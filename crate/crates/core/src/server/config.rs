use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::barcode::DEFAULT_SCANLINES;

/// Computation server settings. Read from a JSON file, then overridden by
/// `PERVASCAN_*` environment variables, then by command-line flags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub listen: String,
    pub catalog: PathBuf,
    /// Directory-backed image store. Takes precedence over `store_url`.
    pub store_dir: Option<PathBuf>,
    /// Remote image store speaking the store REST interface.
    pub store_url: Option<String>,
    pub inbox: PathBuf,
    pub journal: Option<PathBuf>,
    pub worker_count: usize,
    pub queue_capacity: usize,
    pub seed: Option<u64>,
    pub scanlines: usize,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            listen: "127.0.0.1:8080".into(),
            catalog: PathBuf::from("catalog.jsonl"),
            store_dir: None,
            store_url: None,
            inbox: PathBuf::from("inbox.jsonl"),
            journal: None,
            worker_count: 2,
            queue_capacity: 64,
            seed: None,
            scanlines: DEFAULT_SCANLINES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("configuration: {0}")]
pub struct ConfigError(pub String);

fn parse_env<T: std::str::FromStr>(name: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError(format!("{name}={value:?} is not valid")))
}

impl ServerConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    /// Applies overrides from `vars` (normally `std::env::vars()`).
    pub fn apply_env(
        &mut self,
        vars: impl IntoIterator<Item = (String, String)>,
    ) -> Result<(), ConfigError> {
        for (name, value) in vars {
            match name.as_str() {
                "PERVASCAN_LISTEN" => self.listen = value,
                "PERVASCAN_CATALOG" => self.catalog = value.into(),
                "PERVASCAN_STORE_DIR" => self.store_dir = Some(value.into()),
                "PERVASCAN_STORE_URL" => self.store_url = Some(value),
                "PERVASCAN_INBOX" => self.inbox = value.into(),
                "PERVASCAN_JOURNAL" => self.journal = Some(value.into()),
                "PERVASCAN_WORKERS" => self.worker_count = parse_env(&name, &value)?,
                "PERVASCAN_QUEUE_CAPACITY" => self.queue_capacity = parse_env(&name, &value)?,
                "PERVASCAN_SEED" => self.seed = Some(parse_env(&name, &value)?),
                "PERVASCAN_SCANLINES" => self.scanlines = parse_env(&name, &value)?,
                _ => {}
            }
        }
        Ok(())
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        if self.worker_count == 0 {
            return Err(ConfigError("worker_count must be at least 1".into()));
        }
        if self.queue_capacity == 0 {
            return Err(ConfigError("queue_capacity must be at least 1".into()));
        }
        if self.scanlines == 0 {
            return Err(ConfigError("scanlines must be at least 1".into()));
        }
        Ok(())
    }
}
