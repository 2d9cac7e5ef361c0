//! SMS gateway stand-in. Messages are appended to a per-process list and,
//! when configured, to an append-only `inbox.jsonl` log that other
//! processes can replay.

use std::fmt;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use crate::timefmt::{self, Timestamp};

pub const MAX_BODY_CHARS: usize = 480;

/// Subscriber number: optional '+' then 7 to 15 digits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Msisdn(String);

impl Msisdn {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for Msisdn {
    type Err = NotifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s.strip_prefix('+').unwrap_or(s);
        if (7..=15).contains(&digits.len()) && digits.bytes().all(|b| b.is_ascii_digit()) {
            Ok(Self(s.to_string()))
        } else {
            Err(NotifyError::InvalidRecipient)
        }
    }
}

impl TryFrom<String> for Msisdn {
    type Error = NotifyError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<Msisdn> for String {
    fn from(m: Msisdn) -> Self {
        m.0
    }
}

impl fmt::Display for Msisdn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmsMessage {
    pub to: Msisdn,
    pub body: String,
    #[serde(with = "timefmt")]
    pub sent_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NotifyError {
    #[error("recipient is not a valid MSISDN")]
    InvalidRecipient,
    #[error("message body is empty")]
    EmptyBody,
    #[error("message body exceeds {MAX_BODY_CHARS} characters")]
    BodyTooLong,
    #[error("inbox log: {0}")]
    Io(String),
}

impl NotifyError {
    pub fn code(&self) -> &'static str {
        match self {
            NotifyError::InvalidRecipient => "invalid_recipient",
            NotifyError::EmptyBody => "empty_body",
            NotifyError::BodyTooLong => "body_too_long",
            NotifyError::Io(_) => "notify_failed",
        }
    }
}

pub trait Notifier: Send + Sync {
    fn send(&self, to: &Msisdn, body: &str) -> Result<SmsMessage, NotifyError>;

    /// Messages to `to`, in send order.
    fn inbox(&self, to: &Msisdn) -> Result<Vec<SmsMessage>, NotifyError>;
}

/// Recording SMS gateway.
#[derive(Debug, Default)]
pub struct SmsInbox {
    log_path: Option<PathBuf>,
    sent: Mutex<Vec<SmsMessage>>,
}

impl SmsInbox {
    /// Keeps messages in memory only.
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Appends every message to `path` as one JSON line. Existing content is
    /// kept and included in [`Notifier::inbox`] results.
    pub fn with_log(path: impl Into<PathBuf>) -> Self {
        Self {
            log_path: Some(path.into()),
            sent: Mutex::new(Vec::new()),
        }
    }

    pub fn log_path(&self) -> Option<&Path> {
        self.log_path.as_deref()
    }
}

/// Replays an inbox log. A missing file is an empty inbox; an unterminated
/// last line (a write in progress) is ignored.
pub fn read_inbox_log(path: &Path, to: &Msisdn) -> Result<Vec<SmsMessage>, NotifyError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(NotifyError::Io(format!("{}: {e}", path.display()))),
    };
    let complete = match text.rfind('\n') {
        Some(end) => &text[..end],
        None => "",
    };
    let mut out = Vec::new();
    for (i, line) in complete.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let msg: SmsMessage = serde_json::from_str(line)
            .map_err(|e| NotifyError::Io(format!("{} line {}: {e}", path.display(), i + 1)))?;
        if &msg.to == to {
            out.push(msg);
        }
    }
    Ok(out)
}

impl Notifier for SmsInbox {
    fn send(&self, to: &Msisdn, body: &str) -> Result<SmsMessage, NotifyError> {
        if body.is_empty() {
            return Err(NotifyError::EmptyBody);
        }
        if body.chars().count() > MAX_BODY_CHARS {
            return Err(NotifyError::BodyTooLong);
        }
        let msg = SmsMessage {
            to: to.clone(),
            body: body.to_string(),
            sent_at: timefmt::now(),
        };
        let mut sent = self.sent.lock();
        if let Some(path) = &self.log_path {
            let mut line = serde_json::to_string(&msg).expect("message serializes");
            line.push('\n');
            let mut file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| NotifyError::Io(format!("{}: {e}", path.display())))?;
            file.write_all(line.as_bytes())
                .map_err(|e| NotifyError::Io(format!("{}: {e}", path.display())))?;
        }
        sent.push(msg.clone());
        Ok(msg)
    }

    fn inbox(&self, to: &Msisdn) -> Result<Vec<SmsMessage>, NotifyError> {
        match &self.log_path {
            Some(path) => {
                // hold the lock so a concurrent append is not read half-done
                let _guard = self.sent.lock();
                read_inbox_log(path, to)
            }
            None => Ok(self.sent.lock().iter().filter(|m| &m.to == to).cloned().collect()),
        }
    }
}
