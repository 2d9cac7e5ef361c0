//! Public image store stand-in: upload PGM photos, fetch them by ID, and
//! read or append text tags.
//!
//! Three backends share the [`ImageStore`] trait: [`MemoryStore`],
//! [`DirStore`] (one directory, inspectable files) and [`HttpStore`], a
//! client for the mock server built by [`router`].

mod dir;
mod memory;
mod remote;
mod routes;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use dir::DirStore;
pub use memory::MemoryStore;
pub use remote::HttpStore;
pub use routes::router;

use crate::timefmt::Timestamp;

pub const MAX_TAG_CHARS: usize = 128;
pub const MAX_PHOTO_ID_CHARS: usize = 64;

/// Opaque photo identifier: 1 to 64 URL-safe characters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PhotoId(String);

impl PhotoId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

fn url_safe(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'-' | b'_' | b'.' | b'~')
}

impl FromStr for PhotoId {
    type Err = StoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        // "." and ".." would escape a directory store
        if s.is_empty()
            || s.len() > MAX_PHOTO_ID_CHARS
            || !s.bytes().all(url_safe)
            || s.bytes().all(|b| b == b'.')
        {
            return Err(StoreError::InvalidPhotoId);
        }
        Ok(Self(s.to_string()))
    }
}

impl TryFrom<String> for PhotoId {
    type Error = StoreError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<PhotoId> for String {
    fn from(id: PhotoId) -> Self {
        id.0
    }
}

impl fmt::Display for PhotoId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhotoRecord {
    pub id: PhotoId,
    pub image_bytes: std::sync::Arc<Vec<u8>>,
    pub tags: Vec<String>,
    pub uploaded_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StoreError {
    #[error("image is not a valid PGM: {0}")]
    InvalidImage(String),
    #[error("photo not found")]
    PhotoNotFound,
    #[error("invalid tag: {0}")]
    InvalidTag(String),
    #[error("invalid photo id")]
    InvalidPhotoId,
    #[error("store I/O: {0}")]
    Io(String),
    #[error("store unavailable: {0}")]
    Unavailable(String),
}

impl StoreError {
    pub fn code(&self) -> &'static str {
        match self {
            StoreError::InvalidImage(_) => "invalid_image",
            StoreError::PhotoNotFound => "photo_not_found",
            StoreError::InvalidTag(_) => "invalid_tag",
            StoreError::InvalidPhotoId => "invalid_photo_id",
            StoreError::Io(_) => "store_io",
            StoreError::Unavailable(_) => "store_unavailable",
        }
    }
}

pub trait ImageStore: Send + Sync {
    /// Stores a PGM file under a fresh ID with no tags.
    fn upload(&self, image_bytes: &[u8]) -> Result<PhotoId, StoreError>;

    /// Exact uploaded bytes.
    fn fetch(&self, id: &PhotoId) -> Result<Vec<u8>, StoreError>;

    /// Appends tags not already present, keeping order, and returns the
    /// resulting tag list.
    fn add_tags(&self, id: &PhotoId, tags: &[String]) -> Result<Vec<String>, StoreError>;

    fn get_tags(&self, id: &PhotoId) -> Result<Vec<String>, StoreError>;
}

pub fn check_tag(tag: &str) -> Result<(), StoreError> {
    if tag.is_empty() {
        return Err(StoreError::InvalidTag("empty tag".into()));
    }
    if tag.chars().count() > MAX_TAG_CHARS {
        return Err(StoreError::InvalidTag(format!("longer than {MAX_TAG_CHARS} characters")));
    }
    if tag.chars().any(char::is_control) {
        return Err(StoreError::InvalidTag("contains control characters".into()));
    }
    Ok(())
}

fn check_image(bytes: &[u8]) -> Result<(), StoreError> {
    crate::imagekit::load_pgm(bytes)
        .map(|_| ())
        .map_err(|e| StoreError::InvalidImage(e.to_string()))
}

/// Appends `new` to `existing`, skipping anything already present.
fn merge_tags(existing: &mut Vec<String>, new: &[String]) {
    for tag in new {
        if !existing.contains(tag) {
            existing.push(tag.clone());
        }
    }
}

#[cfg(test)]
pub(crate) mod contract {
    //! Behaviour every backend must share.
    use super::*;
    use crate::imagekit::{render_ean13, save_pgm, RenderSpec};

    pub fn sample_pgm() -> Vec<u8> {
        save_pgm(&render_ean13("9780131103627", &RenderSpec::with_module_px(1)).unwrap())
    }

    fn tags(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    pub fn run(store: &dyn ImageStore) {
        let bytes = sample_pgm();
        let id = store.upload(&bytes).unwrap();
        assert_eq!(store.fetch(&id).unwrap(), bytes);
        assert!(store.get_tags(&id).unwrap().is_empty());

        let other = store.upload(&bytes).unwrap();
        assert_ne!(id, other);

        assert_eq!(
            store.upload(b"garbage").unwrap_err().code(),
            "invalid_image"
        );

        let t = tags(&["title:C Programming Language"]);
        assert_eq!(store.add_tags(&id, &t).unwrap(), t);
        assert_eq!(store.add_tags(&id, &t).unwrap(), t);
        assert_eq!(
            store.add_tags(&id, &tags(&["b", "a", "b"])).unwrap(),
            tags(&["title:C Programming Language", "b", "a"])
        );
        assert_eq!(
            store.get_tags(&id).unwrap(),
            tags(&["title:C Programming Language", "b", "a"])
        );
        assert!(store.get_tags(&other).unwrap().is_empty());
        assert_eq!(store.fetch(&id).unwrap(), bytes);

        let unknown: PhotoId = "doesnotexist".parse().unwrap();
        assert_eq!(store.fetch(&unknown), Err(StoreError::PhotoNotFound));
        assert_eq!(store.get_tags(&unknown), Err(StoreError::PhotoNotFound));
        assert_eq!(store.add_tags(&unknown, &t), Err(StoreError::PhotoNotFound));

        for bad in ["", "bell\u{7}", &"x".repeat(129)] {
            assert_eq!(
                store.add_tags(&id, &tags(&["fine", bad])).unwrap_err().code(),
                "invalid_tag"
            );
        }
        // a rejected batch writes nothing
        assert!(!store.get_tags(&id).unwrap().contains(&"fine".to_string()));
    }
}
