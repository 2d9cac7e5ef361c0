use std::collections::HashMap;
use std::sync::Arc;

use parking_lot::RwLock;

use super::{check_image, check_tag, merge_tags, ImageStore, PhotoId, PhotoRecord, StoreError};
use crate::rng::IdSource;
use crate::timefmt;

/// Process-local store.
#[derive(Debug)]
pub struct MemoryStore {
    photos: RwLock<HashMap<PhotoId, PhotoRecord>>,
    ids: IdSource,
}

impl MemoryStore {
    pub fn new(seed: Option<u64>) -> Self {
        Self {
            photos: RwLock::new(HashMap::new()),
            ids: IdSource::new(seed),
        }
    }

    pub fn record(&self, id: &PhotoId) -> Option<PhotoRecord> {
        self.photos.read().get(id).cloned()
    }

    pub fn len(&self) -> usize {
        self.photos.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Default for MemoryStore {
    fn default() -> Self {
        Self::new(None)
    }
}

impl ImageStore for MemoryStore {
    fn upload(&self, image_bytes: &[u8]) -> Result<PhotoId, StoreError> {
        check_image(image_bytes)?;
        let mut photos = self.photos.write();
        let id = loop {
            let candidate = PhotoId(self.ids.next_id());
            if !photos.contains_key(&candidate) {
                break candidate;
            }
        };
        photos.insert(
            id.clone(),
            PhotoRecord {
                id: id.clone(),
                image_bytes: Arc::new(image_bytes.to_vec()),
                tags: Vec::new(),
                uploaded_at: timefmt::now(),
            },
        );
        Ok(id)
    }

    fn fetch(&self, id: &PhotoId) -> Result<Vec<u8>, StoreError> {
        self.photos
            .read()
            .get(id)
            .map(|r| r.image_bytes.as_ref().clone())
            .ok_or(StoreError::PhotoNotFound)
    }

    fn add_tags(&self, id: &PhotoId, tags: &[String]) -> Result<Vec<String>, StoreError> {
        let mut photos = self.photos.write();
        let record = photos.get_mut(id).ok_or(StoreError::PhotoNotFound)?;
        for tag in tags {
            check_tag(tag)?;
        }
        merge_tags(&mut record.tags, tags);
        Ok(record.tags.clone())
    }

    fn get_tags(&self, id: &PhotoId) -> Result<Vec<String>, StoreError> {
        self.photos
            .read()
            .get(id)
            .map(|r| r.tags.clone())
            .ok_or(StoreError::PhotoNotFound)
    }
}
