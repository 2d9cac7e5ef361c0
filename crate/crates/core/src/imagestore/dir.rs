use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use parking_lot::Mutex;

use super::{check_image, check_tag, merge_tags, ImageStore, PhotoId, StoreError};
use crate::rng::IdSource;

/// Store rooted at one directory: `<id>.pgm` holds the photo and
/// `<id>.tags.json` a JSON array of its tags.
#[derive(Debug)]
pub struct DirStore {
    root: PathBuf,
    ids: IdSource,
    tag_locks: Mutex<HashMap<PhotoId, Arc<Mutex<()>>>>,
}

fn io_err(path: &Path, e: std::io::Error) -> StoreError {
    StoreError::Io(format!("{}: {e}", path.display()))
}

impl DirStore {
    /// Opens (creating if needed) a store directory.
    pub fn open(root: impl Into<PathBuf>, seed: Option<u64>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| io_err(&root, e))?;
        Ok(Self {
            root,
            ids: IdSource::new(seed),
            tag_locks: Mutex::new(HashMap::new()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn image_path(&self, id: &PhotoId) -> PathBuf {
        self.root.join(format!("{id}.pgm"))
    }

    fn tags_path(&self, id: &PhotoId) -> PathBuf {
        self.root.join(format!("{id}.tags.json"))
    }

    fn tag_lock(&self, id: &PhotoId) -> Arc<Mutex<()>> {
        self.tag_locks.lock().entry(id.clone()).or_default().clone()
    }

    fn read_tags(&self, id: &PhotoId) -> Result<Vec<String>, StoreError> {
        if !self.image_path(id).exists() {
            return Err(StoreError::PhotoNotFound);
        }
        let path = self.tags_path(id);
        match fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text)
                .map_err(|e| StoreError::Io(format!("{}: {e}", path.display()))),
            Err(e) if e.kind() == ErrorKind::NotFound => Ok(Vec::new()),
            Err(e) => Err(io_err(&path, e)),
        }
    }

    /// Replaces the tag file via a temporary file and rename.
    fn write_tags(&self, id: &PhotoId, tags: &[String]) -> Result<(), StoreError> {
        let path = self.tags_path(id);
        let tmp = self.root.join(format!(".{id}.tags.json.tmp"));
        let json = serde_json::to_vec(tags).expect("strings serialize");
        fs::write(&tmp, json).map_err(|e| io_err(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| io_err(&path, e))
    }
}

impl ImageStore for DirStore {
    fn upload(&self, image_bytes: &[u8]) -> Result<PhotoId, StoreError> {
        check_image(image_bytes)?;
        loop {
            let id = PhotoId(self.ids.next_id());
            let path = self.image_path(&id);
            let mut file = match OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(f) => f,
                Err(e) if e.kind() == ErrorKind::AlreadyExists => continue,
                Err(e) => return Err(io_err(&path, e)),
            };
            file.write_all(image_bytes).map_err(|e| io_err(&path, e))?;
            self.write_tags(&id, &[])?;
            return Ok(id);
        }
    }

    fn fetch(&self, id: &PhotoId) -> Result<Vec<u8>, StoreError> {
        let path = self.image_path(id);
        fs::read(&path).map_err(|e| match e.kind() {
            ErrorKind::NotFound => StoreError::PhotoNotFound,
            _ => io_err(&path, e),
        })
    }

    fn add_tags(&self, id: &PhotoId, tags: &[String]) -> Result<Vec<String>, StoreError> {
        let lock = self.tag_lock(id);
        let _guard = lock.lock();
        let mut current = self.read_tags(id)?;
        for tag in tags {
            check_tag(tag)?;
        }
        merge_tags(&mut current, tags);
        self.write_tags(id, &current)?;
        Ok(current)
    }

    fn get_tags(&self, id: &PhotoId) -> Result<Vec<String>, StoreError> {
        self.read_tags(id)
    }
}
