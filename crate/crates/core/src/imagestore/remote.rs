use std::time::Duration;

use reqwest::blocking::{Client, Response};
use reqwest::StatusCode;

use super::routes::{ErrorBody, TagList, UploadResponse, PGM_CONTENT_TYPE};
use super::{ImageStore, PhotoId, StoreError};

/// Client for a store served by [`super::router`]. Blocking; do not call
/// from inside an async runtime.
#[derive(Debug, Clone)]
pub struct HttpStore {
    base_url: String,
    client: Client,
}

impl HttpStore {
    pub fn new(base_url: impl Into<String>) -> Result<Self, StoreError> {
        let client = Client::builder()
            .timeout(Duration::from_secs(30))
            .build()
            .map_err(|e| StoreError::Unavailable(e.to_string()))?;
        Ok(Self {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            client,
        })
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base_url)
    }
}

fn unavailable(e: reqwest::Error) -> StoreError {
    StoreError::Unavailable(e.to_string())
}

/// Maps a non-success response back onto the store error it encodes.
fn failure(resp: Response) -> StoreError {
    let status = resp.status();
    let code = resp
        .json::<ErrorBody>()
        .map(|b| b.error)
        .unwrap_or_default();
    match (status, code.as_str()) {
        (StatusCode::NOT_FOUND, _) => StoreError::PhotoNotFound,
        (_, "invalid_image") => StoreError::InvalidImage("rejected by store".into()),
        (_, "invalid_tag") => StoreError::InvalidTag("rejected by store".into()),
        _ => StoreError::Unavailable(format!("store answered {status} {code}")),
    }
}

fn tags_from(resp: Response) -> Result<Vec<String>, StoreError> {
    if !resp.status().is_success() {
        return Err(failure(resp));
    }
    Ok(resp.json::<TagList>().map_err(unavailable)?.tags)
}

impl ImageStore for HttpStore {
    fn upload(&self, image_bytes: &[u8]) -> Result<PhotoId, StoreError> {
        let resp = self
            .client
            .post(self.url("/store/photos"))
            .header(reqwest::header::CONTENT_TYPE, PGM_CONTENT_TYPE)
            .body(image_bytes.to_vec())
            .send()
            .map_err(unavailable)?;
        if resp.status() != StatusCode::CREATED {
            return Err(failure(resp));
        }
        let body: UploadResponse = resp.json().map_err(unavailable)?;
        body.photo_id
            .parse()
            .map_err(|_| StoreError::Unavailable("store returned a malformed photo id".into()))
    }

    fn fetch(&self, id: &PhotoId) -> Result<Vec<u8>, StoreError> {
        let resp = self
            .client
            .get(self.url(&format!("/store/photos/{id}")))
            .send()
            .map_err(unavailable)?;
        if !resp.status().is_success() {
            return Err(failure(resp));
        }
        Ok(resp.bytes().map_err(unavailable)?.to_vec())
    }

    fn add_tags(&self, id: &PhotoId, tags: &[String]) -> Result<Vec<String>, StoreError> {
        let body = serde_json::to_vec(&TagList {
            tags: tags.to_vec(),
        })
        .expect("strings serialize");
        let resp = self
            .client
            .post(self.url(&format!("/store/photos/{id}/tags")))
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .body(body)
            .send()
            .map_err(unavailable)?;
        tags_from(resp)
    }

    fn get_tags(&self, id: &PhotoId) -> Result<Vec<String>, StoreError> {
        let resp = self
            .client
            .get(self.url(&format!("/store/photos/{id}/tags")))
            .send()
            .map_err(unavailable)?;
        tags_from(resp)
    }
}
