use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use super::{ImageStore, PhotoId, StoreError};

pub const PGM_CONTENT_TYPE: &str = "image/x-portable-graymap";

#[derive(Debug, Serialize, Deserialize)]
pub struct UploadResponse {
    pub photo_id: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TagList {
    pub tags: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

fn error_response(err: &StoreError) -> Response {
    let status = match err {
        StoreError::InvalidImage(_) | StoreError::InvalidTag(_) => StatusCode::BAD_REQUEST,
        StoreError::PhotoNotFound | StoreError::InvalidPhotoId => StatusCode::NOT_FOUND,
        StoreError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        StoreError::Unavailable(_) => StatusCode::BAD_GATEWAY,
    };
    // an unparseable id names no photo
    let code = match err {
        StoreError::InvalidPhotoId => "photo_not_found",
        other => other.code(),
    };
    (status, Json(ErrorBody { error: code.into() })).into_response()
}

type Shared = Arc<dyn ImageStore>;

async fn blocking<T, F>(f: F) -> Result<T, StoreError>
where
    F: FnOnce() -> Result<T, StoreError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| StoreError::Io(e.to_string()))?
}

async fn upload(State(store): State<Shared>, body: Bytes) -> Response {
    match blocking(move || store.upload(&body)).await {
        Ok(id) => (
            StatusCode::CREATED,
            Json(UploadResponse {
                photo_id: id.to_string(),
            }),
        )
            .into_response(),
        Err(e) => error_response(&e),
    }
}

async fn fetch(State(store): State<Shared>, Path(id): Path<String>) -> Response {
    let result = blocking(move || {
        let id: PhotoId = id.parse()?;
        store.fetch(&id)
    })
    .await;
    match result {
        Ok(bytes) => ([(header::CONTENT_TYPE, PGM_CONTENT_TYPE)], bytes).into_response(),
        Err(e) => error_response(&e),
    }
}

async fn add_tags(State(store): State<Shared>, Path(id): Path<String>, body: Bytes) -> Response {
    let request: TagList = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(_) => {
            return (
                StatusCode::BAD_REQUEST,
                Json(ErrorBody {
                    error: "invalid_request".into(),
                }),
            )
                .into_response()
        }
    };
    let result = blocking(move || {
        let id: PhotoId = id.parse()?;
        store.add_tags(&id, &request.tags)
    })
    .await;
    match result {
        Ok(tags) => Json(TagList { tags }).into_response(),
        Err(e) => error_response(&e),
    }
}

async fn get_tags(State(store): State<Shared>, Path(id): Path<String>) -> Response {
    let result = blocking(move || {
        let id: PhotoId = id.parse()?;
        store.get_tags(&id)
    })
    .await;
    match result {
        Ok(tags) => Json(TagList { tags }).into_response(),
        Err(e) => error_response(&e),
    }
}

/// HTTP/JSON front for any store backend.
pub fn router(store: Arc<dyn ImageStore>) -> Router {
    Router::new()
        .route("/store/photos", post(upload))
        .route("/store/photos/{id}", get(fetch))
        .route("/store/photos/{id}/tags", get(get_tags).post(add_tags))
        .layer(DefaultBodyLimit::max(64 * 1024 * 1024))
        .with_state(store)
}
