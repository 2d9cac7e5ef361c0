//! HTTP front of the computation server: REST/JSON under `/v1/rest`, the XML
//! envelope at `/v1/soap`, and counters at `/v1/metrics`.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response as HttpResponse};
use axum::routing::{get, post};
use axum::{Json, Router};

use super::wire::{self, ErrorResponse, Request, Response, SubmitJobRequest};
use super::{ApiError, Service};

pub const MAX_BODY_BYTES: usize = 64 * 1024 * 1024;
pub const XML_CONTENT_TYPE: &str = "application/xml";

type Shared = Arc<Service>;

fn status_of(err: &ApiError) -> StatusCode {
    StatusCode::from_u16(err.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR)
}

fn json_error(err: &ApiError) -> HttpResponse {
    if let ApiError::Internal(msg) = err {
        log::error!("internal error: {msg}");
    }
    (status_of(err), Json(err.to_wire())).into_response()
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
}

async fn rest_lookup(State(svc): State<Shared>, body: Bytes) -> HttpResponse {
    svc.record_online_bytes(body.len());
    match blocking(move || svc.handle_online(&body)).await {
        Ok(resp) => Json(resp).into_response(),
        Err(e) => json_error(&e),
    }
}

async fn rest_submit(State(svc): State<Shared>, body: Bytes) -> HttpResponse {
    svc.record_offline_bytes(body.len());
    let req: SubmitJobRequest = match wire::json::decode(&body) {
        Ok(r) => r,
        Err(e) => return json_error(&ApiError::InvalidRequest(e.0)),
    };
    match svc.submit_job(&req) {
        Ok(resp) => (StatusCode::ACCEPTED, Json(resp)).into_response(),
        Err(e) => json_error(&e),
    }
}

async fn rest_job_status(State(svc): State<Shared>, Path(id): Path<String>) -> HttpResponse {
    match svc.job_status(&id) {
        Ok(view) => Json(view).into_response(),
        Err(e) => json_error(&e),
    }
}

async fn metrics(State(svc): State<Shared>) -> HttpResponse {
    Json(svc.metrics()).into_response()
}

fn xml_reply(status: StatusCode, resp: &Response) -> HttpResponse {
    (
        status,
        [(header::CONTENT_TYPE, XML_CONTENT_TYPE)],
        wire::xml::encode_response(resp),
    )
        .into_response()
}

fn xml_error(err: &ApiError) -> HttpResponse {
    if let ApiError::Internal(msg) = err {
        log::error!("internal error: {msg}");
    }
    xml_reply(status_of(err), &Response::Error(err.to_wire()))
}

async fn soap(State(svc): State<Shared>, body: Bytes) -> HttpResponse {
    let req = match wire::xml::decode_request(&body) {
        Ok(r) => r,
        Err(e) => {
            return xml_error(&ApiError::MalformedBody(e.0));
        }
    };
    match req {
        Request::Lookup(lookup) => {
            svc.record_online_bytes(body.len());
            match blocking(move || svc.handle_online(&lookup.image)).await {
                Ok(resp) => xml_reply(StatusCode::OK, &Response::Lookup(resp)),
                Err(e) => xml_error(&e),
            }
        }
        Request::SubmitJob(submit) => {
            svc.record_offline_bytes(body.len());
            match svc.submit_job(&submit) {
                Ok(resp) => xml_reply(StatusCode::ACCEPTED, &Response::SubmitJob(resp)),
                Err(e) => xml_error(&e),
            }
        }
        Request::JobStatus(status) => match svc.job_status(&status.job_id) {
            Ok(view) => xml_reply(StatusCode::OK, &Response::JobStatus(view)),
            Err(e) => xml_error(&e),
        },
    }
}

async fn not_found() -> HttpResponse {
    (
        StatusCode::NOT_FOUND,
        Json(ErrorResponse {
            error: "not_found".into(),
            detail: None,
        }),
    )
        .into_response()
}

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/v1/rest/lookup", post(rest_lookup))
        .route("/v1/rest/jobs", post(rest_submit))
        .route("/v1/rest/jobs/{id}", get(rest_job_status))
        .route("/v1/metrics", get(metrics))
        .route("/v1/soap", post(soap))
        .fallback(not_found)
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .with_state(service)
}
