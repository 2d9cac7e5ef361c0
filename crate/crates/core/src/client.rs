//! Blocking client for the computation server, in either wire encoding.
//! Do not call from inside an async runtime.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use reqwest::blocking::Client;

use crate::server::wire::{
    self, ErrorResponse, JobStatusRequest, JobView, LookupRequest, LookupResponse, Request,
    Response, SubmitJobRequest, SubmitJobResponse,
};
use crate::server::WireMetrics;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Encoding {
    #[default]
    Rest,
    Soap,
}

impl FromStr for Encoding {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rest" => Ok(Encoding::Rest),
            "soap" => Ok(Encoding::Soap),
            other => Err(format!("unknown encoding {other:?} (expected rest or soap)")),
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Encoding::Rest => "rest",
            Encoding::Soap => "soap",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClientError {
    #[error("server unreachable: {0}")]
    Transport(String),
    /// The server answered with an error record.
    #[error("server error {status}: {}", .error.error)]
    Server { status: u16, error: ErrorResponse },
    #[error("unexpected reply: {0}")]
    Malformed(String),
}

impl ClientError {
    /// Server error code, if the server sent one.
    pub fn server_code(&self) -> Option<&str> {
        match self {
            ClientError::Server { error, .. } => Some(&error.error),
            _ => None,
        }
    }
}

fn transport(e: reqwest::Error) -> ClientError {
    ClientError::Transport(e.to_string())
}

#[derive(Debug, Clone)]
pub struct ComputeClient {
    base_url: String,
    encoding: Encoding,
    client: Client,
}

impl ComputeClient {
    pub fn new(base_url: &str, encoding: Encoding) -> Result<Self, ClientError> {
        let client = Client::builder()
            .timeout(Duration::from_secs(30))
            .build()
            .map_err(transport)?;
        Ok(Self {
            base_url: base_url.trim_end_matches('/').to_string(),
            encoding,
            client,
        })
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base_url)
    }

    fn rest<T: for<'de> serde::Deserialize<'de>>(
        &self,
        req: reqwest::blocking::RequestBuilder,
    ) -> Result<T, ClientError> {
        let resp = req.send().map_err(transport)?;
        let status = resp.status();
        let body = resp.bytes().map_err(transport)?;
        match wire::json::decode_reply::<T>(status.is_success(), &body) {
            Ok(Ok(v)) => Ok(v),
            Ok(Err(error)) => Err(ClientError::Server { status: status.as_u16(), error }),
            Err(e) => Err(ClientError::Malformed(format!("{status}: {}", e.0))),
        }
    }

    fn soap(&self, req: &Request) -> Result<Response, ClientError> {
        let resp = self
            .client
            .post(self.url("/v1/soap"))
            .header(reqwest::header::CONTENT_TYPE, "application/xml")
            .body(wire::xml::encode_request(req))
            .send()
            .map_err(transport)?;
        let status = resp.status();
        let body = resp.bytes().map_err(transport)?;
        match wire::xml::decode_response(&body) {
            Ok(Response::Error(error)) => Err(ClientError::Server { status: status.as_u16(), error }),
            Ok(r) if status.is_success() => Ok(r),
            Ok(_) => Err(ClientError::Malformed(format!("{status} with a success record"))),
            Err(e) => Err(ClientError::Malformed(format!("{status}: {}", e.0))),
        }
    }

    fn unexpected(resp: Response) -> ClientError {
        ClientError::Malformed(format!("unexpected record {resp:?}"))
    }

    /// Online path: sends the whole image.
    pub fn lookup(&self, image: &[u8]) -> Result<LookupResponse, ClientError> {
        match self.encoding {
            Encoding::Rest => self.rest(
                self.client
                    .post(self.url("/v1/rest/lookup"))
                    .header(reqwest::header::CONTENT_TYPE, "image/x-portable-graymap")
                    .body(image.to_vec()),
            ),
            Encoding::Soap => match self.soap(&Request::Lookup(LookupRequest { image: image.to_vec() }))? {
                Response::Lookup(r) => Ok(r),
                other => Err(Self::unexpected(other)),
            },
        }
    }

    /// Offline path: sends only the photo ID and the SMS recipient.
    pub fn submit_job(&self, photo_id: &str, msisdn: &str) -> Result<SubmitJobResponse, ClientError> {
        let req = SubmitJobRequest { photo_id: photo_id.into(), msisdn: msisdn.into() };
        match self.encoding {
            Encoding::Rest => self.rest(
                self.client
                    .post(self.url("/v1/rest/jobs"))
                    .header(reqwest::header::CONTENT_TYPE, "application/json")
                    .body(wire::json::encode(&req)),
            ),
            Encoding::Soap => match self.soap(&Request::SubmitJob(req))? {
                Response::SubmitJob(r) => Ok(r),
                other => Err(Self::unexpected(other)),
            },
        }
    }

    pub fn job_status(&self, job_id: &str) -> Result<JobView, ClientError> {
        match self.encoding {
            Encoding::Rest => self.rest(self.client.get(self.url(&format!("/v1/rest/jobs/{job_id}")))),
            Encoding::Soap => {
                match self.soap(&Request::JobStatus(JobStatusRequest { job_id: job_id.into() }))? {
                    Response::JobStatus(r) => Ok(r),
                    other => Err(Self::unexpected(other)),
                }
            }
        }
    }

    pub fn metrics(&self) -> Result<WireMetrics, ClientError> {
        self.rest(self.client.get(self.url("/v1/metrics")))
    }
}

/// `6799` → `67.99`.
pub fn format_cents(cents: u64) -> String {
    format!("{}.{:02}", cents / 100, cents % 100)
}

/// Human-readable book record, one field per line.
pub fn format_book(book: &LookupResponse) -> String {
    let mut out = format!(
        "barcode: {}\ntitle: {}\nauthors: {}\nlist price: {} {}\n",
        book.barcode,
        book.title,
        book.authors.join(", "),
        format_cents(book.list_price_cents),
        book.currency
    );
    match &book.cheapest {
        Some(c) => out.push_str(&format!(
            "cheapest: {} {} from {}\n",
            format_cents(c.price_cents),
            book.currency,
            c.seller
        )),
        None => out.push_str("cheapest: no offers\n"),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::server::wire::CheapestOffer;

    #[test]
    fn encoding_names() {
        assert_eq!("soap".parse::<Encoding>(), Ok(Encoding::Soap));
        assert_eq!(Encoding::Rest.to_string(), "rest");
        assert!("xml".parse::<Encoding>().is_err());
    }

    #[test]
    fn cents() {
        assert_eq!(format_cents(6799), "67.99");
        assert_eq!(format_cents(5), "0.05");
        assert_eq!(format_cents(100), "1.00");
    }

    #[test]
    fn book_lines() {
        let book = LookupResponse {
            barcode: "9780131103627".into(),
            title: "The C Programming Language".into(),
            authors: vec!["Brian W. Kernighan".into(), "Dennis M. Ritchie".into()],
            list_price_cents: 6799,
            currency: "USD".into(),
            cheapest: Some(CheapestOffer { seller: "paperback-exchange".into(), price_cents: 950 }),
        };
        assert_eq!(
            format_book(&book),
            "barcode: 9780131103627\ntitle: The C Programming Language\n\
             authors: Brian W. Kernighan, Dennis M. Ritchie\nlist price: 67.99 USD\n\
             cheapest: 9.50 USD from paperback-exchange\n"
        );
    }
}
