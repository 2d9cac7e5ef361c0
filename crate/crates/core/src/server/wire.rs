//! Request and response records shared by both wire encodings.
//!
//! The REST encoding carries JSON bodies (the online lookup request is the
//! raw PGM itself). The envelope encoding wraps the same records in
//! `<Envelope><Body>…</Body></Envelope>` with one fixed element name per
//! field. Both decode to identical records.

use base64::Engine;
use quick_xml::events::Event;
use quick_xml::Reader;
use serde::{Deserialize, Serialize};

use super::jobs::JobState;

pub const XML_NAMESPACE: &str = "urn:pervascan:v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LookupRequest {
    pub image: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmitJobRequest {
    pub photo_id: String,
    pub msisdn: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobStatusRequest {
    pub job_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Request {
    Lookup(LookupRequest),
    SubmitJob(SubmitJobRequest),
    JobStatus(JobStatusRequest),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheapestOffer {
    pub seller: String,
    pub price_cents: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LookupResponse {
    pub barcode: String,
    pub title: String,
    pub authors: Vec<String>,
    pub list_price_cents: u64,
    pub currency: String,
    pub cheapest: Option<CheapestOffer>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmitJobResponse {
    pub job_id: String,
}

/// Externally visible part of a job record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobView {
    pub job_id: String,
    pub photo_id: String,
    pub state: JobState,
    pub failed_stage: Option<JobState>,
    pub error_code: Option<String>,
    pub barcode: Option<String>,
    pub created_at: String,
    pub updated_at: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorResponse {
    pub error: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Response {
    Lookup(LookupResponse),
    SubmitJob(SubmitJobResponse),
    JobStatus(JobView),
    Error(ErrorResponse),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed body: {0}")]
pub struct MalformedBody(pub String);

fn malformed(msg: impl Into<String>) -> MalformedBody {
    MalformedBody(msg.into())
}

pub mod json {
    //! REST bodies.
    use super::*;

    pub fn encode<T: Serialize>(record: &T) -> Vec<u8> {
        serde_json::to_vec(record).expect("wire records serialize")
    }

    pub fn decode<T: for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, MalformedBody> {
        serde_json::from_slice(body).map_err(|e| malformed(e.to_string()))
    }

    /// Success body or the error body the server sent instead.
    pub fn decode_reply<T: for<'de> Deserialize<'de>>(
        success: bool,
        body: &[u8],
    ) -> Result<Result<T, ErrorResponse>, MalformedBody> {
        if success {
            decode(body).map(Ok)
        } else {
            decode(body).map(Err)
        }
    }
}

/// Minimal element tree; attributes are ignored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
struct Element {
    name: String,
    text: String,
    children: Vec<Element>,
}

impl Element {
    fn leaf(name: &str, text: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            text: text.into(),
            children: Vec::new(),
        }
    }

    fn node(name: &str, children: Vec<Element>) -> Self {
        Self {
            name: name.into(),
            text: String::new(),
            children,
        }
    }

    fn child(&self, name: &str) -> Option<&Element> {
        self.children.iter().find(|c| c.name == name)
    }

    fn required(&self, name: &str) -> Result<&Element, MalformedBody> {
        self.child(name)
            .ok_or_else(|| malformed(format!("<{}> lacks <{name}>", self.name)))
    }

    fn text_of(&self, name: &str) -> Result<String, MalformedBody> {
        Ok(self.required(name)?.text.clone())
    }

    fn optional_text(&self, name: &str) -> Option<String> {
        self.child(name).map(|c| c.text.clone())
    }

    fn number_of(&self, name: &str) -> Result<u64, MalformedBody> {
        let text = self.text_of(name)?;
        text.trim()
            .parse()
            .map_err(|_| malformed(format!("<{name}> is not a non-negative integer")))
    }

    fn write(&self, out: &mut String) {
        out.push('<');
        out.push_str(&self.name);
        out.push('>');
        if self.children.is_empty() {
            out.push_str(&quick_xml::escape::escape(self.text.as_str()));
        } else {
            for c in &self.children {
                c.write(out);
            }
        }
        out.push_str("</");
        out.push_str(&self.name);
        out.push('>');
    }
}

fn parse_tree(body: &[u8]) -> Result<Element, MalformedBody> {
    let text = std::str::from_utf8(body).map_err(|_| malformed("body is not UTF-8"))?;
    let mut reader = Reader::from_str(text);
    reader.config_mut().check_end_names = true;
    let mut stack: Vec<Element> = Vec::new();
    let mut root: Option<Element> = None;
    let local = |raw: &[u8]| -> Result<String, MalformedBody> {
        let name = std::str::from_utf8(raw).map_err(|_| malformed("bad element name"))?;
        Ok(name.rsplit(':').next().unwrap_or(name).to_string())
    };
    loop {
        let event = reader
            .read_event()
            .map_err(|e| malformed(format!("at byte {}: {e}", reader.buffer_position())))?;
        match event {
            Event::Start(start) => {
                if root.is_some() {
                    return Err(malformed("content after the root element"));
                }
                stack.push(Element {
                    name: local(start.local_name().as_ref())?,
                    ..Element::default()
                });
            }
            Event::Empty(start) => {
                let el = Element {
                    name: local(start.local_name().as_ref())?,
                    ..Element::default()
                };
                match stack.last_mut() {
                    Some(parent) => parent.children.push(el),
                    None if root.is_none() => root = Some(el),
                    None => return Err(malformed("content after the root element")),
                }
            }
            Event::End(_) => {
                let el = stack.pop().ok_or_else(|| malformed("unbalanced end tag"))?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(el),
                    None => root = Some(el),
                }
            }
            Event::Text(t) => {
                let decoded = t
                    .decode()
                    .map_err(|e| malformed(e.to_string()))?;
                let unescaped = quick_xml::escape::unescape(&decoded)
                    .map_err(|e| malformed(e.to_string()))?;
                match stack.last_mut() {
                    Some(el) => el.text.push_str(&unescaped),
                    None if unescaped.trim().is_empty() => {}
                    None => return Err(malformed("text outside the root element")),
                }
            }
            Event::GeneralRef(r) => {
                let name = r.decode().map_err(|e| malformed(e.to_string()))?;
                let resolved = match r.resolve_char_ref().map_err(|e| malformed(e.to_string()))? {
                    Some(c) => c.to_string(),
                    None => quick_xml::escape::resolve_predefined_entity(&name)
                        .ok_or_else(|| malformed(format!("unknown entity &{name};")))?
                        .to_string(),
                };
                match stack.last_mut() {
                    Some(el) => el.text.push_str(&resolved),
                    None => return Err(malformed("text outside the root element")),
                }
            }
            Event::CData(c) => {
                let s = std::str::from_utf8(&c).map_err(|_| malformed("bad CDATA"))?;
                match stack.last_mut() {
                    Some(el) => el.text.push_str(s),
                    None => return Err(malformed("CDATA outside the root element")),
                }
            }
            Event::Eof => break,
            Event::Decl(_) | Event::Comment(_) | Event::PI(_) | Event::DocType(_) => {}
        }
    }
    if !stack.is_empty() {
        return Err(malformed("document ends inside an element"));
    }
    root.ok_or_else(|| malformed("empty document"))
}

pub mod xml {
    //! Envelope bodies.
    use super::*;

    fn envelope(payload: Element) -> Vec<u8> {
        let mut out = String::from(r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        out.push_str(&format!(r#"<Envelope xmlns="{XML_NAMESPACE}"><Body>"#));
        payload.write(&mut out);
        out.push_str("</Body></Envelope>");
        out.into_bytes()
    }

    fn open(body: &[u8]) -> Result<Element, MalformedBody> {
        let root = parse_tree(body)?;
        if root.name != "Envelope" {
            return Err(malformed("root element must be <Envelope>"));
        }
        let body = root.required("Body")?;
        match body.children.as_slice() {
            [payload] => Ok(payload.clone()),
            [] => Err(malformed("<Body> is empty")),
            _ => Err(malformed("<Body> must hold exactly one element")),
        }
    }

    fn state_of(el: &Element, name: &str) -> Result<Option<JobState>, MalformedBody> {
        el.optional_text(name)
            .map(|s| s.parse().map_err(|_| malformed(format!("<{name}> is not a job state"))))
            .transpose()
    }

    pub fn encode_request(req: &Request) -> Vec<u8> {
        let payload = match req {
            Request::Lookup(r) => Element::node(
                "LookupRequest",
                vec![Element::leaf(
                    "ImageBase64",
                    base64::engine::general_purpose::STANDARD.encode(&r.image),
                )],
            ),
            Request::SubmitJob(r) => Element::node(
                "SubmitJobRequest",
                vec![
                    Element::leaf("PhotoId", &r.photo_id),
                    Element::leaf("Msisdn", &r.msisdn),
                ],
            ),
            Request::JobStatus(r) => Element::node(
                "JobStatusRequest",
                vec![Element::leaf("JobId", &r.job_id)],
            ),
        };
        envelope(payload)
    }

    pub fn decode_request(body: &[u8]) -> Result<Request, MalformedBody> {
        let payload = open(body)?;
        match payload.name.as_str() {
            "LookupRequest" => {
                let text: String = payload
                    .text_of("ImageBase64")?
                    .chars()
                    .filter(|c| !c.is_ascii_whitespace())
                    .collect();
                let image = base64::engine::general_purpose::STANDARD
                    .decode(text)
                    .map_err(|e| malformed(format!("<ImageBase64>: {e}")))?;
                Ok(Request::Lookup(LookupRequest { image }))
            }
            "SubmitJobRequest" => Ok(Request::SubmitJob(SubmitJobRequest {
                photo_id: payload.text_of("PhotoId")?,
                msisdn: payload.text_of("Msisdn")?,
            })),
            "JobStatusRequest" => Ok(Request::JobStatus(JobStatusRequest {
                job_id: payload.text_of("JobId")?,
            })),
            other => Err(malformed(format!("unknown request <{other}>"))),
        }
    }

    pub fn encode_response(resp: &Response) -> Vec<u8> {
        let payload = match resp {
            Response::Lookup(r) => {
                let mut fields = vec![
                    Element::leaf("Barcode", &r.barcode),
                    Element::leaf("Title", &r.title),
                    Element::node(
                        "Authors",
                        r.authors.iter().map(|a| Element::leaf("Author", a)).collect(),
                    ),
                    Element::leaf("ListPriceCents", r.list_price_cents.to_string()),
                    Element::leaf("Currency", &r.currency),
                ];
                if let Some(c) = &r.cheapest {
                    fields.push(Element::leaf("CheapestSeller", &c.seller));
                    fields.push(Element::leaf("CheapestPriceCents", c.price_cents.to_string()));
                }
                Element::node("LookupResponse", fields)
            }
            Response::SubmitJob(r) => Element::node(
                "SubmitJobResponse",
                vec![Element::leaf("JobId", &r.job_id)],
            ),
            Response::JobStatus(v) => {
                let mut fields = vec![
                    Element::leaf("JobId", &v.job_id),
                    Element::leaf("PhotoId", &v.photo_id),
                    Element::leaf("State", v.state.as_str()),
                ];
                if let Some(s) = v.failed_stage {
                    fields.push(Element::leaf("FailedStage", s.as_str()));
                }
                if let Some(c) = &v.error_code {
                    fields.push(Element::leaf("ErrorCode", c));
                }
                if let Some(b) = &v.barcode {
                    fields.push(Element::leaf("Barcode", b));
                }
                fields.push(Element::leaf("CreatedAt", &v.created_at));
                fields.push(Element::leaf("UpdatedAt", &v.updated_at));
                Element::node("JobStatusResponse", fields)
            }
            Response::Error(e) => {
                let mut fields = vec![Element::leaf("Code", &e.error)];
                if let Some(d) = &e.detail {
                    fields.push(Element::leaf("Detail", d));
                }
                Element::node("ErrorResponse", fields)
            }
        };
        envelope(payload)
    }

    pub fn decode_response(body: &[u8]) -> Result<Response, MalformedBody> {
        let p = open(body)?;
        match p.name.as_str() {
            "LookupResponse" => {
                let cheapest = match (p.child("CheapestSeller"), p.child("CheapestPriceCents")) {
                    (Some(seller), Some(_)) => Some(CheapestOffer {
                        seller: seller.text.clone(),
                        price_cents: p.number_of("CheapestPriceCents")?,
                    }),
                    (None, None) => None,
                    _ => return Err(malformed("cheapest offer is half present")),
                };
                let authors = match p.child("Authors") {
                    Some(a) => a
                        .children
                        .iter()
                        .filter(|c| c.name == "Author")
                        .map(|c| c.text.clone())
                        .collect(),
                    None => Vec::new(),
                };
                Ok(Response::Lookup(LookupResponse {
                    barcode: p.text_of("Barcode")?,
                    title: p.text_of("Title")?,
                    authors,
                    list_price_cents: p.number_of("ListPriceCents")?,
                    currency: p.text_of("Currency")?,
                    cheapest,
                }))
            }
            "SubmitJobResponse" => Ok(Response::SubmitJob(SubmitJobResponse {
                job_id: p.text_of("JobId")?,
            })),
            "JobStatusResponse" => Ok(Response::JobStatus(JobView {
                job_id: p.text_of("JobId")?,
                photo_id: p.text_of("PhotoId")?,
                state: state_of(&p, "State")?.ok_or_else(|| malformed("missing <State>"))?,
                failed_stage: state_of(&p, "FailedStage")?,
                error_code: p.optional_text("ErrorCode"),
                barcode: p.optional_text("Barcode"),
                created_at: p.text_of("CreatedAt")?,
                updated_at: p.text_of("UpdatedAt")?,
            })),
            "ErrorResponse" => Ok(Response::Error(ErrorResponse {
                error: p.text_of("Code")?,
                detail: p.optional_text("Detail"),
            })),
            other => Err(malformed(format!("unknown response <{other}>"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_lookup() -> LookupResponse {
        LookupResponse {
            barcode: "9780131103627".into(),
            title: "The C Programming Language".into(),
            authors: vec!["Brian W. Kernighan".into(), "Dennis M. Ritchie".into()],
            list_price_cents: 6799,
            currency: "USD".into(),
            cheapest: Some(CheapestOffer {
                seller: "paperback-exchange".into(),
                price_cents: 950,
            }),
        }
    }

    #[test]
    fn json_lookup_response_shape() {
        let body = json::encode(&sample_lookup());
        let value: serde_json::Value = serde_json::from_slice(&body).unwrap();
        assert_eq!(value["barcode"], "9780131103627");
        assert_eq!(value["list_price_cents"], 6799);
        assert_eq!(value["cheapest"]["seller"], "paperback-exchange");
        assert_eq!(value["cheapest"]["price_cents"], 950);
        assert_eq!(json::decode::<LookupResponse>(&body).unwrap(), sample_lookup());
    }

    #[test]
    fn json_error_shape() {
        let e = ErrorResponse {
            error: "decode_failed".into(),
            detail: Some("no_contrast".into()),
        };
        assert_eq!(
            json::encode(&e),
            br#"{"error":"decode_failed","detail":"no_contrast"}"#
        );
        let plain = ErrorResponse {
            error: "product_not_found".into(),
            detail: None,
        };
        assert_eq!(json::encode(&plain), br#"{"error":"product_not_found"}"#);
    }

    #[test]
    fn submit_request_in_both_encodings_is_the_same_record() {
        let from_json: SubmitJobRequest =
            json::decode(br#"{"photo_id":"0123456789abcdef","msisdn":"+15551234567"}"#).unwrap();
        let envelope = br#"<Envelope><Body><SubmitJobRequest><PhotoId>0123456789abcdef</PhotoId><Msisdn>+15551234567</Msisdn></SubmitJobRequest></Body></Envelope>"#;
        assert_eq!(
            xml::decode_request(envelope).unwrap(),
            Request::SubmitJob(from_json)
        );
    }

    #[test]
    fn lookup_request_envelope_carries_base64() {
        let req = Request::Lookup(LookupRequest {
            image: b"P5\n1 1\n255\n\x00".to_vec(),
        });
        let body = xml::encode_request(&req);
        let text = String::from_utf8(body.clone()).unwrap();
        assert!(text.contains("<ImageBase64>UDUKMSAxCjI1NQoA</ImageBase64>"), "{text}");
        assert_eq!(xml::decode_request(&body).unwrap(), req);
        // line-wrapped base64 and namespace prefixes are accepted
        let wrapped = br#"<s:Envelope xmlns:s="urn:x"><s:Body><LookupRequest><ImageBase64>UDUKMSAx
        CjI1NQoA</ImageBase64></LookupRequest></s:Body></s:Envelope>"#;
        assert_eq!(xml::decode_request(wrapped).unwrap(), req);
    }

    #[test]
    fn malformed_envelopes() {
        let cases: [&[u8]; 8] = [
            b"<Envelope><Body><SubmitJobRequest><PhotoId>abc</PhotoId>",
            b"",
            b"not xml at all",
            b"<Other><Body/></Other>",
            b"<Envelope><Body></Body></Envelope>",
            b"<Envelope><Body><Unknown/></Body></Envelope>",
            b"<Envelope><Body><SubmitJobRequest><PhotoId>a</PhotoId></SubmitJobRequest></Body></Envelope>",
            b"<Envelope><Body><LookupRequest><ImageBase64>!!!</ImageBase64></LookupRequest></Body></Envelope>",
        ];
        for case in cases {
            assert!(xml::decode_request(case).is_err(), "{}", String::from_utf8_lossy(case));
        }
        assert!(xml::decode_response(b"<Envelope><Body><LookupResponse>").is_err());
    }

    #[test]
    fn special_characters_are_escaped() {
        let mut r = sample_lookup();
        r.title = "Tom & Jerry <Annotated> \"Edition\" 'x'".into();
        let body = xml::encode_response(&Response::Lookup(r.clone()));
        assert_eq!(xml::decode_response(&body).unwrap(), Response::Lookup(r));
    }

    #[test]
    fn job_view_round_trips() {
        let v = JobView {
            job_id: "00000000000000aa".into(),
            photo_id: "00000000000000bb".into(),
            state: JobState::Failed,
            failed_stage: Some(JobState::Decoding),
            error_code: Some("no_contrast".into()),
            barcode: None,
            created_at: "2026-01-01T00:00:00.000Z".into(),
            updated_at: "2026-01-01T00:00:01.000Z".into(),
        };
        let r = Response::JobStatus(v.clone());
        assert_eq!(xml::decode_response(&xml::encode_response(&r)).unwrap(), r);
        let value: serde_json::Value = serde_json::from_slice(&json::encode(&v)).unwrap();
        assert_eq!(value["state"], "FAILED");
        assert_eq!(value["failed_stage"], "DECODING");
        assert_eq!(value["barcode"], serde_json::Value::Null);
        assert_eq!(json::decode::<JobView>(&json::encode(&v)).unwrap(), v);
    }

    fn text() -> impl Strategy<Value = String> {
        // XML 1.0 cannot carry most control characters
        "[^\\p{Cc}]{0,24}"
    }

    fn lookup_strategy() -> impl Strategy<Value = LookupResponse> {
        (
            "[0-9]{13}",
            text(),
            prop::collection::vec(text(), 0..4),
            any::<u64>(),
            "[A-Z]{3}",
            prop::option::of((text(), any::<u64>())),
        )
            .prop_map(|(barcode, title, authors, list_price_cents, currency, cheapest)| {
                LookupResponse {
                    barcode,
                    title,
                    authors,
                    list_price_cents,
                    currency,
                    cheapest: cheapest.map(|(seller, price_cents)| CheapestOffer {
                        seller,
                        price_cents,
                    }),
                }
            })
    }

    proptest! {
        #[test]
        fn lookup_response_round_trips_in_both_encodings(r in lookup_strategy()) {
            let wrapped = Response::Lookup(r.clone());
            prop_assert_eq!(xml::decode_response(&xml::encode_response(&wrapped)).unwrap(), wrapped);
            prop_assert_eq!(json::decode::<LookupResponse>(&json::encode(&r)).unwrap(), r);
        }

        #[test]
        fn requests_round_trip(image in prop::collection::vec(any::<u8>(), 0..300), photo in text(), msisdn in text(), job in text()) {
            for req in [
                Request::Lookup(LookupRequest { image: image.clone() }),
                Request::SubmitJob(SubmitJobRequest { photo_id: photo.clone(), msisdn: msisdn.clone() }),
                Request::JobStatus(JobStatusRequest { job_id: job.clone() }),
            ] {
                prop_assert_eq!(xml::decode_request(&xml::encode_request(&req)).unwrap(), req);
            }
            let submit = SubmitJobRequest { photo_id: photo, msisdn };
            prop_assert_eq!(json::decode::<SubmitJobRequest>(&json::encode(&submit)).unwrap(), submit);
        }

        #[test]
        fn error_responses_round_trip(code in "[a-z_]{1,20}", detail in prop::option::of("[a-z_]{1,20}")) {
            let e = ErrorResponse { error: code, detail };
            let r = Response::Error(e.clone());
            prop_assert_eq!(xml::decode_response(&xml::encode_response(&r)).unwrap(), r);
            prop_assert_eq!(json::decode::<ErrorResponse>(&json::encode(&e)).unwrap(), e);
        }
    }
}
