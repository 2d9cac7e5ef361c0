//! Prints the same submit request and lookup response in both wire
//! encodings and checks that each decodes back to the same record.
//!
//! ```bash
//! cargo run --example dual_encoding
//! ```

use pervascan::server::wire::{
    json, xml, CheapestOffer, LookupResponse, Request, Response, SubmitJobRequest,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let submit = SubmitJobRequest { photo_id: "3f9a0c1d2e4b5a69".into(), msisdn: "+15551234567".into() };
    let submit_json = json::encode(&submit);
    let submit_xml = xml::encode_request(&Request::SubmitJob(submit.clone()));
    println!("REST  {}", String::from_utf8_lossy(&submit_json));
    println!("XML   {}", String::from_utf8_lossy(&submit_xml));
    assert_eq!(json::decode::<SubmitJobRequest>(&submit_json)?, submit);
    assert_eq!(xml::decode_request(&submit_xml)?, Request::SubmitJob(submit));

    let book = LookupResponse {
        barcode: "9780131103627".into(),
        title: "The C Programming Language".into(),
        authors: vec!["Brian W. Kernighan".into(), "Dennis M. Ritchie".into()],
        list_price_cents: 6799,
        currency: "USD".into(),
        cheapest: Some(CheapestOffer { seller: "paperback-exchange".into(), price_cents: 950 }),
    };
    let book_json = json::encode(&book);
    let book_xml = xml::encode_response(&Response::Lookup(book.clone()));
    println!("REST  {}", String::from_utf8_lossy(&book_json));
    println!("XML   {}", String::from_utf8_lossy(&book_xml));
    assert_eq!(json::decode::<LookupResponse>(&book_json)?, book);
    assert_eq!(xml::decode_response(&book_xml)?, Response::Lookup(book));

    match xml::decode_request(b"<Envelope><Body><LookupRequest>") {
        Err(e) => println!("truncated envelope: {e}"),
        Ok(r) => println!("unexpectedly parsed {r:?}"),
    }
    Ok(())
}
