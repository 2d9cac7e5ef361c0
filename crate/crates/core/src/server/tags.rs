//! Tag vocabulary written back to the image store for a found book:
//!
//! ```text
//! barcode:<13 digits>
//! title:<title>
//! author:<name>                      (one per author)
//! price:<cents> <currency>
//! cheapest:<seller> <cents> <currency>   (only when offers exist)
//! ```
//!
//! Values longer than the store's tag limit are cut at a character
//! boundary.

use crate::catalog::BookInfo;
use crate::imagestore::MAX_TAG_CHARS;

fn tag(prefix: &str, value: &str) -> String {
    let budget = MAX_TAG_CHARS - prefix.chars().count();
    let value: String = value
        .chars()
        .filter(|c| !c.is_control())
        .take(budget)
        .collect();
    format!("{prefix}{value}")
}

pub fn book_tags(book: &BookInfo) -> Vec<String> {
    let mut tags = vec![
        tag("barcode:", &book.barcode.to_string()),
        tag("title:", &book.title),
    ];
    tags.extend(book.authors.iter().filter(|a| !a.is_empty()).map(|a| tag("author:", a)));
    tags.push(format!(
        "price:{} {}",
        book.list_price.price_cents,
        book.currency()
    ));
    if let Some(c) = book.cheapest_offer() {
        tags.push(tag(
            "cheapest:",
            &format!("{} {} {}", c.seller, c.price_cents, c.currency),
        ));
    }
    tags
}

/// Book information recovered from photo tags.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TaggedBook {
    pub barcode: Option<String>,
    pub title: Option<String>,
    pub authors: Vec<String>,
    pub list_price: Option<(u64, String)>,
    pub cheapest: Option<(String, u64, String)>,
}

fn split_price(text: &str) -> Option<(u64, String)> {
    let (cents, currency) = text.rsplit_once(' ')?;
    Some((cents.parse().ok()?, currency.to_string()))
}

/// Reads the vocabulary back; unknown tags are ignored.
pub fn parse_book_tags<S: AsRef<str>>(tags: &[S]) -> TaggedBook {
    let mut out = TaggedBook::default();
    for t in tags {
        let t = t.as_ref();
        if let Some(v) = t.strip_prefix("barcode:") {
            out.barcode = Some(v.to_string());
        } else if let Some(v) = t.strip_prefix("title:") {
            out.title = Some(v.to_string());
        } else if let Some(v) = t.strip_prefix("author:") {
            out.authors.push(v.to_string());
        } else if let Some(v) = t.strip_prefix("price:") {
            out.list_price = split_price(v);
        } else if let Some(v) = t.strip_prefix("cheapest:") {
            out.cheapest = v.rsplit_once(' ').and_then(|(rest, currency)| {
                let (seller, cents) = rest.rsplit_once(' ')?;
                Some((seller.to_string(), cents.parse().ok()?, currency.to_string()))
            });
        }
    }
    out
}
