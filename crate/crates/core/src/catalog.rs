//! Product catalog: barcode to book record, backed by a JSON-lines fixture.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::barcode::Ean13;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Offer {
    pub seller: String,
    pub price_cents: u64,
    pub currency: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BookInfo {
    pub barcode: Ean13,
    pub title: String,
    pub authors: Vec<String>,
    /// Publisher list price; its seller is always `"list"`.
    pub list_price: Offer,
    pub offers: Vec<Offer>,
}

impl BookInfo {
    pub fn currency(&self) -> &str {
        &self.list_price.currency
    }

    pub fn cheapest_offer(&self) -> Option<&Offer> {
        cheapest_offer(self)
    }
}

/// Lowest-priced offer, ties broken by seller name ascending.
pub fn cheapest_offer(book: &BookInfo) -> Option<&Offer> {
    book.offers
        .iter()
        .min_by(|a, b| a.price_cents.cmp(&b.price_cents).then_with(|| a.seller.cmp(&b.seller)))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error("cannot read catalog file: {0}")]
    FileUnreadable(String),
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("line {line}: duplicate barcode {barcode}")]
    DuplicateBarcode { line: usize, barcode: String },
    #[error("line {line}: invalid barcode {barcode}")]
    InvalidBarcode { line: usize, barcode: String },
    #[error("product not found")]
    ProductNotFound,
}

impl CatalogError {
    pub fn code(&self) -> &'static str {
        match self {
            CatalogError::FileUnreadable(_) => "file_unreadable",
            CatalogError::MalformedRecord { .. } => "malformed_record",
            CatalogError::DuplicateBarcode { .. } => "duplicate_barcode",
            CatalogError::InvalidBarcode { .. } => "invalid_barcode",
            CatalogError::ProductNotFound => "product_not_found",
        }
    }
}

/// Barcode → book lookup service.
pub trait Catalog: Send + Sync {
    fn lookup(&self, code: &Ean13) -> Result<BookInfo, CatalogError>;
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FixtureOffer {
    seller: String,
    price_cents: u64,
}

/// One line of the fixture file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FixtureRecord {
    barcode: String,
    title: String,
    authors: Vec<String>,
    currency: String,
    list_price_cents: u64,
    offers: Vec<FixtureOffer>,
}

fn valid_currency(c: &str) -> bool {
    c.len() == 3 && c.bytes().all(|b| b.is_ascii_uppercase())
}

impl FixtureRecord {
    fn into_book(self, line: usize) -> Result<BookInfo, CatalogError> {
        let malformed = |reason: &str| CatalogError::MalformedRecord {
            line,
            reason: reason.to_string(),
        };
        let barcode: Ean13 = self.barcode.parse().map_err(|_| CatalogError::InvalidBarcode {
            line,
            barcode: self.barcode.clone(),
        })?;
        if self.title.trim().is_empty() {
            return Err(malformed("empty title"));
        }
        if !valid_currency(&self.currency) {
            return Err(malformed("currency must be three uppercase letters"));
        }
        if self.offers.iter().any(|o| o.seller.is_empty()) {
            return Err(malformed("offer with empty seller"));
        }
        let currency = self.currency;
        Ok(BookInfo {
            barcode,
            title: self.title,
            authors: self.authors,
            list_price: Offer {
                seller: "list".into(),
                price_cents: self.list_price_cents,
                currency: currency.clone(),
            },
            offers: self
                .offers
                .into_iter()
                .map(|o| Offer {
                    seller: o.seller,
                    price_cents: o.price_cents,
                    currency: currency.clone(),
                })
                .collect(),
        })
    }
}

/// Immutable in-memory catalog loaded from a fixture.
#[derive(Debug, Clone, Default)]
pub struct FixtureCatalog {
    books: HashMap<Ean13, BookInfo>,
    order: Vec<Ean13>,
}

impl FixtureCatalog {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, CatalogError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| CatalogError::FileUnreadable(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Parses JSON-lines text. Blank lines are skipped; line numbers in
    /// errors are 1-based.
    pub fn parse(text: &str) -> Result<Self, CatalogError> {
        let mut catalog = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let record: FixtureRecord =
                serde_json::from_str(raw).map_err(|e| CatalogError::MalformedRecord {
                    line,
                    reason: e.to_string(),
                })?;
            let book = record.into_book(line)?;
            if catalog.books.contains_key(&book.barcode) {
                return Err(CatalogError::DuplicateBarcode {
                    line,
                    barcode: book.barcode.to_string(),
                });
            }
            catalog.order.push(book.barcode);
            catalog.books.insert(book.barcode, book);
        }
        Ok(catalog)
    }

    pub fn len(&self) -> usize {
        self.books.len()
    }

    pub fn is_empty(&self) -> bool {
        self.books.is_empty()
    }

    /// Books in fixture order.
    pub fn books(&self) -> impl Iterator<Item = &BookInfo> {
        self.order.iter().map(|code| &self.books[code])
    }
}

impl Catalog for FixtureCatalog {
    fn lookup(&self, code: &Ean13) -> Result<BookInfo, CatalogError> {
        self.books.get(code).cloned().ok_or(CatalogError::ProductNotFound)
    }
}
