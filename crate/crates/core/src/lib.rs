//! Book lookup from barcode photographs.
//!
//! A grayscale photo of an EAN-13 book barcode is decoded on a computation
//! server and resolved against a product catalog. Two request paths exist:
//!
//! * **online**: the client posts the image and receives the book record in
//!   the response;
//! * **offline**: the client uploads the image to an image store, sends only
//!   the photo ID, and is told by SMS once the book record has been written
//!   back as photo tags.
//!
//! Both paths accept a JSON/REST encoding and an XML envelope encoding of the
//! same request and response records.

pub mod barcode;
pub mod imagekit;
pub mod rng;
pub mod server;
pub mod catalog;
pub mod cli;
pub mod client;
pub mod imagestore;
pub mod notifier;
pub mod timefmt;
