//! Runs the directory-backed image store over HTTP and exercises it with the
//! HTTP client: upload, fetch, add tags twice, read tags.
//!
//! ```bash
//! cargo run --example mock_store_server
//! ```

use std::sync::Arc;

use pervascan::imagekit::{render_ean13, save_pgm, RenderSpec};
use pervascan::imagestore::{router, DirStore, HttpStore, ImageStore};
use pervascan::server::RunningServer;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = std::env::temp_dir().join(format!("pervascan-store-{}", std::process::id()));
    let server = RunningServer::spawn(router(Arc::new(DirStore::open(&root, Some(7))?)), "127.0.0.1:0")?;
    println!("store at {} backed by {}", server.url(), root.display());

    let client = HttpStore::new(server.url())?;
    let bytes = save_pgm(&render_ean13("9780131103627", &RenderSpec::default())?);
    let id = client.upload(&bytes)?;
    println!("uploaded {} octets as {id}", bytes.len());
    assert_eq!(client.fetch(&id)?, bytes);

    client.add_tags(&id, &["barcode:9780131103627".into(), "title:The C Programming Language".into()])?;
    let tags = client.add_tags(&id, &["barcode:9780131103627".into(), "price:6799 USD".into()])?;
    println!("tags: {tags:?}");

    match client.fetch(&"0123456789abcdef".parse()?) {
        Err(e) => println!("unknown photo: {}", e.code()),
        Ok(_) => println!("unexpectedly found a photo"),
    }
    for entry in std::fs::read_dir(&root)? {
        println!("  {}", entry?.file_name().to_string_lossy());
    }
    drop(server);
    std::fs::remove_dir_all(&root)?;
    Ok(())
}
