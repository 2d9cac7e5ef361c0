//! Starts a computation server on a free port and performs one online
//! lookup: the whole image travels with the request.
//!
//! ```bash
//! cargo run --example online_lookup
//! ```

use pervascan::client::{format_book, ComputeClient, Encoding};
use pervascan::imagekit::{render_ean13, save_pgm, RenderSpec};
use pervascan::server::{build_app, RunningServer, ServerConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scratch = std::env::temp_dir().join(format!("pervascan-online-{}", std::process::id()));
    std::fs::create_dir_all(&scratch)?;
    let config = ServerConfig {
        listen: "127.0.0.1:0".into(),
        catalog: concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/catalog.jsonl").into(),
        inbox: scratch.join("inbox.jsonl"),
        ..ServerConfig::default()
    };
    let app = build_app(&config)?;
    let server = RunningServer::spawn(app.router, &config.listen)?;

    let image = save_pgm(&render_ean13("9780131103627", &RenderSpec::default())?);
    let api = ComputeClient::new(&server.url(), Encoding::Rest)?;
    print!("{}", format_book(&api.lookup(&image)?));

    match api.lookup(&save_pgm(&render_ean13("4006381333931", &RenderSpec::default())?)) {
        Err(e) => println!("unlisted code: {}", e.server_code().unwrap_or("?")),
        Ok(book) => println!("unexpectedly found {}", book.title),
    }
    drop(server);
    std::fs::remove_dir_all(&scratch)?;
    Ok(())
}
