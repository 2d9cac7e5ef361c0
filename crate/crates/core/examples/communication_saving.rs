//! Compares request bytes received by the computation server for the two
//! paths as the image grows. The online body grows with the image; the
//! offline submit body stays the same size.
//!
//! ```bash
//! cargo run --example communication_saving
//! ```

use pervascan::client::{ComputeClient, Encoding};
use pervascan::imagekit::{render_ean13, save_pgm, RenderSpec};
use pervascan::imagestore::{HttpStore, ImageStore};
use pervascan::server::{build_app, RunningServer, ServerConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scratch = std::env::temp_dir().join(format!("pervascan-saving-{}", std::process::id()));
    std::fs::create_dir_all(&scratch)?;
    let config = ServerConfig {
        listen: "127.0.0.1:0".into(),
        catalog: concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/catalog.jsonl").into(),
        inbox: scratch.join("inbox.jsonl"),
        ..ServerConfig::default()
    };
    let app = build_app(&config)?;
    let server = RunningServer::spawn(app.router, &config.listen)?;
    let store = HttpStore::new(server.url())?;

    println!("{:>9} {:>6} {:>12} {:>12} {:>12}", "module_px", "enc", "image", "online body", "submit body");
    for px in [2, 3, 5, 8] {
        let spec = RenderSpec { module_px: px, bar_height_px: 20 * px, ..RenderSpec::default() };
        let image = save_pgm(&render_ean13("9780131103627", &spec)?);
        let photo = store.upload(&image)?;
        for enc in [Encoding::Rest, Encoding::Soap] {
            let api = ComputeClient::new(&server.url(), enc)?;
            let before = api.metrics()?;
            api.lookup(&image)?;
            api.submit_job(photo.as_str(), "+15551234567")?;
            let after = api.metrics()?;
            println!(
                "{px:>9} {enc:>6} {:>12} {:>12} {:>12}",
                image.len(),
                after.online_bytes_in - before.online_bytes_in,
                after.offline_bytes_in - before.offline_bytes_in
            );
        }
    }
    drop(server);
    std::fs::remove_dir_all(&scratch)?;
    Ok(())
}
