//! The offline path end to end: upload to the image store, submit only the
//! photo ID, wait for the SMS, then read the book back from the photo tags.
//!
//! ```bash
//! cargo run --example offline_pipeline
//! ```

use std::time::{Duration, Instant};

use pervascan::client::{ComputeClient, Encoding};
use pervascan::imagekit::{render_ean13, save_pgm, RenderSpec};
use pervascan::imagestore::{DirStore, ImageStore};
use pervascan::notifier::{read_inbox_log, Msisdn};
use pervascan::server::tags::parse_book_tags;
use pervascan::server::{build_app, RunningServer, ServerConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scratch = std::env::temp_dir().join(format!("pervascan-offline-{}", std::process::id()));
    std::fs::create_dir_all(&scratch)?;
    let config = ServerConfig {
        listen: "127.0.0.1:0".into(),
        catalog: concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/catalog.jsonl").into(),
        store_dir: Some(scratch.join("photos")),
        inbox: scratch.join("inbox.jsonl"),
        journal: Some(scratch.join("jobs.jsonl")),
        ..ServerConfig::default()
    };
    let app = build_app(&config)?;
    let server = RunningServer::spawn(app.router, &config.listen)?;

    // the client shares the store directory with the server
    let store = DirStore::open(scratch.join("photos"), None)?;
    let photo = store.upload(&save_pgm(&render_ean13("9780131103627", &RenderSpec::default())?))?;
    println!("uploaded photo {photo}");

    let to: Msisdn = "+15551234567".parse()?;
    let api = ComputeClient::new(&server.url(), Encoding::Rest)?;
    let job = api.submit_job(photo.as_str(), to.as_str())?;
    println!("submitted job {}", job.job_id);

    let deadline = Instant::now() + Duration::from_secs(10);
    let sms = loop {
        let inbox = read_inbox_log(&config.inbox, &to)?;
        if let Some(m) = inbox.into_iter().next() {
            break m;
        }
        if Instant::now() > deadline {
            return Err("no SMS within 10 s".into());
        }
        std::thread::sleep(Duration::from_millis(20));
    };
    println!("sms: {}", sms.body);

    let tags = store.get_tags(&photo)?;
    for t in &tags {
        println!("  tag {t}");
    }
    let book = parse_book_tags(&tags);
    println!("title from tags: {}", book.title.unwrap_or_default());
    println!("job: {:?}", api.job_status(&job.job_id)?.state);

    drop(server);
    std::fs::remove_dir_all(&scratch)?;
    Ok(())
}
