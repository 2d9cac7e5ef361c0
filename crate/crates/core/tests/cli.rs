//! The `pervascan` binary against live servers.

mod common;

use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Child, Command, Output, Stdio};

use common::*;
use pervascan::client::{ComputeClient, Encoding};
use pervascan::imagestore::{HttpStore, ImageStore};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pervascan"));
    cmd.env_remove("PERVASCAN_SERVER");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_image(dir: &Path, code: &str) -> String {
    let path = dir.join(format!("{code}.pgm"));
    std::fs::write(&path, rendered_pgm(code)).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn online_output_is_identical_across_encodings() {
    let srv = TestServer::start();
    let image = write_image(srv.dir.path(), BOOK);
    let rest = run(&["online", &image, "--server", &srv.url, "--encoding", "rest"]);
    let soap = run(&["online", &image, "--server", &srv.url, "--encoding", "soap"]);
    assert!(rest.status.success(), "{}", stderr(&rest));
    assert_eq!(rest.stdout, soap.stdout);
    let text = stdout(&rest);
    assert!(text.contains(&format!("title: {BOOK_TITLE}")));
    assert!(text.contains("cheapest: 9.50 USD from paperback-exchange"));
}

#[test]
fn online_json_is_the_rest_body() {
    let srv = TestServer::start();
    let image = write_image(srv.dir.path(), BOOK);
    let out = run(&["online", &image, "--server", &srv.url, "--json"]);
    assert!(out.status.success());
    let direct = ComputeClient::new(&srv.url, Encoding::Rest).unwrap().lookup(&rendered_pgm(BOOK)).unwrap();
    assert_eq!(stdout(&out), format!("{}\n", serde_json::to_string(&direct).unwrap()));
    let soap = run(&["online", &image, "--server", &srv.url, "--json", "--encoding", "soap"]);
    assert_eq!(soap.stdout, out.stdout);
}

#[test]
fn online_unknown_book_exits_4() {
    let srv = TestServer::start();
    let image = write_image(srv.dir.path(), UNKNOWN_BOOK);
    for enc in ["rest", "soap"] {
        let out = run(&["online", &image, "--server", &srv.url, "--encoding", enc]);
        assert_eq!(out.status.code(), Some(4));
        assert!(stderr(&out).contains("product_not_found"));
    }
}

#[test]
fn online_without_server_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let image = write_image(dir.path(), BOOK);
    let out = run(&["online", &image, "--server", "http://127.0.0.1:9"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn offline_prints_tags_and_one_sms() {
    let srv = TestServer::start();
    let image = write_image(srv.dir.path(), BOOK);
    let inbox = srv.inbox.to_str().unwrap();
    let out = run(&["offline", &image, "--msisdn", MSISDN, "--server", &srv.url, "--inbox", inbox]);
    assert!(out.status.success(), "{}", stderr(&out));
    let tags = stdout(&out);
    assert!(tags.lines().any(|l| l == format!("title:{BOOK_TITLE}")), "{tags}");
    assert!(tags.lines().any(|l| l == "barcode:9780131103627"));

    let inbox_out = run(&["inbox", MSISDN, "--inbox", inbox]);
    let lines: Vec<String> = stdout(&inbox_out).lines().map(String::from).collect();
    assert_eq!(lines.len(), 1);
    assert!(lines[0].contains(" pervascan: info ready for photo "), "{}", lines[0]);
}

#[test]
fn offline_poll_status_and_soap() {
    let srv = TestServer::start();
    let image = write_image(srv.dir.path(), BOOK);
    let out = run(&[
        "offline", &image, "--msisdn", MSISDN, "--server", &srv.url, "--encoding", "soap", "--poll-status", "--json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["job"]["state"], "DONE");
    assert!(v["tags"].as_array().unwrap().iter().any(|t| t == "price:6799 USD"));
}

#[test]
fn offline_failures() {
    let srv = TestServer::start();
    let inbox = srv.inbox.to_str().unwrap();
    let unknown = write_image(srv.dir.path(), UNKNOWN_BOOK);
    let out = run(&["offline", &unknown, "--msisdn", MSISDN, "--server", &srv.url, "--inbox", inbox]);
    assert_eq!(out.status.code(), Some(6));
    assert!(stderr(&out).contains("product_not_found"));

    let missing = srv.dir.path().join("nope.pgm");
    let out = run(&["offline", missing.to_str().unwrap(), "--msisdn", MSISDN, "--server", &srv.url]);
    assert_eq!(out.status.code(), Some(1));

    // watching a log the server never writes to
    let image = write_image(srv.dir.path(), BOOK);
    let elsewhere = srv.dir.path().join("other-inbox.jsonl");
    let out = run(&[
        "offline", &image, "--msisdn", MSISDN, "--server", &srv.url,
        "--inbox", elsewhere.to_str().unwrap(), "--timeout", "0.3", "--poll-interval", "20",
    ]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn offline_with_store_dir() {
    let store_dir = tempfile::tempdir().unwrap();
    let dir_path = store_dir.path().to_path_buf();
    let srv = TestServer::start_with(|c| c.store_dir = Some(dir_path));
    let image = write_image(srv.dir.path(), BOOK);
    let out = run(&[
        "offline", &image, "--msisdn", MSISDN, "--server", &srv.url,
        "--store-dir", store_dir.path().to_str().unwrap(), "--inbox", srv.inbox.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("cheapest:paperback-exchange 950 USD"));
}

/// Starts a long-running subcommand and returns it with the URL it prints.
fn spawn_listening(args: &[&str]) -> (Child, String) {
    let mut child = bin().args(args).stdout(Stdio::piped()).stderr(Stdio::null()).spawn().unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let url = line.trim().rsplit(' ').next().unwrap().to_string();
    assert!(url.starts_with("http://"), "{line}");
    (child, url)
}

#[test]
fn serve_and_store_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let store_root = dir.path().join("photos");
    let (mut store, store_url) = spawn_listening(&[
        "store", "--dir", store_root.to_str().unwrap(), "--listen", "127.0.0.1:0",
    ]);
    let inbox = dir.path().join("inbox.jsonl");
    let (mut server, url) = spawn_listening(&[
        "serve", "--listen", "127.0.0.1:0",
        "--catalog", fixture_catalog().to_str().unwrap(),
        "--store-url", &store_url, "--inbox", inbox.to_str().unwrap(),
    ]);

    let image = write_image(dir.path(), BOOK);
    let online = run(&["online", &image, "--server", &url]);
    assert!(online.status.success(), "{}", stderr(&online));
    let offline = run(&[
        "offline", &image, "--msisdn", MSISDN, "--server", &url,
        "--store-url", &store_url, "--inbox", inbox.to_str().unwrap(), "--timeout", "10",
    ]);
    assert!(offline.status.success(), "{}", stderr(&offline));
    let photos = HttpStore::new(store_url).unwrap();
    assert!(photos.fetch(&"missing".parse().unwrap()).is_err());

    server.kill().unwrap();
    store.kill().unwrap();
    let _ = server.wait();
    let _ = store.wait();
}

#[test]
fn serve_with_missing_catalog_exits_1() {
    let out = run(&["serve", "--catalog", "/nonexistent/catalog.jsonl", "--listen", "127.0.0.1:0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("file_unreadable"));
}

#[test]
fn serve_reads_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("server.json");
    std::fs::write(
        &config,
        serde_json::json!({ "catalog": "/nonexistent/catalog.jsonl", "worker_count": 3 }).to_string(),
    )
    .unwrap();
    let out = run(&["serve", "--config", config.to_str().unwrap(), "--listen", "127.0.0.1:0"]);
    assert!(stderr(&out).contains("file_unreadable"));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"workers\": 3}").unwrap();
    assert_eq!(run(&["serve", "--config", bad.to_str().unwrap()]).status.code(), Some(1));
}
