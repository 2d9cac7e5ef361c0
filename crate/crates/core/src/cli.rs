//! Command-line front end. Each subcommand plays one client or operator
//! role; [`run`] returns the process exit status.
//!
//! Exit statuses: 0 ok, 1 I/O or server unreachable, 2 invalid input,
//! 3 decode failure, 4 product not found, 5 timeout, 6 offline job failed.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};

use crate::barcode::{decode_image, BarcodeError, DEFAULT_SCANLINES};
use crate::client::{format_book, ClientError, ComputeClient, Encoding};
use crate::imagekit::{degrade, load_pgm, render_ean13, save_pgm, Degradation, RenderError, RenderSpec};
use crate::imagestore::{self, DirStore, HttpStore, ImageStore, PhotoId};
use crate::notifier::{read_inbox_log, Msisdn};
use crate::server::jobs::JobState;
use crate::server::wire::JobView;
use crate::server::{build_app, RunningServer, ServerConfig, SetupError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID_INPUT: i32 = 2;
pub const EXIT_DECODE: i32 = 3;
pub const EXIT_NOT_FOUND: i32 = 4;
pub const EXIT_TIMEOUT: i32 = 5;
pub const EXIT_JOB_FAILED: i32 = 6;

#[derive(Debug, Parser)]
#[command(name = "pervascan", version, about = "Book lookup from barcode photographs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a barcode image, optionally degraded like a camera photo
    Render(RenderArgs),
    /// Decode the barcode in a PGM image locally
    Decode(DecodeArgs),
    /// Send an image to the server and print the book record
    Online(OnlineArgs),
    /// Upload to the image store, submit the photo ID, wait for the SMS and print the tags
    Offline(OfflineArgs),
    /// Run the computation server
    Serve(ServeArgs),
    /// Run a standalone directory-backed image store
    Store(StoreArgs),
    /// Print SMS messages sent to a number
    Inbox(InboxArgs),
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// 13-digit EAN-13 code
    pub code: String,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub module_px: usize,
    #[arg(long, default_value_t = 60)]
    pub height: usize,
    /// Quiet zone width on each side, in modules
    #[arg(long, default_value_t = 9)]
    pub quiet: usize,
    /// Gaussian noise standard deviation
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub blur: usize,
    /// Brightness change across the image width
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub slope: f64,
    /// Rotation in degrees, at most 3 either way
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub rotate: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    pub image: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SCANLINES)]
    pub scanlines: usize,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ServerArgs {
    /// Computation server base URL
    #[arg(long, default_value = "http://127.0.0.1:8080", env = "PERVASCAN_SERVER")]
    pub server: String,
    /// Wire encoding: rest or soap
    #[arg(long, default_value = "rest")]
    pub encoding: Encoding,
}

#[derive(Debug, Args)]
pub struct OnlineArgs {
    pub image: PathBuf,
    #[command(flatten)]
    pub server: ServerArgs,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct OfflineArgs {
    pub image: PathBuf,
    /// Number that receives the completion SMS
    #[arg(long)]
    pub msisdn: String,
    #[command(flatten)]
    pub server: ServerArgs,
    /// Image store base URL (defaults to the server URL)
    #[arg(long, conflicts_with = "store_dir")]
    pub store_url: Option<String>,
    /// Use a directory store directly instead of a store URL
    #[arg(long)]
    pub store_dir: Option<PathBuf>,
    /// SMS inbox log written by the server
    #[arg(long, default_value = "inbox.jsonl")]
    pub inbox: PathBuf,
    /// Watch the job status instead of the SMS inbox
    #[arg(long)]
    pub poll_status: bool,
    /// Milliseconds between polls
    #[arg(long, default_value_t = 100)]
    pub poll_interval: u64,
    /// Seconds to wait for completion
    #[arg(long, default_value_t = 30.0)]
    pub timeout: f64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// JSON configuration file; environment and flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub listen: Option<String>,
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    #[arg(long)]
    pub store_dir: Option<PathBuf>,
    #[arg(long)]
    pub store_url: Option<String>,
    #[arg(long)]
    pub inbox: Option<PathBuf>,
    #[arg(long)]
    pub journal: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub queue_capacity: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub scanlines: Option<usize>,
}

#[derive(Debug, Args)]
pub struct StoreArgs {
    #[arg(long)]
    pub dir: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8090")]
    pub listen: String,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct InboxArgs {
    pub msisdn: String,
    #[arg(long, default_value = "inbox.jsonl")]
    pub inbox: PathBuf,
    #[arg(long)]
    pub json: bool,
}

/// A failed command: exit status plus the message for stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub exit: i32,
    pub message: String,
}

impl Failure {
    fn new(exit: i32, message: impl Into<String>) -> Self {
        Self { exit, message: message.into() }
    }

    fn io(e: impl std::fmt::Display) -> Self {
        Self::new(EXIT_IO, e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, text: &str) -> CmdResult {
    out.write_all(text.as_bytes()).map_err(Failure::io)
}

fn cmd_render(args: &RenderArgs, out: &mut dyn Write) -> CmdResult {
    let spec = RenderSpec {
        module_px: args.module_px,
        bar_height_px: args.height,
        quiet_modules: args.quiet,
        ..RenderSpec::default()
    };
    let image = render_ean13(&args.code, &spec).map_err(|e| match e {
        RenderError::InvalidCode(BarcodeError::ChecksumMismatch) => {
            Failure::new(EXIT_INVALID_INPUT, "invalid check digit")
        }
        other => Failure::new(EXIT_INVALID_INPUT, other.to_string()),
    })?;
    let d = Degradation {
        noise_stddev: args.noise,
        blur_radius: args.blur,
        brightness_slope: args.slope,
        rotation_deg: args.rotate,
        seed: args.seed,
    };
    d.check().map_err(|e| Failure::new(EXIT_INVALID_INPUT, e))?;
    let image = degrade(&image, &d);
    std::fs::write(&args.output, save_pgm(&image))
        .map_err(|e| Failure::io(format!("{}: {e}", args.output.display())))?;
    emit(
        out,
        &format!("{} {}x{}\n", args.output.display(), image.width(), image.height()),
    )
}

fn cmd_decode(args: &DecodeArgs, out: &mut dyn Write) -> CmdResult {
    let bytes = read_file(&args.image)?;
    let image = load_pgm(&bytes).map_err(|e| Failure::new(EXIT_INVALID_INPUT, e.code()))?;
    let report =
        decode_image(&image, args.scanlines.max(1)).map_err(|e| Failure::new(EXIT_DECODE, e.code()))?;
    if args.json {
        let text = serde_json::to_string(&report).expect("report serializes");
        return emit(out, &format!("{text}\n"));
    }
    let mut line = format!(
        "{} {}/{}",
        report.code, report.scanlines_agreeing, report.scanlines_attempted
    );
    if report.reversed {
        line.push_str(" reversed");
    }
    emit(out, &format!("{line}\n"))
}

/// Exit status for a server-reported error code.
fn server_failure(err: ClientError) -> Failure {
    match &err {
        ClientError::Server { error, .. } => match error.error.as_str() {
            "product_not_found" => Failure::new(EXIT_NOT_FOUND, "product_not_found"),
            "decode_failed" => Failure::new(
                EXIT_DECODE,
                error.detail.clone().unwrap_or_else(|| "decode_failed".into()),
            ),
            "invalid_image" | "invalid_request" | "malformed_body" => {
                Failure::new(EXIT_INVALID_INPUT, error.error.clone())
            }
            _ => Failure::io(err.to_string()),
        },
        _ => Failure::io(err.to_string()),
    }
}

fn client(args: &ServerArgs) -> Result<ComputeClient, Failure> {
    ComputeClient::new(&args.server, args.encoding).map_err(Failure::io)
}

fn cmd_online(args: &OnlineArgs, out: &mut dyn Write) -> CmdResult {
    let image = read_file(&args.image)?;
    let book = client(&args.server)?.lookup(&image).map_err(server_failure)?;
    if args.json {
        let text = serde_json::to_string(&book).expect("record serializes");
        return emit(out, &format!("{text}\n"));
    }
    emit(out, &format_book(&book))
}

fn open_store(args: &OfflineArgs) -> Result<Box<dyn ImageStore>, Failure> {
    match (&args.store_dir, &args.store_url) {
        (Some(dir), _) => Ok(Box::new(DirStore::open(dir, None).map_err(Failure::io)?)),
        (None, url) => {
            let url = url.clone().unwrap_or_else(|| args.server.server.clone());
            Ok(Box::new(HttpStore::new(url).map_err(Failure::io)?))
        }
    }
}

fn wait_for_job(
    args: &OfflineArgs,
    api: &ComputeClient,
    job_id: &str,
    to: &Msisdn,
    sms_before: usize,
) -> Result<JobView, Failure> {
    let deadline = Instant::now() + Duration::from_secs_f64(args.timeout.max(0.0));
    let interval = Duration::from_millis(args.poll_interval.max(1));
    loop {
        let finished = if args.poll_status {
            let view = api.job_status(job_id).map_err(server_failure)?;
            view.state.is_terminal().then_some(view)
        } else {
            let sms = read_inbox_log(&args.inbox, to).map_err(Failure::io)?;
            // an SMS may belong to another job for the same number
            if sms.len() > sms_before {
                let view = api.job_status(job_id).map_err(server_failure)?;
                view.state.is_terminal().then_some(view)
            } else {
                None
            }
        };
        if let Some(view) = finished {
            return Ok(view);
        }
        if Instant::now() >= deadline {
            return Err(Failure::new(EXIT_TIMEOUT, format!("timed out waiting for job {job_id}")));
        }
        std::thread::sleep(interval);
    }
}

fn cmd_offline(args: &OfflineArgs, out: &mut dyn Write) -> CmdResult {
    let to: Msisdn = args
        .msisdn
        .parse()
        .map_err(|_| Failure::new(EXIT_INVALID_INPUT, "invalid msisdn"))?;
    let image = read_file(&args.image)?;
    let store = open_store(args)?;
    let photo: PhotoId = store.upload(&image).map_err(|e| match e {
        imagestore::StoreError::InvalidImage(_) => Failure::new(EXIT_INVALID_INPUT, e.code()),
        other => Failure::io(format!("upload failed: {other}")),
    })?;
    let api = client(&args.server)?;
    let sms_before = if args.poll_status {
        0
    } else {
        read_inbox_log(&args.inbox, &to).map_err(Failure::io)?.len()
    };
    let job = api.submit_job(photo.as_str(), to.as_str()).map_err(server_failure)?;
    let view = wait_for_job(args, &api, &job.job_id, &to, sms_before)?;
    if view.state == JobState::Failed {
        let code = view.error_code.clone().unwrap_or_else(|| "failed".into());
        return Err(Failure::new(EXIT_JOB_FAILED, code));
    }
    if view.state != JobState::Done {
        return Err(Failure::io(format!("job {} is {}", view.job_id, view.state.as_str())));
    }
    let tags = store.get_tags(&photo).map_err(Failure::io)?;
    if args.json {
        let text = serde_json::json!({ "job": view, "tags": tags });
        return emit(out, &format!("{text}\n"));
    }
    let mut text = String::new();
    for t in &tags {
        text.push_str(t);
        text.push('\n');
    }
    emit(out, &text)
}

fn serve_config(args: &ServeArgs) -> Result<ServerConfig, Failure> {
    let mut config = match &args.config {
        Some(path) => ServerConfig::load(path).map_err(Failure::io)?,
        None => ServerConfig::default(),
    };
    config.apply_env(std::env::vars()).map_err(Failure::io)?;
    if let Some(v) = &args.listen {
        config.listen = v.clone();
    }
    if let Some(v) = &args.catalog {
        config.catalog = v.clone();
    }
    if let Some(v) = &args.store_dir {
        config.store_dir = Some(v.clone());
    }
    if let Some(v) = &args.store_url {
        config.store_url = Some(v.clone());
    }
    if let Some(v) = &args.inbox {
        config.inbox = v.clone();
    }
    if let Some(v) = &args.journal {
        config.journal = Some(v.clone());
    }
    if let Some(v) = args.workers {
        config.worker_count = v;
    }
    if let Some(v) = args.queue_capacity {
        config.queue_capacity = v;
    }
    if let Some(v) = args.seed {
        config.seed = Some(v);
    }
    if let Some(v) = args.scanlines {
        config.scanlines = v;
    }
    Ok(config)
}

fn wait_for_ctrl_c() -> CmdResult {
    let rt = tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .map_err(Failure::io)?;
    rt.block_on(tokio::signal::ctrl_c()).map_err(Failure::io)
}

fn cmd_serve(args: &ServeArgs, out: &mut dyn Write) -> CmdResult {
    let config = serve_config(args)?;
    let app = build_app(&config).map_err(|e: SetupError| Failure::io(format!("{}: {e}", e.code())))?;
    let server = RunningServer::spawn(app.router, &config.listen)
        .map_err(|e| Failure::io(format!("{}: {e}", config.listen)))?;
    emit(out, &format!("listening on {}\n", server.url()))?;
    out.flush().map_err(Failure::io)?;
    wait_for_ctrl_c()?;
    drop(server);
    drop(app.service);
    app.workers.join();
    Ok(())
}

fn cmd_store(args: &StoreArgs, out: &mut dyn Write) -> CmdResult {
    let store = DirStore::open(&args.dir, args.seed).map_err(Failure::io)?;
    let server = RunningServer::spawn(imagestore::router(Arc::new(store)), &args.listen)
        .map_err(|e| Failure::io(format!("{}: {e}", args.listen)))?;
    emit(out, &format!("store listening on {}\n", server.url()))?;
    out.flush().map_err(Failure::io)?;
    wait_for_ctrl_c()
}

fn cmd_inbox(args: &InboxArgs, out: &mut dyn Write) -> CmdResult {
    let to: Msisdn = args
        .msisdn
        .parse()
        .map_err(|_| Failure::new(EXIT_INVALID_INPUT, "invalid msisdn"))?;
    let mut text = String::new();
    for msg in read_inbox_log(&args.inbox, &to).map_err(Failure::io)? {
        if args.json {
            text.push_str(&serde_json::to_string(&msg).expect("message serializes"));
        } else {
            text.push_str(&format!("{} {}", crate::timefmt::format(&msg.sent_at), msg.body));
        }
        text.push('\n');
    }
    emit(out, &text)
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> CmdResult {
    match &cli.command {
        Command::Render(a) => cmd_render(a, out),
        Command::Decode(a) => cmd_decode(a, out),
        Command::Online(a) => cmd_online(a, out),
        Command::Offline(a) => cmd_offline(a, out),
        Command::Serve(a) => cmd_serve(a, out),
        Command::Store(a) => cmd_store(a, out),
        Command::Inbox(a) => cmd_inbox(a, out),
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit status. Failures are reported on stderr.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_INVALID_INPUT } else { EXIT_OK };
        }
    };
    match execute(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.exit
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["pervascan"];
        argv.extend_from_slice(args);
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn render_then_decode() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bc.pgm");
        let p = path.to_str().unwrap();
        let (code, out, _) = run_capture(&["render", "9780131103627", "--module-px", "3", "-o", p]);
        assert_eq!(code, 0);
        assert!(out.ends_with(" 339x60\n"), "{out}");
        let (code, out, _) = run_capture(&["decode", p]);
        assert_eq!(code, 0);
        assert_eq!(out, "9780131103627 7/7\n");
    }

    #[test]
    fn render_rejects_bad_check_digit() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.pgm");
        let (code, _, err) = run_capture(&["render", "9780131103620", "-o", p.to_str().unwrap()]);
        assert_eq!(code, EXIT_INVALID_INPUT);
        assert!(err.contains("invalid check digit"), "{err}");
        assert!(!p.exists());
    }

    #[test]
    fn degraded_render_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.pgm");
        let b = dir.path().join("b.pgm");
        for p in [&a, &b] {
            let args = ["render", "9780131103627", "--noise", "20", "--slope", "-30", "--seed", "7", "-o"];
            let mut argv = args.to_vec();
            argv.push(p.to_str().unwrap());
            assert_eq!(run_capture(&argv).0, 0);
        }
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn decode_failures() {
        let dir = tempfile::tempdir().unwrap();
        let flat = dir.path().join("flat.pgm");
        std::fs::write(&flat, b"P5\n4 2\n255\n\x80\x80\x80\x80\x80\x80\x80\x80").unwrap();
        let (code, _, err) = run_capture(&["decode", flat.to_str().unwrap()]);
        assert_eq!(code, EXIT_DECODE);
        assert!(err.contains("no_contrast"));
        let missing = dir.path().join("missing.pgm");
        assert_eq!(run_capture(&["decode", missing.to_str().unwrap()]).0, EXIT_IO);
    }

    #[test]
    fn inbox_for_unused_number_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        let log = dir.path().join("inbox.jsonl");
        let (code, out, _) = run_capture(&["inbox", "+15550000000", "--inbox", log.to_str().unwrap()]);
        assert_eq!((code, out.as_str()), (0, ""));
        assert_eq!(run_capture(&["inbox", "call-me"]).0, EXIT_INVALID_INPUT);
    }

    #[test]
    fn serve_with_missing_catalog() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("none.jsonl");
        let (code, _, err) = run_capture(&[
            "serve",
            "--catalog",
            missing.to_str().unwrap(),
            "--listen",
            "127.0.0.1:0",
        ]);
        assert_eq!(code, EXIT_IO);
        assert!(err.contains("file_unreadable"), "{err}");
    }
}
