//! Decodes seeded, degraded renders of random codes and reports the success
//! rate and any wrong reads.
//!
//! ```bash
//! cargo run --release --example degraded_decode -- 200
//! ```

use pervascan::barcode::{decode_image, Ean13, DEFAULT_SCANLINES};
use pervascan::imagekit::{degrade, render_ean13, Degradation, RenderSpec};
use pervascan::rng::SplitMix64;

fn main() {
    let trials: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(200);
    let spec = RenderSpec::with_module_px(3);
    let mut codes = SplitMix64::new(2024);
    let (mut ok, mut wrong, mut failed) = (0, 0, 0);
    for trial in 0..trials {
        let payload: [u8; 12] = std::array::from_fn(|_| (codes.next_u64() % 10) as u8);
        let code = Ean13::from_payload(payload).expect("12 digits");
        let clean = render_ean13(&code.to_string(), &spec).expect("valid code");
        let d = Degradation {
            noise_stddev: 20.0,
            blur_radius: 1,
            brightness_slope: if trial % 2 == 0 { 30.0 } else { -30.0 },
            rotation_deg: 0.0,
            seed: trial,
        };
        match decode_image(&degrade(&clean, &d), DEFAULT_SCANLINES) {
            Ok(report) if report.code == code => ok += 1,
            Ok(report) => {
                wrong += 1;
                eprintln!("trial {trial}: expected {code}, read {}", report.code);
            }
            Err(e) => {
                failed += 1;
                eprintln!("trial {trial}: {code} failed with {}", e.code());
            }
        }
    }
    println!(
        "{ok}/{trials} decoded ({:.1}%), {wrong} wrong, {failed} failed",
        100.0 * ok as f64 / trials as f64
    );
}
