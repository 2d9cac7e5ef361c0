//! Renders a code to a PGM file, reads it back and decodes it, forwards and
//! mirrored.
//!
//! ```bash
//! cargo run --example render_and_decode -- 9780131103627 /tmp/bc.pgm
//! ```

use pervascan::barcode::{decode_image, DEFAULT_SCANLINES};
use pervascan::imagekit::{load_pgm, render_ean13, save_pgm, RenderSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let code = args.next().unwrap_or_else(|| "9780131103627".into());
    let path = args.next().unwrap_or_else(|| "barcode.pgm".into());

    let image = render_ean13(&code, &RenderSpec::default())?;
    std::fs::write(&path, save_pgm(&image))?;
    println!("wrote {path} ({}x{})", image.width(), image.height());

    let loaded = load_pgm(&std::fs::read(&path)?)?;
    for (label, img) in [("forward", loaded.clone()), ("mirrored", loaded.flip_horizontal())] {
        let r = decode_image(&img, DEFAULT_SCANLINES)?;
        println!(
            "{label}: {} {}/{} reversed={}",
            r.code, r.scanlines_agreeing, r.scanlines_attempted, r.reversed
        );
    }
    Ok(())
}
