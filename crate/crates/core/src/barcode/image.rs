use std::collections::HashMap;

use serde::Serialize;

use super::otsu::{binarize_row, otsu_threshold};
use super::scan::decode_scanline;
use super::{BarcodeError, Ean13};
use crate::imagekit::GrayImage;

pub const DEFAULT_SCANLINES: usize = 7;

/// Outcome of a multi-scanline decode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DecodeReport {
    pub code: Ean13,
    pub scanlines_attempted: usize,
    pub scanlines_agreeing: usize,
    pub reversed: bool,
}

impl DecodeReport {
    pub fn confidence(&self) -> f64 {
        self.scanlines_agreeing as f64 / self.scanlines_attempted as f64
    }
}

/// Rows sampled by [`decode_image`]: `count` rows evenly spaced over the
/// middle 80% of the height, top to bottom.
pub fn scanline_rows(height: usize, count: usize) -> Vec<usize> {
    let count = count.max(1);
    let band = 0.8 * height as f64;
    let top = 0.1 * height as f64;
    (0..count)
        .map(|k| {
            let y = top + (k as f64 + 0.5) * band / count as f64;
            (y.floor() as usize).min(height - 1)
        })
        .collect()
}

/// Decodes the plurality code over `n_scanlines` rows (at least one). Ties
/// go to the code first seen from the top.
pub fn decode_image(image: &GrayImage, n_scanlines: usize) -> Result<DecodeReport, BarcodeError> {
    let threshold = otsu_threshold(image)?;
    let rows = scanline_rows(image.height(), n_scanlines);

    // (votes, first row index, reversed flag of the first hit)
    let mut tally: HashMap<Ean13, (usize, usize, bool)> = HashMap::new();
    for (order, &y) in rows.iter().enumerate() {
        let bits = binarize_row(image.row(y), threshold);
        if let Ok(hit) = decode_scanline(&bits) {
            tally
                .entry(hit.code)
                .and_modify(|e| e.0 += 1)
                .or_insert((1, order, hit.reversed));
        }
    }
    let (code, (agreeing, _, reversed)) = tally
        .into_iter()
        .max_by(|a, b| a.1 .0.cmp(&b.1 .0).then(b.1 .1.cmp(&a.1 .1)))
        .ok_or(BarcodeError::NoBarcodeFound)?;
    Ok(DecodeReport {
        code,
        scanlines_attempted: rows.len(),
        scanlines_agreeing: agreeing,
        reversed,
    })
}
