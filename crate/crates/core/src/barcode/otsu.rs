use super::BarcodeError;
use crate::imagekit::GrayImage;

/// Global Otsu threshold; pixels `<= t` are black.
///
/// When several levels reach the maximal between-class variance through a
/// run of empty histogram bins, the middle of that run is returned, so a
/// two-level image gets a threshold halfway between its levels.
pub fn otsu_threshold(image: &GrayImage) -> Result<u8, BarcodeError> {
    let mut histogram = [0u64; 256];
    for &p in image.pixels() {
        histogram[p as usize] += 1;
    }
    let total = image.pixels().len() as f64;
    let total_sum: f64 = histogram
        .iter()
        .enumerate()
        .map(|(level, &n)| level as f64 * n as f64)
        .sum();

    let mut variances = [f64::NEG_INFINITY; 256];
    let mut weight_black = 0.0;
    let mut sum_black = 0.0;
    for t in 0..256 {
        weight_black += histogram[t] as f64;
        sum_black += t as f64 * histogram[t] as f64;
        let weight_white = total - weight_black;
        if weight_black == 0.0 || weight_white == 0.0 {
            continue;
        }
        let mean_black = sum_black / weight_black;
        let mean_white = (total_sum - sum_black) / weight_white;
        variances[t] = weight_black * weight_white * (mean_black - mean_white).powi(2);
    }

    let best = variances.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if best == f64::NEG_INFINITY {
        return Err(BarcodeError::NoContrast);
    }
    let first = variances.iter().position(|&v| v == best).expect("max exists");
    let mut last = first;
    while last + 1 < 256 && variances[last + 1] == best && histogram[last + 1] == 0 {
        last += 1;
    }
    Ok((first + last).div_ceil(2) as u8)
}

/// One row as bars (`true`) and spaces.
pub fn binarize_row(row: &[u8], threshold: u8) -> Vec<bool> {
    row.iter().map(|&p| p <= threshold).collect()
}
