use super::GrayImage;
use crate::rng::SplitMix64;

pub const MAX_ROTATION_DEG: f64 = 3.0;

/// Camera-like damage applied to a clean raster. All-zero is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Degradation {
    pub noise_stddev: f64,
    pub blur_radius: usize,
    /// Intensity delta reached at the rightmost column, 0 at the leftmost.
    pub brightness_slope: f64,
    pub rotation_deg: f64,
    pub seed: u64,
}

impl Degradation {
    pub fn check(&self) -> Result<(), &'static str> {
        if !(self.noise_stddev >= 0.0 && self.noise_stddev.is_finite()) {
            return Err("noise_stddev must be a finite non-negative number");
        }
        if self.rotation_deg.is_nan() || self.rotation_deg.abs() > MAX_ROTATION_DEG {
            return Err("rotation_deg must be within ±3 degrees");
        }
        if !self.brightness_slope.is_finite() {
            return Err("brightness_slope must be finite");
        }
        Ok(())
    }
}

/// Applies rotation, box blur, brightness slope and Gaussian noise, in that
/// order, then rounds and clamps to [0, 255]. Out-of-range rotation is
/// clamped to ±3° and a negative noise level is treated as zero.
pub fn degrade(image: &GrayImage, d: &Degradation) -> GrayImage {
    let (w, h) = (image.width(), image.height());
    let mut buf: Vec<f64> = image.pixels().iter().map(|&p| p as f64).collect();

    let rotation = d.rotation_deg.clamp(-MAX_ROTATION_DEG, MAX_ROTATION_DEG);
    if rotation != 0.0 {
        buf = rotate(&buf, w, h, rotation, side_background(image));
    }
    if d.blur_radius > 0 {
        buf = box_blur(&buf, w, h, d.blur_radius);
    }
    if d.brightness_slope != 0.0 && w > 1 {
        for y in 0..h {
            for x in 0..w {
                buf[y * w + x] += d.brightness_slope * x as f64 / (w - 1) as f64;
            }
        }
    }
    if d.noise_stddev > 0.0 {
        let mut rng = SplitMix64::new(d.seed);
        for v in &mut buf {
            *v += d.noise_stddev * rng.next_gaussian();
        }
    }

    let pixels = buf.iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect();
    GrayImage::new(w, h, pixels).expect("dimensions unchanged")
}

/// Median of the leftmost and rightmost columns, where the quiet zones of a
/// barcode photo lie.
fn side_background(image: &GrayImage) -> f64 {
    let last = image.width() - 1;
    let mut samples: Vec<u8> = (0..image.height())
        .flat_map(|y| [image.get(0, y), image.get(last, y)])
        .collect();
    samples.sort_unstable();
    samples[samples.len() / 2] as f64
}

fn rotate(src: &[f64], w: usize, h: usize, degrees: f64, fill: f64) -> Vec<f64> {
    let (sin, cos) = degrees.to_radians().sin_cos();
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let at = |x: isize, y: isize| -> f64 {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            fill
        } else {
            src[y as usize * w + x as usize]
        }
    };
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            // inverse mapping: sample the source at the pre-rotation position
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            let sx = cos * dx + sin * dy + cx;
            let sy = -sin * dx + cos * dy + cy;
            let x0 = sx.floor();
            let y0 = sy.floor();
            let fx = sx - x0;
            let fy = sy - y0;
            let (x0, y0) = (x0 as isize, y0 as isize);
            let top = at(x0, y0) * (1.0 - fx) + at(x0 + 1, y0) * fx;
            let bottom = at(x0, y0 + 1) * (1.0 - fx) + at(x0 + 1, y0 + 1) * fx;
            out[y * w + x] = top * (1.0 - fy) + bottom * fy;
        }
    }
    out
}

fn box_blur(src: &[f64], w: usize, h: usize, radius: usize) -> Vec<f64> {
    let window = (2 * radius + 1) as f64;
    let r = radius as isize;
    let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;
    let mut horizontal = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let sum: f64 = (-r..=r)
                .map(|k| src[y * w + clamp(x as isize + k, w)])
                .sum();
            horizontal[y * w + x] = sum / window;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let sum: f64 = (-r..=r)
                .map(|k| horizontal[clamp(y as isize + k, h) * w + x])
                .sum();
            out[y * w + x] = sum / window;
        }
    }
    out
}
