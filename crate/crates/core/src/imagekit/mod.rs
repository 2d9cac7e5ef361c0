//! Grayscale rasters, binary PGM I/O, synthetic EAN-13 rendering and
//! seeded degradation.

mod degrade;
mod pgm;
mod render;

pub use degrade::{degrade, Degradation, MAX_ROTATION_DEG};
pub use pgm::{load_pgm, save_pgm, PgmError};
pub use render::{render_ean13, render_modules, RenderError, RenderSpec};

/// 8-bit grayscale raster, row-major, 0 is black and 255 is white.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ImageError {
    #[error("image dimensions must be at least 1x1, got {width}x{height}")]
    EmptyDimensions { width: usize, height: usize },
    #[error("expected {expected} pixels for the given dimensions, got {found}")]
    PixelCount { expected: usize, found: usize },
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::EmptyDimensions { width, height });
        }
        let expected = width
            .checked_mul(height)
            .ok_or(ImageError::EmptyDimensions { width, height })?;
        if pixels.len() != expected {
            return Err(ImageError::PixelCount {
                expected,
                found: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Image filled with a single intensity.
    pub fn filled(width: usize, height: usize, level: u8) -> Result<Self, ImageError> {
        Self::new(width, height, vec![level; width.saturating_mul(height)])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.pixels[y * self.width..(y + 1) * self.width]
    }

    /// Left-right mirror image.
    pub fn flip_horizontal(&self) -> Self {
        let mut pixels = Vec::with_capacity(self.pixels.len());
        for y in 0..self.height {
            pixels.extend(self.row(y).iter().rev());
        }
        Self {
            width: self.width,
            height: self.height,
            pixels,
        }
    }

    pub fn mean_intensity(&self) -> f64 {
        self.pixels.iter().map(|&p| p as f64).sum::<f64>() / self.pixels.len() as f64
    }
}
