use super::GrayImage;
use crate::barcode::{symbol_modules, BarcodeError, Ean13};

/// Geometry and levels for a synthetic barcode image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RenderSpec {
    pub module_px: usize,
    pub bar_height_px: usize,
    pub quiet_modules: usize,
    pub fg_level: u8,
    pub bg_level: u8,
}

impl Default for RenderSpec {
    fn default() -> Self {
        Self {
            module_px: 3,
            bar_height_px: 60,
            quiet_modules: 9,
            fg_level: 0,
            bg_level: 255,
        }
    }
}

impl RenderSpec {
    pub fn with_module_px(module_px: usize) -> Self {
        Self {
            module_px,
            ..Self::default()
        }
    }

    pub fn width_px(&self, modules: usize) -> usize {
        (modules + 2 * self.quiet_modules) * self.module_px
    }

    fn check(&self) -> Result<(), RenderError> {
        if self.module_px == 0 {
            return Err(RenderError::InvalidSpec("module_px must be at least 1"));
        }
        if self.bar_height_px == 0 {
            return Err(RenderError::InvalidSpec("bar_height_px must be at least 1"));
        }
        if self.fg_level >= self.bg_level {
            return Err(RenderError::InvalidSpec("fg_level must be darker than bg_level"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RenderError {
    #[error("invalid code: {0}")]
    InvalidCode(#[from] BarcodeError),
    #[error("invalid render spec: {0}")]
    InvalidSpec(&'static str),
}

/// Draws the 95-module symbol for a checksum-valid 13-digit code.
pub fn render_ean13(code: &str, spec: &RenderSpec) -> Result<GrayImage, RenderError> {
    let code: Ean13 = code.parse()?;
    render_modules(&symbol_modules(code.digits()), spec)
}

/// Draws arbitrary module bits (true = bar) flanked by quiet zones. Every
/// row is identical.
pub fn render_modules(modules: &[bool], spec: &RenderSpec) -> Result<GrayImage, RenderError> {
    spec.check()?;
    let width = spec.width_px(modules.len());
    let mut row = vec![spec.bg_level; width];
    let offset = spec.quiet_modules * spec.module_px;
    for (i, &bar) in modules.iter().enumerate() {
        if bar {
            let start = offset + i * spec.module_px;
            row[start..start + spec.module_px].fill(spec.fg_level);
        }
    }
    let pixels = row.repeat(spec.bar_height_px);
    Ok(GrayImage::new(width, spec.bar_height_px, pixels).expect("dimensions are positive"))
}
