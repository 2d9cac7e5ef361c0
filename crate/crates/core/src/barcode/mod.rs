//! EAN-13 decoding from grayscale rasters.
//!
//! The pipeline is: Otsu binarization, run-length encoding of a handful of
//! horizontal scanlines, guard-pattern location, nearest-pattern digit
//! classification, leading-digit recovery from the left-half parity, and
//! check-digit validation. Scanlines vote; the plurality code wins.

mod ean13;
mod image;
mod otsu;
mod scan;
mod tables;

pub use ean13::{checksum_digit, parse_digits, validate, Ean13};
pub use image::{decode_image, scanline_rows, DecodeReport, DEFAULT_SCANLINES};
pub use otsu::{binarize_row, otsu_threshold};
pub use scan::{
    classify_digit, decode_scanline, locate_symbol, parity_to_first_digit, run_lengths, Color,
    LocatedSymbol, RunSequence, ScanlineDecode, Side, CLASSIFY_TOLERANCE, GUARD_TOLERANCE,
    MIN_QUIET_MODULES, SYMBOL_RUNS,
};
pub use tables::{
    check_table_invariants, pattern_bits, pattern_runs, symbol_modules, Parity, RunTables,
    G_CODES, L_CODES, PARITY_TABLE, R_CODES, SYMBOL_MODULES,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BarcodeError {
    #[error("expected {expected} digits, got {found}")]
    BadLength { expected: usize, found: usize },
    #[error("non-decimal character in code")]
    InvalidDigit,
    #[error("check digit does not match")]
    ChecksumMismatch,
    #[error("image has no contrast")]
    NoContrast,
    #[error("no barcode found")]
    NoBarcodeFound,
    #[error("digit pattern unreadable")]
    DigitUnreadable,
    #[error("left-half parity pattern matches no leading digit")]
    UnknownParityPattern,
}

impl BarcodeError {
    /// Stable snake_case code used on the wire and in job records.
    pub fn code(&self) -> &'static str {
        match self {
            BarcodeError::BadLength { .. } => "bad_length",
            BarcodeError::InvalidDigit => "invalid_digit",
            BarcodeError::ChecksumMismatch => "checksum_mismatch",
            BarcodeError::NoContrast => "no_contrast",
            BarcodeError::NoBarcodeFound => "no_barcode_found",
            BarcodeError::DigitUnreadable => "digit_unreadable",
            BarcodeError::UnknownParityPattern => "unknown_parity_pattern",
        }
    }
}
