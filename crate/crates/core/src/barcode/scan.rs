use super::tables::{Parity, RunTables, PARITY_TABLE};
use super::{validate, BarcodeError, Ean13};
use std::sync::OnceLock;

/// Runs in a symbol: 3 + 6×4 + 5 + 6×4 + 3.
pub const SYMBOL_RUNS: usize = 59;
/// Allowed relative deviation of each guard run from the module width.
pub const GUARD_TOLERANCE: f64 = 0.4;
/// Largest accepted L1 distance, in modules, between a digit and its pattern.
pub const CLASSIFY_TOLERANCE: f64 = 1.4;
/// Minimum quiet zone on either side, in modules.
pub const MIN_QUIET_MODULES: f64 = 3.0;

const MIDDLE_GUARD_OFFSET: usize = 27;
const RIGHT_DIGITS_OFFSET: usize = 32;
const END_GUARD_OFFSET: usize = 56;

fn run_tables() -> &'static RunTables {
    static TABLES: OnceLock<RunTables> = OnceLock::new();
    TABLES.get_or_init(RunTables::build)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Color {
    Black,
    White,
}

impl Color {
    fn flip(self) -> Self {
        match self {
            Color::Black => Color::White,
            Color::White => Color::Black,
        }
    }
}

/// Alternating same-color runs of one scanline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSequence {
    pub starting_color: Color,
    pub runs: Vec<u32>,
}

impl RunSequence {
    pub fn color_of(&self, index: usize) -> Color {
        if index.is_multiple_of(2) {
            self.starting_color
        } else {
            self.starting_color.flip()
        }
    }

    pub fn total(&self) -> u64 {
        self.runs.iter().map(|&r| r as u64).sum()
    }
}

/// Maximal runs of a binarized row. An empty row gives an empty sequence.
pub fn run_lengths(row: &[bool]) -> RunSequence {
    let starting_color = match row.first() {
        Some(true) => Color::Black,
        _ => Color::White,
    };
    let mut runs = Vec::new();
    let mut iter = row.iter();
    if let Some(&first) = iter.next() {
        let mut current = first;
        let mut len = 1u32;
        for &bit in iter {
            if bit == current {
                len += 1;
            } else {
                runs.push(len);
                current = bit;
                len = 1;
            }
        }
        runs.push(len);
    }
    RunSequence {
        starting_color,
        runs,
    }
}

/// The 59 runs of a symbol candidate plus its module width in pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct LocatedSymbol {
    pub start_index: usize,
    pub runs: Vec<u32>,
    pub module_width: f64,
}

impl LocatedSymbol {
    pub fn left_digit(&self, i: usize) -> [u32; 4] {
        let base = 3 + 4 * i;
        [self.runs[base], self.runs[base + 1], self.runs[base + 2], self.runs[base + 3]]
    }

    pub fn right_digit(&self, i: usize) -> [u32; 4] {
        let base = RIGHT_DIGITS_OFFSET + 4 * i;
        [self.runs[base], self.runs[base + 1], self.runs[base + 2], self.runs[base + 3]]
    }
}

fn near_module(run: u32, module: f64) -> bool {
    (run as f64 - module).abs() <= GUARD_TOLERANCE * module
}

/// Finds the first start guard whose end guard, middle guard and quiet zones
/// line up 59 runs later.
pub fn locate_symbol(seq: &RunSequence) -> Result<LocatedSymbol, BarcodeError> {
    let runs = &seq.runs;
    if runs.len() < SYMBOL_RUNS {
        return Err(BarcodeError::NoBarcodeFound);
    }
    for i in 1..=(runs.len() - SYMBOL_RUNS) {
        if seq.color_of(i) != Color::Black {
            continue;
        }
        let start = &runs[i..i + 3];
        let start_module = start.iter().sum::<u32>() as f64 / 3.0;
        if !start.iter().all(|&r| near_module(r, start_module)) {
            continue;
        }
        if (runs[i - 1] as f64) < MIN_QUIET_MODULES * start_module {
            continue;
        }
        let end = &runs[i + END_GUARD_OFFSET..i + SYMBOL_RUNS];
        let module = (start.iter().sum::<u32>() + end.iter().sum::<u32>()) as f64 / 6.0;
        if !start.iter().chain(end).all(|&r| near_module(r, module)) {
            continue;
        }
        let after = i + SYMBOL_RUNS;
        if after < runs.len() && (runs[after] as f64) < MIN_QUIET_MODULES * module {
            continue;
        }
        let middle = &runs[i + MIDDLE_GUARD_OFFSET..i + MIDDLE_GUARD_OFFSET + 5];
        if !middle.iter().all(|&r| near_module(r, module)) {
            continue;
        }
        return Ok(LocatedSymbol {
            start_index: i,
            runs: runs[i..i + SYMBOL_RUNS].to_vec(),
            module_width: module,
        });
    }
    Err(BarcodeError::NoBarcodeFound)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Runs begin with a space; L (odd) or G (even) patterns.
    Left,
    /// Runs begin with a bar; R patterns.
    Right,
}

/// Nearest digit pattern to four runs. The runs are rescaled so their total
/// is 7 modules; `module_width` is only used to reject a zero-width input.
pub fn classify_digit(
    runs: &[u32; 4],
    module_width: f64,
    side: Side,
) -> Result<(u8, Parity), BarcodeError> {
    let total: u32 = runs.iter().sum();
    if total == 0 || module_width <= 0.0 {
        return Err(BarcodeError::DigitUnreadable);
    }
    let scale = 7.0 / total as f64;
    let normalized = runs.map(|r| r as f64 * scale);
    let distance = |pattern: &[u8; 4]| -> f64 {
        normalized
            .iter()
            .zip(pattern)
            .map(|(a, &b)| (a - b as f64).abs())
            .sum()
    };

    let tables = run_tables();
    let candidates: Vec<(&[[u8; 4]; 10], Parity)> = match side {
        Side::Left => vec![(&tables.l, Parity::Odd), (&tables.g, Parity::Even)],
        Side::Right => vec![(&tables.r, Parity::Even)],
    };
    let mut best: Option<(f64, u8, Parity)> = None;
    for (table, parity) in candidates {
        for (digit, pattern) in table.iter().enumerate() {
            let d = distance(pattern);
            if best.is_none_or(|(b, _, _)| d < b) {
                best = Some((d, digit as u8, parity));
            }
        }
    }
    match best {
        Some((d, digit, parity)) if d <= CLASSIFY_TOLERANCE => Ok((digit, parity)),
        _ => Err(BarcodeError::DigitUnreadable),
    }
}

pub fn parity_to_first_digit(parities: &[Parity; 6]) -> Result<u8, BarcodeError> {
    PARITY_TABLE
        .iter()
        .position(|entry| entry == parities)
        .map(|d| d as u8)
        .ok_or(BarcodeError::UnknownParityPattern)
}

/// A code read from one scanline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanlineDecode {
    pub code: Ean13,
    /// The symbol was read right-to-left.
    pub reversed: bool,
}

fn decode_runs(seq: &RunSequence) -> Result<Ean13, BarcodeError> {
    let symbol = locate_symbol(seq)?;
    let m = symbol.module_width;
    let mut digits = [0u8; 13];
    let mut parities = [Parity::Odd; 6];
    for i in 0..6 {
        let (digit, parity) = classify_digit(&symbol.left_digit(i), m, Side::Left)?;
        digits[1 + i] = digit;
        parities[i] = parity;
    }
    for i in 0..6 {
        let (digit, _) = classify_digit(&symbol.right_digit(i), m, Side::Right)?;
        digits[7 + i] = digit;
    }
    digits[0] = parity_to_first_digit(&parities)?;
    if !validate(&digits)? {
        return Err(BarcodeError::ChecksumMismatch);
    }
    Ok(Ean13::from_digits(digits).expect("validated above"))
}

/// How far decoding got before failing; the more advanced error is reported
/// when both reading directions fail.
fn progress(err: &BarcodeError) -> u8 {
    match err {
        BarcodeError::NoBarcodeFound => 0,
        BarcodeError::DigitUnreadable => 1,
        BarcodeError::UnknownParityPattern => 2,
        BarcodeError::ChecksumMismatch => 3,
        _ => 0,
    }
}

/// Decodes one binarized row, left-to-right first, then right-to-left.
pub fn decode_scanline(row: &[bool]) -> Result<ScanlineDecode, BarcodeError> {
    let forward = run_lengths(row);
    let forward_err = match decode_runs(&forward) {
        Ok(code) => {
            return Ok(ScanlineDecode {
                code,
                reversed: false,
            })
        }
        Err(e) => e,
    };
    let mut runs = forward.runs.clone();
    runs.reverse();
    let last_color = forward.color_of(forward.runs.len().saturating_sub(1));
    let backward = RunSequence {
        starting_color: last_color,
        runs,
    };
    match decode_runs(&backward) {
        Ok(code) => Ok(ScanlineDecode {
            code,
            reversed: true,
        }),
        Err(backward_err) => Err(if progress(&backward_err) > progress(&forward_err) {
            backward_err
        } else {
            forward_err
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barcode::symbol_modules;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == 'B').collect()
    }

    /// Scanline for arbitrary digits (check digit unverified) at a given
    /// module width with a 9-module quiet zone.
    fn scanline(digits: &[u8; 13], module_px: usize) -> Vec<bool> {
        let mut row = vec![false; 9 * module_px];
        for m in symbol_modules(digits) {
            row.extend(std::iter::repeat_n(m, module_px));
        }
        row.extend(vec![false; 9 * module_px]);
        row
    }

    const BOOK: [u8; 13] = [9, 7, 8, 0, 1, 3, 1, 1, 0, 3, 6, 2, 7];

    #[test]
    fn run_length_examples() {
        assert_eq!(
            run_lengths(&bits("WWWBBB")),
            RunSequence { starting_color: Color::White, runs: vec![3, 3] }
        );
        assert_eq!(
            run_lengths(&bits("B")),
            RunSequence { starting_color: Color::Black, runs: vec![1] }
        );
        assert_eq!(
            run_lengths(&bits("BWBWB")),
            RunSequence { starting_color: Color::Black, runs: vec![1; 5] }
        );
    }

    #[test]
    fn locate_on_clean_scanline() {
        let seq = run_lengths(&scanline(&BOOK, 3));
        let symbol = locate_symbol(&seq).unwrap();
        assert_eq!(symbol.module_width, 3.0);
        assert_eq!(symbol.runs.len(), SYMBOL_RUNS);
        assert_eq!(symbol.start_index, 1);
    }

    #[test]
    fn locate_fails_without_symbol() {
        assert_eq!(
            locate_symbol(&run_lengths(&vec![false; 300])),
            Err(BarcodeError::NoBarcodeFound)
        );
        let mut row = vec![false; 30];
        row.extend(bits("BBBWWWBBB"));
        row.extend(vec![false; 30]);
        assert_eq!(locate_symbol(&run_lengths(&row)), Err(BarcodeError::NoBarcodeFound));
    }

    #[test]
    fn locate_requires_quiet_zone() {
        let mut row = vec![false; 2 * 3];
        for m in symbol_modules(&BOOK) {
            row.extend(std::iter::repeat_n(m, 3));
        }
        row.extend(vec![false; 27]);
        assert_eq!(locate_symbol(&run_lengths(&row)), Err(BarcodeError::NoBarcodeFound));
    }

    #[test]
    fn symbol_may_end_at_line_end() {
        let mut row = vec![false; 27];
        for m in symbol_modules(&BOOK) {
            row.extend(std::iter::repeat_n(m, 3));
        }
        assert!(locate_symbol(&run_lengths(&row)).is_ok());
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_digit(&[9, 6, 3, 3], 3.0, Side::Left), Ok((0, Parity::Odd)));
        assert_eq!(classify_digit(&[3, 3, 3, 12], 3.0, Side::Left), Ok((6, Parity::Odd)));
        assert_eq!(classify_digit(&[3, 3, 6, 9], 3.0, Side::Left), Ok((0, Parity::Even)));
        assert_eq!(classify_digit(&[9, 6, 3, 3], 3.0, Side::Right), Ok((0, Parity::Even)));
        assert_eq!(
            classify_digit(&[21, 1, 1, 1], 3.0, Side::Left),
            Err(BarcodeError::DigitUnreadable)
        );
    }

    #[test]
    fn classify_tolerates_one_pixel_jitter() {
        // L(0) = 3,2,1,1 at 3 px/module with one boundary moved by a pixel
        assert_eq!(classify_digit(&[10, 5, 3, 3], 3.0, Side::Left), Ok((0, Parity::Odd)));
        assert_eq!(classify_digit(&[9, 6, 2, 4], 3.0, Side::Left), Ok((0, Parity::Odd)));
    }

    #[test]
    fn parity_examples() {
        use Parity::{Even as E, Odd as O};
        assert_eq!(parity_to_first_digit(&[O, O, O, O, O, O]), Ok(0));
        assert_eq!(parity_to_first_digit(&[O, O, E, O, E, E]), Ok(1));
        assert_eq!(
            parity_to_first_digit(&[O, E, E, E, E, E]),
            Err(BarcodeError::UnknownParityPattern)
        );
    }

    #[test]
    fn decode_clean_and_reversed() {
        let row = scanline(&BOOK, 3);
        let fwd = decode_scanline(&row).unwrap();
        assert_eq!(fwd.code.to_string(), "9780131103627");
        assert!(!fwd.reversed);
        let mut rev = row.clone();
        rev.reverse();
        let back = decode_scanline(&rev).unwrap();
        assert_eq!(back.code, fwd.code);
        assert!(back.reversed);
    }

    #[test]
    fn mis_rendered_check_digit_is_caught() {
        let mut digits = BOOK;
        digits[12] = 0;
        let row = scanline(&digits, 3);
        assert_eq!(decode_scanline(&row), Err(BarcodeError::ChecksumMismatch));
        let mut rev = row;
        rev.reverse();
        assert_eq!(decode_scanline(&rev), Err(BarcodeError::ChecksumMismatch));
    }

    #[test]
    fn empty_row_is_not_a_barcode() {
        assert_eq!(decode_scanline(&[]), Err(BarcodeError::NoBarcodeFound));
    }
}
