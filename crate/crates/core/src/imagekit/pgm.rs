use super::GrayImage;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PgmError {
    #[error("not a binary PGM (magic must be P5)")]
    BadMagic,
    #[error("malformed PGM header: {0}")]
    BadHeader(&'static str),
    #[error("unsupported maxval {0} (only 255 is accepted)")]
    UnsupportedMaxval(u32),
    #[error("payload has {found} octets, expected {expected}")]
    TruncatedPayload { expected: usize, found: usize },
}

impl PgmError {
    pub fn code(&self) -> &'static str {
        match self {
            PgmError::BadMagic => "bad_magic",
            PgmError::BadHeader(_) => "bad_header",
            PgmError::UnsupportedMaxval(_) => "unsupported_maxval",
            PgmError::TruncatedPayload { .. } => "truncated_payload",
        }
    }
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &'static str) -> Result<u32, PgmError> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(PgmError::BadHeader(what));
        }
        // The token must end at whitespace (or a comment), not run into garbage.
        match self.bytes.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() || *b == b'#' => {}
            _ => return Err(PgmError::BadHeader(what)),
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or(PgmError::BadHeader(what))
    }
}

/// Parses a binary PGM (P5, maxval 255). Octets after the pixel payload are
/// ignored.
pub fn load_pgm(bytes: &[u8]) -> Result<GrayImage, PgmError> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(PgmError::BadMagic);
    }
    let mut cursor = HeaderCursor { bytes, pos: 2 };
    match bytes.get(2) {
        Some(b) if b.is_ascii_whitespace() || *b == b'#' => {}
        _ => return Err(PgmError::BadMagic),
    }
    let width = cursor.number("width")? as usize;
    let height = cursor.number("height")? as usize;
    let maxval = cursor.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(PgmError::BadHeader("zero dimension"));
    }
    if maxval != 255 {
        return Err(PgmError::UnsupportedMaxval(maxval));
    }
    // exactly one whitespace octet separates maxval from the raster
    let payload_start = cursor.pos + 1;
    let expected = width
        .checked_mul(height)
        .ok_or(PgmError::BadHeader("dimensions overflow"))?;
    let available = bytes.len().saturating_sub(payload_start);
    if available < expected {
        return Err(PgmError::TruncatedPayload {
            expected,
            found: available,
        });
    }
    let pixels = bytes[payload_start..payload_start + expected].to_vec();
    Ok(GrayImage::new(width, height, pixels).expect("dimensions checked above"))
}

pub fn save_pgm(image: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", image.width(), image.height());
    let mut out = Vec::with_capacity(header.len() + image.pixels().len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(image.pixels());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn file(header: &str, payload: &[u8]) -> Vec<u8> {
        let mut v = header.as_bytes().to_vec();
        v.extend_from_slice(payload);
        v
    }

    #[test]
    fn minimal_file() {
        let img = load_pgm(&file("P5\n2 1\n255\n", &[0, 255])).unwrap();
        assert_eq!((img.width(), img.height()), (2, 1));
        assert_eq!(img.pixels(), &[0, 255]);
    }

    #[test]
    fn ascii_variant_rejected() {
        assert_eq!(load_pgm(b"P2\n2 1\n255\n0 255\n"), Err(PgmError::BadMagic));
        assert_eq!(load_pgm(b""), Err(PgmError::BadMagic));
        assert_eq!(load_pgm(b"P55 1 1 255\n\0"), Err(PgmError::BadMagic));
    }

    #[test]
    fn truncated_payload() {
        assert_eq!(
            load_pgm(&file("P5\n3 2\n255\n", &[1, 2, 3, 4, 5])),
            Err(PgmError::TruncatedPayload { expected: 6, found: 5 })
        );
    }

    #[test]
    fn header_errors() {
        assert!(matches!(load_pgm(b"P5\nx 1\n255\n\0"), Err(PgmError::BadHeader(_))));
        assert!(matches!(load_pgm(b"P5\n1\n"), Err(PgmError::BadHeader(_))));
        assert!(matches!(load_pgm(b"P5\n0 1\n255\n"), Err(PgmError::BadHeader(_))));
        assert!(matches!(load_pgm(b"P5\n2a 1\n255\n\0\0"), Err(PgmError::BadHeader(_))));
        assert_eq!(load_pgm(b"P5\n1 1\n65535\n\0\0"), Err(PgmError::UnsupportedMaxval(65535)));
        assert_eq!(load_pgm(b"P5\n1 1\n15\n\0"), Err(PgmError::UnsupportedMaxval(15)));
    }

    #[test]
    fn comments_between_tokens() {
        let img = load_pgm(&file("P5\n# made by hand\n2 # width\n1\n# max\n255\n", &[7, 9])).unwrap();
        assert_eq!(img.pixels(), &[7, 9]);
    }

    #[test]
    fn payload_may_start_with_whitespace_octets() {
        // 10 and 32 are ordinary pixel values once the header is done
        let img = load_pgm(&file("P5\n2 1\n255\n", &[10, 32])).unwrap();
        assert_eq!(img.pixels(), &[10, 32]);
    }

    #[test]
    fn save_examples() {
        let one = GrayImage::new(1, 1, vec![0]).unwrap();
        assert_eq!(save_pgm(&one), file("P5\n1 1\n255\n", &[0]));
        let four = GrayImage::new(2, 2, vec![0, 64, 128, 255]).unwrap();
        assert_eq!(save_pgm(&four), file("P5\n2 2\n255\n", &[0, 64, 128, 255]));
    }

    proptest! {
        #[test]
        fn load_inverts_save(w in 1usize..40, h in 1usize..40, seed in any::<u64>()) {
            let mut rng = crate::rng::SplitMix64::new(seed);
            let pixels = (0..w * h).map(|_| rng.next_u64() as u8).collect();
            let img = GrayImage::new(w, h, pixels).unwrap();
            prop_assert_eq!(load_pgm(&save_pgm(&img)).unwrap(), img);
        }
    }
}
