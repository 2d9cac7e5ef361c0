use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::BarcodeError;

/// Weighted (1,3) mod-10 check digit over 12 payload digits, positions
/// counted from 1 on the left.
pub fn checksum_digit(payload: &[u8]) -> Result<u8, BarcodeError> {
    if payload.len() != 12 {
        return Err(BarcodeError::BadLength {
            expected: 12,
            found: payload.len(),
        });
    }
    let mut sum = 0u32;
    for (i, &d) in payload.iter().enumerate() {
        if d > 9 {
            return Err(BarcodeError::InvalidDigit);
        }
        let weight = if i % 2 == 0 { 1 } else { 3 };
        sum += weight * d as u32;
    }
    Ok(((10 - sum % 10) % 10) as u8)
}

/// Checks the 13th digit against the first twelve.
pub fn validate(digits: &[u8]) -> Result<bool, BarcodeError> {
    if digits.len() != 13 {
        return Err(BarcodeError::BadLength {
            expected: 13,
            found: digits.len(),
        });
    }
    Ok(checksum_digit(&digits[..12])? == digits[12])
}

/// Parses a string of decimal digits into digit values.
pub fn parse_digits(text: &str) -> Result<Vec<u8>, BarcodeError> {
    text.chars()
        .map(|c| {
            c.to_digit(10)
                .map(|d| d as u8)
                .ok_or(BarcodeError::InvalidDigit)
        })
        .collect()
}

/// A checksum-valid EAN-13 value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ean13([u8; 13]);

impl Ean13 {
    pub fn from_digits(digits: [u8; 13]) -> Result<Self, BarcodeError> {
        if validate(&digits)? {
            Ok(Self(digits))
        } else {
            Err(BarcodeError::ChecksumMismatch)
        }
    }

    /// Appends the computed check digit to a 12-digit payload.
    pub fn from_payload(payload: [u8; 12]) -> Result<Self, BarcodeError> {
        let check = checksum_digit(&payload)?;
        let mut digits = [0u8; 13];
        digits[..12].copy_from_slice(&payload);
        digits[12] = check;
        Ok(Self(digits))
    }

    pub fn digits(&self) -> &[u8; 13] {
        &self.0
    }

    pub fn leading_digit(&self) -> u8 {
        self.0[0]
    }
}

impl fmt::Display for Ean13 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in self.0 {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl FromStr for Ean13 {
    type Err = BarcodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = parse_digits(s)?;
        let digits: [u8; 13] = digits.try_into().map_err(|v: Vec<u8>| BarcodeError::BadLength {
            expected: 13,
            found: v.len(),
        })?;
        Self::from_digits(digits)
    }
}

impl Serialize for Ean13 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Ean13 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}
