//! The 128-bit user key shared by the key schedule and the chaotic maps.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KeyError {
    #[error("key must be 32 hex characters (128 bits), got {0} characters")]
    Length(usize),
    #[error("key contains non-hex character {0:?}")]
    NonHex(char),
}

/// User-supplied 128-bit secret.
///
/// The same key seeds the CAST-128 key schedule and, through
/// [`crate::lsm::derive_params`], the Logistic-Sine Map parameters behind the
/// dynamic round tables.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Key128([u8; 16]);

impl Key128 {
    pub const fn from_bytes(bytes: [u8; 16]) -> Self {
        Key128(bytes)
    }

    /// Parses exactly 32 hex characters, upper or lower case.
    pub fn from_hex(s: &str) -> Result<Self, KeyError> {
        if s.len() != 32 || !s.is_ascii() {
            return Err(KeyError::Length(s.chars().count()));
        }
        let mut bytes = [0u8; 16];
        for (i, chunk) in s.as_bytes().chunks_exact(2).enumerate() {
            let hi = hex_val(chunk[0] as char)?;
            let lo = hex_val(chunk[1] as char)?;
            bytes[i] = (hi << 4) | lo;
        }
        Ok(Key128(bytes))
    }

    pub fn as_bytes(&self) -> &[u8; 16] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Returns a copy with the given bit (0 = MSB of the first byte) flipped.
    /// Used by the key-sensitivity analyses.
    pub fn flip_bit(&self, bit: usize) -> Self {
        assert!(bit < 128, "bit index out of range");
        let mut bytes = self.0;
        bytes[bit / 8] ^= 0x80 >> (bit % 8);
        Key128(bytes)
    }
}

fn hex_val(c: char) -> Result<u8, KeyError> {
    c.to_digit(16).map(|d| d as u8).ok_or(KeyError::NonHex(c))
}

impl FromStr for Key128 {
    type Err = KeyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Key128::from_hex(s)
    }
}

impl fmt::Debug for Key128 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Key128({})", self.to_hex())
    }
}

impl fmt::Display for Key128 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}
