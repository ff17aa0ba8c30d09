//! The on-disk ciphertext container.
//!
//! Layout (all integers big-endian):
//!
//! ```text
//! magic "CLSM" | version u8 = 1 | mode u8 | flags u8 | channels u8 |
//! width u32 | height u32 | original-length-per-channel u64 |
//! sbox-fingerprint u64 | payload
//! ```
//!
//! Mode is 0 = ECB, 1 = CBC, 2 = CBC2; flag bit 0 marks dynamic tables.
//! Raw (non-image) payloads carry width = height = 0 and a single channel.

use std::fmt;
use std::str::FromStr;

use super::PipelineError;

pub const MAGIC: [u8; 4] = *b"CLSM";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 32;

const FLAG_DYNAMIC: u8 = 0b0000_0001;

/// Block chaining mode.
///
/// `Cbc2` (the default everywhere) runs a forward CBC pass and then a second
/// CBC pass over the intermediate blocks in reverse order, so a change
/// anywhere in the plaintext reaches every ciphertext block. `Ecb` is kept
/// deliberately as the negative control: it diffuses nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChainMode {
    Ecb,
    Cbc,
    #[default]
    Cbc2,
}

impl ChainMode {
    pub fn code(self) -> u8 {
        match self {
            ChainMode::Ecb => 0,
            ChainMode::Cbc => 1,
            ChainMode::Cbc2 => 2,
        }
    }

    pub fn from_code(code: u8) -> Result<Self, PipelineError> {
        match code {
            0 => Ok(ChainMode::Ecb),
            1 => Ok(ChainMode::Cbc),
            2 => Ok(ChainMode::Cbc2),
            other => Err(PipelineError::BadHeader(format!("unknown mode {other}"))),
        }
    }
}

impl fmt::Display for ChainMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChainMode::Ecb => "ecb",
            ChainMode::Cbc => "cbc",
            ChainMode::Cbc2 => "cbc2",
        })
    }
}

impl FromStr for ChainMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ecb" => Ok(ChainMode::Ecb),
            "cbc" => Ok(ChainMode::Cbc),
            "cbc2" => Ok(ChainMode::Cbc2),
            other => Err(format!("unknown mode {other:?} (expected ecb|cbc|cbc2)")),
        }
    }
}

/// Parsed ciphertext container.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CipherImage {
    pub mode: ChainMode,
    pub dynamic: bool,
    pub channels: u8,
    pub width: u32,
    pub height: u32,
    /// Plaintext bytes per channel before block padding.
    pub original_len: u64,
    /// FNV-1a-64 of the dynamic tables; zero in static mode.
    pub fingerprint: u64,
    pub payload: Vec<u8>,
}

/// Payload bytes per channel: the original length rounded up to whole blocks.
pub fn padded_len(original_len: u64) -> u64 {
    original_len.div_ceil(8) * 8
}

impl CipherImage {
    /// True for containers produced from raw byte streams rather than images.
    pub fn is_raw(&self) -> bool {
        self.width == 0 || self.height == 0
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len());
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(self.mode.code());
        out.push(if self.dynamic { FLAG_DYNAMIC } else { 0 });
        out.push(self.channels);
        out.extend_from_slice(&self.width.to_be_bytes());
        out.extend_from_slice(&self.height.to_be_bytes());
        out.extend_from_slice(&self.original_len.to_be_bytes());
        out.extend_from_slice(&self.fingerprint.to_be_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self, PipelineError> {
        if data.len() < HEADER_LEN {
            return Err(PipelineError::BadHeader(format!(
                "container too short ({} bytes)",
                data.len()
            )));
        }
        if data[0..4] != MAGIC {
            return Err(PipelineError::BadHeader("bad magic".into()));
        }
        if data[4] != VERSION {
            return Err(PipelineError::BadHeader(format!(
                "unsupported version {}",
                data[4]
            )));
        }
        let mode = ChainMode::from_code(data[5])?;
        let flags = data[6];
        if flags & !FLAG_DYNAMIC != 0 {
            return Err(PipelineError::BadHeader(format!(
                "unknown flag bits {flags:#04x}"
            )));
        }
        let channels = data[7];
        if channels != 1 && channels != 3 {
            return Err(PipelineError::BadHeader(format!(
                "{channels} channels unsupported"
            )));
        }
        let width = u32::from_be_bytes(data[8..12].try_into().unwrap());
        let height = u32::from_be_bytes(data[12..16].try_into().unwrap());
        let original_len = u64::from_be_bytes(data[16..24].try_into().unwrap());
        let fingerprint = u64::from_be_bytes(data[24..32].try_into().unwrap());

        if width > 0 && height > 0 {
            let plane = u64::from(width) * u64::from(height);
            if plane != original_len {
                return Err(PipelineError::BadHeader(format!(
                    "{width}x{height} image implies {plane} bytes per channel, header says {original_len}"
                )));
            }
        } else if channels != 1 {
            return Err(PipelineError::BadHeader(
                "raw containers must be single-channel".into(),
            ));
        }

        let payload = data[HEADER_LEN..].to_vec();
        let expected = padded_len(original_len) * u64::from(channels);
        if payload.len() as u64 != expected {
            return Err(PipelineError::BadHeader(format!(
                "payload is {} bytes, header implies {expected}",
                payload.len()
            )));
        }
        let dynamic = flags & FLAG_DYNAMIC != 0;
        if !dynamic && fingerprint != 0 {
            return Err(PipelineError::BadHeader(
                "static containers must carry a zero fingerprint".into(),
            ));
        }
        Ok(CipherImage {
            mode,
            dynamic,
            channels,
            width,
            height,
            original_len,
            fingerprint,
            payload,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CipherImage {
        CipherImage {
            mode: ChainMode::Cbc2,
            dynamic: true,
            channels: 1,
            width: 4,
            height: 4,
            original_len: 16,
            fingerprint: 0x0123_4567_89ab_cdef,
            payload: vec![0xAA; 16],
        }
    }

    #[test]
    fn header_layout_is_bit_exact() {
        let bytes = sample().to_bytes();
        let expect_header: Vec<u8> = [
            b"CLSM".as_slice(),
            &[1, 2, 1, 1],
            &4u32.to_be_bytes(),
            &4u32.to_be_bytes(),
            &16u64.to_be_bytes(),
            &0x0123_4567_89ab_cdefu64.to_be_bytes(),
        ]
        .concat();
        assert_eq!(&bytes[..HEADER_LEN], expect_header.as_slice());
        assert_eq!(bytes.len(), HEADER_LEN + 16);
    }

    #[test]
    fn parse_serialize_identity() {
        let c = sample();
        assert_eq!(CipherImage::from_bytes(&c.to_bytes()).unwrap(), c);
    }

    #[test]
    fn tampered_magic_is_rejected() {
        let mut bytes = sample().to_bytes();
        bytes[0] = b'X';
        assert!(matches!(
            CipherImage::from_bytes(&bytes),
            Err(PipelineError::BadHeader(_))
        ));
    }

    #[test]
    fn malformed_headers_are_rejected() {
        let good = sample().to_bytes();

        let mut version = good.clone();
        version[4] = 9;
        assert!(CipherImage::from_bytes(&version).is_err());

        let mut mode = good.clone();
        mode[5] = 7;
        assert!(CipherImage::from_bytes(&mode).is_err());

        let mut truncated = good.clone();
        truncated.truncate(HEADER_LEN + 8);
        assert!(CipherImage::from_bytes(&truncated).is_err());

        assert!(CipherImage::from_bytes(&good[..12]).is_err());
    }

    #[test]
    fn mode_codes_roundtrip() {
        for mode in [ChainMode::Ecb, ChainMode::Cbc, ChainMode::Cbc2] {
            assert_eq!(ChainMode::from_code(mode.code()).unwrap(), mode);
            assert_eq!(mode.to_string().parse::<ChainMode>().unwrap(), mode);
        }
        assert!(ChainMode::from_code(3).is_err());
        assert!("xyz".parse::<ChainMode>().is_err());
    }

    #[test]
    fn padded_len_rounds_to_blocks() {
        assert_eq!(padded_len(0), 0);
        assert_eq!(padded_len(1), 8);
        assert_eq!(padded_len(8), 8);
        assert_eq!(padded_len(9), 16);
        assert_eq!(padded_len(65536), 65536);
    }
}
