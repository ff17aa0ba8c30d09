//! Binary netpbm reader/writer: PGM (P5) for grayscale, PPM (P6) for RGB,
//! 8-bit samples with maxval 255. These are the canonical corpus formats.

use std::fs;
use std::path::Path;

use super::{ImageBuffer, PipelineError};

/// Parses a binary PGM/PPM from memory. Header tokens may be separated by
/// arbitrary whitespace and `#` comments; exactly one whitespace byte
/// separates the maxval from the sample data.
pub fn read_pnm_bytes(data: &[u8]) -> Result<ImageBuffer, PipelineError> {
    let channels = match data.get(0..2) {
        Some(b"P5") => 1u8,
        Some(b"P6") => 3u8,
        _ => {
            return Err(PipelineError::Format(
                "not a binary PGM (P5) or PPM (P6) file".into(),
            ))
        }
    };
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in &mut fields {
        *field = parse_header_int(data, &mut pos)?;
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(PipelineError::Format(format!(
            "maxval {maxval} unsupported; only 8-bit images (maxval 255)"
        )));
    }
    // single whitespace byte between header and raster
    match data.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => {
            return Err(PipelineError::Format(
                "missing whitespace before raster data".into(),
            ))
        }
    }
    let expected = width as usize * height as usize * channels as usize;
    let raster = data
        .get(pos..pos + expected)
        .ok_or_else(|| PipelineError::Format("truncated raster data".into()))?;
    ImageBuffer::new(width, height, channels, raster.to_vec())
}

fn parse_header_int(data: &[u8], pos: &mut usize) -> Result<u32, PipelineError> {
    // skip whitespace and comments
    loop {
        match data.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(&b) = data.get(*pos) {
                    *pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            }
            _ => break,
        }
    }
    let start = *pos;
    while data.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    if *pos == start {
        return Err(PipelineError::Format("malformed header integer".into()));
    }
    std::str::from_utf8(&data[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| PipelineError::Format("header integer out of range".into()))
}

pub fn read_pnm(path: &Path) -> Result<ImageBuffer, PipelineError> {
    read_pnm_bytes(&fs::read(path)?)
}

/// Serializes to P5 (grayscale) or P6 (RGB).
pub fn write_pnm_bytes(img: &ImageBuffer) -> Vec<u8> {
    let magic = if img.channels() == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

pub fn write_pnm(path: &Path, img: &ImageBuffer) -> Result<(), PipelineError> {
    fs::write(path, write_pnm_bytes(img))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrips_grayscale_and_rgb() {
        for channels in [1u8, 3] {
            let len = 8 * 4 * channels as usize;
            let img =
                ImageBuffer::new(8, 4, channels, (0..len).map(|i| i as u8).collect()).unwrap();
            let bytes = write_pnm_bytes(&img);
            assert_eq!(read_pnm_bytes(&bytes).unwrap(), img);
        }
    }

    #[test]
    fn skips_comments_and_padding() {
        let mut data = b"P5 # a comment\n# another\n  2\t2 # dims\n255\n".to_vec();
        data.extend_from_slice(&[10, 20, 30, 40]);
        let img = read_pnm_bytes(&data).unwrap();
        assert_eq!((img.width(), img.height()), (2, 2));
        assert_eq!(img.pixels(), &[10, 20, 30, 40]);
    }

    #[test]
    fn rejects_ascii_variants_and_bad_magic() {
        assert!(read_pnm_bytes(b"P2\n2 2\n255\n0 0 0 0").is_err());
        assert!(read_pnm_bytes(b"BM123").is_err());
        assert!(read_pnm_bytes(b"").is_err());
    }

    #[test]
    fn rejects_wrong_maxval_and_truncation() {
        assert!(matches!(
            read_pnm_bytes(b"P5\n2 2\n65535\n\0\0\0\0\0\0\0\0"),
            Err(PipelineError::Format(_))
        ));
        assert!(matches!(
            read_pnm_bytes(b"P5\n4 4\n255\nshort"),
            Err(PipelineError::Format(_))
        ));
    }
}
