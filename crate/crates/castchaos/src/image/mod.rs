//! Image buffers, preprocessing, file formats, and the encryption pipeline.

pub mod container;
pub mod pipeline;
pub mod pnm;

use thiserror::Error;

use crate::sbox::SBoxError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("bad dimensions: {0}")]
    BadDimensions(String),
    #[error("bad container header: {0}")]
    BadHeader(String),
    #[error("S-box fingerprint mismatch: header {header:#018x}, recomputed {computed:#018x} (wrong key or mismatched table generation)")]
    SBoxMismatch { header: u64, computed: u64 },
    #[error("unsupported or malformed image data: {0}")]
    Format(String),
    #[error(transparent)]
    SBox(#[from] SBoxError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// 8-bit pixel matrix, row-major, samples interleaved per pixel
/// (`RGBRGB…` for 3 channels). Channels are separated into planes before
/// encryption so each is processed independently.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    width: u32,
    height: u32,
    channels: u8,
    pixels: Vec<u8>,
}

impl ImageBuffer {
    pub fn new(
        width: u32,
        height: u32,
        channels: u8,
        pixels: Vec<u8>,
    ) -> Result<Self, PipelineError> {
        if width == 0 || height == 0 {
            return Err(PipelineError::BadDimensions(format!(
                "{width}x{height} image"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(PipelineError::Format(format!(
                "{channels} channels unsupported (grayscale or RGB only)"
            )));
        }
        let expected = width as usize * height as usize * channels as usize;
        if pixels.len() != expected {
            return Err(PipelineError::BadDimensions(format!(
                "{}x{}x{} needs {} bytes, got {}",
                width,
                height,
                channels,
                expected,
                pixels.len()
            )));
        }
        Ok(ImageBuffer {
            width,
            height,
            channels,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// Bytes per channel plane.
    pub fn plane_len(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Extracts channel `c` as a contiguous plane.
    pub fn plane(&self, c: u8) -> Vec<u8> {
        assert!(c < self.channels);
        let n = self.channels as usize;
        self.pixels[c as usize..]
            .iter()
            .step_by(n)
            .copied()
            .collect()
    }

    /// Rebuilds an interleaved image from per-channel planes.
    pub fn from_planes(
        width: u32,
        height: u32,
        planes: &[Vec<u8>],
    ) -> Result<Self, PipelineError> {
        let channels = planes.len() as u8;
        let plane_len = width as usize * height as usize;
        if planes.iter().any(|p| p.len() != plane_len) {
            return Err(PipelineError::BadDimensions(
                "plane length does not match dimensions".into(),
            ));
        }
        let mut pixels = vec![0u8; plane_len * channels as usize];
        for (c, plane) in planes.iter().enumerate() {
            for (i, &v) in plane.iter().enumerate() {
                pixels[i * channels as usize + c] = v;
            }
        }
        ImageBuffer::new(width, height, channels, pixels)
    }

    pub fn pixel(&self, x: u32, y: u32, c: u8) -> u8 {
        let idx = (y as usize * self.width as usize + x as usize) * self.channels as usize
            + c as usize;
        self.pixels[idx]
    }
}

/// Integer RGB→luma conversion: `(77R + 150G + 29B + 128) >> 8`.
fn luma(r: u8, g: u8, b: u8) -> u8 {
    ((77 * u32::from(r) + 150 * u32::from(g) + 29 * u32::from(b) + 128) >> 8) as u8
}

/// Optional grayscale conversion followed by nearest-neighbor resize.
///
/// Source pixel for target (x, y) is `(x·sw/tw, y·sh/th)` with integer
/// division, so a 512→256 downscale reads source (2x, 2y) exactly. Errors
/// with `BadDimensions` when the resulting channel plane is not a multiple of
/// the 8-byte block size.
pub fn preprocess(
    img: &ImageBuffer,
    target: Option<(u32, u32)>,
    grayscale: bool,
) -> Result<ImageBuffer, PipelineError> {
    let gray = if grayscale && img.channels == 3 {
        let mut pixels = Vec::with_capacity(img.plane_len());
        for px in img.pixels.chunks_exact(3) {
            pixels.push(luma(px[0], px[1], px[2]));
        }
        ImageBuffer::new(img.width, img.height, 1, pixels)?
    } else {
        img.clone()
    };

    let (tw, th) = target.unwrap_or((gray.width, gray.height));
    if tw == 0 || th == 0 {
        return Err(PipelineError::BadDimensions(
            "target dimensions must be positive".into(),
        ));
    }

    let resized = if (tw, th) == (gray.width, gray.height) {
        gray
    } else {
        let n = gray.channels as usize;
        let mut pixels = vec![0u8; tw as usize * th as usize * n];
        for y in 0..th {
            let sy = (u64::from(y) * u64::from(gray.height) / u64::from(th)) as u32;
            for x in 0..tw {
                let sx = (u64::from(x) * u64::from(gray.width) / u64::from(tw)) as u32;
                for c in 0..gray.channels {
                    pixels[(y as usize * tw as usize + x as usize) * n + c as usize] =
                        gray.pixel(sx, sy, c);
                }
            }
        }
        ImageBuffer::new(tw, th, gray.channels, pixels)?
    };

    if resized.plane_len() % 8 != 0 {
        return Err(PipelineError::BadDimensions(format!(
            "{}x{} plane ({} bytes) is not a multiple of the 8-byte block",
            resized.width,
            resized.height,
            resized.plane_len()
        )));
    }
    Ok(resized)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient(width: u32, height: u32, channels: u8) -> ImageBuffer {
        let len = width as usize * height as usize * channels as usize;
        let pixels = (0..len).map(|i| (i % 256) as u8).collect();
        ImageBuffer::new(width, height, channels, pixels).unwrap()
    }

    #[test]
    fn identity_resize_leaves_image_unchanged() {
        let img = gradient(16, 16, 1);
        assert_eq!(preprocess(&img, Some((16, 16)), false).unwrap(), img);
        assert_eq!(preprocess(&img, None, false).unwrap(), img);
    }

    #[test]
    fn halving_reads_every_second_pixel() {
        let img = gradient(32, 32, 1);
        let small = preprocess(&img, Some((16, 16)), false).unwrap();
        for y in 0..16 {
            for x in 0..16 {
                assert_eq!(small.pixel(x, y, 0), img.pixel(2 * x, 2 * y, 0));
            }
        }
    }

    #[test]
    fn luma_corners() {
        assert_eq!(luma(255, 255, 255), 255);
        assert_eq!(luma(0, 0, 0), 0);
    }

    #[test]
    fn grayscale_conversion_collapses_channels() {
        let img = gradient(8, 8, 3);
        let gray = preprocess(&img, None, true).unwrap();
        assert_eq!(gray.channels(), 1);
        assert_eq!(gray.pixel(0, 0, 0), luma(0, 1, 2));
    }

    #[test]
    fn non_block_aligned_plane_is_rejected() {
        let img = gradient(16, 16, 1);
        let err = preprocess(&img, Some((3, 3)), false).unwrap_err();
        assert!(matches!(err, PipelineError::BadDimensions(_)));
    }

    #[test]
    fn zero_target_is_rejected() {
        let img = gradient(8, 8, 1);
        assert!(matches!(
            preprocess(&img, Some((0, 8)), false),
            Err(PipelineError::BadDimensions(_))
        ));
    }

    #[test]
    fn planes_split_and_rejoin() {
        let img = gradient(8, 4, 3);
        let planes: Vec<Vec<u8>> = (0..3).map(|c| img.plane(c)).collect();
        assert!(planes.iter().all(|p| p.len() == img.plane_len()));
        let rebuilt = ImageBuffer::from_planes(8, 4, &planes).unwrap();
        assert_eq!(rebuilt, img);
    }
}
