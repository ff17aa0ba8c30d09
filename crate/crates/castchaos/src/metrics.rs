//! Security-evaluation metrics: entropy, NPCR, UACI, PSNR, histogram
//! uniformity, and the differential test protocol.
//!
//! Reference points for 8-bit data: two independent uniform arrays sit at
//! NPCR ≈ 99.6094% (= 100·255/256) and UACI ≈ 33.4635%; a uniform histogram
//! has χ² = 0 with 255 degrees of freedom and entropy 8 bits/symbol. The CLI
//! reports come from these exact code paths, never a parallel computation.

use std::time::Instant;

use serde::Serialize;

use thiserror::Error;

use crate::image::container::{padded_len, ChainMode, CipherImage};
use crate::image::pipeline::{decrypt_image, encrypt_image};
use crate::image::{ImageBuffer, PipelineError};
use crate::key::Key128;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("metric input must be non-empty")]
    EmptyInput,
    #[error("inputs must have equal length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
}

/// Degrees of freedom of the 256-bin uniformity test.
pub const CHI_SQUARE_DOF: u32 = 255;

/// Runs used for the reported timing medians.
pub const TIMING_REPS: u32 = 11;

fn check_pair(a: &[u8], b: &[u8]) -> Result<(), MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    Ok(())
}

/// 256-bin intensity histogram.
pub fn histogram(data: &[u8]) -> Result<[u64; 256], MetricsError> {
    if data.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut hist = [0u64; 256];
    for &b in data {
        hist[b as usize] += 1;
    }
    Ok(hist)
}

/// Shannon entropy in bits/symbol from a histogram.
pub fn entropy_from_histogram(hist: &[u64; 256]) -> f64 {
    let total: u64 = hist.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    -hist
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.log2()
        })
        .sum::<f64>()
}

/// Shannon entropy of the byte distribution, `0 ≤ H ≤ 8`.
pub fn shannon_entropy(data: &[u8]) -> Result<f64, MetricsError> {
    Ok(entropy_from_histogram(&histogram(data)?))
}

/// Number of Pixels Change Rate between two equal-length arrays, percent.
pub fn npcr(a: &[u8], b: &[u8]) -> Result<f64, MetricsError> {
    check_pair(a, b)?;
    let differing = a.iter().zip(b).filter(|(x, y)| x != y).count();
    Ok(100.0 * differing as f64 / a.len() as f64)
}

/// Unified Average Changing Intensity, percent.
pub fn uaci(a: &[u8], b: &[u8]) -> Result<f64, MetricsError> {
    check_pair(a, b)?;
    let sum: u64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| u64::from(x.abs_diff(y)))
        .sum();
    Ok(100.0 * sum as f64 / (255.0 * a.len() as f64))
}

/// Peak signal-to-noise ratio in dB; `+inf` when the inputs are identical.
/// Between a plaintext and its cipher image, lower means better concealment.
pub fn psnr(orig: &[u8], other: &[u8]) -> Result<f64, MetricsError> {
    check_pair(orig, other)?;
    let sq_sum: u64 = orig
        .iter()
        .zip(other)
        .map(|(&x, &y)| {
            let d = u64::from(x.abs_diff(y));
            d * d
        })
        .sum();
    if sq_sum == 0 {
        return Ok(f64::INFINITY);
    }
    let mse = sq_sum as f64 / orig.len() as f64;
    Ok(10.0 * (255.0 * 255.0 / mse).log10())
}

/// χ² statistic of the histogram against the uniform distribution
/// ([`CHI_SQUARE_DOF`] degrees of freedom).
pub fn chi_square_uniformity(hist: &[u64; 256]) -> f64 {
    let total: u64 = hist.iter().sum();
    let expected = total as f64 / 256.0;
    hist.iter()
        .map(|&o| {
            let d = o as f64 - expected;
            d * d / expected
        })
        .sum()
}

/// The differential-test protocol: encrypt, bump the center pixel of channel
/// 0 by one (mod 256), re-encrypt under the same key, and compare the two
/// cipher payloads. Returns (NPCR, UACI) in percent.
pub fn differential_test(
    img: &ImageBuffer,
    key: &Key128,
    mode: ChainMode,
    dynamic: bool,
) -> Result<(f64, f64), PipelineError> {
    let base = encrypt_image(img, key, mode, dynamic)?;
    let perturbed = perturb_center(img, 1);
    let tweaked = encrypt_image(&perturbed, key, mode, dynamic)?;
    let n = npcr(&base.payload, &tweaked.payload).expect("payloads have equal length");
    let u = uaci(&base.payload, &tweaked.payload).expect("payloads have equal length");
    Ok((n, u))
}

/// Adds `delta` (mod 256) to channel 0 of the pixel at (⌊w/2⌋, ⌊h/2⌋).
pub fn perturb_center(img: &ImageBuffer, delta: u8) -> ImageBuffer {
    let mut pixels = img.pixels().to_vec();
    let idx = ((img.height() as usize / 2) * img.width() as usize
        + img.width() as usize / 2)
        * img.channels() as usize;
    pixels[idx] = pixels[idx].wrapping_add(delta);
    ImageBuffer::new(img.width(), img.height(), img.channels(), pixels)
        .expect("dimensions unchanged")
}

/// Median wall-clock milliseconds over `reps` runs of `f`.
pub fn median_ms(reps: u32, mut f: impl FnMut()) -> f64 {
    let reps = reps.max(1);
    let mut samples: Vec<f64> = (0..reps)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed().as_secs_f64() * 1e3
        })
        .collect();
    samples.sort_by(f64::total_cmp);
    let mid = samples.len() / 2;
    if samples.len() % 2 == 1 {
        samples[mid]
    } else {
        (samples[mid - 1] + samples[mid]) / 2.0
    }
}

/// Per-channel statistics of a cipher payload.
#[derive(Debug, Clone, Serialize)]
pub struct ChannelStats {
    pub channel: u8,
    pub entropy: f64,
    pub histogram_chi2: f64,
}

/// The full report the CLI emits as JSON or CSV.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    pub image: String,
    pub mode: String,
    pub dynamic: bool,
    pub per_channel: Vec<ChannelStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub npcr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uaci: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psnr_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub encrypt_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decrypt_ms: Option<f64>,
    pub sbox_fingerprint: String,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One CSV row per channel, scalar fields repeated.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "image,mode,dynamic,channel,entropy,histogram_chi2,npcr,uaci,psnr_db,encrypt_ms,decrypt_ms,sbox_fingerprint\n",
        );
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x}"));
        for ch in &self.per_channel {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                self.image,
                self.mode,
                self.dynamic,
                ch.channel,
                ch.entropy,
                ch.histogram_chi2,
                opt(self.npcr),
                opt(self.uaci),
                opt(self.psnr_db),
                opt(self.encrypt_ms),
                opt(self.decrypt_ms),
                self.sbox_fingerprint,
            ));
        }
        out
    }
}

fn payload_channel_stats(c: &CipherImage) -> Vec<ChannelStats> {
    let per_channel = padded_len(c.original_len) as usize;
    c.payload
        .chunks_exact(per_channel.max(1))
        .enumerate()
        .map(|(i, plane)| {
            let hist = histogram(plane).expect("payload channels are non-empty");
            ChannelStats {
                channel: i as u8,
                entropy: entropy_from_histogram(&hist),
                histogram_chi2: chi_square_uniformity(&hist),
            }
        })
        .collect()
}

/// Full evaluation of one plaintext image under a key: encrypts (timing the
/// median of `timing_reps` runs), decrypts, and fills every report field.
pub fn image_report(
    name: &str,
    img: &ImageBuffer,
    key: &Key128,
    mode: ChainMode,
    dynamic: bool,
    timing_reps: u32,
) -> Result<MetricsReport, PipelineError> {
    let sealed = encrypt_image(img, key, mode, dynamic)?;
    let encrypt_ms = median_ms(timing_reps, || {
        encrypt_image(img, key, mode, dynamic).expect("encryption already succeeded once");
    });
    let decrypt_ms = median_ms(timing_reps, || {
        decrypt_image(&sealed, key).expect("decryption of a fresh container");
    });

    let plain_planar: Vec<u8> = (0..img.channels()).flat_map(|ch| img.plane(ch)).collect();
    let (n, u) = differential_test(img, key, mode, dynamic)?;

    Ok(MetricsReport {
        image: name.to_string(),
        mode: mode.to_string(),
        dynamic,
        per_channel: payload_channel_stats(&sealed),
        npcr: Some(n),
        uaci: Some(u),
        psnr_db: Some(psnr(&plain_planar, &sealed.payload).expect("equal planar lengths")),
        encrypt_ms: Some(encrypt_ms),
        decrypt_ms: Some(decrypt_ms),
        sbox_fingerprint: format!("{:#018x}", sealed.fingerprint),
    })
}

/// Payload-only statistics of an existing container (no key required).
pub fn container_report(name: &str, c: &CipherImage) -> MetricsReport {
    MetricsReport {
        image: name.to_string(),
        mode: c.mode.to_string(),
        dynamic: c.dynamic,
        per_channel: payload_channel_stats(c),
        npcr: None,
        uaci: None,
        psnr_db: None,
        encrypt_ms: None,
        decrypt_ms: None,
        sbox_fingerprint: format!("{:#018x}", c.fingerprint),
    }
}

/// 256-row CSV of per-channel histograms, for external plotting.
pub fn histogram_csv(hists: &[[u64; 256]]) -> String {
    let mut out = String::from("value");
    for i in 0..hists.len() {
        out.push_str(&format!(",count_c{i}"));
    }
    out.push('\n');
    for v in 0..256 {
        out.push_str(&v.to_string());
        for hist in hists {
            out.push_str(&format!(",{}", hist[v]));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_of_constant_data_is_zero() {
        assert_eq!(shannon_entropy(&[42u8; 1000]).unwrap(), 0.0);
    }

    #[test]
    fn entropy_of_exactly_uniform_data_is_eight() {
        // 256 copies of each byte value: every p = 1/256 exactly
        let data: Vec<u8> = (0..65536).map(|i| (i % 256) as u8).collect();
        assert_eq!(shannon_entropy(&data).unwrap(), 8.0);
    }

    #[test]
    fn entropy_is_order_invariant_and_histogram_consistent() {
        let data: Vec<u8> = (0..10_000).map(|i| (i * 7 % 251) as u8).collect();
        let mut shuffled = data.clone();
        shuffled.reverse();
        shuffled.rotate_left(1234);
        assert_eq!(
            shannon_entropy(&data).unwrap(),
            shannon_entropy(&shuffled).unwrap()
        );
        assert_eq!(
            shannon_entropy(&data).unwrap(),
            entropy_from_histogram(&histogram(&data).unwrap())
        );
    }

    #[test]
    fn empty_input_is_rejected() {
        assert_eq!(shannon_entropy(&[]), Err(MetricsError::EmptyInput));
        assert_eq!(histogram(&[]), Err(MetricsError::EmptyInput));
        assert_eq!(npcr(&[], &[]), Err(MetricsError::EmptyInput));
    }

    #[test]
    fn npcr_extremes() {
        assert_eq!(npcr(&[1, 2, 3], &[1, 2, 3]).unwrap(), 0.0);
        assert_eq!(npcr(&[0, 0, 0], &[1, 2, 3]).unwrap(), 100.0);
        assert_eq!(
            npcr(&[0, 1], &[0, 1, 2]),
            Err(MetricsError::LengthMismatch { left: 2, right: 3 })
        );
    }

    #[test]
    fn uaci_extremes() {
        assert_eq!(uaci(&[9; 16], &[9; 16]).unwrap(), 0.0);
        assert_eq!(uaci(&[0; 16], &[255; 16]).unwrap(), 100.0);
    }

    #[test]
    fn metrics_are_symmetric() {
        let a: Vec<u8> = (0..512).map(|i| (i * 13 % 256) as u8).collect();
        let b: Vec<u8> = (0..512).map(|i| (i * 101 % 256) as u8).collect();
        assert_eq!(npcr(&a, &b).unwrap(), npcr(&b, &a).unwrap());
        assert_eq!(uaci(&a, &b).unwrap(), uaci(&b, &a).unwrap());
    }

    #[test]
    fn psnr_sentinels() {
        let a = [7u8; 64];
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        // MSE = 255²  →  0 dB
        assert_eq!(psnr(&[0u8; 64], &[255u8; 64]).unwrap(), 0.0);
    }

    #[test]
    fn chi_square_of_uniform_histogram_is_zero() {
        let hist = [16u64; 256];
        assert_eq!(chi_square_uniformity(&hist), 0.0);
    }

    #[test]
    fn chi_square_of_constant_image_matches_direct_formula() {
        // 65536 identical bytes: 255 empty bins of expected 256 plus one bin
        // holding everything → 255·256 + (65536−256)²/256 = 16 711 680
        let hist = histogram(&vec![99u8; 65536]).unwrap();
        assert_eq!(chi_square_uniformity(&hist), 16_711_680.0);
    }

    #[test]
    fn zero_perturbation_changes_nothing() {
        let img = ImageBuffer::new(8, 8, 1, (0..64).collect()).unwrap();
        let same = perturb_center(&img, 0);
        assert_eq!(same, img);
        let key = Key128::from_bytes([1; 16]);
        let a = encrypt_image(&img, &key, ChainMode::Cbc2, false).unwrap();
        let b = encrypt_image(&same, &key, ChainMode::Cbc2, false).unwrap();
        assert_eq!(npcr(&a.payload, &b.payload).unwrap(), 0.0);
        assert_eq!(uaci(&a.payload, &b.payload).unwrap(), 0.0);
    }

    #[test]
    fn median_ms_is_finite_and_positive() {
        let ms = median_ms(5, || {
            std::hint::black_box((0..1000).sum::<u64>());
        });
        assert!(ms.is_finite() && ms >= 0.0);
    }

    #[test]
    fn csv_has_one_row_per_channel() {
        let img = ImageBuffer::new(8, 8, 3, vec![7; 192]).unwrap();
        let key = Key128::from_bytes([2; 16]);
        let report = image_report("t", &img, &key, ChainMode::Cbc2, true, 1).unwrap();
        let csv = report.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("image,mode,dynamic,channel"));
        let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(json["per_channel"].as_array().unwrap().len(), 3);
        assert!(json["npcr"].is_number());
    }

    #[test]
    fn histogram_csv_shape() {
        let hist = histogram(&[0u8, 0, 1, 255]).unwrap();
        let csv = histogram_csv(&[hist]);
        assert_eq!(csv.lines().count(), 257);
        assert!(csv.starts_with("value,count_c0\n0,2\n1,1\n"));
        assert!(csv.ends_with("255,1\n"));
    }
}
