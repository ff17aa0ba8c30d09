//! Cryptographic quality measures for 8-bit S-boxes.
//!
//! Nonlinearity is computed by exhausting the Walsh spectrum: for every
//! nonzero output mask the 256-point fast Walsh–Hadamard transform gives the
//! correlations with all affine functions, and the minimum over masks of
//! `128 − max|W|/2` is the reported value. Differential uniformity exhausts
//! the difference distribution table. Both sweeps are embarrassingly
//! parallel; with the `parallel` feature they fan out over rayon, and the
//! `_seq` variants keep the single-threaded reference path callable for
//! benchmarks.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use serde::Serialize;

use crate::sbox::SBox8;

/// Quality summary of one S-box.
#[derive(Debug, Clone, Serialize)]
pub struct SBoxQuality {
    /// min over output masks of 128 − max|Walsh|/2; 112 for AES, ~92 for a
    /// random permutation, 0 for anything affine.
    pub nonlinearity: u32,
    /// sac[i][j]: probability that flipping input bit i flips output bit j.
    pub sac: [[f64; 8]; 8],
    /// Mean |SAC entry − 0.5|, the scalar avalanche summary.
    pub sac_mean_abs_dev: f64,
    /// Max DDT entry over nonzero input differences; 4 for AES, 256 for the
    /// identity.
    pub differential_uniformity: u32,
    pub fixed_points: u32,
}

/// Full quality evaluation of one S-box.
pub fn analyze(s: &SBox8) -> SBoxQuality {
    let sac = sac_matrix(s);
    SBoxQuality {
        nonlinearity: nonlinearity(s),
        sac,
        sac_mean_abs_dev: sac_mean_abs_dev(&sac),
        differential_uniformity: differential_uniformity(s),
        fixed_points: fixed_points(s),
    }
}

pub fn sac_mean_abs_dev(sac: &[[f64; 8]; 8]) -> f64 {
    let sum: f64 = sac
        .iter()
        .flat_map(|row| row.iter())
        .map(|&e| (e - 0.5).abs())
        .sum();
    sum / 64.0
}

#[inline]
fn parity(x: u8) -> u8 {
    (x.count_ones() & 1) as u8
}

/// Largest |Walsh coefficient| of the component function `x ↦ v·s(x)`.
fn walsh_max(table: &[u8; 256], v: u8) -> i32 {
    let mut w = [0i32; 256];
    for (x, slot) in w.iter_mut().enumerate() {
        *slot = 1 - 2 * i32::from(parity(v & table[x]));
    }
    let mut step = 1;
    while step < 256 {
        let mut base = 0;
        while base < 256 {
            for i in base..base + step {
                let (a, b) = (w[i], w[i + step]);
                w[i] = a + b;
                w[i + step] = a - b;
            }
            base += step * 2;
        }
        step *= 2;
    }
    w.iter().map(|c| c.abs()).max().unwrap()
}

fn nl_for_mask(table: &[u8; 256], v: u8) -> u32 {
    128 - (walsh_max(table, v) / 2) as u32
}

/// Nonlinearity over all 255 nonzero output masks.
pub fn nonlinearity(s: &SBox8) -> u32 {
    let table = s.table();
    #[cfg(feature = "parallel")]
    {
        (1..=255u8)
            .into_par_iter()
            .map(|v| nl_for_mask(table, v))
            .min()
            .unwrap()
    }
    #[cfg(not(feature = "parallel"))]
    {
        nonlinearity_seq(s)
    }
}

/// Single-threaded nonlinearity, kept callable for the seq/par benchmarks.
pub fn nonlinearity_seq(s: &SBox8) -> u32 {
    let table = s.table();
    (1..=255u8).map(|v| nl_for_mask(table, v)).min().unwrap()
}

/// Strict-avalanche matrix: entry (i,j) is the fraction of inputs for which
/// flipping input bit i flips output bit j. Ideal value 0.5 everywhere.
pub fn sac_matrix(s: &SBox8) -> [[f64; 8]; 8] {
    let table = s.table();
    let mut sac = [[0.0f64; 8]; 8];
    for (i, row) in sac.iter_mut().enumerate() {
        let mask = 1u8 << i;
        let mut counts = [0u32; 8];
        for x in 0..=255u8 {
            let diff = table[x as usize] ^ table[(x ^ mask) as usize];
            for (j, count) in counts.iter_mut().enumerate() {
                *count += u32::from((diff >> j) & 1);
            }
        }
        for (j, &count) in counts.iter().enumerate() {
            row[j] = f64::from(count) / 256.0;
        }
    }
    sac
}

fn ddt_row_max(table: &[u8; 256], a: u8) -> u32 {
    let mut counts = [0u32; 256];
    for x in 0..=255u8 {
        let d = table[(x ^ a) as usize] ^ table[x as usize];
        counts[d as usize] += 1;
    }
    counts.into_iter().max().unwrap()
}

/// Max entry of the difference distribution table over nonzero input
/// differences.
pub fn differential_uniformity(s: &SBox8) -> u32 {
    let table = s.table();
    #[cfg(feature = "parallel")]
    {
        (1..=255u8)
            .into_par_iter()
            .map(|a| ddt_row_max(table, a))
            .max()
            .unwrap()
    }
    #[cfg(not(feature = "parallel"))]
    {
        differential_uniformity_seq(s)
    }
}

/// Single-threaded differential uniformity, kept callable for the benchmarks.
pub fn differential_uniformity_seq(s: &SBox8) -> u32 {
    let table = s.table();
    (1..=255u8).map(|a| ddt_row_max(table, a)).max().unwrap()
}

pub fn fixed_points(s: &SBox8) -> u32 {
    s.table()
        .iter()
        .enumerate()
        .filter(|&(x, &y)| x as u8 == y)
        .count() as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_linear() {
        let id = SBox8::identity();
        assert_eq!(nonlinearity(&id), 0);
        assert_eq!(nonlinearity_seq(&id), 0);
    }

    #[test]
    fn identity_sac_is_the_unit_matrix() {
        let sac = sac_matrix(&SBox8::identity());
        for (i, row) in sac.iter().enumerate() {
            for (j, &e) in row.iter().enumerate() {
                assert_eq!(e, if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn identity_differential_uniformity_is_total() {
        // s(x⊕a) ⊕ s(x) = a for every x
        assert_eq!(differential_uniformity(&SBox8::identity()), 256);
        assert_eq!(differential_uniformity_seq(&SBox8::identity()), 256);
    }

    #[test]
    fn identity_has_256_fixed_points() {
        assert_eq!(fixed_points(&SBox8::identity()), 256);
    }

    #[test]
    fn seq_and_parallel_paths_agree() {
        let params = crate::lsm::LsmParams::new(4.75, 4.75, 0.5, 1000).unwrap();
        let s = crate::sbox::generate_sbox(&params).unwrap();
        assert_eq!(nonlinearity(&s), nonlinearity_seq(&s));
        assert_eq!(differential_uniformity(&s), differential_uniformity_seq(&s));
    }

    #[test]
    fn analyze_populates_all_fields() {
        let params = crate::lsm::LsmParams::new(4.75, 4.75, 0.5, 1000).unwrap();
        let s = crate::sbox::generate_sbox(&params).unwrap();
        let q = analyze(&s);
        assert!(q.nonlinearity > 0);
        assert!(q.differential_uniformity >= 2 && q.differential_uniformity % 2 == 0);
        assert!(q.sac_mean_abs_dev < 0.1);
    }
}
