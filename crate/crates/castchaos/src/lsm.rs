//! The Logistic-Sine Map and key-dependent parameter derivation.
//!
//! The map is the hybrid recurrence
//!
//! ```text
//! x[n+1] = (r·sin(π·x[n]) + μ·x[n]·(1 − x[n])) mod 1
//! ```
//!
//! evaluated in IEEE binary64. With control parameters near 5 the mod-1
//! folding keeps the orbit strongly expanding, which is what makes the
//! sequence usable as S-box raw material. The whole sum is reduced modulo 1
//! (not the individual terms), matching the parenthesization of the
//! recurrence above.

use std::f64::consts::PI;

use thiserror::Error;

use crate::key::Key128;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChaosError {
    #[error("map state {0} outside the open interval (0,1)")]
    Domain(f64),
}

/// Iterations discarded before a stream emits values.
pub const DEFAULT_WARMUP: u32 = 1000;

/// Smallest admissible nudge away from the degenerate states 0 and 1 (2⁻⁵³).
const NUDGE: f64 = f64::EPSILON / 2.0;

const TWO_POW_53: f64 = 9007199254740992.0;
const TWO_POW_17: f64 = 131072.0;

/// Control parameters and seed of the Logistic-Sine Map.
///
/// [`derive_params`] produces `r` and `mu` in `[4.5, 5.0)` and `x0` in
/// `(0, 1)`; the struct itself only enforces the `x0` constraint, which is
/// the one the iteration depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsmParams {
    pub r: f64,
    pub mu: f64,
    pub x0: f64,
    pub warmup: u32,
}

impl LsmParams {
    pub fn new(r: f64, mu: f64, x0: f64, warmup: u32) -> Result<Self, ChaosError> {
        check_open_unit(x0)?;
        Ok(LsmParams { r, mu, x0, warmup })
    }
}

fn check_open_unit(x: f64) -> Result<(), ChaosError> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(ChaosError::Domain(x))
    }
}

/// One application of the recurrence, result reduced into `[0, 1)`.
fn raw_step(x: f64, r: f64, mu: f64) -> f64 {
    let y = (r * (PI * x).sin() + mu * x * (1.0 - x)).rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative sums; snap to
    // the largest representable value below 1 so the codomain stays [0, 1).
    if y >= 1.0 {
        1.0 - NUDGE
    } else {
        y
    }
}

/// Evaluates one map step at `x`, which must lie strictly inside `(0, 1)`.
pub fn lsm_step(x: f64, params: &LsmParams) -> Result<f64, ChaosError> {
    check_open_unit(x)?;
    Ok(raw_step(x, params.r, params.mu))
}

/// Iterator over the post-warmup chaotic orbit.
///
/// Streams with equal parameters emit bit-identical sequences. Each stream
/// owns its state, so independent streams may run on different threads; a
/// single stream is not meant for concurrent stepping.
#[derive(Debug, Clone)]
pub struct ChaoticStream {
    params: LsmParams,
    state: f64,
    index: u64,
}

impl ChaoticStream {
    /// Validates `x0` and burns through the warmup iterations.
    pub fn new(params: LsmParams) -> Result<Self, ChaosError> {
        check_open_unit(params.x0)?;
        let mut stream = ChaoticStream {
            params,
            state: params.x0,
            index: 0,
        };
        for _ in 0..params.warmup {
            stream.advance();
        }
        Ok(stream)
    }

    pub fn params(&self) -> &LsmParams {
        &self.params
    }

    /// Current map state, always inside `(0, 1)`.
    pub fn state(&self) -> f64 {
        self.state
    }

    /// Replaces the map state, e.g. to restart the orbit from a fresh seed.
    pub fn set_state(&mut self, x: f64) -> Result<(), ChaosError> {
        check_open_unit(x)?;
        self.state = x;
        Ok(())
    }

    fn advance(&mut self) -> f64 {
        let mut next = raw_step(self.state, self.params.r, self.params.mu);
        if next == 0.0 {
            // Exact 0 is a fixed point of the map; nudge once and continue.
            log::warn!(
                "chaotic state collapsed to 0.0 at iteration {}; nudged by 2^-53",
                self.index
            );
            next = NUDGE;
        }
        self.state = next;
        self.index += 1;
        next
    }
}

impl Iterator for ChaoticStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.advance())
    }
}

/// First `n` post-warmup values of the orbit for `params`.
pub fn lsm_stream(params: &LsmParams, n: usize) -> Result<Vec<f64>, ChaosError> {
    Ok(ChaoticStream::new(*params)?.take(n).collect())
}

/// SplitMix64 finalizer: a bijection on u64 in which every input bit
/// influences every output bit.
pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Maps the key to the parameters of one of the four S-box lanes.
///
/// The mapping is normative and bit-exact: with `k` the key bytes big-endian,
/// `t = splitmix64(k[0..8] ⊕ (lane+1)·0x9E3779B97F4A7C15)` and
/// `u = splitmix64(k[8..16] ⊕ (lane+1)·0xC2B2AE3D27D4EB4F)` (wrapping
/// multiplies), the parameters are `x0 = ((t >> 12) + 1)/2⁵³`,
/// `r = 4.5 + (u >> 48)/2¹⁷`, `mu = 4.5 + ((u >> 32) & 0xFFFF)/2¹⁷`,
/// warmup 1000. This keeps `x0 ∈ (0,1)` and `r, mu ∈ [4.5, 5.0)` for every
/// key. The bijective finalizer is load-bearing: the extractions drop 44 of
/// the 128 bits, so without it those key bits would never reach any lane's
/// parameters and a one-bit key change could leave every S-box unchanged.
pub fn derive_params(key: &Key128, lane: u8) -> LsmParams {
    assert!(lane < 4, "lane must be in 0..=3");
    let k = key.as_bytes();
    let m = u64::from(lane) + 1;
    let t = splitmix64(
        u64::from_be_bytes(k[0..8].try_into().unwrap()) ^ m.wrapping_mul(0x9E37_79B9_7F4A_7C15),
    );
    let u = splitmix64(
        u64::from_be_bytes(k[8..16].try_into().unwrap()) ^ m.wrapping_mul(0xC2B2_AE3D_27D4_EB4F),
    );
    LsmParams {
        x0: ((t >> 12) + 1) as f64 / TWO_POW_53,
        r: 4.5 + (u >> 48) as f64 / TWO_POW_17,
        mu: 4.5 + ((u >> 32) & 0xFFFF) as f64 / TWO_POW_17,
        warmup: DEFAULT_WARMUP,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(r: f64, mu: f64) -> LsmParams {
        LsmParams {
            r,
            mu,
            x0: 0.5,
            warmup: 0,
        }
    }

    #[test]
    fn step_at_half_with_paper_parameters() {
        // 5·sin(π/2) + 5·0.25 = 6.25, mod 1 = 0.25
        assert_eq!(lsm_step(0.5, &params(5.0, 5.0)).unwrap(), 0.25);
    }

    #[test]
    fn step_logistic_fixed_form() {
        // r = 0 degenerates to the logistic term alone: 4·0.5·0.5 = 1.0 → 0.0.
        // Documents why the derived ranges exclude this regime.
        assert_eq!(lsm_step(0.5, &params(0.0, 4.0)).unwrap(), 0.0);
    }

    #[test]
    fn step_matches_high_precision_oracle() {
        // 5·sin(π/4) + 5·0.25·0.75 mod 1, high-precision value
        // 0.4730339059327376220042218 (frozen from an arbitrary-precision
        // evaluation of the recurrence).
        let got = lsm_step(0.25, &params(5.0, 5.0)).unwrap();
        assert!((got - 0.473_033_905_932_737_6).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn step_rejects_domain_violations() {
        let p = params(5.0, 5.0);
        for bad in [0.0, 1.0, -0.5, 1.5] {
            assert_eq!(lsm_step(bad, &p), Err(ChaosError::Domain(bad)));
        }
    }

    #[test]
    fn stream_of_zero_length_is_empty() {
        let p = LsmParams::new(4.75, 4.75, 0.5, 1000).unwrap();
        assert!(lsm_stream(&p, 0).unwrap().is_empty());
    }

    #[test]
    fn stream_chains_steps_from_x0() {
        let p = params(5.0, 5.0);
        let seq = lsm_stream(&p, 2).unwrap();
        assert_eq!(seq[0], 0.25);
        assert_eq!(seq[1], lsm_step(0.25, &p).unwrap());
        // frozen chained value: lsm_step(lsm_step(0.5)) = lsm_step(0.25)
        assert!((seq[1] - 0.473_033_905_932_737_75).abs() < 1e-12);
    }

    #[test]
    fn streams_are_deterministic_and_independent() {
        let p = LsmParams::new(4.75, 4.75, 0.3, 100).unwrap();
        let a = lsm_stream(&p, 10_000).unwrap();
        let b = lsm_stream(&p, 10_000).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|v| (0.0..1.0).contains(v)));
    }

    #[test]
    fn params_reject_bad_x0() {
        assert!(LsmParams::new(4.75, 4.75, 0.0, 0).is_err());
        assert!(LsmParams::new(4.75, 4.75, 1.0, 0).is_err());
        assert!(LsmParams::new(4.75, 4.75, 0.5, 0).is_ok());
    }

    #[test]
    fn derive_params_matches_the_normative_mapping() {
        // All-zero key, lane 0: t = splitmix64(0x9E3779B97F4A7C15) =
        // 0x6e789e6aa1b965f4, u = splitmix64(0xC2B2AE3D27D4EB4F) =
        // 0xdf30f36f6b91d29c; frozen from an independent evaluation.
        let p = derive_params(&Key128::from_bytes([0u8; 16]), 0);
        assert_eq!(p.x0, 0.215_763_998_524_255_1);
        assert_eq!(p.r, 4.935_913_085_937_5);
        assert_eq!(p.mu, 4.975_456_237_792_969);
        assert_eq!(p.warmup, 1000);
        assert!((0.0..1.0).contains(&p.x0) && p.x0 > 0.0);
        assert!((4.5..5.0).contains(&p.r));
        assert!((4.5..5.0).contains(&p.mu));
    }

    #[test]
    fn derive_params_lanes_differ() {
        let key = Key128::from_bytes([0u8; 16]);
        let p0 = derive_params(&key, 0);
        let p1 = derive_params(&key, 1);
        assert_ne!(p0, p1);
        // frozen lane-1 values from the same oracle run
        assert_eq!(p1.x0, 0.013_216_885_796_298_983);
        assert_eq!(p1.r, 4.774_063_110_351_562_5);
        assert_eq!(p1.mu, 4.777_297_973_632_812_5);
    }

    #[test]
    fn every_key_bit_reaches_the_lane_parameters() {
        let base = derive_params(&Key128::from_bytes([0u8; 16]), 0);
        for bit in 0..128 {
            let p = derive_params(&Key128::from_bytes([0u8; 16]).flip_bit(bit), 0);
            assert!(
                (p.x0, p.r, p.mu) != (base.x0, base.r, base.mu),
                "bit {bit} left all lane-0 parameters unchanged"
            );
            if bit < 64 {
                assert_ne!(p.x0, base.x0, "bit {bit} did not move x0");
            } else {
                assert!(
                    (p.r, p.mu) != (base.r, base.mu),
                    "bit {bit} did not move r or mu"
                );
            }
        }
    }

    #[test]
    fn derived_ranges_hold_for_many_keys() {
        // cheap LCG over key material; range check per the type invariants
        let mut seed = 0x1234_5678_9abc_def0u64;
        for _ in 0..200 {
            let mut bytes = [0u8; 16];
            for b in &mut bytes {
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                *b = (seed >> 56) as u8;
            }
            for lane in 0..4 {
                let p = derive_params(&Key128::from_bytes(bytes), lane);
                assert!(p.x0 > 0.0 && p.x0 < 1.0);
                assert!((4.5..5.0).contains(&p.r));
                assert!((4.5..5.0).contains(&p.mu));
            }
        }
    }
}
