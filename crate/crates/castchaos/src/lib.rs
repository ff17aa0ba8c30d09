//! CAST-128 image encryption with chaos-derived dynamic S-boxes.
//!
//! The crate couples the CAST-128 Feistel cipher with per-session round
//! tables derived from the Logistic-Sine Map, so the substitution layer is a
//! secret function of the key rather than a fixed constant. On top of the
//! cipher it ships the measurement tooling needed to judge the result:
//!
//! - [`lsm`] — the chaotic map, its stream form, and key-to-parameter
//!   derivation
//! - [`sbox`] — bijective 8-bit S-box generation and the four dynamic
//!   8→32-bit round tables with their fingerprint
//! - [`analysis`] — nonlinearity (Walsh–Hadamard), SAC, and differential
//!   uniformity of S-boxes
//! - [`cast128`] — the block cipher with pluggable round tables (standard or
//!   dynamic)
//! - [`image`] — PGM/PPM input, preprocessing, chaining modes, and the
//!   ciphertext container
//! - [`metrics`] — entropy, NPCR, UACI, PSNR, histogram/χ² and timing
//!   reports
//!
//! With the default `parallel` feature, block-parallel and sweep-parallel
//! code paths run on rayon; disabling it compiles sequential fallbacks with
//! identical results.
//!
//! ```
//! use castchaos::image::container::ChainMode;
//! use castchaos::image::pipeline::{decrypt_image, encrypt_image};
//! use castchaos::image::ImageBuffer;
//! use castchaos::Key128;
//!
//! let key = Key128::from_hex("000102030405060708090a0b0c0d0e0f").unwrap();
//! let img = ImageBuffer::new(16, 16, 1, (0..=255).collect()).unwrap();
//! let sealed = encrypt_image(&img, &key, ChainMode::Cbc2, true).unwrap();
//! let opened = decrypt_image(&sealed, &key).unwrap();
//! assert_eq!(opened, img);
//! ```

pub mod analysis;
pub mod cast128;
pub mod image;
pub mod key;
pub mod lsm;
pub mod metrics;
pub mod sbox;

pub use key::{Key128, KeyError};
