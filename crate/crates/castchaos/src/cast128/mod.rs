//! CAST-128: 16-round Feistel cipher on 64-bit blocks with 128-bit keys.
//!
//! The implementation keeps the standard structure end to end — key schedule,
//! round types, final swap — but takes its four round tables through
//! [`TableSet`], so the substitution layer can be either the fixed standard
//! tables or a key-derived [`DynamicSBoxSet`]. The key schedule always runs
//! on the fixed schedule tables S5–S8 regardless of the table set, which is
//! what keeps static mode bit-compatible with the published test vectors.

pub mod consts;

use std::sync::Arc;

use crate::key::Key128;
use crate::sbox::DynamicSBoxSet;

use consts::{S1, S2, S3, S4, S5, S6, S7, S8};

pub const BLOCK_BYTES: usize = 8;
pub const ROUNDS: usize = 16;

/// One 64-bit cipher block as its two big-endian 32-bit halves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Block64 {
    pub l: u32,
    pub r: u32,
}

impl Block64 {
    pub fn from_bytes(bytes: [u8; 8]) -> Self {
        Block64 {
            l: u32::from_be_bytes(bytes[0..4].try_into().unwrap()),
            r: u32::from_be_bytes(bytes[4..8].try_into().unwrap()),
        }
    }

    pub fn to_bytes(self) -> [u8; 8] {
        let mut out = [0u8; 8];
        out[0..4].copy_from_slice(&self.l.to_be_bytes());
        out[4..8].copy_from_slice(&self.r.to_be_bytes());
        out
    }

    pub fn xor(self, other: Block64) -> Block64 {
        Block64 {
            l: self.l ^ other.l,
            r: self.r ^ other.r,
        }
    }
}

/// The active round tables: the RFC constants or a key-derived set.
#[derive(Debug, Clone)]
pub enum TableSet {
    Static,
    Dynamic(Arc<DynamicSBoxSet>),
}

impl TableSet {
    pub fn dynamic(set: DynamicSBoxSet) -> Self {
        TableSet::Dynamic(Arc::new(set))
    }

    pub fn is_dynamic(&self) -> bool {
        matches!(self, TableSet::Dynamic(_))
    }

    /// Fingerprint of the dynamic tables; zero for the static set.
    pub fn fingerprint(&self) -> u64 {
        match self {
            TableSet::Static => 0,
            TableSet::Dynamic(set) => set.fingerprint(),
        }
    }

    fn resolve(&self) -> [&[u32; 256]; 4] {
        match self {
            TableSet::Static => [&S1, &S2, &S3, &S4],
            TableSet::Dynamic(set) => set.tables(),
        }
    }
}

/// The three CAST round-function types. Round `i` (1-based) uses type
/// `((i-1) mod 3) + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundType {
    Type1,
    Type2,
    Type3,
}

impl RoundType {
    fn for_round(index: usize) -> RoundType {
        match index % 3 {
            0 => RoundType::Type1,
            1 => RoundType::Type2,
            _ => RoundType::Type3,
        }
    }
}

type Tables<'a> = [&'a [u32; 256]; 4];

#[inline]
fn split_bytes(i: u32) -> (usize, usize, usize, usize) {
    (
        (i >> 24) as usize,
        ((i >> 16) & 0xff) as usize,
        ((i >> 8) & 0xff) as usize,
        (i & 0xff) as usize,
    )
}

#[inline]
fn f1(t: &Tables<'_>, half: u32, km: u32, kr: u8) -> u32 {
    let i = km.wrapping_add(half).rotate_left(u32::from(kr));
    let (a, b, c, d) = split_bytes(i);
    ((t[0][a] ^ t[1][b]).wrapping_sub(t[2][c])).wrapping_add(t[3][d])
}

#[inline]
fn f2(t: &Tables<'_>, half: u32, km: u32, kr: u8) -> u32 {
    let i = (km ^ half).rotate_left(u32::from(kr));
    let (a, b, c, d) = split_bytes(i);
    (t[0][a].wrapping_sub(t[1][b]).wrapping_add(t[2][c])) ^ t[3][d]
}

#[inline]
fn f3(t: &Tables<'_>, half: u32, km: u32, kr: u8) -> u32 {
    let i = km.wrapping_sub(half).rotate_left(u32::from(kr));
    let (a, b, c, d) = split_bytes(i);
    ((t[0][a].wrapping_add(t[1][b])) ^ t[2][c]).wrapping_sub(t[3][d])
}

#[inline]
fn round(kind: RoundType, t: &Tables<'_>, half: u32, km: u32, kr: u8) -> u32 {
    match kind {
        RoundType::Type1 => f1(t, half, km, kr),
        RoundType::Type2 => f2(t, half, km, kr),
        RoundType::Type3 => f3(t, half, km, kr),
    }
}

/// The round function on its own, for analysis and cross-checks.
pub fn round_f(kind: RoundType, half: u32, km: u32, kr: u8, tables: &TableSet) -> u32 {
    round(kind, &tables.resolve(), half, km, kr)
}

/// Subkeys plus the active table set. Immutable once built; encrypt/decrypt
/// are pure with respect to it, so sharing across threads is fine.
#[derive(Debug, Clone)]
pub struct CipherState {
    km: [u32; 16],
    kr: [u8; 16],
    tables: TableSet,
}

#[inline]
fn sched_byte(words: &[u32; 4], i: usize) -> usize {
    ((words[i / 4] >> (8 * (3 - (i % 4)))) & 0xff) as usize
}

/// One half of the key schedule: evolves `x` in place and yields 16 subkey
/// words. Called twice — masking keys first, rotation keys second.
fn half_schedule(x: &mut [u32; 4]) -> [u32; 16] {
    let mut z = [0u32; 4];
    let mut k = [0u32; 16];
    macro_rules! b {
        ($arr:ident, $i:expr) => {
            sched_byte(&$arr, $i)
        };
    }

    z[0] = x[0] ^ S5[b!(x, 13)] ^ S6[b!(x, 15)] ^ S7[b!(x, 12)] ^ S8[b!(x, 14)] ^ S7[b!(x, 8)];
    z[1] = x[2] ^ S5[b!(z, 0)] ^ S6[b!(z, 2)] ^ S7[b!(z, 1)] ^ S8[b!(z, 3)] ^ S8[b!(x, 10)];
    z[2] = x[3] ^ S5[b!(z, 7)] ^ S6[b!(z, 6)] ^ S7[b!(z, 5)] ^ S8[b!(z, 4)] ^ S5[b!(x, 9)];
    z[3] = x[1] ^ S5[b!(z, 10)] ^ S6[b!(z, 9)] ^ S7[b!(z, 11)] ^ S8[b!(z, 8)] ^ S6[b!(x, 11)];
    k[0] = S5[b!(z, 8)] ^ S6[b!(z, 9)] ^ S7[b!(z, 7)] ^ S8[b!(z, 6)] ^ S5[b!(z, 2)];
    k[1] = S5[b!(z, 10)] ^ S6[b!(z, 11)] ^ S7[b!(z, 5)] ^ S8[b!(z, 4)] ^ S6[b!(z, 6)];
    k[2] = S5[b!(z, 12)] ^ S6[b!(z, 13)] ^ S7[b!(z, 3)] ^ S8[b!(z, 2)] ^ S7[b!(z, 9)];
    k[3] = S5[b!(z, 14)] ^ S6[b!(z, 15)] ^ S7[b!(z, 1)] ^ S8[b!(z, 0)] ^ S8[b!(z, 12)];

    x[0] = z[2] ^ S5[b!(z, 5)] ^ S6[b!(z, 7)] ^ S7[b!(z, 4)] ^ S8[b!(z, 6)] ^ S7[b!(z, 0)];
    x[1] = z[0] ^ S5[b!(x, 0)] ^ S6[b!(x, 2)] ^ S7[b!(x, 1)] ^ S8[b!(x, 3)] ^ S8[b!(z, 2)];
    x[2] = z[1] ^ S5[b!(x, 7)] ^ S6[b!(x, 6)] ^ S7[b!(x, 5)] ^ S8[b!(x, 4)] ^ S5[b!(z, 1)];
    x[3] = z[3] ^ S5[b!(x, 10)] ^ S6[b!(x, 9)] ^ S7[b!(x, 11)] ^ S8[b!(x, 8)] ^ S6[b!(z, 3)];
    k[4] = S5[b!(x, 3)] ^ S6[b!(x, 2)] ^ S7[b!(x, 12)] ^ S8[b!(x, 13)] ^ S5[b!(x, 8)];
    k[5] = S5[b!(x, 1)] ^ S6[b!(x, 0)] ^ S7[b!(x, 14)] ^ S8[b!(x, 15)] ^ S6[b!(x, 13)];
    k[6] = S5[b!(x, 7)] ^ S6[b!(x, 6)] ^ S7[b!(x, 8)] ^ S8[b!(x, 9)] ^ S7[b!(x, 3)];
    k[7] = S5[b!(x, 5)] ^ S6[b!(x, 4)] ^ S7[b!(x, 10)] ^ S8[b!(x, 11)] ^ S8[b!(x, 7)];

    z[0] = x[0] ^ S5[b!(x, 13)] ^ S6[b!(x, 15)] ^ S7[b!(x, 12)] ^ S8[b!(x, 14)] ^ S7[b!(x, 8)];
    z[1] = x[2] ^ S5[b!(z, 0)] ^ S6[b!(z, 2)] ^ S7[b!(z, 1)] ^ S8[b!(z, 3)] ^ S8[b!(x, 10)];
    z[2] = x[3] ^ S5[b!(z, 7)] ^ S6[b!(z, 6)] ^ S7[b!(z, 5)] ^ S8[b!(z, 4)] ^ S5[b!(x, 9)];
    z[3] = x[1] ^ S5[b!(z, 10)] ^ S6[b!(z, 9)] ^ S7[b!(z, 11)] ^ S8[b!(z, 8)] ^ S6[b!(x, 11)];
    k[8] = S5[b!(z, 3)] ^ S6[b!(z, 2)] ^ S7[b!(z, 12)] ^ S8[b!(z, 13)] ^ S5[b!(z, 9)];
    k[9] = S5[b!(z, 1)] ^ S6[b!(z, 0)] ^ S7[b!(z, 14)] ^ S8[b!(z, 15)] ^ S6[b!(z, 12)];
    k[10] = S5[b!(z, 7)] ^ S6[b!(z, 6)] ^ S7[b!(z, 8)] ^ S8[b!(z, 9)] ^ S7[b!(z, 2)];
    k[11] = S5[b!(z, 5)] ^ S6[b!(z, 4)] ^ S7[b!(z, 10)] ^ S8[b!(z, 11)] ^ S8[b!(z, 6)];

    x[0] = z[2] ^ S5[b!(z, 5)] ^ S6[b!(z, 7)] ^ S7[b!(z, 4)] ^ S8[b!(z, 6)] ^ S7[b!(z, 0)];
    x[1] = z[0] ^ S5[b!(x, 0)] ^ S6[b!(x, 2)] ^ S7[b!(x, 1)] ^ S8[b!(x, 3)] ^ S8[b!(z, 2)];
    x[2] = z[1] ^ S5[b!(x, 7)] ^ S6[b!(x, 6)] ^ S7[b!(x, 5)] ^ S8[b!(x, 4)] ^ S5[b!(z, 1)];
    x[3] = z[3] ^ S5[b!(x, 10)] ^ S6[b!(x, 9)] ^ S7[b!(x, 11)] ^ S8[b!(x, 8)] ^ S6[b!(z, 3)];
    k[12] = S5[b!(x, 8)] ^ S6[b!(x, 9)] ^ S7[b!(x, 7)] ^ S8[b!(x, 6)] ^ S5[b!(x, 3)];
    k[13] = S5[b!(x, 10)] ^ S6[b!(x, 11)] ^ S7[b!(x, 5)] ^ S8[b!(x, 4)] ^ S6[b!(x, 7)];
    k[14] = S5[b!(x, 12)] ^ S6[b!(x, 13)] ^ S7[b!(x, 3)] ^ S8[b!(x, 2)] ^ S7[b!(x, 8)];
    k[15] = S5[b!(x, 14)] ^ S6[b!(x, 15)] ^ S7[b!(x, 1)] ^ S8[b!(x, 0)] ^ S8[b!(x, 13)];

    k
}

impl CipherState {
    /// Runs the standard key schedule and installs the given round tables.
    pub fn new(key: &Key128, tables: TableSet) -> Self {
        let kb = key.as_bytes();
        let mut x = [
            u32::from_be_bytes(kb[0..4].try_into().unwrap()),
            u32::from_be_bytes(kb[4..8].try_into().unwrap()),
            u32::from_be_bytes(kb[8..12].try_into().unwrap()),
            u32::from_be_bytes(kb[12..16].try_into().unwrap()),
        ];
        let km = half_schedule(&mut x);
        let raw = half_schedule(&mut x);
        let mut kr = [0u8; 16];
        for (slot, word) in kr.iter_mut().zip(raw) {
            *slot = (word & 0x1f) as u8;
        }
        CipherState { km, kr, tables }
    }

    pub fn masking(&self) -> &[u32; 16] {
        &self.km
    }

    pub fn rotation(&self) -> &[u8; 16] {
        &self.kr
    }

    pub fn tables(&self) -> &TableSet {
        &self.tables
    }

    pub fn encrypt_block(&self, b: Block64) -> Block64 {
        let t = self.tables.resolve();
        let (mut l, mut r) = (b.l, b.r);
        for i in 0..ROUNDS {
            let f = round(RoundType::for_round(i), &t, r, self.km[i], self.kr[i]);
            (l, r) = (r, l ^ f);
        }
        // final swap
        Block64 { l: r, r: l }
    }

    pub fn decrypt_block(&self, b: Block64) -> Block64 {
        let t = self.tables.resolve();
        let (mut l, mut r) = (b.l, b.r);
        for i in (0..ROUNDS).rev() {
            let f = round(RoundType::for_round(i), &t, r, self.km[i], self.kr[i]);
            (l, r) = (r, l ^ f);
        }
        Block64 { l: r, r: l }
    }
}
