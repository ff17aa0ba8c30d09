//! Throughput comparison of the sequential and rayon-parallel code paths.
//!
//! `block/*` measures raw CAST-128 block throughput over a 64 KiB buffer,
//! serial versus rayon fan-out, for both table sets. `analysis/*` compares
//! the single-threaded Walsh/DDT sweeps against the parallel defaults.
//! `pipeline/*` covers the end-to-end image path on a 256×256 image (ECB
//! block-parallel inside; CBC2 sequential by construction).

use criterion::{black_box, criterion_group, criterion_main, Criterion, Throughput};
use rayon::prelude::*;

use castchaos::analysis;
use castchaos::cast128::{Block64, CipherState, TableSet};
use castchaos::image::container::ChainMode;
use castchaos::image::pipeline::{encrypt_image, cipher_state};
use castchaos::image::ImageBuffer;
use castchaos::lsm::{derive_params, LsmParams};
use castchaos::sbox::generate_sbox;
use castchaos::Key128;

fn bench_key() -> Key128 {
    Key128::from_hex("0123456712345678234567893456789A").unwrap()
}

fn test_blocks(n: usize) -> Vec<Block64> {
    (0..n)
        .map(|i| Block64 {
            l: (i as u32).wrapping_mul(0x9E3779B9),
            r: (i as u32).wrapping_mul(0x85EBCA6B) ^ 0xDEADBEEF,
        })
        .collect()
}

fn test_image(side: u32) -> ImageBuffer {
    let len = (side * side) as usize;
    let pixels = (0..len)
        .map(|i| ((i * 31 + i / 7) % 256) as u8)
        .collect();
    ImageBuffer::new(side, side, 1, pixels).unwrap()
}

fn block_throughput(c: &mut Criterion) {
    let blocks = test_blocks(8192); // 64 KiB
    let bytes = (blocks.len() * 8) as u64;

    for (label, dynamic) in [("static", false), ("dynamic", true)] {
        let state = cipher_state(&bench_key(), dynamic).unwrap();
        let mut group = c.benchmark_group(format!("block/{label}"));
        group.throughput(Throughput::Bytes(bytes));
        group.bench_function("seq", |b| {
            b.iter(|| {
                blocks
                    .iter()
                    .map(|&blk| state.encrypt_block(blk))
                    .fold(0u32, |acc, out| acc ^ out.l ^ out.r)
            })
        });
        group.bench_function("par", |b| {
            b.iter(|| {
                blocks
                    .par_iter()
                    .map(|&blk| state.encrypt_block(blk))
                    .map(|out| out.l ^ out.r)
                    .reduce(|| 0, |a, b| a ^ b)
            })
        });
        group.finish();
    }
}

fn analysis_kernels(c: &mut Criterion) {
    let params = LsmParams::new(4.75, 4.75, 0.5, 1000).unwrap();
    let sbox = generate_sbox(&params).unwrap();

    let mut group = c.benchmark_group("analysis/nonlinearity");
    group.bench_function("seq", |b| {
        b.iter(|| analysis::nonlinearity_seq(black_box(&sbox)))
    });
    group.bench_function("par", |b| b.iter(|| analysis::nonlinearity(black_box(&sbox))));
    group.finish();

    let mut group = c.benchmark_group("analysis/differential_uniformity");
    group.bench_function("seq", |b| {
        b.iter(|| analysis::differential_uniformity_seq(black_box(&sbox)))
    });
    group.bench_function("par", |b| {
        b.iter(|| analysis::differential_uniformity(black_box(&sbox)))
    });
    group.finish();
}

fn pipeline_end_to_end(c: &mut Criterion) {
    let img = test_image(256);
    let key = bench_key();
    let bytes = img.pixels().len() as u64;

    let mut group = c.benchmark_group("pipeline/encrypt_256x256");
    group.throughput(Throughput::Bytes(bytes));
    group.bench_function("ecb_dynamic", |b| {
        b.iter(|| encrypt_image(black_box(&img), &key, ChainMode::Ecb, true).unwrap())
    });
    group.bench_function("cbc2_dynamic", |b| {
        b.iter(|| encrypt_image(black_box(&img), &key, ChainMode::Cbc2, true).unwrap())
    });
    group.bench_function("cbc2_static", |b| {
        b.iter(|| encrypt_image(black_box(&img), &key, ChainMode::Cbc2, false).unwrap())
    });
    group.finish();
}

fn sbox_generation(c: &mut Criterion) {
    let key = bench_key();
    let params = derive_params(&key, 0);
    let mut group = c.benchmark_group("sbox");
    group.bench_function("generate_one", |b| {
        b.iter(|| generate_sbox(black_box(&params)).unwrap())
    });
    group.bench_function("build_round_tables", |b| {
        b.iter(|| castchaos::sbox::build_round_tables(black_box(&key)).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    block_throughput,
    analysis_kernels,
    pipeline_end_to_end,
    sbox_generation
);
criterion_main!(benches);
