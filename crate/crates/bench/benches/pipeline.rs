use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use qrng_bench::{bit_fixture, ternary_fixture};
use qrng_core::coding::{morphism_stream, pack_bits, pack_ternary, unpack_ternary};
use qrng_core::entropy::ChaChaEntropy;
use qrng_core::generators::SourceSpec;
use qrng_core::measurement::{generate_ternary, PreparationSpec};
use qrng_core::normality::{block_counts, block_counts_parallel, normality_report, AccuracyFunction};
use qrng_core::unitary::{build_ux, decompose, reconstruct};

const N: usize = 1 << 20;

fn generation(c: &mut Criterion) {
    let mut g = c.benchmark_group("generate");
    g.throughput(Throughput::Elements(N as u64));
    g.bench_function("ternary plus1", |b| {
        b.iter(|| generate_ternary(PreparationSpec::PlusOne, N, &mut ChaChaEntropy::new(7)))
    });
    for spec in [SourceSpec::Qrng(PreparationSpec::PlusOne), SourceSpec::Lcg, SourceSpec::Xorshift] {
        g.bench_function(BenchmarkId::new("bits", spec), |b| {
            let mut src = spec.build(7);
            b.iter(|| src.generate(N))
        });
    }
    g.finish();
}

fn coding(c: &mut Criterion) {
    let t = ternary_fixture(N);
    let bits = bit_fixture(N);
    let packed = pack_ternary(&t);
    let mut g = c.benchmark_group("coding");
    g.throughput(Throughput::Elements(N as u64));
    g.bench_function("morphism", |b| b.iter(|| morphism_stream(black_box(&t))));
    g.bench_function("pack ternary", |b| b.iter(|| pack_ternary(black_box(&t))));
    g.bench_function("unpack ternary", |b| b.iter(|| unpack_ternary(black_box(&packed)).unwrap()));
    g.bench_function("pack bits", |b| b.iter(|| pack_bits(black_box(&bits))));
    g.finish();
}

fn normality(c: &mut Criterion) {
    let bits = bit_fixture(N);
    let mut g = c.benchmark_group("normality");
    g.throughput(Throughput::Elements(N as u64));
    for m in [1u32, 4, 16] {
        g.bench_with_input(BenchmarkId::new("block counts", m), &m, |b, &m| {
            b.iter(|| block_counts(&bits, m).unwrap())
        });
    }
    g.bench_function("block counts m=4, 4 threads", |b| {
        b.iter(|| block_counts_parallel(&bits, 4, 4).unwrap())
    });
    g.bench_function("report sqrtlog", |b| {
        b.iter(|| normality_report(&bits, AccuracyFunction::SqrtLog).unwrap())
    });
    g.finish();
}

fn unitary(c: &mut Criterion) {
    let ux = build_ux();
    let plan = decompose(&ux).unwrap();
    c.bench_function("decompose U_x", |b| b.iter(|| decompose(black_box(&ux)).unwrap()));
    c.bench_function("reconstruct U_x", |b| b.iter(|| reconstruct(black_box(&plan))));
}

criterion_group!(benches, generation, coding, normality, unitary);
criterion_main!(benches);
