//! Throughput of the multiplier action and of the norm and compactness
//! routines at representative sizes.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use opmult::{
    build_saar, cb_norm, multiplier_norm, phi_apply, schur_apply_nd, schur_norm, tail_norm_profile, ChoiForm,
    MultiplierData, NormOptions, TruncationSchedule,
};
use opmult_bench::{geometric_schur, random_kernels, random_schur, random_sum};

fn apply(c: &mut Criterion) {
    let mut g = c.benchmark_group("apply");
    for d in [8, 32, 64] {
        let dims = [d, d, d];
        let phi = random_sum(&dims, 4, 1);
        let schur = random_schur(&dims, 2);
        let ks = random_kernels(&dims, 3);
        g.bench_with_input(BenchmarkId::new("phi_apply_3leg", d), &d, |b, _| b.iter(|| phi_apply(black_box(&phi), &ks)));
        g.bench_with_input(BenchmarkId::new("schur_apply_3leg", d), &d, |b, _| {
            b.iter(|| schur_apply_nd(black_box(&schur), &ks))
        });
    }
    g.finish();
}

fn norms(c: &mut Criterion) {
    let opts = NormOptions::default();
    let mut g = c.benchmark_group("norms");
    g.sample_size(10);
    for d in [8, 16] {
        let f = random_schur(&[d, d], 4);
        g.bench_with_input(BenchmarkId::new("schur_norm", d), &d, |b, _| b.iter(|| schur_norm(black_box(&f), &opts)));
    }
    let forced = NormOptions { force_sdp: true, ..NormOptions::default() };
    for k in [3, 5] {
        let t = ChoiForm::transposition(k);
        g.bench_with_input(BenchmarkId::new("cb_norm_transposition_sdp", k), &k, |b, _| {
            b.iter(|| cb_norm(black_box(&t), &forced))
        });
    }
    let phi = random_sum(&[2, 2, 2], 2, 5);
    g.bench_function("multiplier_norm_3leg_2", |b| b.iter(|| multiplier_norm(black_box(&phi), &opts)));
    g.finish();
}

fn compactness(c: &mut Criterion) {
    let opts = NormOptions::default();
    let mut g = c.benchmark_group("compactness");
    g.sample_size(10);
    let data = MultiplierData::Schur(geometric_schur(16));
    let schedule = TruncationSchedule::new(vec![1, 4, 8, 12, 15], 16).expect("valid schedule");
    g.bench_function("tail_profile_geometric_16", |b| b.iter(|| tail_norm_profile(black_box(&data), &schedule, &opts)));
    g.bench_function("build_saar_8", |b| b.iter(|| build_saar(black_box(8), &opts)));
    g.finish();
}

criterion_group!(benches, apply, norms, compactness);
criterion_main!(benches);
