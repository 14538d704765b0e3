use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use refx_bench::{boosted_model, gaussian_reference, instance, synthetic_dataset};
use refx_core::{ale, make_grid, pdp, shapley_exact, shapley_sampled, GridStrategy};
use std::hint::black_box;

fn bench_shapley_exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("shapley_exact");
    for p in [4usize, 8, 12] {
        let ds = synthetic_dataset(64, p);
        let model = boosted_model(&ds);
        let reference = gaussian_reference(p, 32);
        let row = instance(p);
        group.bench_with_input(BenchmarkId::from_parameter(p), &p, |b, _| {
            b.iter(|| shapley_exact(&model, &reference, black_box(&row), None).unwrap())
        });
    }
    group.finish();
}

fn bench_shapley_sampled(c: &mut Criterion) {
    let mut group = c.benchmark_group("shapley_sampled_p8");
    let p = 8;
    let ds = synthetic_dataset(64, p);
    let model = boosted_model(&ds);
    let reference = gaussian_reference(p, 32);
    let row = instance(p);
    for n_permutations in [100usize, 1000] {
        group.bench_with_input(
            BenchmarkId::from_parameter(n_permutations),
            &n_permutations,
            |b, &n| b.iter(|| shapley_sampled(&model, &reference, black_box(&row), n, 5).unwrap()),
        );
    }
    group.finish();
}

fn bench_profiles(c: &mut Criterion) {
    let p = 6;
    let ds = synthetic_dataset(256, p);
    let model = boosted_model(&ds);
    let reference = gaussian_reference(p, 256);
    let grid = make_grid(&reference, "f0", GridStrategy::Quantile, 21).unwrap();
    c.bench_function("pdp_256rows_21pts", |b| {
        b.iter(|| pdp(&model, &reference, black_box("f0"), &grid).unwrap())
    });
    c.bench_function("ale_256rows_10bins", |b| {
        b.iter(|| ale(&model, &reference, black_box("f0"), 10).unwrap())
    });
}

criterion_group!(
    benches,
    bench_shapley_exact,
    bench_shapley_sampled,
    bench_profiles
);
criterion_main!(benches);
