use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use sgam::{prox_sorted_l1, prox_sparse_group, soft_threshold, PenaltyWeights};
use sgam_bench::{random_matrix, sorted_weights};

fn bench_sorted_l1(c: &mut Criterion) {
    let mut group = c.benchmark_group("prox_sorted_l1");
    for m in [16usize, 128, 1024] {
        let v = random_matrix(1, m, 7).row(0).to_vec();
        let w = sorted_weights(m, 11);
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, _| {
            b.iter(|| prox_sorted_l1(black_box(&v), black_box(&w)).unwrap())
        });
    }
    group.finish();
}

fn bench_soft_threshold(c: &mut Criterion) {
    let v = random_matrix(1, 1024, 13).row(0).to_vec();
    c.bench_function("soft_threshold_1024", |b| {
        b.iter(|| soft_threshold(black_box(&v), black_box(0.4)))
    });
}

fn bench_sparse_group(c: &mut Criterion) {
    let mut group = c.benchmark_group("prox_sparse_group");
    for (d, m) in [(10usize, 16usize), (57, 128)] {
        let b_mat = random_matrix(d, m, 17);
        let w = PenaltyWeights::constant(0.3, 0.2, d, m).unwrap();
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{d}x{m}")),
            &(d, m),
            |bench, _| bench.iter(|| prox_sparse_group(black_box(&b_mat), &w, 0.7).unwrap()),
        );
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_sorted_l1,
    bench_soft_threshold,
    bench_sparse_group
);
criterion_main!(benches);
