use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use sgam::{fit, lasso_weights, FitConfig};
use sgam_bench::random_problem;

fn bench_fit(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit_sparse_group_lasso");
    group.sample_size(10);
    for (n, d, m) in [(100usize, 10usize, 8usize), (300, 20, 16)] {
        let (design, y) = random_problem(n, d, m, 23);
        let w = lasso_weights(n, d, m, 1.0, 1.0).unwrap();
        let cfg = FitConfig {
            max_iterations: 500,
            tolerance: 1e-7,
            ..FitConfig::default()
        };
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("n{n}_d{d}_m{m}")),
            &(n, d, m),
            |b, _| b.iter(|| fit(black_box(&design), &y, &w, &cfg).unwrap()),
        );
    }
    group.finish();
}

criterion_group!(benches, bench_fit);
criterion_main!(benches);
