use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use sgam::{expand, BasisKind, BasisSpec};
use sgam_bench::random_design;

fn bench_expand(c: &mut Criterion) {
    let mut group = c.benchmark_group("expand");
    group.sample_size(20);
    let x = random_design(300, 57, 3);
    for kind in [BasisKind::Cosine, BasisKind::HaarWavelet] {
        for m in [16usize, 64] {
            let spec = BasisSpec::new(kind, m).unwrap();
            group.bench_with_input(
                BenchmarkId::from_parameter(format!("{kind}_m{m}")),
                &spec,
                |b, spec| b.iter(|| expand(black_box(&x), spec).unwrap()),
            );
        }
    }
    group.finish();
}

criterion_group!(benches, bench_expand);
criterion_main!(benches);
