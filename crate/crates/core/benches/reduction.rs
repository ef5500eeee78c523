use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qsphere::{build_sphere, twisted_projector, Execution};

fn reduce_square(c: &mut Criterion) {
    let mut group = c.benchmark_group("reduce_projector_square");
    group.sample_size(10);
    for n in [6, 8] {
        let p = build_sphere(n).expect("sphere");
        let e = twisted_projector(&p).expect("projector");
        let sq = e.mul(&e).expect("square");
        for (label, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            group.bench_with_input(BenchmarkId::new(label, n), &sq, |b, m| b.iter(|| m.reduce(p.rules(), exec).expect("reduce")));
        }
    }
    group.finish();
}

criterion_group!(benches, reduce_square);
criterion_main!(benches);
