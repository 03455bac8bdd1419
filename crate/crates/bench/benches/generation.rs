use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use partlab::{nb_sample, NbMethod, RngStream};
use std::hint::black_box;

fn nb_methods(c: &mut Criterion) {
    let mut group = c.benchmark_group("nb_sample_k1000");
    for p in [0.1, 0.5, 0.9] {
        for (name, method) in [
            ("geometric_sum", NbMethod::GeometricSum),
            ("bernoulli_sim", NbMethod::BernoulliSim),
        ] {
            group.bench_with_input(BenchmarkId::new(name, p), &p, |b, &p| {
                let mut rng = RngStream::new(3);
                b.iter(|| black_box(nb_sample(1000, p, &mut rng, method).unwrap()))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, nb_methods);
criterion_main!(benches);
