use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use partlab::{generate_dataset, partition_sort_in_place, select_kth, DistributionSpec, PartitionStrategy, SortStats};
use std::hint::black_box;

fn sort_nb_inputs(c: &mut Criterion) {
    let mut group = c.benchmark_group("sort_nb_1000_0.5");
    for n in [10_000usize, 50_000] {
        let keys = generate_dataset(&DistributionSpec::NegBinomial { k: 1000, p: 0.5 }, n, 2012).unwrap();
        group.bench_with_input(BenchmarkId::new("partition_det", n), &keys, |b, keys| {
            b.iter_batched_ref(
                || keys.clone(),
                |k| partition_sort_in_place(k, PartitionStrategy::DeterministicSelect),
                BatchSize::LargeInput,
            )
        });
        group.bench_with_input(BenchmarkId::new("partition_rand", n), &keys, |b, keys| {
            b.iter_batched_ref(
                || keys.clone(),
                |k| partition_sort_in_place(k, PartitionStrategy::RandomizedSelect { seed: 7 }),
                BatchSize::LargeInput,
            )
        });
        group.bench_with_input(BenchmarkId::new("quicksort", n), &keys, |b, keys| {
            b.iter_batched_ref(
                || keys.clone(),
                |k| partlab::sortcore::quicksort_in_place(k, 7),
                BatchSize::LargeInput,
            )
        });
        group.bench_with_input(BenchmarkId::new("std_sort_unstable", n), &keys, |b, keys| {
            b.iter_batched_ref(|| keys.clone(), |k| k.sort_unstable(), BatchSize::LargeInput)
        });
    }
    group.finish();
}

fn median_selection(c: &mut Criterion) {
    let n = 50_000;
    let keys = generate_dataset(&DistributionSpec::NegBinomial { k: 1000, p: 0.5 }, n, 1).unwrap();
    c.bench_function("select_median_det_50000", |b| {
        b.iter_batched_ref(
            || keys.clone(),
            |k| {
                let mut stats = SortStats::default();
                black_box(select_kth(k, 0, n, n / 2, PartitionStrategy::DeterministicSelect, &mut stats).unwrap())
            },
            BatchSize::LargeInput,
        )
    });
}

criterion_group!(benches, sort_nb_inputs, median_selection);
criterion_main!(benches);
