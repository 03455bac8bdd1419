//! Prints comparisons / (n log2 n) for Partition Sort across sizes and input
//! shapes. The growth-window constants in the test suite were frozen from
//! this output.

use partlab::{generate_dataset, partition_sort_in_place, DistributionSpec, Key, PartitionStrategy, RngStream};

fn main() {
    let strategy = PartitionStrategy::DeterministicSelect;
    println!(
        "{:>8} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "n", "random", "sorted", "reverse", "equal", "nb"
    );
    for exp in 10..=17 {
        let n = 1usize << exp;
        let mut rng = RngStream::new(exp as u64);
        let random: Vec<Key> = (0..n).map(|_| rng.next_u64() as Key).collect();
        let sorted: Vec<Key> = (0..n as Key).collect();
        let reverse: Vec<Key> = (0..n as Key).rev().collect();
        let equal = vec![7; n];
        let nb = generate_dataset(&DistributionSpec::NegBinomial { k: 1000, p: 0.5 }, n, exp as u64).unwrap();
        let scale = n as f64 * (n as f64).log2();
        let ratio = |mut v: Vec<Key>| partition_sort_in_place(&mut v, strategy).comparisons as f64 / scale;
        println!(
            "{:>8} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            n,
            ratio(random),
            ratio(sorted),
            ratio(reverse),
            ratio(equal),
            ratio(nb)
        );
    }
}
