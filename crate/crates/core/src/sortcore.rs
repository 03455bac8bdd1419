//! Partition Sort with exact half-splitting, plus a quicksort baseline.
//!
//! `partition` splits `a[lo..hi)` into a left block of `floor(m/2)` keys and a
//! right block of `ceil(m/2)` keys (with `m = hi - lo`) such that every key on
//! the left is `<=` every key on the right. The split is realized by selecting
//! the key of rank `floor(m/2)` with a three-way fenced selection and leaving
//! it as the first key of the right block. Partition Sort then recurses on
//! both blocks, so the recursion tree is perfectly balanced regardless of the
//! data: its depth is `ceil(log2 n)`.
//!
//! Only key-to-key comparisons are counted. One `Ord::cmp` call is one
//! comparison.

use std::cmp::Ordering;

use thiserror::Error;

use crate::rng::RngStream;

pub type Key = i64;

/// Sequence of sort keys.
pub type KeyArray = Vec<Key>;

/// Ranges at or below this length are finished by insertion sort inside
/// selection.
const SMALL_RANGE: usize = 5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SortStats {
    pub comparisons: u64,
    pub swaps: u64,
    /// Depth of the sort recursion: the number of nested partition levels.
    pub max_depth: u32,
    /// Deepest nesting of median-of-medians selection calls.
    pub max_select_depth: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionStrategy {
    /// Median of medians (groups of 5): linear worst case per partition.
    DeterministicSelect,
    /// Uniformly random pivots drawn from a stream seeded with `seed`.
    RandomizedSelect { seed: u64 },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SortError {
    #[error("invalid range [{lo}, {hi}) for an array of length {len} (need lo < hi <= len)")]
    InvalidRange { lo: usize, hi: usize, len: usize },
    #[error("partition needs at least two keys, got range [{lo}, {hi})")]
    RangeTooShort { lo: usize, hi: usize },
    #[error("rank {rank} is outside a range of {size} keys")]
    RankOutOfRange { rank: usize, size: usize },
}

fn check_range(len: usize, lo: usize, hi: usize) -> Result<(), SortError> {
    if lo >= hi || hi > len {
        return Err(SortError::InvalidRange { lo, hi, len });
    }
    Ok(())
}

#[inline]
fn compare(a: Key, b: Key, stats: &mut SortStats) -> Ordering {
    stats.comparisons += 1;
    a.cmp(&b)
}

#[inline]
fn swap(s: &mut [Key], i: usize, j: usize, stats: &mut SortStats) {
    if i != j {
        s.swap(i, j);
        stats.swaps += 1;
    }
}

fn insertion_sort(s: &mut [Key], stats: &mut SortStats) {
    for i in 1..s.len() {
        let mut j = i;
        while j > 0 && compare(s[j - 1], s[j], stats) == Ordering::Greater {
            swap(s, j - 1, j, stats);
            j -= 1;
        }
    }
}

/// Dutch-flag partition around `pivot`. Returns `(lt, gt)` such that
/// `s[..lt] < pivot`, `s[lt..gt] == pivot` and `s[gt..] > pivot`.
fn three_way(s: &mut [Key], pivot: Key, stats: &mut SortStats) -> (usize, usize) {
    let (mut lt, mut i, mut gt) = (0, 0, s.len());
    while i < gt {
        match compare(s[i], pivot, stats) {
            Ordering::Less => {
                swap(s, lt, i, stats);
                lt += 1;
                i += 1;
            }
            Ordering::Greater => {
                gt -= 1;
                swap(s, i, gt, stats);
            }
            Ordering::Equal => i += 1,
        }
    }
    (lt, gt)
}

/// Selection and half-splitting under one strategy.
///
/// The randomized strategy owns its random stream, so repeated calls on one
/// `Partitioner` continue the same sequence.
#[derive(Debug, Clone)]
pub struct Partitioner {
    rng: Option<RngStream>,
}

impl Partitioner {
    pub fn new(strategy: PartitionStrategy) -> Self {
        let rng = match strategy {
            PartitionStrategy::DeterministicSelect => None,
            PartitionStrategy::RandomizedSelect { seed } => Some(RngStream::new(seed)),
        };
        Self { rng }
    }

    /// Returns the key of rank `rank` (0-based) within `a[lo..hi)` and
    /// rearranges the range so that `a[lo..lo+rank] <= a[lo+rank] <= a[lo+rank+1..hi]`.
    pub fn select_kth(
        &mut self,
        a: &mut [Key],
        lo: usize,
        hi: usize,
        rank: usize,
        stats: &mut SortStats,
    ) -> Result<Key, SortError> {
        check_range(a.len(), lo, hi)?;
        if rank >= hi - lo {
            return Err(SortError::RankOutOfRange { rank, size: hi - lo });
        }
        Ok(self.select_in(&mut a[lo..hi], rank, 0, stats))
    }

    /// Splits `a[lo..hi)` into halves of sizes `floor(m/2)` and `ceil(m/2)`
    /// with `max(left) <= min(right)`, returning the boundary index.
    pub fn partition(
        &mut self,
        a: &mut [Key],
        lo: usize,
        hi: usize,
        stats: &mut SortStats,
    ) -> Result<usize, SortError> {
        check_range(a.len(), lo, hi)?;
        if hi - lo < 2 {
            return Err(SortError::RangeTooShort { lo, hi });
        }
        Ok(self.split(a, lo, hi, stats))
    }

    fn split(&mut self, a: &mut [Key], lo: usize, hi: usize, stats: &mut SortStats) -> usize {
        let half = (hi - lo) / 2;
        self.select_in(&mut a[lo..hi], half, 0, stats);
        lo + half
    }

    fn select_in(&mut self, s: &mut [Key], rank: usize, depth: u32, stats: &mut SortStats) -> Key {
        stats.max_select_depth = stats.max_select_depth.max(depth);
        let (mut lo, mut hi, mut rank) = (0, s.len(), rank);
        loop {
            let len = hi - lo;
            if len <= SMALL_RANGE {
                insertion_sort(&mut s[lo..hi], stats);
                return s[lo + rank];
            }
            let pivot = match self.rng.as_mut() {
                Some(rng) => s[lo + rng.below(len as u64) as usize],
                None => self.median_of_medians(&mut s[lo..hi], depth, stats),
            };
            let (lt, gt) = three_way(&mut s[lo..hi], pivot, stats);
            if rank < lt {
                hi = lo + lt;
            } else if rank < gt {
                return pivot;
            } else {
                rank -= gt;
                lo += gt;
            }
        }
    }

    /// Moves the median of each group of five to the front of `s` and
    /// returns the median of those medians.
    fn median_of_medians(&mut self, s: &mut [Key], depth: u32, stats: &mut SortStats) -> Key {
        let groups = s.len().div_ceil(5);
        for g in 0..groups {
            let start = g * 5;
            let end = (start + 5).min(s.len());
            insertion_sort(&mut s[start..end], stats);
            swap(s, g, start + (end - start - 1) / 2, stats);
        }
        self.select_in(&mut s[..groups], (groups - 1) / 2, depth + 1, stats)
    }

    fn sort_range<F>(&mut self, a: &mut [Key], lo: usize, hi: usize, depth: u32, stats: &mut SortStats, observe: &mut F)
    where
        F: FnMut(&[Key], &[Key]),
    {
        if hi - lo < 2 {
            return;
        }
        stats.max_depth = stats.max_depth.max(depth + 1);
        let mid = self.split(a, lo, hi, stats);
        observe(&a[lo..mid], &a[mid..hi]);
        self.sort_range(a, lo, mid, depth + 1, stats, observe);
        self.sort_range(a, mid, hi, depth + 1, stats, observe);
    }
}

/// One-shot form of [`Partitioner::partition`].
pub fn partition(
    a: &mut [Key],
    lo: usize,
    hi: usize,
    strategy: PartitionStrategy,
    stats: &mut SortStats,
) -> Result<usize, SortError> {
    Partitioner::new(strategy).partition(a, lo, hi, stats)
}

/// One-shot form of [`Partitioner::select_kth`].
pub fn select_kth(
    a: &mut [Key],
    lo: usize,
    hi: usize,
    rank: usize,
    strategy: PartitionStrategy,
    stats: &mut SortStats,
) -> Result<Key, SortError> {
    Partitioner::new(strategy).select_kth(a, lo, hi, rank, stats)
}

pub fn partition_sort(mut keys: KeyArray, strategy: PartitionStrategy) -> (KeyArray, SortStats) {
    let stats = partition_sort_in_place(&mut keys, strategy);
    (keys, stats)
}

pub fn partition_sort_in_place(keys: &mut [Key], strategy: PartitionStrategy) -> SortStats {
    partition_sort_observed(keys, strategy, |_, _| {})
}

/// Partition Sort that hands every split to `observe` as `(left, right)`
/// right after the partition step, before either block is recursed into.
pub fn partition_sort_observed<F>(keys: &mut [Key], strategy: PartitionStrategy, mut observe: F) -> SortStats
where
    F: FnMut(&[Key], &[Key]),
{
    let mut stats = SortStats::default();
    let len = keys.len();
    Partitioner::new(strategy).sort_range(keys, 0, len, 0, &mut stats, &mut observe);
    stats
}

/// Randomized three-way quicksort, kept as a comparison target.
pub fn quicksort_baseline(mut keys: KeyArray, seed: u64) -> (KeyArray, SortStats) {
    let stats = quicksort_in_place(&mut keys, seed);
    (keys, stats)
}

pub fn quicksort_in_place(keys: &mut [Key], seed: u64) -> SortStats {
    let mut stats = SortStats::default();
    let mut rng = RngStream::new(seed);
    quicksort_range(keys, &mut rng, 0, &mut stats);
    stats
}

fn quicksort_range(mut s: &mut [Key], rng: &mut RngStream, depth: u32, stats: &mut SortStats) {
    let mut depth = depth;
    while s.len() > 1 {
        stats.max_depth = stats.max_depth.max(depth + 1);
        if s.len() <= SMALL_RANGE {
            insertion_sort(s, stats);
            return;
        }
        let pivot = s[rng.below(s.len() as u64) as usize];
        let (lt, gt) = three_way(s, pivot, stats);
        let (left, rest) = s.split_at_mut(lt);
        let right = &mut rest[gt - lt..];
        // Recurse into the smaller side, loop on the larger.
        if left.len() < right.len() {
            quicksort_range(left, rng, depth + 1, stats);
            s = right;
        } else {
            quicksort_range(right, rng, depth + 1, stats);
            s = left;
        }
        depth += 1;
    }
}
