//! Seeded coins and the two sampling primitives shared by the sketches:
//! per-level Bernoulli subsampling with keep-smallest retention, and size-1
//! reservoir sampling.
//!
//! Randomness is counter based. Every coin is a hash of
//! `(seed, domain, stream, index)`, so a sketch stores no generator state and
//! replays identically from its seed.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based coin source keyed by a seed and a domain separator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coins {
    key: u64,
}

impl Coins {
    pub fn new(seed: u64, domain: u64) -> Self {
        Self {
            key: splitmix64(seed ^ splitmix64(domain.wrapping_mul(0xD6E8_FEB8_6659_FD93))),
        }
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    pub fn from_key(key: u64) -> Self {
        Self { key }
    }

    /// 64 random bits for `(stream, index)`.
    #[inline]
    pub fn bits(&self, stream: u64, index: u64) -> u64 {
        splitmix64(self.key ^ splitmix64(stream ^ splitmix64(index)))
    }

    /// Uniform draw in `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&self, stream: u64, index: u64) -> f64 {
        (self.bits(stream, index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// True with probability exactly `2^{-level}` (levels ≥ 64 never pass).
    #[inline]
    pub fn pass_power_of_two(&self, stream: u64, index: u64, level: u32) -> bool {
        level == 0 || (level < 64 && self.bits(stream, index) >> (64 - level) == 0)
    }

    /// True with probability `1/k` (to within `k/2^64`).
    #[inline]
    pub fn one_in(&self, stream: u64, index: u64, k: u64) -> bool {
        ((self.bits(stream, index) as u128 * k as u128) >> 64) == 0
    }
}

/// Value tagged with its arrival index; orders by value, then arrival, so
/// that among equal values the earlier arrival ranks smaller and survives
/// eviction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tagged {
    pub value: f64,
    pub index: u64,
}

impl PartialEq for Tagged {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Tagged {}

impl PartialOrd for Tagged {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Tagged {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then(self.index.cmp(&other.index))
    }
}

/// Bounded buffer holding the `capacity` smallest values offered to it.
#[derive(Debug, Clone)]
pub struct KeepSmallest {
    capacity: usize,
    heap: BinaryHeap<Tagged>,
}

impl KeepSmallest {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            heap: BinaryHeap::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.heap.len() >= self.capacity
    }

    /// Largest retained entry.
    pub fn max(&self) -> Option<Tagged> {
        self.heap.peek().copied()
    }

    /// Inserts `t`; returns the evicted entry when over capacity.
    pub fn push(&mut self, t: Tagged) -> Option<Tagged> {
        if self.capacity == 0 {
            return Some(t);
        }
        if self.heap.len() < self.capacity {
            self.heap.push(t);
            return None;
        }
        let top = *self.heap.peek().expect("nonempty at capacity");
        if t < top {
            self.heap.pop();
            self.heap.push(t);
            Some(top)
        } else {
            Some(t)
        }
    }

    /// Entries in ascending order.
    pub fn sorted(&self) -> Vec<Tagged> {
        let mut v: Vec<Tagged> = self.heap.iter().copied().collect();
        v.sort_unstable();
        v
    }

    pub fn sorted_values(&self) -> Vec<f64> {
        self.sorted().into_iter().map(|t| t.value).collect()
    }

    pub fn from_sorted(capacity: usize, entries: Vec<Tagged>) -> Self {
        Self {
            capacity,
            heap: entries.into_iter().collect(),
        }
    }
}

/// Per-rate sample buffers: level `i` keeps values that passed a
/// Bernoulli(2^{-i}) trial, truncated to the `capacity` smallest.
#[derive(Debug, Clone)]
pub struct LevelSampleBank {
    coins: Coins,
    nested: bool,
    offered: u64,
    levels: Vec<KeepSmallest>,
}

impl LevelSampleBank {
    /// `levels` buffers (rates `1, 1/2, …, 2^{-(levels-1)}`), each of
    /// `capacity`. With `nested` a single draw per element decides all levels
    /// (element survives level `i` iff it survives level `i−1` and one more
    /// halving); otherwise levels draw independently.
    pub fn new(levels: usize, capacity: usize, coins: Coins, nested: bool) -> Self {
        Self {
            coins,
            nested,
            offered: 0,
            levels: (0..levels).map(|_| KeepSmallest::new(capacity)).collect(),
        }
    }

    pub fn offered(&self) -> u64 {
        self.offered
    }

    pub fn nested(&self) -> bool {
        self.nested
    }

    pub fn coins(&self) -> Coins {
        self.coins
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, i: usize) -> &KeepSmallest {
        &self.levels[i]
    }

    pub fn levels(&self) -> &[KeepSmallest] {
        &self.levels
    }

    pub fn capacity(&self) -> usize {
        self.levels.first().map_or(0, |l| l.capacity())
    }

    /// Whether the element with arrival `index` survives sampling at `level`.
    pub fn survives(&self, level: usize, index: u64) -> bool {
        if self.nested {
            self.coins.pass_power_of_two(0, index, level as u32)
        } else {
            self.coins.pass_power_of_two(level as u64, index, level as u32)
        }
    }

    pub fn offer(&mut self, x: f64) {
        let index = self.offered;
        self.offered += 1;
        for level in 0..self.levels.len() {
            if self.survives(level, index) {
                self.levels[level].push(Tagged { value: x, index });
            } else if self.nested {
                break;
            }
        }
    }

    pub fn retained(&self) -> usize {
        self.levels.iter().map(KeepSmallest::len).sum()
    }

    pub(crate) fn from_parts(coins: Coins, nested: bool, offered: u64, levels: Vec<KeepSmallest>) -> Self {
        Self {
            coins,
            nested,
            offered,
            levels,
        }
    }
}

/// Size-1 reservoir: after `k` offers each offered value is held with
/// probability `1/k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reservoir1<T> {
    count_seen: u64,
    sample: Option<T>,
}

impl<T> Default for Reservoir1<T> {
    fn default() -> Self {
        Self {
            count_seen: 0,
            sample: None,
        }
    }
}

impl<T> Reservoir1<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count_seen(&self) -> u64 {
        self.count_seen
    }

    pub fn sample(&self) -> Option<&T> {
        self.sample.as_ref()
    }

    /// Offers `v`, drawing the replacement coin from `coins` on `stream`.
    pub fn offer(&mut self, v: T, coins: &Coins, stream: u64) {
        self.count_seen += 1;
        if coins.one_in(stream, self.count_seen, self.count_seen) {
            self.sample = Some(v);
        }
    }

    pub(crate) fn from_parts(count_seen: u64, sample: Option<T>) -> Self {
        Self { count_seen, sample }
    }
}
