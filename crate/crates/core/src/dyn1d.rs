//! Dynamic-interval multiplicative estimator for `d = 1`.
//!
//! The smallest `K = ⌈C·log₂n/ε³⌉` values are kept exactly (the anchor
//! interval, whose boundary is the largest kept value). Beyond it an ordered
//! list of boundaries `x_1 < x_2 < … < x_m = +∞` is maintained; interval `j`
//! keeps a rate-`ρ_j` sample of its whole prefix `{x ≤ x_j}` so that
//! `Ẑ_j = |samples|/ρ_j` estimates the prefix size. Adjacent size ratios are
//! kept in `[1+ε, 1+6ε)` by splitting, and chains of small ratios are
//! merged. Every sample carries the uniform draw that admitted it, so
//! lowering `ρ` thins the sample consistently.

use std::io::{Read, Write};

use serde::Serialize;

use crate::codec::*;
use crate::error::{invalid, HskError, Result};
use crate::estimator::LeftSumEstimator;
use crate::sampler::{Coins, KeepSmallest, Tagged};
use crate::types::SketchParams;

const COIN_DOMAIN: u64 = 0x44;
const INTERVAL_OVERHEAD_WORDS: usize = 3;
const OVERHEAD_WORDS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Sample {
    value: f64,
    index: u64,
    u: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct Interval {
    id: u64,
    boundary: f64,
    rho: f64,
    samples: Vec<Sample>,
}

impl Interval {
    fn z_hat(&self) -> f64 {
        self.samples.len() as f64 / self.rho
    }
}

/// Read-only view of one interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalInfo {
    pub id: u64,
    pub boundary: f64,
    pub rho: f64,
    /// `K/Ẑ`, the target rate.
    pub rho_star: f64,
    pub z_hat: f64,
    pub samples: usize,
    pub anchor: bool,
}

/// Maintenance counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DynStats {
    pub splits: u64,
    pub merges: u64,
    pub thinnings: u64,
    /// Splits after which a new adjacent ratio fell below `1+2ε`.
    pub split_low_ratio: u64,
    /// Merges after which the new adjacent ratio fell below `1+2ε`.
    pub merge_low_ratio: u64,
}

/// Dynamic-interval sketch.
#[derive(Debug, Clone)]
pub struct DynSketch1D {
    params: SketchParams,
    k: usize,
    n: u64,
    next_id: u64,
    coins: Coins,
    prefix: KeepSmallest,
    /// Non-anchor intervals, boundaries ascending; the last is `+∞`.
    intervals: Vec<Interval>,
    stats: DynStats,
    frozen: bool,
}

impl DynSketch1D {
    pub fn new(params: SketchParams) -> Result<Self> {
        params.validate()?;
        let k = Self::prefix_size(&params);
        Ok(Self {
            coins: Coins::new(params.seed, COIN_DOMAIN),
            params,
            k,
            n: 0,
            next_id: 0,
            prefix: KeepSmallest::new(k),
            intervals: Vec::new(),
            stats: DynStats::default(),
            frozen: false,
        })
    }

    /// `K = ⌈C·log₂n/ε³⌉`.
    pub fn prefix_size(params: &SketchParams) -> usize {
        (params.c * params.log_n() as f64 / params.epsilon.powi(3)).ceil() as usize
    }

    /// Thinning keeps this fraction of an overfull sample. Chosen so that a
    /// split at ratio `1+6ε` leaves the new interval at least `K` samples.
    fn thin_fraction(&self) -> f64 {
        let e = self.params.epsilon;
        let f = (1.0 + 2.5 * e) / (1.0 + 6.0 * e);
        (0.5 * (1.0 + 1.0 / (2.0 * f))).clamp(0.8, 1.0)
    }

    pub fn params(&self) -> &SketchParams {
        &self.params
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn stats(&self) -> DynStats {
        self.stats
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    /// True while every value seen is still stored exactly.
    pub fn is_explicit(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Anchor boundary (largest exactly-stored value), once the prefix is full.
    pub fn anchor_boundary(&self) -> Option<f64> {
        if self.is_explicit() {
            None
        } else {
            self.prefix.max().map(|t| t.value)
        }
    }

    /// Anchor first, then the sampled intervals left to right.
    pub fn intervals(&self) -> Vec<IntervalInfo> {
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        if let Some(b) = self.anchor_boundary() {
            out.push(IntervalInfo {
                id: u64::MAX,
                boundary: b,
                rho: 1.0,
                rho_star: 1.0,
                z_hat: self.k as f64,
                samples: self.prefix.len(),
                anchor: true,
            });
        }
        for iv in &self.intervals {
            let z = iv.z_hat();
            out.push(IntervalInfo {
                id: iv.id,
                boundary: iv.boundary,
                rho: iv.rho,
                rho_star: self.k as f64 / z,
                z_hat: z,
                samples: iv.samples.len(),
                anchor: false,
            });
        }
        out
    }

    /// Number of intervals including the anchor.
    pub fn interval_count(&self) -> usize {
        if self.is_explicit() {
            0
        } else {
            self.intervals.len() + 1
        }
    }

    /// Retained values (exact prefix plus every interval sample) and
    /// per-interval counters.
    pub fn space_words(&self) -> usize {
        self.retained() + INTERVAL_OVERHEAD_WORDS * self.intervals.len() + OVERHEAD_WORDS
    }

    pub fn retained(&self) -> usize {
        self.prefix.len() + self.intervals.iter().map(|iv| iv.samples.len()).sum::<usize>()
    }

    fn z_hat_at(&self, pos: usize) -> f64 {
        if pos == 0 {
            self.k as f64
        } else {
            self.intervals[pos - 1].z_hat()
        }
    }

    fn boundary_at(&self, pos: usize) -> f64 {
        if pos == 0 {
            self.prefix.max().map_or(f64::NEG_INFINITY, |t| t.value)
        } else {
            self.intervals[pos - 1].boundary
        }
    }

    /// `Ẑ_pos / Ẑ_{pos−1}` over the combined list (anchor at 0).
    fn ratio(&self, pos: usize) -> f64 {
        self.z_hat_at(pos) / self.z_hat_at(pos - 1)
    }

    fn fresh_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    pub fn update(&mut self, x: f64) -> Result<()> {
        if self.frozen {
            return Err(HskError::Frozen);
        }
        if !x.is_finite() {
            return Err(invalid("x", format!("non-finite value {x}")));
        }
        let index = self.n;
        self.n += 1;
        self.prefix.push(Tagged { value: x, index });
        if self.intervals.is_empty() {
            if self.prefix.is_full() {
                let id = self.fresh_id();
                let samples = self
                    .prefix
                    .sorted()
                    .into_iter()
                    .map(|t| Sample {
                        value: t.value,
                        index: t.index,
                        u: self.coins.uniform(id, t.index),
                    })
                    .collect();
                self.intervals.push(Interval {
                    id,
                    boundary: f64::INFINITY,
                    rho: 1.0,
                    samples,
                });
            }
            return Ok(());
        }
        let first = self.intervals.partition_point(|iv| iv.boundary < x);
        for iv in &mut self.intervals[first..] {
            let u = self.coins.uniform(iv.id, index);
            if u < iv.rho {
                iv.samples.push(Sample { value: x, index, u });
            }
        }
        self.maintain();
        Ok(())
    }

    fn maintain(&mut self) {
        loop {
            self.cap_rates();
            if self.try_split() || self.try_merge() {
                continue;
            }
            break;
        }
    }

    /// Restores `|samples| ≤ 2K` (i.e. `ρ ≤ 2ρ*`) by lowering `ρ` to the
    /// draw of the first sample that must go.
    fn cap_rates(&mut self) {
        let cap = 2 * self.k;
        let keep_frac = self.thin_fraction();
        for iv in &mut self.intervals {
            if iv.samples.len() <= cap {
                continue;
            }
            let keep = ((keep_frac * iv.samples.len() as f64).ceil() as usize).clamp(self.k, cap);
            let mut us: Vec<f64> = iv.samples.iter().map(|s| s.u).collect();
            us.sort_unstable_by(f64::total_cmp);
            let new_rho = us[keep];
            iv.samples.retain(|s| s.u < new_rho);
            iv.rho = new_rho;
            self.stats.thinnings += 1;
        }
    }

    fn try_split(&mut self) -> bool {
        let eps = self.params.epsilon;
        for pos in 1..=self.intervals.len() {
            if self.ratio(pos) < 1.0 + 6.0 * eps {
                continue;
            }
            let left_boundary = self.boundary_at(pos - 1);
            let right = &self.intervals[pos - 1];
            let mut a: Vec<Sample> = right
                .samples
                .iter()
                .filter(|s| s.value > left_boundary)
                .copied()
                .collect();
            if a.is_empty() {
                continue;
            }
            a.sort_unstable_by(|p, q| p.value.total_cmp(&q.value).then(p.index.cmp(&q.index)));
            let below = right.samples.len() - a.len();
            let rank = ((a.len() as f64 * 2.5 / 6.0).ceil() as usize)
                .max(self.k.saturating_sub(below))
                .clamp(1, a.len());
            let boundary = a[rank - 1].value;
            if boundary >= right.boundary {
                continue;
            }
            let rho = right.rho;
            let samples: Vec<Sample> = right.samples.iter().filter(|s| s.value <= boundary).copied().collect();
            let id = self.fresh_id();
            self.intervals.insert(
                pos - 1,
                Interval {
                    id,
                    boundary,
                    rho,
                    samples,
                },
            );
            self.stats.splits += 1;
            let low = 1.0 + 2.0 * eps;
            if self.ratio(pos) < low || self.ratio(pos + 1) < low {
                self.stats.split_low_ratio += 1;
            }
            return true;
        }
        false
    }

    fn try_merge(&mut self) -> bool {
        let sat = 1.0 + self.params.epsilon;
        for pos in 2..=self.intervals.len() {
            if self.ratio(pos) < sat && self.ratio(pos - 1) < sat {
                self.intervals.remove(pos - 2);
                self.stats.merges += 1;
                if self.ratio(pos - 1) < 1.0 + 2.0 * self.params.epsilon {
                    self.stats.merge_low_ratio += 1;
                }
                return true;
            }
        }
        false
    }

    /// Estimate of `Σ max{0, q − x_i}`.
    pub fn query(&self, q: f64) -> Result<f64> {
        if !self.frozen {
            return Err(HskError::NotFrozen);
        }
        if !q.is_finite() {
            return Err(invalid("q", "must be finite"));
        }
        let exact: f64 = self.prefix.sorted_values().iter().filter(|&&x| x <= q).map(|&x| q - x).sum();
        let Some(anchor) = self.anchor_boundary() else {
            return Ok(exact);
        };
        if q <= anchor {
            return Ok(exact);
        }
        let mut total = exact;
        let mut lo = anchor;
        for iv in &self.intervals {
            let hi = iv.boundary.min(q);
            let band: f64 = iv
                .samples
                .iter()
                .filter(|s| s.value > lo && s.value <= hi)
                .map(|s| q - s.value)
                .sum();
            total += band / iv.rho;
            if iv.boundary >= q {
                break;
            }
            lo = iv.boundary;
        }
        Ok(total)
    }

    /// Checks `K ≤ |samples| ≤ 2K` (equivalently `ρ* ≤ ρ ≤ 2ρ*`) for every
    /// sampled interval.
    pub fn check_property2(&self) -> std::result::Result<(), String> {
        for iv in &self.intervals {
            let s = iv.samples.len();
            if s < self.k || s > 2 * self.k || !(iv.rho > 0.0 && iv.rho <= 1.0) {
                return Err(format!(
                    "interval {} at {}: {} samples at rate {} (K = {})",
                    iv.id, iv.boundary, s, iv.rho, self.k
                ));
            }
        }
        Ok(())
    }

    /// Checks that no two adjacent intervals are both unsaturated and that
    /// saturated ratios stay below `1+6ε`.
    pub fn check_property1(&self) -> std::result::Result<(), String> {
        let eps = self.params.epsilon;
        let mut prev_unsat = false;
        for pos in 1..=self.intervals.len() {
            let r = self.ratio(pos);
            let unsat = r < 1.0 + eps;
            if unsat && prev_unsat {
                return Err(format!("adjacent unsaturated intervals at position {pos} (ratio {r})"));
            }
            if r >= 1.0 + 6.0 * eps {
                return Err(format!("ratio {r} at position {pos} reached the split threshold"));
            }
            prev_unsat = unsat;
        }
        Ok(())
    }

    /// Checks the structural invariants: boundaries ascending and above the
    /// anchor, sentinel at `+∞`, samples inside their prefix and below `ρ`.
    pub fn check_structure(&self) -> std::result::Result<(), String> {
        if self.intervals.is_empty() {
            return Ok(());
        }
        if self.intervals.last().map(|iv| iv.boundary) != Some(f64::INFINITY) {
            return Err("last interval is not the +∞ sentinel".into());
        }
        let mut lo = self.boundary_at(0);
        for iv in &self.intervals {
            if iv.boundary <= lo {
                return Err(format!("boundary {} not above {}", iv.boundary, lo));
            }
            if let Some(s) = iv.samples.iter().find(|s| s.value > iv.boundary || s.u >= iv.rho) {
                return Err(format!("interval {} holds stray sample {}", iv.id, s.value));
            }
            lo = iv.boundary;
        }
        Ok(())
    }
}

impl LeftSumEstimator for DynSketch1D {
    fn left_sum(&self, q: f64) -> Result<f64> {
        self.query(q)
    }

    fn count(&self) -> u64 {
        self.n
    }
}

impl SketchCodec for DynSketch1D {
    const TAG: [u8; 4] = *b"HSKD";

    fn write_body<W: Write>(&self, w: &mut W) -> Result<()> {
        put_params(w, &self.params)?;
        put_u64(w, self.n)?;
        put_u64(w, self.next_id)?;
        put_u8(w, self.frozen as u8)?;
        for c in [
            self.stats.splits,
            self.stats.merges,
            self.stats.thinnings,
            self.stats.split_low_ratio,
            self.stats.merge_low_ratio,
        ] {
            put_u64(w, c)?;
        }
        put_tagged(w, &self.prefix.sorted())?;
        put_u64(w, self.intervals.len() as u64)?;
        for iv in &self.intervals {
            put_u64(w, iv.id)?;
            put_f64(w, iv.boundary)?;
            put_f64(w, iv.rho)?;
            put_u64(w, iv.samples.len() as u64)?;
            for s in &iv.samples {
                put_f64(w, s.value)?;
                put_u64(w, s.index)?;
                put_f64(w, s.u)?;
            }
        }
        Ok(())
    }

    fn read_body<R: Read>(r: &mut R) -> Result<Self> {
        let params = get_params(r)?;
        params.validate()?;
        let mut sk = Self::new(params)?;
        sk.n = get_u64(r)?;
        sk.next_id = get_u64(r)?;
        sk.frozen = get_bool(r)?;
        sk.stats = DynStats {
            splits: get_u64(r)?,
            merges: get_u64(r)?,
            thinnings: get_u64(r)?,
            split_low_ratio: get_u64(r)?,
            merge_low_ratio: get_u64(r)?,
        };
        let prefix = get_tagged(r)?;
        if prefix.len() > sk.k {
            return Err(HskError::Format("exact prefix exceeds K".into()));
        }
        sk.prefix = KeepSmallest::from_sorted(sk.k, prefix);
        let m = get_len(r)?;
        for _ in 0..m {
            let id = get_u64(r)?;
            let boundary = get_f64(r)?;
            let rho = get_f64(r)?;
            let len = get_len(r)?;
            let mut samples = Vec::with_capacity(len.min(1 << 20));
            for _ in 0..len {
                samples.push(Sample {
                    value: get_f64(r)?,
                    index: get_u64(r)?,
                    u: get_f64(r)?,
                });
            }
            sk.intervals.push(Interval {
                id,
                boundary,
                rho,
                samples,
            });
        }
        sk.check_structure().map_err(HskError::Format)?;
        Ok(sk)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::left_sum;
    use crate::types::Power;

    fn params(eps: f64, n_hint: u64, c: f64, seed: u64) -> SketchParams {
        SketchParams {
            epsilon: eps,
            n_hint,
            c,
            seed,
            ..Default::default()
        }
    }

    fn stream(n: usize, seed: u64) -> Vec<f64> {
        let c = Coins::new(seed, 99);
        (0..n as u64).map(|i| c.uniform(0, i)).collect()
    }

    #[test]
    fn explicit_regime_is_exact() {
        let p = params(0.5, 1000, 1.0, 1);
        let k = DynSketch1D::prefix_size(&p);
        let mut sk = DynSketch1D::new(p).unwrap();
        let xs = stream(k - 1, 3);
        for &x in &xs {
            sk.update(x).unwrap();
        }
        assert!(sk.is_explicit());
        sk.freeze();
        for q in [-1.0, 0.1, 0.5, 0.99, 2.0] {
            let exact = left_sum(&xs, q, Power::Linear);
            assert!((sk.query(q).unwrap() - exact).abs() <= 1e-9 * exact.max(1.0));
        }
    }

    #[test]
    fn split_rank_example() {
        assert_eq!((12.0f64 * 2.5 / 6.0).ceil() as usize, 5);
    }

    #[test]
    fn invariants_hold_every_update() {
        let p = params(0.5, 20_000, 1.0, 7);
        let mut sk = DynSketch1D::new(p).unwrap();
        let mut rates: std::collections::HashMap<u64, f64> = Default::default();
        for x in stream(20_000, 7) {
            sk.update(x).unwrap();
            sk.check_property2().unwrap();
            sk.check_property1().unwrap();
            sk.check_structure().unwrap();
            for iv in sk.intervals() {
                if let Some(&old) = rates.get(&iv.id) {
                    assert!(iv.rho <= old);
                }
                rates.insert(iv.id, iv.rho);
            }
        }
        assert!(sk.stats().splits > 0);
    }

    #[test]
    fn splits_start_high_for_small_eps() {
        let mut sk = DynSketch1D::new(params(0.2, 1000, 1.0, 8)).unwrap();
        for x in stream(30_000, 8) {
            sk.update(x).unwrap();
        }
        let st = sk.stats();
        assert!(st.splits > 5, "{st:?}");
        assert_eq!(st.split_low_ratio, 0, "{st:?}");
    }

    #[test]
    fn query_requires_freeze_and_below_all_is_zero() {
        let mut sk = DynSketch1D::new(params(0.5, 1000, 1.0, 2)).unwrap();
        sk.update(3.0).unwrap();
        assert!(matches!(sk.query(1.0), Err(HskError::NotFrozen)));
        sk.freeze();
        assert!(matches!(sk.update(1.0), Err(HskError::Frozen)));
        assert_eq!(sk.query(2.0).unwrap(), 0.0);
    }

    #[test]
    fn roundtrip_bit_identical() {
        let mut sk = DynSketch1D::new(params(0.5, 5000, 1.0, 5)).unwrap();
        for x in stream(5000, 5) {
            sk.update(x).unwrap();
        }
        sk.freeze();
        let bytes = sk.to_bytes().unwrap();
        let back = DynSketch1D::from_bytes(&bytes).unwrap();
        assert_eq!(back.to_bytes().unwrap(), bytes);
        for q in [0.01, 0.3, 0.7, 1.5] {
            assert_eq!(sk.query(q).unwrap().to_bits(), back.query(q).unwrap().to_bits());
        }
    }
}
