//! Multiplicative `(1+ε)` estimators of `Σ max{0, q − x_i}` for `d = 1`.
//!
//! [`OfflineSketch1D`] stores prefix sums at geometrically spaced ranks of a
//! sorted input. [`MultStream1D`] is the one-pass version: two banks of
//! level samples (`E` for crude density ratios, `S` for the estimates
//! themselves) queried interval by interval to the left of `q`.

use std::io::{Read, Write};

use serde::Serialize;

use crate::codec::*;
use crate::error::{invalid, HskError, Result};
use crate::estimator::LeftSumEstimator;
use crate::sampler::{Coins, LevelSampleBank};
use crate::types::{ceil_log2, SketchParams};

/// One stored rank of the offline sketch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OfflineEntry {
    /// 1-based rank `j` in sorted order.
    pub j: u64,
    pub x: f64,
    /// `Σ_{i≤j} (x_j − x_i)`
    pub s: f64,
}

/// Prefix sums of a sorted point set at the ranks `⌈(1+ε)^t⌉`.
#[derive(Debug, Clone, PartialEq)]
pub struct OfflineSketch1D {
    epsilon: f64,
    n: u64,
    entries: Vec<OfflineEntry>,
}

/// Ranks `{⌈(1+ε)^t⌉ : 0 ≤ t ≤ log_{1+ε} n}`, ascending and distinct.
pub fn geometric_ranks(n: u64, epsilon: f64) -> Vec<u64> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut t = 0i32;
    loop {
        let v = (1.0 + epsilon).powi(t);
        if v > n as f64 {
            break;
        }
        let j = (v.ceil() as u64).min(n);
        if out.last() != Some(&j) {
            out.push(j);
        }
        t += 1;
    }
    out
}

impl OfflineSketch1D {
    /// Builds the sketch from points sorted ascending.
    pub fn build(points: &[f64], epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(invalid("epsilon", "must be positive"));
        }
        if let Some(v) = points.iter().find(|v| !v.is_finite()) {
            return Err(invalid("points", format!("non-finite value {v}")));
        }
        if let Some(i) = points.windows(2).position(|w| w[1] < w[0]) {
            return Err(HskError::Unsorted { index: i + 1 });
        }
        let n = points.len() as u64;
        let ranks = geometric_ranks(n, epsilon);
        let mut entries = Vec::with_capacity(ranks.len());
        // Running S_k = Σ_{i≤k}(x_k − x_i) via S_{k+1} = S_k + k·(x_{k+1} − x_k).
        let mut s = 0.0;
        let mut k = 1usize;
        let mut next = ranks.iter().peekable();
        if n > 0 {
            loop {
                if next.peek() == Some(&&(k as u64)) {
                    entries.push(OfflineEntry {
                        j: k as u64,
                        x: points[k - 1],
                        s,
                    });
                    next.next();
                }
                if k as u64 == n || next.peek().is_none() {
                    break;
                }
                s += k as f64 * (points[k] - points[k - 1]);
                k += 1;
            }
        }
        Ok(Self {
            epsilon,
            n,
            entries,
        })
    }

    /// `T = S_j + j·(q − x_j)` for the largest stored `j` with `x_j ≤ q`;
    /// 0 when `q` is left of every point. Never exceeds the exact sum.
    pub fn query(&self, q: f64) -> f64 {
        let k = self.entries.partition_point(|e| e.x <= q);
        if k == 0 {
            return 0.0;
        }
        let e = &self.entries[k - 1];
        e.s + e.j as f64 * (q - e.x)
    }

    pub fn entries(&self) -> &[OfflineEntry] {
        &self.entries
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Three words per entry plus `ε` and `n`.
    pub fn space_words(&self) -> usize {
        3 * self.entries.len() + 2
    }
}

impl LeftSumEstimator for OfflineSketch1D {
    fn left_sum(&self, q: f64) -> Result<f64> {
        Ok(self.query(q))
    }

    fn count(&self) -> u64 {
        self.n
    }
}

impl SketchCodec for OfflineSketch1D {
    const TAG: [u8; 4] = *b"HSKO";

    fn write_body<W: Write>(&self, w: &mut W) -> Result<()> {
        put_f64(w, self.epsilon)?;
        put_u64(w, self.n)?;
        put_u64(w, self.entries.len() as u64)?;
        for e in &self.entries {
            put_u64(w, e.j)?;
            put_f64(w, e.x)?;
            put_f64(w, e.s)?;
        }
        Ok(())
    }

    fn read_body<R: Read>(r: &mut R) -> Result<Self> {
        let epsilon = get_f64(r)?;
        let n = get_u64(r)?;
        let len = get_len(r)?;
        let mut entries = Vec::with_capacity(len.min(1 << 16));
        for _ in 0..len {
            entries.push(OfflineEntry {
                j: get_u64(r)?,
                x: get_f64(r)?,
                s: get_f64(r)?,
            });
        }
        if entries.windows(2).any(|w| w[1].j <= w[0].j) {
            return Err(HskError::Format("offline ranks not increasing".into()));
        }
        Ok(Self {
            epsilon,
            n,
            entries,
        })
    }
}

/// How stream values are validated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Universe {
    /// Integers in `[1, W]`.
    Integer,
    /// Any finite real; `W` only enters the thresholds.
    Real,
}

/// Options of [`MultStream1D`] beyond the shared parameter block.
#[derive(Debug, Clone, PartialEq)]
pub struct MultOptions {
    pub universe: Universe,
    /// Nested level sampling (space optimization; off by default).
    pub nested: bool,
    /// Multiplier on `⌈log₂ D⌉` in the crude-level point floor.
    pub log_d_scale: f64,
    /// Only use a level for an interval when its buffer reaches past the
    /// interval (a full buffer that stops inside it undercounts).
    pub require_coverage: bool,
}

impl Default for MultOptions {
    fn default() -> Self {
        Self {
            universe: Universe::Integer,
            nested: false,
            log_d_scale: 1.0,
            require_coverage: true,
        }
    }
}

const E_DOMAIN: u64 = 0x45;
const S_DOMAIN: u64 = 0x53;
const STREAM_OVERHEAD_WORDS: usize = 12;

/// Streaming level-sample sketch.
#[derive(Debug, Clone)]
pub struct MultStream1D {
    params: SketchParams,
    opts: MultOptions,
    n: u64,
    e: LevelSampleBank,
    s: LevelSampleBank,
    frozen: Option<FrozenLevels>,
}

#[derive(Debug, Clone)]
struct FrozenLevels {
    e: Vec<Vec<f64>>,
    s: Vec<Vec<f64>>,
    e_full: Vec<bool>,
    s_full: Vec<bool>,
}

/// Per-interval record of one streaming query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalRow {
    pub j: u32,
    /// Open left end of `R_j`.
    pub lo: f64,
    /// Closed right end of `R_j`.
    pub hi: f64,
    pub i_prime: i32,
    pub phi: f64,
    pub i_sel: i32,
    pub contribution: f64,
}

/// Trace of [`MultStream1D::query`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryBreakdown1D {
    /// Largest level-0 value.
    pub p: f64,
    /// `q − p` (non-positive when answered exactly).
    pub d: f64,
    /// Exact part from level-0 values `≤ min(p, q)`.
    pub exact_part: f64,
    pub exact: bool,
    pub rows: Vec<IntervalRow>,
}

fn count_in(sorted: &[f64], lo: f64, hi: f64) -> usize {
    sorted.partition_point(|&x| x <= hi) - sorted.partition_point(|&x| x <= lo)
}

impl MultStream1D {
    pub fn new(params: SketchParams, opts: MultOptions) -> Result<Self> {
        params.validate()?;
        if !(opts.log_d_scale > 0.0 && opts.log_d_scale.is_finite()) {
            return Err(invalid("log_d_scale", "must be positive"));
        }
        let levels = params.log_n() as usize + 1;
        let (m1, m2) = Self::capacities(&params);
        let e = LevelSampleBank::new(levels, m1, Coins::new(params.seed, E_DOMAIN), opts.nested);
        let s = LevelSampleBank::new(levels, m2, Coins::new(params.seed, S_DOMAIN), opts.nested);
        Ok(Self {
            params,
            opts,
            n: 0,
            e,
            s,
            frozen: None,
        })
    }

    /// `(m₁, m₂) = (⌈C₁ε⁻¹log²W⌉, ⌈C₂ε⁻²logW⌉)`.
    pub fn capacities(params: &SketchParams) -> (usize, usize) {
        let lw = params.log_w() as f64;
        let eps = params.epsilon;
        let m1 = (params.c1 * lw * lw / eps).ceil() as usize;
        let m2 = (params.c2 * lw / (eps * eps)).ceil() as usize;
        (m1, m2)
    }

    /// `(⌈log₂ n⌉ + 1)·(m₁ + m₂)`.
    pub fn retained_bound(params: &SketchParams) -> usize {
        let (m1, m2) = Self::capacities(params);
        (params.log_n() as usize + 1) * (m1 + m2)
    }

    pub fn params(&self) -> &SketchParams {
        &self.params
    }

    pub fn options(&self) -> &MultOptions {
        &self.opts
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen.is_some()
    }

    pub fn e_bank(&self) -> &LevelSampleBank {
        &self.e
    }

    pub fn s_bank(&self) -> &LevelSampleBank {
        &self.s
    }

    pub fn update(&mut self, x: f64) -> Result<()> {
        if self.frozen.is_some() {
            return Err(HskError::Frozen);
        }
        match self.opts.universe {
            Universe::Integer => {
                let w = self.params.w as f64;
                if !(x >= 1.0 && x <= w && x.fract() == 0.0) {
                    return Err(HskError::OutOfDomain { value: x, lo: 1.0, hi: w });
                }
            }
            Universe::Real => {
                if !x.is_finite() {
                    return Err(invalid("x", format!("non-finite value {x}")));
                }
            }
        }
        self.n += 1;
        self.e.offer(x);
        self.s.offer(x);
        Ok(())
    }

    /// Ends the stream; the sketch becomes read-only and queryable.
    pub fn freeze(&mut self) {
        if self.frozen.is_some() {
            return;
        }
        let snap = |bank: &LevelSampleBank| -> (Vec<Vec<f64>>, Vec<bool>) {
            bank.levels()
                .iter()
                .map(|l| (l.sorted_values(), l.is_full()))
                .unzip()
        };
        let (e, e_full) = snap(&self.e);
        let (s, s_full) = snap(&self.s);
        self.frozen = Some(FrozenLevels { e, s, e_full, s_full });
    }

    /// Retained sample values plus fixed counters.
    pub fn space_words(&self) -> usize {
        self.e.retained() + self.s.retained() + STREAM_OVERHEAD_WORDS
    }

    pub fn retained(&self) -> usize {
        self.e.retained() + self.s.retained()
    }

    pub fn query(&self, q: f64) -> Result<f64> {
        Ok(self.query_breakdown(q)?.0)
    }

    /// Estimate of `Σ max{0, q − x_i}` with its per-interval trace.
    pub fn query_breakdown(&self, q: f64) -> Result<(f64, QueryBreakdown1D)> {
        let fz = self.frozen.as_ref().ok_or(HskError::NotFrozen)?;
        if !q.is_finite() {
            return Err(invalid("q", "must be finite"));
        }
        // Both level-0 buffers keep the smallest values at rate 1, so the
        // larger one contains the other.
        let lvl0: &[f64] = if fz.s[0].len() >= fz.e[0].len() {
            &fz.s[0]
        } else {
            &fz.e[0]
        };
        let Some(&p) = lvl0.last() else {
            return Ok((
                0.0,
                QueryBreakdown1D {
                    p: f64::NEG_INFINITY,
                    d: f64::NEG_INFINITY,
                    exact_part: 0.0,
                    exact: true,
                    rows: vec![],
                },
            ));
        };
        let exact_part: f64 = lvl0.iter().take_while(|&&x| x <= q).map(|&x| q - x).sum();
        let d = q - p;
        let mut bd = QueryBreakdown1D {
            p,
            d,
            exact_part,
            exact: true,
            rows: vec![],
        };
        if d <= 0.0 || lvl0.len() as u64 == self.n {
            return Ok((exact_part, bd));
        }
        bd.exact = false;

        let log_d = if d < 2.0 { 1 } else { ceil_log2(d.ceil() as u64).max(1) };
        let log_n = ceil_log2(self.n.max(2));
        let n_intervals = match self.opts.universe {
            Universe::Integer => log_d.min(2 * log_n).max(1),
            Universe::Real => 2 * log_n,
        };
        let log_w = self.params.log_w() as f64;
        let eps = self.params.epsilon;
        let crude_floor = (self.opts.log_d_scale * log_d as f64).ceil().max(1.0) as usize;
        let levels = fz.e.len();

        let covers = |buf: &[f64], full: bool, hi: f64| -> bool {
            !self.opts.require_coverage || !full || buf.last().is_some_and(|&m| m >= hi)
        };

        let mut total = exact_part;
        for j in 1..=n_intervals {
            let lo = q - d / 2f64.powi(j as i32 - 1);
            let hi = if j == n_intervals {
                q
            } else {
                q - d / 2f64.powi(j as i32)
            };

            let i_prime = (0..levels)
                .rev()
                .find(|&i| covers(&fz.e[i], fz.e_full[i], hi) && count_in(&fz.e[i], lo, hi) >= crude_floor);
            let phi = match i_prime {
                None => 0.0,
                Some(i) => {
                    let num = count_in(&fz.e[i], lo, hi);
                    let den = fz.e[i].partition_point(|&x| x <= lo);
                    if den == 0 {
                        1.0
                    } else {
                        (num as f64 / den as f64).min(1.0)
                    }
                }
            };
            let floor = if i_prime.is_none() || phi <= eps / log_w {
                None
            } else if phi >= 1.0 / log_w {
                Some(1.0 / (eps * eps))
            } else {
                Some((phi * log_w / eps).powi(2))
            };
            let i_sel = floor.and_then(|f| {
                let f = f.ceil() as usize;
                (0..levels)
                    .rev()
                    .find(|&i| covers(&fz.s[i], fz.s_full[i], hi) && count_in(&fz.s[i], lo, hi) >= f)
            });
            let contribution = match i_sel {
                None => 0.0,
                Some(i) => {
                    let buf = &fz.s[i];
                    let a = buf.partition_point(|&x| x <= lo);
                    let b = buf.partition_point(|&x| x <= hi);
                    let scale = 2f64.powi(i as i32);
                    buf[a..b].iter().map(|&x| scale * (q - x)).sum()
                }
            };
            total += contribution;
            bd.rows.push(IntervalRow {
                j,
                lo,
                hi,
                i_prime: i_prime.map_or(-1, |i| i as i32),
                phi,
                i_sel: i_sel.map_or(-1, |i| i as i32),
                contribution,
            });
        }
        Ok((total, bd))
    }
}

impl LeftSumEstimator for MultStream1D {
    fn left_sum(&self, q: f64) -> Result<f64> {
        self.query(q)
    }

    fn count(&self) -> u64 {
        self.n
    }
}

impl SketchCodec for MultStream1D {
    const TAG: [u8; 4] = *b"HSKM";

    fn write_body<W: Write>(&self, w: &mut W) -> Result<()> {
        put_params(w, &self.params)?;
        put_u8(
            w,
            match self.opts.universe {
                Universe::Integer => 0,
                Universe::Real => 1,
            },
        )?;
        put_u8(w, self.opts.nested as u8)?;
        put_f64(w, self.opts.log_d_scale)?;
        put_u8(w, self.opts.require_coverage as u8)?;
        put_u64(w, self.n)?;
        put_u8(w, self.frozen.is_some() as u8)?;
        put_bank(w, &self.e)?;
        put_bank(w, &self.s)
    }

    fn read_body<R: Read>(r: &mut R) -> Result<Self> {
        let params = get_params(r)?;
        params.validate()?;
        let universe = match get_u8(r)? {
            0 => Universe::Integer,
            1 => Universe::Real,
            b => return Err(HskError::Format(format!("bad universe byte {b}"))),
        };
        let nested = get_bool(r)?;
        let log_d_scale = get_f64(r)?;
        let require_coverage = get_bool(r)?;
        let n = get_u64(r)?;
        let frozen = get_bool(r)?;
        let e = get_bank(r)?;
        let s = get_bank(r)?;
        if e.num_levels() == 0 || e.num_levels() != s.num_levels() {
            return Err(HskError::Format("bank level counts disagree".into()));
        }
        let mut sk = Self {
            params,
            opts: MultOptions {
                universe,
                nested,
                log_d_scale,
                require_coverage,
            },
            n,
            e,
            s,
            frozen: None,
        };
        if frozen {
            sk.freeze();
        }
        Ok(sk)
    }
}
