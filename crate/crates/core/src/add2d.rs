//! Additive-error sketch for `d = 2`: an adaptive quad-tree whose nodes keep
//! first (and for `p = 2` second) coordinate moments of their points plus
//! one reservoir sample.
//!
//! A query adds the exact moment contribution of every cell inside the
//! halfplane `θ·x ≤ b`, nothing for cells outside it, and `c_v·(b − θ·r_v)₊^p`
//! for cells the line crosses, where `r_v` is the cell's sample. The
//! crossing estimate is unbiased; its spread is controlled by the internal
//! granularity `ε_int = c·ε^{4/5}` (`c·ε^{4/7}` for `p = 2`).

use std::io::{Read, Write};

use serde::Serialize;

use crate::codec::*;
use crate::error::{invalid, HskError, Result};
use crate::sampler::{Coins, Reservoir1};
use crate::types::{norm2, Power};

const COIN_DOMAIN: u64 = 0x51;
const MAX_DEPTH: u32 = 28;

/// Configuration of a [`QuadTree`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadTreeConfig {
    pub epsilon: f64,
    pub n_declared: u64,
    pub p: Power,
    /// Multiplier in `ε_int = c·ε^{4/5}` (`c·ε^{4/7}` for `p = 2`).
    pub c: f64,
    /// Lower-left corner of the square domain.
    pub lo: f64,
    /// Upper-right corner of the square domain.
    pub hi: f64,
    pub seed: u64,
    /// Use `ε` directly as the internal granularity.
    pub raw_epsilon: bool,
}

/// Default multiplier for the internal granularity.
pub const DEFAULT_C: f64 = 1.0;

impl QuadTreeConfig {
    pub fn new(epsilon: f64, n_declared: u64, p: Power, seed: u64) -> Self {
        Self {
            epsilon,
            n_declared,
            p,
            c: DEFAULT_C,
            lo: 0.0,
            hi: 1.0,
            seed,
            raw_epsilon: false,
        }
    }

    /// Domain `[lo, hi]²`.
    pub fn with_domain(mut self, lo: f64, hi: f64) -> Self {
        self.lo = lo;
        self.hi = hi;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(invalid("epsilon", format!("{} not in (0,1)", self.epsilon)));
        }
        if self.n_declared == 0 {
            return Err(invalid("n", "declared stream length must be at least 1"));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(invalid("c", "must be positive"));
        }
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(invalid("domain", "need finite lo < hi"));
        }
        Ok(())
    }

    pub fn internal_epsilon(&self) -> f64 {
        if self.raw_epsilon {
            return self.epsilon;
        }
        let e = match self.p {
            Power::Linear => self.c * self.epsilon.powf(0.8),
            Power::Squared => self.c * self.epsilon.powf(4.0 / 7.0),
        };
        e.min(0.5)
    }

    /// `log₂(1/√ε_int)` rounded.
    pub fn initial_depth(&self) -> u32 {
        (0.5 * (1.0 / self.internal_epsilon()).log2()).round().max(0.0) as u32
    }

    pub fn split_threshold(&self) -> u64 {
        ((self.internal_epsilon() * self.n_declared as f64).ceil() as u64).max(1)
    }

    /// Cells split only while their relative side exceeds `ε_int²`.
    fn may_split(&self, depth: u32) -> bool {
        let side = 0.5f64.powi(depth as i32);
        depth < MAX_DEPTH && side > self.internal_epsilon().powi(2)
    }
}

#[derive(Debug, Clone, PartialEq)]
struct QuadNode {
    depth: u32,
    ix: u64,
    iy: u64,
    c: u64,
    sx: f64,
    sy: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
    sample: Reservoir1<(f64, f64)>,
    children: Option<[usize; 4]>,
}

impl QuadNode {
    fn new(depth: u32, ix: u64, iy: u64) -> Self {
        Self {
            depth,
            ix,
            iy,
            c: 0,
            sx: 0.0,
            sy: 0.0,
            sxx: 0.0,
            syy: 0.0,
            sxy: 0.0,
            sample: Reservoir1::new(),
            children: None,
        }
    }

    /// Coin stream unique to the cell's position in the tree.
    fn key(&self) -> u64 {
        ((self.depth as u64) << 58) ^ (self.ix << 29) ^ self.iy
    }
}

/// Halfplane relation of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellSide {
    Inside,
    Outside,
    Crossing,
}

/// Adaptive quad-tree sketch.
#[derive(Debug, Clone)]
pub struct QuadTree {
    cfg: QuadTreeConfig,
    coins: Coins,
    nodes: Vec<QuadNode>,
    n: u64,
    frozen: bool,
}

impl QuadTree {
    pub fn new(cfg: QuadTreeConfig) -> Result<Self> {
        cfg.validate()?;
        let mut t = Self {
            coins: Coins::new(cfg.seed, COIN_DOMAIN),
            cfg,
            nodes: vec![QuadNode::new(0, 0, 0)],
            n: 0,
            frozen: false,
        };
        let mut frontier = vec![0usize];
        for _ in 0..cfg.initial_depth() {
            let mut next = Vec::with_capacity(frontier.len() * 4);
            for v in frontier {
                next.extend(t.expand(v));
            }
            frontier = next;
        }
        Ok(t)
    }

    fn expand(&mut self, v: usize) -> [usize; 4] {
        let (d, ix, iy) = (self.nodes[v].depth, self.nodes[v].ix, self.nodes[v].iy);
        let a = self.nodes.len();
        for (dx, dy) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            self.nodes.push(QuadNode::new(d + 1, 2 * ix + dx, 2 * iy + dy));
        }
        let ch = [a, a + 1, a + 2, a + 3];
        self.nodes[v].children = Some(ch);
        ch
    }

    /// `[x0, x1] × [y0, y1]` of a node.
    fn cell(&self, v: &QuadNode) -> (f64, f64, f64, f64) {
        let side = (self.cfg.hi - self.cfg.lo) / (1u64 << v.depth) as f64;
        let x0 = self.cfg.lo + v.ix as f64 * side;
        let y0 = self.cfg.lo + v.iy as f64 * side;
        (x0, x0 + side, y0, y0 + side)
    }

    pub fn config(&self) -> &QuadTreeConfig {
        &self.cfg
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    /// Per node: count, two coordinate sums, sample (two coordinates and
    /// its offer count) and a child link; `p = 2` adds three second moments.
    pub fn space_words(&self) -> usize {
        let per = match self.cfg.p {
            Power::Linear => 7,
            Power::Squared => 10,
        };
        per * self.nodes.len()
    }

    pub fn total_count(&self) -> u64 {
        self.nodes.iter().map(|v| v.c).sum()
    }

    pub fn update(&mut self, x: f64, y: f64) -> Result<()> {
        if self.frozen {
            return Err(HskError::Frozen);
        }
        let (lo, hi) = (self.cfg.lo, self.cfg.hi);
        for v in [x, y] {
            if !(v >= lo && v <= hi) {
                return Err(HskError::OutOfDomain { value: v, lo, hi });
            }
        }
        let mut v = 0usize;
        while let Some(ch) = self.nodes[v].children {
            let (x0, x1, y0, y1) = self.cell(&self.nodes[v]);
            let right = x > 0.5 * (x0 + x1);
            let top = y > 0.5 * (y0 + y1);
            v = ch[2 * right as usize + top as usize];
        }
        let coins = self.coins;
        let node = &mut self.nodes[v];
        node.c += 1;
        node.sx += x;
        node.sy += y;
        node.sxx += x * x;
        node.syy += y * y;
        node.sxy += x * y;
        let key = node.key();
        node.sample.offer((x, y), &coins, key);
        if node.c >= self.cfg.split_threshold() && self.cfg.may_split(node.depth) {
            self.expand(v);
        }
        self.n += 1;
        Ok(())
    }

    fn preorder(&self) -> impl Iterator<Item = &QuadNode> + '_ {
        let mut stack = vec![0usize];
        std::iter::from_fn(move || {
            let v = stack.pop()?;
            if let Some(ch) = self.nodes[v].children {
                stack.extend(ch.iter().rev());
            }
            Some(&self.nodes[v])
        })
    }

    /// Relation of a node's cell to the halfplane `θ·x ≤ b`. Cells touching
    /// the line count as crossing.
    fn side(&self, v: &QuadNode, theta: [f64; 2], b: f64) -> CellSide {
        let (x0, x1, y0, y1) = self.cell(v);
        let vals = [
            theta[0] * x0 + theta[1] * y0,
            theta[0] * x0 + theta[1] * y1,
            theta[0] * x1 + theta[1] * y0,
            theta[0] * x1 + theta[1] * y1,
        ];
        let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        if max < b {
            CellSide::Inside
        } else if min > b {
            CellSide::Outside
        } else {
            CellSide::Crossing
        }
    }

    /// Unnormalized estimate of `Σ (max{0, b − θ·x_i})^p` for `‖θ‖ = 1`.
    pub fn query_sum(&self, theta: [f64; 2], b: f64) -> Result<f64> {
        if !self.frozen {
            return Err(HskError::NotFrozen);
        }
        let nt = norm2(&theta);
        if (nt - 1.0).abs() > 1e-9 {
            return Err(invalid("theta", format!("‖θ‖ = {nt}, expected 1")));
        }
        if !b.is_finite() {
            return Err(invalid("b", "must be finite"));
        }
        let p = self.cfg.p;
        let mut total = 0.0;
        for v in self.preorder().filter(|v| v.c > 0) {
            let c = v.c as f64;
            total += match self.side(v, theta, b) {
                CellSide::Outside => 0.0,
                CellSide::Inside => {
                    let lin = theta[0] * v.sx + theta[1] * v.sy;
                    match p {
                        Power::Linear => c * b - lin,
                        Power::Squared => {
                            let quad = theta[0] * theta[0] * v.sxx
                                + 2.0 * theta[0] * theta[1] * v.sxy
                                + theta[1] * theta[1] * v.syy;
                            (c * b * b - 2.0 * b * lin + quad).max(0.0)
                        }
                    }
                }
                CellSide::Crossing => {
                    let &(rx, ry) = v.sample.sample().expect("nonempty node has a sample");
                    c * p.apply((b - theta[0] * rx - theta[1] * ry).max(0.0))
                }
            };
        }
        Ok(total)
    }

    /// Normalized estimate for `‖θ‖ = 1`; 0 on an empty tree.
    pub fn query(&self, theta: [f64; 2], b: f64) -> Result<f64> {
        let s = self.query_sum(theta, b)?;
        Ok(if self.n == 0 { 0.0 } else { s / self.n as f64 })
    }

    /// Unnormalized estimate for any nonzero `θ`, via `θ/‖θ‖, b/‖θ‖`.
    pub fn query_sum_any(&self, theta: [f64; 2], b: f64) -> Result<f64> {
        let nt = norm2(&theta);
        if nt == 0.0 {
            return Err(HskError::ZeroDirection);
        }
        let s = self.query_sum([theta[0] / nt, theta[1] / nt], b / nt)?;
        Ok(match self.cfg.p {
            Power::Linear => nt * s,
            Power::Squared => nt * nt * s,
        })
    }

    /// Number of nonempty cells crossed by the line `θ·x = b`.
    pub fn crossing_cells(&self, theta: [f64; 2], b: f64) -> usize {
        self.nodes
            .iter()
            .filter(|v| v.c > 0 && self.side(v, theta, b) == CellSide::Crossing)
            .count()
    }

    /// Moment bounds, child tiling and count conservation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let tol = 1e-9;
        for (i, v) in self.nodes.iter().enumerate() {
            let (x0, x1, y0, y1) = self.cell(v);
            let c = v.c as f64;
            let slack = tol * (1.0 + c * x1.abs().max(y1.abs()).max(x0.abs()).max(y0.abs()));
            if v.sx < c * x0 - slack || v.sx > c * x1 + slack || v.sy < c * y0 - slack || v.sy > c * y1 + slack {
                return Err(format!("node {i}: coordinate sums outside the cell"));
            }
            if (v.c > 0) != v.sample.sample().is_some() || v.sample.count_seen() != v.c {
                return Err(format!("node {i}: reservoir out of step with its count"));
            }
            if let Some(ch) = v.children {
                for (k, &cv) in ch.iter().enumerate() {
                    let w = &self.nodes[cv];
                    if w.depth != v.depth + 1 || w.ix != 2 * v.ix + (k as u64 >> 1) || w.iy != 2 * v.iy + (k as u64 & 1) {
                        return Err(format!("node {i}: children do not tile"));
                    }
                }
            }
        }
        if self.total_count() != self.n {
            return Err(format!("counts sum to {} but {} points seen", self.total_count(), self.n));
        }
        Ok(())
    }
}

impl SketchCodec for QuadTree {
    const TAG: [u8; 4] = *b"HSKQ";

    fn write_body<W: Write>(&self, w: &mut W) -> Result<()> {
        let c = &self.cfg;
        put_f64(w, c.epsilon)?;
        put_u64(w, c.n_declared)?;
        put_u8(w, c.p.as_u8())?;
        put_f64(w, c.c)?;
        put_f64(w, c.lo)?;
        put_f64(w, c.hi)?;
        put_u64(w, c.seed)?;
        put_u8(w, c.raw_epsilon as u8)?;
        put_u64(w, self.n)?;
        put_u8(w, self.frozen as u8)?;
        put_u64(w, self.nodes.len() as u64)?;
        let mut stack = vec![0usize];
        while let Some(v) = stack.pop() {
            let node = &self.nodes[v];
            put_u64(w, node.c)?;
            for m in [node.sx, node.sy, node.sxx, node.syy, node.sxy] {
                put_f64(w, m)?;
            }
            put_u64(w, node.sample.count_seen())?;
            match node.sample.sample() {
                Some(&(x, y)) => {
                    put_u8(w, 1)?;
                    put_f64(w, x)?;
                    put_f64(w, y)?;
                }
                None => put_u8(w, 0)?,
            }
            put_u8(w, node.children.is_some() as u8)?;
            if let Some(ch) = node.children {
                stack.extend(ch.iter().rev());
            }
        }
        Ok(())
    }

    fn read_body<R: Read>(r: &mut R) -> Result<Self> {
        let mut cfg = QuadTreeConfig::new(get_f64(r)?, get_u64(r)?, Power::from_u8(get_u8(r)?)?, 0);
        cfg.c = get_f64(r)?;
        cfg.lo = get_f64(r)?;
        cfg.hi = get_f64(r)?;
        cfg.seed = get_u64(r)?;
        cfg.raw_epsilon = get_bool(r)?;
        cfg.validate()?;
        let n = get_u64(r)?;
        let frozen = get_bool(r)?;
        let count = get_len(r)?;
        let mut t = QuadTree {
            coins: Coins::new(cfg.seed, COIN_DOMAIN),
            cfg,
            nodes: vec![QuadNode::new(0, 0, 0)],
            n,
            frozen,
        };
        let mut stack = vec![0usize];
        let mut seen = 0usize;
        while let Some(v) = stack.pop() {
            seen += 1;
            if seen > count || t.nodes[v].depth > MAX_DEPTH {
                return Err(HskError::Format("node count mismatch".into()));
            }
            let node = &mut t.nodes[v];
            node.c = get_u64(r)?;
            node.sx = get_f64(r)?;
            node.sy = get_f64(r)?;
            node.sxx = get_f64(r)?;
            node.syy = get_f64(r)?;
            node.sxy = get_f64(r)?;
            let count_seen = get_u64(r)?;
            let sample = if get_bool(r)? {
                Some((get_f64(r)?, get_f64(r)?))
            } else {
                None
            };
            node.sample = Reservoir1::from_parts(count_seen, sample);
            if get_bool(r)? {
                let ch = t.expand(v);
                stack.extend(ch.iter().rev());
            }
        }
        if seen != count || t.nodes.len() != count {
            return Err(HskError::Format("node count mismatch".into()));
        }
        t.check_invariants().map_err(HskError::Format)?;
        Ok(t)
    }
}
