//! Additive-error sketch for `d = 1`: an adaptive binary tree over
//! `[−r, r]` whose nodes count the points routed to them together with the
//! sum (and, for `p = 2`, the sum of squares) of their distances to the
//! node's right endpoint.
//!
//! Leaves split once they hold `ε_int^{1/2}·n` points (`ε_int^{1/3}·n` for
//! `p = 2`), where `ε_int = ε/⌈3·log₂(1/ε)⌉`. A query adds the exact
//! contribution of every node lying entirely left of `q` and ignores the
//! nodes straddling `q`, so the estimate never exceeds the true value.

use std::io::{Read, Write};

use serde::Serialize;

use crate::codec::*;
use crate::error::{invalid, HskError, Result};
use crate::estimator::LeftSumEstimator;
use crate::types::Power;

#[derive(Debug, Clone, PartialEq)]
struct BinNode {
    lo: f64,
    hi: f64,
    depth: u32,
    c: u64,
    s: f64,
    s2: f64,
    children: Option<[usize; 2]>,
}

/// Configuration of a [`BinTree`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinTreeConfig {
    /// Target additive error of the normalized objective.
    pub epsilon: f64,
    /// Declared stream length (sets the split threshold).
    pub n_declared: u64,
    pub p: Power,
    /// Domain `[−radius, radius]`.
    pub radius: f64,
    /// Use `ε` as given instead of the rescaled `ε/⌈3·log₂(1/ε)⌉`.
    pub raw_epsilon: bool,
}

impl BinTreeConfig {
    pub fn new(epsilon: f64, n_declared: u64, p: Power) -> Self {
        Self {
            epsilon,
            n_declared,
            p,
            radius: 1.0,
            raw_epsilon: false,
        }
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(invalid("epsilon", format!("{} not in (0,1)", self.epsilon)));
        }
        if self.n_declared == 0 {
            return Err(invalid("n", "declared stream length must be at least 1"));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(invalid("radius", "must be positive"));
        }
        Ok(())
    }

    /// `⌈3·log₂(1/ε)⌉`, at least 1.
    pub fn kappa_log(&self) -> f64 {
        (3.0 * (1.0 / self.epsilon).log2()).ceil().max(1.0)
    }

    pub fn internal_epsilon(&self) -> f64 {
        if self.raw_epsilon {
            self.epsilon
        } else {
            self.epsilon / self.kappa_log()
        }
    }

    /// `ε_int^{1/2}` for `p = 1`, `ε_int^{1/3}` for `p = 2`.
    fn granularity(&self) -> f64 {
        let e = self.internal_epsilon();
        match self.p {
            Power::Linear => e.sqrt(),
            Power::Squared => e.cbrt(),
        }
    }

    /// Points a leaf holds before it splits (at least 1).
    pub fn split_threshold(&self) -> u64 {
        ((self.granularity() * self.n_declared as f64).ceil() as u64).max(1)
    }

    /// Depth of the initial complete tree: leaves of length closest to the
    /// granularity (relative to the unit half-width) among powers of two.
    pub fn initial_depth(&self) -> u32 {
        (2.0 / self.granularity()).log2().round().max(0.0) as u32
    }

    /// Nodes at this depth or deeper never split.
    pub fn max_depth(&self) -> u32 {
        let cap = (3.0 * (1.0 / self.internal_epsilon()).log2()).ceil() as u32;
        cap.max(self.initial_depth())
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Frozen {
    his: Vec<f64>,
    c: Vec<f64>,
    s: Vec<f64>,
    s2: Vec<f64>,
    c_hi: Vec<f64>,
    s_hi: Vec<f64>,
    c_hi2: Vec<f64>,
}

/// Adaptive binary-tree sketch.
#[derive(Debug, Clone, PartialEq)]
pub struct BinTree {
    cfg: BinTreeConfig,
    nodes: Vec<BinNode>,
    n: u64,
    frozen: Option<Frozen>,
}

impl BinTree {
    pub fn new(cfg: BinTreeConfig) -> Result<Self> {
        cfg.validate()?;
        let mut t = Self {
            cfg,
            nodes: vec![BinNode {
                lo: -cfg.radius,
                hi: cfg.radius,
                depth: 0,
                c: 0,
                s: 0.0,
                s2: 0.0,
                children: None,
            }],
            n: 0,
            frozen: None,
        };
        let d0 = cfg.initial_depth();
        let mut frontier = vec![0usize];
        for _ in 0..d0 {
            let mut next = Vec::with_capacity(frontier.len() * 2);
            for v in frontier {
                let [a, b] = t.expand(v);
                next.push(a);
                next.push(b);
            }
            frontier = next;
        }
        Ok(t)
    }

    fn expand(&mut self, v: usize) -> [usize; 2] {
        let (lo, hi, depth) = (self.nodes[v].lo, self.nodes[v].hi, self.nodes[v].depth);
        let mid = 0.5 * (lo + hi);
        let a = self.nodes.len();
        for (l, h) in [(lo, mid), (mid, hi)] {
            self.nodes.push(BinNode {
                lo: l,
                hi: h,
                depth: depth + 1,
                c: 0,
                s: 0.0,
                s2: 0.0,
                children: None,
            });
        }
        self.nodes[v].children = Some([a, a + 1]);
        [a, a + 1]
    }

    pub fn config(&self) -> &BinTreeConfig {
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

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|v| v.children.is_none()).count()
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen.is_some()
    }

    /// Words per node: count, distance sum, child link, and the squared
    /// sum in `p = 2` mode.
    pub fn space_words(&self) -> usize {
        let per = match self.cfg.p {
            Power::Linear => 3,
            Power::Squared => 4,
        };
        per * self.nodes.len()
    }

    /// `Σ c_v` over all nodes.
    pub fn total_count(&self) -> u64 {
        self.nodes.iter().map(|v| v.c).sum()
    }

    pub fn update(&mut self, x: f64) -> Result<()> {
        if self.frozen.is_some() {
            return Err(HskError::Frozen);
        }
        let r = self.cfg.radius;
        if !(x >= -r && x <= r) {
            return Err(HskError::OutOfDomain { value: x, lo: -r, hi: r });
        }
        let mut v = 0usize;
        while let Some([a, b]) = self.nodes[v].children {
            v = if x <= self.nodes[a].hi { a } else { b };
        }
        let node = &mut self.nodes[v];
        let d = node.hi - x;
        node.c += 1;
        node.s += d;
        node.s2 += d * d;
        if node.c >= self.cfg.split_threshold() && node.depth < self.cfg.max_depth() {
            self.expand(v);
        }
        self.n += 1;
        Ok(())
    }

    /// Builds prefix sums over nodes ordered by right endpoint so that a
    /// query is one binary search.
    pub fn freeze(&mut self) {
        if self.frozen.is_some() {
            return;
        }
        let mut order: Vec<&BinNode> = self.nodes.iter().filter(|v| v.c > 0).collect();
        order.sort_by(|a, b| a.hi.total_cmp(&b.hi).then(a.depth.cmp(&b.depth)));
        let len = order.len() + 1;
        let mut f = Frozen {
            his: Vec::with_capacity(order.len()),
            c: Vec::with_capacity(len),
            s: Vec::with_capacity(len),
            s2: Vec::with_capacity(len),
            c_hi: Vec::with_capacity(len),
            s_hi: Vec::with_capacity(len),
            c_hi2: Vec::with_capacity(len),
        };
        let mut acc = [0.0f64; 6];
        let push = |f: &mut Frozen, acc: &[f64; 6]| {
            f.c.push(acc[0]);
            f.s.push(acc[1]);
            f.s2.push(acc[2]);
            f.c_hi.push(acc[3]);
            f.s_hi.push(acc[4]);
            f.c_hi2.push(acc[5]);
        };
        push(&mut f, &acc);
        for v in order {
            let c = v.c as f64;
            acc[0] += c;
            acc[1] += v.s;
            acc[2] += v.s2;
            acc[3] += c * v.hi;
            acc[4] += v.s * v.hi;
            acc[5] += c * v.hi * v.hi;
            f.his.push(v.hi);
            push(&mut f, &acc);
        }
        self.frozen = Some(f);
    }

    /// Unnormalized estimate of `Σ (max{0, q − x_i})^p` in the configured
    /// power.
    pub fn query_sum(&self, q: f64) -> Result<f64> {
        let f = self.frozen.as_ref().ok_or(HskError::NotFrozen)?;
        if !q.is_finite() {
            return Err(invalid("q", "must be finite"));
        }
        let k = f.his.partition_point(|&h| h <= q);
        let v = match self.cfg.p {
            // Σ s + c(q − hi)
            Power::Linear => f.s[k] + q * f.c[k] - f.c_hi[k],
            // Σ s2 + 2(q − hi)s + c(q − hi)²
            Power::Squared => {
                f.s2[k] + 2.0 * (q * f.s[k] - f.s_hi[k]) + q * q * f.c[k] - 2.0 * q * f.c_hi[k] + f.c_hi2[k]
            }
        };
        Ok(v.max(0.0))
    }

    /// Normalized estimate `(1/n)·Σ (max{0, q − x_i})^p`; 0 on an empty tree.
    pub fn query(&self, q: f64) -> Result<f64> {
        let s = self.query_sum(q)?;
        Ok(if self.n == 0 { 0.0 } else { s / self.n as f64 })
    }

    /// Same as [`query`](Self::query) by direct traversal of every node;
    /// available before freezing.
    pub fn query_scan(&self, q: f64) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let mut total = 0.0;
        for v in &self.nodes {
            if v.c == 0 || v.hi > q {
                continue;
            }
            let g = q - v.hi;
            total += match self.cfg.p {
                Power::Linear => v.s + v.c as f64 * g,
                Power::Squared => v.s2 + 2.0 * g * v.s + v.c as f64 * g * g,
            };
        }
        total / self.n as f64
    }

    /// Checks the per-node bounds `0 ≤ s ≤ c·|I|`, `0 ≤ s2 ≤ c·|I|²`, child
    /// tiling and depth cap.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let tol = 1e-9;
        for (i, v) in self.nodes.iter().enumerate() {
            let len = v.hi - v.lo;
            let c = v.c as f64;
            if v.s < -tol || v.s > c * len * (1.0 + tol) + tol {
                return Err(format!("node {i}: s = {} outside [0, {}]", v.s, c * len));
            }
            if v.s2 < -tol || v.s2 > c * len * len * (1.0 + tol) + tol {
                return Err(format!("node {i}: s2 = {} outside [0, {}]", v.s2, c * len * len));
            }
            if let Some([a, b]) = v.children {
                let (na, nb) = (&self.nodes[a], &self.nodes[b]);
                if na.lo != v.lo || na.hi != nb.lo || nb.hi != v.hi {
                    return Err(format!("node {i}: children do not tile"));
                }
                if v.depth > self.cfg.max_depth() {
                    return Err(format!("node {i}: split beyond the depth cap"));
                }
            }
        }
        if self.total_count() != self.n {
            return Err(format!("counts sum to {} but {} points seen", self.total_count(), self.n));
        }
        Ok(())
    }
}

impl LeftSumEstimator for BinTree {
    fn left_sum(&self, q: f64) -> Result<f64> {
        self.query_sum(q)
    }

    fn count(&self) -> u64 {
        self.n
    }
}

impl SketchCodec for BinTree {
    const TAG: [u8; 4] = *b"HSKB";

    fn write_body<W: Write>(&self, w: &mut W) -> Result<()> {
        put_f64(w, self.cfg.epsilon)?;
        put_u64(w, self.cfg.n_declared)?;
        put_u8(w, self.cfg.p.as_u8())?;
        put_f64(w, self.cfg.radius)?;
        put_u8(w, self.cfg.raw_epsilon as u8)?;
        put_u64(w, self.n)?;
        put_u8(w, self.frozen.is_some() as u8)?;
        put_u64(w, self.nodes.len() as u64)?;
        // Pre-order: counters then a child flag.
        let mut stack = vec![0usize];
        while let Some(v) = stack.pop() {
            let node = &self.nodes[v];
            put_u64(w, node.c)?;
            put_f64(w, node.s)?;
            put_f64(w, node.s2)?;
            put_u8(w, node.children.is_some() as u8)?;
            if let Some([a, b]) = node.children {
                stack.push(b);
                stack.push(a);
            }
        }
        Ok(())
    }

    fn read_body<R: Read>(r: &mut R) -> Result<Self> {
        let mut cfg = BinTreeConfig::new(get_f64(r)?, get_u64(r)?, Power::from_u8(get_u8(r)?)?);
        cfg.radius = get_f64(r)?;
        cfg.raw_epsilon = get_bool(r)?;
        cfg.validate()?;
        let n = get_u64(r)?;
        let frozen = get_bool(r)?;
        let count = get_len(r)?;
        let mut t = BinTree {
            cfg,
            nodes: vec![BinNode {
                lo: -cfg.radius,
                hi: cfg.radius,
                depth: 0,
                c: 0,
                s: 0.0,
                s2: 0.0,
                children: None,
            }],
            n,
            frozen: None,
        };
        // Nodes are created in the same order as by `expand`, so a
        // rebuilt tree serializes to identical bytes.
        let mut stack = vec![0usize];
        let mut seen = 0usize;
        while let Some(v) = stack.pop() {
            seen += 1;
            if seen > count {
                return Err(HskError::Format("node count mismatch".into()));
            }
            t.nodes[v].c = get_u64(r)?;
            t.nodes[v].s = get_f64(r)?;
            t.nodes[v].s2 = get_f64(r)?;
            if get_bool(r)? {
                let [a, b] = t.expand(v);
                stack.push(b);
                stack.push(a);
            }
        }
        if seen != count || t.nodes.len() != count {
            return Err(HskError::Format("node count mismatch".into()));
        }
        if t.total_count() != n {
            return Err(HskError::Format("node counts do not sum to n".into()));
        }
        if frozen {
            t.freeze();
        }
        Ok(t)
    }
}

/// [`BinTree`] for streams of unknown length: when the stream outgrows
/// twice the current declaration a new tree with a doubled declaration
/// takes over, and queries sum over all trees. Each tree errs by at most
/// `ε` times its own share of the points, at the price of one extra tree
/// per doubling.
#[derive(Debug, Clone)]
pub struct DoublingBinTree {
    base: BinTreeConfig,
    done: Vec<BinTree>,
    current: BinTree,
}

impl DoublingBinTree {
    pub fn new(base: BinTreeConfig) -> Result<Self> {
        Ok(Self {
            current: BinTree::new(base)?,
            base,
            done: Vec::new(),
        })
    }

    pub fn update(&mut self, x: f64) -> Result<()> {
        if self.current.len() >= 2 * self.current.config().n_declared {
            let mut cfg = self.base;
            cfg.n_declared = self.current.config().n_declared * 2;
            let next = BinTree::new(cfg)?;
            let mut old = std::mem::replace(&mut self.current, next);
            old.freeze();
            self.done.push(old);
        }
        self.current.update(x)
    }

    pub fn freeze(&mut self) {
        self.current.freeze();
    }

    pub fn len(&self) -> u64 {
        self.done.iter().map(BinTree::len).sum::<u64>() + self.current.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn trees(&self) -> usize {
        self.done.len() + 1
    }

    pub fn space_words(&self) -> usize {
        self.done.iter().map(BinTree::space_words).sum::<usize>() + self.current.space_words()
    }

    pub fn query_sum(&self, q: f64) -> Result<f64> {
        let mut s = self.current.query_sum(q)?;
        for t in &self.done {
            s += t.query_sum(q)?;
        }
        Ok(s)
    }

    pub fn query(&self, q: f64) -> Result<f64> {
        let n = self.len();
        let s = self.query_sum(q)?;
        Ok(if n == 0 { 0.0 } else { s / n as f64 })
    }
}

impl LeftSumEstimator for DoublingBinTree {
    fn left_sum(&self, q: f64) -> Result<f64> {
        self.query_sum(q)
    }

    fn count(&self) -> u64 {
        self.len()
    }
}
