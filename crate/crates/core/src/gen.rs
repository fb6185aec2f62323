//! Seeded dataset generators: the indexing instances behind the space lower
//! bounds (with their decoders), the optimization hard instance with its
//! closed-form optimum, and synthetic benchmark layouts.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, HskError, Result};
use crate::types::{dot, HyperplaneQuery, Label, LabeledPoint};

/// Sidecar metadata written next to a generated stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub kind: String,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bits: Vec<u8>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub decoder: Vec<DecoderQuery>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<ClosedForm>,
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
}

/// One decoder query: the hyperplane, and the normalized signal a set bit
/// adds after prefix subtraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoderQuery {
    pub bit: usize,
    pub theta: Vec<f64>,
    pub b: f64,
    pub signal: f64,
}

/// Optimum of the hard instance: `θ* = theta·x_q`, bias `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub theta: f64,
    pub b: f64,
}

/// A generated stream with its metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub points: Vec<LabeledPoint>,
    pub meta: InstanceMeta,
}

fn meta(kind: &str, n: usize, d: usize, seed: u64) -> InstanceMeta {
    InstanceMeta {
        kind: kind.into(),
        n,
        d,
        seed,
        bits: Vec::new(),
        decoder: Vec::new(),
        closed_form: None,
        params: serde_json::Map::new(),
    }
}

fn check_bits(bits: &[u8], max: usize) -> Result<()> {
    if bits.len() > max {
        return Err(HskError::TooManyBits { len: bits.len(), max });
    }
    if bits.iter().any(|&b| b > 1) {
        return Err(invalid("bits", "entries must be 0 or 1"));
    }
    Ok(())
}

/// Largest bit count whose positions `3i√ε` stay inside `[0, 1)`.
pub fn index1d_capacity(epsilon: f64) -> usize {
    let step = 3.0 * epsilon.sqrt();
    let mut m = (1.0 / step).ceil() as usize;
    while m > 0 && (m - 1) as f64 * step >= 1.0 {
        m -= 1;
    }
    m.max(1)
}

/// `round(n√ε)` copies at `3i√ε` for every set bit `i`, labels `+1`.
/// Decoder query `i` is `θ = 1, b = 3(i+1)√ε` with signal `3ε`.
pub fn gen_index1d(bits: &[u8], epsilon: f64, n: usize) -> Result<Instance> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid("epsilon", "must be in (0,1)"));
    }
    check_bits(bits, index1d_capacity(epsilon))?;
    let r = epsilon.sqrt();
    let copies = (n as f64 * r).round() as usize;
    if copies == 0 {
        return Err(invalid("n", "too small for a single copy per bit"));
    }
    let mut points = Vec::new();
    let mut m = meta("index1d", n, 1, 0);
    for (i, &bit) in bits.iter().enumerate() {
        if bit == 1 {
            let x = 3.0 * i as f64 * r;
            points.extend((0..copies).map(|_| LabeledPoint { x: vec![x], y: Label::Pos }));
        }
        m.decoder.push(DecoderQuery {
            bit: i,
            theta: vec![1.0],
            b: 3.0 * (i + 1) as f64 * r,
            signal: copies as f64 * 3.0 * r / n as f64,
        });
    }
    m.bits = bits.to_vec();
    m.params.insert("epsilon".into(), epsilon.into());
    m.params.insert("copies".into(), copies.into());
    Ok(Instance { points, meta: m })
}

/// Position of bit `(j−1)s + i`: angle `2πi/s`, radius `1 − (j−1)/(2r)`.
fn index2d_position(bit: usize, s: usize, r: usize) -> [f64; 2] {
    let (i, j) = (bit % s, bit / s + 1);
    let rad = 1.0 - (j - 1) as f64 / (2.0 * r as f64);
    let a = TAU * i as f64 / s as f64;
    [rad * a.cos(), rad * a.sin()]
}

/// Whether a query plane of ring `j` excludes the neighbouring angles of
/// the same ring for every `j ≤ r`.
pub fn index2d_separated(s: usize, r: usize) -> bool {
    let gap = 1.0 - (TAU / s as f64).cos();
    (1..=r).all(|j| {
        let rad = 1.0 - (j - 1) as f64 / (2.0 * r as f64);
        rad * (1.0 - gap) <= 1.0 - j as f64 / (2.0 * r as f64)
    })
}

/// Smallest ring count `r` separating `s` angles.
pub fn index2d_rings(s: usize) -> usize {
    (1..).find(|&r| index2d_separated(s, r)).unwrap()
}

/// `⌊n/(sr)⌋` copies per set bit at its polar position, labels `+1`.
///
/// Decoder query for a bit at angle `u` and ring `j` is the halfplane
/// `θ = −u`, `b = −(1 − j/(2r))`, whose signal after subtracting the
/// already-decoded bits is `(copies/n)·1/(2r)`.
pub fn gen_index2d(bits: &[u8], s: usize, r: usize, n: usize) -> Result<Instance> {
    if s < 3 || r == 0 {
        return Err(invalid("s/r", "need s ≥ 3 and r ≥ 1"));
    }
    check_bits(bits, s * r)?;
    let copies = n / (s * r);
    if copies == 0 {
        return Err(invalid("n", "too small for a single copy per bit"));
    }
    let mut points = Vec::new();
    let mut m = meta("index2d", n, 2, 0);
    for (k, &bit) in bits.iter().enumerate() {
        let pos = index2d_position(k, s, r);
        if bit == 1 {
            points.extend((0..copies).map(|_| LabeledPoint { x: pos.to_vec(), y: Label::Pos }));
        }
        let a = TAU * (k % s) as f64 / s as f64;
        let j = k / s + 1;
        m.decoder.push(DecoderQuery {
            bit: k,
            theta: vec![-a.cos(), -a.sin()],
            b: -(1.0 - j as f64 / (2.0 * r as f64)),
            signal: copies as f64 / (2.0 * r as f64) / n as f64,
        });
    }
    m.bits = bits.to_vec();
    m.params.insert("s".into(), s.into());
    m.params.insert("r".into(), r.into());
    m.params.insert("copies".into(), copies.into());
    m.params.insert("separated".into(), index2d_separated(s, r).into());
    Ok(Instance { points, meta: m })
}

/// Recovers the bits from an estimator of `Σ max{0, b − θ·x}` (unnormalized)
/// by querying in order and subtracting the exact contribution of the bits
/// already decoded. A bit is set when the residual exceeds half its signal.
pub fn decode_bits<F>(inst: &Instance, mut estimate_sum: F) -> Result<Vec<u8>>
where
    F: FnMut(&HyperplaneQuery) -> Result<f64>,
{
    let m = &inst.meta;
    let num = |k: &str| m.params.get(k).and_then(|v| v.as_f64()).ok_or_else(|| invalid("meta", format!("missing `{k}`")));
    let copies = num("copies")?;
    let positions: Vec<Vec<f64>> = match m.kind.as_str() {
        "index1d" => {
            let r = num("epsilon")?.sqrt();
            (0..m.decoder.len()).map(|i| vec![3.0 * i as f64 * r]).collect()
        }
        "index2d" => {
            let (s, r) = (num("s")? as usize, num("r")? as usize);
            (0..m.decoder.len()).map(|k| index2d_position(k, s, r).to_vec()).collect()
        }
        other => return Err(invalid("kind", format!("{other} has no decoder"))),
    };
    let n = m.n as f64;
    let mut out = Vec::with_capacity(m.decoder.len());
    for dq in &m.decoder {
        let q = HyperplaneQuery::new(dq.theta.clone(), dq.b);
        let known: f64 = out
            .iter()
            .enumerate()
            .filter(|&(_, &bit)| bit == 1)
            .map(|(k, _)| copies * (dq.b - dot(&dq.theta, &positions[k])).max(0.0))
            .sum();
        let residual = (estimate_sum(&q)? - known) / n;
        out.push((residual > 0.5 * dq.signal) as u8);
    }
    Ok(out)
}

/// Parameters of the optimization hard instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardInstanceSpec {
    pub delta: f64,
    pub n: usize,
    pub d: usize,
    pub include_query_point: bool,
    pub seed: u64,
    /// Rejection attempts allowed per filler point.
    pub max_attempts: usize,
}

impl HardInstanceSpec {
    pub fn new(delta: f64, n: usize, d: usize, include_query_point: bool, seed: u64) -> Self {
        Self {
            delta,
            n,
            d,
            include_query_point,
            seed,
            max_attempts: 10_000,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.delta * self.delta
    }
}

fn check_regime(delta: f64, lambda: f64, n: usize) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0 / 7.0) {
        return Err(HskError::ValidityRegime(format!("delta = {delta} must lie in (0, 1/7)")));
    }
    if (lambda - delta * delta).abs() > 1e-12 * delta * delta {
        return Err(HskError::ValidityRegime(format!("lambda = {lambda} must equal delta² = {}", delta * delta)));
    }
    if (n as f64) < 1.0 / (delta * delta) * (1.0 - 1e-12) {
        return Err(HskError::ValidityRegime(format!("n = {n} must be at least 1/delta²")));
    }
    Ok(())
}

/// Uniform point in the unit ball of `R^d`.
fn unit_ball<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            let rad = rng.random::<f64>().powf(1.0 / d as f64);
            return g.into_iter().map(|v| v * rad / norm).collect();
        }
    }
}

/// `n/4` copies of `((1−δ)x_q, −1)`, `n/4` of `((1+δ)x_q, +1)`, in case 1
/// one `(x_q, −1)`, the rest random unit-ball fillers with `v·x_q < 1 − 10δ`
/// labeled `−1`. `x_q = e₁`; the stream has exactly `n` points.
pub fn gen_opt_hard(spec: &HardInstanceSpec) -> Result<Instance> {
    check_regime(spec.delta, spec.lambda(), spec.n)?;
    if spec.d == 0 {
        return Err(invalid("d", "must be at least 1"));
    }
    let d = spec.d;
    let delta = spec.delta;
    let mut xq = vec![0.0; d];
    xq[0] = 1.0;
    let scaled = |s: f64| xq.iter().map(|v| v * s).collect::<Vec<f64>>();
    let quarter = spec.n / 4;
    let mut points = Vec::with_capacity(spec.n);
    points.extend((0..quarter).map(|_| LabeledPoint { x: scaled(1.0 - delta), y: Label::Neg }));
    points.extend((0..quarter).map(|_| LabeledPoint { x: scaled(1.0 + delta), y: Label::Pos }));
    if spec.include_query_point {
        points.push(LabeledPoint { x: xq.clone(), y: Label::Neg });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let limit = 1.0 - 10.0 * delta;
    while points.len() < spec.n {
        let mut attempts = 0;
        let v = loop {
            attempts += 1;
            if attempts > spec.max_attempts {
                return Err(HskError::RejectionBudget { attempts: spec.max_attempts });
            }
            let v = unit_ball(&mut rng, d);
            if dot(&v, &xq) < limit {
                break v;
            }
        };
        points.push(LabeledPoint { x: v, y: Label::Neg });
    }
    let case = spec.include_query_point as u8;
    let cf = closed_form_opt(delta, spec.lambda(), spec.n, case)?;
    let mut m = meta("opt", spec.n, d, spec.seed);
    m.closed_form = Some(cf);
    m.params.insert("delta".into(), delta.into());
    m.params.insert("lambda".into(), spec.lambda().into());
    m.params.insert("case".into(), case.into());
    Ok(Instance { points, meta: m })
}

/// Optimum of the hard instance along `x_q`:
/// `θ* = (2λ(1+δ) + δ')/(2λ(1+(1+δ)²))`, `b* = 1 − (1+δ)θ*`, with `δ' = δ`
/// in case 0 and `δ' = δ(1 + 2/n)` in case 1.
pub fn closed_form_opt(delta: f64, lambda: f64, n: usize, case: u8) -> Result<ClosedForm> {
    check_regime(delta, lambda, n)?;
    let num_extra = match case {
        0 => delta,
        1 => delta * (1.0 + 2.0 / n as f64),
        _ => return Err(invalid("case", "must be 0 or 1")),
    };
    let theta = (2.0 * lambda * (1.0 + delta) + num_extra) / (2.0 * lambda * (1.0 + (1.0 + delta).powi(2)));
    Ok(ClosedForm {
        theta,
        b: 1.0 - (1.0 + delta) * theta,
    })
}

/// Synthetic point placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Layout {
    /// Uniform in the unit ball.
    Ball,
    /// Uniform in the unit ball intersected with the nonnegative orthant;
    /// `[0, 1]` for `d = 1`.
    Positive,
}

fn place<R: Rng>(rng: &mut R, d: usize, layout: Layout) -> Vec<f64> {
    let mut v = unit_ball(rng, d);
    if layout == Layout::Positive {
        v.iter_mut().for_each(|c| *c = c.abs());
    }
    v
}

/// Labels from a planted halfspace through a random unit direction, each
/// flipped with probability `noise`.
fn planted_labels<R: Rng>(rng: &mut R, xs: Vec<Vec<f64>>, d: usize, noise: f64) -> Vec<LabeledPoint> {
    let dir = unit_ball(rng, d);
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
    let mean: Vec<f64> = (0..d).map(|j| xs.iter().map(|x| x[j]).sum::<f64>() / xs.len().max(1) as f64).collect();
    let offset = dot(&dir, &mean) / norm;
    xs.into_iter()
        .map(|x| {
            let side = dot(&dir, &x) / norm >= offset;
            let flip = rng.random::<f64>() < noise;
            let y = if side != flip { Label::Pos } else { Label::Neg };
            LabeledPoint { x, y }
        })
        .collect()
}

/// `n` seeded points from `layout`, labeled by a noisy planted halfspace.
pub fn gen_uniform(n: usize, d: usize, seed: u64, layout: Layout, noise: f64) -> Result<Instance> {
    if d == 0 {
        return Err(invalid("d", "must be at least 1"));
    }
    if !(0.0..=0.5).contains(&noise) {
        return Err(invalid("noise", "must lie in [0, 0.5]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<Vec<f64>> = (0..n).map(|_| place(&mut rng, d, layout)).collect();
    let points = planted_labels(&mut rng, xs, d, noise);
    let mut m = meta("uniform", n, d, seed);
    m.params.insert("layout".into(), format!("{layout:?}").to_lowercase().into());
    m.params.insert("noise".into(), noise.into());
    Ok(Instance { points, meta: m })
}

/// `n` seeded points around `clusters` centers with Gaussian spread
/// `spread`, pulled back into the layout's region; labeled as in
/// [`gen_uniform`].
pub fn gen_clustered(
    n: usize,
    d: usize,
    seed: u64,
    layout: Layout,
    clusters: usize,
    spread: f64,
    noise: f64,
) -> Result<Instance> {
    if d == 0 || clusters == 0 {
        return Err(invalid("d/clusters", "must be at least 1"));
    }
    if !(spread >= 0.0) || !(0.0..=0.5).contains(&noise) {
        return Err(invalid("spread/noise", "spread ≥ 0, noise in [0, 0.5]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..clusters).map(|_| place(&mut rng, d, layout)).collect();
    let xs: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let c = &centers[rng.random_range(0..clusters)];
            let mut v: Vec<f64> = c
                .iter()
                .map(|&ci| {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    ci + spread * g
                })
                .collect();
            if layout == Layout::Positive {
                v.iter_mut().for_each(|x| *x = x.abs());
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1.0 {
                v.iter_mut().for_each(|x| *x /= norm);
            }
            v
        })
        .collect();
    let points = planted_labels(&mut rng, xs, d, noise);
    let mut m = meta("clustered", n, d, seed);
    m.params.insert("layout".into(), format!("{layout:?}").to_lowercase().into());
    m.params.insert("clusters".into(), clusters.into());
    m.params.insert("spread".into(), spread.into());
    m.params.insert("noise".into(), noise.into());
    Ok(Instance { points, meta: m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{exact_optimize, simplified_objective};
    use crate::types::Power;

    fn exact_sum(pts: &[LabeledPoint], q: &HyperplaneQuery) -> Result<f64> {
        if pts.is_empty() {
            return Ok(0.0);
        }
        Ok(simplified_objective(pts, q, Power::Linear)? * pts.len() as f64)
    }

    #[test]
    fn index1d_all_zero_is_empty() {
        let inst = gen_index1d(&[0, 0, 0], 0.01, 1000).unwrap();
        assert!(inst.points.is_empty());
        assert_eq!(decode_bits(&inst, |q| exact_sum(&inst.points, q)).unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn index1d_first_bit_signal() {
        let inst = gen_index1d(&[1, 0], 0.01, 1000).unwrap();
        assert_eq!(inst.points.len(), 100);
        assert!(inst.points.iter().all(|p| p.x == vec![0.0]));
        let q = &inst.meta.decoder[0];
        assert!((q.b - 0.3).abs() < 1e-12);
        let v = exact_sum(&inst.points, &HyperplaneQuery::new(q.theta.clone(), q.b)).unwrap() / 1000.0;
        assert!((v - 0.03).abs() < 1e-12);
    }

    #[test]
    fn index1d_capacity_keeps_positions_in_unit_interval() {
        for eps in [0.01, 0.003, 0.1, 0.5] {
            let m = index1d_capacity(eps);
            assert!(3.0 * (m - 1) as f64 * eps.sqrt() < 1.0);
            assert!(gen_index1d(&vec![1; m + 1], eps, 100).is_err());
        }
    }

    #[test]
    fn index_exact_decoding() {
        let bits = [1, 0, 1, 1, 0, 1];
        let inst = gen_index1d(&bits, 0.002, 20000).unwrap();
        assert_eq!(decode_bits(&inst, |q| exact_sum(&inst.points, q)).unwrap(), bits);
        let s = 8;
        let r = index2d_rings(s);
        let bits2: Vec<u8> = (0..s * r).map(|k| ((k * 7 + 3) % 5 < 2) as u8).collect();
        let inst = gen_index2d(&bits2, s, r, 100 * s * r).unwrap();
        assert_eq!(decode_bits(&inst, |q| exact_sum(&inst.points, q)).unwrap(), bits2);
    }

    #[test]
    fn index2d_single_bit_signal() {
        let (s, r) = (8, index2d_rings(8));
        let mut bits = vec![0u8; s * r];
        bits[s + 2] = 1;
        let n = 10 * s * r;
        let inst = gen_index2d(&bits, s, r, n).unwrap();
        let q = &inst.meta.decoder[s + 2];
        let v = exact_sum(&inst.points, &HyperplaneQuery::new(q.theta.clone(), q.b)).unwrap() / n as f64;
        assert!((v - 1.0 / (s * r) as f64 / (2.0 * r as f64)).abs() < 1e-12);
        for (k, q) in inst.meta.decoder.iter().enumerate() {
            if k != s + 2 && (k < s + 2 || k / s == 1) {
                let v = exact_sum(&inst.points, &HyperplaneQuery::new(q.theta.clone(), q.b)).unwrap();
                assert_eq!(v, 0.0, "bit {k}");
            }
        }
    }

    #[test]
    fn index2d_neighbours_excluded() {
        for s in [5, 8, 12, 20] {
            let r = index2d_rings(s);
            assert!(index2d_separated(s, r));
            assert!(r == 1 || !index2d_separated(s, r - 1));
        }
    }

    #[test]
    fn closed_form_examples() {
        let c0 = closed_form_opt(0.1, 0.01, 400, 0).unwrap();
        assert!((c0.theta - 0.122 / 0.0442).abs() < 1e-12);
        assert!((c0.theta - 2.7602).abs() < 1e-4 && (c0.b + 2.0362).abs() < 1e-4);
        let c1 = closed_form_opt(0.1, 0.01, 100, 1).unwrap();
        assert!((c1.theta - 0.124 / 0.0442).abs() < 1e-12);
        assert!(c1.theta - c0.theta >= 0.1 / (5.0 * 0.01 * 100.0));
        assert!(matches!(closed_form_opt(0.2, 0.04, 100, 0), Err(HskError::ValidityRegime(_))));
        assert!(matches!(closed_form_opt(0.1, 0.02, 100, 0), Err(HskError::ValidityRegime(_))));
        assert!(matches!(closed_form_opt(0.1, 0.01, 99, 0), Err(HskError::ValidityRegime(_))));
    }

    #[test]
    fn opt_hard_case0_layout() {
        let inst = gen_opt_hard(&HardInstanceSpec::new(0.1, 400, 1, false, 5)).unwrap();
        let at = |v: f64, y: Label| inst.points.iter().filter(|p| (p.x[0] - v).abs() < 1e-12 && p.y == y).count();
        assert_eq!(at(0.9, Label::Neg), 100);
        assert_eq!(at(1.1, Label::Pos), 100);
        assert_eq!(inst.points.len(), 400);
        assert_eq!(inst.points[200..].iter().filter(|p| p.x[0] < 0.0 && p.y == Label::Neg).count(), 200);
        let inst1 = gen_opt_hard(&HardInstanceSpec::new(0.1, 400, 1, true, 5)).unwrap();
        assert_eq!(inst1.points.iter().filter(|p| p.x[0] == 1.0).count(), 1);
    }

    #[test]
    fn exact_optimizer_matches_closed_form() {
        for (case, d) in [(false, 1), (true, 1), (false, 3), (true, 2)] {
            let inst = gen_opt_hard(&HardInstanceSpec::new(0.1, 400, d, case, 11)).unwrap();
            let cf = inst.meta.closed_form.unwrap();
            let opt = exact_optimize(&inst.points, 0.01, 1e-12).unwrap();
            assert!((opt.theta[0] - cf.theta).abs() < 1e-6, "case {case} d {d}: {} vs {}", opt.theta[0], cf.theta);
            assert!((opt.b - cf.b).abs() < 1e-6);
            assert!(opt.theta[1..].iter().all(|t| t.abs() < 1e-6));
            for p in &inst.points[200 + case as usize..] {
                assert!(1.0 + cf.theta * p.x[0] + cf.b < 0.0);
            }
        }
    }

    #[test]
    fn uniform_is_seeded_and_bounded() {
        let a = gen_uniform(5000, 1, 9, Layout::Positive, 0.1).unwrap();
        let b = gen_uniform(5000, 1, 9, Layout::Positive, 0.1).unwrap();
        assert_eq!(a, b);
        let mean = a.points.iter().map(|p| p.x[0]).sum::<f64>() / 5000.0;
        let sigma = (1.0f64 / 12.0 / 5000.0).sqrt();
        assert!((mean - 0.5).abs() < 5.0 * sigma);
        let c = gen_clustered(2000, 2, 3, Layout::Ball, 4, 0.2, 0.0).unwrap();
        assert!(c.points.iter().all(|p| p.norm() <= 1.0 + 1e-12));
    }
}
