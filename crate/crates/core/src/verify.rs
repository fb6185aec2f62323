//! Self-check suite: module invariants, serialization round-trips and the
//! hard-instance decoders at oracle-feasible sizes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::add1d::{BinTree, BinTreeConfig};
use crate::add2d::{QuadTree, QuadTreeConfig};
use crate::codec::SketchCodec;
use crate::dyn1d::DynSketch1D;
use crate::error::Result;
use crate::gen::{closed_form_opt, decode_bits, gen_index1d, gen_index2d, gen_opt_hard, index1d_capacity, index2d_rings, HardInstanceSpec};
use crate::mult1d::{MultOptions, MultStream1D, OfflineSketch1D};
use crate::objective::{exact_optimize, left_sum};
use crate::types::{Power, SketchParams};

/// Defects the suite can be pointed at to prove it notices them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Fault {
    /// Streaming sketch built with four times the declared sample capacity.
    Capacity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub n: usize,
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            n: 4000,
            seed: 0,
            fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

type Outcome = std::result::Result<String, String>;

fn record(checks: &mut Vec<CheckResult>, name: &str, f: impl FnOnce() -> Result<Outcome>) {
    let (passed, detail) = match f() {
        Ok(Ok(d)) => (true, d),
        Ok(Err(d)) => (false, d),
        Err(e) => (false, format!("error: {e}")),
    };
    checks.push(CheckResult {
        name: name.into(),
        passed,
        detail,
    });
}

fn ints(rng: &mut ChaCha8Rng, n: usize, w: u64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(1..=w) as f64).collect()
}

/// Runs every check; never stops early.
pub fn verify(cfg: &VerifyConfig) -> VerifyReport {
    let mut checks = Vec::new();
    let n = cfg.n.max(100);
    let seed = cfg.seed;

    record(&mut checks, "offline1d bracket", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut xs = ints(&mut rng, n.min(2000), 1 << 16);
        xs.sort_by(f64::total_cmp);
        for eps in [1.0, 0.5, 0.1] {
            let sk = OfflineSketch1D::build(&xs, eps)?;
            for w in xs.windows(2) {
                let q = 0.5 * (w[0] + w[1]);
                let (t, exact) = (sk.query(q), left_sum(&xs, q, Power::Linear));
                if !(t <= exact * (1.0 + 1e-12) && exact <= (1.0 + eps) * t * (1.0 + 1e-12)) {
                    return Ok(Err(format!("eps {eps} seed {seed} q {q}: T {t} exact {exact}")));
                }
            }
        }
        Ok(Ok(format!("{} midpoints × 3 ε", xs.len() - 1)))
    });

    record(&mut checks, "mult1d space bound", || {
        let params = SketchParams {
            epsilon: 0.5,
            w: 1 << 10,
            n_hint: n as u64,
            seed,
            ..SketchParams::default()
        };
        let built = match cfg.fault {
            Some(Fault::Capacity) => SketchParams {
                c2: params.c2 * 4.0,
                ..params.clone()
            },
            None => params.clone(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sk = MultStream1D::new(built, MultOptions::default())?;
        let (m1, m2) = MultStream1D::capacities(&params);
        let bound = MultStream1D::retained_bound(&params);
        for (i, x) in ints(&mut rng, n, 1 << 10).into_iter().enumerate() {
            sk.update(x)?;
            let e = sk.e_bank().levels().iter().map(|l| l.len()).max().unwrap_or(0);
            let s = sk.s_bank().levels().iter().map(|l| l.len()).max().unwrap_or(0);
            if e > m1 || s > m2 || sk.retained() > bound {
                return Ok(Err(format!(
                    "after {} updates (seed {seed}): level sizes {e}/{s} vs capacities {m1}/{m2}, retained {} vs bound {bound}",
                    i + 1,
                    sk.retained()
                )));
            }
        }
        Ok(Ok(format!("retained {} ≤ {bound}", sk.retained())))
    });

    record(&mut checks, "mult1d exact below p", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs = ints(&mut rng, n, 1 << 16);
        let params = SketchParams {
            epsilon: 0.2,
            w: 1 << 16,
            n_hint: n as u64,
            seed,
            ..SketchParams::default()
        };
        let mut sk = MultStream1D::new(params, MultOptions::default())?;
        for &x in &xs {
            sk.update(x)?;
        }
        sk.freeze();
        let mut checked = 0;
        for _ in 0..200 {
            let q = rng.random_range(1..=1u64 << 16) as f64;
            let (est, br) = sk.query_breakdown(q)?;
            if q <= br.p {
                checked += 1;
                let exact = left_sum(&xs, q, Power::Linear);
                if (est - exact).abs() > 1e-9 * exact.max(1.0) {
                    return Ok(Err(format!("q {q} ≤ p {}: {est} vs {exact}", br.p)));
                }
            }
        }
        Ok(Ok(format!("{checked} queries at or below p")))
    });

    record(&mut checks, "dyn1d properties", || {
        let params = SketchParams {
            epsilon: 0.5,
            n_hint: n as u64,
            seed,
            ..SketchParams::default()
        };
        let mut sk = DynSketch1D::new(params)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..n.max(3 * sk.k()) {
            sk.update(rng.random::<f64>())?;
            for r in [sk.check_property2(), sk.check_property1(), sk.check_structure()] {
                if let Err(e) = r {
                    return Ok(Err(format!("update {}: {e}", i + 1)));
                }
            }
        }
        Ok(Ok(format!("{} intervals", sk.interval_count())))
    });

    record(&mut checks, "add1d additive error", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        for p in [Power::Linear, Power::Squared] {
            let mut t = BinTree::new(BinTreeConfig::new(0.05, n as u64, p))?;
            for &x in &xs {
                t.update(x)?;
            }
            t.freeze();
            t.check_invariants().map_err(crate::error::HskError::Format)?;
            for i in 0..=100 {
                let q = -1.2 + 2.4 * i as f64 / 100.0;
                let err = (t.query(q)? - left_sum(&xs, q, p) / n as f64).abs();
                if err > 0.05 {
                    return Ok(Err(format!("p {p:?} q {q}: error {err}")));
                }
            }
        }
        Ok(Ok("101 queries × 2 powers".into()))
    });

    record(&mut checks, "add2d structure", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
        let mut t = QuadTree::new(QuadTreeConfig::new(0.1, n as u64, Power::Linear, seed))?;
        for &(x, y) in &pts {
            t.update(x, y)?;
        }
        t.freeze();
        t.check_invariants().map_err(crate::error::HskError::Format)?;
        let exact: f64 = pts.iter().map(|&(x, y)| 2.0 - 0.6 * x - 0.8 * y).sum::<f64>() / n as f64;
        let est = t.query([0.6, 0.8], 2.0)?;
        if (est - exact).abs() > 1e-9 {
            return Ok(Err(format!("uncrossed query {est} vs {exact}")));
        }
        Ok(Ok(format!("{} nodes", t.node_count())))
    });

    record(&mut checks, "serialization round-trips", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs = ints(&mut rng, n.min(3000), 1 << 16);
        let qs: Vec<f64> = (0..20).map(|_| rng.random_range(1..=1u64 << 16) as f64).collect();
        let params = SketchParams {
            epsilon: 0.3,
            w: 1 << 16,
            n_hint: xs.len() as u64,
            seed,
            ..SketchParams::default()
        };
        let mut m = MultStream1D::new(params.clone(), MultOptions::default())?;
        let mut d = DynSketch1D::new(SketchParams { epsilon: 0.5, ..params })?;
        let mut b = BinTree::new(BinTreeConfig::new(0.1, xs.len() as u64, Power::Linear).with_radius(65536.0))?;
        for &x in &xs {
            m.update(x)?;
            d.update(x)?;
            b.update(x)?;
        }
        m.freeze();
        d.freeze();
        b.freeze();
        let mut sorted = xs.clone();
        sorted.sort_by(f64::total_cmp);
        let o = OfflineSketch1D::build(&sorted, 0.3)?;
        let m2 = MultStream1D::from_bytes(&m.to_bytes()?)?;
        let d2 = DynSketch1D::from_bytes(&d.to_bytes()?)?;
        let b2 = BinTree::from_bytes(&b.to_bytes()?)?;
        let o2 = OfflineSketch1D::from_bytes(&o.to_bytes()?)?;
        for &q in &qs {
            let pairs = [
                (m.query(q)?, m2.query(q)?),
                (d.query(q)?, d2.query(q)?),
                (b.query_sum(q)?, b2.query_sum(q)?),
                (o.query(q), o2.query(q)),
            ];
            if let Some(i) = pairs.iter().position(|(a, b)| a.to_bits() != b.to_bits()) {
                return Ok(Err(format!("sketch {i} differs after reload at q {q}")));
            }
        }
        Ok(Ok("4 sketch types".into()))
    });

    record(&mut checks, "index1d decoding", || {
        let eps = 0.01;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits: Vec<u8> = (0..index1d_capacity(eps)).map(|_| rng.random_range(0..2)).collect();
        let inst = gen_index1d(&bits, eps, 10_000)?;
        let mut t = BinTree::new(BinTreeConfig::new(eps / 3.0, inst.points.len().max(1) as u64, Power::Linear))?;
        for p in &inst.points {
            t.update(p.x[0])?;
        }
        t.freeze();
        let got = decode_bits(&inst, |q| t.query_sum(q.b))?;
        Ok(if got == bits {
            Ok(format!("{} bits", bits.len()))
        } else {
            Err(format!("decoded {got:?}, expected {bits:?}"))
        })
    });

    record(&mut checks, "index2d decoding", || {
        let s = 8;
        let r = index2d_rings(s);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits: Vec<u8> = (0..s * r).map(|_| rng.random_range(0..2)).collect();
        let inst = gen_index2d(&bits, s, r, 200 * s * r)?;
        let got = decode_bits(&inst, |q| {
            Ok(inst
                .points
                .iter()
                .map(|p| (q.b - q.theta[0] * p.x[0] - q.theta[1] * p.x[1]).max(0.0))
                .sum())
        })?;
        Ok(if got == bits {
            Ok(format!("{} bits", bits.len()))
        } else {
            Err("oracle decoding disagrees with the encoded bits".into())
        })
    });

    record(&mut checks, "closed-form optimum", || {
        for case in [false, true] {
            let inst = gen_opt_hard(&HardInstanceSpec::new(0.1, 400, 1, case, seed))?;
            let cf = closed_form_opt(0.1, 0.01, 400, case as u8)?;
            let opt = exact_optimize(&inst.points, 0.01, 1e-12)?;
            let diff = (opt.theta[0] - cf.theta).abs().max((opt.b - cf.b).abs());
            if diff > 1e-6 {
                return Ok(Err(format!("case {} differs by {diff}", case as u8)));
            }
        }
        Ok(Ok("both cases within 1e-6".into()))
    });

    VerifyReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_passes() {
        let r = verify(&VerifyConfig {
            n: 2000,
            ..VerifyConfig::default()
        });
        for c in &r.checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn capacity_fault_names_space_invariant() {
        let r = verify(&VerifyConfig {
            n: 2000,
            fault: Some(Fault::Capacity),
            ..VerifyConfig::default()
        });
        let failed: Vec<_> = r.failures().map(|c| c.name.as_str()).collect();
        assert_eq!(failed, vec!["mult1d space bound"]);
    }
}
