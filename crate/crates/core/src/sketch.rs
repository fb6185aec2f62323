//! Type-erased sketch: build any backend from one spec, query through a
//! hyperplane, and load a sketch file by its type tag.

use serde::Serialize;

use crate::add1d::{BinTree, BinTreeConfig};
use crate::add2d::{QuadTree, QuadTreeConfig};
use crate::codec::{peek_tag, SketchCodec};
use crate::dyn1d::DynSketch1D;
use crate::error::{invalid, HskError, Result};
use crate::estimator::LeftSumEstimator;
use crate::mult1d::{MultOptions, MultStream1D, OfflineSketch1D, Universe};
use crate::optimize::Backend;
use crate::types::{HyperplaneQuery, Power, SketchParams};

/// Everything needed to construct a sketch of any backend.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BuildSpec {
    pub backend: Backend,
    pub epsilon: f64,
    pub p: Power,
    pub n_hint: u64,
    pub seed: u64,
    pub w: u64,
    pub universe: Universe,
    pub c1: f64,
    pub c2: f64,
    pub c: f64,
    /// add1d domain `[−radius, radius]`.
    pub radius: f64,
    /// add2d domain `[lo, hi]²`.
    pub lo: f64,
    pub hi: f64,
}

impl BuildSpec {
    pub fn new(backend: Backend, epsilon: f64, n_hint: u64, seed: u64) -> Self {
        let d = SketchParams::default();
        Self {
            backend,
            epsilon,
            p: Power::Linear,
            n_hint,
            seed,
            w: d.w,
            universe: Universe::Real,
            c1: d.c1,
            c2: d.c2,
            c: d.c,
            radius: 1.0,
            lo: 0.0,
            hi: 1.0,
        }
    }

    fn params(&self) -> SketchParams {
        SketchParams {
            epsilon: self.epsilon,
            w: self.w,
            n_hint: self.n_hint.max(1),
            c1: self.c1,
            c2: self.c2,
            c: self.c,
            p: self.p,
            seed: self.seed,
        }
    }
}

/// Incremental construction; the offline backend buffers its input.
#[derive(Debug)]
pub enum SketchBuilder {
    Offline { epsilon: f64, values: Vec<f64> },
    Ready(AnySketch),
}

impl SketchBuilder {
    pub fn new(spec: &BuildSpec) -> Result<Self> {
        if spec.p == Power::Squared && !spec.backend.is_additive() {
            return Err(invalid("p", format!("{} supports only p = 1", spec.backend)));
        }
        Ok(match spec.backend {
            Backend::Offline1d => {
                if !(spec.epsilon > 0.0 && spec.epsilon <= 1.0) {
                    return Err(invalid("epsilon", "must be in (0, 1]"));
                }
                SketchBuilder::Offline {
                    epsilon: spec.epsilon,
                    values: Vec::new(),
                }
            }
            Backend::Mult1d => {
                let opts = MultOptions {
                    universe: spec.universe,
                    ..MultOptions::default()
                };
                SketchBuilder::Ready(AnySketch::Mult(MultStream1D::new(spec.params(), opts)?))
            }
            Backend::Dyn1d => SketchBuilder::Ready(AnySketch::Dyn(DynSketch1D::new(spec.params())?)),
            Backend::Add1d => SketchBuilder::Ready(AnySketch::Add1(BinTree::new(
                BinTreeConfig::new(spec.epsilon, spec.n_hint.max(1), spec.p).with_radius(spec.radius),
            )?)),
            Backend::Add2d => SketchBuilder::Ready(AnySketch::Add2(QuadTree::new(
                QuadTreeConfig::new(spec.epsilon, spec.n_hint.max(1), spec.p, spec.seed).with_domain(spec.lo, spec.hi),
            )?)),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            SketchBuilder::Offline { .. } => 1,
            SketchBuilder::Ready(s) => s.dim(),
        }
    }

    pub fn update(&mut self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(HskError::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        match self {
            SketchBuilder::Offline { values, .. } => {
                if !x[0].is_finite() {
                    return Err(invalid("x", "non-finite value"));
                }
                values.push(x[0]);
                Ok(())
            }
            SketchBuilder::Ready(AnySketch::Mult(s)) => s.update(x[0]),
            SketchBuilder::Ready(AnySketch::Dyn(s)) => s.update(x[0]),
            SketchBuilder::Ready(AnySketch::Add1(s)) => s.update(x[0]),
            SketchBuilder::Ready(AnySketch::Add2(s)) => s.update(x[0], x[1]),
            SketchBuilder::Ready(AnySketch::Offline(_)) => Err(HskError::Frozen),
        }
    }

    /// Freezes and returns the queryable sketch.
    pub fn finish(self) -> Result<AnySketch> {
        Ok(match self {
            SketchBuilder::Offline { epsilon, mut values } => {
                values.sort_by(f64::total_cmp);
                AnySketch::Offline(OfflineSketch1D::build(&values, epsilon)?)
            }
            SketchBuilder::Ready(mut s) => {
                s.freeze();
                s
            }
        })
    }
}

/// A frozen sketch of any backend.
#[derive(Debug, Clone)]
pub enum AnySketch {
    Offline(OfflineSketch1D),
    Mult(MultStream1D),
    Dyn(DynSketch1D),
    Add1(BinTree),
    Add2(QuadTree),
}

impl AnySketch {
    pub fn backend(&self) -> Backend {
        match self {
            AnySketch::Offline(_) => Backend::Offline1d,
            AnySketch::Mult(_) => Backend::Mult1d,
            AnySketch::Dyn(_) => Backend::Dyn1d,
            AnySketch::Add1(_) => Backend::Add1d,
            AnySketch::Add2(_) => Backend::Add2d,
        }
    }

    pub fn dim(&self) -> usize {
        self.backend().dimension()
    }

    pub fn power(&self) -> Power {
        match self {
            AnySketch::Add1(t) => t.config().p,
            AnySketch::Add2(t) => t.config().p,
            _ => Power::Linear,
        }
    }

    pub fn len(&self) -> u64 {
        match self {
            AnySketch::Offline(s) => s.len(),
            AnySketch::Mult(s) => s.len(),
            AnySketch::Dyn(s) => s.len(),
            AnySketch::Add1(s) => s.len(),
            AnySketch::Add2(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn space_words(&self) -> usize {
        match self {
            AnySketch::Offline(s) => s.space_words(),
            AnySketch::Mult(s) => s.space_words(),
            AnySketch::Dyn(s) => s.space_words(),
            AnySketch::Add1(s) => s.space_words(),
            AnySketch::Add2(s) => s.space_words(),
        }
    }

    fn freeze(&mut self) {
        match self {
            AnySketch::Offline(_) => {}
            AnySketch::Mult(s) => s.freeze(),
            AnySketch::Dyn(s) => s.freeze(),
            AnySketch::Add1(s) => s.freeze(),
            AnySketch::Add2(s) => s.freeze(),
        }
    }

    /// Unnormalized `Σ max{0, q − x}^p` (one-dimensional sketches).
    pub fn left_sum(&self, q: f64) -> Result<f64> {
        match self {
            AnySketch::Offline(s) => s.left_sum(q),
            AnySketch::Mult(s) => s.left_sum(q),
            AnySketch::Dyn(s) => s.left_sum(q),
            AnySketch::Add1(s) => s.left_sum(q),
            AnySketch::Add2(_) => Err(invalid("q", "planar sketch needs a direction")),
        }
    }

    /// Unnormalized estimate of `Σ (max{0, b − θ·x})^p`. One-dimensional
    /// sketches accept `θ ≥ 0`; negative directions need a sketch of `−x`.
    pub fn query_sum(&self, q: &HyperplaneQuery) -> Result<f64> {
        if q.dim() != self.dim() {
            return Err(HskError::DimensionMismatch {
                expected: self.dim(),
                actual: q.dim(),
            });
        }
        let p = self.power();
        if let AnySketch::Add2(t) = self {
            if q.norm() == 0.0 {
                return Ok(p.apply(q.b.max(0.0)) * self.len() as f64);
            }
            return t.query_sum_any([q.theta[0], q.theta[1]], q.b);
        }
        let th = q.theta[0];
        if th > 0.0 {
            Ok(p.apply(th) * self.left_sum(q.b / th)?)
        } else if th == 0.0 {
            Ok(p.apply(q.b.max(0.0)) * self.len() as f64)
        } else {
            Err(HskError::Unsupported(
                "negative direction on a one-dimensional sketch; sketch the negated stream".into(),
            ))
        }
    }

    /// `query_sum / n`, 0 on an empty sketch.
    pub fn query(&self, q: &HyperplaneQuery) -> Result<f64> {
        let s = self.query_sum(q)?;
        Ok(if self.is_empty() { 0.0 } else { s / self.len() as f64 })
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        match self {
            AnySketch::Offline(s) => s.to_bytes(),
            AnySketch::Mult(s) => s.to_bytes(),
            AnySketch::Dyn(s) => s.to_bytes(),
            AnySketch::Add1(s) => s.to_bytes(),
            AnySketch::Add2(s) => s.to_bytes(),
        }
    }

    /// Loads any sketch file, dispatching on its type tag.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let tag = peek_tag(bytes)?;
        Ok(match &tag {
            t if *t == OfflineSketch1D::TAG => AnySketch::Offline(OfflineSketch1D::from_bytes(bytes)?),
            t if *t == MultStream1D::TAG => AnySketch::Mult(MultStream1D::from_bytes(bytes)?),
            t if *t == DynSketch1D::TAG => AnySketch::Dyn(DynSketch1D::from_bytes(bytes)?),
            t if *t == BinTree::TAG => AnySketch::Add1(BinTree::from_bytes(bytes)?),
            t if *t == QuadTree::TAG => AnySketch::Add2(QuadTree::from_bytes(bytes)?),
            _ => {
                return Err(HskError::Format(format!(
                    "unknown type tag {:?}",
                    String::from_utf8_lossy(&tag)
                )))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_backend_roundtrips_by_tag() {
        for b in Backend::ALL {
            let mut spec = BuildSpec::new(b, 0.2, 500, 7);
            spec.radius = 1.0;
            let mut builder = SketchBuilder::new(&spec).unwrap();
            for i in 0..500 {
                let v = ((i * 37) % 500) as f64 / 500.0;
                let x = if b == Backend::Add2d { vec![v, 1.0 - v] } else { vec![v] };
                builder.update(&x).unwrap();
            }
            let s = builder.finish().unwrap();
            let q = if b == Backend::Add2d {
                HyperplaneQuery::new(vec![0.6, 0.8], 0.7)
            } else {
                HyperplaneQuery::new(vec![2.0], 1.0)
            };
            let back = AnySketch::from_bytes(&s.to_bytes().unwrap()).unwrap();
            assert_eq!(back.backend(), b);
            assert_eq!(s.query(&q).unwrap().to_bits(), back.query(&q).unwrap().to_bits());
        }
    }

    #[test]
    fn negative_direction_unsupported_in_1d() {
        let mut b = SketchBuilder::new(&BuildSpec::new(Backend::Add1d, 0.1, 10, 0)).unwrap();
        b.update(&[0.5]).unwrap();
        let s = b.finish().unwrap();
        assert!(matches!(s.query(&HyperplaneQuery::new(vec![-1.0], 0.0)), Err(HskError::Unsupported(_))));
        assert_eq!(s.query(&HyperplaneQuery::new(vec![0.0], 2.0)).unwrap(), 2.0);
    }
}
