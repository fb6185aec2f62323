//! Domain types shared by every sketch: labeled points, hyperplane queries
//! and the common parameter block.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, HskError, Result};

/// Class label of a stream element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Neg,
    Pos,
}

impl Label {
    pub fn from_i64(v: i64) -> Result<Self> {
        match v {
            1 => Ok(Label::Pos),
            -1 => Ok(Label::Neg),
            _ => Err(HskError::BadLabel),
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Label::Pos => 1.0,
            Label::Neg => -1.0,
        }
    }
}

/// A point `x ∈ R^d` with a ±1 label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub x: Vec<f64>,
    pub y: Label,
}

impl LabeledPoint {
    /// Builds a point, checking that the dimension is positive and every
    /// coordinate is finite. The norm bound is checked by [`check_norm`].
    ///
    /// [`check_norm`]: LabeledPoint::check_norm
    pub fn new(x: Vec<f64>, y: Label) -> Result<Self> {
        if x.is_empty() {
            return Err(invalid("x", "dimension must be at least 1"));
        }
        if let Some(v) = x.iter().find(|v| !v.is_finite()) {
            return Err(invalid("x", format!("non-finite coordinate {v}")));
        }
        Ok(Self { x, y })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.x)
    }

    pub fn check_norm(&self, bound: f64) -> Result<()> {
        let norm = self.norm();
        // Allow for rounding in coordinates produced as r·cos/r·sin.
        if norm > bound * (1.0 + 1e-12) {
            return Err(HskError::NormViolation { norm, bound });
        }
        Ok(())
    }
}

/// Query hyperplane `(θ, b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperplaneQuery {
    pub theta: Vec<f64>,
    pub b: f64,
}

impl HyperplaneQuery {
    pub fn new(theta: Vec<f64>, b: f64) -> Self {
        Self { theta, b }
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    /// `‖(θ, b)‖₂`
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.theta, &self.theta) + self.b * self.b
    }

    pub fn check_norm(&self, budget: f64) -> Result<()> {
        let n = self.norm();
        if n > budget * (1.0 + 1e-12) {
            return Err(invalid(
                "query",
                format!("‖(θ,b)‖ = {n} exceeds the norm budget {budget}"),
            ));
        }
        Ok(())
    }

    /// Rescales to `‖θ‖ = 1`; returns the scale that was divided out.
    pub fn normalized(&self) -> Result<(HyperplaneQuery, f64)> {
        let s = norm2(&self.theta);
        if s == 0.0 {
            return Err(HskError::ZeroDirection);
        }
        let theta = self.theta.iter().map(|t| t / s).collect();
        Ok((HyperplaneQuery::new(theta, self.b / s), s))
    }
}

/// Exponent applied to the one-sided distance: 1 for the hinge sum, 2 for
/// the squared variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Power {
    Linear,
    Squared,
}

impl Power {
    pub fn from_u8(p: u8) -> Result<Self> {
        match p {
            1 => Ok(Power::Linear),
            2 => Ok(Power::Squared),
            _ => Err(invalid("p", format!("exponent must be 1 or 2, got {p}"))),
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Power::Linear => 1,
            Power::Squared => 2,
        }
    }

    #[inline]
    pub fn apply(self, d: f64) -> f64 {
        match self {
            Power::Linear => d,
            Power::Squared => d * d,
        }
    }
}

/// Parameters shared by the sampling-based sketches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SketchParams {
    pub epsilon: f64,
    /// Coordinate universe bound `W` (integer mode quantizes to `[1, W]`).
    pub w: u64,
    /// Declared stream length.
    pub n_hint: u64,
    pub c1: f64,
    pub c2: f64,
    pub c: f64,
    pub p: Power,
    pub seed: u64,
}

impl Default for SketchParams {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            w: 1 << 20,
            n_hint: 100_000,
            c1: 8.0,
            c2: 32.0,
            c: 1.0,
            p: Power::Linear,
            seed: 0,
        }
    }
}

impl SketchParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(invalid("epsilon", format!("{} not in (0,1)", self.epsilon)));
        }
        if self.n_hint == 0 {
            return Err(invalid("n_hint", "must be at least 1"));
        }
        if self.w < 2 {
            return Err(invalid("w", "universe bound must be at least 2"));
        }
        for (name, v) in [("c1", self.c1), ("c2", self.c2), ("c", self.c)] {
            if !(v >= 1.0 && v.is_finite()) {
                return Err(invalid(name, format!("sampling constant {v} must be ≥ 1")));
            }
        }
        Ok(())
    }

    /// `⌈log₂ W⌉`, at least 1.
    pub fn log_w(&self) -> u32 {
        ceil_log2(self.w).max(1)
    }

    /// `⌈log₂ n⌉`, at least 1.
    pub fn log_n(&self) -> u32 {
        ceil_log2(self.n_hint).max(1)
    }
}

/// Real-mode universe bound: `W` such that values spaced `precision` apart
/// over a range of width `span` are distinguishable.
pub fn universe_from_precision(span: f64, precision: f64) -> Result<u64> {
    if !(span > 0.0 && precision > 0.0) {
        return Err(invalid("precision", "span and precision must be positive"));
    }
    Ok(((span / precision).ceil() as u64).max(2))
}

/// Maps a real coordinate in `[lo, hi]` to the integer universe `[1, W]`.
pub fn quantize(x: f64, lo: f64, hi: f64, w: u64) -> Result<u64> {
    if !(lo..=hi).contains(&x) {
        return Err(HskError::OutOfDomain { value: x, lo, hi });
    }
    let t = (x - lo) / (hi - lo);
    Ok(1 + ((t * (w - 1) as f64).round() as u64).min(w - 1))
}

pub fn ceil_log2(v: u64) -> u32 {
    if v <= 1 {
        0
    } else {
        64 - (v - 1).leading_zeros()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        assert_eq!(Label::from_i64(1).unwrap(), Label::Pos);
        assert_eq!(Label::from_i64(-1).unwrap(), Label::Neg);
        assert!(matches!(Label::from_i64(0), Err(HskError::BadLabel)));
    }

    #[test]
    fn point_validation() {
        assert!(LabeledPoint::new(vec![], Label::Pos).is_err());
        assert!(LabeledPoint::new(vec![f64::NAN], Label::Pos).is_err());
        let p = LabeledPoint::new(vec![0.6, 0.8], Label::Neg).unwrap();
        assert!(p.check_norm(1.0).is_ok());
        let q = LabeledPoint::new(vec![0.8, 0.8], Label::Neg).unwrap();
        assert!(matches!(
            q.check_norm(1.0),
            Err(HskError::NormViolation { .. })
        ));
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(1 << 20), 20);
        assert_eq!(ceil_log2(100_000), 17);
    }

    #[test]
    fn quantize_endpoints() {
        assert_eq!(quantize(-1.0, -1.0, 1.0, 1024).unwrap(), 1);
        assert_eq!(quantize(1.0, -1.0, 1.0, 1024).unwrap(), 1024);
        assert!(quantize(1.5, -1.0, 1.0, 1024).is_err());
    }

    #[test]
    fn normalize_query() {
        let q = HyperplaneQuery::new(vec![3.0, 4.0], 10.0);
        let (n, s) = q.normalized().unwrap();
        assert_eq!(s, 5.0);
        assert!((n.theta[0] - 0.6).abs() < 1e-15);
        assert!((n.b - 2.0).abs() < 1e-15);
        assert!(HyperplaneQuery::new(vec![0.0, 0.0], 1.0).normalized().is_err());
    }

    #[test]
    fn params_validation() {
        assert!(SketchParams::default().validate().is_ok());
        let bad = SketchParams {
            epsilon: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SketchParams {
            c1: 0.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
