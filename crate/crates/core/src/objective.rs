//! Exact objective evaluation and the brute-force oracles every sketch is
//! checked against.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, HskError, Result};
use crate::types::{dot, HyperplaneQuery, LabeledPoint, Power};

fn check_dims(points: &[LabeledPoint], d: usize) -> Result<()> {
    if points.is_empty() {
        return Err(HskError::EmptyDataset);
    }
    for p in points {
        if p.dim() != d {
            return Err(HskError::DimensionMismatch {
                expected: d,
                actual: p.dim(),
            });
        }
    }
    Ok(())
}

/// Regularized SVM objective
/// `λ/2·‖(θ,b)‖² + (1/n)·Σ max{0, 1 − y_i(θ·x_i + b)}`.
pub fn hinge_objective(points: &[LabeledPoint], q: &HyperplaneQuery, lambda: f64) -> Result<f64> {
    check_dims(points, q.dim())?;
    if !(lambda >= 0.0) {
        return Err(invalid("lambda", "must be nonnegative"));
    }
    let loss: f64 = points
        .iter()
        .map(|p| (1.0 - p.y.sign() * (dot(&q.theta, &p.x) + q.b)).max(0.0))
        .sum();
    Ok(0.5 * lambda * q.norm_sq() + loss / points.len() as f64)
}

/// `(1/n)·Σ (max{0, b − θ·x_i})^p`, labels ignored.
pub fn simplified_objective(points: &[LabeledPoint], q: &HyperplaneQuery, p: Power) -> Result<f64> {
    check_dims(points, q.dim())?;
    let s: f64 = points
        .iter()
        .map(|pt| p.apply((q.b - dot(&q.theta, &pt.x)).max(0.0)))
        .sum();
    Ok(s / points.len() as f64)
}

/// One-dimensional form with `θ = +1`: `(1/n)·Σ (max{0, q − x_i})^p`.
pub fn simplified_objective_1d(xs: &[f64], q: f64, p: Power) -> Result<f64> {
    if xs.is_empty() {
        return Err(HskError::EmptyDataset);
    }
    Ok(left_sum(xs, q, p) / xs.len() as f64)
}

/// Unnormalized `Σ (max{0, q − x})^p`; zero on an empty slice.
pub fn left_sum(xs: &[f64], q: f64, p: Power) -> f64 {
    xs.iter().map(|&x| p.apply((q - x).max(0.0))).sum()
}

/// Strong-convexity distance bound `√(2ε/λ)`.
pub fn strong_convexity_radius(epsilon: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(invalid("lambda", "must be positive"));
    }
    if !(epsilon >= 0.0) {
        return Err(invalid("epsilon", "must be nonnegative"));
    }
    Ok((2.0 * epsilon / lambda).sqrt())
}

/// Minimizer returned by [`exact_optimize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub theta: Vec<f64>,
    pub b: f64,
    pub value: f64,
    /// Certified duality gap: `value − min F_λ ≤ gap`.
    pub gap: f64,
}

impl Optimum {
    pub fn query(&self) -> HyperplaneQuery {
        HyperplaneQuery::new(self.theta.clone(), self.b)
    }

    /// Parameters as one vector `(θ, b)`.
    pub fn w(&self) -> Vec<f64> {
        let mut w = self.theta.clone();
        w.push(self.b);
        w
    }
}

const MAX_EPOCHS: usize = 200_000;
const PG_TOL: f64 = 1e-13;

/// Minimizes `F_λ` to within `tol` by cyclic dual coordinate ascent.
///
/// With the bias regularized the dual is a box-constrained concave QP
/// `max Σν_i − (λ/2)‖w(ν)‖²`, `w(ν) = (1/λ)Σ ν_i y_i (x_i, 1)`,
/// `0 ≤ ν_i ≤ 1/n`. The primal-dual gap bounds the suboptimality of the
/// returned point. Deterministic for a given input.
pub fn exact_optimize(points: &[LabeledPoint], lambda: f64, tol: f64) -> Result<Optimum> {
    if points.is_empty() {
        return Err(HskError::EmptyDataset);
    }
    check_dims(points, points[0].dim())?;
    if !(lambda > 0.0) {
        return Err(invalid("lambda", "must be positive"));
    }
    if !(tol > 0.0) {
        return Err(invalid("tol", "must be positive"));
    }
    let n = points.len();
    let d = points[0].dim();
    let cap = 1.0 / n as f64;
    // z_i = y_i (x_i, 1)
    let z: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            let s = p.y.sign();
            p.x.iter().map(|v| s * v).chain(std::iter::once(s)).collect()
        })
        .collect();
    let zsq: Vec<f64> = z.iter().map(|zi| dot(zi, zi)).collect();
    let mut nu = vec![0.0; n];
    let mut w = vec![0.0; d + 1];

    let primal = |w: &[f64]| -> f64 {
        let loss: f64 = z.iter().map(|zi| (1.0 - dot(w, zi)).max(0.0)).sum();
        0.5 * lambda * dot(w, w) + loss / n as f64
    };

    let mut gap = f64::INFINITY;
    for _epoch in 0..MAX_EPOCHS {
        let mut max_pg: f64 = 0.0;
        for i in 0..n {
            let g = 1.0 - dot(&w, &z[i]);
            let pg = if nu[i] <= 0.0 {
                g.max(0.0)
            } else if nu[i] >= cap {
                g.min(0.0)
            } else {
                g
            };
            max_pg = max_pg.max(pg.abs());
            if pg == 0.0 {
                continue;
            }
            let new = (nu[i] + lambda * g / zsq[i]).clamp(0.0, cap);
            let delta = new - nu[i];
            if delta != 0.0 {
                nu[i] = new;
                let step = delta / lambda;
                for (wk, zk) in w.iter_mut().zip(&z[i]) {
                    *wk += step * zk;
                }
            }
        }
        let dual = nu.iter().sum::<f64>() - 0.5 * lambda * dot(&w, &w);
        gap = (primal(&w) - dual).max(0.0);
        if gap <= tol && max_pg <= PG_TOL {
            break;
        }
    }
    let value = primal(&w);
    if gap > tol {
        return Err(HskError::NoConvergence {
            iterations: MAX_EPOCHS,
            gap,
            best: w,
        });
    }
    let b = w[d];
    w.truncate(d);
    Ok(Optimum {
        theta: w,
        b,
        value,
        gap,
    })
}
