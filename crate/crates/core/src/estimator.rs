//! Common interface of the one-dimensional sketches, and the reduction of a
//! per-class hinge sum to one-sided distance sums.

use crate::error::Result;

/// A frozen summary of a multiset of reals answering `Σ max{0, q − x}`.
pub trait LeftSumEstimator {
    /// Unnormalized estimate of `Σ max{0, q − x_i}`.
    fn left_sum(&self, q: f64) -> Result<f64>;

    /// Number of summarized points.
    fn count(&self) -> u64;
}

/// Estimate of `Σ max{0, b − θ·x_i}` for scalar `θ`, given sketches of the
/// points and of their negations.
///
/// `θ > 0` queries `pos` at `b/θ` scaled by `θ`; `θ < 0` queries `neg`
/// (built over `−x`) at `b/|θ|`; `θ = 0` is exact.
pub fn halfline_sum<E: LeftSumEstimator + ?Sized>(pos: &E, neg: &E, theta: f64, b: f64) -> Result<f64> {
    if theta > 0.0 {
        Ok(theta * pos.left_sum(b / theta)?)
    } else if theta < 0.0 {
        Ok(-theta * neg.left_sum(b / -theta)?)
    } else {
        Ok(b.max(0.0) * pos.count() as f64)
    }
}
