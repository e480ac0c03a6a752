//! Per-pixel weighted least-squares system and its closed-form solution.

use crate::error::{Error, Result};
use crate::flow::window::WindowWeights;
use crate::gradient::GradientTriplet;

/// Relative determinant floor below which a system is treated as singular.
pub const DET_EPSILON: f64 = 1e-12;

/// The symmetric structure tensor `A^T W^2 A` and right-hand side `A^T W^2 b`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StructureTensorSystem {
    pub m11: f64,
    pub m12: f64,
    pub m22: f64,
    pub b1: f64,
    pub b2: f64,
}

impl StructureTensorSystem {
    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    pub fn determinant(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m12
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        eigen2x2(self.m11, self.m12, self.m22)
    }

    /// Minimum-norm least-squares solution via the pseudo-inverse.
    ///
    /// Agrees with [`solve_flow`] on well-conditioned systems and still
    /// returns the shortest consistent vector on rank-1 systems, where the
    /// aperture problem leaves one direction undetermined.
    pub fn min_norm_solution(&self) -> (f64, f64) {
        let (lmin, lmax) = self.eigenvalues();
        let tr = self.trace();
        if lmax <= 0.0 {
            return (0.0, 0.0);
        }
        if lmin > DET_EPSILON * lmax {
            if let Some(u) = solve_flow(self) {
                return u;
            }
        }
        // Rank one: M = lmax * e e^T with e the dominant eigenvector.
        let (ex, ey) = if self.m11 >= self.m22 {
            (self.m11, self.m12)
        } else {
            (self.m12, self.m22)
        };
        let norm = ex.hypot(ey);
        if norm == 0.0 || tr == 0.0 {
            return (0.0, 0.0);
        }
        let (ex, ey) = (ex / norm, ey / norm);
        let proj = (ex * self.b1 + ey * self.b2) / lmax;
        (proj * ex, proj * ey)
    }
}

/// Accumulates the system for the window centered at `(cx, cy)` of the
/// gradient grid. Each sample is weighted by the squared window weight.
pub fn assemble_system(
    triplet: &GradientTriplet,
    window: &WindowWeights,
    cx: usize,
    cy: usize,
) -> Result<StructureTensorSystem> {
    let half = window.half_width();
    if cx < half
        || cy < half
        || cx + half >= triplet.width()
        || cy + half >= triplet.height()
    {
        return Err(Error::OutOfBounds(format!(
            "window of width {} at ({cx}, {cy}) overhangs the {}x{} gradient grid",
            window.width(),
            triplet.width(),
            triplet.height()
        )));
    }
    Ok(assemble_unchecked(triplet, window, cx, cy))
}

#[inline]
pub(crate) fn assemble_unchecked(
    triplet: &GradientTriplet,
    window: &WindowWeights,
    cx: usize,
    cy: usize,
) -> StructureTensorSystem {
    let half = window.half_width();
    let n = window.width();
    let gw = triplet.width();
    let (ix, iy, it) = (
        triplet.ix.as_slice(),
        triplet.iy.as_slice(),
        triplet.it.as_slice(),
    );
    let mut s = StructureTensorSystem::default();
    for i in 0..n {
        let row = (cy + i - half) * gw + cx - half;
        for j in 0..n {
            let w = window.get(i, j);
            let w2 = w * w;
            let gx = ix[row + j];
            let gy = iy[row + j];
            let gt = it[row + j];
            s.m11 += w2 * gx * gx;
            s.m12 += w2 * gx * gy;
            s.m22 += w2 * gy * gy;
            s.b1 -= w2 * gx * gt;
            s.b2 -= w2 * gy * gt;
        }
    }
    s
}

/// Eigenvalues `(min, max)` of the symmetric matrix `[[m11, m12], [m12, m22]]`.
///
/// The discriminant is clamped at zero and the smaller root is taken as
/// `det / max` to avoid cancellation; both are clamped to be non-negative
/// when the input is positive semi-definite up to rounding.
pub fn eigen2x2(m11: f64, m12: f64, m22: f64) -> (f64, f64) {
    let tr = m11 + m22;
    let det = m11 * m22 - m12 * m12;
    let half_diff = 0.5 * (m11 - m22);
    let disc = (half_diff * half_diff + m12 * m12).sqrt();
    let mid = 0.5 * tr;
    if mid >= 0.0 {
        let lmax = mid + disc;
        let lmin = if lmax > 0.0 { det / lmax } else { mid - disc };
        (lmin.min(lmax), lmax)
    } else {
        let lmin = mid - disc;
        let lmax = if lmin < 0.0 { det / lmin } else { mid + disc };
        (lmin, lmax.max(lmin))
    }
}

/// Closed-form solve `u = M^{-1} b`, or `None` when `det <= eps * tr^2`.
// written negated so that NaN falls into the singular branch
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn solve_flow(system: &StructureTensorSystem) -> Option<(f64, f64)> {
    let tr = system.trace();
    let det = system.determinant();
    if !(det > DET_EPSILON * (tr * tr).max(f64::MIN_POSITIVE)) {
        return None;
    }
    let u = (system.m22 * system.b1 - system.m12 * system.b2) / det;
    let v = (system.m11 * system.b2 - system.m12 * system.b1) / det;
    if u.is_finite() && v.is_finite() {
        Some((u, v))
    } else {
        None
    }
}

/// The weighted squared residual of the brightness-constancy constraint
/// over the window at `(cx, cy)` for a candidate flow `(u, v)`.
pub fn weighted_residual(
    triplet: &GradientTriplet,
    window: &WindowWeights,
    cx: usize,
    cy: usize,
    u: f64,
    v: f64,
) -> Result<f64> {
    assemble_system(triplet, window, cx, cy)?;
    let half = window.half_width();
    let mut total = 0.0;
    for i in 0..window.width() {
        for j in 0..window.width() {
            let (x, y) = (cx + j - half, cy + i - half);
            let w = window.get(i, j);
            let r = triplet.ix.get(x, y) * u + triplet.iy.get(x, y) * v + triplet.it.get(x, y);
            total += w * w * r * r;
        }
    }
    Ok(total)
}
