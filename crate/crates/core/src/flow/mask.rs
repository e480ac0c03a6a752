use crate::error::{Error, Result};
use crate::flow::{FlowField, FlowSequence};

/// Boolean reliability plane over a flow field's full extent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReliabilityMask {
    width: usize,
    height: usize,
    reliable: Vec<bool>,
}

impl ReliabilityMask {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.reliable[y * self.width + x]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.reliable
    }

    pub fn count(&self) -> usize {
        self.reliable.iter().filter(|&&r| r).count()
    }

    /// True when every reliable pixel here is also reliable in `other`.
    pub fn is_subset_of(&self, other: &ReliabilityMask) -> bool {
        self.reliable
            .iter()
            .zip(&other.reliable)
            .all(|(&a, &b)| !a || b)
    }
}

/// Both structure-tensor eigenvalues must exceed `threshold`; since
/// `lambda_max >= lambda_min` this is the test `lambda_min > threshold`.
#[inline]
pub fn is_reliable(lambda_min: f64, threshold: f64) -> bool {
    lambda_min > threshold
}

pub(crate) fn check_threshold(threshold: f64) -> Result<()> {
    if !(threshold.is_finite() && threshold >= 0.0) {
        return Err(Error::Parameter(format!(
            "eigenvalue threshold must be finite and >= 0, got {threshold}"
        )));
    }
    Ok(())
}

/// Reliability mask of a field at `threshold`. Pixels whose solve was
/// skipped never count as reliable.
pub fn apply_mask(field: &FlowField, threshold: f64) -> ReliabilityMask {
    let reliable = (0..field.width() * field.height())
        .map(|i| field.reliable_at_index(i, threshold))
        .collect();
    ReliabilityMask {
        width: field.width(),
        height: field.height(),
        reliable,
    }
}

/// One row of a threshold sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub threshold: f64,
    pub pair: usize,
    pub count: usize,
}

/// Reliable-vector counts for each candidate threshold and frame pair.
///
/// Thresholds must be finite, non-negative and in non-decreasing order.
pub fn mask_sweep(sequence: &FlowSequence, thresholds: &[f64]) -> Result<Vec<SweepRow>> {
    for &t in thresholds {
        check_threshold(t)?;
    }
    if thresholds.windows(2).any(|p| p[1] < p[0]) {
        return Err(Error::Parameter(
            "thresholds must be sorted in ascending order".into(),
        ));
    }
    let mut rows = Vec::with_capacity(thresholds.len() * sequence.pair_count());
    for &threshold in thresholds {
        for (pair, field) in sequence.fields().iter().enumerate() {
            rows.push(SweepRow {
                threshold,
                pair,
                count: field.reliable_count(threshold),
            });
        }
    }
    Ok(rows)
}
