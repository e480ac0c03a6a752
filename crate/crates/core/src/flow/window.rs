use crate::error::{Error, Result};

/// Normalized Gaussian weights over a square window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowWeights {
    width: usize,
    weights: Vec<f64>,
}

impl WindowWeights {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn half_width(&self) -> usize {
        self.width / 2
    }

    /// Weight at row `i`, column `j` of the window.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.width + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    /// Sum of squared weights; the effective weight of a constant gradient.
    pub fn sum_of_squares(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }
}

pub(crate) fn check_window_width(width: usize) -> Result<()> {
    if width < 3 || width.is_multiple_of(2) {
        return Err(Error::Parameter(format!(
            "window width must be odd and at least 3, got {width}"
        )));
    }
    Ok(())
}

/// Gaussian window with `sigma = width / 6`, normalized to unit sum.
///
/// This sigma reproduces the classic 5x5 table (center 0.230, edge
/// midpoints 0.013, corners 0.001).
pub fn gaussian_window(width: usize) -> Result<WindowWeights> {
    check_window_width(width)?;
    let sigma = width as f64 / 6.0;
    let two_sigma_sq = 2.0 * sigma * sigma;
    let half = (width / 2) as f64;
    let mut weights = Vec::with_capacity(width * width);
    for i in 0..width {
        for j in 0..width {
            let di = i as f64 - half;
            let dj = j as f64 - half;
            weights.push((-(di * di + dj * dj) / two_sigma_sq).exp());
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(WindowWeights { width, weights })
}
