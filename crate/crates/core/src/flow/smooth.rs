use crate::error::{Error, Result};
use crate::plane::Plane;

/// Isotropic Gaussian blur, truncated at 3 sigma.
///
/// Taps falling outside the plane are dropped and the remaining weights
/// renormalized, so constant planes stay constant up to the border.
pub fn gaussian_smooth(plane: &Plane, sigma: f64) -> Result<Plane> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::Parameter(format!(
            "smoothing sigma must be finite and >= 0, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(plane.clone());
    }
    let radius = (3.0 * sigma).ceil() as usize;
    let taps: Vec<f64> = (0..=2 * radius)
        .map(|k| {
            let d = k as f64 - radius as f64;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let horizontal = blur_axis(plane, &taps, radius, true);
    Ok(blur_axis(&horizontal, &taps, radius, false))
}

fn blur_axis(plane: &Plane, taps: &[f64], radius: usize, along_x: bool) -> Plane {
    let (w, h) = (plane.width(), plane.height());
    let len = if along_x { w } else { h };
    Plane::from_fn(w, h, |x, y| {
        let pos = if along_x { x } else { y };
        let lo = pos.saturating_sub(radius);
        let hi = (pos + radius).min(len - 1);
        let (mut acc, mut norm) = (0.0, 0.0);
        for p in lo..=hi {
            let k = taps[p + radius - pos];
            let v = if along_x { plane.get(p, y) } else { plane.get(x, p) };
            acc += k * v;
            norm += k;
        }
        acc / norm
    })
}
