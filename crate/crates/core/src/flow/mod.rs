//! Dense windowed Lucas-Kanade flow with structure-tensor reliability.

pub mod mask;
pub mod smooth;
pub mod system;
pub mod window;

use crate::error::{Error, Result};
use crate::gradient::{gradients_from_frames, GradientTriplet};
use crate::movie::{Calibration, MovieStack};
use crate::plane::{Plane, Rect};

pub use mask::{apply_mask, is_reliable, mask_sweep, ReliabilityMask, SweepRow};
pub use smooth::gaussian_smooth;
pub use system::{
    assemble_system, eigen2x2, solve_flow, weighted_residual, StructureTensorSystem, DET_EPSILON,
};
pub use window::{gaussian_window, WindowWeights};

/// Parameters of a flow computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowParams {
    /// Odd window width in pixels.
    pub window_width: usize,
    /// Minimum eigenvalue threshold in raw intensity squared units. Stored
    /// for reporting; masking is always applied after the fact.
    pub eigenvalue_threshold: f64,
    /// Gaussian pre-smoothing sigma in pixels, 0 disables it.
    pub pre_smooth_sigma: f64,
}

impl FlowParams {
    pub fn new(window_width: usize, eigenvalue_threshold: f64, pre_smooth_sigma: f64) -> Result<Self> {
        window::check_window_width(window_width)?;
        mask::check_threshold(eigenvalue_threshold)?;
        if !(pre_smooth_sigma.is_finite() && pre_smooth_sigma >= 0.0) {
            return Err(Error::Parameter(format!(
                "pre-smoothing sigma must be finite and >= 0, got {pre_smooth_sigma}"
            )));
        }
        Ok(Self {
            window_width,
            eigenvalue_threshold,
            pre_smooth_sigma,
        })
    }

    /// Checks that the window fits a movie of the given size.
    pub fn validate_for(&self, width: usize, height: usize) -> Result<()> {
        Self::new(self.window_width, self.eigenvalue_threshold, self.pre_smooth_sigma)?;
        let limit = width.min(height).saturating_sub(1);
        if self.window_width > limit {
            return Err(Error::Parameter(format!(
                "window width {} exceeds the {}x{} movie's limit of {limit}",
                self.window_width, width, height
            )));
        }
        Ok(())
    }
}

/// Region where a window of `window_width` fits on the derivative grid of a
/// `width x height` movie.
pub fn valid_region(width: usize, height: usize, window_width: usize) -> Rect {
    let half = window_width / 2;
    let gw = width.saturating_sub(1);
    let gh = height.saturating_sub(1);
    Rect::new(
        half,
        half,
        gw.saturating_sub(2 * half),
        gh.saturating_sub(2 * half),
    )
}

/// The values stored for one pixel of a flow field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSample {
    /// Horizontal displacement in pixels/frame, NaN when unsolved.
    pub u: f64,
    /// Vertical displacement in pixels/frame, NaN when unsolved.
    pub v: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl FlowSample {
    pub const MISSING: FlowSample = FlowSample {
        u: f64::NAN,
        v: f64::NAN,
        lambda_min: 0.0,
        lambda_max: 0.0,
    };

    pub fn is_solved(&self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }
}

/// Flow vectors and eigenvalues for one frame pair.
///
/// Pixel `(x, y)` refers to the 2x2 neighborhood whose top-left corner is
/// source pixel `(x, y)`. Outside `valid` the vector is NaN and both
/// eigenvalues are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    width: usize,
    height: usize,
    valid: Rect,
    t_index: usize,
    u: Vec<f64>,
    v: Vec<f64>,
    lambda_min: Vec<f64>,
    lambda_max: Vec<f64>,
}

impl FlowField {
    #[allow(clippy::too_many_arguments)]
    pub fn from_planes(
        width: usize,
        height: usize,
        valid: Rect,
        t_index: usize,
        u: Vec<f64>,
        v: Vec<f64>,
        lambda_min: Vec<f64>,
        lambda_max: Vec<f64>,
    ) -> Result<Self> {
        let n = width * height;
        if [u.len(), v.len(), lambda_min.len(), lambda_max.len()]
            .iter()
            .any(|&l| l != n)
        {
            return Err(Error::Format(format!(
                "flow planes must have {n} samples for {width}x{height}"
            )));
        }
        if valid.x0 + valid.width > width || valid.y0 + valid.height > height {
            return Err(Error::Format(format!(
                "valid region {valid:?} exceeds {width}x{height}"
            )));
        }
        Ok(Self {
            width,
            height,
            valid,
            t_index,
            u,
            v,
            lambda_min,
            lambda_max,
        })
    }

    /// Builds a field by evaluating `f` on every pixel of `valid`.
    pub fn from_fn(
        width: usize,
        height: usize,
        valid: Rect,
        t_index: usize,
        mut f: impl FnMut(usize, usize) -> FlowSample,
    ) -> Result<Self> {
        let n = width * height;
        let mut field = Self::from_planes(
            width,
            height,
            valid,
            t_index,
            vec![f64::NAN; n],
            vec![f64::NAN; n],
            vec![0.0; n],
            vec![0.0; n],
        )?;
        for (x, y) in valid.pixels() {
            field.set(x, y, f(x, y));
        }
        Ok(field)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn valid_region(&self) -> Rect {
        self.valid
    }

    pub fn t_index(&self) -> usize {
        self.t_index
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn lambda_min(&self) -> &[f64] {
        &self.lambda_min
    }

    pub fn lambda_max(&self) -> &[f64] {
        &self.lambda_max
    }

    #[inline]
    pub fn sample(&self, x: usize, y: usize) -> FlowSample {
        let i = y * self.width + x;
        FlowSample {
            u: self.u[i],
            v: self.v[i],
            lambda_min: self.lambda_min[i],
            lambda_max: self.lambda_max[i],
        }
    }

    pub fn set(&mut self, x: usize, y: usize, s: FlowSample) {
        let i = y * self.width + x;
        self.u[i] = s.u;
        self.v[i] = s.v;
        self.lambda_min[i] = s.lambda_min;
        self.lambda_max[i] = s.lambda_max;
    }

    #[inline]
    pub(crate) fn reliable_at_index(&self, i: usize, threshold: f64) -> bool {
        is_reliable(self.lambda_min[i], threshold) && self.u[i].is_finite() && self.v[i].is_finite()
    }

    #[inline]
    pub fn is_reliable(&self, x: usize, y: usize, threshold: f64) -> bool {
        self.reliable_at_index(y * self.width + x, threshold)
    }

    pub fn reliable_count(&self, threshold: f64) -> usize {
        (0..self.u.len())
            .filter(|&i| self.reliable_at_index(i, threshold))
            .count()
    }

    /// The minimum-eigenvalue image.
    pub fn lambda_min_plane(&self) -> Plane {
        Plane::new(self.width, self.height, self.lambda_min.clone())
            .expect("plane length matches field")
    }

    pub(crate) fn with_t_index(mut self, t_index: usize) -> Self {
        self.t_index = t_index;
        self
    }
}

/// The flow fields of consecutive frame pairs, with shared geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSequence {
    calibration: Calibration,
    fields: Vec<FlowField>,
}

impl FlowSequence {
    pub fn new(calibration: Calibration, fields: Vec<FlowField>) -> Result<Self> {
        let first = fields
            .first()
            .ok_or_else(|| Error::InsufficientData("flow sequence is empty".into()))?;
        let (w, h, valid) = (first.width, first.height, first.valid);
        if fields
            .iter()
            .any(|f| f.width != w || f.height != h || f.valid != valid)
        {
            return Err(Error::Format(
                "all fields of a sequence must share size and valid region".into(),
            ));
        }
        let fields = fields
            .into_iter()
            .enumerate()
            .map(|(t, f)| f.with_t_index(t))
            .collect();
        Ok(Self {
            calibration,
            fields,
        })
    }

    pub fn calibration(&self) -> Calibration {
        self.calibration
    }

    pub fn fields(&self) -> &[FlowField] {
        &self.fields
    }

    pub fn pair_count(&self) -> usize {
        self.fields.len()
    }

    pub fn width(&self) -> usize {
        self.fields[0].width
    }

    pub fn height(&self) -> usize {
        self.fields[0].height
    }

    pub fn valid_region(&self) -> Rect {
        self.fields[0].valid
    }

    /// Window width implied by the valid region's offset from the corner.
    pub fn window_width(&self) -> usize {
        2 * self.valid_region().x0 + 1
    }

    pub fn reliable_count(&self, threshold: f64) -> usize {
        self.fields.iter().map(|f| f.reliable_count(threshold)).sum()
    }
}

fn solve_pixel(triplet: &GradientTriplet, window: &WindowWeights, x: usize, y: usize) -> FlowSample {
    let sys = system::assemble_unchecked(triplet, window, x, y);
    let (lambda_min, lambda_max) = sys.eigenvalues();
    let (lambda_min, lambda_max) = (lambda_min.max(0.0), lambda_max.max(0.0));
    match solve_flow(&sys) {
        Some((u, v)) => FlowSample {
            u,
            v,
            lambda_min,
            lambda_max,
        },
        None => FlowSample {
            u: f64::NAN,
            v: f64::NAN,
            lambda_min,
            lambda_max,
        },
    }
}

#[cfg(feature = "parallel")]
fn solve_rows(
    triplet: &GradientTriplet,
    window: &WindowWeights,
    valid: Rect,
) -> Vec<Vec<FlowSample>> {
    use rayon::prelude::*;
    (valid.y0..valid.y0 + valid.height)
        .into_par_iter()
        .map(|y| {
            (valid.x0..valid.x0 + valid.width)
                .map(|x| solve_pixel(triplet, window, x, y))
                .collect()
        })
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn solve_rows(
    triplet: &GradientTriplet,
    window: &WindowWeights,
    valid: Rect,
) -> Vec<Vec<FlowSample>> {
    (valid.y0..valid.y0 + valid.height)
        .map(|y| {
            (valid.x0..valid.x0 + valid.width)
                .map(|x| solve_pixel(triplet, window, x, y))
                .collect()
        })
        .collect()
}

/// Flow for a single pair of (already pre-processed) frames.
pub fn flow_for_frames(
    frame_t: &Plane,
    frame_next: &Plane,
    window: &WindowWeights,
    t_index: usize,
) -> Result<FlowField> {
    let (w, h) = (frame_t.width(), frame_t.height());
    let triplet = gradients_from_frames(frame_t, frame_next)?;
    let valid = valid_region(w, h, window.width());
    if valid.is_empty() {
        return Err(Error::Parameter(format!(
            "window width {} leaves no valid pixels in a {w}x{h} frame",
            window.width()
        )));
    }
    let rows = solve_rows(&triplet, window, valid);
    let mut field = FlowField::from_fn(w, h, Rect::default(), t_index, |_, _| FlowSample::MISSING)?;
    field.valid = valid;
    for (dy, row) in rows.into_iter().enumerate() {
        for (dx, s) in row.into_iter().enumerate() {
            field.set(valid.x0 + dx, valid.y0 + dy, s);
        }
    }
    Ok(field)
}

/// Computes one flow field per adjacent frame pair.
///
/// Each field covers the full movie extent; vectors exist only where the
/// window fits on the derivative grid. Results do not depend on how the
/// work is scheduled across threads.
pub fn compute_flow_field(movie: &MovieStack, params: &FlowParams) -> Result<FlowSequence> {
    params.validate_for(movie.width(), movie.height())?;
    let window = gaussian_window(params.window_width)?;
    let frames: Vec<Plane> = if params.pre_smooth_sigma > 0.0 {
        movie
            .frames()
            .map(|f| gaussian_smooth(&f, params.pre_smooth_sigma))
            .collect::<Result<_>>()?
    } else {
        movie.frames().collect()
    };
    let fields = frames
        .windows(2)
        .enumerate()
        .map(|(t, pair)| flow_for_frames(&pair[0], &pair[1], &window, t))
        .collect::<Result<Vec<_>>>()?;
    FlowSequence::new(movie.calibration(), fields)
}

/// Converts a displacement in pixels/frame to microns/second.
#[inline]
pub fn px_per_frame_to_um_per_s(value: f64, calibration: &Calibration) -> f64 {
    value * calibration.velocity_scale()
}

/// A velocity field in microns per second.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub width: usize,
    pub height: usize,
    pub vx: Vec<f64>,
    pub vy: Vec<f64>,
}

impl VelocityField {
    pub fn speed(&self, x: usize, y: usize) -> f64 {
        let i = y * self.width + x;
        self.vx[i].hypot(self.vy[i])
    }
}

/// Scales every vector by `frame_rate * microns_per_pixel`.
pub fn to_physical(field: &FlowField, calibration: &Calibration) -> VelocityField {
    let k = calibration.velocity_scale();
    VelocityField {
        width: field.width,
        height: field.height,
        vx: field.u.iter().map(|u| u * k).collect(),
        vy: field.v.iter().map(|v| v * k).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cal() -> Calibration {
        Calibration::new(8.0, 1.3).unwrap()
    }

    fn movie_from(w: usize, h: usize, n: usize, f: impl Fn(f64, f64, f64) -> f64) -> MovieStack {
        let frames = (0..n)
            .map(|t| Plane::from_fn(w, h, |x, y| f(x as f64, y as f64, t as f64)))
            .collect();
        MovieStack::new(w, h, frames, cal()).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(FlowParams::new(8, 0.0, 0.0).is_err());
        assert!(FlowParams::new(9, -1.0, 0.0).is_err());
        assert!(FlowParams::new(9, f64::NAN, 0.0).is_err());
        assert!(FlowParams::new(9, 0.0, -0.5).is_err());
        let p = FlowParams::new(9, 1.4, 0.0).unwrap();
        assert!(p.validate_for(10, 10).is_ok());
        assert!(p.validate_for(9, 20).is_err());
    }

    #[test]
    fn valid_region_geometry() {
        let r = valid_region(32, 24, 5);
        assert_eq!(r, Rect::new(2, 2, 27, 19));
        let r = valid_region(10, 10, 9);
        assert_eq!(r, Rect::new(4, 4, 1, 1));
    }

    #[test]
    fn constant_movie_is_unsolvable_everywhere() {
        let m = movie_from(16, 16, 3, |_, _, _| 50.0);
        let seq = compute_flow_field(&m, &FlowParams::new(5, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!(seq.pair_count(), 2);
        for f in seq.fields() {
            assert!(f.lambda_min().iter().all(|&l| l == 0.0));
            assert!(f.u().iter().all(|u| u.is_nan()));
            assert_eq!(f.reliable_count(0.0), 0);
        }
    }

    #[test]
    fn static_spatial_ramp_has_aperture_problem() {
        let m = movie_from(20, 20, 3, |x, _, _| 3.0 * x + 5.0);
        let seq = compute_flow_field(&m, &FlowParams::new(7, 0.0, 0.0).unwrap()).unwrap();
        for f in seq.fields() {
            assert!(f.lambda_min().iter().all(|&l| l == 0.0));
            assert_eq!(f.reliable_count(0.0), 0);
            assert_eq!(f.reliable_count(1e-6), 0);
        }
    }

    #[test]
    fn border_pixels_are_missing() {
        let m = movie_from(16, 12, 2, |x, y, t| (x * 0.3 + t).sin() * (y * 0.4).cos() * 20.0 + 40.0);
        let seq = compute_flow_field(&m, &FlowParams::new(5, 0.0, 0.0).unwrap()).unwrap();
        let f = &seq.fields()[0];
        let valid = f.valid_region();
        for y in 0..f.height() {
            for x in 0..f.width() {
                let s = f.sample(x, y);
                if !valid.contains(x, y) {
                    assert!(s.u.is_nan() && s.lambda_min == 0.0 && s.lambda_max == 0.0);
                } else {
                    assert!(s.lambda_min <= s.lambda_max && s.lambda_min >= 0.0);
                }
            }
        }
        assert_eq!(seq.window_width(), 5);
    }

    #[test]
    fn physical_conversion_examples() {
        let valid = Rect::new(0, 0, 2, 1);
        let f = FlowField::from_fn(2, 1, valid, 0, |x, _| {
            let (u, v) = if x == 0 { (1.0, 0.0) } else { (0.0, 0.0) };
            FlowSample {
                u,
                v,
                lambda_min: 1.0,
                lambda_max: 1.0,
            }
        })
        .unwrap();
        let vel = to_physical(&f, &cal());
        assert!((vel.vx[0] - 10.4).abs() < 1e-12 && vel.vy[0] == 0.0);
        assert_eq!((vel.vx[1], vel.vy[1]), (0.0, 0.0));

        let c = Calibration::new(16.4, 1.3).unwrap();
        let speed = px_per_frame_to_um_per_s(0.3f64.hypot(-0.4), &c);
        assert!((speed - 10.66).abs() < 1e-12);
    }

    #[test]
    fn sequence_rejects_mixed_geometry() {
        let a = FlowField::from_fn(4, 4, Rect::new(1, 1, 2, 2), 0, |_, _| FlowSample::MISSING).unwrap();
        let b = FlowField::from_fn(4, 4, Rect::new(0, 0, 2, 2), 1, |_, _| FlowSample::MISSING).unwrap();
        assert!(FlowSequence::new(cal(), vec![a, b]).is_err());
        assert!(FlowSequence::new(cal(), vec![]).is_err());
    }
}
