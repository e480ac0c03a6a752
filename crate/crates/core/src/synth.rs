//! Synthetic calibrated movies with analytically known motion.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::movie::{Calibration, MovieStack};
use crate::plane::Plane;

/// Fraction of the peak amplitude that bounds a ground-truth support.
pub const SUPPORT_FRACTION: f64 = 0.01;

/// The continuous intensity model of a synthetic movie.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SynthKind {
    /// Uniform intensity; no motion.
    Constant { level: f64 },
    /// Isotropic Gaussian blob translating at constant velocity (px/frame).
    TranslatingBlob {
        center: (f64, f64),
        sigma: f64,
        amplitude: f64,
        velocity: (f64, f64),
        background: f64,
    },
    /// `I = a*x + b*y + c*t`.
    SpaceTimeRamp { a: f64, b: f64, c: f64 },
    /// Bright ring with Gaussian radial profile expanding from `origin`; its
    /// crest sits at radius `speed * t`.
    RadialWave {
        origin: (f64, f64),
        speed: f64,
        width: f64,
        amplitude: f64,
        background: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub width: usize,
    pub height: usize,
    pub frame_count: usize,
    pub calibration: Calibration,
    /// Standard deviation of additive zero-mean Gaussian noise.
    pub noise_sigma: f64,
    pub seed: u64,
}

fn finite(values: &[f64]) -> bool {
    values.iter().all(|v| v.is_finite())
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Parameter(m.to_string()));
        if self.width == 0 || self.height == 0 {
            return bad("synthetic movie dimensions must be positive");
        }
        if self.frame_count < 2 {
            return bad("synthetic movie needs at least 2 frames");
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad("noise sigma must be finite and >= 0");
        }
        match self.kind {
            SynthKind::Constant { level } if !level.is_finite() => bad("constant level must be finite"),
            SynthKind::TranslatingBlob {
                center,
                sigma,
                amplitude,
                velocity,
                background,
            } => {
                if !finite(&[center.0, center.1, amplitude, velocity.0, velocity.1, background]) {
                    bad("blob parameters must be finite")
                } else if !(sigma.is_finite() && sigma > 0.0) {
                    bad("blob sigma must be positive")
                } else if amplitude == 0.0 {
                    bad("blob amplitude must be non-zero")
                } else {
                    Ok(())
                }
            }
            SynthKind::SpaceTimeRamp { a, b, c } => {
                if !finite(&[a, b, c]) {
                    bad("ramp coefficients must be finite")
                } else if a == 0.0 && b == 0.0 {
                    bad("ramp needs a non-zero spatial slope")
                } else {
                    Ok(())
                }
            }
            SynthKind::RadialWave {
                origin,
                speed,
                width,
                amplitude,
                background,
            } => {
                if !finite(&[origin.0, origin.1, speed, amplitude, background]) {
                    bad("wave parameters must be finite")
                } else if !(width.is_finite() && width > 0.0) {
                    bad("wave annulus width must be positive")
                } else if amplitude == 0.0 {
                    bad("wave amplitude must be non-zero")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Noiseless intensity at continuous position `(x, y)` and time `t` (frames).
    pub fn intensity_at(&self, x: f64, y: f64, t: f64) -> f64 {
        match self.kind {
            SynthKind::Constant { level } => level,
            SynthKind::TranslatingBlob {
                center,
                sigma,
                amplitude,
                velocity,
                background,
            } => {
                let dx = x - center.0 - velocity.0 * t;
                let dy = y - center.1 - velocity.1 * t;
                background + amplitude * (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp()
            }
            SynthKind::SpaceTimeRamp { a, b, c } => a * x + b * y + c * t,
            SynthKind::RadialWave {
                origin,
                speed,
                width,
                amplitude,
                background,
            } => {
                let r = (x - origin.0).hypot(y - origin.1);
                let d = r - speed * t;
                background + amplitude * (-(d * d) / (2.0 * width * width)).exp()
            }
        }
    }

    /// True velocity (px/frame) at a continuous point, `None` off the support.
    pub fn true_velocity_at(&self, x: f64, y: f64, t: f64) -> Option<(f64, f64)> {
        let cutoff = (-2.0 * SUPPORT_FRACTION.ln()).sqrt();
        match self.kind {
            SynthKind::Constant { .. } => None,
            SynthKind::TranslatingBlob {
                center,
                sigma,
                velocity,
                ..
            } => {
                let dx = x - center.0 - velocity.0 * t;
                let dy = y - center.1 - velocity.1 * t;
                (dx.hypot(dy) < cutoff * sigma).then_some(velocity)
            }
            SynthKind::SpaceTimeRamp { a, b, c } => {
                let k = -c / (a * a + b * b);
                Some((k * a, k * b))
            }
            SynthKind::RadialWave {
                origin,
                speed,
                width,
                ..
            } => {
                let (dx, dy) = (x - origin.0, y - origin.1);
                let r = dx.hypot(dy);
                if r == 0.0 || (r - speed * t).abs() > cutoff * width {
                    None
                } else {
                    Some((speed * dx / r, speed * dy / r))
                }
            }
        }
    }
}

/// Samples the model at integer pixel positions and adds seeded noise.
pub fn generate(spec: &SynthSpec) -> Result<MovieStack> {
    spec.validate()?;
    let noise = if spec.noise_sigma > 0.0 {
        Some(
            Normal::new(0.0, spec.noise_sigma)
                .map_err(|e| Error::Parameter(format!("noise: {e}")))?,
        )
    } else {
        None
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let frames = (0..spec.frame_count)
        .map(|t| {
            Plane::from_fn(spec.width, spec.height, |x, y| {
                let v = spec.intensity_at(x as f64, y as f64, t as f64);
                match &noise {
                    Some(n) => v + n.sample(&mut rng),
                    None => v,
                }
            })
        })
        .collect();
    MovieStack::new(spec.width, spec.height, frames, spec.calibration)
}

/// Analytic motion on the flow grid of pair `t_index`.
///
/// Flow pixel `(x, y)` summarizes the 2x2 neighborhood centered at
/// `(x + 0.5, y + 0.5)` over frames `t` and `t + 1`, so the truth is
/// evaluated at that point and at time `t + 0.5`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub width: usize,
    pub height: usize,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub support: Vec<bool>,
    /// Set when the motion is only determined up to the aperture ambiguity;
    /// the stored vectors are then the minimum-norm solution.
    pub ambiguous: bool,
}

impl GroundTruth {
    pub fn get(&self, x: usize, y: usize) -> Option<(f64, f64)> {
        let i = y * self.width + x;
        self.support[i].then(|| (self.u[i], self.v[i]))
    }

    pub fn support_count(&self) -> usize {
        self.support.iter().filter(|&&s| s).count()
    }
}

pub fn ground_truth_flow(spec: &SynthSpec, t_index: usize) -> Result<GroundTruth> {
    spec.validate()?;
    if let SynthKind::Constant { .. } = spec.kind {
        return Err(Error::NoMotion);
    }
    if t_index + 1 >= spec.frame_count {
        return Err(Error::OutOfBounds(format!(
            "pair {t_index} out of range for {} frames",
            spec.frame_count
        )));
    }
    let (w, h) = (spec.width, spec.height);
    let t = t_index as f64 + 0.5;
    let mut truth = GroundTruth {
        width: w,
        height: h,
        u: vec![f64::NAN; w * h],
        v: vec![f64::NAN; w * h],
        support: vec![false; w * h],
        ambiguous: matches!(spec.kind, SynthKind::SpaceTimeRamp { .. }),
    };
    for y in 0..h {
        for x in 0..w {
            if let Some((u, v)) = spec.true_velocity_at(x as f64 + 0.5, y as f64 + 0.5, t) {
                let i = y * w + x;
                truth.u[i] = u;
                truth.v[i] = v;
                truth.support[i] = true;
            }
        }
    }
    Ok(truth)
}
