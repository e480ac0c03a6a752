use crate::error::{Error, Result};
use crate::plane::Plane;

/// Physical calibration of a recording.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub frame_rate_hz: f64,
    pub microns_per_pixel: f64,
}

impl Calibration {
    pub fn new(frame_rate_hz: f64, microns_per_pixel: f64) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(frame_rate_hz) {
            return Err(Error::Calibration(format!(
                "frame rate must be positive and finite, got {frame_rate_hz}"
            )));
        }
        if !ok(microns_per_pixel) {
            return Err(Error::Calibration(format!(
                "microns per pixel must be positive and finite, got {microns_per_pixel}"
            )));
        }
        Ok(Self {
            frame_rate_hz,
            microns_per_pixel,
        })
    }

    /// Factor converting pixels/frame into microns/second.
    #[inline]
    pub fn velocity_scale(&self) -> f64 {
        self.frame_rate_hz * self.microns_per_pixel
    }

    #[inline]
    pub fn frame_interval(&self) -> f64 {
        1.0 / self.frame_rate_hz
    }
}

/// An ordered stack of equally sized grayscale frames with its calibration.
///
/// Samples are stored frame-major, then row-major. Intensities keep their
/// raw units; nothing is rescaled on load.
#[derive(Debug, Clone, PartialEq)]
pub struct MovieStack {
    width: usize,
    height: usize,
    frame_count: usize,
    samples: Vec<f64>,
    calibration: Calibration,
}

impl MovieStack {
    pub fn new(
        width: usize,
        height: usize,
        frames: Vec<Plane>,
        calibration: Calibration,
    ) -> Result<Self> {
        if frames.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "a movie needs at least 2 frames, got {}",
                frames.len()
            )));
        }
        if width == 0 || height == 0 {
            return Err(Error::Format("frames must be non-empty".into()));
        }
        let frame_count = frames.len();
        let mut samples = Vec::with_capacity(width * height * frame_count);
        for (i, f) in frames.into_iter().enumerate() {
            if f.width() != width || f.height() != height {
                return Err(Error::Format(format!(
                    "frame {i} is {}x{}, expected {width}x{height}",
                    f.width(),
                    f.height()
                )));
            }
            samples.extend_from_slice(f.as_slice());
        }
        if let Some(bad) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::Format(format!(
                "non-finite intensity at sample {bad}"
            )));
        }
        Ok(Self {
            width,
            height,
            frame_count,
            samples,
            calibration,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    pub fn pair_count(&self) -> usize {
        self.frame_count - 1
    }

    pub fn calibration(&self) -> Calibration {
        self.calibration
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        let n = self.width * self.height;
        &self.samples[t * n..(t + 1) * n]
    }

    pub fn frame_plane(&self, t: usize) -> Plane {
        Plane::new(self.width, self.height, self.frame(t).to_vec())
            .expect("frame dimensions are consistent")
    }

    pub fn frames(&self) -> impl Iterator<Item = Plane> + '_ {
        (0..self.frame_count).map(|t| self.frame_plane(t))
    }

    /// Intensity at `(x, y)` of frame `t`.
    #[inline]
    pub fn get(&self, x: usize, y: usize, t: usize) -> f64 {
        self.samples[(t * self.height + y) * self.width + x]
    }

    /// Returns a copy with every intensity transformed by `f`.
    pub fn map_intensities(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let frames = self
            .frames()
            .map(|p| {
                let (w, h) = (p.width(), p.height());
                Plane::new(w, h, p.into_vec().into_iter().map(&f).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.width, self.height, frames, self.calibration)
    }

    /// Returns a copy with each frame replaced by `f(frame)`.
    pub fn map_frames(&self, f: impl Fn(&Plane) -> Plane) -> Result<Self> {
        let frames: Vec<Plane> = self.frames().map(|p| f(&p)).collect();
        Self::new(self.width, self.height, frames, self.calibration)
    }
}
