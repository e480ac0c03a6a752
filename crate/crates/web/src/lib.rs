//! Browser bindings: generate a synthetic movie, compute its flow once, then
//! explore it interactively (threshold masking, temporal composite, tracing).

use calflow::analysis::render::{render_flow, render_lambda_min};
use calflow::analysis::{reliable_speeds, temporal_composite, trace_paths, RegionOfInterest};
use calflow::synth::{generate, SynthKind, SynthSpec};
use calflow::{compute_flow_field, Calibration, FlowParams, FlowSequence, MovieStack};
use wasm_bindgen::prelude::*;

fn js(e: calflow::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct Scene {
    movie: MovieStack,
    flow: FlowSequence,
}

fn build(kind: SynthKind, size: usize, frames: usize, noise: f64, seed: u64, window: usize) -> Result<Scene, calflow::Error> {
    let spec = SynthSpec {
        kind,
        width: size,
        height: size,
        frame_count: frames,
        calibration: Calibration::new(8.0, 1.3)?,
        noise_sigma: noise,
        seed,
    };
    let movie = generate(&spec)?;
    let flow = compute_flow_field(&movie, &FlowParams::new(window, 0.0, 0.0)?)?;
    Ok(Scene { movie, flow })
}

#[wasm_bindgen]
impl Scene {
    /// A Gaussian blob drifting at `(vx, vy)` pixels per frame.
    pub fn blob(size: usize, frames: usize, vx: f64, vy: f64, noise: f64, seed: u64, window: usize) -> Result<Scene, JsError> {
        let c = size as f64 / 2.0 - 4.0;
        let kind = SynthKind::TranslatingBlob {
            center: (c, c),
            sigma: 3.0,
            amplitude: 100.0,
            velocity: (vx, vy),
            background: 10.0,
        };
        build(kind, size, frames, noise, seed, window).map_err(js)
    }

    /// A ring expanding from the center at `speed` pixels per frame.
    pub fn wave(size: usize, frames: usize, speed: f64, noise: f64, seed: u64, window: usize) -> Result<Scene, JsError> {
        let c = size as f64 / 2.0;
        let kind = SynthKind::RadialWave {
            origin: (c, c),
            speed,
            width: 3.0,
            amplitude: 100.0,
            background: 10.0,
        };
        build(kind, size, frames, noise, seed, window).map_err(js)
    }

    pub fn width(&self) -> usize {
        self.flow.width()
    }

    pub fn height(&self) -> usize {
        self.flow.height()
    }

    pub fn pair_count(&self) -> usize {
        self.flow.pair_count()
    }

    /// Largest minimum eigenvalue; thresholds are set relative to it.
    pub fn max_lambda_min(&self) -> f64 {
        self.flow
            .fields()
            .iter()
            .flat_map(|f| f.lambda_min().iter().copied())
            .fold(0.0, f64::max)
    }

    pub fn reliable_count(&self, pair: usize, threshold: f64) -> usize {
        self.flow.fields().get(pair).map_or(0, |f| f.reliable_count(threshold))
    }

    /// Median reliable speed over all pairs in microns/second, NaN if none.
    pub fn median_speed(&self, threshold: f64) -> f64 {
        let roi = RegionOfInterest::new(0, 0, self.width(), self.height()).expect("non-empty");
        let cal = self.flow.calibration();
        let mut s = reliable_speeds(&self.flow, &roi, threshold, &cal).unwrap_or_default();
        if s.is_empty() {
            return f64::NAN;
        }
        s.sort_by(f64::total_cmp);
        s[s.len() / 2]
    }

    /// Reliable arrows of one pair over its first frame.
    pub fn flow_rgba(&self, pair: usize, threshold: f64, stride: usize, gain: f64) -> Vec<u8> {
        let Some(field) = self.flow.fields().get(pair) else {
            return vec![];
        };
        let backdrop = self.movie.frame_plane(pair);
        render_flow(field, threshold, stride, gain, Some(&backdrop)).to_rgba()
    }

    /// Minimum-eigenvalue image with the threshold's reliable boundary.
    pub fn lambda_rgba(&self, pair: usize, threshold: f64) -> Vec<u8> {
        self.flow
            .fields()
            .get(pair)
            .map_or_else(Vec::new, |f| render_lambda_min(f, &[threshold]).to_rgba())
    }

    pub fn composite_rgba(&self, threshold: f64, stride: usize, gain: f64) -> Result<Vec<u8>, JsError> {
        let c = temporal_composite(&self.flow, threshold, stride, gain).map_err(js)?;
        Ok(c.image.to_rgba())
    }

    /// Path from a seed as interleaved `x, y` pixel coordinates.
    pub fn trace(&self, x: f64, y: f64, threshold: f64) -> Result<Vec<f64>, JsError> {
        let cal = self.flow.calibration();
        let t = trace_paths(&self.flow, &[(x, y)], threshold, &cal).map_err(js)?;
        Ok(t[0].points.iter().flat_map(|p| [p.x, p.y]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blob_scene_renders() {
        let s = build(
            SynthKind::TranslatingBlob {
                center: (12.0, 12.0),
                sigma: 3.0,
                amplitude: 100.0,
                velocity: (0.5, 0.0),
                background: 10.0,
            },
            32,
            3,
            0.0,
            1,
            7,
        )
        .unwrap();
        let tau = 0.05 * s.max_lambda_min();
        assert_eq!(s.pair_count(), 2);
        assert!(s.reliable_count(0, tau) > 0);
        assert_eq!(s.flow_rgba(0, tau, 2, 2.0).len(), 32 * 32 * 4);
        assert_eq!(s.lambda_rgba(1, tau).len(), 32 * 32 * 4);
        assert!(s.flow_rgba(5, tau, 2, 2.0).is_empty());
        let speed = s.median_speed(tau);
        assert!((speed - 5.2).abs() < 0.3, "{speed}");
        let path = s.trace(12.0, 12.0, tau).unwrap();
        assert!(path.len() >= 4 && path[2] > path[0]);
    }

    #[test]
    fn wave_scene_composite() {
        let s = build(
            SynthKind::RadialWave {
                origin: (24.0, 24.0),
                speed: 0.9,
                width: 3.0,
                amplitude: 100.0,
                background: 10.0,
            },
            48,
            6,
            1.0,
            2,
            9,
        )
        .unwrap();
        let rgba = s.composite_rgba(0.05 * s.max_lambda_min(), 3, 2.0).unwrap();
        assert_eq!(rgba.len(), 48 * 48 * 4);
        assert!(rgba.chunks(4).any(|p| p[..3] != [0, 0, 0]));
        assert!(s.median_speed(f64::MAX).is_nan());
    }
}
