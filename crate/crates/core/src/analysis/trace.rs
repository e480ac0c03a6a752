//! Advects hypothetical particles through a sequence of flow fields.

use crate::error::{Error, Result};
use crate::flow::{FlowField, FlowSequence};
use crate::movie::Calibration;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    LeftValidRegion,
    EnteredUnreliable,
    EndOfMovie,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::LeftValidRegion => "left-valid-region",
            Termination::EnteredUnreliable => "entered-unreliable",
            Termination::EndOfMovie => "end-of-movie",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub t_seconds: f64,
    /// Position in pixel coordinates of the flow grid.
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathTrace {
    pub seed: (f64, f64),
    pub points: Vec<TracePoint>,
    pub termination: Termination,
}

impl PathTrace {
    /// Net displacement from the seed, in pixels.
    pub fn displacement_px(&self) -> (f64, f64) {
        let last = self.points.last().expect("trace always holds its seed");
        (last.x - self.seed.0, last.y - self.seed.1)
    }

    /// Net displacement length in microns.
    pub fn displacement_um(&self, calibration: &Calibration) -> f64 {
        let (dx, dy) = self.displacement_px();
        dx.hypot(dy) * calibration.microns_per_pixel
    }

    /// Length of the polyline in microns.
    pub fn path_length_um(&self, calibration: &Calibration) -> f64 {
        self.points
            .windows(2)
            .map(|p| (p[1].x - p[0].x).hypot(p[1].y - p[0].y))
            .fold(0.0, |a, b| a + b)
            * calibration.microns_per_pixel
    }
}

/// Bilinear interpolation of the flow at `(x, y)` (pixels/frame) using only
/// reliable neighbors; weights are renormalized over those neighbors.
/// Returns `None` when no neighbor with positive weight is reliable.
pub fn interpolate_reliable(field: &FlowField, x: f64, y: f64, threshold: f64) -> Option<(f64, f64)> {
    if !(x.is_finite() && y.is_finite()) || x < 0.0 || y < 0.0 {
        return None;
    }
    let (x0, y0) = (x.floor() as usize, y.floor() as usize);
    let (fx, fy) = (x - x0 as f64, y - y0 as f64);
    let valid = field.valid_region();
    let mut acc = (0.0, 0.0);
    let mut total = 0.0;
    for (dx, dy, w) in [
        (0, 0, (1.0 - fx) * (1.0 - fy)),
        (1, 0, fx * (1.0 - fy)),
        (0, 1, (1.0 - fx) * fy),
        (1, 1, fx * fy),
    ] {
        let (px, py) = (x0 + dx, y0 + dy);
        if w <= 0.0 || !valid.contains(px, py) || !field.is_reliable(px, py, threshold) {
            continue;
        }
        let s = field.sample(px, py);
        acc.0 += w * s.u;
        acc.1 += w * s.v;
        total += w;
    }
    (total > 0.0).then(|| (acc.0 / total, acc.1 / total))
}

/// Traces each seed with one explicit first-order step per frame pair:
/// the interpolated velocity (microns/second) times the frame interval.
pub fn trace_paths(
    fields: &FlowSequence,
    seeds: &[(f64, f64)],
    threshold: f64,
    calibration: &Calibration,
) -> Result<Vec<PathTrace>> {
    let valid = fields.valid_region();
    let dt = calibration.frame_interval();
    let scale = calibration.velocity_scale();
    seeds
        .iter()
        .map(|&(sx, sy)| {
            if !valid.contains_point(sx, sy) {
                return Err(Error::Parameter(format!(
                    "seed ({sx}, {sy}) lies outside the valid region {valid:?}"
                )));
            }
            let mut points = vec![TracePoint {
                t_seconds: 0.0,
                x: sx,
                y: sy,
            }];
            let (mut x, mut y) = (sx, sy);
            let mut termination = Termination::EndOfMovie;
            for (k, field) in fields.fields().iter().enumerate() {
                let Some((u, v)) = interpolate_reliable(field, x, y, threshold) else {
                    termination = Termination::EnteredUnreliable;
                    break;
                };
                // microns/second * seconds / (microns/pixel) = pixels
                let (vx_um, vy_um) = (u * scale, v * scale);
                x += vx_um * dt / calibration.microns_per_pixel;
                y += vy_um * dt / calibration.microns_per_pixel;
                points.push(TracePoint {
                    t_seconds: (k + 1) as f64 * dt,
                    x,
                    y,
                });
                if !valid.contains_point(x, y) {
                    termination = Termination::LeftValidRegion;
                    break;
                }
            }
            Ok(PathTrace {
                seed: (sx, sy),
                points,
                termination,
            })
        })
        .collect()
}
