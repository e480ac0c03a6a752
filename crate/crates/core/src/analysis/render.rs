//! Raster views of flow fields for inspection.

use crate::analysis::color::{diverging, gray_sqrt, rainbow};
use crate::analysis::clifford::MatchMap;
use crate::flow::FlowField;
use crate::io::RgbImage;
use crate::plane::Plane;

/// Minimum-eigenvalue image on a square-root gray scale with the boundary
/// of each candidate threshold's reliable set drawn in its own color.
pub fn render_lambda_min(field: &FlowField, thresholds: &[f64]) -> RgbImage {
    let (w, h) = (field.width(), field.height());
    let lmin = field.lambda_min();
    let max = lmin.iter().copied().fold(0.0f64, f64::max);
    let mut img = RgbImage::new(w, h, [0; 3]);
    for y in 0..h {
        for x in 0..w {
            img.set(x, y, gray_sqrt(lmin[y * w + x], max));
        }
    }
    for (k, &tau) in thresholds.iter().enumerate() {
        let color = contour_color(k, thresholds.len());
        for y in 0..h {
            for x in 0..w {
                if !field.is_reliable(x, y, tau) {
                    continue;
                }
                let edge = x == 0
                    || y == 0
                    || x + 1 == w
                    || y + 1 == h
                    || !field.is_reliable(x - 1, y, tau)
                    || !field.is_reliable(x + 1, y, tau)
                    || !field.is_reliable(x, y - 1, tau)
                    || !field.is_reliable(x, y + 1, tau);
                if edge {
                    img.set(x, y, color);
                }
            }
        }
    }
    img
}

pub fn contour_color(index: usize, count: usize) -> [u8; 3] {
    if count <= 1 {
        [255, 64, 0]
    } else {
        rainbow(index as f64 / (count - 1) as f64)
    }
}

/// Reliable vectors as arrows over an optional grayscale backdrop.
pub fn render_flow(
    field: &FlowField,
    threshold: f64,
    stride: usize,
    gain: f64,
    backdrop: Option<&Plane>,
) -> RgbImage {
    let (w, h) = (field.width(), field.height());
    let mut img = RgbImage::new(w, h, [0; 3]);
    if let Some(p) = backdrop {
        let (lo, hi) = p
            .as_slice()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let span = if hi > lo { hi - lo } else { 1.0 };
        for y in 0..h.min(p.height()) {
            for x in 0..w.min(p.width()) {
                let g = (((p.get(x, y) - lo) / span) * 160.0).round() as u8;
                img.set(x, y, [g, g, g]);
            }
        }
    }
    let stride = stride.max(1);
    let valid = field.valid_region();
    for (x, y) in valid.pixels() {
        if !(x - valid.x0).is_multiple_of(stride) || !(y - valid.y0).is_multiple_of(stride) {
            continue;
        }
        if field.is_reliable(x, y, threshold) {
            let s = field.sample(x, y);
            let (xf, yf) = (x as f64, y as f64);
            img.draw_line(xf, yf, xf + gain * s.u, yf + gain * s.v, [255, 220, 0]);
            img.set(x, y, [0, 255, 120]);
        }
    }
    img
}

/// Match responses on the diverging scale; undefined pixels are black.
pub fn render_match(map: &MatchMap) -> RgbImage {
    let mut img = RgbImage::new(map.width, map.height, [0; 3]);
    for y in 0..map.height {
        for x in 0..map.width {
            let v = map.get(x, y);
            if v.is_finite() {
                img.set(x, y, diverging(v));
            }
        }
    }
    img
}
