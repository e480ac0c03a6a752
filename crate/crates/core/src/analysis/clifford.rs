//! Vector-pattern matching: normalized scalar correlation of a flow field
//! with a small vector kernel.
//!
//! For each center pixel the response is
//! `sum <k_i, f_i> / (|k| |f|)` over the reliable pixels under the kernel
//! footprint, with both norms taken over that same set. By Cauchy-Schwarz
//! the response lies in `[-1, 1]`.

use crate::error::{Error, Result};
use crate::flow::FlowField;

/// A dense vector kernel with odd dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorKernel {
    width: usize,
    height: usize,
    vx: Vec<f64>,
    vy: Vec<f64>,
}

impl VectorKernel {
    pub fn new(width: usize, height: usize, vx: Vec<f64>, vy: Vec<f64>) -> Result<Self> {
        if width.is_multiple_of(2) || height.is_multiple_of(2) {
            return Err(Error::Parameter(format!(
                "kernel dimensions must be odd, got {width}x{height}"
            )));
        }
        if vx.len() != width * height || vy.len() != width * height {
            return Err(Error::Format("kernel planes do not match its size".into()));
        }
        if vx.iter().chain(&vy).any(|v| !v.is_finite()) {
            return Err(Error::Format("kernel vectors must be finite".into()));
        }
        Ok(Self {
            width,
            height,
            vx,
            vy,
        })
    }

    /// Unit vectors pointing away from the center; the center itself is zero.
    pub fn divergence(size: usize) -> Result<Self> {
        let half = (size / 2) as f64;
        let mut vx = Vec::with_capacity(size * size);
        let mut vy = Vec::with_capacity(size * size);
        for j in 0..size {
            for i in 0..size {
                let (dx, dy) = (i as f64 - half, j as f64 - half);
                let r = dx.hypot(dy);
                if r == 0.0 {
                    vx.push(0.0);
                    vy.push(0.0);
                } else {
                    vx.push(dx / r);
                    vy.push(dy / r);
                }
            }
        }
        Self::new(size, size, vx, vy)
    }

    /// Unit vectors circulating counter-clockwise in image axes.
    pub fn curl(size: usize) -> Result<Self> {
        let d = Self::divergence(size)?;
        let vx = d.vy.iter().map(|v| -v).collect();
        Self::new(size, size, vx, d.vx)
    }

    /// Uses a flow field's vectors as the kernel; unsolved entries become zero.
    pub fn from_flow_field(field: &FlowField) -> Result<Self> {
        let clean = |p: &[f64]| p.iter().map(|v| if v.is_finite() { *v } else { 0.0 }).collect();
        Self::new(field.width(), field.height(), clean(field.u()), clean(field.v()))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> (f64, f64) {
        let k = j * self.width + i;
        (self.vx[k], self.vy[k])
    }

    pub fn vx(&self) -> &[f64] {
        &self.vx
    }

    pub fn vy(&self) -> &[f64] {
        &self.vy
    }

    pub fn negated(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            vx: self.vx.iter().map(|v| -v).collect(),
            vy: self.vy.iter().map(|v| -v).collect(),
        }
    }
}

/// Normalized match responses over the field extent; NaN where undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchMap {
    pub width: usize,
    pub height: usize,
    pub kernel_width: usize,
    pub kernel_height: usize,
    pub values: Vec<f64>,
}

impl MatchMap {
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Position and value of the largest defined response; ties resolve to
    /// the first in row-major order.
    pub fn argmax(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &v) in self.values.iter().enumerate() {
            if v.is_finite() && best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        best.map(|(i, v)| (i % self.width, i / self.width, v))
    }

    pub fn defined_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_finite()).count()
    }
}

pub fn clifford_match(field: &FlowField, kernel: &VectorKernel, threshold: f64) -> Result<MatchMap> {
    let valid = field.valid_region();
    if kernel.width > valid.width || kernel.height > valid.height {
        return Err(Error::Parameter(format!(
            "kernel {}x{} is larger than the {}x{} valid region",
            kernel.width, kernel.height, valid.width, valid.height
        )));
    }
    let (hw, hh) = (kernel.width / 2, kernel.height / 2);
    let footprint = kernel.width * kernel.height;
    let mut values = vec![f64::NAN; field.width() * field.height()];
    for cy in valid.y0 + hh..valid.y0 + valid.height - hh {
        for cx in valid.x0 + hw..valid.x0 + valid.width - hw {
            let (mut dot, mut kk, mut ff) = (0.0, 0.0, 0.0);
            let mut used = 0usize;
            for j in 0..kernel.height {
                for i in 0..kernel.width {
                    let (x, y) = (cx + i - hw, cy + j - hh);
                    if !field.is_reliable(x, y, threshold) {
                        continue;
                    }
                    let s = field.sample(x, y);
                    let (kx, ky) = kernel.get(i, j);
                    dot += kx * s.u + ky * s.v;
                    kk += kx * kx + ky * ky;
                    ff += s.u * s.u + s.v * s.v;
                    used += 1;
                }
            }
            if 2 * used < footprint || kk == 0.0 || ff == 0.0 {
                continue;
            }
            values[cy * field.width() + cx] = (dot / (kk * ff).sqrt()).clamp(-1.0, 1.0);
        }
    }
    Ok(MatchMap {
        width: field.width(),
        height: field.height(),
        kernel_width: kernel.width,
        kernel_height: kernel.height,
        values,
    })
}
