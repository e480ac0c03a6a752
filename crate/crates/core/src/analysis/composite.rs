//! Temporal composites: one image encoding when each pixel first carried a
//! reliable flow vector.

use crate::analysis::color::rainbow;
use crate::error::{Error, Result};
use crate::flow::FlowSequence;
use crate::io::RgbImage;

pub const BACKGROUND: [u8; 3] = [0, 0, 0];

/// Time-to-color mapping of a composite.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorLegend {
    /// `(pair index, time in seconds, color)` per frame pair.
    pub entries: Vec<(usize, f64, [u8; 3])>,
    pub time_max_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Composite {
    pub image: RgbImage,
    /// Earliest reliable pair per pixel over the full field extent.
    pub earliest: Vec<Option<usize>>,
    pub legend: ColorLegend,
    pub stride: usize,
    pub gain: f64,
    pub threshold: f64,
}

impl Composite {
    pub fn earliest_at(&self, x: usize, y: usize) -> Option<usize> {
        self.earliest[y * self.image.width() + x]
    }

    /// Lines for the `.meta.txt` sidecar.
    pub fn sidecar_lines(&self) -> Vec<String> {
        let mut lines = vec![
            "kind=temporal_composite".to_string(),
            "colormap=rainbow".to_string(),
            format!("threshold={}", self.threshold),
            format!("stride={}", self.stride),
            format!("gain={}", self.gain),
            "time_min_s=0".to_string(),
            format!("time_max_s={}", self.legend.time_max_s),
        ];
        for (pair, t, c) in &self.legend.entries {
            lines.push(format!("pair={pair} time_s={t} rgb={},{},{}", c[0], c[1], c[2]));
        }
        lines
    }
}

/// Color assigned to frame pair `pair` of `pair_count`.
pub fn pair_color(pair: usize, pair_count: usize) -> [u8; 3] {
    if pair_count <= 1 {
        rainbow(0.0)
    } else {
        rainbow(pair as f64 / (pair_count - 1) as f64)
    }
}

/// Builds the composite. Displayed pixels lie on a `stride` grid anchored at
/// the valid-region origin; each is painted with the color of its earliest
/// reliable pair and gets an arrow of that pair's vector scaled by `gain`.
pub fn temporal_composite(
    fields: &FlowSequence,
    threshold: f64,
    stride: usize,
    gain: f64,
) -> Result<Composite> {
    if stride == 0 {
        return Err(Error::Parameter("stride must be at least 1".into()));
    }
    if !gain.is_finite() {
        return Err(Error::Parameter("display gain must be finite".into()));
    }
    let (w, h) = (fields.width(), fields.height());
    let n = fields.pair_count();
    let dt = fields.calibration().frame_interval();
    let valid = fields.valid_region();

    let mut earliest = vec![None; w * h];
    for (x, y) in valid.pixels() {
        earliest[y * w + x] = fields
            .fields()
            .iter()
            .position(|f| f.is_reliable(x, y, threshold));
    }

    let mut image = RgbImage::new(w, h, BACKGROUND);
    for (x, y) in valid.pixels() {
        if !(x - valid.x0).is_multiple_of(stride) || !(y - valid.y0).is_multiple_of(stride) {
            continue;
        }
        if let Some(k) = earliest[y * w + x] {
            let color = pair_color(k, n);
            let s = fields.fields()[k].sample(x, y);
            let (xf, yf) = (x as f64, y as f64);
            image.draw_line(xf, yf, xf + gain * s.u, yf + gain * s.v, color);
            image.set(x, y, color);
        }
    }

    let legend = ColorLegend {
        entries: (0..n).map(|k| (k, k as f64 * dt, pair_color(k, n))).collect(),
        time_max_s: n.saturating_sub(1) as f64 * dt,
    };
    Ok(Composite {
        image,
        earliest,
        legend,
        stride,
        gain,
        threshold,
    })
}
