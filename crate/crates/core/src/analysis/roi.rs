use crate::error::{Error, Result};
use crate::flow::FlowSequence;
use crate::movie::Calibration;
use crate::plane::Rect;

/// Number of uniform bins used when no edges are supplied.
pub const DEFAULT_BIN_COUNT: usize = 20;

/// A rectangular region of interest in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionOfInterest {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

impl RegionOfInterest {
    pub fn new(x0: usize, y0: usize, width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Parameter("region of interest must be non-empty".into()));
        }
        Ok(Self {
            x0,
            y0,
            width,
            height,
        })
    }

    pub fn rect(&self) -> Rect {
        Rect::new(self.x0, self.y0, self.width, self.height)
    }

    /// Fails unless the region lies inside a `width x height` image.
    pub fn check_within(&self, width: usize, height: usize) -> Result<()> {
        if self.x0 + self.width > width || self.y0 + self.height > height {
            return Err(Error::OutOfBounds(format!(
                "region {}x{} at ({}, {}) exceeds the {width}x{height} field",
                self.width, self.height, self.x0, self.y0
            )));
        }
        Ok(())
    }

    /// Physical extent in microns.
    pub fn extent_um(&self, calibration: &Calibration) -> (f64, f64) {
        (
            self.width as f64 * calibration.microns_per_pixel,
            self.height as f64 * calibration.microns_per_pixel,
        )
    }
}

/// Speeds (microns/second) of every reliable vector inside the region,
/// across all frame pairs, ordered by pair, row, column.
pub fn reliable_speeds(
    fields: &FlowSequence,
    roi: &RegionOfInterest,
    threshold: f64,
    calibration: &Calibration,
) -> Result<Vec<f64>> {
    roi.check_within(fields.width(), fields.height())?;
    let scale = calibration.velocity_scale();
    let area = roi.rect().intersect(&fields.valid_region());
    let mut out = vec![];
    for field in fields.fields() {
        for (x, y) in area.pixels() {
            if field.is_reliable(x, y, threshold) {
                let s = field.sample(x, y);
                out.push(s.u.hypot(s.v) * scale);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedHistogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl SpeedHistogram {
    /// Index of the most populated bin (lowest index on ties).
    pub fn mode_bin(&self) -> Option<usize> {
        if self.total == 0 {
            return None;
        }
        let max = *self.counts.iter().max()?;
        self.counts.iter().position(|&c| c == max)
    }
}

fn check_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 {
        return Err(Error::Parameter("a histogram needs at least two edges".into()));
    }
    if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::Parameter(
            "histogram edges must be finite and strictly ascending".into(),
        ));
    }
    Ok(())
}

/// Uniform edges over `[0, max speed]`; a unit range when there is no data.
pub fn default_edges(speeds: &[f64], bins: usize) -> Vec<f64> {
    let bins = bins.max(1);
    let max = speeds.iter().copied().fold(0.0f64, f64::max);
    let top = if max > 0.0 { max } else { 1.0 };
    (0..=bins).map(|i| top * i as f64 / bins as f64).collect()
}

/// Bins `speeds` by `[e_i, e_{i+1})`. Values below the first edge land in
/// the first bin and values at or above the last edge in the last bin.
pub fn histogram(speeds: &[f64], edges: &[f64]) -> Result<SpeedHistogram> {
    check_edges(edges)?;
    let bins = edges.len() - 1;
    let mut counts = vec![0u64; bins];
    for &s in speeds {
        let idx = edges.partition_point(|&e| e <= s).saturating_sub(1).min(bins - 1);
        counts[idx] += 1;
    }
    Ok(SpeedHistogram {
        bin_edges: edges.to_vec(),
        counts,
        total: speeds.len() as u64,
    })
}

/// Histogram of reliable speeds inside `roi`.
pub fn roi_speed_histogram(
    fields: &FlowSequence,
    roi: &RegionOfInterest,
    threshold: f64,
    calibration: &Calibration,
    bin_edges: &[f64],
) -> Result<SpeedHistogram> {
    check_edges(bin_edges)?;
    let speeds = reliable_speeds(fields, roi, threshold, calibration)?;
    histogram(&speeds, bin_edges)
}

/// Summary of reliable vectors inside a region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoiStats {
    pub count: usize,
    /// Mean speed in microns/second; NaN when `count == 0`.
    pub mean_speed: f64,
    /// Population standard deviation of the speed; NaN when empty.
    pub std_speed: f64,
    /// Angle of the vector sum in degrees, image axes (y down); NaN when empty.
    pub mean_direction_deg: f64,
}

impl RoiStats {
    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
}

/// Statistics of physical velocity vectors.
pub fn velocity_stats(vectors: &[(f64, f64)]) -> RoiStats {
    if vectors.is_empty() {
        return RoiStats {
            count: 0,
            mean_speed: f64::NAN,
            std_speed: f64::NAN,
            mean_direction_deg: f64::NAN,
        };
    }
    let n = vectors.len() as f64;
    let speeds: Vec<f64> = vectors.iter().map(|(x, y)| x.hypot(*y)).collect();
    let mean = speeds.iter().sum::<f64>() / n;
    let var = speeds.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
    let (sx, sy) = vectors
        .iter()
        .fold((0.0, 0.0), |(ax, ay), (x, y)| (ax + x, ay + y));
    RoiStats {
        count: vectors.len(),
        mean_speed: mean,
        std_speed: var.sqrt(),
        mean_direction_deg: sy.atan2(sx).to_degrees(),
    }
}

pub fn roi_stats(
    fields: &FlowSequence,
    roi: &RegionOfInterest,
    threshold: f64,
    calibration: &Calibration,
) -> Result<RoiStats> {
    roi.check_within(fields.width(), fields.height())?;
    let scale = calibration.velocity_scale();
    let area = roi.rect().intersect(&fields.valid_region());
    let mut vectors = vec![];
    for field in fields.fields() {
        for (x, y) in area.pixels() {
            if field.is_reliable(x, y, threshold) {
                let s = field.sample(x, y);
                vectors.push((s.u * scale, s.v * scale));
            }
        }
    }
    Ok(velocity_stats(&vectors))
}
