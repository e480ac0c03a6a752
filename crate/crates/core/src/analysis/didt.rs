use crate::analysis::color::diverging;
use crate::error::{Error, Result};
use crate::io::RgbImage;
use crate::movie::MovieStack;
use crate::plane::Plane;

/// Rate of intensity change between two frames, in intensity/second.
#[derive(Debug, Clone, PartialEq)]
pub struct DidtRender {
    pub values: Plane,
    /// Symmetric color-scale limit: `[-limit, limit]` maps onto the scale.
    pub limit: f64,
    pub image: RgbImage,
}

impl DidtRender {
    pub fn sidecar_lines(&self) -> Vec<String> {
        vec![
            "kind=didt".to_string(),
            "units=intensity_per_second".to_string(),
            "colormap=diverging_blue_white_red".to_string(),
            format!("scale_min={}", -self.limit),
            format!("scale_max={}", self.limit),
        ]
    }
}

pub fn didt_render(movie: &MovieStack, t_index: usize) -> Result<DidtRender> {
    if t_index + 1 >= movie.frame_count() {
        return Err(Error::OutOfBounds(format!(
            "pair {t_index} out of range for {} frames",
            movie.frame_count()
        )));
    }
    let rate = movie.calibration().frame_rate_hz;
    let (a, b) = (movie.frame(t_index), movie.frame(t_index + 1));
    let values = Plane::new(
        movie.width(),
        movie.height(),
        a.iter().zip(b).map(|(p, q)| (q - p) * rate).collect(),
    )?;
    let peak = values.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let limit = if peak > 0.0 { peak } else { 1.0 };
    let mut image = RgbImage::new(movie.width(), movie.height(), [0; 3]);
    for y in 0..movie.height() {
        for x in 0..movie.width() {
            image.set(x, y, diverging(values.get(x, y) / limit));
        }
    }
    Ok(DidtRender {
        values,
        limit,
        image,
    })
}
