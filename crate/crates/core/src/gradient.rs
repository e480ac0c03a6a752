//! Spatial and temporal intensity derivatives on the 2x2 half-pixel grid.
//!
//! Every output pixel `(x, y)` summarizes the 2x2 neighborhood whose top-left
//! corner is `(x, y)`, so a `W x H` frame produces `(W-1) x (H-1)` planes.
//! All three derivative planes share that grid.

use crate::error::{Error, Result};
use crate::movie::MovieStack;
use crate::plane::Plane;

/// A 2x2 kernel indexed `[row][column]`.
pub type Kernel2x2 = [[f64; 2]; 2];

/// Forward difference along x, averaged over the two rows.
pub const DX_KERNEL: Kernel2x2 = [[-0.25, 0.25], [-0.25, 0.25]];
/// Forward difference along y, averaged over the two columns.
pub const DY_KERNEL: Kernel2x2 = [[-0.25, -0.25], [0.25, 0.25]];
/// Box average of the 2x2 neighborhood.
pub const DT_KERNEL: Kernel2x2 = [[0.25, 0.25], [0.25, 0.25]];

/// Derivative planes for one frame pair.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientTriplet {
    /// dI/dx in intensity per pixel.
    pub ix: Plane,
    /// dI/dy in intensity per pixel.
    pub iy: Plane,
    /// dI/dt in intensity per frame.
    pub it: Plane,
}

impl GradientTriplet {
    pub fn width(&self) -> usize {
        self.ix.width()
    }

    pub fn height(&self) -> usize {
        self.ix.height()
    }
}

/// Applies a 2x2 kernel without flipping it:
/// `out(x, y) = sum_{i,j} kernel[i][j] * plane(x + j, y + i)`.
pub fn conv2x2(plane: &Plane, kernel: &Kernel2x2) -> Result<Plane> {
    let (w, h) = (plane.width(), plane.height());
    if w < 2 || h < 2 {
        return Err(Error::InsufficientData(format!(
            "2x2 kernel needs a plane of at least 2x2, got {w}x{h}"
        )));
    }
    let mut out = Vec::with_capacity((w - 1) * (h - 1));
    for y in 0..h - 1 {
        let top = plane.row(y);
        let bottom = plane.row(y + 1);
        for x in 0..w - 1 {
            out.push(
                kernel[0][0] * top[x]
                    + kernel[0][1] * top[x + 1]
                    + kernel[1][0] * bottom[x]
                    + kernel[1][1] * bottom[x + 1],
            );
        }
    }
    Plane::new(w - 1, h - 1, out)
}

fn check_same_size(a: &Plane, b: &Plane) -> Result<()> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::Format(format!(
            "frame sizes differ: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

/// Frame difference (one frame apart) smoothed by the 2x2 box kernel.
pub fn temporal_gradient(frame_t: &Plane, frame_next: &Plane) -> Result<Plane> {
    check_same_size(frame_t, frame_next)?;
    let diff = Plane::new(
        frame_t.width(),
        frame_t.height(),
        frame_t
            .as_slice()
            .iter()
            .zip(frame_next.as_slice())
            .map(|(a, b)| b - a)
            .collect(),
    )?;
    conv2x2(&diff, &DT_KERNEL)
}

/// Spatial derivative over a frame pair: the 2x2 kernel response of both
/// frames, summed. On a ramp `a*x` this yields exactly `a`, and it centers
/// the spatial estimate at the same half-frame instant as the temporal one.
pub fn spatial_gradient(frame_t: &Plane, frame_next: &Plane, kernel: &Kernel2x2) -> Result<Plane> {
    check_same_size(frame_t, frame_next)?;
    let a = conv2x2(frame_t, kernel)?;
    let b = conv2x2(frame_next, kernel)?;
    let (w, h) = (a.width(), a.height());
    let mut data = a.into_vec();
    data.iter_mut().zip(b.as_slice()).for_each(|(x, y)| *x += y);
    Plane::new(w, h, data)
}

/// Derivative triplet from two explicit frames.
pub fn gradients_from_frames(frame_t: &Plane, frame_next: &Plane) -> Result<GradientTriplet> {
    Ok(GradientTriplet {
        ix: spatial_gradient(frame_t, frame_next, &DX_KERNEL)?,
        iy: spatial_gradient(frame_t, frame_next, &DY_KERNEL)?,
        it: temporal_gradient(frame_t, frame_next)?,
    })
}

/// Derivative triplet for the frame pair `(t_index, t_index + 1)`.
pub fn gradients_for_pair(movie: &MovieStack, t_index: usize) -> Result<GradientTriplet> {
    if t_index + 1 >= movie.frame_count() {
        return Err(Error::OutOfBounds(format!(
            "pair index {t_index} out of range for {} frames",
            movie.frame_count()
        )));
    }
    gradients_from_frames(&movie.frame_plane(t_index), &movie.frame_plane(t_index + 1))
}
