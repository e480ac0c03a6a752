//! Dense Lucas-Kanade optical flow for calibrated fluorescence movies.
//!
//! The pipeline runs [`io::load_movie`] → [`flow::compute_flow_field`] →
//! masking by the minimum structure-tensor eigenvalue → the analyses in
//! [`analysis`]. Flow is computed in pixels/frame and converted to
//! microns/second only through a [`Calibration`]. [`synth`] produces movies
//! with known motion for validation.

pub mod analysis;
pub mod error;
pub mod flow;
pub mod gradient;
pub mod io;
pub mod movie;
pub mod plane;
pub mod presets;
pub mod synth;

pub use error::{Error, Result};
pub use flow::{
    apply_mask, compute_flow_field, to_physical, FlowField, FlowParams, FlowSample, FlowSequence,
};
pub use movie::{Calibration, MovieStack};
pub use plane::{Plane, Rect};
