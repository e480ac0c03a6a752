//! Analysis products derived from flow-field sequences.

pub mod clifford;
pub mod color;
pub mod composite;
pub mod didt;
pub mod render;
pub mod roi;
pub mod trace;

pub use clifford::{clifford_match, MatchMap, VectorKernel};
pub use composite::{temporal_composite, ColorLegend, Composite};
pub use didt::{didt_render, DidtRender};
pub use roi::{
    default_edges, histogram, reliable_speeds, roi_speed_histogram, roi_stats, velocity_stats,
    RegionOfInterest, RoiStats, SpeedHistogram, DEFAULT_BIN_COUNT,
};
pub use trace::{interpolate_reliable, trace_paths, PathTrace, Termination, TracePoint};
