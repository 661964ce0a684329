//! Depth-map coding optimization for occlusion-inducing depth pixels.
//!
//! A depth level `v` maps to a disparity through the camera model in
//! [`geometry`]; disparities are rounded onto a `1/N` sub-pel grid, so whole
//! runs of depth levels render to the same position. [`allowable`] computes
//! those runs, [`occlusion`] finds the reference pixels that collide in the
//! virtual view, [`cost`] builds the probability, distortion and rate tables,
//! and [`optimizer`] picks one depth change per pixel with a Lagrangian
//! dynamic program. [`pipeline`] wires everything to images, files and
//! metrics.

pub mod allowable;
pub mod cost;
pub mod error;
pub mod geometry;
pub mod occlusion;
pub mod optimizer;
pub mod pipeline;

pub use allowable::AllowableInterval;
pub use cost::{LagrangianParams, PixelTables, ProbabilityTable};
pub use error::{Error, Result};
pub use geometry::{CameraConfig, CameraParams, DepthLevel, QuantizedDisparity};
pub use occlusion::{DepthChangeVector, Direction, OcclusionGroup, PixelCandidate};
pub use optimizer::{Mode, OptimizationResult, Problem, RateBudget};
