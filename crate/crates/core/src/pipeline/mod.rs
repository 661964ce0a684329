//! Files, synthetic scenes, end-to-end runs and evaluation metrics.

pub mod config;
pub mod image;
pub mod metrics;
pub mod pgm;
pub mod presets;
pub mod report;
pub mod run;
pub mod scene;

pub use image::Image;
pub use metrics::{bd_rate, psnr, RdPoint};
pub use run::{run_optimize, synthesize_view, RunOptions, RunReport, RateTarget};
pub use scene::{gen_scene, occluded_fraction, Scene, SceneSpec};
