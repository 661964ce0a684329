//! Named camera configurations and experiment presets.
//!
//! The camera values are synthetic and give short exact decimal disparities.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::geometry::{CameraConfig, CameraParams};

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn tenth_slope(precision: u32, offset: BigRational) -> CameraConfig {
    CameraConfig::from_params(CameraParams {
        focal_length: r(1, 1),
        baseline: r(1, 1),
        z_near: r(1, 26),
        z_far: r(2, 1),
        precision,
        rounding_offset: Some(offset),
    })
    .expect("preset is valid")
}

/// `D(v) = 0.1 v + 0.5` pel, half-pel grid, `o = 1/4`.
pub fn canonical_half_pel() -> CameraConfig {
    tenth_slope(2, r(1, 4))
}

/// `D(v) = 0.1 v + 0.5` pel, integer-pel grid, `o = 1/2`.
pub fn canonical_integer_pel() -> CameraConfig {
    tenth_slope(1, r(1, 2))
}

/// Camera of the standard synthetic scene; same as [`canonical_half_pel`].
pub fn standard_camera() -> CameraConfig {
    canonical_half_pel()
}

/// A pair of `(noise sigma, lambda)` settings standing in for one texture
/// and depth QP pair of a codec test. These are desk-scale knobs with no
/// numerical equivalence to codec quantizers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QualityPreset {
    pub name: &'static str,
    pub noise_sigma: f64,
    pub lambda: f64,
}

pub const QUALITY_PRESETS: [QualityPreset; 3] = [
    QualityPreset { name: "qp25-34", noise_sigma: 1.0, lambda: 0.5 },
    QualityPreset { name: "qp30-39", noise_sigma: 2.0, lambda: 2.0 },
    QualityPreset { name: "qp35-42", noise_sigma: 3.0, lambda: 8.0 },
];
