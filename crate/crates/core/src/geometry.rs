//! Disparity of a depth level and its rounding onto the `1/N` sub-pel grid.
//!
//! Camera parameters are exact rationals and the rounding
//! `ceil((d - o) * N) / N` is evaluated without floating point. The rounded
//! disparity of all 256 depth levels, and the run of levels sharing each of
//! them, are tabulated once when the configuration is built.

use std::fmt;
use std::ops::Sub;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub const MAX_LEVEL: i32 = 255;
pub const LEVEL_COUNT: usize = 256;

/// An 8-bit depth level (quantized inverse depth).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct DepthLevel(u8);

impl DepthLevel {
    pub fn new(v: i64) -> Result<Self> {
        u8::try_from(v)
            .map(DepthLevel)
            .map_err(|_| Error::DepthOutOfRange(v))
    }

    pub fn value(self) -> i32 {
        i32::from(self.0)
    }

    /// `self + dv`, rejected when it leaves `[0, 255]`.
    pub fn offset(self, dv: i32) -> Result<DepthLevel> {
        DepthLevel::new(i64::from(self.value()) + i64::from(dv))
    }
}

impl From<u8> for DepthLevel {
    fn from(v: u8) -> Self {
        DepthLevel(v)
    }
}

impl From<DepthLevel> for u8 {
    fn from(v: DepthLevel) -> Self {
        v.0
    }
}

/// A disparity on the `1/N` grid, stored as an integer count of `1/N` pel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuantizedDisparity {
    units: i64,
    precision: u32,
}

impl QuantizedDisparity {
    pub fn from_units(units: i64, precision: u32) -> Self {
        assert!(precision >= 1, "sub-pel precision must be at least 1");
        QuantizedDisparity { units, precision }
    }

    pub fn units(self) -> i64 {
        self.units
    }

    pub fn precision(self) -> u32 {
        self.precision
    }

    pub fn is_zero(self) -> bool {
        self.units == 0
    }

    pub fn to_f64(self) -> f64 {
        self.units as f64 / f64::from(self.precision)
    }

    pub fn to_rational(self) -> BigRational {
        BigRational::new(BigInt::from(self.units), BigInt::from(self.precision))
    }
}

impl Sub for QuantizedDisparity {
    type Output = QuantizedDisparity;

    fn sub(self, rhs: Self) -> Self::Output {
        assert_eq!(self.precision, rhs.precision, "mixed sub-pel precisions");
        QuantizedDisparity::from_units(self.units - rhs.units, self.precision)
    }
}

impl fmt::Display for QuantizedDisparity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.precision == 1 {
            write!(f, "{}", self.units)
        } else {
            write!(f, "{}/{}", self.units, self.precision)
        }
    }
}

/// Raw camera and rendering parameters, exact.
#[derive(Clone, Debug, PartialEq)]
pub struct CameraParams {
    pub focal_length: BigRational,
    pub baseline: BigRational,
    pub z_near: BigRational,
    pub z_far: BigRational,
    pub precision: u32,
    /// Rounding offset `o`; `None` selects symmetric rounding `1/(2N)`.
    pub rounding_offset: Option<BigRational>,
}

/// A validated camera configuration with its per-level tables.
#[derive(Clone, Debug)]
pub struct CameraConfig {
    params: CameraParams,
    offset: BigRational,
    c1: BigRational,
    c2: BigRational,
    /// `R(D(v)) * N` for every level.
    rounded: Vec<i64>,
    /// Inclusive level range `[lo, hi]` sharing `R(D(v))`, solved from the
    /// rounding inequality and clipped to `[0, 255]`.
    cells: Vec<(i32, i32)>,
}

pub(crate) fn exact(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or(Error::NonFinite(x))
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn ceil_to_i64(x: &BigRational) -> i64 {
    x.ceil()
        .to_integer()
        .to_i64()
        .expect("rounded disparity does not fit in 64 bits")
}

fn floor_clamped(x: &BigRational, lo: i64, hi: i64) -> i64 {
    let f = x.floor().to_integer();
    if f < BigInt::from(lo) {
        lo
    } else if f > BigInt::from(hi) {
        hi
    } else {
        f.to_i64().expect("clamped value fits")
    }
}

impl CameraConfig {
    pub fn from_params(params: CameraParams) -> Result<Self> {
        let zero = BigRational::zero();
        if params.focal_length <= zero {
            return Err(Error::InvalidConfig("focal_length must be positive".into()));
        }
        if params.baseline <= zero {
            return Err(Error::InvalidConfig("baseline must be positive".into()));
        }
        if params.z_near <= zero {
            return Err(Error::InvalidConfig("z_near must be positive".into()));
        }
        if params.z_near >= params.z_far {
            return Err(Error::InvalidConfig("z_near must be smaller than z_far".into()));
        }
        if params.precision == 0 {
            return Err(Error::InvalidConfig("precision_n must be at least 1".into()));
        }
        let n = BigRational::from_integer(BigInt::from(params.precision));
        let step = n.recip();
        let offset = match &params.rounding_offset {
            Some(o) => o.clone(),
            None => ratio(1, 2 * i64::from(params.precision)),
        };
        if offset <= zero || offset > step {
            return Err(Error::InvalidConfig(format!(
                "rounding_offset must lie in (0, 1/{}]",
                params.precision
            )));
        }

        let c1 = (params.z_near.recip() - params.z_far.recip()) / ratio(255, 1);
        let c2 = params.z_far.recip();
        let fl = &params.focal_length * &params.baseline;

        let rounded: Vec<i64> = (0..LEVEL_COUNT as i64)
            .map(|v| {
                let d = &fl * (&c1 * BigRational::from_integer(BigInt::from(v)) + &c2);
                ceil_to_i64(&((d - &offset) * &n))
            })
            .collect();

        // R(D(w)) = k/N  <=>  (k-1)/N + o < D(w) <= k/N + o, solved for w.
        let slope = &fl * &c1;
        let intercept = &fl * &c2;
        let cells = rounded
            .iter()
            .map(|&k| {
                let k = BigRational::from_integer(BigInt::from(k));
                let upper = (&k / &n + &offset - &intercept) / &slope;
                let lower = ((&k - BigRational::one()) / &n + &offset - &intercept) / &slope;
                let lo = floor_clamped(&lower, -1, i64::from(MAX_LEVEL)) + 1;
                let hi = floor_clamped(&upper, 0, i64::from(MAX_LEVEL));
                (lo as i32, hi as i32)
            })
            .collect();

        Ok(CameraConfig {
            params,
            offset,
            c1,
            c2,
            rounded,
            cells,
        })
    }

    /// Builds a configuration from floating-point inputs, each converted to
    /// the exact rational it represents.
    pub fn new(
        focal_length: f64,
        baseline: f64,
        z_near: f64,
        z_far: f64,
        precision: u32,
        rounding_offset: Option<f64>,
    ) -> Result<Self> {
        Self::from_params(CameraParams {
            focal_length: exact(focal_length)?,
            baseline: exact(baseline)?,
            z_near: exact(z_near)?,
            z_far: exact(z_far)?,
            precision,
            rounding_offset: rounding_offset.map(exact).transpose()?,
        })
    }

    pub fn params(&self) -> &CameraParams {
        &self.params
    }

    pub fn precision(&self) -> u32 {
        self.params.precision
    }

    pub fn offset(&self) -> &BigRational {
        &self.offset
    }

    /// `(C1, C2)` of the disparity model.
    pub fn derived_constants(&self) -> (f64, f64) {
        (to_f64(&self.c1), to_f64(&self.c2))
    }

    pub fn exact_constants(&self) -> (&BigRational, &BigRational) {
        (&self.c1, &self.c2)
    }

    /// Same camera with the baseline multiplied by `scale`.
    pub fn with_baseline_scale(&self, scale: f64) -> Result<Self> {
        let mut params = self.params.clone();
        params.baseline = &params.baseline * exact(scale)?;
        Self::from_params(params)
    }

    pub fn exact_disparity(&self, v: DepthLevel) -> BigRational {
        let w = BigRational::from_integer(BigInt::from(v.value()));
        &self.params.focal_length * &self.params.baseline * (&self.c1 * w + &self.c2)
    }

    /// `f * l * (C1 * v + C2)` in pel.
    pub fn disparity(&self, v: DepthLevel) -> f64 {
        to_f64(&self.exact_disparity(v))
    }

    pub fn round_exact(&self, d: &BigRational) -> QuantizedDisparity {
        let n = BigRational::from_integer(BigInt::from(self.params.precision));
        let units = ceil_to_i64(&((d - &self.offset) * n));
        QuantizedDisparity::from_units(units, self.params.precision)
    }

    /// `ceil((d - o) * N) / N`, evaluated on the exact value of `d`.
    pub fn round_disparity(&self, d: f64) -> Result<QuantizedDisparity> {
        Ok(self.round_exact(&exact(d)?))
    }

    /// `R(D(v))`, from the level table.
    pub fn rounded_disparity(&self, v: DepthLevel) -> QuantizedDisparity {
        QuantizedDisparity::from_units(self.rounded[v.0 as usize], self.params.precision)
    }

    /// `R(D(v + dv)) - R(D(v))`.
    pub fn disparity_error(&self, v: DepthLevel, dv: i32) -> Result<QuantizedDisparity> {
        let shifted = v.offset(dv)?;
        Ok(self.rounded_disparity(shifted) - self.rounded_disparity(v))
    }

    /// Inclusive range of absolute levels whose rounded disparity equals
    /// that of `v`, from the closed-form inverse of the rounding rule.
    pub fn level_cell(&self, v: DepthLevel) -> (i32, i32) {
        self.cells[v.0 as usize]
    }
}

pub(crate) fn to_f64(x: &BigRational) -> f64 {
    // to_f64 on big ratios can overflow both parts; fall back to scaling.
    match x.to_f64() {
        Some(v) if v.is_finite() => v,
        _ => {
            let (n, d) = (x.numer(), x.denom());
            let shift = n.bits().max(d.bits()).saturating_sub(900);
            let n = (n >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (d >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

/// True when `x` lies on the `1/N` grid.
pub fn on_grid(x: &BigRational, precision: u32) -> bool {
    let scaled = x * BigRational::from_integer(BigInt::from(precision));
    scaled.is_integer()
}
