//! Allowable depth-level changes: runs of `dv` that leave the rounded
//! disparity error of a pixel unchanged.

use std::fmt;
use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::geometry::{CameraConfig, DepthLevel, LEVEL_COUNT, MAX_LEVEL};

/// Inclusive interval `[lo, hi]` of depth-level changes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AllowableInterval {
    lo: i32,
    hi: i32,
}

impl AllowableInterval {
    pub fn new(lo: i32, hi: i32) -> Result<Self> {
        if lo > hi {
            return Err(Error::EmptyCandidates);
        }
        Ok(AllowableInterval { lo, hi })
    }

    pub fn singleton(dv: i32) -> Self {
        AllowableInterval { lo: dv, hi: dv }
    }

    pub fn lo(&self) -> i32 {
        self.lo
    }

    pub fn hi(&self) -> i32 {
        self.hi
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo) as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_singleton(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, dv: i32) -> bool {
        (self.lo..=self.hi).contains(&dv)
    }

    pub fn iter(&self) -> RangeInclusive<i32> {
        self.lo..=self.hi
    }
}

impl fmt::Display for AllowableInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

fn check_feasible(v: DepthLevel, dv_k: i32) -> Result<()> {
    v.offset(dv_k).map(|_| ())
}

/// Changes `dv` for which `v + dv` renders to the same rounded disparity as
/// `v` itself. Always contains 0; clipped to keep `v + dv` in `[0, 255]`.
pub fn zero_error_interval(v: DepthLevel, cfg: &CameraConfig) -> AllowableInterval {
    let (lo, hi) = cfg.level_cell(v);
    AllowableInterval {
        lo: lo - v.value(),
        hi: hi - v.value(),
    }
}

/// The zero-error interval of `v` translated by `dv_k`, clipped to the level
/// range. This is the closed-form model for nonzero errors; it assumes the
/// rounding cell around `v + dv_k` has the same width and phase as the one
/// around `v`.
pub fn shift_rule(v: DepthLevel, dv_k: i32, cfg: &CameraConfig) -> Result<AllowableInterval> {
    check_feasible(v, dv_k)?;
    let base = zero_error_interval(v, cfg);
    let lo = (dv_k + base.lo).max(-v.value());
    let hi = (dv_k + base.hi).min(MAX_LEVEL - v.value());
    Ok(AllowableInterval { lo, hi })
}

/// Maximal interval around `dv_k` whose members all give the disparity
/// error of `dv_k`.
///
/// This is the [`shift_rule`] candidate corrected onto the rounding cell of
/// the level `v + dv_k`: a bound that overshoots into a neighbouring cell is
/// trimmed and a bound that stops short of the cell edge is extended, which
/// leaves exactly the cell. The cell edges come from inverting the rounding
/// inequality, not from scanning; [`shift_rule_miss`] reports the correction.
pub fn shifted_interval(v: DepthLevel, dv_k: i32, cfg: &CameraConfig) -> Result<AllowableInterval> {
    let (cell_lo, cell_hi) = cfg.level_cell(v.offset(dv_k)?);
    Ok(AllowableInterval {
        lo: cell_lo - v.value(),
        hi: cell_hi - v.value(),
    })
}

/// How far [`shift_rule`] misses each bound of [`shifted_interval`]
/// (`rule - exact`); `(0, 0)` when the closed-form shift is exact.
pub fn shift_rule_miss(v: DepthLevel, dv_k: i32, cfg: &CameraConfig) -> Result<(i32, i32)> {
    let rule = shift_rule(v, dv_k, cfg)?;
    let exact = shifted_interval(v, dv_k, cfg)?;
    Ok((rule.lo - exact.lo, rule.hi - exact.hi))
}

/// Outward linear scan from `dv_k` comparing disparity errors level by
/// level. Ground truth for the interval routines above.
pub fn exhaustive_interval(
    v: DepthLevel,
    dv_k: i32,
    cfg: &CameraConfig,
) -> Result<AllowableInterval> {
    let target = cfg.disparity_error(v, dv_k)?;
    let same = |dv: i32| matches!(cfg.disparity_error(v, dv), Ok(e) if e == target);
    let mut lo = dv_k;
    while same(lo - 1) {
        lo -= 1;
    }
    let mut hi = dv_k;
    while same(hi + 1) {
        hi += 1;
    }
    Ok(AllowableInterval { lo, hi })
}

/// Zero-error interval of every depth level, indexed by level.
pub fn allowable_table(cfg: &CameraConfig) -> Vec<AllowableInterval> {
    (0..LEVEL_COUNT)
        .map(|v| zero_error_interval(DepthLevel::from(v as u8), cfg))
        .collect()
}
