//! Forward warping of depth rows, occlusion groups and z-buffer synthesis.
//!
//! Warping is one-dimensional: reference column `x` lands on the virtual
//! sample `x * N + sign * R(D(q)) * N` of the `1/N` grid, where `q` is the
//! coded depth level. Pixels are visited in increasing `x`; when several land
//! on one sample the first pixel with the largest coded level wins.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::allowable::{shifted_interval, AllowableInterval};
use crate::error::{Error, Result};
use crate::geometry::{CameraConfig, DepthLevel};

/// Which way the virtual camera sits relative to the reference camera.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Direction {
    /// Pixels move towards larger `x` (sign `+1`).
    #[default]
    Right,
    /// Pixels move towards smaller `x` (sign `-1`).
    Left,
}

impl Direction {
    pub fn sign(self) -> i64 {
        match self {
            Direction::Right => 1,
            Direction::Left => -1,
        }
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+1" | "1" | "right" => Ok(Direction::Right),
            "-1" | "left" => Ok(Direction::Left),
            other => Err(Error::Parse(format!("direction must be +1 or -1, got {other:?}"))),
        }
    }
}

/// One reference pixel taking part in an occlusion.
#[derive(Clone, Debug, PartialEq)]
pub struct PixelCandidate {
    pub x: usize,
    pub y: usize,
    /// Uncompressed depth level.
    pub v: DepthLevel,
    /// Initial quantization error; the coded level is `v + dv_k`.
    pub dv_k: i32,
    /// Depth changes sharing the disparity error of `dv_k`.
    pub candidates: AllowableInterval,
    /// Texture-gradient energy scaling the geometry distortion.
    pub weight: f64,
}

impl PixelCandidate {
    pub fn new(
        x: usize,
        y: usize,
        v: DepthLevel,
        dv_k: i32,
        weight: f64,
        cfg: &CameraConfig,
    ) -> Result<Self> {
        let candidates = shifted_interval(v, dv_k, cfg)?;
        Ok(PixelCandidate {
            x,
            y,
            v,
            dv_k,
            candidates,
            weight,
        })
    }

    /// Coded level `v + dv_k`.
    pub fn coded(&self) -> i32 {
        self.v.value() + self.dv_k
    }
}

/// Reference pixels sharing one virtual-view sample, in increasing coded
/// depth with the winner last.
#[derive(Clone, Debug, PartialEq)]
pub struct OcclusionGroup {
    target: i64,
    direction: Direction,
    pixels: Vec<PixelCandidate>,
}

impl OcclusionGroup {
    /// Orders `members` (given in scan order) for the optimizer. Fails unless
    /// at least two pixels are present.
    pub fn from_scan_order(
        target: i64,
        direction: Direction,
        mut members: Vec<PixelCandidate>,
    ) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::EmptyGroup);
        }
        let coded: Vec<(usize, i32)> = members.iter().map(|p| (p.x, p.coded())).collect();
        let winner = members.remove(select_winner(&coded));
        members.sort_by_key(PixelCandidate::coded);
        members.push(winner);
        Ok(OcclusionGroup {
            target,
            direction,
            pixels: members,
        })
    }

    /// Virtual sample index on the `1/N` grid.
    pub fn target(&self) -> i64 {
        self.target
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn pixels(&self) -> &[PixelCandidate] {
        &self.pixels
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn winner(&self) -> &PixelCandidate {
        self.pixels.last().expect("groups hold at least two pixels")
    }

    /// Number of pixels whose candidate set has more than one member.
    pub fn free_pixels(&self) -> usize {
        self.pixels.iter().filter(|p| !p.candidates.is_singleton()).count()
    }
}

/// One depth change per group pixel, in group order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DepthChangeVector(Vec<i32>);

impl DepthChangeVector {
    /// Unchecked; see [`DepthChangeVector::for_group`].
    pub fn new(dv: Vec<i32>) -> Self {
        DepthChangeVector(dv)
    }

    /// Validates every component against its candidate interval.
    pub fn for_group(group: &OcclusionGroup, dv: Vec<i32>) -> Result<Self> {
        if dv.len() != group.len() {
            return Err(Error::InvalidVector(format!(
                "expected {} components, got {}",
                group.len(),
                dv.len()
            )));
        }
        for (z, (p, &d)) in group.pixels.iter().zip(&dv).enumerate() {
            if !p.candidates.contains(d) {
                return Err(Error::InvalidVector(format!(
                    "component {z} = {d} lies outside {}",
                    p.candidates
                )));
            }
        }
        Ok(DepthChangeVector(dv))
    }

    /// The initial vector: every pixel keeps its quantization error.
    pub fn initial(group: &OcclusionGroup) -> Self {
        DepthChangeVector(group.pixels.iter().map(|p| p.dv_k).collect())
    }

    pub fn as_slice(&self) -> &[i32] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<i32> {
        self.0
    }
}

impl std::ops::Deref for DepthChangeVector {
    type Target = [i32];

    fn deref(&self) -> &[i32] {
        &self.0
    }
}

/// Index of the winner among `(x, coded level)` pairs listed in scan order:
/// the first pixel attaining the largest coded level. Everything before it
/// is strictly smaller and everything after it is smaller or equal.
pub fn select_winner(members: &[(usize, i32)]) -> usize {
    let mut best = 0;
    for (i, &(_, q)) in members.iter().enumerate().skip(1) {
        if q > members[best].1 {
            best = i;
        }
    }
    best
}

/// Virtual sample reached by column `x` coded at `level`.
pub fn warp_target(x: usize, level: DepthLevel, cfg: &CameraConfig, direction: Direction) -> i64 {
    let n = i64::from(cfg.precision());
    x as i64 * n + direction.sign() * cfg.rounded_disparity(level).units()
}

fn coded_levels(depth_row: &[DepthLevel], errors: &[i32]) -> Result<Vec<DepthLevel>> {
    if depth_row.len() != errors.len() {
        return Err(Error::DimensionMismatch(format!(
            "depth row has {} samples, error row has {}",
            depth_row.len(),
            errors.len()
        )));
    }
    depth_row.iter().zip(errors).map(|(v, &e)| v.offset(e)).collect()
}

/// Virtual-grid target of every column of a coded row.
pub fn forward_warp(
    depth_row: &[DepthLevel],
    errors: &[i32],
    cfg: &CameraConfig,
    direction: Direction,
) -> Result<Vec<i64>> {
    Ok(coded_levels(depth_row, errors)?
        .into_iter()
        .enumerate()
        .map(|(x, q)| warp_target(x, q, cfg, direction))
        .collect())
}

/// Squared central difference of the texture, edges clamped.
pub fn gradient_weights(texture_row: &[u8]) -> Vec<f64> {
    let w = texture_row.len();
    (0..w)
        .map(|x| {
            let right = f64::from(texture_row[(x + 1).min(w - 1)]);
            let left = f64::from(texture_row[x.saturating_sub(1)]);
            let g = (right - left) / 2.0;
            g * g
        })
        .collect()
}

/// Occlusion groups of one row, sorted by target.
///
/// `weights` defaults to 1.0 per pixel.
pub fn extract_groups(
    depth_row: &[DepthLevel],
    errors: &[i32],
    weights: Option<&[f64]>,
    y: usize,
    cfg: &CameraConfig,
    direction: Direction,
) -> Result<Vec<OcclusionGroup>> {
    if let Some(w) = weights {
        if w.len() != depth_row.len() {
            return Err(Error::DimensionMismatch(format!(
                "depth row has {} samples, weight row has {}",
                depth_row.len(),
                w.len()
            )));
        }
    }
    let targets = forward_warp(depth_row, errors, cfg, direction)?;
    let mut hits: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (x, &t) in targets.iter().enumerate() {
        hits.entry(t).or_default().push(x);
    }
    hits.into_iter()
        .filter(|(_, xs)| xs.len() >= 2)
        .map(|(target, xs)| {
            let members = xs
                .into_iter()
                .map(|x| {
                    let weight = weights.map_or(1.0, |w| w[x]);
                    PixelCandidate::new(x, y, depth_row[x], errors[x], weight, cfg)
                })
                .collect::<Result<Vec<_>>>()?;
            OcclusionGroup::from_scan_order(target, direction, members)
        })
        .collect()
}

/// Virtual row on the `1/N` grid. Holes have `occupied == false` and sample 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SynthesizedRow {
    pub samples: Vec<u8>,
    pub occupied: Vec<bool>,
    /// Source column of the winning pixel per sample.
    pub winners: Vec<Option<usize>>,
}

/// Z-buffer synthesis of one row. The virtual row spans `width * N`
/// samples; pixels warped outside it are dropped.
pub fn synthesize_row(
    texture_row: &[u8],
    depth_row: &[DepthLevel],
    errors: &[i32],
    cfg: &CameraConfig,
    direction: Direction,
) -> Result<SynthesizedRow> {
    if texture_row.len() != depth_row.len() {
        return Err(Error::DimensionMismatch(format!(
            "texture row has {} samples, depth row has {}",
            texture_row.len(),
            depth_row.len()
        )));
    }
    let coded = coded_levels(depth_row, errors)?;
    let len = texture_row.len() * cfg.precision() as usize;
    let mut row = SynthesizedRow {
        samples: vec![0; len],
        occupied: vec![false; len],
        winners: vec![None; len],
    };
    let mut zbuf = vec![i32::MIN; len];
    for (x, q) in coded.into_iter().enumerate() {
        let t = warp_target(x, q, cfg, direction);
        let Ok(t) = usize::try_from(t) else { continue };
        if t >= len {
            continue;
        }
        // Equal levels keep the first pixel.
        if q.value() > zbuf[t] {
            zbuf[t] = q.value();
            row.samples[t] = texture_row[x];
            row.occupied[t] = true;
            row.winners[t] = Some(x);
        }
    }
    Ok(row)
}

/// True when every pixel of `group` still lands on the group target and the
/// same pixel still wins after applying `dv` instead of the initial errors.
pub fn order_preserved(group: &OcclusionGroup, dv: &[i32], cfg: &CameraConfig) -> bool {
    if dv.len() != group.len() {
        return false;
    }
    let mut scan: Vec<(usize, i32)> = Vec::with_capacity(dv.len());
    for (p, &d) in group.pixels.iter().zip(dv) {
        let Ok(level) = p.v.offset(d) else { return false };
        if warp_target(p.x, level, cfg, group.direction) != group.target {
            return false;
        }
        scan.push((p.x, level.value()));
    }
    scan.sort_by_key(|&(x, _)| x);
    scan[select_winner(&scan)].0 == group.winner().x
}
