//! Whole-image optimization and view synthesis.

use rayon::prelude::*;

use super::image::Image;
use super::scene::Scene;
use crate::cost::PixelTables;
use crate::error::{Error, Result};
use crate::geometry::{CameraConfig, DepthLevel};
use crate::occlusion::{extract_groups, gradient_weights, synthesize_row, Direction, PixelCandidate};
use crate::optimizer::{
    bisect_lambda, solve, BisectionOptions, Mode, Problem, RateBudget, Solution,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RateTarget {
    Lambda(f64),
    Budget(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub mode: Mode,
    pub target: RateTarget,
    /// Spread of the coding-error model in depth levels; infinite means uniform.
    pub sigma: f64,
    pub direction: Direction,
    pub bisection: BisectionOptions,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            mode: Mode::Dp,
            target: RateTarget::Lambda(1.0),
            sigma: 1.0,
            direction: Direction::Right,
            bisection: BisectionOptions::default(),
        }
    }
}

/// Where the members of one group sit in the image.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupSite {
    pub y: usize,
    pub target: i64,
    /// Columns in group order, winner last.
    pub xs: Vec<usize>,
}

/// Optimization problem of a scene plus the pixel positions behind it.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenePlan {
    pub problem: Problem,
    pub sites: Vec<GroupSite>,
    pub singles: Vec<(usize, usize)>,
}

struct RowPlan {
    groups: Vec<Vec<PixelTables>>,
    sites: Vec<GroupSite>,
    singles: Vec<PixelTables>,
    single_xy: Vec<(usize, usize)>,
}

fn plan_row(scene: &Scene, y: usize, cfg: &CameraConfig, sigma: f64, direction: Direction) -> Result<RowPlan> {
    let depth = scene.depth_row(y);
    let errors = scene.errors.row(y);
    let weights = gradient_weights(scene.texture.row(y));
    let coded: Vec<i32> = depth.iter().zip(errors).map(|(v, e)| v.value() + e).collect();
    let predictor = |x: usize| if x > 0 { coded[x - 1] } else { depth[x].value() };

    let found = extract_groups(&depth, errors, Some(&weights), y, cfg, direction)?;
    let mut in_group = vec![false; depth.len()];
    let mut plan = RowPlan {
        groups: Vec::with_capacity(found.len()),
        sites: Vec::with_capacity(found.len()),
        singles: Vec::new(),
        single_xy: Vec::new(),
    };
    for g in &found {
        let mut tables = Vec::with_capacity(g.len());
        let mut xs = Vec::with_capacity(g.len());
        for p in g.pixels() {
            in_group[p.x] = true;
            xs.push(p.x);
            tables.push(PixelTables::build(p, cfg, sigma, predictor(p.x))?);
        }
        plan.groups.push(tables);
        plan.sites.push(GroupSite {
            y,
            target: g.target(),
            xs,
        });
    }
    for x in (0..depth.len()).filter(|&x| !in_group[x]) {
        let p = PixelCandidate::new(x, y, depth[x], errors[x], weights[x], cfg)?;
        plan.singles.push(PixelTables::build(&p, cfg, sigma, predictor(x))?);
        plan.single_xy.push((x, y));
    }
    Ok(plan)
}

/// Groups and single pixels of every row, in row-major order.
pub fn plan_scene(scene: &Scene, base: &CameraConfig, sigma: f64, direction: Direction) -> Result<ScenePlan> {
    let cfg = scene.camera(base)?;
    let rows = (0..scene.height())
        .into_par_iter()
        .map(|y| plan_row(scene, y, &cfg, sigma, direction))
        .collect::<Result<Vec<_>>>()?;
    let mut plan = ScenePlan {
        problem: Problem::default(),
        sites: Vec::new(),
        singles: Vec::new(),
    };
    for row in rows {
        plan.problem.groups.extend(row.groups);
        plan.problem.singles.extend(row.singles);
        plan.sites.extend(row.sites);
        plan.singles.extend(row.single_xy);
    }
    Ok(plan)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupRow {
    pub id: usize,
    pub y: usize,
    pub target: i64,
    pub xs: Vec<usize>,
    pub dv: Vec<i32>,
    pub rate: f64,
    pub distortion: f64,
    pub true_cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub lambda: f64,
    pub mode: Mode,
    pub rate: f64,
    pub distortion: f64,
    pub cost: f64,
    pub group_pixels: usize,
    pub single_pixels: usize,
    pub groups: Vec<GroupRow>,
    /// `(lambda, rate)` of every bisection step; empty for a fixed lambda.
    pub trace: Vec<(f64, f64)>,
}

impl RunReport {
    pub fn summary(&self) -> String {
        format!(
            "mode={:?} lambda={:.6} rate={:.4} distortion={:.6} cost={:.6} groups={} group_pixels={} single_pixels={}",
            self.mode,
            self.lambda,
            self.rate,
            self.distortion,
            self.cost,
            self.groups.len(),
            self.group_pixels,
            self.single_pixels
        )
    }
}

/// Optimized coded depth of a scene and the per-group report.
pub fn run_optimize(scene: &Scene, base: &CameraConfig, opts: &RunOptions) -> Result<(Image<u8>, RunReport)> {
    let plan = plan_scene(scene, base, opts.sigma, opts.direction)?;
    run_plan(scene, &plan, opts)
}

pub fn run_plan(scene: &Scene, plan: &ScenePlan, opts: &RunOptions) -> Result<(Image<u8>, RunReport)> {
    let (solution, trace): (Solution, Vec<(f64, f64)>) = match opts.target {
        RateTarget::Lambda(l) => {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Error::Parse(format!("lambda must be finite and non-negative, got {l}")));
            }
            (solve(&plan.problem, l, opts.mode)?, Vec::new())
        }
        RateTarget::Budget(b) => {
            let out = bisect_lambda(&plan.problem, RateBudget(b), opts.mode, opts.bisection)?;
            (out.solution, out.trace)
        }
    };

    let mut coded = scene.coded();
    let mut rows = Vec::with_capacity(plan.sites.len());
    for (id, ((site, result), tables)) in plan
        .sites
        .iter()
        .zip(&solution.groups)
        .zip(&plan.problem.groups)
        .enumerate()
    {
        for ((&x, &dv), t) in site.xs.iter().zip(result.dv.as_slice()).zip(tables) {
            coded.set(x, site.y, u8::from(DepthLevel::new(i64::from(t.v + dv))?));
        }
        rows.push(GroupRow {
            id,
            y: site.y,
            target: site.target,
            xs: site.xs.clone(),
            dv: result.dv.as_slice().to_vec(),
            rate: result.rate,
            distortion: result.distortion,
            true_cost: result.true_cost,
        });
    }
    for ((&(x, y), &(dv, _)), t) in plan.singles.iter().zip(&solution.singles).zip(&plan.problem.singles) {
        coded.set(x, y, u8::from(DepthLevel::new(i64::from(t.v + dv))?));
    }

    let report = RunReport {
        lambda: solution.lambda,
        mode: opts.mode,
        rate: solution.rate,
        distortion: solution.distortion,
        cost: solution.cost(),
        group_pixels: plan.sites.iter().map(|s| s.xs.len()).sum(),
        single_pixels: plan.singles.len(),
        groups: rows,
        trace,
    };
    Ok((coded, report))
}

/// Z-buffer rendering of a virtual view from the coded depth `levels`.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthesizedView {
    /// `width * N` by `height` samples on the virtual grid.
    pub image: Image<u8>,
    pub occupied: Image<bool>,
    pub winners: Image<Option<usize>>,
}

pub fn synthesize_view(
    texture: &Image<u8>,
    levels: &Image<u8>,
    cfg: &CameraConfig,
    direction: Direction,
) -> Result<SynthesizedView> {
    texture.same_dims(levels)?;
    let (w, h) = texture.dims();
    let zeros = vec![0i32; w];
    let rows = (0..h)
        .into_par_iter()
        .map(|y| {
            let depth: Vec<DepthLevel> = levels.row(y).iter().map(|&v| DepthLevel::from(v)).collect();
            synthesize_row(texture.row(y), &depth, &zeros, cfg, direction)
        })
        .collect::<Result<Vec<_>>>()?;
    let vw = w * cfg.precision() as usize;
    let mut image = Vec::with_capacity(vw * h);
    let mut occupied = Vec::with_capacity(vw * h);
    let mut winners = Vec::with_capacity(vw * h);
    for r in rows {
        image.extend(r.samples);
        occupied.extend(r.occupied);
        winners.extend(r.winners);
    }
    Ok(SynthesizedView {
        image: Image::from_vec(vw, h, image)?,
        occupied: Image::from_vec(vw, h, occupied)?,
        winners: Image::from_vec(vw, h, winners)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::presets;
    use crate::pipeline::scene::{gen_scene, SceneSpec};

    fn scene() -> Scene {
        gen_scene(&SceneSpec {
            width: 64,
            height: 12,
            noise_sigma: 1.5,
            ..SceneSpec::standard(2.0, 11)
        })
        .unwrap()
    }

    #[test]
    fn plan_covers_every_pixel_once() {
        let s = scene();
        let plan = plan_scene(&s, &presets::standard_camera(), 1.0, Direction::Right).unwrap();
        let mut seen = Image::filled(s.width(), s.height(), 0u8);
        for site in &plan.sites {
            for &x in &site.xs {
                seen.set(x, site.y, seen.get(x, site.y) + 1);
            }
        }
        for &(x, y) in &plan.singles {
            seen.set(x, y, seen.get(x, y) + 1);
        }
        assert!(seen.data().iter().all(|&c| c == 1));
        assert!(!plan.sites.is_empty());
    }

    #[test]
    fn optimized_view_matches_initial_view() {
        let s = scene();
        let base = presets::standard_camera();
        let cfg = s.camera(&base).unwrap();
        let (coded, report) = run_optimize(&s, &base, &RunOptions::default()).unwrap();
        assert_eq!(report.group_pixels + report.single_pixels, s.width() * s.height());
        let a = synthesize_view(&s.texture, &s.coded(), &cfg, Direction::Right).unwrap();
        let b = synthesize_view(&s.texture, &coded, &cfg, Direction::Right).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn budget_run_meets_budget() {
        let s = scene();
        let base = presets::standard_camera();
        let plan = plan_scene(&s, &base, 1.0, Direction::Right).unwrap();
        let budget = 0.5 * (plan.problem.min_rate() + plan.problem.max_rate());
        let opts = RunOptions {
            target: RateTarget::Budget(budget),
            ..RunOptions::default()
        };
        let (_, report) = run_plan(&s, &plan, &opts).unwrap();
        assert!(report.rate <= budget);
        assert!(!report.trace.is_empty());
    }

    #[test]
    fn negative_lambda_rejected() {
        let opts = RunOptions {
            target: RateTarget::Lambda(-1.0),
            ..RunOptions::default()
        };
        assert!(run_optimize(&scene(), &presets::standard_camera(), &opts).is_err());
    }
}
