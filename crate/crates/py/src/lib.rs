//! Python module `depthopt`.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use depthopt_core::allowable;
use depthopt_core::cost::probability_table;
use depthopt_core::occlusion;
use depthopt_core::optimizer::{self, BisectionOptions};
use depthopt_core::pipeline::{self, config, run};
use depthopt_core::{AllowableInterval, DepthLevel, Direction, Error, Mode, Problem, ProbabilityTable, RateBudget};

pyo3::create_exception!(depthopt, InfeasibleBudget, PyValueError);

/// `(x, v, dv_k, lo, hi)`.
type Member = (usize, i32, i32, i32, i32);
/// `(id, y, target, xs, dv, rate, distortion, true_cost)`.
type GroupRow = (usize, usize, i64, Vec<usize>, Vec<i32>, f64, f64, f64);
type Rows<T> = Vec<Vec<T>>;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyIOError::new_err(io.to_string()),
        e @ Error::InfeasibleBudget { .. } => InfeasibleBudget::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn level(v: i64) -> PyResult<DepthLevel> {
    DepthLevel::new(v).map_err(py_err)
}

fn direction(d: i32) -> PyResult<Direction> {
    match d {
        1 => Ok(Direction::Right),
        -1 => Ok(Direction::Left),
        _ => Err(PyValueError::new_err(format!("direction must be +1 or -1, got {d}"))),
    }
}

fn mode(m: &str) -> PyResult<Mode> {
    m.parse().map_err(py_err)
}

fn bounds(iv: AllowableInterval) -> (i32, i32) {
    (iv.lo(), iv.hi())
}

#[pyclass(name = "CameraConfig", module = "depthopt", frozen)]
struct PyCameraConfig {
    inner: depthopt_core::CameraConfig,
}

#[pymethods]
impl PyCameraConfig {
    #[new]
    #[pyo3(signature = (focal_length, baseline, z_near, z_far, precision, rounding_offset=None))]
    fn new(
        focal_length: f64,
        baseline: f64,
        z_near: f64,
        z_far: f64,
        precision: u32,
        rounding_offset: Option<f64>,
    ) -> PyResult<Self> {
        depthopt_core::CameraConfig::new(focal_length, baseline, z_near, z_far, precision, rounding_offset)
            .map(|inner| PyCameraConfig { inner })
            .map_err(py_err)
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        config::parse_config(text).map(|inner| PyCameraConfig { inner }).map_err(py_err)
    }

    #[staticmethod]
    fn half_pel() -> Self {
        PyCameraConfig {
            inner: pipeline::presets::canonical_half_pel(),
        }
    }

    #[staticmethod]
    fn integer_pel() -> Self {
        PyCameraConfig {
            inner: pipeline::presets::canonical_integer_pel(),
        }
    }

    #[getter]
    fn precision(&self) -> u32 {
        self.inner.precision()
    }

    /// `(C1, C2)`.
    fn derived_constants(&self) -> (f64, f64) {
        self.inner.derived_constants()
    }

    fn disparity(&self, v: i64) -> PyResult<f64> {
        Ok(self.inner.disparity(level(v)?))
    }

    fn rounded_disparity(&self, v: i64) -> PyResult<f64> {
        Ok(self.inner.rounded_disparity(level(v)?).to_f64())
    }

    fn disparity_error(&self, v: i64, dv: i32) -> PyResult<f64> {
        self.inner.disparity_error(level(v)?, dv).map(|e| e.to_f64()).map_err(py_err)
    }

    fn with_baseline_scale(&self, scale: f64) -> PyResult<Self> {
        self.inner.with_baseline_scale(scale).map(|inner| PyCameraConfig { inner }).map_err(py_err)
    }

    fn to_text(&self) -> String {
        config::format_config(&self.inner)
    }
}

#[pyfunction]
fn zero_error_interval(v: i64, cfg: &PyCameraConfig) -> PyResult<(i32, i32)> {
    Ok(bounds(allowable::zero_error_interval(level(v)?, &cfg.inner)))
}

#[pyfunction]
fn shifted_interval(v: i64, dv_k: i32, cfg: &PyCameraConfig) -> PyResult<(i32, i32)> {
    allowable::shifted_interval(level(v)?, dv_k, &cfg.inner).map(bounds).map_err(py_err)
}

#[pyfunction]
fn exhaustive_interval(v: i64, dv_k: i32, cfg: &PyCameraConfig) -> PyResult<(i32, i32)> {
    allowable::exhaustive_interval(level(v)?, dv_k, &cfg.inner).map(bounds).map_err(py_err)
}

#[pyfunction]
fn allowable_table(cfg: &PyCameraConfig) -> Vec<(i32, i32)> {
    allowable::allowable_table(&cfg.inner).into_iter().map(bounds).collect()
}

/// Occlusion groups of one row as `(target, [(x, v, dv_k, lo, hi), ...])`,
/// members in group order with the winner last.
#[pyfunction]
#[pyo3(signature = (depth_row, errors, cfg, direction=1))]
fn extract_groups(
    depth_row: Vec<u8>,
    errors: Vec<i32>,
    cfg: &PyCameraConfig,
    direction: i32,
) -> PyResult<Vec<(i64, Vec<Member>)>> {
    let depth: Vec<DepthLevel> = depth_row.into_iter().map(DepthLevel::from).collect();
    let groups = occlusion::extract_groups(&depth, &errors, None, 0, &cfg.inner, self::direction(direction)?)
        .map_err(py_err)?;
    Ok(groups
        .iter()
        .map(|g| {
            let members = g
                .pixels()
                .iter()
                .map(|p| (p.x, p.v.value(), p.dv_k, p.candidates.lo(), p.candidates.hi()))
                .collect();
            (g.target(), members)
        })
        .collect())
}

#[pyclass(name = "PixelTables", module = "depthopt", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPixelTables {
    inner: depthopt_core::PixelTables,
}

#[pymethods]
impl PyPixelTables {
    /// Tables over `lo..=hi`. `sigma=None` gives uniform masses, otherwise
    /// a Gaussian centred at `dv_k`.
    #[new]
    #[pyo3(signature = (v, dv_k, lo, hi, distortion, rate, sigma=None))]
    fn new(
        v: i32,
        dv_k: i32,
        lo: i32,
        hi: i32,
        distortion: Vec<f64>,
        rate: Vec<f64>,
        sigma: Option<f64>,
    ) -> PyResult<Self> {
        let c = AllowableInterval::new(lo, hi).map_err(py_err)?;
        let prob = match sigma {
            None => ProbabilityTable::uniform(c),
            Some(s) => probability_table(c, s, dv_k).map_err(py_err)?,
        };
        depthopt_core::PixelTables::new(v, dv_k, c, prob, distortion, rate)
            .map(|inner| PyPixelTables { inner })
            .map_err(py_err)
    }

    #[getter]
    fn candidates(&self) -> (i32, i32) {
        bounds(self.inner.candidates)
    }

    #[getter]
    fn masses(&self) -> Vec<f64> {
        self.inner.prob.masses().to_vec()
    }
}

fn unwrap_group(group: &[PyRef<'_, PyPixelTables>]) -> Vec<depthopt_core::PixelTables> {
    group.iter().map(|t| t.inner.clone()).collect()
}

#[pyclass(name = "OptimizationResult", module = "depthopt", frozen, get_all)]
struct PyOptimizationResult {
    dv: Vec<i32>,
    recursion_cost: f64,
    true_cost: f64,
    rate: f64,
    distortion: f64,
}

impl From<depthopt_core::OptimizationResult> for PyOptimizationResult {
    fn from(r: depthopt_core::OptimizationResult) -> Self {
        PyOptimizationResult {
            dv: r.dv.into_inner(),
            recursion_cost: r.recursion_cost,
            true_cost: r.true_cost,
            rate: r.rate,
            distortion: r.distortion,
        }
    }
}

#[pymethods]
impl PyOptimizationResult {
    fn __repr__(&self) -> String {
        format!(
            "OptimizationResult(dv={:?}, true_cost={}, rate={}, distortion={})",
            self.dv, self.true_cost, self.rate, self.distortion
        )
    }
}

#[pyfunction]
#[pyo3(signature = (group, lam, mode="dp"))]
fn optimize_group(group: Vec<PyRef<'_, PyPixelTables>>, lam: f64, mode: &str) -> PyResult<PyOptimizationResult> {
    optimizer::optimize_group(&unwrap_group(&group), lam, self::mode(mode)?)
        .map(Into::into)
        .map_err(py_err)
}

#[pyfunction]
fn group_cost(group: Vec<PyRef<'_, PyPixelTables>>, dv: Vec<i32>, lam: f64) -> PyResult<f64> {
    let t = unwrap_group(&group);
    if dv.len() != t.len() || t.iter().zip(&dv).any(|(t, d)| !t.candidates.contains(*d)) {
        return Err(PyValueError::new_err("dv does not match the group candidates"));
    }
    Ok(depthopt_core::cost::group_cost(&t, &dv, lam))
}

/// Returns `(lambda, rate, distortion, group_dvs, single_dvs, trace)`.
#[pyfunction]
#[pyo3(signature = (groups, singles, budget, mode="dp"))]
#[allow(clippy::type_complexity)]
fn bisect_lambda(
    groups: Vec<Vec<PyRef<'_, PyPixelTables>>>,
    singles: Vec<PyRef<'_, PyPixelTables>>,
    budget: f64,
    mode: &str,
) -> PyResult<(f64, f64, f64, Vec<Vec<i32>>, Vec<i32>, Vec<(f64, f64)>)> {
    let problem = Problem {
        groups: groups.iter().map(|g| unwrap_group(g)).collect(),
        singles: unwrap_group(&singles),
    };
    let out = optimizer::bisect_lambda(&problem, RateBudget(budget), self::mode(mode)?, BisectionOptions::default())
        .map_err(py_err)?;
    let s = out.solution;
    Ok((
        out.lambda,
        s.rate,
        s.distortion,
        s.groups.into_iter().map(|g| g.dv.into_inner()).collect(),
        s.singles.into_iter().map(|p| p.0).collect(),
        out.trace,
    ))
}

#[pyclass(name = "Scene", module = "depthopt", frozen)]
struct PyScene {
    inner: pipeline::Scene,
}

fn rows<T: Clone>(img: &pipeline::Image<T>) -> Vec<Vec<T>> {
    img.rows().map(<[T]>::to_vec).collect()
}

#[pymethods]
impl PyScene {
    #[new]
    #[pyo3(signature = (texture, depth, errors, baseline_scale=1.0))]
    fn new(texture: Vec<Vec<u8>>, depth: Vec<Vec<u8>>, errors: Vec<Vec<i32>>, baseline_scale: f64) -> PyResult<Self> {
        let img = |r| pipeline::Image::from_rows(r).map_err(py_err);
        let errs = pipeline::Image::from_rows(errors).map_err(py_err)?;
        pipeline::Scene::new(img(texture)?, img(depth)?, errs, baseline_scale)
            .map(|inner| PyScene { inner })
            .map_err(py_err)
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    #[getter]
    fn texture(&self) -> Vec<Vec<u8>> {
        rows(&self.inner.texture)
    }

    #[getter]
    fn depth(&self) -> Vec<Vec<u8>> {
        rows(&self.inner.depth)
    }

    #[getter]
    fn errors(&self) -> Vec<Vec<i32>> {
        rows(&self.inner.errors)
    }

    #[getter]
    fn coded(&self) -> Vec<Vec<u8>> {
        rows(&self.inner.coded())
    }

    #[pyo3(signature = (cfg, direction=1))]
    fn occluded_fraction(&self, cfg: &PyCameraConfig, direction: i32) -> PyResult<f64> {
        pipeline::occluded_fraction(&self.inner, &cfg.inner, self::direction(direction)?).map_err(py_err)
    }
}

#[pyfunction]
#[pyo3(signature = (width=160, height=48, baseline_scale=1.0, fg_depth=80, bg_depth=40, noise_sigma=0.5, seed=pipeline::scene::DEFAULT_SEED, objects=2))]
#[allow(clippy::too_many_arguments)]
fn gen_scene(
    width: usize,
    height: usize,
    baseline_scale: f64,
    fg_depth: u8,
    bg_depth: u8,
    noise_sigma: f64,
    seed: u64,
    objects: usize,
) -> PyResult<PyScene> {
    pipeline::gen_scene(&pipeline::SceneSpec {
        width,
        height,
        baseline_scale,
        fg_depth,
        bg_depth,
        noise_sigma,
        seed,
        objects,
    })
    .map(|inner| PyScene { inner })
    .map_err(py_err)
}

/// Returns `(adjusted_depth_rows, summary)` where `summary` holds lambda,
/// rate, distortion, cost and the group rows.
#[pyfunction]
#[pyo3(signature = (scene, cfg, lam=None, budget=None, mode="dp", sigma=1.0, direction=1))]
#[allow(clippy::too_many_arguments)]
fn run_optimize<'py>(
    py: Python<'py>,
    scene: &PyScene,
    cfg: &PyCameraConfig,
    lam: Option<f64>,
    budget: Option<f64>,
    mode: &str,
    sigma: f64,
    direction: i32,
) -> PyResult<(Vec<Vec<u8>>, Bound<'py, pyo3::types::PyDict>)> {
    let target = match (lam, budget) {
        (Some(_), Some(_)) => return Err(PyValueError::new_err("give either lam or budget, not both")),
        (_, Some(b)) => run::RateTarget::Budget(b),
        (l, None) => run::RateTarget::Lambda(l.unwrap_or(1.0)),
    };
    let opts = run::RunOptions {
        mode: self::mode(mode)?,
        target,
        sigma,
        direction: self::direction(direction)?,
        bisection: BisectionOptions::default(),
    };
    let (coded, report) = py
        .detach(|| run::run_optimize(&scene.inner, &cfg.inner, &opts))
        .map_err(py_err)?;
    let summary = pyo3::types::PyDict::new(py);
    summary.set_item("lambda", report.lambda)?;
    summary.set_item("rate", report.rate)?;
    summary.set_item("distortion", report.distortion)?;
    summary.set_item("cost", report.cost)?;
    summary.set_item("group_pixels", report.group_pixels)?;
    summary.set_item("single_pixels", report.single_pixels)?;
    let groups: Vec<GroupRow> = report
        .groups
        .into_iter()
        .map(|g| (g.id, g.y, g.target, g.xs, g.dv, g.rate, g.distortion, g.true_cost))
        .collect();
    summary.set_item("groups", groups)?;
    Ok((rows(&coded), summary))
}

/// Virtual view rows rendered from the coded depth `levels`.
#[pyfunction]
#[pyo3(signature = (texture, levels, cfg, direction=1))]
fn synthesize_view(
    texture: Vec<Vec<u8>>,
    levels: Vec<Vec<u8>>,
    cfg: &PyCameraConfig,
    direction: i32,
) -> PyResult<(Rows<u8>, Rows<bool>)> {
    let t = pipeline::Image::from_rows(texture).map_err(py_err)?;
    let l = pipeline::Image::from_rows(levels).map_err(py_err)?;
    let view = run::synthesize_view(&t, &l, &cfg.inner, self::direction(direction)?).map_err(py_err)?;
    Ok((rows(&view.image), rows(&view.occupied)))
}

#[pyfunction]
fn psnr(a: Vec<Vec<u8>>, b: Vec<Vec<u8>>) -> PyResult<f64> {
    let a = pipeline::Image::from_rows(a).map_err(py_err)?;
    let b = pipeline::Image::from_rows(b).map_err(py_err)?;
    pipeline::psnr(&a, &b).map_err(py_err)
}

/// Curves are lists of `(rate, quality)`.
#[pyfunction]
fn bd_rate(anchor: Vec<(f64, f64)>, test: Vec<(f64, f64)>) -> PyResult<f64> {
    let pts = |c: Vec<(f64, f64)>| {
        c.into_iter()
            .map(|(rate, quality)| pipeline::RdPoint { rate, quality })
            .collect::<Vec<_>>()
    };
    pipeline::bd_rate(&pts(anchor), &pts(test)).map_err(py_err)
}

#[pymodule]
fn depthopt(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("InfeasibleBudget", m.py().get_type::<InfeasibleBudget>())?;
    m.add_class::<PyCameraConfig>()?;
    m.add_class::<PyPixelTables>()?;
    m.add_class::<PyOptimizationResult>()?;
    m.add_class::<PyScene>()?;
    m.add_function(wrap_pyfunction!(zero_error_interval, m)?)?;
    m.add_function(wrap_pyfunction!(shifted_interval, m)?)?;
    m.add_function(wrap_pyfunction!(exhaustive_interval, m)?)?;
    m.add_function(wrap_pyfunction!(allowable_table, m)?)?;
    m.add_function(wrap_pyfunction!(extract_groups, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_group, m)?)?;
    m.add_function(wrap_pyfunction!(group_cost, m)?)?;
    m.add_function(wrap_pyfunction!(bisect_lambda, m)?)?;
    m.add_function(wrap_pyfunction!(gen_scene, m)?)?;
    m.add_function(wrap_pyfunction!(run_optimize, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize_view, m)?)?;
    m.add_function(wrap_pyfunction!(psnr, m)?)?;
    m.add_function(wrap_pyfunction!(bd_rate, m)?)?;
    Ok(())
}
