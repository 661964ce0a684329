use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use depthopt_core::allowable::allowable_table;
use depthopt_core::optimizer::{sweep_lambda, BisectionOptions, Mode};
use depthopt_core::pipeline::config::read_config;
use depthopt_core::pipeline::pgm::{read_pgm, write_pgm};
use depthopt_core::pipeline::report;
use depthopt_core::pipeline::run::{plan_scene, run_plan, synthesize_view, RateTarget, RunOptions};
use depthopt_core::pipeline::scene::{gen_scene, Scene, SceneSpec, DEFAULT_SEED};
use depthopt_core::pipeline::{bd_rate, presets};
use depthopt_core::{CameraConfig, Direction, Error, Result};

const SCENE_META: &str = "scene.txt";

#[derive(Parser)]
#[command(name = "depthopt", version, about = "Depth-map coding optimization under view-synthesis occlusion")]
struct Cli {
    /// Camera configuration file; defaults to the built-in half-pel camera.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Allowable depth-change interval of every level as CSV (v,lo,hi).
    Ranges {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes a seeded synthetic scene as PGM files.
    Gen {
        #[arg(long, default_value_t = 160)]
        width: usize,
        #[arg(long, default_value_t = 48)]
        height: usize,
        #[arg(long, default_value_t = 1.0)]
        baseline_scale: f64,
        #[arg(long, default_value_t = 80)]
        fg: u8,
        #[arg(long, default_value_t = 40)]
        bg: u8,
        /// Std of the simulated coding noise in depth levels.
        #[arg(long, default_value_t = 0.5)]
        noise_sigma: f64,
        #[arg(long, default_value_t = 2)]
        objects: usize,
        /// RNG seed.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Optimizes the coded depth of a scene; per-group rows go to CSV.
    Optimize {
        #[command(flatten)]
        scene: SceneArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, conflicts_with = "rate_budget")]
        lambda: Option<f64>,
        /// Total bits allowed; lambda is found by bisection.
        #[arg(long)]
        rate_budget: Option<f64>,
        #[arg(long, default_value = "dp")]
        mode: Mode,
        /// Adjusted coded depth as PGM.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Group CSV; stdout when omitted.
        #[arg(long)]
        groups: Option<PathBuf>,
        /// Per-state tables of every group member as CSV.
        #[arg(long)]
        dump_tables: Option<PathBuf>,
    },
    /// Total rate and distortion over a list of lambdas.
    Sweep {
        #[command(flatten)]
        scene: SceneArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.3,1,3,10")]
        lambdas: Vec<f64>,
        #[arg(long, default_value = "dp")]
        mode: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Renders the virtual view of a coded depth map.
    Synthesize {
        #[command(flatten)]
        scene: SceneArgs,
        /// Coded depth to render instead of the scene's own.
        #[arg(long)]
        levels: Option<PathBuf>,
        #[arg(long, default_value = "+1", allow_hyphen_values = true)]
        direction: Direction,
        #[arg(long)]
        out: PathBuf,
        /// Winner map as CSV.
        #[arg(long)]
        winners: Option<PathBuf>,
    },
    /// Bjøntegaard delta rate between two rate,quality CSV curves.
    Bdrate {
        #[arg(long)]
        anchor: PathBuf,
        #[arg(long)]
        test: PathBuf,
    },
}

#[derive(Args)]
struct SceneArgs {
    /// Directory written by `gen`; a standard scene is generated when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Overrides the scale stored with the scene.
    #[arg(long)]
    baseline_scale: Option<f64>,
    /// RNG seed of the generated scene.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct ModelArgs {
    /// Std of the coding-error model in depth levels; "inf" gives a uniform model.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value = "+1", allow_hyphen_values = true)]
    direction: Direction,
}

fn camera(path: Option<&Path>) -> Result<CameraConfig> {
    match path {
        Some(p) => read_config(p),
        None => Ok(presets::standard_camera()),
    }
}

fn read_scale(dir: &Path) -> Result<f64> {
    let path = dir.join(SCENE_META);
    if !path.exists() {
        return Ok(1.0);
    }
    let text = std::fs::read_to_string(path)?;
    for line in text.lines() {
        if let Some((k, v)) = line.split_once('=') {
            if k.trim() == "baseline_scale" {
                return v.trim().parse().map_err(|_| Error::Parse(format!("bad baseline_scale {v:?}")));
            }
        }
    }
    Ok(1.0)
}

fn load_scene(args: &SceneArgs) -> Result<Scene> {
    match &args.input {
        Some(dir) => {
            let scale = match args.baseline_scale {
                Some(s) => s,
                None => read_scale(dir)?,
            };
            Scene::from_coded(
                read_pgm(&dir.join("texture.pgm"))?,
                read_pgm(&dir.join("depth.pgm"))?,
                &read_pgm(&dir.join("coded.pgm"))?,
                scale,
            )
        }
        None => gen_scene(&SceneSpec::standard(args.baseline_scale.unwrap_or(1.0), args.seed)),
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn run(cli: Cli) -> Result<()> {
    let base = camera(cli.config.as_deref())?;
    match cli.command {
        Command::Ranges { out } => report::write_ranges(sink(out.as_deref())?, &allowable_table(&base)),
        Command::Gen {
            width,
            height,
            baseline_scale,
            fg,
            bg,
            noise_sigma,
            objects,
            seed,
            out_dir,
        } => {
            let scene = gen_scene(&SceneSpec {
                width,
                height,
                baseline_scale,
                fg_depth: fg,
                bg_depth: bg,
                noise_sigma,
                seed,
                objects,
            })?;
            std::fs::create_dir_all(&out_dir)?;
            write_pgm(&out_dir.join("texture.pgm"), &scene.texture)?;
            write_pgm(&out_dir.join("depth.pgm"), &scene.depth)?;
            write_pgm(&out_dir.join("coded.pgm"), &scene.coded())?;
            std::fs::write(
                out_dir.join(SCENE_META),
                format!("baseline_scale = {baseline_scale}\nseed = {seed}\n"),
            )?;
            Ok(())
        }
        Command::Optimize {
            scene,
            model,
            lambda,
            rate_budget,
            mode,
            out,
            groups,
            dump_tables,
        } => {
            let scene = load_scene(&scene)?;
            let target = match rate_budget {
                Some(b) => RateTarget::Budget(b),
                None => RateTarget::Lambda(lambda.unwrap_or(1.0)),
            };
            let opts = RunOptions {
                mode,
                target,
                sigma: model.sigma,
                direction: model.direction,
                bisection: BisectionOptions::default(),
            };
            let plan = plan_scene(&scene, &base, opts.sigma, opts.direction)?;
            if let Some(p) = &dump_tables {
                report::write_tables(BufWriter::new(File::create(p)?), &plan)?;
            }
            let (coded, rep) = run_plan(&scene, &plan, &opts)?;
            if let Some(p) = &out {
                write_pgm(p, &coded)?;
            }
            report::write_groups(sink(groups.as_deref())?, &rep.groups)?;
            eprintln!("{}", rep.summary());
            Ok(())
        }
        Command::Sweep {
            scene,
            model,
            lambdas,
            mode,
            out,
        } => {
            let scene = load_scene(&scene)?;
            let plan = plan_scene(&scene, &base, model.sigma, model.direction)?;
            let points = sweep_lambda(&plan.problem, &lambdas, mode)?;
            report::write_sweep(sink(out.as_deref())?, &points)
        }
        Command::Synthesize {
            scene,
            levels,
            direction,
            out,
            winners,
        } => {
            let scene = load_scene(&scene)?;
            let coded = match &levels {
                Some(p) => read_pgm(p)?,
                None => scene.coded(),
            };
            let view = synthesize_view(&scene.texture, &coded, &scene.camera(&base)?, direction)?;
            write_pgm(&out, &view.image)?;
            if let Some(p) = &winners {
                report::write_winners(BufWriter::new(File::create(p)?), &view)?;
            }
            Ok(())
        }
        Command::Bdrate { anchor, test } => {
            let a = report::read_rd_curve(File::open(anchor)?)?;
            let t = report::read_rd_curve(File::open(test)?)?;
            println!("{:.4}", bd_rate(&a, &t)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InfeasibleBudget { .. } => ExitCode::from(3),
                Error::Io(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
