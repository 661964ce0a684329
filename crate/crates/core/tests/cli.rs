use std::path::Path;
use std::process::{Command, Output};

use depthopt_core::pipeline::pgm::read_pgm;

fn depthopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_depthopt")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn ranges_dumps_every_level() {
    let out = depthopt(&["ranges"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 257);
    assert!(text.lines().any(|l| l == "10,-2,2"));
}

#[test]
fn ranges_with_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cam.cfg");
    std::fs::write(&cfg, "focal_length = 1\nbaseline = 1\nz_near = 1/26\nz_far = 2\nprecision_n = 1\nrounding_offset = 1/2\n").unwrap();
    let out = depthopt(&["--config", path(&cfg), "ranges"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "10,-9,0"));
    std::fs::write(&cfg, "focal_length = 1\n").unwrap();
    assert_eq!(depthopt(&["--config", path(&cfg), "ranges"]).status.code(), Some(2));
}

#[test]
fn gen_optimize_synthesize_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("scene");
    let out = depthopt(&["gen", "--width", "64", "--height", "8", "--baseline-scale", "2", "--noise-sigma", "1", "--seed", "5", "--out-dir", path(&scene)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let adjusted = dir.path().join("adjusted.pgm");
    let tables = dir.path().join("tables.csv");
    let out = depthopt(&["optimize", "--input", path(&scene), "--lambda", "1", "--mode", "dp", "--out", path(&adjusted), "--dump-tables", path(&tables)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("group,y,target,size,xs,dv,rate,distortion,true_cost"));
    assert!(csv.lines().count() > 1);
    assert!(String::from_utf8(out.stderr).unwrap().contains("lambda="));
    assert!(std::fs::read_to_string(&tables).unwrap().starts_with("pixel,x,y,v,dv,p,distortion,rate"));

    let initial_view = dir.path().join("initial.pgm");
    let adjusted_view = dir.path().join("view.pgm");
    assert!(depthopt(&["synthesize", "--input", path(&scene), "--out", path(&initial_view)]).status.success());
    let out = depthopt(&["synthesize", "--input", path(&scene), "--levels", path(&adjusted), "--out", path(&adjusted_view)]);
    assert!(out.status.success());
    let a = read_pgm(&initial_view).unwrap();
    assert_eq!(a.dims(), (128, 8));
    assert_eq!(a, read_pgm(&adjusted_view).unwrap());
}

#[test]
fn budget_flags() {
    assert_eq!(depthopt(&["optimize", "--lambda", "1", "--rate-budget", "10"]).status.code(), Some(2));
    let out = depthopt(&["optimize", "--rate-budget=-1"]);
    assert_eq!(out.status.code(), Some(3));
    let out = depthopt(&["optimize", "--rate-budget", "1e9", "--mode", "independent"]);
    assert!(out.status.success());
    assert_eq!(depthopt(&["optimize", "--mode", "greedy"]).status.code(), Some(2));
    assert_eq!(depthopt(&["optimize", "--sigma", "0"]).status.code(), Some(2));
}

#[test]
fn sweep_is_sorted_and_monotone() {
    let out = depthopt(&["sweep", "--lambdas", "10,0,1", "--seed", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.iter().map(|r| r[0]).collect::<Vec<_>>(), vec![0.0, 1.0, 10.0]);
    assert!(rows.windows(2).all(|w| w[1][1] <= w[0][1]));
}

#[test]
fn bdrate_between_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    std::fs::write(&a, "rate,quality\n1000,30\n2000,33\n4000,36\n8000,39\n").unwrap();
    std::fs::write(&b, "rate,quality\n900,30\n1800,33\n3600,36\n7200,39\n").unwrap();
    let out = depthopt(&["bdrate", "--anchor", path(&a), "--test", path(&b)]);
    assert!(out.status.success());
    let v: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!((v + 10.0).abs() < 1e-6);
    std::fs::write(&b, "rate,quality\n900,50\n1800,53\n").unwrap();
    assert_eq!(depthopt(&["bdrate", "--anchor", path(&a), "--test", path(&b)]).status.code(), Some(2));
}
