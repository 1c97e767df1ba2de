use std::fs;
use std::path::Path;

use pistonbeam::cli::main_with_args;
use pistonbeam::manifest::RunManifest;

fn run(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("pistonbeam").chain(args.iter().copied()))
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

fn first_line(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn simulate_writes_trajectory_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    let code = run(&["simulate", "--set", "n_cells=20", "--set", "simulate.t_end=0.05", "--out", &out]);
    assert_eq!(code, 0);
    assert_eq!(first_line(&dir.path().join("trajectory.csv")), "t,E,E_nl,Pi_B,u_mid,residual");
    let rows = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 51);
    // every field carries 17 significant digits
    let fields: Vec<&str> = rows.lines().nth(7).unwrap().split(',').collect();
    assert_eq!(fields.len(), 6);
    for f in fields {
        let mantissa = f.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.replace('.', "").len(), 17, "{f}");
    }

    let manifest = fs::read_to_string(dir.path().join("manifest.toml")).unwrap();
    let m = RunManifest::parse_str(&manifest, &[]).unwrap();
    assert_eq!(m.settings.beam.n_cells, 20);
    let report = fs::read_to_string(dir.path().join("report.toml")).unwrap();
    assert!(report.contains(&m.checksum));
    assert!(report.contains("status = \"completed\""));
}

#[test]
fn identical_manifests_give_identical_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["--set", "n_cells=16", "--set", "simulate.t_end=0.1", "--set", "U=300", "--set", "lambda=1", "--set", "b0=1"];
    for d in [&a, &b] {
        let out = out_arg(d.path());
        let mut v = vec!["simulate"];
        v.extend(args);
        v.extend(["--out", &out]);
        assert_eq!(run(&v), 0);
    }
    let x = fs::read(a.path().join("trajectory.csv")).unwrap();
    let y = fs::read(b.path().join("trajectory.csv")).unwrap();
    assert_eq!(x, y);
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[beam]\nn_cells = 16\nk = 2.0\n\n[simulate]\nt_end = 0.02\n").unwrap();
    let out = dir.path().join("out");
    let code = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "beam.k=3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let m = RunManifest::parse_str(&fs::read_to_string(out.join("manifest.toml")).unwrap(), &[]).unwrap();
    assert_eq!(m.settings.beam.k, 3.0);
    assert_eq!(m.settings.simulate.t_end, 0.02);
}

#[test]
fn usage_and_config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    assert_eq!(run(&["simulate", "--set", "b0=-1", "--out", &out]), 1);
    assert_eq!(run(&["simulate", "--set", "nonsense=1", "--out", &out]), 1);
    assert_eq!(run(&["simulate", "--config", "/no/such/file.toml", "--out", &out]), 1);
    assert_eq!(run(&["frobnicate", "--out", &out]), 1);
    assert_eq!(run(&["simulate"]), 1);
    // a bracket whose lower end already grows
    assert_eq!(
        run(&["ucrit", "--set", "n_cells=16", "--set", "U_lo=2000", "--set", "U_hi=3000", "--set", "ucrit.horizon=0.2", "--out", &out]),
        1
    );
}

#[test]
fn numerical_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    // steps may not shrink below dt_min, which is set above what the run needs
    let code = run(&[
        "simulate",
        "--set",
        "n_cells=40",
        "--set",
        "dt_min=1e-3",
        "--set",
        "dt_init=1e-3",
        "--set",
        "integrator.rtol=1e-12",
        "--set",
        "integrator.atol=1e-14",
        "--out",
        &out,
    ]);
    assert_eq!(code, 2);
}

#[test]
fn diverged_runs_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    let code = run(&[
        "simulate",
        "--set",
        "n_cells=20",
        "--set",
        "U=3000",
        "--set",
        "overflow_guard=1e6",
        "--set",
        "simulate.t_end=2",
        "--out",
        &out,
    ]);
    assert_eq!(code, 0);
    let report = fs::read_to_string(dir.path().join("report.toml")).unwrap();
    assert!(report.contains("status = \"diverged\""), "{report}");
}

#[test]
fn steady_and_sweep_headers() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("steady");
    let code = run(&[
        "steady",
        "--set",
        "n_cells=20",
        "--set",
        "lambda=1",
        "--set",
        "b=60",
        "--set",
        "b0=1",
        "--set",
        "confirm=false",
        "--out",
        s.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(first_line(&s.join("steady.csv")), "x,u_star");
    assert_eq!(fs::read_to_string(s.join("steady.csv")).unwrap().lines().count(), 22);

    let w = dir.path().join("sweep");
    let code = run(&[
        "sweep",
        "--set",
        "n_cells=16",
        "--set",
        "axis=k",
        "--set",
        "values=[0.0, 1.0, 4.0]",
        "--set",
        "sweep.horizon=0.05",
        "--set",
        "trace=true",
        "--out",
        w.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(w.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "axis_value,final_E,sigma,classification,cycle_amplitude,cycle_period");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("4.0000000000000000e0,"));
    assert!(w.join("trace_2.dat").exists());
}

#[test]
fn verify_passes_on_a_clean_build() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["verify", "--out", &out_arg(dir.path())]), 0);
    let report = fs::read_to_string(dir.path().join("report.toml")).unwrap();
    assert!(report.contains("passed = true"));
}
