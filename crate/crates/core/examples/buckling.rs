//! Buckled equilibria of the Berger beam under axial compression.
//!
//! First the equilibrium at `U = 100, b = 50, b0 = 1` is found by Newton's
//! method with continuation in `b`, and checked against long transient
//! runs at several damping values. Then at `b = 100` two damping values
//! settle onto mirror-image equilibria.
//!
//! ```text
//! cargo run --release --example buckling [out_dir]
//! ```

use std::path::PathBuf;

use pistonbeam::experiments::{solve_steady_state, Continuation, SteadyOptions};
use pistonbeam::output::{write_file, write_midpoint_dat, write_steady_csv};
use pistonbeam::{integrate, Beam, BeamConfig, IntegratorConfig, Scheme, DEFAULT_CELLS};
use rayon::prelude::*;

fn main() -> pistonbeam::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| PathBuf::from("target/example-out/buckling"), PathBuf::from);
    std::fs::create_dir_all(&out)?;

    let base = BeamConfig::berger(1.0, 100.0, 50.0, 1.0);
    let beam = Beam::new(base.clone(), DEFAULT_CELLS)?;
    let opts = SteadyOptions {
        continuation: Some(Continuation::in_b()),
        ..Default::default()
    };
    let r = solve_steady_state(&beam, &vec![0.0; beam.dim()], &opts)?;
    println!(
        "equilibrium b=50: |G|_h = {:.2e} (relative {:.1e}), E = {:.5}, {} Newton steps, {}",
        r.residual_norm,
        r.relative_residual,
        r.energy,
        r.newton_iterations,
        r.stability.as_str()
    );
    write_file(&out, "steady_b50.csv", |w| write_steady_csv(w, &beam.mesh, &r.u_star))?;

    let ic = IntegratorConfig::default()
        .with_scheme(Scheme::Bdf2)
        .with_tolerances(1e-4, 1e-6)
        .with_sample_dt(0.01);
    let mid = beam.dim() / 2;

    // (k, final E, final u_mid, midpoint trace)
    type Settled = (f64, f64, f64, Vec<(f64, f64)>);
    let settle = |b: f64, k: f64| -> pistonbeam::Result<Settled> {
        let bk = Beam::new(BeamConfig { k, b, ..base.clone() }, DEFAULT_CELLS)?;
        let traj = integrate(&bk.initial_state()?, 30.0, &bk, &ic)?;
        let last = traj.last();
        let points = traj.energies().map(|e| (e.t, e.u_mid)).collect();
        Ok((k, last.energy.e, last.state.u[mid], points))
    };

    println!("\nb=50, transient runs to t=30:");
    let runs: Vec<_> = [1.0, 2.0, 5.0].par_iter().map(|&k| settle(50.0, k)).collect();
    for run in runs {
        let (k, e, u, _) = run?;
        println!("  k={k}: E = {e:.5}, u_mid = {u:+.5} (equilibrium {:+.5})", r.u_star[mid]);
    }

    println!("\nb=100, transient runs to t=30:");
    let runs: Vec<_> = [1.0, 2.0].par_iter().map(|&k| settle(100.0, k)).collect();
    for run in runs {
        let (k, e, u, points) = run?;
        println!("  k={k}: E = {e:.5}, u_mid = {u:+.5}");
        write_file(&out, &format!("midpoint_b100_k{k}.dat"), |w| write_midpoint_dat(w, &points))?;
    }
    println!("wrote {}", out.display());
    Ok(())
}
