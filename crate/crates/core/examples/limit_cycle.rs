//! Self-sustained oscillation at hypersonic flow speed.
//!
//! At `U = 5000` with moderate compression the beam settles onto a limit
//! cycle whose amplitude depends little on the damping. The second block
//! runs two strongly compressed, heavily damped configurations.
//!
//! ```text
//! cargo run --release --example limit_cycle [out_dir]
//! ```

use std::path::PathBuf;

use pistonbeam::experiments::cycle::detect_limit_cycle;
use pistonbeam::output::{write_file, write_midpoint_dat};
use pistonbeam::{integrate, Beam, BeamConfig, IntegratorConfig, Scheme, DEFAULT_CELLS};
use rayon::prelude::*;

struct Case {
    name: String,
    k: f64,
    b: f64,
    b0: f64,
}

fn main() -> pistonbeam::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| PathBuf::from("target/example-out/limit_cycle"), PathBuf::from);
    std::fs::create_dir_all(&out)?;

    let mut cases: Vec<Case> = Vec::new();
    for b in [20.0, 50.0] {
        for k in [1.0, 10.0, 20.0] {
            cases.push(Case { name: format!("b{b}_k{k}"), k, b, b0: 1.0 });
        }
    }
    cases.push(Case { name: "k101_b5000_b05000".into(), k: 101.0, b: 5000.0, b0: 5000.0 });
    cases.push(Case { name: "k100_b5000_b01000".into(), k: 100.0, b: 5000.0, b0: 1000.0 });

    let ic = IntegratorConfig::default()
        .with_scheme(Scheme::Bdf2)
        .with_tolerances(1e-4, 1e-6)
        .with_sample_dt(5e-4);
    let results: Vec<_> = cases
        .par_iter()
        .map(|c| -> pistonbeam::Result<_> {
            let beam = Beam::new(BeamConfig::berger(c.k, 5000.0, c.b, c.b0), DEFAULT_CELLS)?;
            let traj = integrate(&beam.initial_state()?, 10.0, &beam, &ic)?;
            let points: Vec<(f64, f64)> = traj.energies().map(|e| (e.t, e.u_mid)).collect();
            write_file(&out, &format!("midpoint_{}.dat", c.name), |w| write_midpoint_dat(w, &points))?;
            Ok(detect_limit_cycle(&traj, 0.5))
        })
        .collect();

    println!("{:>6} {:>6} {:>6} {:>10} {:>10} {:>9}", "k", "b", "b0", "amplitude", "period", "converged");
    for (c, r) in cases.iter().zip(results) {
        let r = r?;
        let period = r.period.map_or("-".to_string(), |p| format!("{p:.5}"));
        println!("{:>6} {:>6} {:>6} {:>10.4} {:>10} {:>9}", c.k, c.b, c.b0, r.amplitude, period, r.converged);
    }
    println!("wrote {}", out.display());
    Ok(())
}
