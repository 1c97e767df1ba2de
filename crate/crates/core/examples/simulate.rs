//! Linear beam without damping at flow speeds below and above flutter
//! (about `U = 635` on the default grid).
//!
//! Writes `trajectory_U<speed>.csv` and `midpoint_U<speed>.dat` per run to
//! the directory given as the first argument (default
//! `target/example-out/simulate`).
//!
//! ```text
//! cargo run --release --example simulate [out_dir]
//! ```

use std::path::PathBuf;

use pistonbeam::output::{write_file, write_midpoint_dat, write_trajectory_csv};
use pistonbeam::diagnostics::fit_growth_rate_with_band;
use pistonbeam::{integrate, Beam, BeamConfig, IntegratorConfig, DEFAULT_CELLS};

fn main() -> pistonbeam::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| PathBuf::from("target/example-out/simulate"), PathBuf::from);
    std::fs::create_dir_all(&out)?;

    let ic = IntegratorConfig::default().with_tolerances(1e-6, 1e-8).with_sample_dt(1e-3);
    println!("{:>6} {:>12} {:>12} {:>9}  status", "U", "E(0)", "E(end)", "sigma");
    for velocity in [0.0, 300.0, 600.0, 650.0, 700.0] {
        let beam = Beam::new(BeamConfig::linear(0.0, velocity), DEFAULT_CELLS)?;
        let traj = integrate(&beam.initial_state()?, 5.0, &beam, &ic)?;
        // same fit as the flutter search: trailing half, neutral band 0.5
        let g = fit_growth_rate_with_band(&traj, 0.5, 0.5);
        println!(
            "{velocity:>6} {:>12.5} {:>12.5e} {:>9.3}  {}",
            traj.samples[0].energy.e,
            traj.last().energy.e,
            g.sigma,
            g.classification
        );

        let points: Vec<(f64, f64)> = traj.energies().map(|r| (r.t, r.u_mid)).collect();
        write_file(&out, &format!("trajectory_U{velocity}.csv"), |w| write_trajectory_csv(w, &traj))?;
        write_file(&out, &format!("midpoint_U{velocity}.dat"), |w| write_midpoint_dat(w, &points))?;
    }
    println!("wrote {}", out.display());
    Ok(())
}
