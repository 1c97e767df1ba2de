//! Flutter speed of the linear beam by bisection, with and without
//! damping, and its sensitivity to the probe horizon.
//!
//! Each probe integrates to the horizon and fits a growth rate to the
//! trailing half of `log E`. A short horizon lets the transient growth of
//! the flow operator pass for instability, so the estimate drifts as the
//! horizon changes. Expect several minutes on one core.
//!
//! ```text
//! cargo run --release --example critical_velocity
//! ```

use pistonbeam::experiments::{find_ucrit, UcritOptions};
use pistonbeam::{Beam, BeamConfig, DEFAULT_CELLS};
use rayon::prelude::*;

fn main() -> pistonbeam::Result<()> {
    let jobs: Vec<(f64, f64)> = vec![(0.0, 2.0), (0.0, 3.0), (0.0, 5.0), (1.0, 5.0)];
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(k, horizon)| {
            let beam = Beam::new(BeamConfig::linear(k, 0.0), DEFAULT_CELLS)?;
            let opts = UcritOptions { horizon, ..Default::default() };
            find_ucrit(&beam, &opts).map(|r| (k, r))
        })
        .collect();

    println!("{:>4} {:>8} {:>10} {:>7}  final bracket", "k", "horizon", "U_crit", "probes");
    for r in results {
        let (k, r) = r?;
        let (lo, hi) = *r.brackets.last().unwrap();
        println!("{k:>4} {:>8} {:>10.3} {:>7}  [{lo:.2}, {hi:.2}]", r.horizon, r.u_crit, r.probes.len());
    }
    Ok(())
}
