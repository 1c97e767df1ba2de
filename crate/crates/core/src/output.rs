//! CSV tables and TOML reports.
//!
//! Numbers in CSV bodies are written with 17 significant digits (`{:.16e}`),
//! enough to round-trip every `f64`. Missing values are written as `nan`.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::experiments::{Probe, SweepTable};
use crate::integrator::Trajectory;
use crate::manifest::RunManifest;
use crate::mesh::Mesh;

pub const TRAJECTORY_HEADER: &str = "t,E,E_nl,Pi_B,u_mid,residual";
pub const STEADY_HEADER: &str = "x,u_star";
pub const SWEEP_HEADER: &str = "axis_value,final_E,sigma,classification,cycle_amplitude,cycle_period";
pub const PROBES_HEADER: &str = "U,sigma,r2,classification";

pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == 0.0 {
        // no negative zero
        format!("{:.16e}", 0.0)
    } else {
        format!("{x:.16e}")
    }
}

pub fn write_trajectory_csv<W: Write>(mut w: W, traj: &Trajectory) -> io::Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for r in traj.energies() {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            num(r.t),
            num(r.e),
            num(r.e_nl),
            num(r.pi_b),
            num(r.u_mid),
            num(r.identity_residual)
        )?;
    }
    Ok(())
}

/// The profile on the full grid, clamped end values included.
pub fn write_steady_csv<W: Write>(mut w: W, mesh: &Mesh, u_star: &[f64]) -> io::Result<()> {
    writeln!(w, "{STEADY_HEADER}")?;
    let n = mesh.n_cells();
    for i in 0..=n {
        let u = if i == 0 || i == n { 0.0 } else { u_star[i - 1] };
        writeln!(w, "{},{}", num(i as f64 * mesh.dx()), num(u))?;
    }
    Ok(())
}

/// One line per row. A row whose run failed has classification `error` and
/// `nan` in the numeric columns.
pub fn write_sweep_csv<W: Write>(mut w: W, table: &SweepTable) -> io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for row in &table.rows {
        match &row.outcome {
            Ok(s) => {
                let (amp, period) = s
                    .cycle
                    .as_ref()
                    .filter(|c| c.converged)
                    .map_or((f64::NAN, f64::NAN), |c| (c.amplitude, c.period.unwrap_or(f64::NAN)));
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    num(row.axis_value),
                    num(s.final_e),
                    num(s.growth.sigma),
                    s.growth.classification,
                    num(amp),
                    num(period)
                )?;
            }
            Err(_) => writeln!(w, "{},nan,nan,error,nan,nan", num(row.axis_value))?,
        }
    }
    Ok(())
}

pub fn write_probes_csv<W: Write>(mut w: W, probes: &[Probe]) -> io::Result<()> {
    writeln!(w, "{PROBES_HEADER}")?;
    for p in probes {
        writeln!(
            w,
            "{},{},{},{}",
            num(p.velocity),
            num(p.growth.sigma),
            num(p.growth.r2),
            p.growth.classification
        )?;
    }
    Ok(())
}

/// Two-column `t u_mid` data for gnuplot.
pub fn write_midpoint_dat<W: Write>(mut w: W, points: &[(f64, f64)]) -> io::Result<()> {
    writeln!(w, "# t u_mid")?;
    for (t, u) in points {
        writeln!(w, "{} {}", num(*t), num(*u))?;
    }
    Ok(())
}

/// Create `dir/name` and fill it through a buffered writer.
pub fn write_file<F>(dir: &Path, name: &str, fill: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>,
{
    let path = dir.join(name);
    let mut w = BufWriter::new(fs::File::create(&path).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))?);
    fill(&mut w)?;
    w.flush()?;
    Ok(())
}

/// `manifest.toml`, written next to every set of outputs.
pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<()> {
    write_file(dir, "manifest.toml", |w| w.write_all(manifest.emit().as_bytes()))
}

/// `report.toml`: the report under a `[report]` table, preceded by the
/// manifest checksum it belongs to.
pub fn write_report<R: Serialize>(dir: &Path, manifest: &RunManifest, report: &R) -> Result<()> {
    #[derive(Serialize)]
    struct Wrapped<'a, R> {
        tool_version: &'a str,
        manifest_checksum: &'a str,
        report: &'a R,
    }
    let text = toml::to_string(&Wrapped {
        tool_version: &manifest.tool_version,
        manifest_checksum: &manifest.checksum,
        report,
    })
    .map_err(|e| crate::Error::Io(format!("serializing report: {e}")))?;
    write_file(dir, "report.toml", |w| w.write_all(text.as_bytes()))
}
