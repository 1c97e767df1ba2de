//! Command-line front end: `pistonbeam <subcommand> [--config <path>]
//! [--set key=value ...] --out <dir>`.
//!
//! Every subcommand writes `manifest.toml` and `report.toml` into the output
//! directory, plus its own data files:
//!
//! | subcommand    | data files                               |
//! |---------------|------------------------------------------|
//! | `simulate`    | `trajectory.csv`, `midpoint.dat`         |
//! | `ucrit`       | `probes.csv`                             |
//! | `steady`      | `steady.csv`                             |
//! | `limit-cycle` | `trajectory.csv`, `midpoint.dat`         |
//! | `sweep`       | `sweep.csv`, `trace_<row>.dat` if traced |
//! | `verify`      | none                                     |

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::diagnostics::{fit_growth_rate, GrowthEstimate};
use crate::error::{Error, Result};
use crate::experiments::{
    detect_limit_cycle_series, find_ucrit, run_sweep, solve_steady_state, LimitCycleReport, SweepTable,
};
use crate::integrator::{integrate, RunStatus, StepStats, Trajectory};
use crate::manifest::RunManifest;
use crate::model::Beam;
use crate::output::{self, write_file};
use crate::verify;

#[derive(Debug, Parser)]
#[command(name = "pistonbeam", version, about = "Clamped Berger beam in supersonic flow")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML configuration; defaults apply to anything it leaves out.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one setting, as `table.key=value` or a bare `key=value`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one trajectory to `simulate.t_end`.
    Simulate(Common),
    /// Bisect for the critical flow speed of the linear beam.
    Ucrit(Common),
    /// Solve for an equilibrium and test its stability.
    Steady(Common),
    /// Integrate to `limit_cycle.t_end` and look for a periodic orbit.
    #[command(name = "limit-cycle")]
    LimitCycle(Common),
    /// Run one simulation per entry of `sweep.values`.
    Sweep(Common),
    /// Run the built-in consistency checks.
    Verify(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Simulate(c)
            | Command::Ucrit(c)
            | Command::Steady(c)
            | Command::LimitCycle(c)
            | Command::Sweep(c)
            | Command::Verify(c) => c,
        }
    }
}

/// What a finished command reports back to the process.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub summary: String,
    /// False only when `verify` found a failing check.
    pub success: bool,
}

#[derive(Serialize)]
struct Growth {
    sigma: f64,
    r2: f64,
    classification: String,
}

impl From<GrowthEstimate> for Growth {
    fn from(g: GrowthEstimate) -> Self {
        Growth {
            sigma: g.sigma,
            r2: g.r2,
            classification: g.classification.to_string(),
        }
    }
}

#[derive(Serialize)]
struct Run {
    status: &'static str,
    t_final: f64,
    accepted_steps: usize,
    rejected_steps: usize,
    newton_failures: usize,
}

impl Run {
    fn new(status: RunStatus, t_final: f64, stats: &StepStats) -> Self {
        Run {
            status: match status {
                RunStatus::Completed => "completed",
                RunStatus::Diverged { .. } => "diverged",
            },
            t_final,
            accepted_steps: stats.accepted,
            rejected_steps: stats.rejected,
            newton_failures: stats.newton_failures,
        }
    }

    fn of(traj: &Trajectory) -> Self {
        Run::new(traj.status, traj.last().state.t, &traj.stats)
    }
}

#[derive(Serialize)]
struct SimulateReport {
    run: Run,
    final_e: f64,
    final_e_nl: f64,
    max_e_nl: f64,
    max_abs_residual: f64,
    growth: Growth,
}

#[derive(Serialize)]
struct UcritReport {
    u_crit: f64,
    horizon: f64,
    window: f64,
    band: f64,
    rtol: f64,
    atol: f64,
    probes: usize,
    brackets: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct SteadyReport {
    converged: bool,
    residual_norm: f64,
    relative_residual: f64,
    newton_iterations: usize,
    energy: f64,
    u_mid: f64,
    max_abs_u: f64,
    stability: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_deviation: Option<f64>,
    continuation_path: Vec<f64>,
}

#[derive(Serialize)]
struct CycleReport {
    run: Run,
    converged: bool,
    inconclusive: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    period: Option<f64>,
    amplitude: f64,
    tail: [f64; 2],
    tail_peaks: usize,
    tail_troughs: usize,
}

impl CycleReport {
    fn new(run: Run, c: &LimitCycleReport) -> Self {
        CycleReport {
            run,
            converged: c.converged,
            inconclusive: c.inconclusive,
            period: c.period,
            amplitude: c.amplitude,
            tail: [c.tail.0, c.tail.1],
            tail_peaks: c.peaks.len(),
            tail_troughs: c.troughs.len(),
        }
    }
}

#[derive(Serialize)]
struct SweepFailure {
    axis_value: f64,
    error: String,
}

#[derive(Serialize)]
struct SweepReport {
    axis: &'static str,
    rows: usize,
    diverged: usize,
    failures: Vec<SweepFailure>,
}

impl SweepReport {
    fn new(t: &SweepTable) -> Self {
        SweepReport {
            axis: t.axis.as_str(),
            rows: t.rows.len(),
            diverged: t
                .rows
                .iter()
                .filter(|r| matches!(&r.outcome, Ok(s) if matches!(s.status, RunStatus::Diverged { .. })))
                .count(),
            failures: t
                .rows
                .iter()
                .filter_map(|r| {
                    r.outcome.as_ref().err().map(|e| SweepFailure {
                        axis_value: r.axis_value,
                        error: e.to_string(),
                    })
                })
                .collect(),
        }
    }
}

fn midpoint_trace(traj: &Trajectory) -> Vec<(f64, f64)> {
    traj.energies().map(|r| (r.t, r.u_mid)).collect()
}

fn write_trajectory(out: &Path, traj: &Trajectory) -> Result<()> {
    write_file(out, "trajectory.csv", |w| output::write_trajectory_csv(w, traj))?;
    write_file(out, "midpoint.dat", |w| output::write_midpoint_dat(w, &midpoint_trace(traj)))
}

/// Run one subcommand with a resolved manifest, writing into `out`.
pub fn run_command(command: &Command, manifest: &RunManifest, out: &Path) -> Result<Outcome> {
    std::fs::create_dir_all(out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
    output::write_manifest(out, manifest)?;
    let beam = Beam::new(manifest.beam_config()?, manifest.n_cells())?;

    match command {
        Command::Simulate(_) => {
            let t_end = manifest.settings.simulate.t_end;
            let traj = integrate(&beam.initial_state()?, t_end, &beam, &manifest.integrator()?)?;
            write_trajectory(out, &traj)?;
            let last = traj.last().energy;
            let report = SimulateReport {
                run: Run::of(&traj),
                final_e: last.e,
                final_e_nl: last.e_nl,
                max_e_nl: traj.max_e_nl(),
                max_abs_residual: traj.energies().map(|r| r.identity_residual.abs()).fold(0.0, f64::max),
                growth: fit_growth_rate(&traj, 0.5).into(),
            };
            output::write_report(out, manifest, &report)?;
            Ok(Outcome {
                summary: format!("{}: t = {}, E = {:.6e}", report.run.status, report.run.t_final, report.final_e),
                success: true,
            })
        }
        Command::Ucrit(_) => {
            let r = find_ucrit(&beam, &manifest.ucrit_options()?)?;
            write_file(out, "probes.csv", |w| output::write_probes_csv(w, &r.probes))?;
            let report = UcritReport {
                u_crit: r.u_crit,
                horizon: r.horizon,
                window: r.window,
                band: r.band,
                rtol: r.rtol,
                atol: r.atol,
                probes: r.probes.len(),
                brackets: r.brackets.iter().map(|&(a, b)| [a, b]).collect(),
            };
            output::write_report(out, manifest, &report)?;
            Ok(Outcome {
                summary: format!("U_crit = {:.3} ({} probes)", r.u_crit, r.probes.len()),
                success: true,
            })
        }
        Command::Steady(_) => {
            let opts = manifest.steady_options()?;
            let ell = beam.mesh.ell();
            let guess = match manifest.settings.steady.guess.as_str() {
                "sin2" => beam.mesh.sample(|x| (std::f64::consts::PI * x / ell).sin().powi(2)),
                _ => vec![0.0; beam.dim()],
            };
            let r = solve_steady_state(&beam, &guess, &opts)?;
            write_file(out, "steady.csv", |w| output::write_steady_csv(w, &beam.mesh, &r.u_star))?;
            let report = SteadyReport {
                converged: r.converged,
                residual_norm: r.residual_norm,
                relative_residual: r.relative_residual,
                newton_iterations: r.newton_iterations,
                energy: r.energy,
                u_mid: r.u_star[beam.mesh.mid_index()],
                max_abs_u: r.u_star.iter().fold(0.0, |m, x| f64::max(m, x.abs())),
                stability: r.stability.as_str(),
                max_deviation: r.max_deviation,
                continuation_path: r.path.clone(),
            };
            output::write_report(out, manifest, &report)?;
            Ok(Outcome {
                summary: format!(
                    "converged = {}, |G| = {:.3e}, E = {:.6}, {}",
                    r.converged,
                    r.residual_norm,
                    r.energy,
                    r.stability.as_str()
                ),
                success: true,
            })
        }
        Command::LimitCycle(_) => {
            let (opts, cfg) = manifest.limit_cycle_options()?;
            let t_end = manifest.settings.limit_cycle.t_end;
            let traj = integrate(&beam.initial_state()?, t_end, &beam, &cfg)?;
            write_trajectory(out, &traj)?;
            let c = detect_limit_cycle_series(&traj.times(), &traj.u_mid(), &opts);
            let report = CycleReport::new(Run::of(&traj), &c);
            output::write_report(out, manifest, &report)?;
            Ok(Outcome {
                summary: format!(
                    "converged = {}, amplitude = {:.4}, period = {}",
                    c.converged,
                    c.amplitude,
                    c.period.map_or("n/a".to_string(), |p| format!("{p:.5}"))
                ),
                success: true,
            })
        }
        Command::Sweep(_) => {
            let table = run_sweep(
                &beam,
                manifest.sweep_axis()?,
                &manifest.settings.sweep.values,
                &manifest.sweep_options()?,
            )?;
            write_file(out, "sweep.csv", |w| output::write_sweep_csv(w, &table))?;
            for (i, row) in table.rows.iter().enumerate() {
                if let Ok(s) = &row.outcome {
                    if let Some(trace) = &s.trace {
                        write_file(out, &format!("trace_{i}.dat"), |w| output::write_midpoint_dat(w, trace))?;
                    }
                }
            }
            let report = SweepReport::new(&table);
            output::write_report(out, manifest, &report)?;
            Ok(Outcome {
                summary: format!(
                    "{} rows over {}, {} diverged, {} failed",
                    report.rows,
                    report.axis,
                    report.diverged,
                    report.failures.len()
                ),
                success: true,
            })
        }
        Command::Verify(_) => {
            let report = verify::run_all()?;
            output::write_report(out, manifest, &report)?;
            let lines: Vec<String> = report
                .checks
                .iter()
                .map(|c| {
                    format!(
                        "{} {}: {:.3e} (limit {:.1e})",
                        if c.passed { "PASS" } else { "FAIL" },
                        c.name,
                        c.value,
                        c.threshold
                    )
                })
                .collect();
            Ok(Outcome {
                summary: lines.join("\n"),
                success: report.passed,
            })
        }
    }
}

/// Parse arguments, run, and return the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let common = cli.command.common();
    let result = RunManifest::load(common.config.as_deref(), &common.overrides)
        .and_then(|m| run_command(&cli.command, &m, &common.out));
    match result {
        Ok(o) => {
            println!("{}", o.summary);
            if o.success {
                0
            } else {
                2
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
