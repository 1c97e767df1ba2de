//! One-parameter sweeps: an independent run per value, run in parallel,
//! rows kept in input order.

use rayon::prelude::*;

use super::cycle::{detect_limit_cycle_with, LimitCycleOptions, LimitCycleReport};
use crate::config::BeamConfig;
use crate::diagnostics::{fit_growth_rate_with_band, GrowthEstimate, SIGMA_NEUTRAL_BAND};
use crate::error::{Error, Result};
use crate::integrator::{integrate, IntegratorConfig, RunStatus};
use crate::model::Beam;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    Velocity,
    K,
    B,
    B0,
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::Velocity => "U",
            SweepAxis::K => "k",
            SweepAxis::B => "b",
            SweepAxis::B0 => "b0",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "U" => Some(SweepAxis::Velocity),
            "k" => Some(SweepAxis::K),
            "b" => Some(SweepAxis::B),
            "b0" => Some(SweepAxis::B0),
            _ => None,
        }
    }

    pub fn apply(&self, cfg: &BeamConfig, value: f64) -> BeamConfig {
        let mut c = cfg.clone();
        match self {
            SweepAxis::Velocity => c.velocity = value,
            SweepAxis::K => c.k = value,
            SweepAxis::B => c.b = value,
            SweepAxis::B0 => c.b0 = value,
        }
        c
    }
}

/// Which summaries to compute per row. Final energy and growth rate are
/// always reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepOutputs {
    pub cycle: bool,
    /// Keep the `(t, u_mid)` trace of every row.
    pub trace: bool,
}

impl Default for SweepOutputs {
    fn default() -> Self {
        SweepOutputs {
            cycle: true,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub horizon: f64,
    /// Growth-rate fit window (trailing fraction).
    pub window: f64,
    pub band: f64,
    pub cycle: LimitCycleOptions,
    pub outputs: SweepOutputs,
    pub integrator: IntegratorConfig,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            horizon: 2.0,
            window: 0.5,
            band: SIGMA_NEUTRAL_BAND,
            cycle: LimitCycleOptions::default(),
            outputs: SweepOutputs::default(),
            integrator: IntegratorConfig::default().with_tolerances(1e-6, 1e-8),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowSummary {
    pub status: RunStatus,
    /// Linear energy at the last sample.
    pub final_e: f64,
    pub max_e_nl: f64,
    pub growth: GrowthEstimate,
    pub cycle: Option<LimitCycleReport>,
    pub trace: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    /// Failures are kept in the row; the sweep itself carries on.
    pub outcome: std::result::Result<RowSummary, Error>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
}

fn run_row(beam: &Beam, axis: SweepAxis, value: f64, opts: &SweepOptions) -> Result<RowSummary> {
    let beam = beam.with_config(axis.apply(&beam.config, value))?;
    let traj = integrate(&beam.initial_state()?, opts.horizon, &beam, &opts.integrator)?;
    let growth = fit_growth_rate_with_band(&traj, opts.window, opts.band);
    let cycle = opts
        .outputs
        .cycle
        .then(|| detect_limit_cycle_with(&traj, &opts.cycle));
    let trace = opts
        .outputs
        .trace
        .then(|| traj.energies().map(|r| (r.t, r.u_mid)).collect());
    Ok(RowSummary {
        status: traj.status,
        final_e: traj.last().energy.e,
        max_e_nl: traj.max_e_nl(),
        growth,
        cycle,
        trace,
    })
}

/// Run `beam` once per entry of `values`, with `axis` set to that entry.
/// Sweeping `b` or `b0` on the linear model is rejected because the values
/// would have no effect.
pub fn run_sweep(beam: &Beam, axis: SweepAxis, values: &[f64], opts: &SweepOptions) -> Result<SweepTable> {
    if matches!(axis, SweepAxis::B | SweepAxis::B0) && !beam.config.berger {
        return Err(Error::param("axis", format!("`{}` only acts with lambda = 1", axis.as_str())));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::param("values", format!("non-finite entry {v}")));
    }
    if !(opts.horizon > 0.0 && opts.horizon.is_finite()) {
        return Err(Error::param("horizon", "must be positive"));
    }
    opts.integrator.validate()?;
    let rows = values
        .par_iter()
        .map(|&v| SweepRow {
            axis_value: v,
            outcome: run_row(beam, axis, v, opts),
        })
        .collect();
    Ok(SweepTable { axis, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_values_give_empty_table() {
        let beam = Beam::new(BeamConfig::linear(1.0, 0.0), 20).unwrap();
        let t = run_sweep(&beam, SweepAxis::K, &[], &SweepOptions::default()).unwrap();
        assert!(t.rows.is_empty());
    }

    #[test]
    fn rows_keep_input_order_and_errors() {
        let beam = Beam::new(BeamConfig::linear(0.0, 0.0), 16).unwrap();
        let opts = SweepOptions {
            horizon: 0.05,
            ..Default::default()
        };
        let t = run_sweep(&beam, SweepAxis::K, &[2.0, -1.0, 0.5], &opts).unwrap();
        let vals: Vec<f64> = t.rows.iter().map(|r| r.axis_value).collect();
        assert_eq!(vals, vec![2.0, -1.0, 0.5]);
        assert!(t.rows[0].outcome.is_ok() && t.rows[2].outcome.is_ok());
        assert!(matches!(t.rows[1].outcome, Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn b_axis_needs_berger() {
        let beam = Beam::new(BeamConfig::linear(0.0, 0.0), 16).unwrap();
        assert!(run_sweep(&beam, SweepAxis::B, &[1.0], &SweepOptions::default()).is_err());
    }
}
