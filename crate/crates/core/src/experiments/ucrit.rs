//! Critical flow velocity of the linear beam by bisection on `U`.

use crate::config::BeamConfig;
use crate::diagnostics::{fit_growth_rate_with_band, Classification, GrowthEstimate};
use crate::error::{Error, Result};
use crate::integrator::{integrate, IntegratorConfig};
use crate::model::Beam;

/// Settings for [`find_ucrit`].
#[derive(Debug, Clone, PartialEq)]
pub struct UcritOptions {
    pub u_lo: f64,
    pub u_hi: f64,
    /// Bisection stops once the bracket is at most this wide.
    pub tol_u: f64,
    /// Length of each probe run.
    pub horizon: f64,
    /// Trailing fraction of each probe fitted for the growth rate.
    pub window: f64,
    /// Neutral band used to classify probes. Wider than the diagnostics
    /// default because transient growth of the convective operator leaves
    /// fitted rates of a few tenths just below threshold.
    pub band: f64,
    pub integrator: IntegratorConfig,
}

impl Default for UcritOptions {
    fn default() -> Self {
        UcritOptions {
            u_lo: 500.0,
            u_hi: 800.0,
            tol_u: 2.0,
            horizon: 5.0,
            window: 0.5,
            band: 0.5,
            integrator: IntegratorConfig::default().with_tolerances(1e-6, 1e-8),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub velocity: f64,
    pub growth: GrowthEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalVelocityReport {
    pub u_crit: f64,
    /// Bracket before the first bisection and after each one.
    pub brackets: Vec<(f64, f64)>,
    /// Every probe in the order it was run.
    pub probes: Vec<Probe>,
    pub horizon: f64,
    pub window: f64,
    pub band: f64,
    pub rtol: f64,
    pub atol: f64,
}

/// Growth estimate of one run of the linear beam at flow speed `u`.
pub fn probe_velocity(beam: &Beam, u: f64, opts: &UcritOptions) -> Result<GrowthEstimate> {
    let cfg = BeamConfig {
        velocity: u,
        ..beam.config.clone()
    };
    let beam = beam.with_config(cfg)?;
    let traj = integrate(&beam.initial_state()?, opts.horizon, &beam, &opts.integrator)?;
    Ok(fit_growth_rate_with_band(&traj, opts.window, opts.band))
}

/// Bisect on `U` between `opts.u_lo` (not growing) and `opts.u_hi` (growing)
/// until the bracket is narrower than `opts.tol_u`. The flow speed in
/// `beam.config` is ignored.
pub fn find_ucrit(beam: &Beam, opts: &UcritOptions) -> Result<CriticalVelocityReport> {
    if beam.config.berger {
        return Err(Error::param("lambda", "critical-velocity search needs the linear model"));
    }
    validate(opts)?;
    let (mut lo, mut hi) = (opts.u_lo, opts.u_hi);
    let (g_lo, g_hi) = rayon::join(|| probe_velocity(beam, lo, opts), || probe_velocity(beam, hi, opts));
    let (g_lo, g_hi) = (g_lo?, g_hi?);
    let mut probes = vec![
        Probe { velocity: lo, growth: g_lo },
        Probe { velocity: hi, growth: g_hi },
    ];
    if g_lo.classification == Classification::Diverged {
        return Err(Error::DivergedProbe { u: lo });
    }
    if g_lo.classification.is_growing() {
        return Err(Error::InvalidBracket(format!(
            "U_lo = {lo} is already growing (sigma = {:.4})",
            g_lo.sigma
        )));
    }
    if !g_hi.classification.is_growing() {
        return Err(Error::InvalidBracket(format!(
            "U_hi = {hi} is not growing (sigma = {:.4})",
            g_hi.sigma
        )));
    }
    let mut brackets = vec![(lo, hi)];
    while hi - lo > opts.tol_u {
        let mid = 0.5 * (lo + hi);
        let g = probe_velocity(beam, mid, opts)?;
        probes.push(Probe { velocity: mid, growth: g });
        if g.classification.is_growing() {
            hi = mid;
        } else {
            lo = mid;
        }
        brackets.push((lo, hi));
    }
    Ok(CriticalVelocityReport {
        u_crit: 0.5 * (lo + hi),
        brackets,
        probes,
        horizon: opts.horizon,
        window: opts.window,
        band: opts.band,
        rtol: opts.integrator.rtol,
        atol: opts.integrator.atol,
    })
}

fn validate(opts: &UcritOptions) -> Result<()> {
    if !(opts.u_lo.is_finite() && opts.u_hi.is_finite() && opts.u_lo >= 0.0 && opts.u_lo < opts.u_hi) {
        return Err(Error::InvalidBracket(format!(
            "need 0 <= U_lo < U_hi, got [{}, {}]",
            opts.u_lo, opts.u_hi
        )));
    }
    if !(opts.tol_u > 0.0) {
        return Err(Error::param("tol_U", "must be positive"));
    }
    if !(opts.horizon > 0.0 && opts.horizon.is_finite()) {
        return Err(Error::param("horizon", "must be positive"));
    }
    if !(opts.window > 0.0 && opts.window <= 1.0) {
        return Err(Error::param("window", "must lie in (0, 1]"));
    }
    if !(opts.band >= 0.0) {
        return Err(Error::param("band", "must be nonnegative"));
    }
    opts.integrator.validate()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_berger_and_bad_brackets() {
        let beam = Beam::new(BeamConfig::berger(0.0, 0.0, 0.0, 1.0), 20).unwrap();
        assert!(matches!(
            find_ucrit(&beam, &UcritOptions::default()),
            Err(Error::InvalidParameter { .. })
        ));
        let beam = Beam::new(BeamConfig::linear(0.0, 0.0), 20).unwrap();
        let opts = UcritOptions {
            u_lo: 800.0,
            u_hi: 500.0,
            ..Default::default()
        };
        assert!(matches!(find_ucrit(&beam, &opts), Err(Error::InvalidBracket(_))));
    }
}
