//! Implicit adaptive time stepping for the semi-discrete beam.
//!
//! Two second-order schemes share one Newton stage solver:
//!
//! * average acceleration (the trapezoidal rule on `(u, v)`), which
//!   preserves the discrete energy of the conservative linear beam exactly;
//! * variable-step BDF2, L-stable, for heavily damped or long runs. Its
//!   first step, which has no history, is taken with the trapezoidal rule.
//!
//! Local error is estimated by step doubling: one step of size `h` against
//! two of size `h/2`, `err = (y_half - y_full) / 3`. The two half steps are
//! kept. Step sizes follow a PI controller. Output samples land exactly on
//! multiples of `sample_dt` because steps are shortened to hit them.

mod stage;

pub use stage::NewtonStats;

use crate::diagnostics::{self, EnergyRecord};
use crate::error::{Error, Result};
use crate::model::{Beam, State};
use stage::{StageProblem, StageSolver};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Newmark with beta = 1/4, gamma = 1/2 (trapezoidal rule).
    AverageAcceleration,
    Bdf2,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::AverageAcceleration => "average-acceleration",
            Scheme::Bdf2 => "bdf2",
        }
    }

    pub fn parse(s: &str) -> Option<Scheme> {
        match s {
            "average-acceleration" | "trapezoidal" => Some(Scheme::AverageAcceleration),
            "bdf2" => Some(Scheme::Bdf2),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub rtol: f64,
    pub atol: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Newton stops once the update is below `newton_tol * |v|_inf + atol / 100`.
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    pub sample_dt: f64,
    /// A run whose linear energy exceeds this is stopped and marked diverged.
    pub overflow_guard: f64,
    /// Relative change in the axial factor below which a band factorization is reused.
    pub refactor_threshold: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            scheme: Scheme::AverageAcceleration,
            rtol: 1e-8,
            atol: 1e-10,
            dt_init: 1e-5,
            dt_min: 1e-12,
            dt_max: 1e-2,
            newton_tol: 1e-10,
            newton_max_iters: 25,
            sample_dt: 1e-3,
            overflow_guard: 1e30,
            refactor_threshold: 0.01,
        }
    }
}

impl IntegratorConfig {
    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn with_sample_dt(mut self, sample_dt: f64) -> Self {
        self.sample_dt = sample_dt;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(key, "must be positive and finite"))
            }
        };
        pos("rtol", self.rtol)?;
        pos("atol", self.atol)?;
        pos("dt_init", self.dt_init)?;
        pos("dt_min", self.dt_min)?;
        pos("dt_max", self.dt_max)?;
        pos("newton_tol", self.newton_tol)?;
        pos("sample_dt", self.sample_dt)?;
        pos("overflow_guard", self.overflow_guard)?;
        if !(self.refactor_threshold >= 0.0) {
            return Err(Error::param("refactor_threshold", "must be nonnegative"));
        }
        if self.newton_max_iters == 0 {
            return Err(Error::param("newton_max_iters", "must be at least 1"));
        }
        if self.dt_min > self.dt_init {
            return Err(Error::param("dt_init", "must be at least dt_min"));
        }
        if self.dt_init > self.dt_max {
            return Err(Error::param("dt_init", "must not exceed dt_max"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunStatus {
    Completed,
    /// Stopped at `t` because the energy passed the overflow guard or the
    /// state stopped being finite.
    Diverged { t: f64 },
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub newton_failures: usize,
    pub newton: NewtonStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub state: State,
    pub energy: EnergyRecord,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub status: RunStatus,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn is_diverged(&self) -> bool {
        matches!(self.status, RunStatus::Diverged { .. })
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.state.t).collect()
    }

    pub fn energies(&self) -> impl Iterator<Item = &EnergyRecord> {
        self.samples.iter().map(|s| &s.energy)
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least one sample")
    }

    /// Largest nonlinear energy over the samples.
    pub fn max_e_nl(&self) -> f64 {
        self.energies().map(|r| r.e_nl).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn u_mid(&self) -> Vec<f64> {
        self.energies().map(|r| r.u_mid).collect()
    }
}

// previous accepted point for BDF2
#[derive(Clone)]
struct History {
    u: Vec<f64>,
    v: Vec<f64>,
    h: f64,
}

/// Stateful stepper; holds the BDF2 history and the cached band factor.
pub struct Stepper<'a> {
    beam: &'a Beam,
    cfg: IntegratorConfig,
    solver: StageSolver,
    history: Option<History>,
}

impl<'a> Stepper<'a> {
    pub fn new(beam: &'a Beam, cfg: IntegratorConfig) -> Self {
        Stepper {
            beam,
            cfg,
            solver: StageSolver::new(beam),
            history: None,
        }
    }

    pub fn newton_stats(&self) -> NewtonStats {
        self.solver.stats
    }

    pub fn reset_history(&mut self) {
        self.history = None;
    }

    fn raw_step(&mut self, y: &State, h: f64, hist: Option<&History>) -> Result<State> {
        let n = y.u.len();
        let t1 = y.t + h;
        let (gamma, cu, cv) = match hist {
            Some(p) => {
                let w = h / p.h;
                let den = 1.0 + 2.0 * w;
                let c1 = (1.0 + w) * (1.0 + w) / den;
                let c2 = -w * w / den;
                let beta = (1.0 + w) / den;
                let cu: Vec<f64> = (0..n).map(|i| c1 * y.u[i] + c2 * p.u[i]).collect();
                let cv: Vec<f64> = (0..n).map(|i| c1 * y.v[i] + c2 * p.v[i]).collect();
                (beta * h, cu, cv)
            }
            None => {
                let a0 = self.beam.accel(y.t, &y.u, &y.v);
                let half = 0.5 * h;
                let cu: Vec<f64> = (0..n).map(|i| y.u[i] + half * y.v[i]).collect();
                let cv: Vec<f64> = (0..n).map(|i| y.v[i] + half * a0[i]).collect();
                (half, cu, cv)
            }
        };
        let prob = StageProblem {
            t1,
            gamma,
            cu: &cu,
            cv: &cv,
        };
        let (u, v) = self.solver.solve(self.beam, &self.cfg, &prob, &y.v)?;
        Ok(State { t: t1, u, v })
    }

    /// One step of the configured scheme without error control.
    pub fn step(&mut self, y: &State, h: f64) -> Result<State> {
        if !(h > 0.0) {
            return Err(Error::param("dt", "must be positive"));
        }
        if !y.is_finite() {
            return Err(Error::NonFinite { t: y.t });
        }
        let hist = match self.cfg.scheme {
            Scheme::Bdf2 => self.history.clone(),
            Scheme::AverageAcceleration => None,
        };
        let next = self.raw_step(y, h, hist.as_ref())?;
        if self.cfg.scheme == Scheme::Bdf2 {
            self.history = Some(History {
                u: y.u.clone(),
                v: y.v.clone(),
                h,
            });
        }
        Ok(next)
    }

    /// Step-doubling attempt. Returns the two-half-step result and the
    /// weighted RMS norm of the error estimate.
    fn attempt(&mut self, y: &State, h: f64) -> Result<(State, State, f64)> {
        let hist = match self.cfg.scheme {
            Scheme::Bdf2 => self.history.clone(),
            Scheme::AverageAcceleration => None,
        };
        let full = self.raw_step(y, h, hist.as_ref())?;
        let mid = self.raw_step(y, 0.5 * h, hist.as_ref())?;
        let mid_hist = hist.as_ref().map(|_| History {
            u: y.u.clone(),
            v: y.v.clone(),
            h: 0.5 * h,
        });
        let end = self.raw_step(&mid, 0.5 * h, mid_hist.as_ref())?;

        let (rtol, atol) = (self.cfg.rtol, self.cfg.atol);
        let block = |y0: &[f64], y1: &[f64], y2: &[f64]| -> f64 {
            let scale = y0.iter().chain(y2).fold(0.0f64, |m, x| m.max(x.abs()));
            let w = atol + rtol * scale;
            y1.iter()
                .zip(y2)
                .map(|(a, b)| {
                    let e = (b - a) / 3.0 / w;
                    e * e
                })
                .sum::<f64>()
        };
        let acc = block(&y.u, &full.u, &end.u) + block(&y.v, &full.v, &end.v);
        let err = (acc / (2 * y.u.len()) as f64).sqrt();
        Ok((mid, end, err))
    }
}

/// One implicit step of size `dt` from `state`. For BDF2 there is no history
/// here, so the step is the trapezoidal start-up step.
pub fn step(state: &State, dt: f64, beam: &Beam, cfg: &IntegratorConfig) -> Result<State> {
    cfg.validate()?;
    Stepper::new(beam, cfg.clone()).step(state, dt)
}

const SAFETY: f64 = 0.9;
const MAX_GROWTH: f64 = 5.0;
const BDF2_MAX_RATIO: f64 = 2.0;
const MIN_SHRINK: f64 = 0.2;
const HOLD_BAND: f64 = 1.2;

/// Adaptive integration from `state0` to `t_end`, sampled every `sample_dt`
/// (plus `t_end` itself).
pub fn integrate(state0: &State, t_end: f64, beam: &Beam, cfg: &IntegratorConfig) -> Result<Trajectory> {
    let mut states = Vec::new();
    let (status, stats) = integrate_observed(state0, t_end, beam, cfg, |s| states.push(s.clone()))?;
    Ok(assemble(states, status, stats, beam))
}

/// Same stepping as [`integrate`], but each sample (the initial state
/// included) is handed to `observe` instead of being stored.
pub fn integrate_observed<F: FnMut(&State)>(
    state0: &State,
    t_end: f64,
    beam: &Beam,
    cfg: &IntegratorConfig,
    mut observe: F,
) -> Result<(RunStatus, StepStats)> {
    cfg.validate()?;
    if !(t_end > state0.t) {
        return Err(Error::param("t_end", "must exceed the initial time"));
    }
    if !state0.is_finite() {
        return Err(Error::NonFinite { t: state0.t });
    }
    let t0 = state0.t;
    let n_samples = ((t_end - t0) / cfg.sample_dt * (1.0 + 1e-12)).floor() as usize;
    let mut targets: Vec<f64> = (1..=n_samples).map(|j| t0 + j as f64 * cfg.sample_dt).collect();
    if targets.last().is_none_or(|&t| t_end - t > 1e-9 * cfg.sample_dt) {
        targets.push(t_end);
    } else if let Some(t) = targets.last_mut() {
        *t = t_end;
    }

    let mut stepper = Stepper::new(beam, cfg.clone());
    let mut stats = StepStats::default();
    observe(state0);
    let mut status = RunStatus::Completed;

    let mut y = state0.clone();
    let mut h = cfg.dt_init;
    let mut err_prev: Option<f64> = None;
    // last accepted step (BDF2 growth is limited relative to it)
    let mut h_hist: Option<f64> = None;
    let mut plan: Option<(f64, f64)> = None;

    'samples: for &target in &targets {
        while y.t < target {
            // rounding in the accumulated time can leave a sliver short of the target
            if target - y.t <= 1e-8 * h.min(cfg.dt_max) {
                y.t = target;
                break;
            }
            let mut h_try = h.min(cfg.dt_max);
            if cfg.scheme == Scheme::Bdf2 {
                if let Some(hh) = h_hist {
                    h_try = h_try.min(BDF2_MAX_RATIO * hh);
                }
            }
            // equal sub-steps across the sample interval, so the step
            // coefficient (and its factorization) repeats exactly
            let h_try = match plan {
                Some((tg, hs)) if tg == target && hs <= h_try * (1.0 + 1e-12) => hs,
                _ => {
                    let remaining = target - y.t;
                    let m = (remaining / h_try * (1.0 - 1e-12)).ceil().max(1.0);
                    let hs = remaining / m;
                    plan = Some((target, hs));
                    hs
                }
            };
            let hit = target - y.t <= h_try * (1.0 + 1e-9);

            match stepper.attempt(&y, h_try) {
                Ok((mid, mut end, err)) if err <= 1.0 && end.is_finite() => {
                    if hit {
                        end.t = target;
                    }
                    stats.accepted += 1;
                    if cfg.scheme == Scheme::Bdf2 {
                        stepper.history = Some(History {
                            u: mid.u,
                            v: mid.v,
                            h: 0.5 * h_try,
                        });
                        h_hist = Some(h_try);
                    }
                    let ep = err_prev.unwrap_or(err).max(1e-10);
                    let e = err.max(1e-10);
                    let mut fac = SAFETY * e.powf(-0.7 / 3.0) * ep.powf(0.4 / 3.0);
                    fac = fac.clamp(MIN_SHRINK, MAX_GROWTH);
                    // small growth is not worth new factorizations
                    if (1.0..=HOLD_BAND).contains(&fac) {
                        fac = 1.0;
                    }
                    if cfg.scheme == Scheme::Bdf2 {
                        fac = fac.min(BDF2_MAX_RATIO);
                    }
                    err_prev = Some(err);
                    // a step shortened to land on a sample does not shrink the controller's step
                    if fac != 1.0 {
                        h = h_try.max(h.min(cfg.dt_max)) * fac;
                        plan = None;
                    }
                    y = end;
                    let e_lin = diagnostics::linear_energy(&y.u, &y.v, beam);
                    if !(e_lin <= cfg.overflow_guard) {
                        status = RunStatus::Diverged { t: y.t };
                        observe(&y);
                        break 'samples;
                    }
                }
                Ok((_, end, err)) => {
                    stats.rejected += 1;
                    if !end.is_finite() || !err.is_finite() {
                        h = h_try * MIN_SHRINK;
                    } else {
                        h = h_try * (SAFETY * err.powf(-1.0 / 3.0)).max(MIN_SHRINK);
                    }
                    err_prev = None;
                    plan = None;
                }
                Err(Error::NewtonDiverged { .. }) | Err(Error::Singular { .. }) => {
                    stats.rejected += 1;
                    stats.newton_failures += 1;
                    h = 0.5 * h_try;
                    err_prev = None;
                    plan = None;
                }
                Err(e) => return Err(e),
            }
            if h < cfg.dt_min {
                return Err(Error::StepUnderflow {
                    t: y.t,
                    dt: h,
                    dt_min: cfg.dt_min,
                });
            }
        }
        observe(&y);
    }
    stats.newton = stepper.newton_stats();
    Ok((status, stats))
}

fn assemble(states: Vec<State>, status: RunStatus, stats: StepStats, beam: &Beam) -> Trajectory {
    let mut records: Vec<EnergyRecord> = states.iter().map(|s| diagnostics::energies(s, beam)).collect();
    let e_nl: Vec<f64> = records.iter().map(|r| r.e_nl).collect();
    let res = diagnostics::residual_all(&states, &e_nl, beam);
    for (r, x) in records.iter_mut().zip(res) {
        r.identity_residual = x;
    }
    Trajectory {
        samples: states
            .into_iter()
            .zip(records)
            .map(|(state, energy)| Sample { state, energy })
            .collect(),
        status,
        stats,
    }
}
