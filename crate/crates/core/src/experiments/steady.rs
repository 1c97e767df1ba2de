//! Equilibria of the beam: Newton on the static residual, with optional
//! continuation in `b` or `U` and a time-domain stability check.

use crate::banded::{solve_rank_one, BandLu, BandMatrix};
use crate::config::BeamConfig;
use crate::diagnostics::linear_energy;
use crate::error::{Error, Result};
use crate::integrator::{integrate_observed, IntegratorConfig, RunStatus, Scheme};
use crate::model::{grad_norm_sq, Beam, State};

/// Parameter ramped by a continuation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContinuationParameter {
    B,
    Velocity,
}

impl ContinuationParameter {
    pub fn as_str(&self) -> &'static str {
        match self {
            ContinuationParameter::B => "b",
            ContinuationParameter::Velocity => "U",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "b" => Some(ContinuationParameter::B),
            "U" => Some(ContinuationParameter::Velocity),
            _ => None,
        }
    }

    fn get(&self, cfg: &BeamConfig) -> f64 {
        match self {
            ContinuationParameter::B => cfg.b,
            ContinuationParameter::Velocity => cfg.velocity,
        }
    }

    fn set(&self, cfg: &mut BeamConfig, value: f64) {
        match self {
            ContinuationParameter::B => cfg.b = value,
            ContinuationParameter::Velocity => cfg.velocity = value,
        }
    }
}

/// Ramp from `start` to the configured value in steps of `step`, halving the
/// step after a failed solve until it drops below `min_step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Continuation {
    pub parameter: ContinuationParameter,
    pub start: f64,
    pub step: f64,
    pub min_step: f64,
}

impl Continuation {
    /// Ramp `b` up from 0 in steps of 5.
    pub fn in_b() -> Self {
        Continuation {
            parameter: ContinuationParameter::B,
            start: 0.0,
            step: 5.0,
            min_step: 5.0 / 64.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyOptions {
    /// Target for `|G(u)|_h`.
    pub tol: f64,
    pub max_iters: usize,
    pub continuation: Option<Continuation>,
    /// Integrate from a perturbed equilibrium to tag its stability.
    pub confirm: bool,
    pub confirm_horizon: f64,
    pub perturbation: f64,
    pub integrator: IntegratorConfig,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        SteadyOptions {
            tol: 1e-10,
            max_iters: 50,
            continuation: None,
            confirm: true,
            confirm_horizon: 5.0,
            perturbation: 1e-3,
            integrator: IntegratorConfig::default()
                .with_scheme(Scheme::Bdf2)
                .with_tolerances(1e-4, 1e-6),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stability {
    /// The perturbation stayed within `STABLE_GROWTH` times its initial size.
    Stable,
    Unstable,
    /// The run from the perturbed state blew up.
    Diverged,
    Unchecked,
}

impl Stability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Diverged => "diverged",
            Stability::Unchecked => "unchecked",
        }
    }
}

/// Largest allowed growth of the perturbation for a `Stable` tag.
pub const STABLE_GROWTH: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateReport {
    pub u_star: Vec<f64>,
    /// Newton reached `tol`, or its update fell below `1e-9 |u|_inf`. In the
    /// second case `residual_norm` sits at the round-off floor of `D4 u`,
    /// roughly `1e-16 |u| / dx^4`.
    pub converged: bool,
    /// `|G(u*)|_h`.
    pub residual_norm: f64,
    /// `|G(u*)|_h / |D4 u*|_h`, a scale-free view of the same residual.
    pub relative_residual: f64,
    /// Newton iterations summed over all continuation steps.
    pub newton_iterations: usize,
    /// Linear energy `E(u*, 0)`.
    pub energy: f64,
    pub stability: Stability,
    /// Largest `max |u(t) - u*|` seen in the stability run, if one was made.
    pub max_deviation: Option<f64>,
    /// Parameter values at which a solve converged, in order.
    pub path: Vec<f64>,
}

/// `|G(u)|_h` for the beam's own parameters.
pub fn residual_norm(beam: &Beam, u: &[f64]) -> f64 {
    beam.ops.norm_sq(&beam.static_residual(u)).sqrt()
}

struct NewtonOutcome {
    u: Vec<f64>,
    converged: bool,
    iterations: usize,
}

/// Relative Newton update below which iteration stops.
const STALL_STEP: f64 = 1e-9;

fn newton(beam: &Beam, guess: &[f64], tol: f64, max_iters: usize) -> Result<NewtonOutcome> {
    let cfg = &beam.config;
    let lambda = cfg.lambda();
    let stiffness = BandMatrix::combine(&[
        (1.0, &beam.ops.d4),
        (cfg.mu * cfg.velocity, &beam.ops.d1),
    ]);
    let alpha = 2.0 * lambda * cfg.b0 * beam.mesh.dx();
    let mut u = guess.to_vec();
    let mut g = beam.static_residual(&u);
    let mut r = beam.ops.norm_sq(&g).sqrt();
    let mut a = BandMatrix::zeros(beam.dim(), 2, 2);
    let mut lu: Option<BandLu> = None;
    for iter in 0..max_iters {
        if !r.is_finite() {
            break;
        }
        if r <= tol {
            return Ok(NewtonOutcome {
                u,
                converged: true,
                iterations: iter,
            });
        }
        // (D4 + mu U D1 + lambda s D2 + alpha z z^T) delta = G
        let s = beam.axial_factor(&u);
        a.assign_combination(&[(1.0, &stiffness), (lambda * s, &beam.ops.d2)]);
        match lu.as_mut() {
            Some(f) => f.refactor(&a)?,
            None => lu = Some(BandLu::factor(&a)?),
        }
        let z = beam.ops.d2.mul_vec(&u);
        let delta = solve_rank_one(lu.as_ref().unwrap(), alpha, &z, &g)?;

        let step = delta.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let size = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if step <= STALL_STEP * size {
            // the update is at the level where G is dominated by round-off
            // in D4 u; take it and stop
            for (x, d) in u.iter_mut().zip(&delta) {
                *x += d;
            }
            let converged = residual_norm(beam, &u).is_finite();
            return Ok(NewtonOutcome {
                u,
                converged,
                iterations: iter + 1,
            });
        }

        // backtrack until the residual drops
        let mut t = 1.0;
        loop {
            let u_new: Vec<f64> = u.iter().zip(&delta).map(|(x, d)| x + t * d).collect();
            let g_new = beam.static_residual(&u_new);
            let r_new = beam.ops.norm_sq(&g_new).sqrt();
            if r_new < r || t < 1.0 / 64.0 {
                u = u_new;
                g = g_new;
                r = r_new;
                break;
            }
            t *= 0.5;
        }
    }
    Ok(NewtonOutcome {
        converged: r <= tol,
        u,
        iterations: max_iters,
    })
}

/// One-mode Rayleigh–Ritz amplitude along `phi` for the Berger balance
/// `(phi, D4 phi) = s g(phi)`, if the mode is buckled at all.
fn rayleigh_amplitude(beam: &Beam, phi: &[f64]) -> Option<f64> {
    let cfg = &beam.config;
    if !cfg.berger || cfg.b0 <= 0.0 {
        return None;
    }
    let g = grad_norm_sq(phi, &beam.mesh);
    if g <= 0.0 {
        return None;
    }
    let bend = 2.0 * linear_energy(phi, &vec![0.0; phi.len()], beam);
    let a2 = (cfg.b * g - bend) / (cfg.b0 * g * g);
    (a2 > 0.0).then(|| a2.sqrt())
}

fn is_trivial(u: &[f64]) -> bool {
    u.iter().all(|x| x.abs() <= 1e-9)
}

fn default_shape(beam: &Beam) -> Vec<f64> {
    let ell = beam.mesh.ell();
    beam.mesh.sample(|x| (std::f64::consts::PI * x / ell).sin().powi(2))
}

/// Newton from `guess`, reseeding a trivial answer with the Rayleigh
/// amplitude when the beam is past buckling along the seed shape.
fn solve_at(beam: &Beam, guess: &[f64], shape: &[f64], opts: &SteadyOptions) -> Result<NewtonOutcome> {
    let out = newton(beam, guess, opts.tol, opts.max_iters)?;
    if !out.converged || !is_trivial(&out.u) {
        return Ok(out);
    }
    let Some(a) = rayleigh_amplitude(beam, shape) else {
        return Ok(out);
    };
    let seed: Vec<f64> = shape.iter().map(|x| a * x).collect();
    match newton(beam, &seed, opts.tol, opts.max_iters) {
        Ok(alt) if alt.converged && !is_trivial(&alt.u) => Ok(NewtonOutcome {
            iterations: out.iterations + alt.iterations,
            ..alt
        }),
        _ => Ok(out),
    }
}

/// Find an equilibrium `G(u*) = 0` of `beam`, starting from `guess`.
pub fn solve_steady_state(beam: &Beam, guess: &[f64], opts: &SteadyOptions) -> Result<SteadyStateReport> {
    if guess.len() != beam.dim() {
        return Err(Error::param("guess", format!("expected {} values, got {}", beam.dim(), guess.len())));
    }
    if guess.iter().any(|x| !x.is_finite()) {
        return Err(Error::param("guess", "must be finite"));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    let shape = if is_trivial(guess) {
        default_shape(beam)
    } else {
        guess.to_vec()
    };

    let mut iterations = 0;
    let mut path = Vec::new();
    let final_out = match opts.continuation {
        None => {
            let out = solve_at(beam, guess, &shape, opts)?;
            if out.converged {
                path.push(f64::NAN);
            }
            out
        }
        Some(c) => {
            if !(c.step > 0.0 && c.min_step > 0.0 && c.start.is_finite()) {
                return Err(Error::param("continuation", "step sizes must be positive"));
            }
            let target = c.parameter.get(&beam.config);
            let dir = if target >= c.start { 1.0 } else { -1.0 };
            let mut value = c.start;
            let mut step = c.step;
            let mut u = guess.to_vec();
            let mut n_step = 0;
            loop {
                let mut cfg = beam.config.clone();
                c.parameter.set(&mut cfg, value);
                let stage = beam.with_config(cfg)?;
                let out = match solve_at(&stage, &u, &shape, opts) {
                    Ok(o) => o,
                    Err(Error::Singular { .. }) => {
                        return Err(Error::SingularAtStep { step: n_step, value })
                    }
                    Err(e) => return Err(e),
                };
                iterations += out.iterations;
                if out.converged {
                    u = out.u.clone();
                    path.push(value);
                    if value == target {
                        break out;
                    }
                    n_step += 1;
                    value = if dir * (target - (value + dir * step)) <= 0.0 {
                        target
                    } else {
                        value + dir * step
                    };
                } else {
                    let last = path.last().copied().unwrap_or(c.start);
                    step *= 0.5;
                    if step < c.min_step || path.is_empty() {
                        // report the last iterate as a non-converged answer
                        break NewtonOutcome {
                            iterations: 0,
                            ..out
                        };
                    }
                    value = last + dir * step;
                    if dir * (value - target) > 0.0 {
                        value = target;
                    }
                }
            }
        }
    };
    if opts.continuation.is_none() {
        iterations = final_out.iterations;
    }

    let u_star = final_out.u;
    let residual = residual_norm(beam, &u_star);
    let d4u = beam.ops.d4.mul_vec(&u_star);
    let scale = beam.ops.norm_sq(&d4u).sqrt();
    let relative = if scale > 0.0 { residual / scale } else { residual };
    let energy = linear_energy(&u_star, &vec![0.0; u_star.len()], beam);

    let (stability, max_deviation) = if opts.confirm && final_out.converged {
        let (s, d) = confirm_stability(beam, &u_star, opts)?;
        (s, Some(d))
    } else {
        (Stability::Unchecked, None)
    };

    Ok(SteadyStateReport {
        u_star,
        converged: final_out.converged,
        residual_norm: residual,
        relative_residual: relative,
        newton_iterations: iterations,
        energy,
        stability,
        max_deviation,
        path: path.into_iter().filter(|v| !v.is_nan()).collect(),
    })
}

/// Integrate from `u* + eps w` at rest, with `w` a fixed asymmetric shape of
/// unit max-norm, and watch how far the state wanders from `u*`.
pub fn confirm_stability(beam: &Beam, u_star: &[f64], opts: &SteadyOptions) -> Result<(Stability, f64)> {
    let ell = beam.mesh.ell();
    let w = beam.mesh.sample(|x| {
        let s = (std::f64::consts::PI * x / ell).sin();
        s * s * (0.5 + x / ell)
    });
    let wmax = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let eps = opts.perturbation;
    let u0: Vec<f64> = u_star.iter().zip(&w).map(|(a, b)| a + eps * b / wmax).collect();
    let state = State {
        t: 0.0,
        u: u0,
        v: vec![0.0; u_star.len()],
    };
    let mut dev = 0.0f64;
    let (status, _) = integrate_observed(&state, opts.confirm_horizon, beam, &opts.integrator, |s| {
        let d = s.u.iter().zip(u_star).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        dev = dev.max(d);
    })?;
    let tag = match status {
        RunStatus::Diverged { .. } => Stability::Diverged,
        RunStatus::Completed if dev <= STABLE_GROWTH * eps => Stability::Stable,
        RunStatus::Completed => Stability::Unstable,
    };
    Ok((tag, dev))
}
