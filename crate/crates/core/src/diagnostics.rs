//! Energies, the discrete energy-identity residual, and exponential
//! growth-rate fits.
//!
//! Along solutions of the beam equation with time-independent load,
//!
//! ```text
//! d/dt E_nl = -k |u_t|^2 - mu U (u_x, u_t)
//! ```
//!
//! where `E_nl = E + Pi_B`. The discrete energies below are built from the
//! same operators as the right-hand side, so the identity holds exactly for
//! the semi-discrete system and any residual comes from time stepping and
//! sampling.

use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::model::{grad_norm_sq, Beam, State};

/// Half-width of the band around zero in which a fitted rate counts as neutral.
pub const SIGMA_NEUTRAL_BAND: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRecord {
    pub t: f64,
    /// Linear energy `(|u_xx|^2 + |u_t|^2) / 2`.
    pub e: f64,
    /// Nonlinear energy `E + Pi_B`.
    pub e_nl: f64,
    /// Potential `lambda ((b0/4)|u_x|^4 - (b/2)|u_x|^2) - (p, u)`.
    pub pi_b: f64,
    pub u_mid: f64,
    /// Energy-identity residual at this sample (filled in by the integrator).
    pub identity_residual: f64,
}

/// `(u, D4 u)_h`, the discrete `|u_xx|^2`.
///
/// Evaluated as the equivalent weighted sum of squared second differences
/// (ghost values reflected at the clamped ends, half weight on the boundary
/// nodes). Forming `D4 u` first loses about `1/dx^4` in relative precision
/// to cancellation.
pub fn curvature_norm_sq(u: &[f64], beam: &Beam) -> f64 {
    let n = u.len();
    if n == 0 {
        return 0.0;
    }
    let dx = beam.mesh.dx();
    let at = |j: isize| -> f64 {
        if j < 0 || j as usize >= n {
            0.0
        } else {
            u[j as usize]
        }
    };
    let ends = 0.5 * ((2.0 * u[0]).powi(2) + (2.0 * u[n - 1]).powi(2));
    let inner: f64 = (0..n as isize)
        .map(|j| {
            let d = at(j - 1) - 2.0 * at(j) + at(j + 1);
            d * d
        })
        .sum();
    (ends + inner) / (dx * dx * dx)
}

/// Linear energy of a state.
pub fn linear_energy(u: &[f64], v: &[f64], beam: &Beam) -> f64 {
    0.5 * (curvature_norm_sq(u, beam) + beam.ops.norm_sq(v))
}

pub fn potential(u: &[f64], beam: &Beam) -> f64 {
    let cfg = &beam.config;
    let mut pi = -beam.ops.inner(beam.load(), u);
    if cfg.berger {
        let g = grad_norm_sq(u, &beam.mesh);
        pi += 0.25 * cfg.b0 * g * g - 0.5 * cfg.b * g;
    }
    pi
}

pub fn energies(state: &State, beam: &Beam) -> EnergyRecord {
    let e = linear_energy(&state.u, &state.v, beam);
    let pi_b = potential(&state.u, beam);
    EnergyRecord {
        t: state.t,
        e,
        e_nl: e + pi_b,
        pi_b,
        u_mid: state.u[beam.mesh.mid_index()],
        identity_residual: 0.0,
    }
}

/// Instantaneous energy outflow `k |v|^2 + mu U (D1 u, v)_h`.
pub fn energy_outflow(state: &State, beam: &Beam) -> f64 {
    let cfg = &beam.config;
    let mut q = cfg.k * beam.ops.norm_sq(&state.v);
    let flow = cfg.mu * cfg.velocity;
    if flow != 0.0 {
        q += flow * beam.ops.inner(&beam.ops.d1.mul_vec(&state.u), &state.v);
    }
    q
}

/// Centered-difference residual of the energy identity at each interior
/// sample `j`:
///
/// ```text
/// r_j = (E_nl(t_{j+1}) - E_nl(t_{j-1})) / (t_{j+1} - t_{j-1}) + k|v_j|^2 + mu U (D1 u_j, v_j)
/// ```
pub fn energy_identity_residual(traj: &Trajectory, beam: &Beam) -> Result<Vec<f64>> {
    let s = &traj.samples;
    if s.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: s.len(),
        });
    }
    let t: Vec<f64> = s.iter().map(|x| x.state.t).collect();
    let e_nl: Vec<f64> = s.iter().map(|x| x.energy.e_nl).collect();
    let q: Vec<f64> = s.iter().map(|x| energy_outflow(&x.state, beam)).collect();
    identity_residual_series(&t, &e_nl, &q)
}

/// The centered residual from bare series of sample times, `E_nl` values and
/// outflows, for callers that stream samples rather than keep a trajectory.
pub fn identity_residual_series(t: &[f64], e_nl: &[f64], outflow: &[f64]) -> Result<Vec<f64>> {
    assert!(t.len() == e_nl.len() && t.len() == outflow.len());
    if t.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: t.len(),
        });
    }
    Ok((1..t.len() - 1)
        .map(|j| (e_nl[j + 1] - e_nl[j - 1]) / (t[j + 1] - t[j - 1]) + outflow[j])
        .collect())
}

/// Residual at every sample: centered in the interior, second-order
/// one-sided at the two ends. Empty input or a single sample gives zeros.
pub(crate) fn residual_all(states: &[State], e_nl: &[f64], beam: &Beam) -> Vec<f64> {
    let n = states.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let t: Vec<f64> = states.iter().map(|s| s.t).collect();
    (0..n)
        .map(|j| {
            let de = if j == 0 {
                one_sided(t[0], t[1], t[2], e_nl[0], e_nl[1], e_nl[2])
            } else if j == n - 1 {
                one_sided(t[n - 1], t[n - 2], t[n - 3], e_nl[n - 1], e_nl[n - 2], e_nl[n - 3])
            } else {
                (e_nl[j + 1] - e_nl[j - 1]) / (t[j + 1] - t[j - 1])
            };
            de + energy_outflow(&states[j], beam)
        })
        .collect()
}

// derivative at t0 of the quadratic through three distinct points
fn one_sided(t0: f64, t1: f64, t2: f64, e0: f64, e1: f64, e2: f64) -> f64 {
    let (h1, h2) = (t1 - t0, t2 - t0);
    let c1 = h2 / (h1 * (h2 - h1));
    let c2 = -h1 / (h2 * (h2 - h1));
    -(c1 + c2) * e0 + c1 * e1 + c2 * e2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Decaying,
    Neutral,
    Growing,
    Diverged,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Decaying => "decaying",
            Classification::Neutral => "neutral",
            Classification::Growing => "growing",
            Classification::Diverged => "diverged",
        }
    }

    pub fn is_growing(&self) -> bool {
        matches!(self, Classification::Growing | Classification::Diverged)
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthEstimate {
    /// Fitted exponential rate of `E(t)`.
    pub sigma: f64,
    pub r2: f64,
    pub classification: Classification,
}

impl GrowthEstimate {
    pub fn diverged() -> Self {
        GrowthEstimate {
            sigma: f64::INFINITY,
            r2: 0.0,
            classification: Classification::Diverged,
        }
    }

    /// Least-squares line through `log E` over the trailing `window` fraction
    /// of the time span.
    pub fn from_series(t: &[f64], e: &[f64], window: f64, band: f64) -> Self {
        assert_eq!(t.len(), e.len());
        let neutral = GrowthEstimate {
            sigma: 0.0,
            r2: 0.0,
            classification: Classification::Neutral,
        };
        if t.len() < 2 {
            return neutral;
        }
        let window = window.clamp(f64::MIN_POSITIVE, 1.0);
        let (t0, t1) = (t[0], t[t.len() - 1]);
        let start = t1 - window * (t1 - t0);
        let pts: Vec<(f64, f64)> = t
            .iter()
            .zip(e)
            .filter(|(&ti, _)| ti >= start - 1e-12 * (t1 - t0).abs())
            .map(|(&ti, &ei)| (ti, ei))
            .collect();
        if pts.len() < 2 || pts.iter().all(|&(_, ei)| ei == 0.0) {
            return neutral;
        }
        let floor = f64::MIN_POSITIVE;
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let ly: Vec<f64> = pts.iter().map(|p| p.1.max(floor).ln()).collect();
        let my = ly.iter().sum::<f64>() / n;
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for (p, y) in pts.iter().zip(&ly) {
            let (dx, dy) = (p.0 - mx, y - my);
            sxy += dx * dy;
            sxx += dx * dx;
            syy += dy * dy;
        }
        let sigma = sxy / sxx;
        let r2 = if syy == 0.0 {
            1.0
        } else {
            (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
        };
        let classification = if sigma > band {
            Classification::Growing
        } else if sigma < -band {
            Classification::Decaying
        } else {
            Classification::Neutral
        };
        GrowthEstimate {
            sigma,
            r2,
            classification,
        }
    }
}

/// Growth estimate of a trajectory with the default neutral band.
pub fn fit_growth_rate(traj: &Trajectory, window: f64) -> GrowthEstimate {
    fit_growth_rate_with_band(traj, window, SIGMA_NEUTRAL_BAND)
}

pub fn fit_growth_rate_with_band(traj: &Trajectory, window: f64, band: f64) -> GrowthEstimate {
    if traj.is_diverged() {
        return GrowthEstimate::diverged();
    }
    let t: Vec<f64> = traj.samples.iter().map(|s| s.energy.t).collect();
    let e: Vec<f64> = traj.samples.iter().map(|s| s.energy.e).collect();
    GrowthEstimate::from_series(&t, &e, window, band)
}
