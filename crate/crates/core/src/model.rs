//! Semi-discrete beam dynamics: the Berger force and the first-order
//! right-hand side `(u, v)' = (v, a(u, v, t))`.

use std::fmt;
use std::sync::Arc;

use crate::config::BeamConfig;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::operators::DiscreteOperators;

/// Phase-space point at the interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl State {
    pub fn zeros(n: usize) -> Self {
        State {
            t: 0.0,
            u: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.u.iter().chain(&self.v).all(|x| x.is_finite())
    }

    pub fn negated(&self) -> State {
        State {
            t: self.t,
            u: self.u.iter().map(|x| -x).collect(),
            v: self.v.iter().map(|x| -x).collect(),
        }
    }
}

/// `|u_x|_h^2 = dx * sum_{i=0}^{N-1} ((u_{i+1} - u_i) / dx)^2` with zero
/// end values. Algebraically equal to `-(u, D2 u)_h`.
pub fn grad_norm_sq(u: &[f64], mesh: &Mesh) -> f64 {
    let dx = mesh.dx();
    let n = u.len();
    let mut acc = u[0] * u[0] + u[n - 1] * u[n - 1];
    for w in u.windows(2) {
        let d = w[1] - w[0];
        acc += d * d;
    }
    acc / dx
}

/// Berger force `(b - b0 |u_x|^2) D2 u`.
pub fn berger_force(u: &[f64], b: f64, b0: f64, ops: &DiscreteOperators, mesh: &Mesh) -> Vec<f64> {
    let s = b - b0 * grad_norm_sq(u, mesh);
    let mut out = ops.d2.mul_vec(u);
    out.iter_mut().for_each(|x| *x *= s);
    out
}

/// Right-hand side of the first-order system for a bare configuration.
pub fn rhs(
    state: &State,
    cfg: &BeamConfig,
    ops: &DiscreteOperators,
    mesh: &Mesh,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !state.is_finite() {
        return Err(Error::NonFinite { t: state.t });
    }
    let load = cfg.pressure.sample(mesh);
    let mut dv = vec![0.0; state.u.len()];
    accel_into(&state.u, &state.v, cfg, ops, mesh, &load, &mut dv);
    Ok((state.v.clone(), dv))
}

fn accel_into(
    u: &[f64],
    v: &[f64],
    cfg: &BeamConfig,
    ops: &DiscreteOperators,
    mesh: &Mesh,
    load: &[f64],
    out: &mut [f64],
) {
    ops.d4.mul_vec_into(u, out);
    let s = if cfg.berger {
        cfg.b - cfg.b0 * grad_norm_sq(u, mesh)
    } else {
        0.0
    };
    let flow = cfg.mu * cfg.velocity;
    let d2u = (s != 0.0).then(|| ops.d2.mul_vec(u));
    let d1u = (flow != 0.0).then(|| ops.d1.mul_vec(u));
    for i in 0..out.len() {
        let mut a = -out[i] - cfg.k * v[i] + load[i];
        if let Some(d2u) = &d2u {
            a -= s * d2u[i];
        }
        if let Some(d1u) = &d1u {
            a -= flow * d1u[i];
        }
        out[i] = a;
    }
}

/// Time-dependent distributed source `g(t, x)` added to the acceleration.
pub type Forcing = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A configured beam: parameters, grid, operators, and the sampled load.
#[derive(Clone)]
pub struct Beam {
    pub config: BeamConfig,
    pub mesh: Mesh,
    pub ops: DiscreteOperators,
    load: Vec<f64>,
    forcing: Option<Forcing>,
}

impl fmt::Debug for Beam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Beam")
            .field("config", &self.config)
            .field("mesh", &self.mesh)
            .field("forcing", &self.forcing.is_some())
            .finish()
    }
}

impl Beam {
    pub fn new(config: BeamConfig, n_cells: usize) -> Result<Self> {
        config.validate()?;
        let mesh = Mesh::new(config.ell, n_cells)?;
        let ops = DiscreteOperators::new(&mesh);
        let load = config.pressure.sample(&mesh);
        Ok(Beam {
            config,
            mesh,
            ops,
            load,
            forcing: None,
        })
    }

    /// Same grid and operators with a different parameter set.
    pub fn with_config(&self, config: BeamConfig) -> Result<Self> {
        config.validate()?;
        if config.ell != self.config.ell {
            return Beam::new(config, self.mesh.n_cells());
        }
        let load = config.pressure.sample(&self.mesh);
        Ok(Beam {
            config,
            mesh: self.mesh,
            ops: self.ops.clone(),
            load,
            forcing: self.forcing.clone(),
        })
    }

    pub fn with_forcing(mut self, forcing: Forcing) -> Self {
        self.forcing = Some(forcing);
        self
    }

    pub fn dim(&self) -> usize {
        self.mesh.interior_len()
    }

    pub fn load(&self) -> &[f64] {
        &self.load
    }

    pub fn initial_state(&self) -> Result<State> {
        let (u, v) = self.config.init.sample(&self.mesh)?;
        Ok(State { t: 0.0, u, v })
    }

    /// Scalar multiplying `D2 u` in the Berger force, or 0 when it is off.
    pub fn axial_factor(&self, u: &[f64]) -> f64 {
        if self.config.berger {
            self.config.b - self.config.b0 * grad_norm_sq(u, &self.mesh)
        } else {
            0.0
        }
    }

    /// Acceleration `a(u, v, t)`, written into `out`.
    pub fn accel_into(&self, t: f64, u: &[f64], v: &[f64], out: &mut [f64]) {
        accel_into(u, v, &self.config, &self.ops, &self.mesh, &self.load, out);
        if let Some(g) = &self.forcing {
            for (j, o) in out.iter_mut().enumerate() {
                *o += g(t, self.mesh.interior_x(j));
            }
        }
    }

    pub fn accel(&self, t: f64, u: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.accel_into(t, u, v, &mut out);
        out
    }

    pub fn rhs(&self, state: &State) -> Result<(Vec<f64>, Vec<f64>)> {
        if !state.is_finite() {
            return Err(Error::NonFinite { t: state.t });
        }
        Ok((state.v.clone(), self.accel(state.t, &state.u, &state.v)))
    }

    /// Static residual `G(u) = a(u, 0)`; its zeros are the equilibria.
    pub fn static_residual(&self, u: &[f64]) -> Vec<f64> {
        let zero = vec![0.0; u.len()];
        let mut out = vec![0.0; u.len()];
        accel_into(u, &zero, &self.config, &self.ops, &self.mesh, &self.load, &mut out);
        out
    }
}
