//! Physical parameters of one beam model instance.
//!
//! The governing equation on `[0, ell]` with clamped ends is
//!
//! ```text
//! u_tt + u_xxxx + k u_t + lambda (b - b0 |u_x|^2) u_xx = p - mu U u_x
//! ```
//!
//! Sign convention for the preload: `b > 0` is in-axis compression (it
//! destabilizes the straight beam and produces buckling for large `b`) and
//! `b < 0` is tension. Some descriptions of this model state the opposite
//! in words; the equation above is what the code solves.

use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Static transverse load.
#[derive(Debug, Clone, PartialEq)]
pub enum Pressure {
    Uniform(f64),
    /// Samples on a uniform grid spanning `[0, ell]` (first and last entries
    /// sit at the two ends). Linearly interpolated onto the mesh.
    Profile(Vec<f64>),
}

impl Pressure {
    pub fn is_zero(&self) -> bool {
        match self {
            Pressure::Uniform(p) => *p == 0.0,
            Pressure::Profile(s) => s.iter().all(|&p| p == 0.0),
        }
    }

    /// Load at the interior nodes of `mesh`.
    pub fn sample(&self, mesh: &Mesh) -> Vec<f64> {
        match self {
            Pressure::Uniform(p) => vec![*p; mesh.interior_len()],
            Pressure::Profile(s) => {
                let m = s.len() - 1;
                mesh.interior_nodes()
                    .map(|x| {
                        let pos = x / mesh.ell() * m as f64;
                        let i = (pos.floor() as usize).min(m - 1);
                        let w = pos - i as f64;
                        (1.0 - w) * s[i] + w * s[i + 1]
                    })
                    .collect()
            }
        }
    }
}

/// Initial displacement and velocity.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// `u0 = 0`, `u1(x) = amplitude * x (ell - x)`.
    ParabolicVelocity { amplitude: f64 },
    /// Explicit values at the interior nodes.
    Samples { u0: Vec<f64>, u1: Vec<f64> },
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::ParabolicVelocity { amplitude: 10.0 }
    }
}

impl InitialData {
    pub fn sample(&self, mesh: &Mesh) -> Result<(Vec<f64>, Vec<f64>)> {
        match self {
            InitialData::ParabolicVelocity { amplitude } => {
                let ell = mesh.ell();
                let u1 = mesh
                    .interior_nodes()
                    .map(|x| amplitude * x * (ell - x))
                    .collect();
                Ok((vec![0.0; mesh.interior_len()], u1))
            }
            InitialData::Samples { u0, u1 } => {
                let n = mesh.interior_len();
                if u0.len() != n || u1.len() != n {
                    return Err(Error::param(
                        "init",
                        format!(
                            "expected {n} interior samples, got u0: {}, u1: {}",
                            u0.len(),
                            u1.len()
                        ),
                    ));
                }
                Ok((u0.clone(), u1.clone()))
            }
        }
    }
}

/// All physical parameters of a model instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamConfig {
    pub ell: f64,
    /// Total damping (material damping plus the flow's own `mu` contribution).
    pub k: f64,
    pub mu: f64,
    /// Flow velocity `U`.
    pub velocity: f64,
    /// Berger nonlinearity switch (`lambda` in {0, 1}).
    pub berger: bool,
    pub b: f64,
    pub b0: f64,
    pub pressure: Pressure,
    pub init: InitialData,
}

impl Default for BeamConfig {
    fn default() -> Self {
        BeamConfig {
            ell: 1.0,
            k: 0.0,
            mu: 1.0,
            velocity: 0.0,
            berger: false,
            b: 0.0,
            b0: 0.0,
            pressure: Pressure::Uniform(0.0),
            init: InitialData::default(),
        }
    }
}

impl BeamConfig {
    /// Linear model (`lambda = 0`) with the given damping and flow speed.
    pub fn linear(k: f64, velocity: f64) -> Self {
        BeamConfig {
            k,
            velocity,
            ..Default::default()
        }
    }

    /// Berger model (`lambda = 1`).
    pub fn berger(k: f64, velocity: f64, b: f64, b0: f64) -> Self {
        BeamConfig {
            k,
            velocity,
            berger: true,
            b,
            b0,
            ..Default::default()
        }
    }

    pub fn lambda(&self) -> f64 {
        if self.berger {
            1.0
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |key: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(key, "must be finite"))
            }
        };
        finite("ell", self.ell)?;
        finite("k", self.k)?;
        finite("mu", self.mu)?;
        finite("U", self.velocity)?;
        finite("b", self.b)?;
        finite("b0", self.b0)?;
        if self.ell <= 0.0 {
            return Err(Error::param("ell", "must be positive"));
        }
        if self.k < 0.0 {
            return Err(Error::param("k", "must be nonnegative"));
        }
        if self.mu < 0.0 {
            return Err(Error::param("mu", "must be nonnegative"));
        }
        if self.velocity < 0.0 {
            return Err(Error::param("U", "must be nonnegative"));
        }
        if self.b0 < 0.0 {
            return Err(Error::param("b0", "must be nonnegative"));
        }
        match &self.pressure {
            Pressure::Uniform(p) => finite("p", *p)?,
            Pressure::Profile(s) => {
                if s.len() < 2 {
                    return Err(Error::param("p", "profile needs at least 2 samples"));
                }
                if s.iter().any(|v| !v.is_finite()) {
                    return Err(Error::param("p", "profile must be finite"));
                }
            }
        }
        match &self.init {
            InitialData::ParabolicVelocity { amplitude } => finite("init.amplitude", *amplitude)?,
            InitialData::Samples { u0, u1 } => {
                if u0.iter().chain(u1).any(|v| !v.is_finite()) {
                    return Err(Error::param("init", "samples must be finite"));
                }
            }
        }
        Ok(())
    }
}
