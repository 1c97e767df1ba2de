//! Implicit stage equation shared by both schemes.
//!
//! Each scheme writes the new state as `u1 = cu + g v1` and requires
//!
//! ```text
//! R(v1) = v1 - cv - g a(t1, cu + g v1, v1) = 0.
//! ```
//!
//! The Jacobian is
//!
//! ```text
//! J = (1 + g k) I + g^2 (D4 + mu U D1 + lambda s D2) + 2 g^2 lambda b0 dx z z^T,
//! ```
//!
//! with `s = b - b0 |u_x|^2` and `z = D2 u1`: a pentadiagonal band plus a
//! symmetric rank-one term, solved with a band LU and Sherman–Morrison.

use crate::banded::{solve_rank_one, BandLu, BandMatrix};
use crate::error::{Error, Result};
use crate::model::Beam;

use super::IntegratorConfig;

pub(crate) struct StageProblem<'a> {
    pub t1: f64,
    pub gamma: f64,
    pub cu: &'a [f64],
    pub cv: &'a [f64],
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct NewtonStats {
    pub iterations: usize,
    pub factorizations: usize,
}

struct CachedFactor {
    gamma: f64,
    s: f64,
    lu: BandLu,
}

// absolute part of the Newton stopping test, as a fraction of atol; keeps
// the test attainable when the velocity is near zero
const NEWTON_ATOL_FRACTION: f64 = 1e-2;

// step doubling alternates between two step coefficients
const CACHE_SLOTS: usize = 2;

/// Newton solver that keeps recent band factorizations and reuses one while
/// the step coefficient is unchanged and the axial factor `s` moved by less
/// than the configured fraction.
pub(crate) struct StageSolver {
    // D4 + mu U D1
    stiffness: BandMatrix,
    scratch: BandMatrix,
    cache: Vec<CachedFactor>,
    pub stats: NewtonStats,
}

impl StageSolver {
    pub fn new(beam: &Beam) -> Self {
        let cfg = &beam.config;
        let stiffness = BandMatrix::combine(&[(1.0, &beam.ops.d4), (cfg.mu * cfg.velocity, &beam.ops.d1)]);
        let scratch = BandMatrix::zeros(beam.dim(), stiffness.lower(), stiffness.upper());
        StageSolver {
            stiffness,
            scratch,
            cache: Vec::with_capacity(CACHE_SLOTS),
            stats: NewtonStats::default(),
        }
    }

    /// Index of a usable factor, computing one if needed, and whether it was
    /// built for exactly this `s`.
    fn factor_for(&mut self, beam: &Beam, gamma: f64, s: f64, threshold: f64) -> Result<(usize, bool)> {
        let hit = self.cache.iter().position(|f| {
            f.gamma == gamma && (f.s == s || (f.s - s).abs() <= threshold * f.s.abs())
        });
        if let Some(i) = hit {
            return Ok((i, self.cache[i].s == s));
        }
        let g2 = gamma * gamma;
        self.scratch
            .assign_combination(&[(g2, &self.stiffness), (g2 * s, &beam.ops.d2)]);
        self.scratch.add_diagonal(1.0 + gamma * beam.config.k);
        self.stats.factorizations += 1;
        let slot = if self.cache.len() < CACHE_SLOTS {
            self.cache.push(CachedFactor {
                gamma,
                s,
                lu: BandLu::factor(&self.scratch)?,
            });
            self.cache.len() - 1
        } else {
            // evict the older entry, keep the newer one in slot 1
            self.cache.swap(0, 1);
            let f = &mut self.cache[1];
            f.gamma = f64::NAN;
            f.lu.refactor(&self.scratch)?;
            f.gamma = gamma;
            f.s = s;
            1
        };
        Ok((slot, true))
    }

    /// Solve the stage equation starting from `v_guess`; returns `(u1, v1)`.
    pub fn solve(
        &mut self,
        beam: &Beam,
        cfg: &IntegratorConfig,
        prob: &StageProblem<'_>,
        v_guess: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = beam.dim();
        let g = prob.gamma;
        let bc = &beam.config;
        let lambda = bc.lambda();
        let linear = lambda == 0.0 || bc.b0 == 0.0;
        let mut v = v_guess.to_vec();
        let mut u = vec![0.0; n];
        let mut a = vec![0.0; n];
        let mut r = vec![0.0; n];

        for iter in 1..=cfg.newton_max_iters {
            for i in 0..n {
                u[i] = prob.cu[i] + g * v[i];
            }
            beam.accel_into(prob.t1, &u, &v, &mut a);
            for i in 0..n {
                r[i] = -(v[i] - prob.cv[i] - g * a[i]);
            }
            let s = beam.axial_factor(&u);
            let (slot, exact) = self.factor_for(beam, g, s, cfg.refactor_threshold)?;
            let lu = &self.cache[slot].lu;
            let delta = if lambda != 0.0 && bc.b0 != 0.0 {
                let z = beam.ops.d2.mul_vec(&u);
                let alpha = 2.0 * g * g * lambda * bc.b0 * beam.mesh.dx();
                solve_rank_one(lu, alpha, &z, &r)?
            } else {
                lu.solve(&r)
            };
            self.stats.iterations += 1;

            let mut dmax = 0.0f64;
            let mut scale = 0.0f64;
            for i in 0..n {
                v[i] += delta[i];
                dmax = dmax.max(delta[i].abs());
                scale = scale.max(v[i].abs());
            }
            if !dmax.is_finite() {
                break;
            }
            // a linear stage is solved exactly by one step with the exact factor
            if (linear && exact) || dmax <= cfg.newton_tol * scale + NEWTON_ATOL_FRACTION * cfg.atol {
                for i in 0..n {
                    u[i] = prob.cu[i] + g * v[i];
                }
                return Ok((u, v));
            }
            if iter == cfg.newton_max_iters {
                break;
            }
        }
        Err(Error::NewtonDiverged {
            t: prob.t1,
            iters: cfg.newton_max_iters,
        })
    }
}
