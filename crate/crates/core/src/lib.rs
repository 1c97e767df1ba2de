//! Simulation and analysis of a clamped Berger beam under piston-theoretic
//! flow loading,
//!
//! ```text
//! u_tt + u_xxxx + k u_t + lambda (b - b0 |u_x|^2) u_xx = p - mu U u_x,   u = u_x = 0 at both ends.
//! ```
//!
//! The crate covers the finite-difference model ([`model`], [`operators`]),
//! implicit adaptive time stepping ([`integrator`]), energy diagnostics
//! ([`diagnostics`]), and the stability studies built on them
//! ([`experiments`]): critical flow velocity, buckled equilibria, limit
//! cycles, and parameter sweeps. [`manifest`] and [`cli`] provide the
//! configuration format and the command-line front end.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod banded;
pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod integrator;
pub mod manifest;
pub mod mesh;
pub mod model;
pub mod operators;
pub mod output;
pub mod verify;

pub use config::{BeamConfig, InitialData, Pressure};
pub use diagnostics::{energies, fit_growth_rate, Classification, EnergyRecord, GrowthEstimate};
pub use error::{Error, Result};
pub use integrator::{integrate_observed, integrate, IntegratorConfig, RunStatus, Scheme, Trajectory};
pub use mesh::Mesh;
pub use model::{Beam, State};
pub use operators::DiscreteOperators;

/// Grid resolution used throughout: `dx = ell / 100`.
pub const DEFAULT_CELLS: usize = 100;
