//! Built-in self-checks against quantities known independently of the
//! time stepper: exact energy conservation of the trapezoidal rule, the
//! energy identity, convergence of the lowest clamped-beam eigenvalue, and
//! skew-symmetry of the flow operator.

use serde::Serialize;

use crate::banded::BandLu;
use crate::config::BeamConfig;
use crate::diagnostics::{energies, energy_outflow, identity_residual_series};
use crate::error::Result;
use crate::integrator::{integrate_observed, IntegratorConfig, Scheme};
use crate::mesh::Mesh;
use crate::model::Beam;
use crate::operators::DiscreteOperators;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// The measured quantity compared against `threshold`.
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Check {
    fn at_most(name: &str, value: f64, threshold: f64, detail: String) -> Self {
        Check {
            name: name.into(),
            passed: value <= threshold,
            value,
            threshold,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

/// Largest relative drift `|E(t) - E(0)| / E(0)` of the conservative linear
/// beam (`k = U = 0`) under the trapezoidal rule over `[0, t_end]`.
pub fn conservation_drift(n_cells: usize, t_end: f64) -> Result<f64> {
    let beam = Beam::new(BeamConfig::linear(0.0, 0.0), n_cells)?;
    let cfg = IntegratorConfig::default().with_scheme(Scheme::AverageAcceleration);
    let s0 = beam.initial_state()?;
    let e0 = energies(&s0, &beam).e;
    let mut drift = 0.0f64;
    integrate_observed(&s0, t_end, &beam, &cfg, |s| {
        drift = drift.max((energies(s, &beam).e - e0).abs() / e0);
    })?;
    Ok(drift)
}

/// Largest `|r_j|` of the centered energy-identity residual for `beam`,
/// sampled every `cfg.sample_dt`. Samples are streamed, not stored.
pub fn max_identity_residual(beam: &Beam, t_end: f64, cfg: &IntegratorConfig) -> Result<f64> {
    let (mut t, mut e, mut q) = (Vec::new(), Vec::new(), Vec::new());
    integrate_observed(&beam.initial_state()?, t_end, beam, cfg, |s| {
        t.push(s.t);
        e.push(energies(s, beam).e_nl);
        q.push(energy_outflow(s, beam));
    })?;
    let r = identity_residual_series(&t, &e, &q)?;
    Ok(r.iter().fold(0.0f64, |m, x| m.max(x.abs())))
}

/// First positive root of `cos(b) cosh(b) = 1`, by bisection on `[4, 5]`.
pub fn clamped_beta1() -> f64 {
    let f = |b: f64| b.cos() * b.cosh() - 1.0;
    let (mut lo, mut hi) = (4.0f64, 5.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Smallest eigenvalue of `D4` on a beam of length `ell`, by inverse
/// iteration with a Rayleigh quotient.
pub fn smallest_d4_eigenvalue(ell: f64, n_cells: usize) -> Result<f64> {
    let mesh = Mesh::new(ell, n_cells)?;
    let ops = DiscreteOperators::new(&mesh);
    let lu = BandLu::factor(&ops.d4)?;
    let mut x: Vec<f64> = mesh.sample(|s| (std::f64::consts::PI * s / ell).sin().powi(2));
    let mut lambda = 0.0;
    for _ in 0..500 {
        let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        x.iter_mut().for_each(|a| *a /= norm);
        let y = lu.solve(&x);
        // Rayleigh quotient of D4^-1 at x
        let mu: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let next = 1.0 / mu;
        x = y;
        if (next - lambda).abs() <= 1e-14 * next {
            return Ok(next);
        }
        lambda = next;
    }
    Ok(lambda)
}

/// Observed orders `log2(err(n) / err(2n))` of the smallest `D4` eigenvalue
/// on the unit beam against `beta1^4`, for successive `n` in `cells`.
pub fn eigenvalue_orders(cells: &[usize]) -> Result<(Vec<f64>, Vec<f64>)> {
    let exact = clamped_beta1().powi(4);
    let errs = cells
        .iter()
        .map(|&n| Ok((smallest_d4_eigenvalue(1.0, n)? - exact).abs()))
        .collect::<Result<Vec<f64>>>()?;
    let orders = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok((errs, orders))
}

/// `max |(D1 u, u)_h| / |u|_h^2` over a few deterministic test vectors.
pub fn d1_skewness(n_cells: usize) -> Result<f64> {
    let mesh = Mesh::new(1.0, n_cells)?;
    let ops = DiscreteOperators::new(&mesh);
    let vectors: [&dyn Fn(f64) -> f64; 3] = [
        &|x| (3.0 * x).sin() + x * x,
        &|x| (x - 0.3).abs().sqrt(),
        &|x| (17.0 * x).cos() * (1.0 - x),
    ];
    Ok(vectors
        .iter()
        .map(|f| {
            let u = mesh.sample(f);
            ops.inner(&ops.d1.mul_vec(&u), &u).abs() / ops.norm_sq(&u)
        })
        .fold(0.0, f64::max))
}

fn join(xs: &[f64], f: impl Fn(f64) -> String) -> String {
    xs.iter().map(|&x| f(x)).collect::<Vec<_>>().join(", ")
}

/// Run every check. Takes about half a minute in an optimized build.
pub fn run_all() -> Result<VerifyReport> {
    let mut checks = Vec::new();

    let drift = conservation_drift(crate::DEFAULT_CELLS, 1.0)?;
    checks.push(Check::at_most(
        "conservation",
        drift,
        1e-10,
        "linear beam, k = 0, U = 0, trapezoidal rule, T = 1: max |E(t) - E(0)| / E(0)".into(),
    ));

    let beam = Beam::new(BeamConfig::berger(1.0, 600.0, 0.0, 1.0), crate::DEFAULT_CELLS)?;
    let cfg = IntegratorConfig::default().with_sample_dt(5e-6);
    let r = max_identity_residual(&beam, 1.0, &cfg)?;
    checks.push(Check::at_most(
        "energy-identity",
        r,
        1e-4,
        "Berger beam, k = 1, U = 600, b = 0, b0 = 1, T = 1, sampled every 5e-6: max |residual|".into(),
    ));

    let cells = [25, 50, 100, 200];
    let (errs, orders) = eigenvalue_orders(&cells)?;
    let worst = orders.iter().map(|p| (p - 2.0).abs()).fold(0.0, f64::max);
    checks.push(Check::at_most(
        "eigenvalue-order",
        worst,
        0.2,
        format!(
            "smallest D4 eigenvalue vs beta1^4 = {:.10}; n = {cells:?}; errors [{}]; orders [{}]",
            clamped_beta1().powi(4),
            join(&errs, |e| format!("{e:.3e}")),
            join(&orders, |p| format!("{p:.3}"))
        ),
    ));

    let skew = d1_skewness(crate::DEFAULT_CELLS)?;
    checks.push(Check::at_most(
        "d1-skew",
        skew,
        1e-13,
        "max |(D1 u, u)_h| / |u|_h^2 over three test vectors".into(),
    ));

    Ok(VerifyReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}
