//! Time-stepping accuracy against manufactured solutions, and spatial
//! operator consistency against closed-form derivatives.

use std::f64::consts::PI;
use std::sync::Arc;

use pistonbeam::integrator::Stepper;
use pistonbeam::model::grad_norm_sq;
use pistonbeam::{integrate, Beam, BeamConfig, DiscreteOperators, IntegratorConfig, Mesh, Scheme, State};

const OMEGA: f64 = 3.0;

fn c(t: f64) -> f64 {
    (OMEGA * t).cos()
}

fn dc(t: f64) -> f64 {
    -OMEGA * (OMEGA * t).sin()
}

fn ddc(t: f64) -> f64 {
    -OMEGA * OMEGA * (OMEGA * t).cos()
}

/// A beam forced so that `u(t) = cos(3t) phi` solves the semi-discrete
/// system exactly, with `phi = sin^2(pi x)` on the grid.
fn manufactured(cfg: BeamConfig, n: usize) -> (Beam, Vec<f64>) {
    let beam = Beam::new(cfg.clone(), n).unwrap();
    let phi = beam.mesh.sample(|x| (PI * x).sin().powi(2));
    let d1 = beam.ops.d1.mul_vec(&phi);
    let d2 = beam.ops.d2.mul_vec(&phi);
    let d4 = beam.ops.d4.mul_vec(&phi);
    let g_phi = grad_norm_sq(&phi, &beam.mesh);
    let dx = beam.mesh.dx();
    let (p, lam) = (phi.clone(), cfg.lambda());
    let forcing = Arc::new(move |t: f64, x: f64| {
        let j = (x / dx).round() as usize - 1;
        let s = lam * (cfg.b - cfg.b0 * c(t) * c(t) * g_phi);
        ddc(t) * p[j] + c(t) * d4[j] + cfg.k * dc(t) * p[j] + cfg.mu * cfg.velocity * c(t) * d1[j] + s * c(t) * d2[j]
    });
    (beam.with_forcing(forcing), phi)
}

fn exact(phi: &[f64], t: f64) -> State {
    State {
        t,
        u: phi.iter().map(|x| c(t) * x).collect(),
        v: phi.iter().map(|x| dc(t) * x).collect(),
    }
}

fn max_err(y: &State, phi: &[f64]) -> f64 {
    let e = exact(phi, y.t);
    y.u.iter()
        .zip(&e.u)
        .chain(y.v.iter().zip(&e.v))
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
}

fn fixed_step_error(beam: &Beam, phi: &[f64], scheme: Scheme, h: f64, t_end: f64) -> f64 {
    let mut stepper = Stepper::new(beam, IntegratorConfig::default().with_scheme(scheme));
    let mut y = exact(phi, 0.0);
    let steps = (t_end / h).round() as usize;
    for _ in 0..steps {
        y = stepper.step(&y, h).unwrap();
    }
    max_err(&y, phi)
}

fn configs() -> Vec<BeamConfig> {
    vec![
        BeamConfig::linear(1.0, 100.0),
        BeamConfig::berger(0.5, 50.0, 10.0, 2.0),
    ]
}

#[test]
fn fixed_step_schemes_are_second_order() {
    for cfg in configs() {
        let (beam, phi) = manufactured(cfg.clone(), 20);
        for scheme in [Scheme::AverageAcceleration, Scheme::Bdf2] {
            let errs: Vec<f64> = [0.005, 0.0025, 0.00125, 0.000625]
                .iter()
                .map(|&h| fixed_step_error(&beam, &phi, scheme, h, 1.0))
                .collect();
            for w in errs.windows(2) {
                let order = (w[0] / w[1]).log2();
                assert!(
                    (order - 2.0).abs() < 0.2,
                    "{scheme:?} {cfg:?}: errors {errs:?}, order {order}"
                );
            }
        }
    }
}

// Checked where the controller, not dt_max, sets the steps. Looser than
// about 4e-6 the final error moves by tens of percent between neighbouring
// tolerances as the step pattern changes.
#[test]
fn tighter_tolerances_never_increase_the_error() {
    for cfg in configs() {
        let (beam, phi) = manufactured(cfg, 20);
        for scheme in [Scheme::AverageAcceleration, Scheme::Bdf2] {
            let errs: Vec<f64> = (9..=13)
                .map(|i| 1e-3 / 2f64.powi(i))
                .map(|rtol| {
                    let ic = IntegratorConfig::default()
                        .with_scheme(scheme)
                        .with_tolerances(rtol, rtol * 1e-2)
                        .with_sample_dt(0.5);
                    let traj = integrate(&exact(&phi, 0.0), 1.0, &beam, &ic).unwrap();
                    max_err(&traj.last().state, &phi)
                })
                .collect();
            for w in errs.windows(2) {
                assert!(w[1] <= w[0], "{scheme:?}: {errs:?}");
            }
        }
    }
}

// f = sum a_m cos(m pi x): even about both ends, so it meets the clamped
// ghost reflection to all orders
fn cosine_series(a: &[(f64, f64)], deriv: u32, x: f64) -> f64 {
    a.iter()
        .map(|&(m, am)| {
            let w = m * PI;
            let v = match deriv % 4 {
                0 => (w * x).cos(),
                1 => -(w * x).sin(),
                2 => -(w * x).cos(),
                _ => (w * x).sin(),
            };
            am * w.powi(deriv as i32) * v
        })
        .sum()
}

#[test]
fn operators_converge_at_second_order() {
    // sin^2(pi x) and sin^2(pi x) cos(pi x)
    let funcs: [&[(f64, f64)]; 2] = [&[(0.0, 0.5), (2.0, -0.5)], &[(1.0, 0.25), (3.0, -0.25)]];
    for f in funcs {
        let mut errs = [[0.0; 3]; 4];
        for (row, &n) in [20, 40, 80, 160].iter().enumerate() {
            let mesh = Mesh::new(1.0, n).unwrap();
            let ops = DiscreteOperators::new(&mesh);
            let u = mesh.sample(|x| cosine_series(f, 0, x));
            for (col, (op, d)) in [(&ops.d1, 1), (&ops.d2, 2), (&ops.d4, 4)].into_iter().enumerate() {
                let got = op.mul_vec(&u);
                errs[row][col] = mesh
                    .interior_nodes()
                    .zip(&got)
                    .fold(0.0f64, |m, (x, g)| m.max((g - cosine_series(f, d, x)).abs()));
            }
        }
        for w in errs.windows(2) {
            for (col, (a, b)) in w[0].iter().zip(&w[1]).enumerate() {
                let order = (a / b).log2();
                assert!((order - 2.0).abs() < 0.1, "operator {col}: order {order}");
            }
        }
    }
}

#[test]
fn conservation_on_a_coarse_grid() {
    let beam = Beam::new(BeamConfig::linear(0.0, 0.0), 20).unwrap();
    let ic = IntegratorConfig::default().with_sample_dt(0.01);
    let traj = integrate(&beam.initial_state().unwrap(), 1.0, &beam, &ic).unwrap();
    let e0 = traj.samples[0].energy.e;
    for r in traj.energies() {
        assert!((r.e - e0).abs() <= 1e-10 * e0, "t = {}: {}", r.t, r.e);
    }
}

