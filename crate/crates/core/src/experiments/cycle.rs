//! Limit-cycle detection from the midpoint displacement.

use crate::integrator::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitCycleOptions {
    /// Trailing fraction of the time span that is analysed.
    pub tail_fraction: f64,
    /// Largest relative spread of the last three peak-to-peak swings; also
    /// the tolerance, relative to the tail range, for matching peak heights
    /// one cycle apart.
    pub rel_tol: f64,
    /// Peak-to-peak amplitude below which the motion counts as at rest.
    pub amplitude_floor: f64,
    /// Fewest extrema (maxima plus minima) in the tail for a verdict.
    pub min_extrema: usize,
}

impl Default for LimitCycleOptions {
    fn default() -> Self {
        LimitCycleOptions {
            tail_fraction: 0.5,
            rel_tol: 0.01,
            amplitude_floor: 1e-6,
            min_extrema: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitCycleReport {
    pub converged: bool,
    /// Too few extrema in the tail to judge.
    pub inconclusive: bool,
    /// Mean spacing of successive same-phase maxima (plain mean spacing of
    /// all maxima when no repeating pattern was found).
    pub period: Option<f64>,
    /// Mean peak-to-peak swing of `u_mid` over the last three cycles, or the
    /// range over the tail when no cycle was identified.
    pub amplitude: f64,
    pub tail: (f64, f64),
    /// Refined maxima `(t, u_mid)` in the tail.
    pub peaks: Vec<(f64, f64)>,
    pub troughs: Vec<(f64, f64)>,
}

impl LimitCycleReport {
    fn empty(tail: (f64, f64)) -> Self {
        LimitCycleReport {
            converged: false,
            inconclusive: true,
            period: None,
            amplitude: 0.0,
            tail,
            peaks: Vec::new(),
            troughs: Vec::new(),
        }
    }
}

/// Vertex of the parabola through three samples.
fn vertex(t: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let (h1, h2) = (t[1] - t[0], t[2] - t[1]);
    let d1 = (y[1] - y[0]) / h1;
    let d2 = (y[2] - y[1]) / h2;
    let c2 = (d2 - d1) / (h1 + h2);
    if c2 == 0.0 {
        return (t[1], y[1]);
    }
    // y = y1 + c1 (s - t1) + c2 (s - t1)^2 around the middle sample
    let c1 = d1 + c2 * h1;
    let dt = (-c1 / (2.0 * c2)).clamp(-h1, h2);
    (t[1] + dt, y[1] + c1 * dt + c2 * dt * dt)
}

/// Analyse a sampled signal `u(t)`.
pub fn detect_limit_cycle_series(t: &[f64], u: &[f64], opts: &LimitCycleOptions) -> LimitCycleReport {
    assert_eq!(t.len(), u.len());
    if t.len() < 3 {
        let end = t.last().copied().unwrap_or(0.0);
        return LimitCycleReport::empty((end, end));
    }
    let (t0, t1) = (t[0], t[t.len() - 1]);
    let start = t1 - opts.tail_fraction.clamp(0.0, 1.0) * (t1 - t0);
    let first = t.iter().position(|&x| x >= start).unwrap_or(0);
    let tail = (t[first], t1);

    let mut peaks = Vec::new();
    let mut troughs = Vec::new();
    for j in first.max(1)..t.len() - 1 {
        let (a, b, c) = (u[j - 1], u[j], u[j + 1]);
        let tt = [t[j - 1], t[j], t[j + 1]];
        if b > a && b >= c {
            peaks.push(vertex(tt, [a, b, c]));
        } else if b < a && b <= c {
            troughs.push(vertex(tt, [a, b, c]));
        }
    }
    if peaks.len() + troughs.len() < opts.min_extrema || peaks.len() < 3 || troughs.len() < 3 {
        let range = u[first..].iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
        return LimitCycleReport {
            amplitude: (range.1 - range.0).max(0.0),
            peaks,
            troughs,
            ..LimitCycleReport::empty(tail)
        };
    }

    let (lo, hi) = u[first..].iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    });
    let range = hi - lo;
    let Some(m) = pattern_length(&peaks, opts.rel_tol * range) else {
        let period = (peaks[peaks.len() - 1].0 - peaks[0].0) / (peaks.len() - 1) as f64;
        return LimitCycleReport {
            converged: false,
            inconclusive: false,
            period: Some(period),
            amplitude: range,
            tail,
            peaks,
            troughs,
        };
    };
    // same-phase maxima one cycle apart
    let n = peaks.len();
    let spans: Vec<f64> = (n - 2 * m..n).map(|i| peaks[i].0 - peaks[i - m].0).collect();
    let period = spans.iter().sum::<f64>() / spans.len() as f64;
    // peak-to-peak swing over each of the last three cycles
    let swings: Vec<f64> = (0..3)
        .map(|c| {
            let (ta, tb) = (peaks[n - 1 - (c + 1) * m].0, peaks[n - 1 - c * m].0);
            let (a, b) = t.iter().zip(u).filter(|(&ti, _)| ti >= ta && ti <= tb).fold(
                (f64::INFINITY, f64::NEG_INFINITY),
                |(a, b), (_, &x)| (a.min(x), b.max(x)),
            );
            b - a
        })
        .collect();
    let mean = swings.iter().sum::<f64>() / 3.0;
    let spread = swings.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x))
        - swings.iter().fold(f64::INFINITY, |m, &x| m.min(x));
    let converged = mean > opts.amplitude_floor && spread <= opts.rel_tol * mean;
    LimitCycleReport {
        converged,
        inconclusive: false,
        period: Some(period),
        amplitude: mean,
        tail,
        peaks,
        troughs,
    }
}

/// Smallest number `m` of maxima per cycle such that, over the last two
/// cycles, every peak value repeats the one `m` peaks earlier within `tol`.
/// A waveform with several humps per period has `m > 1`.
fn pattern_length(peaks: &[(f64, f64)], tol: f64) -> Option<usize> {
    let n = peaks.len();
    // three full cycles plus the closing peak
    (1..=(n.saturating_sub(1)) / 3).find(|&m| {
        (n - 2 * m..n).all(|i| (peaks[i].1 - peaks[i - m].1).abs() <= tol)
    })
}

/// Analyse the midpoint displacement of a trajectory over its trailing
/// `tail_fraction`, with the remaining options at their defaults.
pub fn detect_limit_cycle(traj: &Trajectory, tail_fraction: f64) -> LimitCycleReport {
    let opts = LimitCycleOptions {
        tail_fraction,
        ..Default::default()
    };
    detect_limit_cycle_with(traj, &opts)
}

pub fn detect_limit_cycle_with(traj: &Trajectory, opts: &LimitCycleOptions) -> LimitCycleReport {
    detect_limit_cycle_series(&traj.times(), &traj.u_mid(), opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sine_period_and_amplitude() {
        let t: Vec<f64> = (0..=2000).map(|i| i as f64 * 0.01).collect();
        let u: Vec<f64> = t.iter().map(|&x| (2.0 * PI * x).sin()).collect();
        let r = detect_limit_cycle_series(&t, &u, &LimitCycleOptions::default());
        assert!(r.converged);
        assert!((r.period.unwrap() - 1.0).abs() < 1e-3);
        assert!((r.amplitude - 2.0).abs() < 1e-3);
    }

    #[test]
    fn decaying_signal_not_converged() {
        let t: Vec<f64> = (0..=2000).map(|i| i as f64 * 0.01).collect();
        let u: Vec<f64> = t.iter().map(|&x| (-0.5 * x).exp() * (2.0 * PI * x).sin()).collect();
        let r = detect_limit_cycle_series(&t, &u, &LimitCycleOptions::default());
        assert!(!r.converged && !r.inconclusive);
    }

    #[test]
    fn multi_hump_cycle() {
        let t: Vec<f64> = (0..=8000).map(|i| i as f64 * 0.0025).collect();
        let f = |x: f64| (2.0 * PI * x).sin() + 0.6 * (6.0 * PI * x).sin();
        let u: Vec<f64> = t.iter().map(|&x| f(x)).collect();
        let r = detect_limit_cycle_series(&t, &u, &LimitCycleOptions::default());
        assert!(r.converged);
        assert!((r.period.unwrap() - 1.0).abs() < 1e-3, "{:?}", r.period);
        let (lo, hi) = t
            .iter()
            .map(|&x| f(x))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
        assert!((r.amplitude - (hi - lo)).abs() < 1e-3);
    }

    #[test]
    fn flat_signal_inconclusive() {
        let t: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let r = detect_limit_cycle_series(&t, &vec![0.0; 100], &LimitCycleOptions::default());
        assert!(r.inconclusive && !r.converged);
        assert_eq!(r.amplitude, 0.0);
    }

    #[test]
    fn vertex_exact_on_parabola() {
        let f = |x: f64| -3.0 * (x - 0.37) * (x - 0.37) + 2.0;
        let (tv, yv) = vertex([0.3, 0.35, 0.42], [f(0.3), f(0.35), f(0.42)]);
        assert!((tv - 0.37).abs() < 1e-12 && (yv - 2.0).abs() < 1e-12);
    }
}
