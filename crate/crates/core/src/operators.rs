//! Second-order finite-difference operators on the interior nodes with
//! clamped closures (`u_0 = u_N = 0`, ghost values `u_{-1} = u_1`,
//! `u_{N+1} = u_{N-1}`).

use crate::banded::BandMatrix;
use crate::mesh::Mesh;

#[derive(Debug, Clone)]
pub struct DiscreteOperators {
    /// Central first derivative, skew-symmetric.
    pub d1: BandMatrix,
    /// Central second derivative, symmetric negative definite.
    pub d2: BandMatrix,
    /// Five-point fourth derivative, symmetric positive definite.
    pub d4: BandMatrix,
    /// Trapezoid weights on the interior nodes (all equal to `dx`).
    pub ip_weights: Vec<f64>,
}

impl DiscreteOperators {
    pub fn new(mesh: &Mesh) -> Self {
        let n = mesh.interior_len();
        let dx = mesh.dx();
        let (h1, h2, h4) = (1.0 / (2.0 * dx), 1.0 / (dx * dx), 1.0 / dx.powi(4));

        let mut d1 = BandMatrix::zeros(n, 1, 1);
        let mut d2 = BandMatrix::zeros(n, 1, 1);
        let mut d4 = BandMatrix::zeros(n, 2, 2);
        for i in 0..n {
            d2.set(i, i, -2.0 * h2);
            d4.set(i, i, 6.0 * h4);
            if i > 0 {
                d1.set(i, i - 1, -h1);
                d2.set(i, i - 1, h2);
                d4.set(i, i - 1, -4.0 * h4);
            }
            if i + 1 < n {
                d1.set(i, i + 1, h1);
                d2.set(i, i + 1, h2);
                d4.set(i, i + 1, -4.0 * h4);
            }
            if i > 1 {
                d4.set(i, i - 2, h4);
            }
            if i + 2 < n {
                d4.set(i, i + 2, h4);
            }
        }
        // ghost reflection folds u_{-1} = u_1 into the first and last rows
        d4.set(0, 0, 7.0 * h4);
        d4.set(n - 1, n - 1, 7.0 * h4);

        DiscreteOperators {
            d1,
            d2,
            d4,
            ip_weights: vec![dx; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.ip_weights.len()
    }

    /// Discrete L2 inner product `(a, b)_h`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.ip_weights
            .iter()
            .zip(a.iter().zip(b))
            .map(|(w, (x, y))| w * x * y)
            .sum()
    }

    pub fn norm_sq(&self, a: &[f64]) -> f64 {
        self.inner(a, a)
    }
}
