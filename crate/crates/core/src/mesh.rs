use crate::error::{Error, Result};

/// Smallest admissible cell count: the five-point stencil with its ghost
/// closure needs at least three interior nodes on each side of the centre.
pub const MIN_CELLS: usize = 8;

/// Uniform grid `x_i = i dx`, `i = 0..=n_cells`. Unknowns live at the
/// interior nodes `1..n_cells`; the clamped end values are eliminated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    ell: f64,
    n_cells: usize,
    dx: f64,
}

impl Mesh {
    pub fn new(ell: f64, n_cells: usize) -> Result<Self> {
        if !(ell > 0.0) || !ell.is_finite() {
            return Err(Error::param("ell", "must be positive and finite"));
        }
        if n_cells < MIN_CELLS {
            return Err(Error::MeshTooCoarse(n_cells));
        }
        Ok(Mesh {
            ell,
            n_cells,
            dx: ell / n_cells as f64,
        })
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn interior_len(&self) -> usize {
        self.n_cells - 1
    }

    /// Coordinate of interior unknown `j` (node `j + 1`).
    pub fn interior_x(&self, j: usize) -> f64 {
        (j + 1) as f64 * self.dx
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.interior_len()).map(move |j| self.interior_x(j))
    }

    /// Interior index of the node nearest `ell / 2`.
    pub fn mid_index(&self) -> usize {
        // node n_cells / 2 is interior index n_cells / 2 - 1
        (self.n_cells / 2).clamp(1, self.n_cells - 1) - 1
    }

    /// Evaluate `f` at the interior nodes.
    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.interior_nodes().map(f).collect()
    }
}
