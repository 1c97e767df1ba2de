//! Square banded matrices, banded LU with partial pivoting, and a
//! Sherman–Morrison solve for banded-plus-symmetric-rank-one systems.

use crate::error::{Error, Result};

/// Square `n x n` matrix with `kl` sub- and `ku` super-diagonals, stored
/// row by row: entry `(i, j)` lives at `data[i * width + (j + kl - i)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        BandMatrix {
            n,
            kl,
            ku,
            data: vec![0.0; n * (kl + ku + 1)],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, 0, 0);
        m.data.fill(1.0);
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lower(&self) -> usize {
        self.kl
    }

    pub fn upper(&self) -> usize {
        self.ku
    }

    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i < self.n && j < self.n && self.in_band(i, j) {
            self.data[i * self.width() + j + self.kl - i]
        } else {
            0.0
        }
    }

    /// Panics if `(i, j)` is outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.n && j < self.n && self.in_band(i, j), "({i}, {j}) outside band");
        let w = self.width();
        self.data[i * w + j + self.kl - i] = v;
    }

    /// Column range of row `i` inside the band.
    fn row_cols(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.kl)..(i + self.ku + 1).min(self.n)
    }

    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(out.len(), self.n);
        let (n, kl, ku, w) = (self.n, self.kl, self.ku, self.width());
        let edge = |i: usize| -> f64 {
            let cols = self.row_cols(i);
            let off = cols.start + kl - i;
            let row = &self.data[i * w + off..i * w + off + cols.len()];
            row.iter().zip(&x[cols]).map(|(a, b)| a * b).sum()
        };
        if n < w {
            for (i, o) in out.iter_mut().enumerate() {
                *o = edge(i);
            }
            return;
        }
        for (i, o) in out.iter_mut().enumerate().take(kl) {
            *o = edge(i);
        }
        for (i, o) in out.iter_mut().enumerate().skip(n - ku) {
            *o = edge(i);
        }
        // full rows: band and window of x have equal length w
        for ((o, row), xs) in out[kl..n - ku]
            .iter_mut()
            .zip(self.data[kl * w..(n - ku) * w].chunks_exact(w))
            .zip(x.windows(w))
        {
            let mut acc = 0.0;
            for k in 0..w {
                acc += row[k] * xs[k];
            }
            *o = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.mul_vec_into(x, &mut out);
        out
    }

    pub fn transpose(&self) -> BandMatrix {
        let mut t = BandMatrix::zeros(self.n, self.ku, self.kl);
        for i in 0..self.n {
            for j in self.row_cols(i) {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| self.row_cols(i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// `sum_m c_m A_m`, with the band wide enough for every term.
    pub fn combine(terms: &[(f64, &BandMatrix)]) -> BandMatrix {
        assert!(!terms.is_empty());
        let n = terms[0].1.n;
        let kl = terms.iter().map(|(_, m)| m.kl).max().unwrap();
        let ku = terms.iter().map(|(_, m)| m.ku).max().unwrap();
        let mut out = BandMatrix::zeros(n, kl, ku);
        let w = out.width();
        for &(c, m) in terms {
            assert_eq!(m.n, n, "dimension mismatch");
            if c == 0.0 {
                continue;
            }
            for i in 0..n {
                for j in m.row_cols(i) {
                    out.data[i * w + j + kl - i] += c * m.get(i, j);
                }
            }
        }
        out
    }

    /// Overwrite `self` with `sum_m c_m A_m`. The band of `self` must cover
    /// every term.
    pub fn assign_combination(&mut self, terms: &[(f64, &BandMatrix)]) {
        self.data.fill(0.0);
        let (kl, w) = (self.kl, self.width());
        for &(c, m) in terms {
            assert!(m.n == self.n && m.kl <= self.kl && m.ku <= self.ku, "band mismatch");
            if c == 0.0 {
                continue;
            }
            for i in 0..self.n {
                for j in m.row_cols(i) {
                    self.data[i * w + j + kl - i] += c * m.get(i, j);
                }
            }
        }
    }

    /// Add `c` to every diagonal entry.
    pub fn add_diagonal(&mut self, c: f64) {
        let (kl, w) = (self.kl, self.width());
        for i in 0..self.n {
            self.data[i * w + kl] += c;
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

/// LU factors of a band matrix with row interchanges. The upper factor has
/// bandwidth `ku + kl` to hold pivoting fill-in.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    uw: usize,
    // row i holds columns i - kl ..= i + kl + ku
    data: Vec<f64>,
    piv: Vec<usize>,
    inv_diag: Vec<f64>,
}

impl BandLu {
    pub fn factor(a: &BandMatrix) -> Result<Self> {
        let mut lu = BandLu {
            n: a.n,
            kl: a.kl,
            uw: a.ku + a.kl,
            data: Vec::new(),
            piv: Vec::new(),
            inv_diag: Vec::new(),
        };
        lu.refactor(a)?;
        Ok(lu)
    }

    /// Factor `a` into this object, reusing its storage.
    pub fn refactor(&mut self, a: &BandMatrix) -> Result<()> {
        let n = a.n;
        let kl = a.kl;
        let uw = a.ku + a.kl;
        let w = kl + uw + 1;
        self.n = n;
        self.kl = kl;
        self.uw = uw;
        let mut data = std::mem::take(&mut self.data);
        data.clear();
        data.resize(n * w, 0.0);
        let mut piv = std::mem::take(&mut self.piv);
        piv.clear();
        piv.resize(n, 0);
        for i in 0..n {
            for j in a.row_cols(i) {
                data[i * w + j + kl - i] = a.get(i, j);
            }
        }
        let idx = |i: usize, j: usize| i * w + j + kl - i;
        let scale = data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tiny = scale * f64::EPSILON * n as f64;

        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = data[idx(k, k)].abs();
            for i in k + 1..=last {
                let v = data[idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            piv[k] = p;
            if !(best > tiny) {
                self.data = data;
                self.piv = piv;
                return Err(Error::Singular { row: k });
            }
            let jmax = (k + uw).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    data.swap(idx(k, j), idx(p, j));
                }
            }
            let pivot = data[idx(k, k)];
            for i in k + 1..=last {
                let l = data[idx(i, k)] / pivot;
                data[idx(i, k)] = l;
                if l != 0.0 {
                    for j in k + 1..=jmax {
                        data[idx(i, j)] -= l * data[idx(k, j)];
                    }
                }
            }
        }
        self.inv_diag.clear();
        self.inv_diag.extend((0..n).map(|i| 1.0 / data[idx(i, i)]));
        self.data = data;
        self.piv = piv;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Overwrite `b` with `A^{-1} b`.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let (n, kl, uw) = (self.n, self.kl, self.uw);
        let w = kl + uw + 1;
        for (k, &p) in self.piv.iter().enumerate() {
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            let last = (k + kl).min(n - 1);
            // multiplier l_ik sits at offset kl - (i - k) of row i
            for (d, bi) in b[k + 1..=last].iter_mut().enumerate() {
                let i = k + 1 + d;
                *bi -= self.data[i * w + kl - 1 - d] * bk;
            }
        }
        for i in (0..n).rev() {
            let row = &self.data[i * w..(i + 1) * w];
            let hi = (i + uw).min(n - 1);
            let mut acc = b[i];
            for (a, x) in row[kl + 1..=kl + hi - i].iter().zip(&b[i + 1..=hi]) {
                acc -= a * x;
            }
            b[i] = acc * self.inv_diag[i];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Solve `(A + alpha z z^T) x = rhs` given the factors of `A`.
///
/// Returns `Error::Singular` when the rank-one update makes the system
/// (numerically) singular, i.e. `1 + alpha z^T A^{-1} z` vanishes.
pub fn solve_rank_one(lu: &BandLu, alpha: f64, z: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let mut y = lu.solve(rhs);
    if alpha == 0.0 {
        return Ok(y);
    }
    let w = lu.solve(z);
    let zw: f64 = z.iter().zip(&w).map(|(a, b)| a * b).sum();
    let zy: f64 = z.iter().zip(&y).map(|(a, b)| a * b).sum();
    let denom = 1.0 + alpha * zw;
    if !(denom.abs() > 1e-13 * (1.0 + (alpha * zw).abs())) {
        return Err(Error::Singular { row: lu.dim() });
    }
    let c = alpha * zy / denom;
    for (yi, wi) in y.iter_mut().zip(&w) {
        *yi -= c * wi;
    }
    Ok(y)
}
