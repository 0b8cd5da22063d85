//! Tridiagonal matrices with two corner couplings and their direct solve.
//!
//! The eliminated ghost points couple row 0 to column `N-1` and row `N` to
//! column 1, so every operator in this crate has the shape
//!
//! ```text
//! d0 u0 .  .  .  c0 .
//! l1 d1 u1 .  .  .  .
//! .  .  .  .  .  .  .
//! .  cN .  .  .  lN dN
//! ```
//!
//! The solve splits the matrix into its tridiagonal part plus a rank-2
//! correction and applies the Sherman-Morrison-Woodbury identity, falling back
//! to dense partial-pivoting elimination when the tridiagonal part has a
//! vanishing pivot.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("matrix is singular to working precision (size {size})")]
    Singular { size: usize },
    #[error("right-hand side has length {got}, expected {expected}")]
    Length { got: usize, expected: usize },
}

/// Square matrix of size `n = N + 1` with tridiagonal band plus entries at
/// `(0, N-1)` and `(N, 1)`. Requires `N >= 4` so the corners stay off-band.
#[derive(Debug, Clone, PartialEq)]
pub struct BorderedTridiagonal {
    /// `lower[j]` multiplies `u[j-1]` in row `j`; `lower[0]` is unused.
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    /// `upper[j]` multiplies `u[j+1]` in row `j`; `upper[N]` is unused.
    pub upper: Vec<f64>,
    /// Row 0, column `N-1`.
    pub top_corner: f64,
    /// Row `N`, column 1.
    pub bottom_corner: f64,
}

const PIVOT_EPS: f64 = 1e-13;

impl BorderedTridiagonal {
    pub fn zeros(size: usize) -> Self {
        assert!(size >= 5, "bordered tridiagonal needs at least 5 rows");
        Self {
            lower: vec![0.0; size],
            diag: vec![0.0; size],
            upper: vec![0.0; size],
            top_corner: 0.0,
            bottom_corner: 0.0,
        }
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    /// Returns `alpha I + scale * self`.
    pub fn shifted(&self, alpha: f64, scale: f64) -> Self {
        let mut out = self.clone();
        for (d, &s) in out.diag.iter_mut().zip(&self.diag) {
            *d = alpha + scale * s;
        }
        for (l, &s) in out.lower.iter_mut().zip(&self.lower) {
            *l = scale * s;
        }
        for (u, &s) in out.upper.iter_mut().zip(&self.upper) {
            *u = scale * s;
        }
        out.top_corner = scale * self.top_corner;
        out.bottom_corner = scale * self.bottom_corner;
        out
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let last = self.size() - 1;
        let mut v = 0.0;
        if row == col {
            v += self.diag[row];
        }
        if row >= 1 && col + 1 == row {
            v += self.lower[row];
        }
        if row < last && col == row + 1 {
            v += self.upper[row];
        }
        if row == 0 && col == last - 1 {
            v += self.top_corner;
        }
        if row == last && col == 1 {
            v += self.bottom_corner;
        }
        v
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.size();
        (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.size();
        assert_eq!(x.len(), n, "matvec length mismatch");
        let last = n - 1;
        let mut y = Vec::with_capacity(n);
        for j in 0..n {
            let mut acc = self.diag[j] * x[j];
            if j > 0 {
                acc += self.lower[j] * x[j - 1];
            }
            if j < last {
                acc += self.upper[j] * x[j + 1];
            }
            y.push(acc);
        }
        y[0] += self.top_corner * x[last - 1];
        y[last] += self.bottom_corner * x[1];
        y
    }

    /// Row-wise strict diagonal dominance.
    pub fn is_diagonally_dominant(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| {
            let off: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| self.get(i, j).abs())
                .sum();
            self.diag[i].abs() > off
        })
    }

    /// Solves `self * x = rhs` directly.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, SolveError> {
        let n = self.size();
        if rhs.len() != n {
            return Err(SolveError::Length {
                got: rhs.len(),
                expected: n,
            });
        }
        match self.solve_woodbury(rhs) {
            Some(x) => Ok(x),
            None => dense_solve(self.to_dense(), rhs.to_vec()),
        }
    }

    fn solve_woodbury(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        let n = self.size();
        let last = n - 1;
        let thomas = Thomas::factor(&self.lower, &self.diag, &self.upper)?;

        // M = T + U V^T with U = [e_0, e_N], V = [top * e_{N-1}, bottom * e_1].
        let y = thomas.solve(rhs);
        let mut e0 = vec![0.0; n];
        e0[0] = 1.0;
        let z0 = thomas.solve(&e0);
        let mut en = vec![0.0; n];
        en[last] = 1.0;
        let zn = thomas.solve(&en);

        let (a, b) = (self.top_corner, self.bottom_corner);
        let c00 = 1.0 + a * z0[last - 1];
        let c01 = a * zn[last - 1];
        let c10 = b * z0[1];
        let c11 = 1.0 + b * zn[1];
        let det = c00 * c11 - c01 * c10;
        let scale = c00.abs().max(c11.abs()).max(c01.abs()).max(c10.abs());
        if !(det.abs() > PIVOT_EPS * scale * scale) {
            return None;
        }
        let g0 = a * y[last - 1];
        let g1 = b * y[1];
        let w0 = (c11 * g0 - c01 * g1) / det;
        let w1 = (c00 * g1 - c10 * g0) / det;
        Some(
            y.iter()
                .zip(z0.iter().zip(&zn))
                .map(|(&yi, (&p, &q))| yi - p * w0 - q * w1)
                .collect(),
        )
    }
}

/// LU factors of a tridiagonal matrix (no pivoting).
struct Thomas {
    lower: Vec<f64>,
    pivots: Vec<f64>,
    upper: Vec<f64>,
}

impl Thomas {
    fn factor(lower: &[f64], diag: &[f64], upper: &[f64]) -> Option<Self> {
        let n = diag.len();
        let mut pivots = Vec::with_capacity(n);
        let scale = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let mut prev = diag[0];
        if !(prev.abs() > PIVOT_EPS * scale) {
            return None;
        }
        pivots.push(prev);
        for j in 1..n {
            prev = diag[j] - lower[j] * upper[j - 1] / prev;
            if !(prev.abs() > PIVOT_EPS * scale) {
                return None;
            }
            pivots.push(prev);
        }
        Some(Self {
            lower: lower.to_vec(),
            pivots,
            upper: upper.to_vec(),
        })
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.pivots.len();
        let mut x = rhs.to_vec();
        for j in 1..n {
            x[j] -= self.lower[j] / self.pivots[j - 1] * x[j - 1];
        }
        x[n - 1] /= self.pivots[n - 1];
        for j in (0..n - 1).rev() {
            x[j] = (x[j] - self.upper[j] * x[j + 1]) / self.pivots[j];
        }
        x
    }
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>, SolveError> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap_or(k);
        if !(a[p][k].abs() > PIVOT_EPS * scale) {
            return Err(SolveError::Singular { size: n });
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let m = a[i][k] / a[k][k];
            if m != 0.0 {
                let (top, bottom) = a.split_at_mut(i);
                for (x, pivot) in bottom[0][k..].iter_mut().zip(&top[k][k..]) {
                    *x -= m * pivot;
                }
                b[i] -= m * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Ok(x)
}
