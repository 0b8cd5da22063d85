//! Uniform grid on `[0, 1]`, centered stencils and ghost-point elimination.
//!
//! The coupled boundary conditions relate the two ends of the interval:
//!
//! ```text
//! (1 - theta) * avg_right = avg_left
//! diff_right             = (1 - theta) * diff_left
//! ```
//!
//! where `avg_right = (u[N+1] + u[N-1]) / 2`, `avg_left = (u[1] + u[-1]) / 2`
//! and `diff_*` are the matching centered differences. Both ghost values are
//! eliminated in closed form, so operators act on the `N + 1` physical nodes.

use crate::linalg::BorderedTridiagonal;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid needs at least 4 intervals, got {0}")]
    TooCoarse(usize),
    #[error("theta = {0} outside [0, 1]")]
    Theta(f64),
    #[error("vector has {got} entries, grid has {expected} nodes")]
    Length { got: usize, expected: usize },
}

/// `N` intervals of width `1/N`, nodes `x_j = j / N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    n: usize,
}

impl GridSpec {
    pub fn new(n: usize) -> Result<Self, GridError> {
        if n < 4 {
            return Err(GridError::TooCoarse(n));
        }
        Ok(Self { n })
    }

    /// Interval count `N`.
    pub fn intervals(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> usize {
        self.n + 1
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 / self.n as f64
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..=self.n).map(|j| self.x(j)).collect()
    }

    pub fn check_len(&self, len: usize) -> Result<(), GridError> {
        if len != self.nodes() {
            return Err(GridError::Length {
                got: len,
                expected: self.nodes(),
            });
        }
        Ok(())
    }
}

/// Values at the synthetic nodes `x_{N+1} = 1 + dx` and `x_{-1} = -dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhostPair {
    pub u_right_ghost: f64,
    pub u_left_ghost: f64,
}

fn check_theta(theta: f64) -> Result<(), GridError> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(GridError::Theta(theta));
    }
    Ok(())
}

/// Coefficients `(c_nm1, c_1)` with `u[N+1] = c_nm1 u[N-1] + c_1 u[1]` and the
/// same for `u[-1]`.
fn ghost_weights(theta: f64) -> ((f64, f64), (f64, f64)) {
    let a = 1.0 - theta;
    let d = 1.0 + a * a;
    let right = ((1.0 - a * a) / d, 2.0 * a / d);
    let left = (2.0 * a / d, (a * a - 1.0) / d);
    (right, left)
}

/// Closed-form solution of the two discrete boundary relations for the ghosts.
pub fn ghost_values(theta: f64, u1: f64, u_nm1: f64) -> Result<GhostPair, GridError> {
    check_theta(theta)?;
    let ((r_nm1, r_1), (l_nm1, l_1)) = ghost_weights(theta);
    Ok(GhostPair {
        u_right_ghost: r_nm1 * u_nm1 + r_1 * u1,
        u_left_ghost: l_nm1 * u_nm1 + l_1 * u1,
    })
}

/// Residuals of the discrete boundary relations, with the derivative relation
/// multiplied through by `2 dx`.
pub fn boundary_residuals(theta: f64, ghosts: GhostPair, u1: f64, u_nm1: f64) -> (f64, f64) {
    let right_sum = ghosts.u_right_ghost + u_nm1;
    let left_sum = u1 + ghosts.u_left_ghost;
    let trace = right_sum / 2.0 - left_sum / 2.0 - theta * right_sum / 2.0;
    let right_diff = ghosts.u_right_ghost - u_nm1;
    let left_diff = u1 - ghosts.u_left_ghost;
    let flux = right_diff - left_diff + theta * left_diff;
    (trace, flux)
}

/// Matrix of `u -> nu u_xx - c u_x` on all `N + 1` nodes with the ghosts
/// eliminated through [`ghost_values`].
pub fn spatial_operator(
    grid: &GridSpec,
    nu: f64,
    c: f64,
    theta: f64,
) -> Result<BorderedTridiagonal, GridError> {
    check_theta(theta)?;
    let n = grid.intervals();
    let dx = grid.dx();
    let diffusion = nu / (dx * dx);
    let advection = c / (2.0 * dx);
    let lo = diffusion + advection;
    let up = diffusion - advection;
    let di = -2.0 * diffusion;

    let mut op = BorderedTridiagonal::zeros(n + 1);
    op.diag.fill(di);
    for j in 1..=n {
        op.lower[j] = lo;
    }
    for j in 0..n {
        op.upper[j] = up;
    }
    let ((r_nm1, r_1), (l_nm1, l_1)) = ghost_weights(theta);
    // row 0: lo * u[-1] folds into columns 1 and N-1
    op.upper[0] += lo * l_1;
    op.top_corner = lo * l_nm1;
    // row N: up * u[N+1] folds into columns N-1 and 1
    op.lower[n] += up * r_nm1;
    op.bottom_corner = up * r_1;
    Ok(op)
}

/// Trapezoid-rule mean over `[0, 1]`.
pub fn spatial_average(grid: &GridSpec, u: &[f64]) -> Result<f64, GridError> {
    grid.check_len(u.len())?;
    let n = grid.intervals();
    let inner: f64 = u[1..n].iter().sum();
    Ok(grid.dx() * (0.5 * u[0] + inner + 0.5 * u[n]))
}

/// Trapezoid weights, the mass matrix of [`spatial_average`].
pub fn trapezoid_weights(grid: &GridSpec) -> Vec<f64> {
    let dx = grid.dx();
    let mut w = vec![dx; grid.nodes()];
    w[0] = 0.5 * dx;
    w[grid.intervals()] = 0.5 * dx;
    w
}
