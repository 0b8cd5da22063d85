//! Numerical checks of the structural properties the scheme relies on.
//!
//! Every check returns a [`CheckReport`]; random inputs are drawn from a
//! seeded ChaCha stream and the seed is stored in the report.

use crate::discretization::{
    boundary_residuals, ghost_values, spatial_operator, trapezoid_weights, GridError, GridSpec,
};
use crate::stepper::{advance_field, StepError};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Minimum observed order for every refinement check.
pub const MIN_ORDER: f64 = 1.8;
/// Relative residual allowed for the ghost-point relations.
pub const GHOST_TOL: f64 = 1e-13;
/// Allowed deviation of the resolvent pole moduli from 1.
pub const POLE_TOL: f64 = 1e-12;
/// Extension values satisfy `|v| <= |a||u(x)| + |b||u(1-x)|` with
/// `|a| <= 1/2`, `|b| <= 1` for every `alpha`, hence this L2 bound.
pub const EXTENSION_L2_BOUND: f64 = 1.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("theta = {0} rejected: the check needs theta in (0, 1]")]
    Theta(f64),
    #[error("sample violates the trace relation (residual {0:e})")]
    BoundaryViolation(f64),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("unknown suite `{0}`")]
    Suite(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    /// `measured <= tolerance`
    AtMost,
    /// `measured >= tolerance`
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub seed: u64,
    pub details: String,
}

impl CheckReport {
    fn new(
        name: impl Into<String>,
        measured: f64,
        tolerance: f64,
        comparison: Comparison,
        seed: u64,
        details: String,
    ) -> Self {
        let passed = match comparison {
            Comparison::AtMost => measured <= tolerance,
            Comparison::AtLeast => measured >= tolerance,
        };
        Self {
            name: name.into(),
            passed,
            measured,
            tolerance,
            comparison,
            seed,
            details,
        }
    }

    /// Forces a failure regardless of `measured`.
    fn fail_with(mut self, why: &str) -> Self {
        self.passed = false;
        if !self.details.is_empty() {
            self.details.push_str("; ");
        }
        self.details.push_str(why);
        self
    }
}

/// Result of fitting `err ~ C h^p` on a refinement ladder.
#[derive(Debug, Clone, PartialEq)]
pub enum Convergence {
    /// Every error is at or below the round-off floor.
    Exact,
    Order(f64),
}

impl Convergence {
    pub fn passes(&self, min_order: f64) -> bool {
        match self {
            Convergence::Exact => true,
            Convergence::Order(p) => *p >= min_order,
        }
    }

    pub fn order_or(&self, exact: f64) -> f64 {
        match self {
            Convergence::Exact => exact,
            Convergence::Order(p) => *p,
        }
    }
}

impl fmt::Display for Convergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Convergence::Exact => f.write_str("exact"),
            Convergence::Order(p) => write!(f, "order {p:.3}"),
        }
    }
}

/// Least-squares slope of `log err` against `log h`.
pub fn observed_order(h: &[f64], err: &[f64]) -> f64 {
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Fits an order to the levels whose error lies above `floor[k]`; all levels
/// at the floor count as exact.
pub fn classify_convergence(h: &[f64], err: &[f64], floor: &[f64]) -> Convergence {
    let above: Vec<usize> = (0..h.len()).filter(|&k| err[k] > floor[k]).collect();
    if above.is_empty() {
        return Convergence::Exact;
    }
    // errors that drop to round-off part way down the ladder only help
    let last = *above.last().unwrap();
    let hs: Vec<f64> = h[..=last].to_vec();
    let es: Vec<f64> = (0..=last).map(|k| err[k].max(floor[k])).collect();
    if hs.len() < 2 {
        return Convergence::Order(f64::INFINITY);
    }
    Convergence::Order(observed_order(&hs, &es))
}

fn pairwise_orders(h: &[f64], err: &[f64]) -> String {
    h.windows(2)
        .zip(err.windows(2))
        .map(|(hw, ew)| format!("{:.3}", (ew[0] / ew[1]).ln() / (hw[0] / hw[1]).ln()))
        .collect::<Vec<_>>()
        .join(",")
}

// ---------------------------------------------------------------------------
// ghost identity

/// Substitutes random ghost pairs back into both boundary relations.
pub fn check_ghost_identity(samples: usize, seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut worst_at = (0.0, 0.0, 0.0);
    for _ in 0..samples.max(1) {
        let theta = rng.random_range(0.0..=1.0);
        let u1 = rng.random_range(-10.0..10.0);
        let unm1 = rng.random_range(-10.0..10.0);
        let r = ghost_relative_residual(theta, u1, unm1);
        if r > worst {
            worst = r;
            worst_at = (theta, u1, unm1);
        }
    }
    CheckReport::new(
        "ghost",
        worst,
        GHOST_TOL,
        Comparison::AtMost,
        seed,
        format!(
            "{samples} samples; worst at theta={:.6}, u1={:.6}, u_nm1={:.6}",
            worst_at.0, worst_at.1, worst_at.2
        ),
    )
}

/// Largest residual of the two boundary relations, relative to the largest
/// value entering them.
pub fn ghost_relative_residual(theta: f64, u1: f64, unm1: f64) -> f64 {
    let g = ghost_values(theta, u1, unm1).expect("theta drawn from [0, 1]");
    let (r1, r2) = boundary_residuals(theta, g, u1, unm1);
    let scale = [u1, unm1, g.u_left_ghost, g.u_right_ghost]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return r1.abs().max(r2.abs());
    }
    r1.abs().max(r2.abs()) / scale
}

// ---------------------------------------------------------------------------
// resolvent poles

/// Moduli of `p^± = (1 ± (1-theta) i) / ((1-theta) ± i)`.
pub fn pole_modulus(theta: f64) -> (f64, f64) {
    let a = 1.0 - theta;
    let plus = Complex64::new(1.0, a) / Complex64::new(a, 1.0);
    let minus = Complex64::new(1.0, -a) / Complex64::new(a, -1.0);
    (plus.norm(), minus.norm())
}

pub fn check_poles(points: usize) -> CheckReport {
    let points = points.max(2);
    let worst = (0..points)
        .map(|k| k as f64 / (points - 1) as f64)
        .map(|theta| {
            let (a, b) = pole_modulus(theta);
            (a - 1.0).abs().max((b - 1.0).abs())
        })
        .fold(0.0f64, f64::max);
    CheckReport::new(
        "poles",
        worst,
        POLE_TOL,
        Comparison::AtMost,
        0,
        format!("{points}-point theta grid on [0, 1]"),
    )
}

// ---------------------------------------------------------------------------
// polynomial samples obeying the continuous boundary relations

/// Polynomial in monomial coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.0.is_empty() || other.0.is_empty() {
            return Poly(Vec::new());
        }
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    /// Exact integral over `[0, 1]`.
    pub fn integral01(&self) -> f64 {
        self.0
            .iter()
            .enumerate()
            .map(|(k, c)| c / (k + 1) as f64)
            .sum()
    }

    pub fn sample(&self, grid: &GridSpec) -> Vec<f64> {
        grid.coordinates().iter().map(|&x| self.eval(x)).collect()
    }
}

/// Values and slopes `(p(0), p(1), p'(0), p'(1))` of a smooth profile.
fn boundary_data(p: &Poly) -> (f64, f64, f64, f64) {
    let d = p.derivative();
    (p.eval(0.0), p.eval(1.0), d.eval(0.0), d.eval(1.0))
}

/// Coefficients `(c0, c1)` such that `p + c0 + c1 x` satisfies
/// `(1-theta) q(1) = q(0)` and `q'(1) = (1-theta) q'(0)`. Needs `theta > 0`.
pub fn linear_correction(theta: f64, p0: f64, p1: f64, dp0: f64, dp1: f64) -> (f64, f64) {
    let a = 1.0 - theta;
    let c1 = (a * dp0 - dp1) / theta;
    let c0 = -(p0 - a * p1 - a * c1) / theta;
    (c0, c1)
}

/// Random polynomial of degree `degree` satisfying both boundary relations.
pub fn compatible_polynomial(theta: f64, degree: usize, rng: &mut impl Rng) -> Poly {
    let mut coeffs = vec![0.0; degree + 1];
    for c in coeffs.iter_mut().skip(2) {
        *c = rng.random_range(-1.0..1.0);
    }
    let mut p = Poly(coeffs);
    let (p0, p1, dp0, dp1) = boundary_data(&p);
    let (c0, c1) = linear_correction(theta, p0, p1, dp0, dp1);
    p.0[0] += c0;
    p.0[1] += c1;
    p
}

// ---------------------------------------------------------------------------
// self-adjointness

/// Mass-weighted inner product; symmetric in its arguments bit for bit.
fn inner(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a.iter().zip(b)).map(|(w, (a, b))| w * (a * b)).sum()
}

/// Defects of the eliminated diffusion operator (`nu = 1`, `c = 0`) on one
/// pair of samples, normalised by the sample norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfAdjointDefects {
    /// `|<L phi, psi>_M - <phi, L psi>_M| / (|phi|_M |psi|_M)`
    pub symmetry: f64,
    /// `max(0, <L phi, phi>_M) / |phi|_M^2`
    pub negativity: f64,
}

pub fn selfadjoint_defects(
    theta: f64,
    grid: &GridSpec,
    phi: &[f64],
    psi: &[f64],
) -> Result<SelfAdjointDefects, VerifyError> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(VerifyError::Theta(theta));
    }
    grid.check_len(phi.len())?;
    grid.check_len(psi.len())?;
    let n = grid.intervals();
    for u in [phi, psi] {
        let scale = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let residual = ((1.0 - theta) * u[n] - u[0]).abs();
        if residual > 1e-12 * scale.max(f64::MIN_POSITIVE) || scale == 0.0 && residual > 0.0 {
            return Err(VerifyError::BoundaryViolation(residual));
        }
    }
    let op = spatial_operator(grid, 1.0, 0.0, theta)?;
    let w = trapezoid_weights(grid);
    let (lphi, lpsi) = (op.matvec(phi), op.matvec(psi));
    let norm = |u: &[f64]| inner(&w, u, u).sqrt();
    let (nphi, npsi) = (norm(phi), norm(psi));
    let denom = (nphi * npsi).max(f64::MIN_POSITIVE);
    let symmetry = (inner(&w, &lphi, psi) - inner(&w, phi, &lpsi)).abs() / denom;
    let negativity = inner(&w, &lphi, phi).max(0.0) / (nphi * nphi).max(f64::MIN_POSITIVE);
    Ok(SelfAdjointDefects {
        symmetry,
        negativity,
    })
}

/// Relative gap between the discrete energy `-<L phi, phi>_M` and the exact
/// Dirichlet integral of the sampled polynomial.
fn energy_defect(theta: f64, grid: &GridSpec, p: &Poly) -> Result<f64, VerifyError> {
    let op = spatial_operator(grid, 1.0, 0.0, theta)?;
    let w = trapezoid_weights(grid);
    let u = p.sample(grid);
    let discrete = -inner(&w, &op.matvec(&u), &u);
    let d = p.derivative();
    let exact = d.mul(&d).integral01();
    Ok((discrete - exact).abs() / exact.max(f64::MIN_POSITIVE))
}

/// Round-off floor for quantities built from `O(1/dx^2)` stencil entries.
fn stencil_floor(grid: &GridSpec) -> f64 {
    let n = grid.intervals() as f64;
    64.0 * f64::EPSILON * n * n
}

/// Symmetry, negativity and energy defects of the eliminated Laplacian on
/// `levels` successive halvings of `grid`, for `samples` random pairs of
/// boundary-compatible polynomials.
pub fn check_selfadjointness(
    theta: f64,
    grid: &GridSpec,
    samples: usize,
    seed: u64,
) -> Result<CheckReport, VerifyError> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(VerifyError::Theta(theta));
    }
    const LEVELS: usize = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(Poly, Poly)> = (0..samples.max(1))
        .map(|_| {
            (
                compatible_polynomial(theta, 6, &mut rng),
                compatible_polynomial(theta, 6, &mut rng),
            )
        })
        .collect();

    let mut h = Vec::new();
    let mut floors = Vec::new();
    let (mut sym, mut neg, mut energy) = (Vec::new(), Vec::new(), Vec::new());
    for level in 0..LEVELS {
        let g = GridSpec::new(grid.intervals() << level)?;
        let (mut s, mut ng, mut e) = (0.0f64, 0.0f64, 0.0f64);
        for (p, q) in &pairs {
            let (a, b) = (p.sample(&g), q.sample(&g));
            let d = selfadjoint_defects(theta, &g, &a, &b)?;
            let dd = selfadjoint_defects(theta, &g, &a, &a)?;
            s = s.max(d.symmetry);
            ng = ng.max(dd.negativity);
            e = e.max(energy_defect(theta, &g, p)?);
        }
        h.push(g.dx());
        floors.push(stencil_floor(&g));
        sym.push(s);
        neg.push(ng);
        energy.push(e);
    }
    let sym_conv = classify_convergence(&h, &sym, &floors);
    let neg_conv = classify_convergence(&h, &neg, &floors);
    let energy_conv = classify_convergence(&h, &energy, &[1e-13; LEVELS]);
    let worst = [&sym_conv, &neg_conv, &energy_conv]
        .iter()
        .map(|c| c.order_or(f64::INFINITY))
        .fold(f64::INFINITY, f64::min);
    let details = format!(
        "N={}..{}; symmetry {} (max {:.2e}); negativity {} (max {:.2e}); energy {} [{}]",
        grid.intervals(),
        grid.intervals() << (LEVELS - 1),
        sym_conv,
        sym.iter().fold(0.0f64, |m, v| m.max(*v)),
        neg_conv,
        neg.iter().fold(0.0f64, |m, v| m.max(*v)),
        energy_conv,
        pairwise_orders(&h, &energy),
    );
    Ok(CheckReport::new(
        format!("selfadjoint[theta={theta}]"),
        worst,
        MIN_ORDER,
        Comparison::AtLeast,
        seed,
        details,
    ))
}

// ---------------------------------------------------------------------------
// extension operator

/// Quintic smoothstep on `[0, 1]`, `C^2` at both ends.
fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (s * (6.0 * s - 15.0) + 10.0)
}

/// Right cutoff: 1 on `[7/8, 1]`, 0 on `[0, 3/4]`.
pub fn cutoff_right(x: f64) -> f64 {
    smoothstep((x - 0.75) * 8.0)
}

/// Left cutoff: 1 on `[0, 1/8]`, 0 on `[1/4, 1]`.
pub fn cutoff_left(x: f64) -> f64 {
    smoothstep((0.25 - x) * 8.0)
}

/// Reflection-plus-cutoff extension `E(u; alpha)` on the grid nodes. Near
/// `x = 1` it equals `(alpha u(x) + u(1-x)) / (1 + alpha^2)`, near `x = 0`
/// `(alpha u(x) - u(1-x)) / (1 + alpha^2)`, and vanishes in the middle half.
pub fn extension_operator(u: &[f64], alpha: f64, grid: &GridSpec) -> Result<Vec<f64>, VerifyError> {
    grid.check_len(u.len())?;
    let n = grid.intervals();
    let d = 1.0 + alpha * alpha;
    Ok((0..=n)
        .map(|j| {
            let x = grid.x(j);
            let (direct, mirror) = (alpha * u[j], u[n - j]);
            cutoff_right(x) * (direct + mirror) / d + cutoff_left(x) * (direct - mirror) / d
        })
        .collect())
}

/// Smooth test profile `sum a_k sin(k pi x + b_k)` with its exact derivative.
#[derive(Debug, Clone)]
struct TrigProfile {
    terms: Vec<(f64, f64, f64)>,
}

impl TrigProfile {
    fn random(rng: &mut impl Rng) -> Self {
        let terms = (1..=4)
            .map(|k| {
                (
                    rng.random_range(-1.0..1.0),
                    k as f64 * PI * rng.random_range(0.5..1.5),
                    rng.random_range(0.0..2.0 * PI),
                )
            })
            .collect();
        Self { terms }
    }

    fn value(&self, x: f64) -> f64 {
        self.terms.iter().map(|(a, k, b)| a * (k * x + b).sin()).sum()
    }

    fn slope(&self, x: f64) -> f64 {
        self.terms.iter().map(|(a, k, b)| a * k * (k * x + b).cos()).sum()
    }
}

/// One-sided second-order slopes at `x = 0` and `x = 1`.
fn one_sided_slopes(v: &[f64], dx: f64) -> (f64, f64) {
    let n = v.len() - 1;
    let left = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dx);
    let right = (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * dx);
    (left, right)
}

fn l2_norm(grid: &GridSpec, u: &[f64]) -> f64 {
    inner(&trapezoid_weights(grid), u, u).sqrt()
}

fn h1_norm(grid: &GridSpec, u: &[f64]) -> f64 {
    let dx = grid.dx();
    let grad: f64 = u.windows(2).map(|w| ((w[1] - w[0]) / dx).powi(2) * dx).sum();
    (l2_norm(grid, u).powi(2) + grad).sqrt()
}

/// Residuals of the two boundary identities of `E(u; alpha)` for one profile.
fn extension_residuals(profile: &TrigProfile, alpha: f64, grid: &GridSpec) -> (f64, f64, f64, f64) {
    let u: Vec<f64> = grid.coordinates().iter().map(|&x| profile.value(x)).collect();
    let v = extension_operator(&u, alpha, grid).expect("lengths match");
    let n = grid.intervals();
    let scale = u.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    let value_res = (alpha * v[n] - v[0] - u[n]).abs() / scale;
    let (dv0, dv1) = one_sided_slopes(&v, grid.dx());
    let slope_scale = profile.slope(0.0).abs().max(profile.slope(1.0).abs()).max(scale);
    let slope_res = (dv1 - alpha * dv0 + profile.slope(0.0)).abs() / slope_scale;
    let l2 = l2_norm(grid, &v) / l2_norm(grid, &u);
    let h1 = h1_norm(grid, &v) / h1_norm(grid, &u);
    (value_res, slope_res, l2, h1)
}

/// Boundary identities of the extension under refinement, and an
/// `alpha`-independent norm bound.
pub fn check_extension(alphas: &[f64], samples: usize, seed: u64) -> CheckReport {
    const BASE: usize = 16;
    const LEVELS: usize = 5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let profiles: Vec<TrigProfile> = (0..samples.max(1)).map(|_| TrigProfile::random(&mut rng)).collect();

    let mut h = Vec::new();
    let (mut value_res, mut slope_res) = (Vec::new(), Vec::new());
    let (mut l2_ratio, mut h1_ratio) = (0.0f64, 0.0f64);
    for level in 0..LEVELS {
        let grid = GridSpec::new(BASE << level).expect("base grid is valid");
        let (mut vr, mut sr) = (0.0f64, 0.0f64);
        for prof in &profiles {
            for &alpha in alphas {
                let (a, b, l2, h1) = extension_residuals(prof, alpha, &grid);
                vr = vr.max(a);
                sr = sr.max(b);
                l2_ratio = l2_ratio.max(l2);
                h1_ratio = h1_ratio.max(h1);
            }
        }
        h.push(grid.dx());
        value_res.push(vr);
        slope_res.push(sr);
    }
    let floor = vec![1e-12; LEVELS];
    let value_conv = classify_convergence(&h, &value_res, &floor);
    let slope_conv = classify_convergence(&h, &slope_res, &floor);
    let worst = value_conv
        .order_or(f64::INFINITY)
        .min(slope_conv.order_or(f64::INFINITY));
    let report = CheckReport::new(
        "extension",
        worst,
        MIN_ORDER,
        Comparison::AtLeast,
        seed,
        format!(
            "alphas {alphas:?}; value identity {value_conv}; slope identity {slope_conv} [{}]; \
             max |v|/|u| L2 {l2_ratio:.4} (bound {EXTENSION_L2_BOUND}), H1 {h1_ratio:.4}",
            pairwise_orders(&h, &slope_res)
        ),
    );
    if l2_ratio > EXTENSION_L2_BOUND {
        report.fail_with("L2 norm ratio exceeds the alpha-independent bound")
    } else {
        report
    }
}

// ---------------------------------------------------------------------------
// manufactured solutions

/// Exact solution `u(x, t) = exp(-decay t) q(x)` of the single-field problem
/// with frozen `theta`, where `q` satisfies both boundary relations.
#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedCase {
    pub theta: f64,
    pub nu: f64,
    pub c: f64,
    pub decay: f64,
    pub t_end: f64,
    /// Forcing from the discrete operator instead of the continuous one;
    /// with `decay = 0` the discrete solution is then exact.
    pub discrete_forcing: bool,
}

impl ManufacturedCase {
    pub fn decaying(theta: f64) -> Self {
        Self {
            theta,
            nu: 0.1,
            c: 0.05,
            decay: 1.0,
            t_end: 1.0,
            discrete_forcing: false,
        }
    }

    pub fn steady(theta: f64) -> Self {
        Self {
            decay: 0.0,
            discrete_forcing: true,
            ..Self::decaying(theta)
        }
    }

    /// `(c0, c1)` in `q(x) = sin(2 pi x) + cos(3 pi x) / 2 + c0 + c1 x`.
    fn correction(&self) -> (f64, f64) {
        linear_correction(self.theta, 0.5, -0.5, 2.0 * PI, 2.0 * PI)
    }

    fn q(&self, x: f64) -> f64 {
        let (c0, c1) = self.correction();
        (2.0 * PI * x).sin() + 0.5 * (3.0 * PI * x).cos() + c0 + c1 * x
    }

    fn dq(&self, x: f64) -> f64 {
        let (_, c1) = self.correction();
        2.0 * PI * (2.0 * PI * x).cos() - 1.5 * PI * (3.0 * PI * x).sin() + c1
    }

    fn d2q(&self, x: f64) -> f64 {
        -4.0 * PI * PI * (2.0 * PI * x).sin() - 4.5 * PI * PI * (3.0 * PI * x).cos()
    }

    pub fn exact(&self, x: f64, t: f64) -> f64 {
        (-self.decay * t).exp() * self.q(x)
    }

    fn continuous_forcing(&self, x: f64, t: f64) -> f64 {
        (-self.decay * t).exp()
            * (-self.decay * self.q(x) - self.nu * self.d2q(x) + self.c * self.dq(x))
    }

    /// Runs to `t_end` and returns the max-norm error.
    pub fn error(&self, n: usize, dt: f64) -> Result<f64, StepError> {
        let grid = GridSpec::new(n)?;
        let op = spatial_operator(&grid, self.nu, self.c, self.theta)?;
        let xs = grid.coordinates();
        let q: Vec<f64> = xs.iter().map(|&x| self.q(x)).collect();
        let lq = op.matvec(&q);
        let steps = (self.t_end / dt).round() as usize;
        let mut u = q.clone();
        for k in 0..steps {
            let t = k as f64 * dt;
            u = advance_field(&op, &u, t, dt, |t, j, _| {
                Ok(if self.discrete_forcing {
                    (-self.decay * t).exp() * (-self.decay * q[j] - lq[j])
                } else {
                    self.continuous_forcing(xs[j], t)
                })
            })?;
        }
        let t = steps as f64 * dt;
        Ok(xs
            .iter()
            .zip(&u)
            .map(|(&x, v)| (v - self.exact(x, t)).abs())
            .fold(0.0, f64::max))
    }
}

/// Which resolutions a convergence study halves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ladder {
    /// `dx` and `dt` halved together from `(1/n0, dt0)`.
    SpaceTime { n0: usize, dt0: f64 },
    /// `dt` halved from `dt0` on a fixed grid.
    TimeOnly { n: usize, dt0: f64 },
}

/// Errors on `refinements + 1` levels of `ladder` and the fitted order.
pub fn convergence_study(case: &ManufacturedCase, ladder: Ladder, refinements: usize) -> CheckReport {
    let mut h = Vec::new();
    let mut err = Vec::new();
    for level in 0..=refinements {
        let (n, dt) = match ladder {
            Ladder::SpaceTime { n0, dt0 } => (n0 << level, dt0 / (1u64 << level) as f64),
            Ladder::TimeOnly { n, dt0 } => (n, dt0 / (1u64 << level) as f64),
        };
        match case.error(n, dt) {
            Ok(e) => {
                h.push(dt);
                err.push(e);
            }
            Err(e) => {
                return CheckReport::new(
                    "convergence",
                    0.0,
                    MIN_ORDER,
                    Comparison::AtLeast,
                    0,
                    format!("level {level} (N={n}, dt={dt}) failed: {e}"),
                )
                .fail_with("blowup");
            }
        }
    }
    let label = match ladder {
        Ladder::SpaceTime { .. } => "space-time",
        Ladder::TimeOnly { .. } => "time",
    };
    let conv = classify_convergence(&h, &err, &vec![1e-12; h.len()]);
    CheckReport::new(
        format!("convergence[{label},theta={}]", case.theta),
        conv.order_or(f64::INFINITY),
        MIN_ORDER,
        Comparison::AtLeast,
        0,
        format!(
            "{conv}; errors [{}]; pairwise [{}]",
            err.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(","),
            pairwise_orders(&h, &err)
        ),
    )
}

// ---------------------------------------------------------------------------
// suites

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Ghost,
    SelfAdjoint,
    Extension,
    Poles,
    Convergence,
    All,
}

impl FromStr for Suite {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "ghost" => Suite::Ghost,
            "selfadjoint" => Suite::SelfAdjoint,
            "extension" => Suite::Extension,
            "poles" => Suite::Poles,
            "convergence" => Suite::Convergence,
            "all" => Suite::All,
            other => return Err(VerifyError::Suite(other.to_string())),
        })
    }
}

fn suite_checks(suite: Suite, seed: u64) -> Vec<Box<dyn Fn() -> CheckReport + Send + Sync>> {
    let mut out: Vec<Box<dyn Fn() -> CheckReport + Send + Sync>> = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Ghost {
        out.push(Box::new(move || check_ghost_identity(1000, seed)));
    }
    if all || suite == Suite::Poles {
        out.push(Box::new(|| check_poles(101)));
    }
    if all || suite == Suite::SelfAdjoint {
        for theta in [0.25, 0.5, 1.0] {
            out.push(Box::new(move || {
                let grid = GridSpec::new(16).expect("valid grid");
                check_selfadjointness(theta, &grid, 8, seed).expect("theta in (0, 1]")
            }));
        }
    }
    if all || suite == Suite::Extension {
        out.push(Box::new(move || check_extension(&[0.0, 0.25, 1.0, 4.0], 8, seed)));
    }
    if all || suite == Suite::Convergence {
        out.push(Box::new(|| {
            convergence_study(
                &ManufacturedCase::decaying(0.5),
                Ladder::SpaceTime { n0: 16, dt0: 0.05 },
                3,
            )
        }));
        out.push(Box::new(|| {
            convergence_study(
                &ManufacturedCase::decaying(0.5),
                Ladder::TimeOnly { n: 1024, dt0: 0.1 },
                3,
            )
        }));
    }
    out
}

/// Runs a suite; reports are sorted by name.
pub fn run_suite(suite: Suite, seed: u64) -> Vec<CheckReport> {
    let mut reports: Vec<CheckReport> = suite_checks(suite, seed).par_iter().map(|f| f()).collect();
    reports.sort_by(|a, b| a.name.cmp(&b.name));
    reports
}
