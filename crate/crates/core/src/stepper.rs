//! Time integration: explicit Euler predictor followed by a Crank-Nicolson
//! corrector, applied field by field in a fixed order.
//!
//! One step from `t_k` to `t_k + dt`:
//!
//! 1. `v1` with the operator frozen at `sigma1^k`;
//! 2. `v2` with the same operator coefficients and the updated `v1`;
//! 3. `sigma1` from the updated traces;
//! 4. `sigma2` from the updated traces and `sigma1^{k+1}`.

use crate::discretization::{spatial_operator, GridError, GridSpec};
use crate::linalg::{BorderedTridiagonal, SolveError};
use crate::model::{
    f_tilde_of_sigma1, reaction_v1, reaction_v2, sigma1_rhs, sigma2_rhs, velocity, ModelError,
    ModelParams, State,
};
use std::fmt;
use thiserror::Error;

/// Any node or filter value above this magnitude aborts the run.
pub const BLOWUP_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    V1,
    V2,
}

impl Field {
    pub fn diffusivity(self, p: &ModelParams) -> f64 {
        match self {
            Field::V1 => p.nu1,
            Field::V2 => p.nu2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Substep {
    V1,
    V2,
    Sigma1,
    Sigma2,
}

impl fmt::Display for Substep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Substep::V1 => "v1",
            Substep::V2 => "v2",
            Substep::Sigma1 => "sigma1",
            Substep::Sigma2 => "sigma2",
        };
        f.write_str(s)
    }
}

impl From<Field> for Substep {
    fn from(f: Field) -> Self {
        match f {
            Field::V1 => Substep::V1,
            Field::V2 => Substep::V2,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StepError {
    #[error("numerical blowup in {substep} at t = {t}: value {value}")]
    Blowup { substep: Substep, t: f64, value: f64 },
    #[error("linear solve failed in {substep} (dt = {dt}, theta = {theta}): {source}")]
    Solver {
        substep: Substep,
        dt: f64,
        theta: f64,
        source: SolveError,
    },
    #[error("model evaluation failed in {substep}: {source}")]
    Model { substep: Substep, source: ModelError },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("invalid time spec: {0}")]
    Time(String),
}

impl StepError {
    fn model(substep: Substep) -> impl FnOnce(ModelError) -> StepError {
        move |source| StepError::Model { substep, source }
    }
}

/// Uniform step `dt` up to `t_end`, recording every `record_every` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSpec {
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
}

impl TimeSpec {
    pub fn new(dt: f64, t_end: f64, record_every: usize) -> Result<Self, StepError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(StepError::Time(format!("dt = {dt} must be > 0")));
        }
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(StepError::Time(format!("t_end = {t_end} must be > 0")));
        }
        if dt > t_end {
            return Err(StepError::Time(format!("dt = {dt} exceeds t_end = {t_end}")));
        }
        if record_every == 0 {
            return Err(StepError::Time("record_every must be positive".into()));
        }
        Ok(Self {
            dt,
            t_end,
            record_every,
        })
    }

    /// Number of steps; a non-integral `t_end / dt` adds one shortened step.
    pub fn steps(&self) -> usize {
        let ratio = self.t_end / self.dt;
        let nearest = ratio.round();
        if (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0) {
            nearest as usize
        } else {
            ratio.ceil() as usize
        }
    }

    /// Time after `k` steps; the last step lands exactly on `t_end`.
    pub fn time_at(&self, k: usize) -> f64 {
        if k >= self.steps() {
            self.t_end
        } else {
            k as f64 * self.dt
        }
    }
}

/// Implicit system `(I - dt/2 L) u = rhs` of one Crank-Nicolson corrector.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: BorderedTridiagonal,
    pub rhs: Vec<f64>,
}

impl LinearSystem {
    pub fn crank_nicolson(op: &BorderedTridiagonal, u_k: &[f64], reaction_sum: &[f64], dt: f64) -> Self {
        let half = 0.5 * dt;
        let lu = op.matvec(u_k);
        let rhs = u_k
            .iter()
            .zip(&lu)
            .zip(reaction_sum)
            .map(|((u, l), r)| u + half * l + half * r)
            .collect();
        Self {
            matrix: op.shifted(1.0, -half),
            rhs,
        }
    }

    pub fn is_diagonally_dominant(&self) -> bool {
        self.matrix.is_diagonally_dominant()
    }

    pub fn solve(&self) -> Result<Vec<f64>, SolveError> {
        self.matrix.solve(&self.rhs)
    }
}

/// Boundary absorption rate and flow speed for a filter load.
pub fn operator_coefficients(p: &ModelParams, sigma1: f64) -> Result<(f64, f64), ModelError> {
    Ok((f_tilde_of_sigma1(p, sigma1)?, velocity(p, sigma1)?))
}

fn guard(substep: Substep, t: f64, values: &[f64]) -> Result<(), StepError> {
    for &v in values {
        if !v.is_finite() || v.abs() > BLOWUP_LIMIT {
            return Err(StepError::Blowup { substep, t, value: v });
        }
    }
    Ok(())
}

fn reaction_vector(
    p: &ModelParams,
    field: Field,
    v1: &[f64],
    v2: &[f64],
) -> Result<Vec<f64>, StepError> {
    let f = match field {
        Field::V1 => reaction_v1,
        Field::V2 => reaction_v2,
    };
    v1.iter()
        .zip(v2)
        .map(|(&a, &b)| f(p, a, b))
        .collect::<Result<_, _>>()
        .map_err(StepError::model(field.into()))
}

fn euler_update(u: &[f64], lu: &[f64], r: &[f64], dt: f64) -> Vec<f64> {
    u.iter()
        .zip(lu)
        .zip(r)
        .map(|((u, l), r)| u + dt * (l + r))
        .collect()
}

/// Explicit Euler predictor `u* = u^k + dt (L u^k + r(u^k))` for one field,
/// with `L` evaluated at `sigma1^k`.
pub fn euler_predictor(
    state: &State,
    p: &ModelParams,
    grid: &GridSpec,
    dt: f64,
    field: Field,
) -> Result<Vec<f64>, StepError> {
    grid.check_len(state.v1.len())?;
    grid.check_len(state.v2.len())?;
    let (theta, c) = operator_coefficients(p, state.sigma1).map_err(StepError::model(field.into()))?;
    let op = spatial_operator(grid, field.diffusivity(p), c, theta)?;
    let u = match field {
        Field::V1 => &state.v1,
        Field::V2 => &state.v2,
    };
    let r = reaction_vector(p, field, &state.v1, &state.v2)?;
    let pred = euler_update(u, &op.matvec(u), &r, dt);
    guard(field.into(), state.t, &pred)?;
    Ok(pred)
}

/// Crank-Nicolson corrector with the reaction averaged between the current
/// level `r_k` and the predicted level `r_pred`.
#[allow(clippy::too_many_arguments)]
pub fn crank_nicolson_solve(
    u_k: &[f64],
    r_k: &[f64],
    r_pred: &[f64],
    grid: &GridSpec,
    nu: f64,
    c: f64,
    theta: f64,
    dt: f64,
) -> Result<Vec<f64>, StepError> {
    grid.check_len(u_k.len())?;
    let op = spatial_operator(grid, nu, c, theta)?;
    corrector(&op, u_k, r_k, r_pred, dt, Substep::V1, theta)
}

fn corrector(
    op: &BorderedTridiagonal,
    u_k: &[f64],
    r_k: &[f64],
    r_pred: &[f64],
    dt: f64,
    substep: Substep,
    theta: f64,
) -> Result<Vec<f64>, StepError> {
    let sum: Vec<f64> = r_k.iter().zip(r_pred).map(|(a, b)| a + b).collect();
    LinearSystem::crank_nicolson(op, u_k, &sum, dt)
        .solve()
        .map_err(|source| StepError::Solver {
            substep,
            dt,
            theta,
            source,
        })
}

/// Predictor-corrector advance of one field under a frozen operator.
///
/// `source(t, j, u_j)` is the reaction/forcing at node `j`; it is evaluated at
/// `(t, u^k)` for the predictor and at `(t + dt, u*)` for the corrector.
pub fn advance_field<S>(
    op: &BorderedTridiagonal,
    u_k: &[f64],
    t: f64,
    dt: f64,
    mut source: S,
) -> Result<Vec<f64>, StepError>
where
    S: FnMut(f64, usize, f64) -> Result<f64, ModelError>,
{
    let substep = Substep::V1;
    let r_k: Vec<f64> = u_k
        .iter()
        .enumerate()
        .map(|(j, &u)| source(t, j, u))
        .collect::<Result<_, _>>()
        .map_err(StepError::model(substep))?;
    let pred = euler_update(u_k, &op.matvec(u_k), &r_k, dt);
    guard(substep, t, &pred)?;
    let r_pred: Vec<f64> = pred
        .iter()
        .enumerate()
        .map(|(j, &u)| source(t + dt, j, u))
        .collect::<Result<_, _>>()
        .map_err(StepError::model(substep))?;
    let next = corrector(op, u_k, &r_k, &r_pred, dt, substep, f64::NAN)?;
    guard(substep, t + dt, &next)?;
    Ok(next)
}

fn heun<G>(x: f64, dt: f64, substep: Substep, t: f64, g: G) -> Result<f64, StepError>
where
    G: Fn(f64) -> Result<f64, ModelError>,
{
    let g_k = g(x).map_err(StepError::model(substep))?;
    let pred = x + dt * g_k;
    guard(substep, t, &[pred])?;
    let g_pred = g(pred).map_err(StepError::model(substep))?;
    let next = x + 0.5 * dt * (g_k + g_pred);
    guard(substep, t + dt, &[next])?;
    Ok(next)
}

#[allow(clippy::too_many_arguments)]
fn advance_pde(
    field: Field,
    p: &ModelParams,
    grid: &GridSpec,
    theta: f64,
    c: f64,
    v1: &[f64],
    v2: &[f64],
    t: f64,
    dt: f64,
) -> Result<Vec<f64>, StepError> {
    let substep = Substep::from(field);
    let op = spatial_operator(grid, field.diffusivity(p), c, theta)?;
    let u_k = match field {
        Field::V1 => v1,
        Field::V2 => v2,
    };
    let r_k = reaction_vector(p, field, v1, v2)?;
    let pred = euler_update(u_k, &op.matvec(u_k), &r_k, dt);
    guard(substep, t, &pred)?;
    let r_pred = match field {
        Field::V1 => reaction_vector(p, field, &pred, v2)?,
        Field::V2 => reaction_vector(p, field, v1, &pred)?,
    };
    let next = corrector(&op, u_k, &r_k, &r_pred, dt, substep, theta)?;
    guard(substep, t + dt, &next)?;
    Ok(next)
}

/// Advances the full state by `dt`.
pub fn step(state: &State, p: &ModelParams, grid: &GridSpec, dt: f64) -> Result<State, StepError> {
    grid.check_len(state.v1.len())?;
    grid.check_len(state.v2.len())?;
    let n = grid.intervals();
    let t = state.t;
    let (theta, c) =
        operator_coefficients(p, state.sigma1).map_err(StepError::model(Substep::V1))?;

    let v1 = advance_pde(Field::V1, p, grid, theta, c, &state.v1, &state.v2, t, dt)?;
    let v2 = advance_pde(Field::V2, p, grid, theta, c, &v1, &state.v2, t, dt)?;

    let (trace_v1, trace_v2) = (v1[n], v2[n]);
    let sigma1 = heun(state.sigma1, dt, Substep::Sigma1, t, |s| {
        sigma1_rhs(p, s, state.sigma2, trace_v1)
    })?;
    let sigma2 = heun(state.sigma2, dt, Substep::Sigma2, t, |s| {
        sigma2_rhs(p, sigma1, s, trace_v2)
    })?;

    Ok(State {
        v1,
        v2,
        sigma1,
        sigma2,
        t: t + dt,
    })
}
