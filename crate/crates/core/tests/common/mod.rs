//! Dense reference implementation of one time step, written directly from the
//! model equations without touching the library's discretization code.

#![allow(dead_code)]

use clogsim::model::{ModelParams, State};
use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

/// Ghost values `(u[N+1], u[-1])` from the two discrete boundary relations,
/// solved as a 2x2 linear system.
pub fn ghosts(theta: f64, u1: f64, unm1: f64) -> (f64, f64) {
    let a = 1.0 - theta;
    // a (u[N+1] + u[N-1]) / 2 = (u[1] + u[-1]) / 2
    // (u[N+1] - u[N-1]) = a (u[1] - u[-1])
    let m = Matrix2::new(a, -1.0, 1.0, a);
    let rhs = Vector2::new(u1 - a * unm1, unm1 + a * u1);
    let g = m.lu().solve(&rhs).expect("ghost system is regular");
    (g[0], g[1])
}

/// Applies `nu u'' - c u'` with centred differences, ghosts included.
pub fn apply_operator(u: &[f64], nu: f64, c: f64, theta: f64) -> Vec<f64> {
    let n = u.len() - 1;
    let dx = 1.0 / n as f64;
    let (right, left) = ghosts(theta, u[1], u[n - 1]);
    let at = |j: isize| -> f64 {
        if j < 0 {
            left
        } else if j as usize > n {
            right
        } else {
            u[j as usize]
        }
    };
    (0..=n as isize)
        .map(|j| {
            let (um, u0, up) = (at(j - 1), at(j), at(j + 1));
            nu * (up - 2.0 * u0 + um) / (dx * dx) - c * (up - um) / (2.0 * dx)
        })
        .collect()
}

/// Dense matrix of [`apply_operator`], one unit vector per column.
pub fn dense_operator(n: usize, nu: f64, c: f64, theta: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n + 1, n + 1);
    for k in 0..=n {
        let mut e = vec![0.0; n + 1];
        e[k] = 1.0;
        let col = apply_operator(&e, nu, c, theta);
        for (j, v) in col.into_iter().enumerate() {
            m[(j, k)] = v;
        }
    }
    m
}

/// `(I - dt/2 L) u = (I + dt/2 L) u_k + dt/2 (r_k + r_pred)` by dense LU.
pub fn dense_crank_nicolson(l: &DMatrix<f64>, u_k: &[f64], r_k: &[f64], r_pred: &[f64], dt: f64) -> Vec<f64> {
    let n = u_k.len();
    let id = DMatrix::<f64>::identity(n, n);
    let lhs = &id - l * (dt / 2.0);
    let uk = DVector::from_column_slice(u_k);
    let r: DVector<f64> = DVector::from_iterator(n, r_k.iter().zip(r_pred).map(|(a, b)| a + b));
    let rhs = (&id + l * (dt / 2.0)) * uk + r * (dt / 2.0);
    lhs.lu().solve(&rhs).expect("CN matrix is regular").iter().copied().collect()
}

fn f_tilde(p: &ModelParams, s1: f64) -> f64 {
    1.0 / (1.0 + p.beta * p.b_scale * s1)
}

fn r1(p: &ModelParams, v1: f64, v2: f64) -> f64 {
    -p.r1_tilde * v1 * v2 / (1.0 + v1) + p.f_tilde
}

fn r2(p: &ModelParams, v1: f64, v2: f64) -> f64 {
    (p.r2 * v1 / (1.0 + v1) - v2) * v2
}

fn predict_correct(l: &DMatrix<f64>, u: &[f64], r: impl Fn(&[f64]) -> Vec<f64>, dt: f64) -> Vec<f64> {
    let r_k = r(u);
    let lu = l * DVector::from_column_slice(u);
    let pred: Vec<f64> = (0..u.len()).map(|j| u[j] + dt * (lu[j] + r_k[j])).collect();
    let r_pred = r(&pred);
    dense_crank_nicolson(l, u, &r_k, &r_pred, dt)
}

/// One full step: `v1`, then `v2` with the new `v1`, then the two filter
/// loads by Heun's method with the new traces at `x = 1`.
pub fn reference_step(s: &State, p: &ModelParams, dt: f64) -> State {
    let n = s.v1.len() - 1;
    let theta = f_tilde(p, s.sigma1);
    let c = p.omega * theta;
    let l1 = dense_operator(n, p.nu1, c, theta);
    let l2 = dense_operator(n, p.nu2, c, theta);

    let v2_old = s.v2.clone();
    let v1 = predict_correct(&l1, &s.v1, |u| u.iter().zip(&v2_old).map(|(&a, &b)| r1(p, a, b)).collect(), dt);
    let v2 = predict_correct(&l2, &s.v2, |u| v1.iter().zip(u).map(|(&a, &b)| r2(p, a, b)).collect(), dt);

    let influx = |s1: f64| p.omega * f_tilde(p, s1).powi(2);
    let g1 = |x: f64| -p.s1_tilde * x / (1.0 + x) * s.sigma2 + p.q1 * influx(x) * v1[n];
    let s1_pred = s.sigma1 + dt * g1(s.sigma1);
    let sigma1 = s.sigma1 + dt / 2.0 * (g1(s.sigma1) + g1(s1_pred));

    let g2 = |y: f64| (p.s2 * sigma1 / (1.0 + sigma1) - y) * y + p.q2 * influx(sigma1) * v2[n];
    let s2_pred = s.sigma2 + dt * g2(s.sigma2);
    let sigma2 = s.sigma2 + dt / 2.0 * (g2(s.sigma2) + g2(s2_pred));

    State {
        v1,
        v2,
        sigma1,
        sigma2,
        t: s.t + dt,
    }
}

/// A parameter set with every coupling switched on and no two values equal.
pub fn coupled_params() -> ModelParams {
    ModelParams {
        nu1: 0.13,
        nu2: 0.07,
        r1_tilde: 0.6,
        r2: 0.45,
        s1_tilde: 0.8,
        s2: 1.1,
        q1: 0.9,
        q2: 1.3,
        omega: 0.35,
        beta: 2.0,
        b_scale: 1.2,
        f_tilde: 0.75,
    }
}

pub fn coupled_state(n: usize) -> State {
    State {
        v1: (0..=n).map(|j| 0.5 + 0.3 * (j as f64 * 1.3).sin()).collect(),
        v2: (0..=n).map(|j| 0.8 + 0.2 * (j as f64 * 0.7).cos()).collect(),
        sigma1: 0.6,
        sigma2: 0.4,
        t: 0.0,
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
