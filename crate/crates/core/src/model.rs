//! Dimensionless filtration model.
//!
//! Two interior fields (dust `v1`, predators `v2`) on `I = (0, 1)` exchange
//! material with a filter at the right boundary. The filter load is tracked by
//! two boundary unknowns `sigma1` (dust on the filter) and `sigma2` (predators
//! on the filter). The filter efficiency `F~(sigma1)` sets both the flow speed
//! and the boundary absorption rate `theta` of the coupled boundary operators.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },
    #[error("invalid parameter `{name}` = {value}: {constraint}")]
    Parameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
}

fn domain(what: &'static str, detail: String) -> ModelError {
    ModelError::Domain { what, detail }
}

/// Coefficients of the dimensionless system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub nu1: f64,
    pub nu2: f64,
    pub r1_tilde: f64,
    pub r2: f64,
    pub s1_tilde: f64,
    pub s2: f64,
    pub q1: f64,
    pub q2: f64,
    pub omega: f64,
    pub beta: f64,
    pub b_scale: f64,
    pub f_tilde: f64,
}

/// Reference parameter set (`C_rho = 1`, `beta = 2`).
impl Default for ModelParams {
    fn default() -> Self {
        derive_dimensionless(&DimensionalParams::default())
            .expect("default dimensional parameters are valid")
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("nu1", self.nu1),
            ("nu2", self.nu2),
            ("b_scale", self.b_scale),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::Parameter {
                    name,
                    value,
                    constraint: "must be finite and > 0",
                });
            }
        }
        let nonneg = [
            ("r1_tilde", self.r1_tilde),
            ("r2", self.r2),
            ("s1_tilde", self.s1_tilde),
            ("s2", self.s2),
            ("q1", self.q1),
            ("q2", self.q2),
            ("omega", self.omega),
            ("beta", self.beta),
            ("f_tilde", self.f_tilde),
        ];
        for (name, value) in nonneg {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ModelError::Parameter {
                    name,
                    value,
                    constraint: "must be finite and >= 0",
                });
            }
        }
        Ok(())
    }
}

/// Dimensional rates and the scales used to remove units.
///
/// `a_scale`, `b_scale`, `cu_scale`, `crho_scale` are the carrying capacities
/// `A`, `B`, `C_u`, `C_rho`. The remaining fields are shared with
/// [`ModelParams`] and copied through unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionalParams {
    pub a_scale: f64,
    pub b_scale: f64,
    pub cu_scale: f64,
    pub crho_scale: f64,
    pub r1: f64,
    pub s1: f64,
    pub f: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub r2: f64,
    pub s2: f64,
    pub omega: f64,
    pub beta: f64,
}

impl Default for DimensionalParams {
    fn default() -> Self {
        Self {
            a_scale: 1.0,
            b_scale: 1.0,
            cu_scale: 1.0,
            crho_scale: 1.0,
            r1: 0.5,
            s1: 1.0,
            f: 1.0,
            nu1: 0.1,
            nu2: 0.1,
            r2: 0.5,
            s2: 1.0,
            omega: 0.1,
            beta: 2.0,
        }
    }
}

impl DimensionalParams {
    pub fn with_capacity(mut self, crho: f64) -> Self {
        self.crho_scale = crho;
        self
    }

    pub fn with_feeding(mut self, f: f64) -> Self {
        self.f = f;
        self
    }
}

/// Full discrete unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub sigma1: f64,
    pub sigma2: f64,
    pub t: f64,
}

impl State {
    pub fn uniform(nodes: usize, v1: f64, v2: f64, sigma1: f64, sigma2: f64) -> Self {
        Self {
            v1: vec![v1; nodes],
            v2: vec![v2; nodes],
            sigma1,
            sigma2,
            t: 0.0,
        }
    }

    pub fn zeros(nodes: usize) -> Self {
        Self::uniform(nodes, 0.0, 0.0, 0.0, 0.0)
    }

    pub fn nodes(&self) -> usize {
        self.v1.len()
    }

    pub fn is_finite(&self) -> bool {
        self.sigma1.is_finite()
            && self.sigma2.is_finite()
            && self.t.is_finite()
            && self.v1.iter().chain(&self.v2).all(|x| x.is_finite())
    }
}

/// `F(s) = 1 / (1 + beta s)`.
pub fn filter_function(beta: f64, s: f64) -> Result<f64, ModelError> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(domain("filter_function", format!("beta = {beta}")));
    }
    if !(s >= 0.0) {
        return Err(domain("filter_function", format!("s = {s}")));
    }
    Ok(1.0 / (1.0 + beta * s))
}

/// Filter efficiency in dimensionless form, `F(B sigma1)`.
pub fn f_tilde_of_sigma1(p: &ModelParams, sigma1: f64) -> Result<f64, ModelError> {
    filter_function(p.beta, p.b_scale * sigma1)
}

/// Flow speed `Omega F~(sigma1)`.
pub fn velocity(p: &ModelParams, sigma1: f64) -> Result<f64, ModelError> {
    Ok(p.omega * f_tilde_of_sigma1(p, sigma1)?)
}

fn saturation(what: &'static str, x: f64) -> Result<f64, ModelError> {
    let denom = 1.0 + x;
    if denom == 0.0 {
        return Err(domain(what, format!("pole at {x}")));
    }
    Ok(x / denom)
}

/// Dust reaction: Holling-type consumption by predators plus constant feeding.
pub fn reaction_v1(p: &ModelParams, v1: f64, v2: f64) -> Result<f64, ModelError> {
    Ok(-p.r1_tilde * saturation("reaction_v1", v1)? * v2 + p.f_tilde)
}

/// Predator reaction: saturated growth on dust with logistic self-limitation.
pub fn reaction_v2(p: &ModelParams, v1: f64, v2: f64) -> Result<f64, ModelError> {
    Ok((p.r2 * saturation("reaction_v2", v1)? - v2) * v2)
}

/// Right-hand sides of the two filter ODEs given the traces at `x = 1`.
pub fn boundary_rhs(
    p: &ModelParams,
    sigma1: f64,
    sigma2: f64,
    trace_v1: f64,
    trace_v2: f64,
) -> Result<(f64, f64), ModelError> {
    let influx = influx_factor(p, sigma1)?;
    let sat = saturation("boundary_rhs", sigma1)?;
    let ds1 = -p.s1_tilde * sat * sigma2 + p.q1 * influx * trace_v1;
    let ds2 = (p.s2 * sat - sigma2) * sigma2 + p.q2 * influx * trace_v2;
    Ok((ds1, ds2))
}

/// `c~(sigma1) F~(sigma1) = Omega F~(sigma1)^2`.
fn influx_factor(p: &ModelParams, sigma1: f64) -> Result<f64, ModelError> {
    let f = f_tilde_of_sigma1(p, sigma1)?;
    Ok(p.omega * f * f)
}

/// dσ1/dt alone, as used by the third substep of the stepper.
pub(crate) fn sigma1_rhs(
    p: &ModelParams,
    sigma1: f64,
    sigma2: f64,
    trace_v1: f64,
) -> Result<f64, ModelError> {
    let sat = saturation("boundary_rhs", sigma1)?;
    Ok(-p.s1_tilde * sat * sigma2 + p.q1 * influx_factor(p, sigma1)? * trace_v1)
}

/// dσ2/dt alone, as used by the fourth substep of the stepper.
pub(crate) fn sigma2_rhs(
    p: &ModelParams,
    sigma1: f64,
    sigma2: f64,
    trace_v2: f64,
) -> Result<f64, ModelError> {
    let sat = saturation("boundary_rhs", sigma1)?;
    Ok((p.s2 * sat - sigma2) * sigma2 + p.q2 * influx_factor(p, sigma1)? * trace_v2)
}

/// Maps dimensional rates onto the dimensionless coefficients.
pub fn derive_dimensionless(dp: &DimensionalParams) -> Result<ModelParams, ModelError> {
    let scales = [
        ("a_scale", dp.a_scale),
        ("b_scale", dp.b_scale),
        ("cu_scale", dp.cu_scale),
        ("crho_scale", dp.crho_scale),
    ];
    for (name, value) in scales {
        if !(value.is_finite() && value > 0.0) {
            return Err(ModelError::Parameter {
                name,
                value,
                constraint: "scale must be finite and > 0",
            });
        }
    }
    let p = ModelParams {
        nu1: dp.nu1,
        nu2: dp.nu2,
        r1_tilde: dp.r1 * dp.cu_scale / dp.a_scale,
        r2: dp.r2,
        s1_tilde: dp.s1 * dp.crho_scale / dp.b_scale,
        s2: dp.s2,
        q1: dp.a_scale / dp.b_scale,
        q2: dp.cu_scale / dp.crho_scale,
        omega: dp.omega,
        beta: dp.beta,
        b_scale: dp.b_scale,
        f_tilde: dp.f / dp.a_scale,
    };
    p.validate()?;
    Ok(p)
}
