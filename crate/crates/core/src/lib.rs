//! Simulation of a one-dimensional aquarium filtration model.
//!
//! Dust (`v1`) and predator (`v2`) densities are advected, diffused and react
//! in the tank `(0, 1)`. A filter at the right end absorbs a fraction
//! `theta = F~(sigma1)` of what reaches it; the absorbed material accumulates
//! as the filter loads `sigma1`, `sigma2`, which follow their own ODEs. The
//! boundary operators couple the two ends of the tank, interpolating between
//! periodic (`theta = 0`) and Dirichlet-Neumann (`theta = 1`) conditions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod discretization;
pub mod experiments;
pub mod linalg;
pub mod model;
pub mod output;
pub mod stepper;
pub mod verification;
