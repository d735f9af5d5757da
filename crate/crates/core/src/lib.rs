//! Pluggable numerical building blocks for integrating ordinary differential
//! equations: vectors, matrices, linear and nonlinear solvers, adaptive
//! multistep and additive Runge-Kutta integrators, and a driver for two
//! reference problems.

// Dense kernels index several arrays in lockstep; `!(x > 0.0)` also rejects NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod integrator;
pub mod linsol;
pub mod matrix;
pub mod nonlinsol;
pub mod vector;
