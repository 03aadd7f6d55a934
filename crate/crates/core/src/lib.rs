//! Pseudospectral solvers and diagnostics for reduced hydroelastic wave models
//! on the periodic torus.
//!
//! Fields live on `𝕋^d = [0, 2π)^d` (`d = 1, 2`) as Fourier coefficients with
//! the series normalization `f(x) = Σ f̂(k) e^{ik·x}`. Sobolev norms are plain
//! coefficient sums without a volume factor, so `‖cos x‖²_{L²} = 1/2`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod bi;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod init;
pub mod linear;
pub mod nondim;
pub mod nonlinear;
pub mod scenario;
pub mod spectral;
pub mod uni;

pub use error::{Error, Result};
