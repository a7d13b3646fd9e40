//! Numerical toolkit for multiplier (Morawetz-type) estimates for mode-reduced
//! wave equations on Schwarzschild and warped-product backgrounds.
//!
//! The crate has three legs:
//!
//! * [`geometry`] and [`multiplier`] evaluate the background potentials and
//!   the arctan multiplier weight with analytic derivatives, and check the
//!   structural conditions both must satisfy.
//! * [`spectral`] certifies the positivity condition behind the estimate by
//!   shooting the associated ODE from the truncation radius and matching to
//!   power-law asymptotics, cross-checked by a discretized eigenvalue oracle
//!   ([`tridiag`]). [`hardy`] bounds the weighted norms that close the
//!   argument.
//! * [`sim`] evolves the mode-reduced wave equation with a symplectic
//!   finite-difference scheme and measures the multiplier identity and the
//!   weighted local-energy bound directly.
//!
//! Grid sampling, operator assembly, Hardy trials, and the simulator's inner
//! loops run data-parallel through [`exec`] when the `parallel` feature
//! (default) is enabled; every kernel keeps a sequential twin with identical
//! floating-point behavior.

// `!(x > 0.0)` validations are intentional: they reject NaN, which the
// suggested `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// stencil and stage loops index several arrays in lockstep
#![allow(clippy::needless_range_loop)]
#![allow(clippy::manual_is_multiple_of)]

pub mod exec;
pub mod geometry;
pub mod hardy;
pub mod multiplier;
pub mod ode;
pub mod quad;
pub mod report;
pub mod sim;
pub mod spectral;
pub mod tridiag;

use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Invalid configuration or misuse of an API contract.
    #[error("usage error: {0}")]
    Usage(String),
    /// Adaptive integration could not continue.
    #[error("integration failed near rho = {last_rho}: {reason}")]
    Integration { last_rho: f64, reason: String },
    /// Overflow, NaN, or a precondition discovered broken at run time.
    #[error("numerical fault: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Smooth bump of unit height supported on (lo, hi), zero outside.
pub fn smooth_bump(lo: f64, hi: f64, rho: f64) -> f64 {
    let t = (2.0 * rho - (lo + hi)) / (hi - lo);
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

/// `n` evenly spaced points covering `[a, b]` inclusive (`n >= 2`).
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "linspace needs at least two points");
    let step = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { b } else { a + i as f64 * step })
        .collect()
}
