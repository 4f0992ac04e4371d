//! Sojourn-time spectral analysis for the finite-population processor-sharing
//! queue.
//!
//! A closed pool of `N` customers feeds a processor-sharing server; each idle
//! customer becomes active at rate `rho/N` (time scaled so the mean service
//! time is 1). The conditional sojourn-time density of a tagged customer
//! solves a linear ODE system `p' = A p` driven by an `N x N` tridiagonal
//! generator. This crate provides:
//!
//! - [`model`]: queue parameters, the generator matrix, initial condition,
//!   arrival-instant state distribution, and the self-adjointness weights;
//! - [`spectral`]: an exact eigensolver (symmetrization, Sturm-sequence
//!   bisection, inverse iteration plus stable two-sided recurrence) and the
//!   spectral coefficients of the initial condition;
//! - [`specialfn`]: Hermite polynomials, the small-`n` limiting sequence, and
//!   adaptive Gauss-Kronrod quadrature with endpoint-singularity handling;
//! - [`asym`]: large-`N` eigenvalue and eigenvector approximations in the
//!   subcritical (`rho < 1`), supercritical (`rho > 1`) and critical
//!   (`rho ~ 1`) regimes, with the matching constants that link the spatial
//!   scales;
//! - [`sojourn`]: conditional and unconditional densities, single-mode tail
//!   approximations and the `-log p(t)/t` diagnostic tables;
//! - [`sim`]: an independent continuous-time Markov-chain simulator with
//!   reproducible per-sample RNG streams, tail-rate estimation and a
//!   chi-square comparison against the spectral density.

// `!(x > 0.0)` style comparisons deliberately reject NaN; rewriting them
// with <= would silently accept it.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asym;
pub mod error;
pub mod model;
pub mod numeric;
pub mod sim;
pub mod sojourn;
pub mod specialfn;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{
    arrival_state_distribution, build_generator, initial_condition, spectral_weight, Generator,
    QueueParams, WeightVector,
};
pub use numeric::{KahanSum, LogSigned};
pub use spectral::{full_spectrum, Spectrum};
