//! Large-`N` asymptotics of the eigenvalues and eigenvectors, split by
//! traffic-intensity regime:
//!
//! - [`sub`]: `rho < 1` (normal usage) — eigenvalues coalesce about
//!   `(1 - sqrt(rho))^2`; eigenvectors live on the `y`-, `x`-, `xi`- and
//!   small-`n` scales;
//! - [`sup`]: `rho > 1` (very heavy usage) — eigenvalues of order `1/N` with
//!   the index in the leading term; Hermite behavior on the `X`-scale;
//! - [`crit`]: `rho - 1 = O(N^{-1/3})` — the transition regime organized by
//!   the detuning parameter `gamma` and the cubic for `A(gamma)`.
//!
//! Eigenvector values that involve factors like `exp(N F)` are returned as
//! [`LogSigned`](crate::numeric::LogSigned) sign/log-magnitude pairs. The
//! normalization constants named `k0`, `k1`, ... are namespaced per regime:
//! equal names across regimes denote different constants.

pub mod crit;
pub mod sub;
pub mod sup;

use crate::model::QueueParams;

/// Asymptotic regime selected for a parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::Subcritical => write!(f, "sub"),
            Regime::Critical => write!(f, "crit"),
            Regime::Supercritical => write!(f, "super"),
        }
    }
}

/// Threshold on `gamma = (rho - 1) N^{1/3}` separating the regimes.
///
/// There is no sharp boundary in the theory; +-2 keeps both the `rho -> 1`
/// singularity of the subcritical `c_4` term and the `1/(rho - 1)` blowup of
/// the supercritical leading term controlled. Overridable wherever a regime
/// argument is accepted.
pub const REGIME_GAMMA_THRESHOLD: f64 = 2.0;

/// Default regime router: classify by the detuning parameter `gamma`.
pub fn classify(p: &QueueParams) -> Regime {
    let gamma = p.gamma();
    if gamma > REGIME_GAMMA_THRESHOLD {
        Regime::Supercritical
    } else if gamma < -REGIME_GAMMA_THRESHOLD {
        Regime::Subcritical
    } else {
        Regime::Critical
    }
}
