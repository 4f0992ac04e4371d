//! Supercritical (`rho > 1`) asymptotics: leading-order eigenvalues,
//! Hermite eigenvectors on the `X`-scale, the power-law `xi`-scale form,
//! the small-`n` recurrence solution, and the matching constants.

use crate::error::{Error, Result};
use crate::model::QueueParams;
use crate::specialfn::hermite;
use statrs::function::gamma::ln_gamma;

fn ensure_sup(p: &QueueParams, operation: &'static str) -> Result<()> {
    if p.rho() > 1.0 {
        Ok(())
    } else {
        Err(Error::Regime {
            operation,
            required: "rho > 1",
            rho: p.rho(),
        })
    }
}

/// Leading-order eigenvalue `nu_j = (rho/(rho-1) + rho j)/N`, of order
/// `O(1/N)` with the index already in the leading term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperEigExpansion {
    pub j: usize,
    pub value: f64,
}

/// Leading-order eigenvalue approximation for `rho > 1`.
pub fn eigenvalue(p: &QueueParams, j: usize) -> Result<SuperEigExpansion> {
    ensure_sup(p, "super eigenvalue")?;
    let rho = p.rho();
    let value = (rho / (rho - 1.0) + rho * j as f64) / p.population() as f64;
    Ok(SuperEigExpansion { j, value })
}

/// Center of the sign-change window: `n = N (1 - 1/rho)`.
pub fn x_scale_center(p: &QueueParams) -> f64 {
    p.population() as f64 * (1.0 - 1.0 / p.rho())
}

/// Eigenvector on the `X`-scale: `He_j(sqrt(rho) X)` with
/// `X = (n - N(1 - 1/rho))/sqrt(N)`, without the `k0` factor.
pub fn eigvec_x(p: &QueueParams, j: usize, n: f64) -> Result<f64> {
    ensure_sup(p, "X-scale eigenvector")?;
    let big_n = p.population() as f64;
    let x = (n - x_scale_center(p)) / big_n.sqrt();
    Ok(hermite(j, p.rho().sqrt() * x))
}

/// Eigenvector on the `xi`-scale: `xi^{1/(rho-1)} (xi - 1 + 1/rho)^j`,
/// without the `k1` factor.
///
/// Valid on `0 < xi < 1`; near `xi = 1 - 1/rho` it degenerates to a zero of
/// order `j` and the `X`-scale form owns the window, but the formula itself
/// stays finite so no hole is cut out of the domain.
pub fn eigvec_xi(p: &QueueParams, j: usize, n: f64) -> Result<f64> {
    ensure_sup(p, "xi-scale eigenvector")?;
    let rho = p.rho();
    let xi = n / p.population() as f64;
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::Domain(format!(
            "xi-scale form requires 0 < xi < 1, got xi = {xi}"
        )));
    }
    Ok(xi.powf(1.0 / (rho - 1.0)) * (xi - 1.0 + 1.0 / rho).powi(j as i32))
}

/// Small-`n` eigenvector shape `Q(n)` for `n = 0..=n_max` by the forward
/// recurrence `rho (Q(n+1) - Q(n)) + (n/(n+1)) Q(n-1) - Q(n) = 0` with
/// `Q(0) = 1` and `Q(1) = 1 + 1/rho` (from the `n = 0` row with `Q(-1)`
/// finite). The shape is `j`-independent; the index enters only through the
/// matching constant.
pub fn eigvec_small_n(p: &QueueParams, n_max: usize) -> Result<Vec<f64>> {
    ensure_sup(p, "small-n eigenvector")?;
    if n_max > 10_000 {
        return Err(Error::InvalidParams(format!(
            "small-n recurrence is intended for n_max <= 10^4, got {n_max}"
        )));
    }
    let rho = p.rho();
    let mut q = Vec::with_capacity(n_max + 1);
    q.push(1.0);
    if n_max == 0 {
        return Ok(q);
    }
    q.push(1.0 + 1.0 / rho);
    for n in 1..n_max {
        let nf = n as f64;
        let next = q[n] + (q[n] - nf / (nf + 1.0) * q[n - 1]) / rho;
        q.push(next);
    }
    Ok(q)
}

/// Matching constants for `rho > 1`, relative to the `xi`-scale `k1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperMatching {
    pub k0_over_k1: f64,
    pub k2_over_k1: f64,
}

/// Matching constants for `rho > 1`. The gamma-function factor in `k2` is
/// evaluated via log-gamma.
pub fn matching_constants(p: &QueueParams, j: usize) -> Result<SuperMatching> {
    ensure_sup(p, "super matching constants")?;
    let rho = p.rho();
    let big_n = p.population() as f64;
    let jf = j as f64;
    let inv = 1.0 / (rho - 1.0);
    let base = 1.0 - 1.0 / rho;
    let k0 = rho.powf(-jf / 2.0) * base.powf(inv) * big_n.powf(-jf / 2.0);
    let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    let k2 = sign
        * (big_n.ln() * (1.0 / (1.0 - rho)) + base.ln() * (jf - inv) + ln_gamma(rho * inv)).exp();
    Ok(SuperMatching {
        k0_over_k1: k0,
        k2_over_k1: k2,
    })
}
