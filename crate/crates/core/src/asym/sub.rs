//! Subcritical (`rho < 1`) asymptotics: the four-term eigenvalue expansion
//! and the eigenvector approximations on the `y`-, `x`-, `xi`- and
//! small-`n` scales, with the matching constants linking them.

use crate::error::{Error, Result};
use crate::model::QueueParams;
use crate::numeric::LogSigned;
use crate::specialfn::{
    adaptive_quad_singular, hermite, hermite_deriv, psi_series, QuadratureSpec, SingularEnd,
};

/// The `xi`-scale expansion is an outer solution; it is not evaluated below
/// this `xi`: the turning point sits at `xi -> 0` on this scale (the `x`-
/// and `y`-scale forms own small `n = O(sqrt(N))`). The cutoff is an
/// artifact convention, not something the theory pins down.
pub const XI_MIN: f64 = 0.02;

fn ensure_sub(p: &QueueParams, operation: &'static str) -> Result<()> {
    if p.rho() < 1.0 {
        Ok(())
    } else {
        Err(Error::Regime {
            operation,
            required: "rho < 1",
            rho: p.rho(),
        })
    }
}

/// Four-term expansion of an eigenvalue `nu_j` for `rho < 1`:
/// `(1-sqrt(rho))^2 + c1/sqrt(N) + c2(j)/N^{3/4} + c4(j)/N`.
/// There is no `N^{-7/8}` term (`c3 = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubEigExpansion {
    pub leading: f64,
    pub c1: f64,
    pub c2: f64,
    pub c4: f64,
    pub terms: usize,
    n: f64,
}

impl SubEigExpansion {
    /// Contribution of each of the four terms at this `N`.
    pub fn term_values(&self) -> [f64; 4] {
        [
            self.leading,
            self.c1 / self.n.sqrt(),
            self.c2 / self.n.powf(0.75),
            self.c4 / self.n,
        ]
    }

    /// Partial sum using the first `terms` terms (1..=4).
    pub fn partial(&self, terms: usize) -> f64 {
        self.term_values().iter().take(terms).sum()
    }

    /// The assembled approximation with the configured number of terms.
    pub fn value(&self) -> f64 {
        self.partial(self.terms)
    }
}

/// Coefficient `c1 = 2 sqrt(rho) sqrt(1 - sqrt(rho))`.
pub fn coeff_c1(rho: f64) -> f64 {
    let sr = rho.sqrt();
    2.0 * sr * (1.0 - sr).sqrt()
}

/// Coefficient `c2(j) = (2j+1) sqrt(rho) (1 - sqrt(rho))^{3/4}`.
pub fn coeff_c2(rho: f64, j: usize) -> f64 {
    let sr = rho.sqrt();
    (2.0 * j as f64 + 1.0) * sr * (1.0 - sr).powf(0.75)
}

/// Coefficient `c4(j)`; singular as `rho -> 1`.
pub fn coeff_c4(rho: f64, j: usize) -> f64 {
    let sr = rho.sqrt();
    let jf = j as f64;
    sr * (22.0 * sr - 3.0 * rho - 15.0) / (16.0 * (1.0 - sr))
        - 0.375 * sr * (1.0 - sr) * jf * (jf + 1.0)
}

/// Eigenvalue expansion for `rho < 1` with the requested number of terms.
pub fn eigenvalue(p: &QueueParams, j: usize, terms: usize) -> Result<SubEigExpansion> {
    ensure_sub(p, "sub eigenvalue expansion")?;
    if !(1..=4).contains(&terms) {
        return Err(Error::InvalidParams(format!(
            "term count must be in 1..=4, got {terms}"
        )));
    }
    let rho = p.rho();
    let sr = rho.sqrt();
    Ok(SubEigExpansion {
        leading: (1.0 - sr) * (1.0 - sr),
        c1: coeff_c1(rho),
        c2: coeff_c2(rho, j),
        c4: coeff_c4(rho, j),
        terms,
        n: p.population() as f64,
    })
}

/// Center of the `y`-scale window: `n = sqrt(N)/sqrt(1 - sqrt(rho))`.
pub fn y_scale_center(p: &QueueParams) -> f64 {
    (p.population() as f64).sqrt() / (1.0 - p.rho().sqrt()).sqrt()
}

/// Eigenvector on the `y`-scale in symmetrized units: the value of
/// `rho^{n/2} phi_j(n) / k0`, i.e. `Phi0_j(y)` plus optionally the
/// `N^{-1/8} Phi1_j(y)` correction. `n` may be fractional so the continuous
/// profile (and its zero crossings) can be examined.
pub fn eigvec_y(p: &QueueParams, j: usize, n: f64, with_correction: bool) -> Result<f64> {
    ensure_sub(p, "y-scale eigenvector")?;
    let rho = p.rho();
    let sr = rho.sqrt();
    let big_n = p.population() as f64;
    let y = (n - y_scale_center(p)) / big_n.powf(0.375);
    let z = std::f64::consts::SQRT_2 * (1.0 - sr).powf(0.375) * y;

    let he = hermite(j, z);
    let gauss = (-z * z / 4.0).exp();
    let phi0 = gauss * he;
    if !with_correction {
        return Ok(phi0);
    }
    // d/dz [e^{-z^2/4} He_j] = e^{-z^2/4} (j He_{j-1} - z/2 He_j)
    let dphi0 = gauss * (hermite_deriv(j, z) - 0.5 * z * he);
    let alpha = (rho / 2.0).sqrt() * (1.0 - sr).powf(-0.875);
    let beta = -(1.0 - sr).powf(0.125) / (4.0 * std::f64::consts::SQRT_2);
    let phi1 = (2.0 * beta / 3.0) * (z * z + 8.0 * j as f64 + 4.0) * dphi0
        + (alpha / 2.0 - 2.0 * beta / 3.0) * z * phi0;
    Ok(phi0 + big_n.powf(-0.125) * phi1)
}

/// Eigenvector on the `x`-scale (`x = n/sqrt(N)`, `0 < x`): sign and log of
/// `|g_j(x) e^{N^{1/4} f(x)}|`, without the `rho^{-n/2}` and `k1` factors.
///
/// The factor `(1 - sqrt(1-sqrt(rho)) x)^j` vanishes at the `y`-scale
/// center; the returned sign is 0 there.
pub fn eigvec_x(p: &QueueParams, j: usize, n: f64) -> Result<LogSigned> {
    ensure_sub(p, "x-scale eigenvector")?;
    let rho = p.rho();
    let sr = rho.sqrt();
    let u = (1.0 - sr).sqrt();
    let big_n = p.population() as f64;
    let x = n / big_n.sqrt();
    if !(x > 0.0) {
        return Err(Error::Domain(format!(
            "x-scale form requires x = n/sqrt(N) > 0, got x = {x}"
        )));
    }
    let f = x_scale_exponent(rho, x);
    let zero_factor = 1.0 - u * x;
    if zero_factor == 0.0 {
        return Ok(LogSigned::zero());
    }
    let sq = u.sqrt() * x.sqrt(); // (1-sqrt(rho))^{1/4} sqrt(x)
    let jf = j as f64;
    let log_g = jf * zero_factor.abs().ln() + x * x / 4.0 + (2.0 * jf + 1.0) * sq
        - 0.25 * x.ln()
        - (2.0 * jf + 1.0) * (1.0 + sq).ln();
    let sign = if zero_factor > 0.0 || j.is_multiple_of(2) { 1 } else { -1 };
    Ok(LogSigned::new(log_g + big_n.powf(0.25) * f, sign))
}

/// `f(x) = 2 sqrt(x) - (2/3) sqrt(1-sqrt(rho)) x^{3/2}`, the `x`-scale WKB
/// exponent; maximal at `x = 1/sqrt(1-sqrt(rho))`.
pub fn x_scale_exponent(rho: f64, x: f64) -> f64 {
    2.0 * x.sqrt() - (2.0 / 3.0) * (1.0 - rho.sqrt()).sqrt() * x.powf(1.5)
}

fn s_of_xi(rho: f64, xi: f64) -> f64 {
    (rho * xi * xi + 4.0 * xi * (1.0 - rho.sqrt())).sqrt()
}

/// `F'(xi) = ln e^{F'}` of the `xi`-scale exponent, in closed form.
pub fn xi_log_ef_prime(rho: f64, xi: f64) -> f64 {
    let sr = rho.sqrt();
    let s = s_of_xi(rho, xi);
    ((2.0 - sr * xi - s) / (2.0 * (1.0 - xi))).ln()
}

/// Leading `xi`-scale exponent `F(xi)` in closed form; `F(0) = 0`.
pub fn xi_exponent_f(rho: f64, xi: f64) -> f64 {
    let sr = rho.sqrt();
    let s = s_of_xi(rho, xi);
    let t = sr * s; // sqrt(rho^2 xi^2 + 4 rho xi (1 - sqrt(rho)))
    0.5 * xi * rho.ln() + xi * 2f64.ln() + 0.5 * xi
        - s / (2.0 * sr)
        - xi * (2.0 * sr - rho * xi + t).ln()
        + (rho - 4.0 * sr + 2.0) / (2.0 * rho)
            * ((rho * xi + 2.0 - 2.0 * sr + t) / (2.0 * (1.0 - sr))).ln()
        + 0.5
            * (((rho - 2.0 * sr + 2.0) * xi + 2.0 * (1.0 - sr) - (sr - 2.0) * s)
                / (2.0 * (1.0 - sr)))
            .ln()
}

fn xi_log_q(rho: f64, xi: f64) -> f64 {
    let sr = rho.sqrt();
    let t = sr * s_of_xi(rho, xi);
    ((2.0 * (1.0 - sr) + rho * xi + t) / (2.0 * (1.0 - sr))).ln()
}

/// First correction exponent `F_1(xi)`.
pub fn xi_exponent_f1(rho: f64, xi: f64) -> f64 {
    coeff_c1(rho) / rho * xi_log_q(rho, xi)
}

/// Second correction exponent `F_2(xi, j)`.
pub fn xi_exponent_f2(rho: f64, j: usize, xi: f64) -> f64 {
    coeff_c2(rho, j) / rho * xi_log_q(rho, xi)
}

/// Amplitude driver `H(v, j)` of the `xi`-scale form; behaves like `3/(4v)`
/// as `v -> 0`, so `3/(4v) - H` is integrable at the origin.
fn xi_h(rho: f64, j: usize, v: f64) -> f64 {
    let sr = rho.sqrt();
    let s = s_of_xi(rho, v);
    let num_ef = 2.0 - sr * v - s;
    let efp = num_ef / (2.0 * (1.0 - v));
    let emfp = 1.0 / efp;
    let s_prime = (rho * v + 2.0 * (1.0 - sr)) / s;
    let f_second = (-sr - s_prime) / num_ef + 1.0 / (1.0 - v);
    let f1_prime = coeff_c1(rho) / (sr * s);
    let numerator = (coeff_c4(rho, j) + rho) / sr - efp - emfp / v
        + (1.0 - 0.5 * sr * v) * (f_second + f1_prime * f1_prime);
    // (1 - v) e^{F'} - e^{-F'} = -s exactly.
    numerator / (-s)
}

/// Eigenvector on the `xi`-scale (`xi = n/N`): sign and log of
/// `|G(xi, j) exp(N F + sqrt(N) F1 + N^{1/4} F2)|`, without the
/// `rho^{-n/2}` and `k2` factors.
pub fn eigvec_xi(p: &QueueParams, j: usize, n: f64, quad: &QuadratureSpec) -> Result<LogSigned> {
    ensure_sub(p, "xi-scale eigenvector")?;
    let rho = p.rho();
    let big_n = p.population() as f64;
    let xi = n / big_n;
    if !(xi < 1.0) {
        return Err(Error::Domain(format!(
            "xi-scale form requires xi = n/N < 1, got xi = {xi}"
        )));
    }
    if xi < XI_MIN {
        return Err(Error::Domain(format!(
            "xi = {xi} is below the xi-scale validity cutoff {XI_MIN}; use the x- or y-scale form"
        )));
    }
    let amplitude = adaptive_quad_singular(
        |v| 0.75 / v - xi_h(rho, j, v),
        0.0,
        xi,
        SingularEnd::Left,
        quad,
    )?;
    let log_g = -0.75 * xi.ln() + amplitude;
    let log = log_g
        + big_n * xi_exponent_f(rho, xi)
        + big_n.sqrt() * xi_exponent_f1(rho, xi)
        + big_n.powf(0.25) * xi_exponent_f2(rho, j, xi);
    Ok(LogSigned::new(log, 1))
}

/// Eigenvector for `n = O(1)`: `rho^{-n/2} psi(n)`. The shape is independent
/// of the eigenvalue index; `j` enters only through the matching constant.
pub fn eigvec_small_n(p: &QueueParams, n: usize) -> Result<f64> {
    ensure_sub(p, "small-n eigenvector")?;
    Ok(p.rho().powf(-(n as f64) / 2.0) * psi_series(n))
}

/// Matching constants linking the scales, relative to the `x`-scale `k1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubMatching {
    /// `k0/k1` as sign and log magnitude: it carries
    /// `exp((4/3)(1-sqrt(rho))^{-1/4} N^{1/4})`.
    pub k0_over_k1: LogSigned,
    pub k2_over_k1: f64,
    pub k3_over_k1: f64,
}

/// Matching constants for `rho < 1`.
pub fn matching_constants(p: &QueueParams, j: usize) -> Result<SubMatching> {
    ensure_sub(p, "sub matching constants")?;
    let rho = p.rho();
    let sr = rho.sqrt();
    let big_n = p.population() as f64;
    let jf = j as f64;
    let one_m = 1.0 - sr;
    let log_k0 = -jf / 8.0 * big_n.ln()
        + (-2.5 * jf - 1.0) * 2f64.ln()
        + (jf + 1.0) / 8.0 * one_m.ln()
        + 1.0 / (4.0 * one_m)
        + 2.0 * jf
        + 1.0
        + (4.0 / 3.0) * one_m.powf(-0.25) * big_n.powf(0.25);
    let sign = if j.is_multiple_of(2) { 1 } else { -1 };
    Ok(SubMatching {
        k0_over_k1: LogSigned::new(log_k0, sign),
        k2_over_k1: sign as f64 * one_m.powf(-0.25) * big_n.powf(-0.375),
        k3_over_k1: 2.0 * std::f64::consts::PI.sqrt() * big_n.powf(0.125)
            / std::f64::consts::E.sqrt(),
    })
}
