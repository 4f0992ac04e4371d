//! Critical-regime (`rho - 1 = O(N^{-1/3})`) asymptotics: the cubic for
//! `A(gamma)`, the two-term eigenvalue approximation, and eigenvector
//! approximations on the `U`-, `V`-, `xi`- and small-`n` scales.

use crate::error::{Error, Result};
use crate::model::QueueParams;
use crate::numeric::LogSigned;
use crate::specialfn::{
    adaptive_quad_singular, hermite, psi_series, QuadratureSpec, SingularEnd,
};

/// Relative half-width of the turning-point exclusion zone around `V = A`:
/// the `V`-scale expansion is an outer solution and the `U`-scale form owns
/// the neighborhood.
pub const TURNING_EXCLUSION: f64 = 0.05;

/// Scaling frame of the critical regime: the positive root `A` of
/// `gamma - A + 2/A^2 = 0` together with `f = 1/A + 1/A^4` (the
/// `N^{-2/3}`-scale eigenvalue constant) and `atilde = 1/A^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalFrame {
    pub gamma: f64,
    pub a: f64,
    pub f: f64,
    pub atilde: f64,
}

/// Cubic residual `gamma - A + 2/A^2`.
fn cubic_residual(gamma: f64, a: f64) -> f64 {
    gamma - a + 2.0 / (a * a)
}

/// Explicit inversion of the cubic, real only while `81 + 6 gamma^3 >= 0`.
fn solve_a_closed(gamma: f64) -> Option<f64> {
    let disc = 81.0 + 6.0 * gamma * gamma * gamma;
    if disc < 0.0 {
        return None;
    }
    let b = (gamma * gamma * gamma + 27.0 + 3.0 * disc.sqrt()).cbrt();
    Some((gamma * gamma + b * gamma + b * b) / (3.0 * b))
}

/// Safeguarded Newton on the cubic; `gamma - A + 2/A^2` is strictly
/// decreasing in `A > 0`, so the positive root is unique.
fn solve_a_newton(gamma: f64) -> f64 {
    let mut lo = 1e-12;
    let mut hi = if gamma > 0.0 {
        gamma + 2.0
    } else {
        2.0 * (1.0f64).max(-2.0 / gamma.min(-1e-12))
    };
    let mut a = 0.5 * (lo + hi);
    for _ in 0..200 {
        let r = cubic_residual(gamma, a);
        if r.abs() < 1e-14 * (1.0 + gamma.abs()) {
            return a;
        }
        if r > 0.0 {
            lo = a;
        } else {
            hi = a;
        }
        let dr = -1.0 - 4.0 / (a * a * a);
        let newton = a - r / dr;
        a = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    a
}

/// Solve the cubic `gamma - A + 2/A^2 = 0` for the positive root and build
/// the critical frame.
///
/// Uses the explicit inversion where it stays real (`81 + 6 gamma^3 >= 0`)
/// with a Newton polish, and the safeguarded Newton path otherwise (the
/// closed form passes through complex intermediates there).
pub fn solve_a(gamma: f64) -> CriticalFrame {
    let mut a = match solve_a_closed(gamma) {
        Some(a0) => a0,
        None => solve_a_newton(gamma),
    };
    // A Newton polish brings the residual to rounding level; steps are only
    // accepted while they shrink the residual.
    for _ in 0..3 {
        let r = cubic_residual(gamma, a);
        if r == 0.0 {
            break;
        }
        let candidate = a - r / (-1.0 - 4.0 / (a * a * a));
        if candidate > 0.0 && cubic_residual(gamma, candidate).abs() < r.abs() {
            a = candidate;
        } else {
            break;
        }
    }
    let f = 1.0 / a + 1.0 / (a * a * a * a);
    CriticalFrame {
        gamma,
        a,
        f,
        atilde: 1.0 / (a * a),
    }
}

/// Eigenvalue correction coefficient
/// `g(j, gamma) = 1/A^6 - 3/A^3 + 1/2 + (j + 1/2) sqrt(1 + 4/A^3)`.
pub fn g_coeff(frame: &CriticalFrame, j: usize) -> f64 {
    let a3 = frame.a.powi(3);
    1.0 / (a3 * a3) - 3.0 / a3 + 0.5 + (j as f64 + 0.5) * (1.0 + 4.0 / a3).sqrt()
}

/// Two-term eigenvalue approximation
/// `nu_j = f(gamma) N^{-2/3} + g(j, gamma) N^{-1}`.
///
/// Defined for every `gamma`; callers choose when the critical scaling is
/// appropriate.
pub fn eigenvalue(p: &QueueParams, j: usize) -> f64 {
    let frame = solve_a(p.gamma());
    let big_n = p.population() as f64;
    frame.f * big_n.powf(-2.0 / 3.0) + g_coeff(&frame, j) / big_n
}

/// Center of the sign-change window: `n = N^{2/3} A(gamma)`.
pub fn u_scale_center(p: &QueueParams) -> f64 {
    (p.population() as f64).powf(2.0 / 3.0) * solve_a(p.gamma()).a
}

/// Eigenvector on the `U`-scale (`U = (n - N^{2/3} A)/sqrt(N)`): sign and
/// log of `exp(U N^{1/6}/A^2 + U^2 (1 - sqrt(1 + 4/A^3))/4) He_j(...U)`,
/// without the `k0` factor.
pub fn eigvec_u(p: &QueueParams, j: usize, n: f64) -> LogSigned {
    let frame = solve_a(p.gamma());
    let big_n = p.population() as f64;
    let u = (n - big_n.powf(2.0 / 3.0) * frame.a) / big_n.sqrt();
    let root = (1.0 + 4.0 / frame.a.powi(3)).sqrt();
    let he = hermite(j, root.sqrt() * u);
    if he == 0.0 {
        return LogSigned::zero();
    }
    let log = u * big_n.powf(1.0 / 6.0) * frame.atilde + u * u * (1.0 - root) / 4.0
        + he.abs().ln();
    LogSigned::new(log, if he > 0.0 { 1 } else { -1 })
}

/// Discriminant `(V - gamma)^2 - 4 (f - 1/V)`; nonnegative for `V > 0` with
/// a double zero at `V = A`.
///
/// Evaluated through the exact factorization
/// `(V - A)^2 (1 + 4/(A^2 V))`, which follows from `gamma = A - 2/A^2` and
/// `f = 1/A + 1/A^4`. The raw form cancels catastrophically near the double
/// zero (true size `(V-A)^2` against `O(1)` terms), which would make the
/// transport-equation driver below pure noise in a strip around `V = A`.
pub fn v_discriminant(frame: &CriticalFrame, v: f64) -> f64 {
    let d = v - frame.a;
    d * d * disc_factor(frame, v)
}

/// `B(V) = 1 + 4/(A^2 V)`, the smooth factor of the discriminant.
fn disc_factor(frame: &CriticalFrame, v: f64) -> f64 {
    1.0 + 4.0 / (frame.a * frame.a * v)
}

fn sqrt_disc(frame: &CriticalFrame, v: f64) -> f64 {
    (v - frame.a).abs() * disc_factor(frame, v).sqrt()
}

/// `F'_+(V)` (branch used for `0 < V < A`); behaves like `1/sqrt(V)` at the
/// origin.
pub fn f_prime_plus(frame: &CriticalFrame, v: f64) -> f64 {
    0.5 * ((v - frame.gamma) + sqrt_disc(frame, v))
}

/// `F'_-(V)` (branch used for `V > A`).
pub fn f_prime_minus(frame: &CriticalFrame, v: f64) -> f64 {
    0.5 * ((v - frame.gamma) - sqrt_disc(frame, v))
}

/// WKB exponent `calF(V)`: integral of `F'_+` up to `min(V, A)`, continued
/// with `F'_-` past the turning point. Continuous and once differentiable
/// across `V = A`.
pub fn v_scale_exponent(frame: &CriticalFrame, v: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::Domain(format!("V must be positive, got {v}")));
    }
    let a = frame.a;
    let upper = v.min(a);
    let mut total = adaptive_quad_singular(
        |w| f_prime_plus(frame, w),
        0.0,
        upper,
        SingularEnd::Left,
        quad,
    )?;
    if v > a {
        total += adaptive_quad_singular(
            |w| f_prime_minus(frame, w),
            a,
            v,
            SingularEnd::None,
            quad,
        )?;
    }
    Ok(total)
}

/// Amplitude driver on the chosen branch. Solves the transport equation for
/// `calG`; the closed form is not available, so it is defined operationally
/// from the ratio below, which has the limits `H_+ ~ 1/(4V)` as `V -> 0`
/// and `H_+- ~ -j/(V - A)` as `V -> A` (verified in tests; the subtracted
/// integrands in `calG` are therefore integrable).
fn h_branch(frame: &CriticalFrame, j: usize, v: f64, plus: bool) -> f64 {
    let g = g_coeff(frame, j);
    let sq = sqrt_disc(frame, v);
    let fp = if plus {
        f_prime_plus(frame, v)
    } else {
        f_prime_minus(frame, v)
    };
    // d/dV sqrt(disc) through the factored form: with disc = d^2 B,
    // disc'/(2 sqrt(disc)) = sign(d) (2B + d B') / (2 sqrt(B)), smooth in d.
    let d = v - frame.a;
    let b = disc_factor(frame, v);
    let b_prime = -4.0 / (frame.a * frame.a * v * v);
    let dsqrt = d.signum() * (2.0 * b + d * b_prime) / (2.0 * b.sqrt());
    let f_second = 0.5 * (1.0 + if plus { 1.0 } else { -1.0 } * dsqrt);
    let num = g + f_second + (1.0 / v - frame.gamma * v) * fp
        + 0.5 * (frame.gamma - v) * fp * fp;
    let den = if plus { sq } else { -sq };
    num / den
}

/// Regularized amplitude integral `int_0^upper [1/(4w) - j/(w-A) - H_+] dw`.
fn amplitude_plus(
    frame: &CriticalFrame,
    j: usize,
    upper: f64,
    to_turning_point: bool,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let a = frame.a;
    let flag = if to_turning_point {
        // Left end has the w^{-1/2} residue of the 1/(4w) cancellation; at
        // the right end the pole subtraction cancels two large terms and the
        // substitution keeps nodes quadratically away from the noise.
        SingularEnd::Both
    } else {
        SingularEnd::Left
    };
    adaptive_quad_singular(
        |w| 0.25 / w - j as f64 / (w - a) - h_branch(frame, j, w, true),
        0.0,
        upper,
        flag,
        quad,
    )
}

/// Eigenvector on the `V`-scale (`V = n/N^{2/3} > 0`): sign and log of
/// `|calG(V, j) exp(N^{1/3} calF(V))|`, without the `k1` factor.
///
/// Errors with [`Error::TurningPoint`] inside `|V - A| <= 0.05 A`, where the
/// `U`-scale form must be used instead.
pub fn eigvec_v(p: &QueueParams, j: usize, n: f64, quad: &QuadratureSpec) -> Result<LogSigned> {
    let frame = solve_a(p.gamma());
    let big_n = p.population() as f64;
    let v = n / big_n.powf(2.0 / 3.0);
    if !(v > 0.0) {
        return Err(Error::Domain(format!(
            "V-scale form requires V = n/N^(2/3) > 0, got V = {v}"
        )));
    }
    let a = frame.a;
    if (v - a).abs() <= TURNING_EXCLUSION * a {
        return Err(Error::TurningPoint { v, a });
    }
    let jf = j as f64;
    let log_g;
    let sign;
    if v < a {
        log_g = -0.25 * v.ln() + jf * (a - v).ln() + amplitude_plus(&frame, j, v, false, quad)?;
        sign = if j.is_multiple_of(2) { 1 } else { -1 };
    } else {
        let const_part = amplitude_plus(&frame, j, a, true, quad)?;
        let tail = adaptive_quad_singular(
            |w| jf / (w - a) + h_branch(&frame, j, w, false),
            a,
            v,
            SingularEnd::Left,
            quad,
        )?;
        log_g = -0.25 * a.ln() + jf * (v - a).ln() + const_part - tail;
        sign = 1;
    }
    let cal_f = v_scale_exponent(&frame, v, quad)?;
    Ok(LogSigned::new(
        log_g + big_n.powf(1.0 / 3.0) * cal_f,
        sign,
    ))
}

/// Eigenvector on the `xi`-scale (`0 < xi <= 1`): sign and log of
/// `|G(xi, j) exp(N^{1/3} F(xi))|` with `F = f(gamma) ln(xi)` and
/// `G = xi^{g - gamma f} exp((1 - gamma f)/xi)`, without the `k2` factor.
pub fn eigvec_xi(p: &QueueParams, j: usize, n: f64) -> Result<LogSigned> {
    let frame = solve_a(p.gamma());
    let big_n = p.population() as f64;
    let xi = n / big_n;
    if !(xi > 0.0 && xi <= 1.0) {
        return Err(Error::Domain(format!(
            "xi-scale form requires 0 < xi <= 1, got xi = {xi}"
        )));
    }
    let g = g_coeff(&frame, j);
    let gf = frame.gamma * frame.f;
    let log = big_n.powf(1.0 / 3.0) * frame.f * xi.ln() + (g - gf) * xi.ln() + (1.0 - gf) / xi;
    Ok(LogSigned::new(log, 1))
}

/// Eigenvector for `n = O(1)`: the same `psi(n)` sequence as the
/// subcritical case, with `rho^{-n/2} ~ 1` on the critical scale.
pub fn eigvec_small_n(_p: &QueueParams, n: usize) -> f64 {
    psi_series(n)
}

/// Matching constants relative to the `V`-scale `k1`, all as sign/log pairs
/// (the exponential factors carry `N^{1/3}`-scale exponents).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CritMatching {
    pub k0_over_k1: LogSigned,
    pub k2_over_k1: LogSigned,
    pub k3_over_k1: LogSigned,
}

/// Matching constants for the critical regime.
pub fn matching_constants(
    p: &QueueParams,
    j: usize,
    quad: &QuadratureSpec,
) -> Result<CritMatching> {
    let frame = solve_a(p.gamma());
    let big_n = p.population() as f64;
    let a = frame.a;
    let jf = j as f64;
    let g = g_coeff(&frame, j);
    let gf = frame.gamma * frame.f;
    let j_exp = adaptive_quad_singular(
        |w| f_prime_plus(&frame, w),
        0.0,
        a,
        SingularEnd::Left,
        quad,
    )?;
    let i_amp = amplitude_plus(&frame, j, a, true, quad)?;

    let log_k0 = -0.25 * a.ln() - jf / 4.0 * (1.0 + 4.0 / a.powi(3)).ln()
        - jf / 6.0 * big_n.ln()
        + big_n.powf(1.0 / 3.0) * j_exp
        + i_amp;
    let log_k2 = (g - gf) / 3.0 * big_n.ln()
        + (-g + gf + jf - 0.25) * a.ln()
        + i_amp
        + big_n.powf(1.0 / 3.0)
            * (frame.f / 3.0 * big_n.ln() - frame.f * a.ln() - (1.0 - gf) / a + j_exp);
    let log_k3 = (2.0 * (std::f64::consts::PI / std::f64::consts::E).sqrt()).ln()
        + big_n.ln() / 6.0
        + jf * a.ln();
    Ok(CritMatching {
        k0_over_k1: LogSigned::new(log_k0, 1),
        k2_over_k1: LogSigned::new(log_k2, 1),
        k3_over_k1: LogSigned::new(log_k3, if j.is_multiple_of(2) { 1 } else { -1 }),
    })
}
