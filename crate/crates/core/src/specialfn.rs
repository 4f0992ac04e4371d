//! Special functions shared by the asymptotics modules: probabilists'
//! Hermite polynomials, the small-`n` limiting sequence, and adaptive
//! Gauss-Kronrod quadrature with endpoint-singularity substitution.

use crate::error::{Error, Result};

/// Probabilists' Hermite polynomial `He_j(z)` via the three-term recurrence
/// `He_{j+1} = z He_j - j He_{j-1}`, with `He_0 = 1`, `He_1 = z`.
///
/// Intended for `j <= 200`.
pub fn hermite(j: usize, z: f64) -> f64 {
    match j {
        0 => 1.0,
        1 => z,
        _ => {
            let mut prev = 1.0;
            let mut cur = z;
            for k in 1..j {
                let next = z * cur - k as f64 * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Derivative `d/dz He_j(z) = j He_{j-1}(z)`.
pub fn hermite_deriv(j: usize, z: f64) -> f64 {
    if j == 0 {
        0.0
    } else {
        j as f64 * hermite(j - 1, z)
    }
}

/// The limiting small-`n` eigenvector shape `psi(n)`: the coefficient of
/// `z^n` in `(1-z)^{-1} exp(1/(1-z))`, i.e. `sum_{k>=0} C(n+k, n) / k!`.
///
/// Terms are generated by the exact ratio `t_{k+1}/t_k = (n+k+1)/(k+1)^2`
/// and summed until they fall below `1e-16` of the partial sum; this is the
/// series itself, free of the cancellation a forward recurrence in `n`
/// would suffer. Intended for `n <= 500`.
pub fn psi_series(n: usize) -> f64 {
    let nf = n as f64;
    let mut term = 1.0f64; // k = 0: C(n,n)/0! = 1
    let mut sum = term;
    let mut k = 0.0f64;
    loop {
        term *= (nf + k + 1.0) / ((k + 1.0) * (k + 1.0));
        sum += term;
        k += 1.0;
        if term < 1e-16 * sum {
            return sum;
        }
        debug_assert!(k < 100_000.0, "psi series failed to converge");
    }
}

/// Tolerances and recursion budget for [`adaptive_quad`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: usize,
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_depth: usize) -> Result<Self> {
        if !(abs_tol > 0.0) || !(rel_tol > 0.0) {
            return Err(Error::InvalidParams(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if max_depth < 10 {
            return Err(Error::InvalidParams(
                "quadrature max_depth must be at least 10".into(),
            ));
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_depth,
        })
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_depth: 48,
        }
    }
}

/// Which endpoint carries an integrable algebraic singularity (no worse
/// than `w^{-1/2}`). The flagged endpoint is removed exactly by the
/// substitution `w = a + s^2` (mirrored at `b`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularEnd {
    None,
    Left,
    Right,
    Both,
}

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK QK15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Gauss-Kronrod 15/7 on a single panel: returns (kronrod, |kronrod-gauss|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let fsum = f(c - x) + f(c + x);
        kronrod += WGK[i] * fsum;
        if i % 2 == 1 {
            gauss += WG[i / 2] * fsum;
        }
    }
    (kronrod * h, (kronrod - gauss).abs() * h.abs())
}

/// Adaptive quadrature of `f` over `[a, b]` by panel bisection with a
/// 15-point Gauss-Kronrod rule per panel.
///
/// Fails with [`Error::QuadratureTolerance`] (carrying the best estimate and
/// the achieved error bound) if the budget is exhausted before the error
/// estimate drops below `max(abs_tol, rel_tol * |integral|)`.
pub fn adaptive_quad<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    adaptive_quad_singular(f, a, b, SingularEnd::None, spec)
}

/// [`adaptive_quad`] with endpoint-singularity handling.
///
/// When a singular end is flagged, `a <= b` is required; with
/// `SingularEnd::None` reversed limits negate the result.
pub fn adaptive_quad_singular<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    singular: SingularEnd,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain("quadrature limits must be finite".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        if singular != SingularEnd::None {
            return Err(Error::Domain(
                "singular-endpoint quadrature requires a <= b".into(),
            ));
        }
        return adapt(&f, b, a, spec).map(|v| -v);
    }
    match singular {
        SingularEnd::None => adapt(&f, a, b, spec),
        SingularEnd::Left => adapt_left_singular(&f, a, b, spec),
        SingularEnd::Right => adapt_right_singular(&f, a, b, spec),
        SingularEnd::Both => {
            let mid = 0.5 * (a + b);
            let left = adapt_left_singular(&f, a, mid, spec)?;
            let right = adapt_right_singular(&f, mid, b, spec)?;
            Ok(left + right)
        }
    }
}

/// Substitution `w = a + s^2` removing an algebraic singularity at `a`.
fn adapt_left_singular<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let smax = (b - a).sqrt();
    let g = |s: f64| {
        let w = a + s * s;
        if w <= a {
            return 0.0;
        }
        2.0 * s * f(w)
    };
    adapt(&g, 0.0, smax, spec)
}

/// Substitution `w = b - s^2` removing an algebraic singularity at `b`.
fn adapt_right_singular<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let smax = (b - a).sqrt();
    let g = |s: f64| {
        let w = b - s * s;
        if w >= b {
            return 0.0;
        }
        2.0 * s * f(w)
    };
    adapt(&g, 0.0, smax, spec)
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    let total_width = b - a;
    // (lo, hi, depth)
    let mut stack = vec![(a, b, 0usize)];
    let mut sum = 0.0f64;
    let mut err_accepted = 0.0f64;
    // First pass to seed the relative-tolerance scale.
    let (whole, _) = gk15(f, a, b);
    let scale = whole.abs().max(1e-300);
    // Caps runaway subdivision of noisy integrands; overflowing panels are
    // accepted as-is and counted toward the error, which then fails the
    // final tolerance check instead of hanging.
    let mut panel_budget = 200_000usize;

    while let Some((lo, hi, depth)) = stack.pop() {
        let (val, err) = gk15(f, lo, hi);
        let local_tol =
            spec.abs_tol.max(spec.rel_tol * scale) * ((hi - lo) / total_width).max(1e-300);
        panel_budget = panel_budget.saturating_sub(1);
        if err <= local_tol
            || depth >= spec.max_depth
            || (hi - lo) < 1e-15 * total_width
            || panel_budget == 0
        {
            sum += val;
            err_accepted += err;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }

    if !sum.is_finite() {
        return Err(Error::Domain(
            "quadrature produced a non-finite result".into(),
        ));
    }
    let tol = spec.abs_tol.max(spec.rel_tol * sum.abs());
    if err_accepted > tol {
        return Err(Error::QuadratureTolerance {
            estimate: sum,
            achieved: err_accepted,
        });
    }
    Ok(sum)
}
