//! Sojourn-time densities and tails: the conditional density from the
//! spectral sum, the unconditional density, the single-mode tail
//! approximation, the `-log p(t)/t` diagnostic tables, and an independent
//! Runge-Kutta oracle for the spectral sum.

use crate::error::{Error, Result};
use crate::model::{arrival_state_distribution, build_generator, initial_condition, QueueParams};
use crate::numeric::KahanSum;
use crate::spectral::{full_spectrum, Spectrum};

/// Grid of the tail diagnostic `-log p(t)/t`: exact column from the full
/// spectral sum, approximate column from the `j = 0` mode only, and their
/// relative error, plus the `nu_0` limit row.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityTable {
    pub t: Vec<f64>,
    pub exact: Vec<f64>,
    pub approx: Vec<f64>,
    pub rel_err: Vec<f64>,
    pub nu0: f64,
}

/// Conditional sojourn-time density `p_n(t)`: the spectral sum
/// `sum_j c_j phi_j(n) e^{-nu_j t}`, accumulated smallest-mode-last
/// (descending `nu_j`) with compensated summation.
pub fn p_conditional(s: &Spectrum, n: usize, t: f64) -> f64 {
    let mut acc = KahanSum::new();
    for j in (0..s.len()).rev() {
        acc.add(s.c[j] * s.phi[j][n] * (-s.nu[j] * t).exp());
    }
    acc.value()
}

/// Unconditional sojourn-time density `p(t)`: the conditional densities
/// weighted by the arrival-instant state distribution.
pub fn p_unconditional(s: &Spectrum, dist: &[f64], t: f64) -> f64 {
    let mut acc = KahanSum::new();
    for n in 0..s.len() {
        acc.add(dist[n] * p_conditional(s, n, t));
    }
    acc.value()
}

/// Weight of mode `j` in the unconditional density:
/// `c_j <phi_j, dist>`.
pub fn mode_weight(s: &Spectrum, dist: &[f64], j: usize) -> f64 {
    let mut acc = KahanSum::new();
    for n in 0..s.len() {
        acc.add(s.phi[j][n] * dist[n]);
    }
    s.c[j] * acc.value()
}

/// Single-mode tail approximation of the unconditional density: the full
/// sum restricted to `j = 0`, `c_0 <phi_0, dist> e^{-nu_0 t}`.
pub fn tail_approx(s: &Spectrum, dist: &[f64], t: f64) -> f64 {
    mode_weight(s, dist, 0) * (-s.nu[0] * t).exp()
}

/// Closed form of `int_0^inf p(t) dt = sum_j c_j <phi_j, dist> / nu_j`;
/// equals 1 for a valid decomposition.
pub fn normalization_integral(s: &Spectrum, dist: &[f64]) -> f64 {
    let mut acc = KahanSum::new();
    for j in (0..s.len()).rev() {
        acc.add(mode_weight(s, dist, j) / s.nu[j]);
    }
    acc.value()
}

/// Closed form of the mean sojourn time
/// `E[V] = sum_j c_j <phi_j, dist> / nu_j^2`.
pub fn mean_sojourn(s: &Spectrum, dist: &[f64]) -> f64 {
    let mut acc = KahanSum::new();
    for j in (0..s.len()).rev() {
        acc.add(mode_weight(s, dist, j) / (s.nu[j] * s.nu[j]));
    }
    acc.value()
}

/// Survival function `Pr[V > t] = sum_j c_j <phi_j, dist> e^{-nu_j t}/nu_j`.
pub fn survival(s: &Spectrum, dist: &[f64], t: f64) -> f64 {
    let mut acc = KahanSum::new();
    for j in (0..s.len()).rev() {
        acc.add(mode_weight(s, dist, j) * (-s.nu[j] * t).exp() / s.nu[j]);
    }
    acc.value()
}

/// Tabulate `-log p(t)/t` (exact and single-mode columns) on an ascending
/// positive grid, with the `nu_0` limit row.
pub fn density_table(p: &QueueParams, t_grid: &[f64]) -> Result<DensityTable> {
    if t_grid.is_empty() {
        return Err(Error::InvalidParams("empty time grid".into()));
    }
    for w in t_grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidParams("time grid must be ascending".into()));
        }
    }
    if t_grid[0] <= 0.0 {
        return Err(Error::InvalidParams("time grid must be positive".into()));
    }
    let s = full_spectrum(p)?;
    let dist = arrival_state_distribution(p);
    let mut exact = Vec::with_capacity(t_grid.len());
    let mut approx = Vec::with_capacity(t_grid.len());
    let mut rel_err = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let pe = p_unconditional(&s, &dist, t);
        let pa = tail_approx(&s, &dist, t);
        if !(pe > 0.0) || !(pa > 0.0) {
            return Err(Error::Domain(format!(
                "density not positive at t = {t}: exact {pe}, tail {pa}"
            )));
        }
        let de = -pe.ln() / t;
        let da = -pa.ln() / t;
        exact.push(de);
        approx.push(da);
        rel_err.push((da - de).abs() / de);
    }
    Ok(DensityTable {
        t: t_grid.to_vec(),
        exact,
        approx,
        rel_err,
        nu0: s.nu[0],
    })
}

// Cash-Karp embedded Runge-Kutta 4(5) tableau.
const CK_B: [[f64; 5]; 5] = [
    [0.2, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0],
    [0.3, -0.9, 1.2, 0.0, 0.0],
    [-11.0 / 54.0, 2.5, -70.0 / 27.0, 35.0 / 27.0, 0.0],
    [
        1631.0 / 55296.0,
        175.0 / 512.0,
        575.0 / 13824.0,
        44275.0 / 110592.0,
        253.0 / 4096.0,
    ],
];
const CK_C5: [f64; 6] = [37.0 / 378.0, 0.0, 250.0 / 621.0, 125.0 / 594.0, 0.0, 512.0 / 1771.0];
const CK_C4: [f64; 6] = [
    2825.0 / 27648.0,
    0.0,
    18575.0 / 48384.0,
    13525.0 / 55296.0,
    277.0 / 14336.0,
    0.25,
];

/// Independent check of the spectral sum: integrate `p' = A p` from the
/// initial condition with an adaptive embedded Runge-Kutta pair to absolute
/// tolerance `1e-10` and return `p_n(t)`.
///
/// The explicit pair is adequate because the spectral radius is below
/// `2 + 2 rho`; the oracle refuses `rho > 50` (use shorter horizons and a
/// stiff integrator elsewhere if that regime is ever needed) and `t > 200`.
pub fn ode_oracle(p: &QueueParams, t: f64, n: usize) -> Result<f64> {
    if p.rho() > 50.0 {
        return Err(Error::Domain(format!(
            "ODE oracle refuses rho = {} > 50 (too stiff for the explicit pair)",
            p.rho()
        )));
    }
    if !(0.0..=200.0).contains(&t) {
        return Err(Error::Domain(format!(
            "ODE oracle horizon must satisfy 0 <= t <= 200, got {t}"
        )));
    }
    if n >= p.population() {
        return Err(Error::Domain(format!(
            "state index {n} out of range for N = {}",
            p.population()
        )));
    }
    let g = build_generator(p);
    let dim = g.len();
    let mut y = initial_condition(p);
    let atol = 1e-10;
    let mut time = 0.0f64;
    let mut h = (t / 10.0).min(0.1).max(1e-6);
    let mut k = vec![vec![0.0f64; dim]; 6];
    let mut stage = vec![0.0f64; dim];

    while time < t {
        if h < 1e-14 * t.max(1.0) {
            return Err(Error::StepSizeUnderflow { t: time });
        }
        h = h.min(t - time);
        g.apply(&y, &mut k[0]);
        for s in 0..5 {
            for i in 0..dim {
                let mut acc = y[i];
                for (m, k_m) in k.iter().enumerate().take(s + 1) {
                    acc += h * CK_B[s][m] * k_m[i];
                }
                stage[i] = acc;
            }
            let (head, tail) = k.split_at_mut(s + 1);
            let _ = head;
            g.apply(&stage, &mut tail[0]);
        }
        let mut err = 0.0f64;
        for i in 0..dim {
            let mut y5 = y[i];
            let mut y4 = y[i];
            for m in 0..6 {
                y5 += h * CK_C5[m] * k[m][i];
                y4 += h * CK_C4[m] * k[m][i];
            }
            err = err.max((y5 - y4).abs());
            stage[i] = y5;
        }
        if err <= atol {
            time += h;
            y.copy_from_slice(&stage);
            let grow = if err > 0.0 {
                0.9 * (atol / err).powf(0.2)
            } else {
                5.0
            };
            h *= grow.clamp(0.2, 5.0);
        } else {
            h *= (0.9 * (atol / err).powf(0.25)).clamp(0.1, 0.9);
        }
    }
    Ok(y[n])
}
