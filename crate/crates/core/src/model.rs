//! Queue parameters, the tridiagonal generator, the initial condition and
//! the distribution of the state seen by an arriving customer.

use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, KahanSum};
use statrs::function::gamma::ln_gamma;

/// Parameters of the finite-population processor-sharing queue.
///
/// `N` is the total customer population and `rho = lambda_0 * N / mu` the
/// traffic intensity, with time scaled so that the mean service time is 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueParams {
    n: usize,
    rho: f64,
}

impl QueueParams {
    pub fn new(n: usize, rho: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParams("population N must be >= 1".into()));
        }
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::InvalidParams(format!(
                "traffic intensity rho must be a positive finite real, got {rho}"
            )));
        }
        Ok(Self { n, rho })
    }

    pub fn population(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Detuning parameter `gamma = (rho - 1) N^{1/3}`, always recomputed from
    /// `(N, rho)`.
    pub fn gamma(&self) -> f64 {
        (self.rho - 1.0) * (self.n as f64).cbrt()
    }
}

/// The `N x N` tridiagonal generator of the conditional sojourn-time system,
/// stored as three diagonals.
///
/// Row `n` reads `sub[n-1] p_{n-1} + diag[n] p_n + sup[n] p_{n+1}`, with
/// `diag[n] = -(1 + rho (1 - (n+1)/N))`, `sup[n] = rho (1 - (n+1)/N)` and the
/// sub-diagonal entry of row `n` equal to `n/(n+1)`; the stored `sub[k]`
/// belongs to row `k+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
    pub sub: Vec<f64>,
}

impl Generator {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Sum of row `n`; equals `-1/(n+1)` exactly up to rounding.
    pub fn row_sum(&self, n: usize) -> f64 {
        let mut s = self.diag[n];
        if n < self.sup.len() {
            s += self.sup[n];
        }
        if n > 0 {
            s += self.sub[n - 1];
        }
        s
    }

    /// Apply the generator: `out = A v`.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let mut acc = self.diag[i] * v[i];
            if i + 1 < n {
                acc += self.sup[i] * v[i + 1];
            }
            if i > 0 {
                acc += self.sub[i - 1] * v[i - 1];
            }
            out[i] = acc;
        }
    }
}

/// Log-space weights `w_n = (rho/N)^n (N-1)!/(N-1-n)!` making the generator
/// self-adjoint: `w_n (n+1)` is the inner-product weight. Normalized so that
/// `logw[0] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub logw: Vec<f64>,
}

impl WeightVector {
    pub fn len(&self) -> usize {
        self.logw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logw.is_empty()
    }
}

/// Build the generator matrix for the given parameters.
pub fn build_generator(p: &QueueParams) -> Generator {
    let n = p.population();
    let rho = p.rho();
    let nf = n as f64;
    let fill = |k: usize| rho * (1.0 - (k as f64 + 1.0) / nf);
    let diag: Vec<f64> = (0..n).map(|k| -(1.0 + fill(k))).collect();
    let sup: Vec<f64> = (0..n.saturating_sub(1)).map(fill).collect();
    let sub: Vec<f64> = (0..n.saturating_sub(1))
        .map(|k| (k as f64 + 1.0) / (k as f64 + 2.0))
        .collect();
    Generator { diag, sup, sub }
}

/// Initial condition of the sojourn-time system: entry `n` is `1/(n+1)`.
pub fn initial_condition(p: &QueueParams) -> Vec<f64> {
    (0..p.population()).map(|k| 1.0 / (k as f64 + 1.0)).collect()
}

/// Self-adjointness weights in log space.
///
/// Computed via log-gamma: the raw factor `(rho/N)^n N!/(N-n-1)!` overflows
/// for `N` beyond ~170 in direct form.
pub fn spectral_weight(p: &QueueParams) -> WeightVector {
    let n = p.population();
    let nf = n as f64;
    let log_ratio = (p.rho() / nf).ln();
    let lg_n = ln_gamma(nf);
    let logw = (0..n)
        .map(|k| k as f64 * log_ratio + lg_n - ln_gamma(nf - k as f64))
        .collect();
    WeightVector { logw }
}

/// Distribution of the number of other customers in service at the arrival
/// instant of the tagged customer.
///
/// Coincides with the steady-state distribution of a finite-population queue
/// with population `N - 1`; computed from the log-space weights and
/// normalized.
pub fn arrival_state_distribution(p: &QueueParams) -> Vec<f64> {
    let w = spectral_weight(p);
    let norm = log_sum_exp(&w.logw);
    let mut dist: Vec<f64> = w.logw.iter().map(|&lw| (lw - norm).exp()).collect();
    // Remove residual rounding so the probabilities sum to 1 exactly.
    let total: KahanSum = dist.iter().cloned().collect();
    let t = total.value();
    for d in &mut dist {
        *d /= t;
    }
    dist
}
