//! Independent Monte Carlo estimator of the tagged customer's sojourn time
//! via the continuous-time Markov chain of the service-state process:
//! from state `n` (other customers in service) the chain sees an arrival at
//! rate `rho (1 - (n+1)/N)`, another customer's completion at rate
//! `n/(n+1)`, and the tagged completion at rate `1/(n+1)`.
//!
//! Each sample runs on its own ChaCha stream keyed by `(seed, sample index)`
//! so results are reproducible and independent of the parallel schedule.

use crate::error::{Error, Result};
use crate::model::{arrival_state_distribution, QueueParams};
use crate::sojourn::survival;
use crate::spectral::Spectrum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Simulation request: parameters, sample count, RNG seed, and histogram
/// edges for the goodness-of-fit comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: QueueParams,
    pub samples: usize,
    pub seed: u64,
    pub t_bins: Vec<f64>,
}

impl SimConfig {
    pub fn new(params: QueueParams, samples: usize, seed: u64, t_bins: Vec<f64>) -> Result<Self> {
        if samples < 1 {
            return Err(Error::InvalidParams("need at least one sample".into()));
        }
        for w in t_bins.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidParams(
                    "histogram edges must be ascending".into(),
                ));
            }
        }
        Ok(Self {
            params,
            samples,
            seed,
            t_bins,
        })
    }
}

/// One simulated sojourn: the state seen at arrival and the elapsed time
/// until the tagged customer completed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SojournSample {
    pub initial_n: usize,
    pub sojourn: f64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn chacha_key(seed: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    let mut state = seed;
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    key
}

fn run_one(p: &QueueParams, cdf: &[f64], key: [u8; 32], index: u64) -> SojournSample {
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    let big_n = p.population() as f64;
    let rho = p.rho();

    let u0 = rng.gen::<f64>();
    let initial_n = cdf.partition_point(|&c| c <= u0).min(cdf.len() - 1);

    let mut n = initial_n;
    let mut elapsed = 0.0f64;
    loop {
        let nf = n as f64;
        let up_rate = rho * (1.0 - (nf + 1.0) / big_n);
        let total = 1.0 + up_rate;
        elapsed += -(1.0 - rng.gen::<f64>()).ln() / total;
        let pick = rng.gen::<f64>() * total;
        if pick < up_rate {
            n += 1;
        } else if pick < up_rate + nf / (nf + 1.0) {
            n -= 1;
        } else {
            return SojournSample {
                initial_n,
                sojourn: elapsed,
            };
        }
    }
}

/// Simulate independent sojourn samples. The initial state of each sample
/// is drawn from the arrival-instant distribution; the output is identical
/// for any parallel schedule.
pub fn simulate_sojourn(cfg: &SimConfig) -> Vec<SojournSample> {
    let dist = arrival_state_distribution(&cfg.params);
    let mut cdf = Vec::with_capacity(dist.len());
    let mut acc = 0.0;
    for d in &dist {
        acc += d;
        cdf.push(acc);
    }
    let key = chacha_key(cfg.seed);
    (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| run_one(&cfg.params, &cdf, key, i))
        .collect()
}

/// Maximum-likelihood exponential rate of the excesses over `t_min`, with
/// its standard error `rate/sqrt(k)`. Requires at least 100 exceedances.
pub fn tail_rate_estimate(samples: &[SojournSample], t_min: f64) -> Result<(f64, f64)> {
    let mut k = 0usize;
    let mut total_excess = 0.0f64;
    for s in samples {
        if s.sojourn > t_min {
            k += 1;
            total_excess += s.sojourn - t_min;
        }
    }
    if k < 100 {
        return Err(Error::InsufficientTailData {
            found: k,
            required: 100,
            t_min,
        });
    }
    let rate = k as f64 / total_excess;
    Ok((rate, rate / (k as f64).sqrt()))
}

/// Result of the chi-square comparison of a sample histogram against the
/// spectral density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GofResult {
    pub chi2: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Chi-square goodness of fit of the simulated sojourns against the
/// spectral density, on the cells `[0, e_0), [e_0, e_1), ..., [e_last, inf)`
/// defined by ascending edges. Expected cell masses come from the
/// closed-form survival function.
pub fn chi_square_gof(
    samples: &[SojournSample],
    edges: &[f64],
    s: &Spectrum,
    dist: &[f64],
) -> Result<GofResult> {
    if edges.len() < 2 {
        return Err(Error::InvalidParams(
            "need at least two histogram edges".into(),
        ));
    }
    let cells = edges.len() + 1;
    let mut observed = vec![0usize; cells];
    for sample in samples {
        let idx = edges.partition_point(|&e| e <= sample.sojourn);
        observed[idx] += 1;
    }
    let m = samples.len() as f64;
    let mut chi2 = 0.0f64;
    let mut prev_surv = 1.0f64;
    for (cell, &obs) in observed.iter().enumerate() {
        let surv = if cell < edges.len() {
            survival(s, dist, edges[cell])
        } else {
            0.0
        };
        let prob = prev_surv - surv;
        prev_surv = surv;
        let expected = m * prob;
        if expected <= 0.0 {
            return Err(Error::Domain(format!(
                "expected count in cell {cell} is not positive ({expected}); widen the bins"
            )));
        }
        let d = obs as f64 - expected;
        chi2 += d * d / expected;
    }
    let dof = cells - 1;
    let chi = ChiSquared::new(dof as f64)
        .map_err(|e| Error::InvalidParams(format!("chi-square dof: {e}")))?;
    Ok(GofResult {
        chi2,
        dof,
        p_value: chi.sf(chi2),
    })
}

/// Equal-probability histogram edges from the closed-form survival
/// function: `k - 1` interior edges splitting the mass into `k` cells.
pub fn quantile_edges(s: &Spectrum, dist: &[f64], k: usize) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(Error::InvalidParams("need at least two cells".into()));
    }
    let mut edges = Vec::with_capacity(k - 1);
    let mut hi_guess = 10.0 / s.nu[0];
    while survival(s, dist, hi_guess) > 1.0 / (4.0 * k as f64) {
        hi_guess *= 2.0;
    }
    for i in 1..k {
        let target = 1.0 - i as f64 / k as f64;
        let (mut lo, mut hi) = (0.0f64, hi_guess);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if survival(s, dist, mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-12 * hi.max(1.0) {
                break;
            }
        }
        edges.push(0.5 * (lo + hi));
    }
    Ok(edges)
}
