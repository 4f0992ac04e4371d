//! `psq simulate`: Monte Carlo sojourn samples, tail-rate estimate with
//! standard error, and a chi-square histogram comparison against the
//! spectral density.

use crate::output::{csv_body, json_body, text_table, Format, OutputSpec};
use crate::CliError;
use psq_core::model::{arrival_state_distribution, QueueParams};
use psq_core::sim::{
    chi_square_gof, quantile_edges, simulate_sojourn, tail_rate_estimate, SimConfig,
    SojournSample,
};
use psq_core::sojourn::survival;
use psq_core::spectral::full_spectrum;
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
pub struct HistogramCell {
    pub lo: f64,
    /// None for the open-ended last cell.
    pub hi: Option<f64>,
    pub observed: usize,
    pub expected: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SimReport {
    pub population: usize,
    pub rho: f64,
    pub samples: usize,
    pub seed: u64,
    pub t_min: f64,
    pub tail_rate: f64,
    pub tail_rate_stderr: f64,
    pub nu0_exact: f64,
    pub z_score: f64,
    pub chi2: f64,
    pub dof: usize,
    pub p_value: f64,
    pub histogram: Vec<HistogramCell>,
}

/// Default tail cutoff: three relaxation times, with the rate taken from a
/// pilot fit over the first block of samples (excesses over their mean).
fn default_t_min(samples: &[SojournSample]) -> f64 {
    let pilot = &samples[..samples.len().min(10_000)];
    let mean = pilot.iter().map(|s| s.sojourn).sum::<f64>() / pilot.len() as f64;
    match tail_rate_estimate(pilot, mean) {
        Ok((rate, _)) => 3.0 / rate,
        Err(_) => 3.0 * mean,
    }
}

pub fn build_report(
    n: usize,
    rho: f64,
    samples: usize,
    seed: u64,
    t_min: Option<f64>,
    bins: usize,
) -> Result<SimReport, CliError> {
    let p = QueueParams::new(n, rho)?;
    if bins < 2 {
        return Err(CliError::Validation(format!(
            "--bins must be at least 2, got {bins}"
        )));
    }
    if samples < 1 {
        return Err(CliError::Validation("--samples must be positive".into()));
    }
    let s = full_spectrum(&p)?;
    let dist = arrival_state_distribution(&p);
    let edges = quantile_edges(&s, &dist, bins)?;
    let cfg = SimConfig::new(p, samples, seed, edges.clone())?;
    let drawn = simulate_sojourn(&cfg);

    let t_min = t_min.unwrap_or_else(|| default_t_min(&drawn));
    if !(t_min >= 0.0) {
        return Err(CliError::Validation(format!(
            "--t-min must be nonnegative, got {t_min}"
        )));
    }
    let (rate, stderr) = tail_rate_estimate(&drawn, t_min)?;
    let gof = chi_square_gof(&drawn, &edges, &s, &dist)?;

    let mut histogram = Vec::with_capacity(bins);
    let mut counts = vec![0usize; edges.len() + 1];
    for sample in &drawn {
        let idx = edges.partition_point(|&e| e <= sample.sojourn);
        counts[idx] += 1;
    }
    let m = samples as f64;
    let mut prev_edge = 0.0;
    let mut prev_surv = 1.0;
    for (cell, &observed) in counts.iter().enumerate() {
        let (hi, surv) = if cell < edges.len() {
            (Some(edges[cell]), survival(&s, &dist, edges[cell]))
        } else {
            (None, 0.0)
        };
        histogram.push(HistogramCell {
            lo: prev_edge,
            hi,
            observed,
            expected: m * (prev_surv - surv),
        });
        if let Some(e) = hi {
            prev_edge = e;
        }
        prev_surv = surv;
    }

    Ok(SimReport {
        population: n,
        rho,
        samples,
        seed,
        t_min,
        tail_rate: rate,
        tail_rate_stderr: stderr,
        nu0_exact: s.nu[0],
        z_score: (rate - s.nu[0]) / stderr,
        chi2: gof.chi2,
        dof: gof.dof,
        p_value: gof.p_value,
        histogram,
    })
}

pub fn run(
    n: usize,
    rho: f64,
    samples: usize,
    seed: u64,
    t_min: Option<f64>,
    bins: usize,
    spec: &OutputSpec,
) -> Result<(), CliError> {
    let report = build_report(n, rho, samples, seed, t_min, bins)?;
    let body = match spec.format {
        Format::Json => json_body(&report)?,
        Format::Csv | Format::Text => {
            let header = ["bin_lo", "bin_hi", "observed", "expected"];
            let rows: Vec<Vec<String>> = report
                .histogram
                .iter()
                .map(|c| {
                    vec![
                        spec.fmt(c.lo),
                        c.hi.map(|h| spec.fmt(h)).unwrap_or_else(|| "inf".into()),
                        c.observed.to_string(),
                        spec.fmt(c.expected),
                    ]
                })
                .collect();
            let summary = format!(
                "# N={} rho={} samples={} seed={}\n\
                 # t_min={} tail_rate={} stderr={} nu0_exact={} z={}\n\
                 # chi2={} dof={} p_value={}\n",
                report.population,
                report.rho,
                report.samples,
                report.seed,
                spec.fmt(report.t_min),
                spec.fmt(report.tail_rate),
                spec.fmt(report.tail_rate_stderr),
                spec.fmt(report.nu0_exact),
                spec.fmt(report.z_score),
                spec.fmt(report.chi2),
                report.dof,
                spec.fmt(report.p_value),
            );
            let table = if spec.format == Format::Csv {
                csv_body(&header, &rows)
            } else {
                text_table(&header, &rows)
            };
            format!("{summary}{table}")
        }
    };
    spec.write_all(&body)
}
