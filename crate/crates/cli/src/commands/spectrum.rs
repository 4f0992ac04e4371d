//! `psq spectrum`: exact eigenvalues against regime asymptotics.

use super::{fmt_rel, resolve_regime};
use crate::output::{csv_body, json_body, text_table, Format, OutputSpec};
use crate::CliError;
use psq_core::asym::{crit, sub, sup, Regime};
use psq_core::model::{build_generator, QueueParams};
use psq_core::spectral::{eigenvalues, symmetrize};
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct Approximation {
    pub label: String,
    pub value: f64,
    pub rel_err: f64,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct SpectrumRow {
    pub j: usize,
    pub nu_exact: f64,
    pub approximations: Vec<Approximation>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct SpectrumReport {
    pub population: usize,
    pub rho: f64,
    pub gamma: f64,
    pub regime: String,
    pub rows: Vec<SpectrumRow>,
}

pub fn build_report(
    n: usize,
    rho: f64,
    count: usize,
    regime_flag: Option<&str>,
    terms: Option<usize>,
) -> Result<SpectrumReport, CliError> {
    let p = QueueParams::new(n, rho)?;
    if count < 1 || count > n {
        return Err(CliError::Validation(format!(
            "--count must be in 1..=N, got {count}"
        )));
    }
    if let Some(t) = terms {
        if !(1..=4).contains(&t) {
            return Err(CliError::Validation(format!(
                "--terms must be in 1..=4, got {t}"
            )));
        }
    }
    let regime = resolve_regime(&p, regime_flag)?;
    let t = symmetrize(&build_generator(&p))?;
    let nu = eigenvalues(&t, count);

    let mut rows = Vec::with_capacity(count);
    for (j, &nu_exact) in nu.iter().enumerate() {
        let mut approximations = Vec::new();
        match regime {
            Regime::Subcritical => {
                let expansion = sub::eigenvalue(&p, j, 4)?;
                let term_list: Vec<usize> = match terms {
                    Some(t) => vec![t],
                    None => vec![2, 3, 4],
                };
                for k in term_list {
                    let value = expansion.partial(k);
                    approximations.push(Approximation {
                        label: format!("{k}term"),
                        value,
                        rel_err: (value - nu_exact).abs() / nu_exact,
                    });
                }
            }
            Regime::Supercritical => {
                let value = sup::eigenvalue(&p, j)?.value;
                approximations.push(Approximation {
                    label: "leading".into(),
                    value,
                    rel_err: (value - nu_exact).abs() / nu_exact,
                });
            }
            Regime::Critical => {
                let value = crit::eigenvalue(&p, j);
                approximations.push(Approximation {
                    label: "2term".into(),
                    value,
                    rel_err: (value - nu_exact).abs() / nu_exact,
                });
            }
        }
        rows.push(SpectrumRow {
            j,
            nu_exact,
            approximations,
        });
    }
    Ok(SpectrumReport {
        population: n,
        rho,
        gamma: p.gamma(),
        regime: regime.to_string(),
        rows,
    })
}

pub fn run(
    n: usize,
    rho: f64,
    count: usize,
    regime_flag: Option<&str>,
    terms: Option<usize>,
    spec: &OutputSpec,
) -> Result<(), CliError> {
    let report = build_report(n, rho, count, regime_flag, terms)?;
    let body = match spec.format {
        Format::Json => json_body(&report)?,
        Format::Csv | Format::Text => {
            let labels: Vec<String> = report.rows[0]
                .approximations
                .iter()
                .map(|a| a.label.clone())
                .collect();
            let mut header: Vec<String> = vec!["j".into(), "nu_exact".into()];
            for l in &labels {
                header.push(format!("approx_{l}"));
                header.push(format!("rel_err_{l}"));
            }
            header.push("regime".into());
            let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|r| {
                    let mut row = vec![r.j.to_string(), spec.fmt(r.nu_exact)];
                    for a in &r.approximations {
                        row.push(spec.fmt(a.value));
                        row.push(fmt_rel(spec, a.rel_err));
                    }
                    row.push(report.regime.clone());
                    row
                })
                .collect();
            match spec.format {
                Format::Csv => csv_body(&header_refs, &rows),
                _ => text_table(&header_refs, &rows),
            }
        }
    };
    spec.write_all(&body)
}
