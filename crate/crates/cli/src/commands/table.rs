//! `psq table`: regenerate the five reference tables from the library.

use super::fmt_rel;
use crate::output::{csv_body, json_body, text_table, Format, OutputSpec};
use crate::CliError;
use psq_core::asym::{sub, sup};
use psq_core::model::{build_generator, QueueParams};
use psq_core::sojourn::density_table;
use psq_core::spectral::{eigenvalues, symmetrize};
use serde::{Deserialize, Serialize};

const POPULATIONS: [usize; 5] = [10, 30, 50, 70, 100];
const DEFAULT_T_GRID: [f64; 7] = [5.0, 10.0, 15.0, 20.0, 30.0, 50.0, 100.0];

#[derive(Debug, Serialize, Deserialize)]
pub struct Table1Row {
    pub population: usize,
    pub nu0_exact: f64,
    pub approx_2term: f64,
    pub rel_err_2term: f64,
    pub approx_3term: f64,
    pub rel_err_3term: f64,
    pub approx_4term: f64,
    pub rel_err_4term: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Table2Row {
    pub population: usize,
    pub nu0_exact: f64,
    pub nu0_approx: f64,
    pub rel_err_0: f64,
    pub nu1_exact: f64,
    pub nu1_approx: f64,
    pub rel_err_1: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TailRow {
    pub population: usize,
    /// None encodes the `t -> infinity` limit row.
    pub t: Option<f64>,
    pub exact: f64,
    pub approx: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_err: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TableReport {
    Eigen1 { which: usize, rho: f64, rows: Vec<Table1Row> },
    Eigen2 { which: usize, rho: f64, rows: Vec<Table2Row> },
    Tail { which: usize, rho: f64, rows: Vec<TailRow> },
}

fn table1() -> Result<Vec<Table1Row>, CliError> {
    POPULATIONS
        .iter()
        .map(|&n| {
            let p = QueueParams::new(n, 0.25)?;
            let t = symmetrize(&build_generator(&p))?;
            let nu0 = eigenvalues(&t, 1)[0];
            let e = sub::eigenvalue(&p, 0, 4)?;
            let rel = |v: f64| (v - nu0).abs() / nu0;
            Ok(Table1Row {
                population: n,
                nu0_exact: nu0,
                approx_2term: e.partial(2),
                rel_err_2term: rel(e.partial(2)),
                approx_3term: e.partial(3),
                rel_err_3term: rel(e.partial(3)),
                approx_4term: e.partial(4),
                rel_err_4term: rel(e.partial(4)),
            })
        })
        .collect()
}

fn table2() -> Result<Vec<Table2Row>, CliError> {
    POPULATIONS
        .iter()
        .map(|&n| {
            let p = QueueParams::new(n, 4.0)?;
            let t = symmetrize(&build_generator(&p))?;
            let nu = eigenvalues(&t, 2);
            let a0 = sup::eigenvalue(&p, 0)?.value;
            let a1 = sup::eigenvalue(&p, 1)?.value;
            Ok(Table2Row {
                population: n,
                nu0_exact: nu[0],
                nu0_approx: a0,
                rel_err_0: (a0 - nu[0]).abs() / nu[0],
                nu1_exact: nu[1],
                nu1_approx: a1,
                rel_err_1: (a1 - nu[1]).abs() / nu[1],
            })
        })
        .collect()
}

fn tail_table(rho: f64, grid: &[f64]) -> Result<Vec<TailRow>, CliError> {
    let mut rows = Vec::new();
    for &n in &[10usize, 20] {
        let p = QueueParams::new(n, rho)?;
        let table = density_table(&p, grid)?;
        for i in 0..grid.len() {
            rows.push(TailRow {
                population: n,
                t: Some(table.t[i]),
                exact: table.exact[i],
                approx: table.approx[i],
                rel_err: Some(table.rel_err[i]),
            });
        }
        rows.push(TailRow {
            population: n,
            t: None,
            exact: table.nu0,
            approx: table.nu0,
            rel_err: None,
        });
    }
    Ok(rows)
}

fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Validation(format!("bad --t-grid entry '{part}'")))
        })
        .collect()
}

pub fn run(which: usize, t_grid: Option<&str>, spec: &OutputSpec) -> Result<(), CliError> {
    if !(1..=5).contains(&which) {
        return Err(CliError::Validation(format!(
            "--which must be 1..=5, got {which}"
        )));
    }
    if t_grid.is_some() && which <= 2 {
        return Err(CliError::Validation(
            "--t-grid applies to tables 3-5 only".into(),
        ));
    }
    let report = match which {
        1 => TableReport::Eigen1 {
            which,
            rho: 0.25,
            rows: table1()?,
        },
        2 => TableReport::Eigen2 {
            which,
            rho: 4.0,
            rows: table2()?,
        },
        _ => {
            let rho = [0.25, 1.0, 4.0][which - 3];
            let grid = match t_grid {
                Some(s) => parse_grid(s)?,
                None => DEFAULT_T_GRID.to_vec(),
            };
            TableReport::Tail {
                which,
                rho,
                rows: tail_table(rho, &grid)?,
            }
        }
    };

    let body = match (&report, spec.format) {
        (_, Format::Json) => json_body(&report)?,
        (TableReport::Eigen1 { rows, .. }, fmt) => {
            let header = [
                "N", "nu0_exact", "approx_2term", "rel_err_2term", "approx_3term",
                "rel_err_3term", "approx_4term", "rel_err_4term",
            ];
            let data: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.population.to_string(),
                        spec.fmt(r.nu0_exact),
                        spec.fmt(r.approx_2term),
                        fmt_rel(spec, r.rel_err_2term),
                        spec.fmt(r.approx_3term),
                        fmt_rel(spec, r.rel_err_3term),
                        spec.fmt(r.approx_4term),
                        fmt_rel(spec, r.rel_err_4term),
                    ]
                })
                .collect();
            if fmt == Format::Csv {
                csv_body(&header, &data)
            } else {
                text_table(&header, &data)
            }
        }
        (TableReport::Eigen2 { rows, .. }, fmt) => {
            let header = [
                "N", "nu0_exact", "nu0_approx", "rel_err_0", "nu1_exact", "nu1_approx",
                "rel_err_1",
            ];
            let data: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.population.to_string(),
                        spec.fmt(r.nu0_exact),
                        spec.fmt(r.nu0_approx),
                        fmt_rel(spec, r.rel_err_0),
                        spec.fmt(r.nu1_exact),
                        spec.fmt(r.nu1_approx),
                        fmt_rel(spec, r.rel_err_1),
                    ]
                })
                .collect();
            if fmt == Format::Csv {
                csv_body(&header, &data)
            } else {
                text_table(&header, &data)
            }
        }
        (TableReport::Tail { rows, .. }, fmt) => {
            let header = ["N", "t", "exact", "approx", "rel_err"];
            let data: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.population.to_string(),
                        r.t.map(|t| spec.fmt(t)).unwrap_or_else(|| "inf".into()),
                        spec.fmt(r.exact),
                        spec.fmt(r.approx),
                        r.rel_err.map(|e| fmt_rel(spec, e)).unwrap_or_default(),
                    ]
                })
                .collect();
            if fmt == Format::Csv {
                csv_body(&header, &data)
            } else {
                text_table(&header, &data)
            }
        }
    };
    spec.write_all(&body)
}
