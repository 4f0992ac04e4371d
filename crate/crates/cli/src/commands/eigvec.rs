//! `psq eigvec`: exact eigenvector profile with an asymptotic overlay on a
//! chosen spatial scale. Overlay cells are blank outside each scale's
//! validity window (and around turning points), and the overlay's single
//! free normalization constant is anchored at the largest in-window entry
//! of the plotted exact column.

use super::resolve_regime;
use crate::output::{csv_body, json_body, text_table, Format, OutputSpec};
use crate::CliError;
use psq_core::asym::{crit, sub, sup, Regime};
use psq_core::model::{build_generator, QueueParams};
use psq_core::numeric::LogSigned;
use psq_core::specialfn::QuadratureSpec;
use psq_core::spectral::{eigenvalues, eigenvector, symmetrize};
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct EigvecRow {
    pub n: usize,
    pub phi_exact: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetrized: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overlay: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct EigvecReport {
    pub population: usize,
    pub rho: f64,
    pub j: usize,
    pub regime: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<String>,
    pub rows: Vec<EigvecRow>,
}

/// Raw (un-normalized) overlay value at a state, in log-signed form, or
/// `None` where the scale does not apply.
fn raw_overlay(
    p: &QueueParams,
    regime: Regime,
    scale: &str,
    j: usize,
    n: usize,
    correction: bool,
    symmetrized_target: bool,
    quad: &QuadratureSpec,
) -> Result<Option<LogSigned>, CliError> {
    let big_n = p.population() as f64;
    let rho = p.rho();
    let x = n as f64;
    // Multiply natively symmetrized forms by rho^{-n/2} when overlaying the
    // original coordinates (and vice versa for natively original forms).
    let desym = -0.5 * x * rho.ln(); // log of rho^{-n/2}
    let value = match (regime, scale) {
        (Regime::Subcritical, "y") => {
            // Window |z| <= 4 around the y-scale center.
            let center = sub::y_scale_center(p);
            let zscale =
                std::f64::consts::SQRT_2 * (1.0 - rho.sqrt()).powf(0.375) / big_n.powf(0.375);
            if (zscale * (x - center)).abs() > 4.0 {
                None
            } else {
                let v = sub::eigvec_y(p, j, x, correction)?;
                let ls = LogSigned::from_value(v);
                Some(if symmetrized_target { ls } else { ls.scale_log(desym) })
            }
        }
        (Regime::Subcritical, "x") => {
            // Owns sqrt(N)-scale states away from the oscillation window.
            let center = sub::y_scale_center(p);
            let zscale =
                std::f64::consts::SQRT_2 * (1.0 - rho.sqrt()).powf(0.375) / big_n.powf(0.375);
            if n == 0 || (zscale * (x - center)).abs() < 1.5 || x / big_n >= sub::XI_MIN * big_n {
                None
            } else {
                let ls = sub::eigvec_x(p, j, x)?;
                Some(if symmetrized_target { ls } else { ls.scale_log(desym) })
            }
        }
        (Regime::Subcritical, "xi") => {
            let xi = x / big_n;
            if !(sub::XI_MIN..1.0).contains(&xi) {
                None
            } else {
                let ls = sub::eigvec_xi(p, j, x, quad)?;
                Some(if symmetrized_target { ls } else { ls.scale_log(desym) })
            }
        }
        (Regime::Subcritical, "smalln") => {
            if x > 2.0 * big_n.sqrt() {
                None
            } else {
                // Natively in original coordinates (rho^{-n/2} psi(n)).
                let ls = LogSigned::from_value(sub::eigvec_small_n(p, n)?);
                Some(if symmetrized_target { ls.scale_log(-desym) } else { ls })
            }
        }
        (Regime::Supercritical, "X") => {
            let center = sup::x_scale_center(p);
            if ((x - center) / big_n.sqrt()).abs() > 4.0 {
                None
            } else {
                Some(LogSigned::from_value(sup::eigvec_x(p, j, x)?))
            }
        }
        (Regime::Supercritical, "xi") => {
            if n == 0 || n == p.population() {
                None
            } else {
                Some(LogSigned::from_value(sup::eigvec_xi(p, j, x)?))
            }
        }
        (Regime::Supercritical, "smalln") => {
            if x > 2.0 * big_n.sqrt() {
                None
            } else {
                let q = sup::eigvec_small_n(p, n)?;
                Some(LogSigned::from_value(q[n]))
            }
        }
        (Regime::Critical, "U") => {
            let center = crit::u_scale_center(p);
            if ((x - center) / big_n.sqrt()).abs() > 4.0 {
                None
            } else {
                Some(crit::eigvec_u(p, j, x))
            }
        }
        (Regime::Critical, "V") => {
            if n == 0 {
                None
            } else {
                match crit::eigvec_v(p, j, x, quad) {
                    Ok(ls) => Some(ls),
                    // Turning-point exclusion zone stays blank.
                    Err(psq_core::Error::TurningPoint { .. }) => None,
                    Err(e) => return Err(e.into()),
                }
            }
        }
        (Regime::Critical, "xi") => {
            if n == 0 {
                None
            } else {
                Some(crit::eigvec_xi(p, j, x)?)
            }
        }
        (Regime::Critical, "smalln") => {
            if x > 2.0 * big_n.cbrt() {
                None
            } else {
                Some(LogSigned::from_value(crit::eigvec_small_n(p, n)))
            }
        }
        (_, other) => {
            return Err(CliError::Validation(format!(
                "scale '{other}' is not defined for the {regime} regime \
                 (sub: y,x,xi,smalln; super: X,xi,smalln; crit: U,V,xi,smalln)"
            )))
        }
    };
    Ok(value)
}

#[allow(clippy::too_many_arguments)]
pub fn build_report(
    n: usize,
    rho: f64,
    j: usize,
    scale: Option<&str>,
    range: Option<&str>,
    symmetrized: bool,
    correction: bool,
    regime_flag: Option<&str>,
    quad: &QuadratureSpec,
) -> Result<EigvecReport, CliError> {
    let p = QueueParams::new(n, rho)?;
    if j >= n {
        return Err(CliError::Validation(format!(
            "--j must be below N = {n}, got {j}"
        )));
    }
    if symmetrized && rho >= 1.0 {
        return Err(CliError::Validation(
            "--symmetrized applies to rho < 1 only".into(),
        ));
    }
    let (lo, hi) = match range {
        None => (0usize, n - 1),
        Some(r) => {
            let parts: Vec<&str> = r.split(':').collect();
            let parse = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Validation(format!("bad --range component '{s}'")))
            };
            if parts.len() != 2 {
                return Err(CliError::Validation(format!(
                    "--range must be lo:hi, got '{r}'"
                )));
            }
            let (lo, hi) = (parse(parts[0])?, parse(parts[1])?);
            if lo > hi || hi >= n {
                return Err(CliError::Validation(format!(
                    "--range {lo}:{hi} out of bounds for N = {n}"
                )));
            }
            (lo, hi)
        }
    };
    let regime = resolve_regime(&p, regime_flag)?;

    let t = symmetrize(&build_generator(&p))?;
    let nu = eigenvalues(&t, j + 1);
    let phi = eigenvector(&t, nu[j])?;
    let sym_col: Option<Vec<f64>> = symmetrized.then(|| {
        let mut col: Vec<f64> = phi
            .iter()
            .enumerate()
            .map(|(k, &v)| rho.powf(k as f64 / 2.0) * v)
            .collect();
        // Renormalize to unit max: for rho < 1 the original eigenvector
        // peaks at the right edge, which would leave the symmetrized
        // profile (peaked near sqrt(N)-scale states) invisibly small.
        let max = col.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        if max > 0.0 {
            for v in &mut col {
                *v /= max;
            }
        }
        col
    });

    // Raw overlay values before fixing the free constant.
    let raw: Option<Vec<Option<LogSigned>>> = match scale {
        None => None,
        Some(sc) => {
            let mut vals = Vec::with_capacity(n);
            for state in 0..n {
                vals.push(raw_overlay(
                    &p,
                    regime,
                    sc,
                    j,
                    state,
                    correction,
                    symmetrized,
                    quad,
                )?);
            }
            Some(vals)
        }
    };

    // Fix the overlay's free constant against the plotted exact column.
    // Oscillatory window scales (y, X, U) take the least-squares constant
    // over the window, which balances the lobes; exponential scales anchor
    // at the largest plotted entry, where the log-scale forms are most
    // accurate.
    let target: &[f64] = sym_col.as_deref().unwrap_or(&phi);
    let window_ls = matches!(scale, Some("y") | Some("X") | Some("U"));
    let overlay: Option<Vec<Option<f64>>> = raw.map(|vals| {
        if window_ls {
            // Weight by target^2 so the constant fits the dominant lobes
            // rather than the window edges, where truncated corrections are
            // least accurate.
            let mut num = 0.0f64;
            let mut den = 0.0f64;
            for k in 0..n {
                if let Some(ls) = vals[k] {
                    let v = ls.value();
                    let w = target[k] * target[k];
                    num += w * v * target[k];
                    den += w * v * v;
                }
            }
            if den == 0.0 {
                return vals.iter().map(|_| None).collect();
            }
            let c = num / den;
            vals.iter().map(|v| v.map(|ls| c * ls.value())).collect()
        } else {
            let mut order: Vec<usize> = (0..n)
                .filter(|&k| matches!(vals[k], Some(ls) if ls.sign != 0))
                .collect();
            order.sort_by(|&a, &b| target[b].abs().total_cmp(&target[a].abs()));
            match order.first().copied() {
                None => vals.iter().map(|_| None).collect(),
                Some(k0) => {
                    let ls0 = vals[k0].unwrap();
                    let log_c = target[k0].abs().ln() - ls0.log_abs;
                    let sign_c = if (target[k0] > 0.0) == (ls0.sign > 0) {
                        1.0
                    } else {
                        -1.0
                    };
                    vals.iter()
                        .map(|v| v.map(|ls| sign_c * ls.sign as f64 * (ls.log_abs + log_c).exp()))
                        .collect()
                }
            }
        }
    });

    let rows = (lo..=hi)
        .map(|k| EigvecRow {
            n: k,
            phi_exact: phi[k],
            symmetrized: sym_col.as_ref().map(|s| s[k]),
            overlay: overlay.as_ref().and_then(|o| o[k]),
        })
        .collect();
    Ok(EigvecReport {
        population: n,
        rho,
        j,
        regime: regime.to_string(),
        scale: scale.map(str::to_owned),
        rows,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn run(
    n: usize,
    rho: f64,
    j: usize,
    scale: Option<&str>,
    range: Option<&str>,
    symmetrized: bool,
    correction: bool,
    regime_flag: Option<&str>,
    spec: &OutputSpec,
) -> Result<(), CliError> {
    let quad = QuadratureSpec::default();
    let report = build_report(
        n,
        rho,
        j,
        scale,
        range,
        symmetrized,
        correction,
        regime_flag,
        &quad,
    )?;
    let body = match spec.format {
        Format::Json => json_body(&report)?,
        Format::Csv | Format::Text => {
            let mut header: Vec<&str> = vec!["n", "phi_exact"];
            if symmetrized {
                header.push("symmetrized");
            }
            if report.scale.is_some() {
                header.push("overlay");
            }
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|r| {
                    let mut row = vec![r.n.to_string(), spec.fmt(r.phi_exact)];
                    if symmetrized {
                        row.push(spec.fmt_opt(r.symmetrized));
                    }
                    if report.scale.is_some() {
                        row.push(spec.fmt_opt(r.overlay));
                    }
                    row
                })
                .collect();
            match spec.format {
                Format::Csv => csv_body(&header, &rows),
                _ => text_table(&header, &rows),
            }
        }
    };
    spec.write_all(&body)
}
