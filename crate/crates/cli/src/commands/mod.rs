//! Subcommand implementations.

pub mod eigvec;
pub mod simulate;
pub mod spectrum;
pub mod table;

use crate::CliError;
use psq_core::asym::{classify, Regime};
use psq_core::model::QueueParams;

/// Resolve the regime: the router's choice unless overridden by flag.
pub fn resolve_regime(p: &QueueParams, flag: Option<&str>) -> Result<Regime, CliError> {
    match flag {
        None => Ok(classify(p)),
        Some("sub") => Ok(Regime::Subcritical),
        Some("super") => Ok(Regime::Supercritical),
        Some("crit") => Ok(Regime::Critical),
        Some(other) => Err(CliError::Validation(format!(
            "unknown regime '{other}' (expected sub, super or crit)"
        ))),
    }
}

/// Relative error column formatting: two significant digits in table mode,
/// full precision in machine mode.
pub fn fmt_rel(spec: &crate::output::OutputSpec, v: f64) -> String {
    if spec.precision >= 17 {
        spec.fmt(v)
    } else {
        format!("{v:.1e}")
    }
}
