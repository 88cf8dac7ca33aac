//! Output multipliers and employment elasticities.
//!
//! The shock magnitude is the size of the tax *cut*: a cut of one percent
//! is `1.0`. Ratios keep their sign, so an expansionary response to a cut
//! is reported as positive.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::irf::ImpulseResponseSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("shock magnitude is zero")]
    ZeroShockMagnitude,
    #[error("tax change is zero")]
    ZeroTaxChange,
    #[error("unknown variable {0}")]
    UnknownVariable(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplierReport {
    pub peak_multiplier: f64,
    pub peak_horizon: usize,
    pub total_multiplier: f64,
    pub per_horizon: Vec<f64>,
}

/// Responses of `target` per unit of shock.
pub fn multiplier(irf: &ImpulseResponseSet, target: &str, shock_magnitude: f64) -> Result<MultiplierReport, MetricsError> {
    if shock_magnitude == 0.0 {
        return Err(MetricsError::ZeroShockMagnitude);
    }
    let row = irf
        .row(target)
        .ok_or_else(|| MetricsError::UnknownVariable(target.to_string()))?;
    let per_horizon: Vec<f64> = row.iter().map(|r| r / shock_magnitude).collect();
    let mut peak_horizon = 0;
    for (h, v) in per_horizon.iter().enumerate() {
        if v.abs() > per_horizon[peak_horizon].abs() {
            peak_horizon = h;
        }
    }
    Ok(MultiplierReport {
        peak_multiplier: per_horizon[peak_horizon],
        peak_horizon,
        total_multiplier: per_horizon.iter().sum(),
        per_horizon,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ElasticityReport {
    pub elasticity: f64,
    pub horizon: usize,
}

/// Percent employment change per percent tax change.
pub fn employment_elasticity(emp_pct_change: f64, tax_pct_change: f64) -> Result<f64, MetricsError> {
    if tax_pct_change == 0.0 {
        return Err(MetricsError::ZeroTaxChange);
    }
    Ok(emp_pct_change / tax_pct_change)
}

/// Elasticity at the peak of the employment response.
pub fn peak_elasticity(irf: &ImpulseResponseSet, employment: &str, tax_change: f64) -> Result<ElasticityReport, MetricsError> {
    let m = multiplier(irf, employment, tax_change)?;
    Ok(ElasticityReport {
        elasticity: m.peak_multiplier,
        horizon: m.peak_horizon,
    })
}

/// `state,<shock ids...>` table; missing cells are left empty.
pub fn format_elasticity_table(by_state: &BTreeMap<String, BTreeMap<String, f64>>, shocks: &[String]) -> String {
    let mut out = format!("state,{}\n", shocks.join(","));
    for (state, row) in by_state {
        out.push_str(state);
        for s in shocks {
            out.push(',');
            if let Some(v) = row.get(s) {
                out.push_str(&v.to_string());
            }
        }
        out.push('\n');
    }
    out
}
