//! Principal-component factor extraction from standardized panels.
//!
//! For a standardized `T × N` panel `X`, the eigen-decomposition of the
//! correlation matrix `X'X / T` gives loadings and factor series. Factors
//! are scaled to unit (population) variance so `X ≈ F Λ'` with
//! `Λ = X'F / T`. When `N > T` the equivalent `T × T` problem on `XX' / T`
//! is solved instead.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::symmetric_eigen_desc;
use crate::panel::{SeriesGroup, SeriesPanel};
use crate::stats;

/// Mean/std tolerance accepted as "standardized".
pub const STANDARDIZED_TOL: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum FactorError {
    #[error("series {series} is not standardized (mean {mean:.3e}, std {std:.6})")]
    NotStandardized { series: String, mean: f64, std: f64 },
    #[error("requested {requested} factors but at most {max} are available")]
    RankTooLarge { requested: usize, max: usize },
    #[error("factor count must be positive")]
    ZeroFactors,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorModel {
    /// `T × r` factor series.
    pub factors: DMatrix<f64>,
    /// `N × r` loadings.
    pub loadings: DMatrix<f64>,
    /// Non-increasing eigenvalues of the correlation matrix, length `min(T, N)`.
    pub eigenvalues: Vec<f64>,
    pub r: usize,
    pub explained_share: Vec<f64>,
}

/// One entry of a scree listing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreeEntry {
    pub index: usize,
    pub eigenvalue: f64,
    pub explained_share: f64,
}

fn check_standardized(panel: &SeriesPanel) -> Result<(), FactorError> {
    for (j, id) in panel.series_ids().iter().enumerate() {
        let col: Vec<f64> = panel.observations().column(j).iter().copied().collect();
        let m = stats::mean(&col);
        let s = stats::std_population(&col);
        if m.abs() > STANDARDIZED_TOL || (s - 1.0).abs() > STANDARDIZED_TOL {
            return Err(FactorError::NotStandardized {
                series: id.clone(),
                mean: m,
                std: s,
            });
        }
    }
    Ok(())
}

/// Extracts the first `r` principal-component factors.
pub fn extract_factors(panel: &SeriesPanel, r: usize) -> Result<FactorModel, FactorError> {
    if r == 0 {
        return Err(FactorError::ZeroFactors);
    }
    let x = panel.observations();
    let (t, n) = (x.nrows(), x.ncols());
    let max = t.min(n);
    if r > max {
        return Err(FactorError::RankTooLarge { requested: r, max });
    }
    check_standardized(panel)?;
    let tf = t as f64;

    let (eigenvalues, factors) = if n <= t {
        let corr = x.transpose() * x / tf;
        let (vals, vecs) = symmetric_eigen_desc(&corr);
        let mut f = DMatrix::zeros(t, r);
        for k in 0..r {
            let lam = vals[k];
            if lam > 1e-12 * vals[0].max(1e-300) {
                f.set_column(k, &(x * vecs.column(k) / lam.sqrt()));
            }
        }
        (vals, f)
    } else {
        let gram = x * x.transpose() / tf;
        let (vals, vecs) = symmetric_eigen_desc(&gram);
        let mut f = DMatrix::zeros(t, r);
        for k in 0..r {
            if vals[k] > 1e-12 * vals[0].max(1e-300) {
                f.set_column(k, &(vecs.column(k) * tf.sqrt()));
            }
        }
        (vals.rows(0, max).into_owned(), f)
    };

    let mut factors = factors;
    let mut loadings = x.transpose() * &factors / tf;
    // Canonical sign: largest-magnitude loading of each factor is positive.
    for k in 0..r {
        let col = loadings.column(k);
        let i = col.iamax();
        if col[i] < 0.0 {
            loadings.column_mut(k).neg_mut();
            factors.column_mut(k).neg_mut();
        }
    }

    let eigenvalues: Vec<f64> = eigenvalues.iter().copied().collect();
    let total: f64 = eigenvalues.iter().map(|v| v.max(0.0)).sum();
    let explained_share = eigenvalues[..r]
        .iter()
        .map(|v| if total > 0.0 { v.max(0.0) / total } else { 0.0 })
        .collect();
    Ok(FactorModel {
        factors,
        loadings,
        eigenvalues,
        r,
        explained_share,
    })
}

/// Eigenvalues with their share of total variance.
pub fn scree(model: &FactorModel) -> Vec<ScreeEntry> {
    let total: f64 = model.eigenvalues.iter().map(|v| v.max(0.0)).sum();
    model
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(index, &eigenvalue)| ScreeEntry {
            index,
            eigenvalue,
            explained_share: if total > 0.0 { eigenvalue.max(0.0) / total } else { 0.0 },
        })
        .collect()
}

impl FactorModel {
    /// `X − F Λ'` squared Frobenius norm for a standardized panel.
    pub fn reconstruction_error(&self, panel: &SeriesPanel) -> f64 {
        (panel.observations() - &self.factors * self.loadings.transpose()).norm_squared()
    }

    /// Factor series as a panel (`<prefix>1`, `<prefix>2`, ...), ready to be
    /// written in long schema and merged into a VAR input panel.
    pub fn to_panel(&self, time_index: &[i64], prefix: &str, group: SeriesGroup) -> SeriesPanel {
        let ids = (1..=self.r).map(|k| format!("{prefix}{k}")).collect();
        let mut p = SeriesPanel::new(self.factors.clone(), time_index.to_vec(), ids)
            .expect("factor panel is well formed");
        p.set_group(group, prefix);
        p
    }

    /// Correlation of factor `k` with a user-supplied index series
    /// (e.g. an activity index) over the same periods.
    pub fn correlation_with_index(&self, k: usize, index: &[f64]) -> f64 {
        let f: Vec<f64> = self.factors.column(k).iter().copied().collect();
        stats::pearson(&f, index)
    }
}
