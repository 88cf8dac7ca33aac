//! Cross-sectional OLS of cumulative responses on unit characteristics.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::linalg::least_squares;
use crate::stats::{self, ZERO_VARIANCE_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CrossRegError {
    #[error("covariate {0} has zero variance")]
    ZeroVarianceCovariate(String),
    #[error("design is rank deficient (columns {0:?})")]
    RankDeficientDesign(Vec<String>),
    #[error("{observations} observations are too few for {parameters} parameters")]
    TooFewObservations { observations: usize, parameters: usize },
    #[error("label mismatch: {0}")]
    LabelMismatch(String),
    #[error("malformed covariate file: {0}")]
    Malformed(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, CrossRegError>;

/// Units (rows) with covariates and one or more dependent vectors keyed by
/// `(response variable, horizon)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSectionDataset {
    pub unit_ids: Vec<String>,
    pub dependent: BTreeMap<(String, usize), Vec<f64>>,
    pub covariate_names: Vec<String>,
    /// `U × K`.
    pub covariates: DMatrix<f64>,
}

impl CrossSectionDataset {
    /// Columns for the named covariates, in the given order.
    pub fn design(&self, names: &[String]) -> Result<DMatrix<f64>> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.covariate_names
                    .iter()
                    .position(|c| c == n)
                    .ok_or_else(|| CrossRegError::LabelMismatch(format!("unknown covariate {n}")))
            })
            .collect::<Result<_>>()?;
        Ok(self.covariates.select_columns(&idx))
    }
}

/// Zero mean, unit population standard deviation per covariate column.
pub fn standardize_covariates(data: &CrossSectionDataset) -> Result<CrossSectionDataset> {
    let mut out = data.clone();
    for (j, name) in data.covariate_names.iter().enumerate() {
        let col: Vec<f64> = data.covariates.column(j).iter().copied().collect();
        let z = standardize_vector(&col).ok_or_else(|| CrossRegError::ZeroVarianceCovariate(name.clone()))?;
        out.covariates.set_column(j, &DVector::from_vec(z));
    }
    Ok(out)
}

/// `(x − mean) / sd`; `None` for a constant vector.
pub fn standardize_vector(x: &[f64]) -> Option<Vec<f64>> {
    let m = stats::mean(x);
    let sd = stats::std_population(x);
    if !(sd > ZERO_VARIANCE_TOL * (1.0 + m.abs())) {
        return None;
    }
    Some(x.iter().map(|v| (v - m) / sd).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stars {
    None,
    One,
    Two,
    Three,
}

impl Stars {
    /// `*` below 0.1, `**` below 0.05, `***` below 0.01.
    pub fn from_p(p: f64) -> Stars {
        if p < 0.01 {
            Stars::Three
        } else if p < 0.05 {
            Stars::Two
        } else if p < 0.1 {
            Stars::One
        } else {
            Stars::None
        }
    }
}

impl fmt::Display for Stars {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stars::None => "",
            Stars::One => "*",
            Stars::Two => "**",
            Stars::Three => "***",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StdErrorKind {
    #[default]
    Classical,
    Hc1,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionResult {
    /// Intercept first when present.
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    pub stars: Vec<Stars>,
    pub r2: f64,
    pub adjusted_r2: f64,
    pub n_obs: usize,
}

impl RegressionResult {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.coefficients[i])
    }
}

pub const INTERCEPT: &str = "Constant";

/// OLS of `y` on `x` (plus an intercept column when requested).
pub fn ols_cross_section(
    y: &[f64],
    x: &DMatrix<f64>,
    names: &[String],
    intercept: bool,
    se_kind: StdErrorKind,
) -> Result<RegressionResult> {
    let u = y.len();
    assert_eq!(x.nrows(), u, "ols_cross_section: row mismatch");
    assert_eq!(x.ncols(), names.len(), "ols_cross_section: name count");
    let k = x.ncols() + usize::from(intercept);
    if u <= k || (intercept && u <= x.ncols() + 1) {
        return Err(CrossRegError::TooFewObservations {
            observations: u,
            parameters: k,
        });
    }
    let mut all_names = Vec::with_capacity(k);
    let design = if intercept {
        all_names.push(INTERCEPT.to_string());
        let mut d = DMatrix::from_element(u, k, 1.0);
        d.columns_mut(1, x.ncols()).copy_from(x);
        d
    } else {
        x.clone()
    };
    all_names.extend(names.iter().cloned());
    let yv = DMatrix::from_column_slice(u, 1, y);
    let ls = least_squares(&design, &yv).map_err(|e| {
        CrossRegError::RankDeficientDesign(e.columns.iter().map(|&c| all_names[c].clone()).collect())
    })?;
    let beta: Vec<f64> = ls.coefficients.column(0).iter().copied().collect();
    let resid = ls.residuals.column(0);
    let rss = resid.norm_squared();
    let dof = (u - k) as f64;
    let xtx_inv = (design.transpose() * &design)
        .try_inverse()
        .ok_or_else(|| CrossRegError::RankDeficientDesign(all_names.clone()))?;
    let cov = match se_kind {
        StdErrorKind::Classical => &xtx_inv * (rss / dof),
        StdErrorKind::Hc1 => {
            let mut meat = DMatrix::zeros(k, k);
            for i in 0..u {
                let row = design.row(i).transpose();
                meat += &row * row.transpose() * (resid[i] * resid[i]);
            }
            &xtx_inv * meat * &xtx_inv * (u as f64 / dof)
        }
    };
    let t_dist = StudentsT::new(0.0, 1.0, dof).expect("positive degrees of freedom");
    let std_errors: Vec<f64> = (0..k).map(|i| cov[(i, i)].max(0.0).sqrt()).collect();
    let t_stats: Vec<f64> = beta.iter().zip(&std_errors).map(|(b, s)| b / s).collect();
    let p_values: Vec<f64> = t_stats
        .iter()
        .map(|t| {
            if t.is_nan() {
                f64::NAN
            } else {
                (2.0 * t_dist.sf(t.abs())).min(1.0)
            }
        })
        .collect();
    let stars = p_values.iter().map(|p| Stars::from_p(*p)).collect();
    let ybar = stats::mean(y);
    let tss: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    let r2 = if tss > 0.0 { 1.0 - rss / tss } else { 0.0 };
    let adjusted_r2 = 1.0 - (1.0 - r2) * (u as f64 - 1.0) / dof;
    Ok(RegressionResult {
        names: all_names,
        coefficients: beta,
        std_errors,
        t_stats,
        p_values,
        stars,
        r2,
        adjusted_r2,
        n_obs: u,
    })
}

fn two_dp(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// `coef<stars> (se)` with two decimals.
pub fn format_cell(coef: f64, se: f64, p: f64) -> String {
    format!("{}{} ({})", two_dp(coef), Stars::from_p(p), two_dp(se))
}

/// One column per regression, one row per covariate (then the constant),
/// with `Observations` and `Adjusted R²` footer rows. Covariates absent
/// from a regression leave an empty cell.
pub fn format_results_table(results: &[RegressionResult], row_labels: &[String], column_titles: &[String]) -> Result<String> {
    if results.len() != column_titles.len() {
        return Err(CrossRegError::LabelMismatch(format!(
            "{} regressions but {} column titles",
            results.len(),
            column_titles.len()
        )));
    }
    for r in results {
        if let Some(n) = r.names.iter().find(|n| *n != INTERCEPT && !row_labels.contains(n)) {
            return Err(CrossRegError::LabelMismatch(format!("covariate {n} has no row label")));
        }
    }
    let mut out = String::new();
    out.push_str("variable");
    for t in column_titles {
        out.push(',');
        out.push_str(t);
    }
    out.push('\n');
    let mut rows: Vec<&str> = row_labels.iter().map(String::as_str).collect();
    if results.iter().any(|r| r.names.iter().any(|n| n == INTERCEPT)) {
        rows.push(INTERCEPT);
    }
    for label in rows {
        out.push_str(label);
        for r in results {
            out.push(',');
            if let Some(i) = r.names.iter().position(|n| n == label) {
                out.push_str(&format_cell(r.coefficients[i], r.std_errors[i], r.p_values[i]));
            }
        }
        out.push('\n');
    }
    out.push_str("Observations");
    for r in results {
        out.push_str(&format!(",{}", r.n_obs));
    }
    out.push('\n');
    out.push_str("Adjusted R²");
    for r in results {
        out.push_str(&format!(",{}", two_dp(r.adjusted_r2)));
    }
    out.push('\n');
    Ok(out)
}

/// Full-precision long table: `regression,variable,coefficient,std_error,t_stat,p_value`.
pub fn format_raw_table(results: &[RegressionResult], column_titles: &[String]) -> String {
    let mut out = String::from("regression,variable,coefficient,std_error,t_stat,p_value\n");
    for (r, title) in results.iter().zip(column_titles) {
        for i in 0..r.names.len() {
            out.push_str(&format!(
                "{title},{},{},{},{},{}\n",
                r.names[i], r.coefficients[i], r.std_errors[i], r.t_stats[i], r.p_values[i]
            ));
        }
        out.push_str(&format!("{title},adjusted_r2,{},,,\n", r.adjusted_r2));
        out.push_str(&format!("{title},observations,{},,,\n", r.n_obs));
    }
    out
}

/// Reads `unit,<covariate names...>` rows.
pub fn read_covariates<R: Read>(reader: R) -> Result<(Vec<String>, Vec<String>, DMatrix<f64>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| CrossRegError::Malformed(e.to_string()))?
        .clone();
    if header.len() < 2 {
        return Err(CrossRegError::Malformed("need a unit column and at least one covariate".into()));
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut units = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CrossRegError::Malformed(e.to_string()))?;
        let unit = rec.get(0).unwrap_or_default().to_string();
        if units.contains(&unit) {
            return Err(CrossRegError::Malformed(format!("duplicate unit {unit}")));
        }
        for (j, cell) in rec.iter().skip(1).enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| CrossRegError::Malformed(format!("{unit}/{}: {cell:?} is not a number", names[j])))?;
            values.push(v);
        }
        units.push(unit);
    }
    let m = DMatrix::from_row_slice(units.len(), names.len(), &values);
    Ok((units, names, m))
}

pub fn load_covariates(path: impl AsRef<Path>) -> Result<(Vec<String>, Vec<String>, DMatrix<f64>)> {
    let f = std::fs::File::open(path.as_ref()).map_err(|e| CrossRegError::Io(format!("{}: {e}", path.as_ref().display())))?;
    read_covariates(f)
}
