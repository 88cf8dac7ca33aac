//! Vector autoregressions estimated equation by equation with OLS.
//!
//! Two layouts are supported:
//!
//! * [`VarLayout::Unrestricted`]: `y_t = A_0 + Σ A_i y_{t−i} + Σ B_j τ_{t−j} + ω_t`
//!   with τ strictly exogenous (possibly absent).
//! * [`VarLayout::BlockExogenous`]: the joint system over `(y, τ)` where the
//!   τ-equations load only on their own lags. Coefficients of τ-equations
//!   on lagged `y` are structural zeros. With `tau_identity` the lag-1 τ
//!   block is fixed to the identity and only the intercept is estimated.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};
use thiserror::Error;

use crate::linalg::{least_squares, spectral_radius};
use crate::panel::{SeriesPanel, ShockSeries};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VarError {
    #[error("insufficient observations: {available} usable periods for {required} regressors")]
    InsufficientObservations { available: usize, required: usize },
    #[error("collinear regressors: {}", columns.join(", "))]
    CollinearRegressors { columns: Vec<String> },
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, VarError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Restriction {
    Unrestricted,
    BlockExogenous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum VarLayout {
    Unrestricted {
        /// Exogenous regressors (panel columns), may be empty.
        exog_ids: Vec<String>,
        /// Number of exogenous lags.
        q: usize,
        /// Adds `τ_t` itself as a regressor.
        contemporaneous: bool,
    },
    BlockExogenous {
        tau_ids: Vec<String>,
        tau_identity: bool,
    },
}

/// Everything needed to (re-)fit a model on a panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationConfig {
    pub y_ids: Vec<String>,
    pub p: usize,
    pub intercept: bool,
    pub layout: VarLayout,
}

impl EstimationConfig {
    pub fn unrestricted(y_ids: &[&str], p: usize) -> Self {
        Self {
            y_ids: y_ids.iter().map(|s| s.to_string()).collect(),
            p,
            intercept: true,
            layout: VarLayout::Unrestricted {
                exog_ids: Vec::new(),
                q: 0,
                contemporaneous: false,
            },
        }
    }

    pub fn block_exogenous(y_ids: &[&str], tau_ids: &[&str], p: usize) -> Self {
        Self {
            y_ids: y_ids.iter().map(|s| s.to_string()).collect(),
            p,
            intercept: true,
            layout: VarLayout::BlockExogenous {
                tau_ids: tau_ids.iter().map(|s| s.to_string()).collect(),
                tau_identity: false,
            },
        }
    }

    /// Endogenous variables in model order.
    pub fn variable_ids(&self) -> Vec<String> {
        let mut v = self.y_ids.clone();
        if let VarLayout::BlockExogenous { tau_ids, .. } = &self.layout {
            v.extend(tau_ids.iter().cloned());
        }
        v
    }

    pub fn exog_ids(&self) -> &[String] {
        match &self.layout {
            VarLayout::Unrestricted { exog_ids, .. } => exog_ids,
            VarLayout::BlockExogenous { .. } => &[],
        }
    }

    fn exog_lags(&self) -> Vec<usize> {
        match &self.layout {
            VarLayout::Unrestricted {
                exog_ids,
                q,
                contemporaneous,
            } if !exog_ids.is_empty() => {
                let first = if *contemporaneous { 0 } else { 1 };
                (first..=*q).collect()
            }
            _ => Vec::new(),
        }
    }

    /// First usable period index (largest lag).
    fn start(&self) -> usize {
        self.p.max(self.exog_lags().last().copied().unwrap_or(0))
    }

    /// Fits the configured model on `panel`.
    pub fn fit(&self, panel: &SeriesPanel) -> Result<VarModel> {
        fit(panel, self)
    }
}

/// Estimated VAR(p).
#[derive(Debug, Clone, PartialEq)]
pub struct VarModel {
    pub variable_ids: Vec<String>,
    pub p: usize,
    pub intercept: DVector<f64>,
    /// `p` matrices of size `n × n`; entry `(i, j)` of `lag_coeffs[l]` is the
    /// effect of variable `j` at lag `l + 1` on variable `i`.
    pub lag_coeffs: Vec<DMatrix<f64>>,
    pub exog_ids: Vec<String>,
    /// Lags matching `exog_coeffs` (0 = contemporaneous).
    pub exog_lags: Vec<usize>,
    /// `n × m` matrices, one per entry of `exog_lags`.
    pub exog_coeffs: Vec<DMatrix<f64>>,
    pub residuals: DMatrix<f64>,
    pub sigma: DMatrix<f64>,
    pub restriction: Restriction,
    pub config: EstimationConfig,
    /// Periods of the residual rows.
    pub sample_periods: Vec<i64>,
    /// Standard errors in the same layout as `lag_coeffs`.
    pub lag_std_errors: Vec<DMatrix<f64>>,
}

/// Companion-form representation of the endogenous dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct CompanionForm {
    pub matrix: DMatrix<f64>,
    /// `n × np` read-out map `[I 0 … 0]`.
    pub selection: DMatrix<f64>,
}

struct Design {
    /// `T_eff × K` candidate regressors.
    z: DMatrix<f64>,
    names: Vec<String>,
    /// `T_eff × n` dependent variables.
    y: DMatrix<f64>,
    periods: Vec<i64>,
}

fn columns_of(panel: &SeriesPanel, ids: &[String]) -> Result<Vec<usize>> {
    ids.iter()
        .map(|id| {
            panel
                .position(id)
                .ok_or_else(|| VarError::UnknownVariable(id.clone()))
        })
        .collect()
}

fn build_design(panel: &SeriesPanel, cfg: &EstimationConfig) -> Result<Design> {
    let vars = cfg.variable_ids();
    let exog = cfg.exog_ids().to_vec();
    let vcols = columns_of(panel, &vars)?;
    let ecols = columns_of(panel, &exog)?;
    let exog_lags = cfg.exog_lags();
    let obs = panel.observations();
    let start = cfg.start();
    let t = panel.n_periods();
    let t_eff = t.saturating_sub(start);

    let mut names = Vec::new();
    if cfg.intercept {
        names.push("const".to_string());
    }
    for l in 1..=cfg.p {
        for v in &vars {
            names.push(format!("{v}.l{l}"));
        }
    }
    for l in &exog_lags {
        for e in &exog {
            names.push(format!("{e}.l{l}"));
        }
    }
    let k = names.len();
    let mut z = DMatrix::zeros(t_eff, k);
    let mut y = DMatrix::zeros(t_eff, vars.len());
    for r in 0..t_eff {
        let tt = r + start;
        let mut c = 0;
        if cfg.intercept {
            z[(r, 0)] = 1.0;
            c = 1;
        }
        for l in 1..=cfg.p {
            for &j in &vcols {
                z[(r, c)] = obs[(tt - l, j)];
                c += 1;
            }
        }
        for &l in &exog_lags {
            for &j in &ecols {
                z[(r, c)] = obs[(tt - l, j)];
                c += 1;
            }
        }
        for (i, &j) in vcols.iter().enumerate() {
            y[(r, i)] = obs[(tt, j)];
        }
    }
    Ok(Design {
        z,
        names,
        y,
        periods: panel.time_index()[start..].to_vec(),
    })
}

fn fit(panel: &SeriesPanel, cfg: &EstimationConfig) -> Result<VarModel> {
    if cfg.p == 0 {
        return Err(VarError::InvalidSpec("lag order p must be ≥ 1".into()));
    }
    let vars = cfg.variable_ids();
    let mut seen = std::collections::HashSet::new();
    if let Some(dup) = vars.iter().chain(cfg.exog_ids()).find(|v| !seen.insert(v.as_str())) {
        return Err(VarError::CollinearRegressors {
            columns: vec![dup.clone(), dup.clone()],
        });
    }
    let n = vars.len();
    let n_y = cfg.y_ids.len();
    let design = build_design(panel, cfg)?;
    let k_full = design.names.len();
    let t_eff = design.z.nrows();

    // Active regressors and fixed offsets per equation.
    let (tau_identity, block) = match &cfg.layout {
        VarLayout::BlockExogenous { tau_identity, .. } => (*tau_identity, true),
        _ => (false, false),
    };
    let lag_col = |l: usize, j: usize| usize::from(cfg.intercept) + (l - 1) * n + j;
    let mut active: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut fixed: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for i in 0..n {
        if block && i >= n_y {
            let mut cols = Vec::new();
            if cfg.intercept {
                cols.push(0);
            }
            if tau_identity {
                for j in n_y..n {
                    fixed[i].push((lag_col(1, j), if j == i { 1.0 } else { 0.0 }));
                }
            } else {
                for l in 1..=cfg.p {
                    cols.extend((n_y..n).map(|j| lag_col(l, j)));
                }
            }
            active.push(cols);
        } else {
            active.push((0..k_full).collect());
        }
    }
    let required = active.iter().map(Vec::len).max().unwrap_or(0);
    if t_eff <= required {
        return Err(VarError::InsufficientObservations {
            available: t_eff,
            required: required + 1,
        });
    }

    // Solve equations that share a regressor set together.
    let mut coef = DMatrix::zeros(n, k_full);
    let mut se = DMatrix::zeros(n, k_full);
    let mut residuals = DMatrix::zeros(t_eff, n);
    let mut groups: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    for (i, cols) in active.iter().enumerate() {
        groups.entry(cols.clone()).or_default().push(i);
    }
    let mut keys: Vec<_> = groups.keys().cloned().collect();
    keys.sort();
    for cols in keys {
        let eqs = &groups[&cols];
        let mut yy = DMatrix::zeros(t_eff, eqs.len());
        for (c, &i) in eqs.iter().enumerate() {
            let mut col = design.y.column(i).into_owned();
            for &(zc, w) in &fixed[i] {
                if w != 0.0 {
                    col -= design.z.column(zc) * w;
                }
            }
            yy.set_column(c, &col);
        }
        let x = design.z.select_columns(&cols);
        let ls = least_squares(&x, &yy).map_err(|e| VarError::CollinearRegressors {
            columns: e.columns.iter().map(|&c| design.names[cols[c]].clone()).collect(),
        })?;
        let xtx_inv = if cols.is_empty() {
            DMatrix::zeros(0, 0)
        } else {
            (x.transpose() * &x)
                .try_inverse()
                .unwrap_or_else(|| DMatrix::from_element(cols.len(), cols.len(), f64::NAN))
        };
        let dof = (t_eff - cols.len()) as f64;
        for (c, &i) in eqs.iter().enumerate() {
            let s2 = ls.residuals.column(c).norm_squared() / dof;
            for (a, &zc) in cols.iter().enumerate() {
                coef[(i, zc)] = ls.coefficients[(a, c)];
                se[(i, zc)] = (s2 * xtx_inv[(a, a)]).sqrt();
            }
            for &(zc, w) in &fixed[i] {
                coef[(i, zc)] = w;
            }
            residuals.set_column(i, &ls.residuals.column(c));
        }
    }

    // Σ_ij = ω_i'ω_j / sqrt((T−k_i)(T−k_j))
    let dof: Vec<f64> = active.iter().map(|c| (t_eff - c.len()) as f64).collect();
    let mut sigma = residuals.transpose() * &residuals;
    for i in 0..n {
        for j in 0..n {
            sigma[(i, j)] /= (dof[i] * dof[j]).sqrt();
        }
    }
    let sigma = 0.5 * (&sigma + sigma.transpose());

    let ic = usize::from(cfg.intercept);
    let intercept = if cfg.intercept {
        coef.column(0).into_owned()
    } else {
        DVector::zeros(n)
    };
    let lag_coeffs = (0..cfg.p)
        .map(|l| coef.columns(ic + l * n, n).into_owned())
        .collect();
    let lag_std_errors = (0..cfg.p)
        .map(|l| se.columns(ic + l * n, n).into_owned())
        .collect();
    let exog_ids = cfg.exog_ids().to_vec();
    let m = exog_ids.len();
    let exog_lags = cfg.exog_lags();
    let exog_coeffs = (0..exog_lags.len())
        .map(|a| coef.columns(ic + cfg.p * n + a * m, m).into_owned())
        .collect();

    Ok(VarModel {
        variable_ids: vars,
        p: cfg.p,
        intercept,
        lag_coeffs,
        exog_ids,
        exog_lags,
        exog_coeffs,
        residuals,
        sigma,
        restriction: if block {
            Restriction::BlockExogenous
        } else {
            Restriction::Unrestricted
        },
        config: cfg.clone(),
        sample_periods: design.periods,
        lag_std_errors,
    })
}

/// Fits a VAR(p) on `variable_ids`, optionally with exogenous shock
/// series entering at lags `1..=q`.
pub fn estimate_var(
    panel: &SeriesPanel,
    variable_ids: &[&str],
    p: usize,
    exog: Option<(&[ShockSeries], usize)>,
    intercept: bool,
) -> Result<VarModel> {
    estimate_var_with(panel, variable_ids, p, exog, intercept, false)
}

/// As [`estimate_var`]; `contemporaneous` adds `τ_t` as a regressor.
pub fn estimate_var_with(
    panel: &SeriesPanel,
    variable_ids: &[&str],
    p: usize,
    exog: Option<(&[ShockSeries], usize)>,
    intercept: bool,
    contemporaneous: bool,
) -> Result<VarModel> {
    let mut cfg = EstimationConfig::unrestricted(variable_ids, p);
    cfg.intercept = intercept;
    let merged;
    let data = match exog {
        Some((shocks, q)) if !shocks.is_empty() => {
            let panels: Vec<SeriesPanel> = shocks
                .iter()
                .map(|s| s.aligned(panel.time_index()).to_panel())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| VarError::InvalidSpec(e.to_string()))?;
            let mut refs = vec![panel];
            refs.extend(panels.iter());
            merged = SeriesPanel::merge(&refs).map_err(|e| VarError::InvalidSpec(e.to_string()))?;
            cfg.layout = VarLayout::Unrestricted {
                exog_ids: shocks.iter().map(|s| s.shock_id.clone()).collect(),
                q,
                contemporaneous,
            };
            if q == 0 && !contemporaneous {
                return Err(VarError::InvalidSpec("exogenous lags q must be ≥ 1".into()));
            }
            &merged
        }
        _ => panel,
    };
    cfg.fit(data)
}

/// Fits the joint `(y, τ)` system with block-exogeneity zeros.
pub fn estimate_block_restricted(
    panel: &SeriesPanel,
    y_ids: &[&str],
    tau_ids: &[&str],
    p: usize,
    tau_identity: bool,
) -> Result<VarModel> {
    if tau_ids.is_empty() {
        return Err(VarError::InvalidSpec("no tau variables".into()));
    }
    if let Some(both) = tau_ids.iter().find(|t| y_ids.contains(t)) {
        return Err(VarError::InvalidSpec(format!("{both} is both y and tau")));
    }
    let mut cfg = EstimationConfig::block_exogenous(y_ids, tau_ids, p);
    if let VarLayout::BlockExogenous { tau_identity: ti, .. } = &mut cfg.layout {
        *ti = tau_identity;
    }
    cfg.fit(panel)
}

impl VarModel {
    pub fn n(&self) -> usize {
        self.variable_ids.len()
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.variable_ids.iter().position(|v| v == id)
    }

    pub fn companion(&self) -> CompanionForm {
        let n = self.n();
        let np = n * self.p;
        let mut matrix = DMatrix::zeros(np, np);
        for (l, a) in self.lag_coeffs.iter().enumerate() {
            matrix.view_mut((0, l * n), (n, n)).copy_from(a);
        }
        for b in 1..self.p {
            matrix
                .view_mut((b * n, (b - 1) * n), (n, n))
                .fill_with_identity();
        }
        let mut selection = DMatrix::zeros(n, np);
        selection.view_mut((0, 0), (n, n)).fill_with_identity();
        CompanionForm { matrix, selection }
    }

    /// Fitted values reconstructed from the stored residuals and data.
    pub fn fitted(&self, panel: &SeriesPanel) -> Result<DMatrix<f64>> {
        let design = build_design(panel, &self.config)?;
        Ok(design.y - &self.residuals)
    }

    /// Regressor matrix used in the fit (all candidate columns).
    pub fn design_matrix(&self, panel: &SeriesPanel) -> Result<DMatrix<f64>> {
        Ok(build_design(panel, &self.config)?.z)
    }
}

/// Largest companion eigenvalue modulus and whether it is below one.
pub fn stability(model: &VarModel) -> (f64, bool) {
    let r = spectral_radius(&model.companion().matrix);
    (r, r < 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InformationCriterion {
    #[serde(rename = "AIC")]
    Aic,
    #[serde(rename = "BIC")]
    Bic,
    #[serde(rename = "HQ")]
    Hq,
}

impl std::str::FromStr for InformationCriterion {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "AIC" => Ok(Self::Aic),
            "BIC" => Ok(Self::Bic),
            "HQ" => Ok(Self::Hq),
            other => Err(format!("unknown criterion {other:?}")),
        }
    }
}

/// Picks the lag order in `1..=p_max` minimizing the criterion, comparing
/// all orders on the common sample that drops the first `p_max` periods.
pub fn select_lag(
    panel: &SeriesPanel,
    variable_ids: &[&str],
    p_max: usize,
    criterion: InformationCriterion,
) -> Result<usize> {
    if p_max == 0 {
        return Err(VarError::InvalidSpec("p_max must be ≥ 1".into()));
    }
    let n = variable_ids.len();
    let t = panel.n_periods();
    let t_eff = t.saturating_sub(p_max);
    let k_max = n * p_max + 1;
    if t_eff <= k_max {
        return Err(VarError::InsufficientObservations {
            available: t_eff,
            required: k_max + 1,
        });
    }
    let mut best = (1, f64::INFINITY);
    for p in 1..=p_max {
        let trimmed = panel
            .window(panel.time_index()[p_max - p], *panel.time_index().last().unwrap())
            .map_err(|e| VarError::InvalidSpec(e.to_string()))?;
        let model = estimate_var(&trimmed, variable_ids, p, None, true)?;
        let ml_sigma = model.residuals.transpose() * &model.residuals / t_eff as f64;
        let logdet = ml_sigma.determinant().max(f64::MIN_POSITIVE).ln();
        let tf = t_eff as f64;
        let params = (n * (n * p + 1)) as f64;
        let penalty = match criterion {
            InformationCriterion::Aic => 2.0 / tf,
            InformationCriterion::Bic => tf.ln() / tf,
            InformationCriterion::Hq => 2.0 * tf.ln().ln() / tf,
        };
        let value = logdet + penalty * params;
        if value < best.1 {
            best = (p, value);
        }
    }
    Ok(best.0)
}

/// Joint F-test that lagged `y` does not enter the τ-equations.
/// With several τ series the residual sums of squares are pooled.
pub fn granger_block_test(
    panel: &SeriesPanel,
    y_ids: &[&str],
    tau_ids: &[&str],
    p: usize,
) -> Result<(f64, f64)> {
    let mut all: Vec<&str> = y_ids.to_vec();
    all.extend_from_slice(tau_ids);
    let unrestricted = estimate_var(panel, &all, p, None, true)?;
    let restricted = estimate_block_restricted(panel, y_ids, tau_ids, p, false)?;
    let n_y = y_ids.len();
    let m = tau_ids.len();
    let t_eff = unrestricted.residuals.nrows() as f64;
    let k_u = (1 + all.len() * p) as f64;
    let rss = |model: &VarModel| -> f64 {
        (n_y..n_y + m)
            .map(|i| model.residuals.column(i).norm_squared())
            .sum()
    };
    let (rss_u, rss_r) = (rss(&unrestricted), rss(&restricted));
    let df1 = (m * n_y * p) as f64;
    let df2 = m as f64 * (t_eff - k_u);
    let f = ((rss_r - rss_u) / df1) / (rss_u / df2);
    let f = f.max(0.0);
    let dist = FisherSnedecor::new(df1, df2).map_err(|e| VarError::InvalidSpec(e.to_string()))?;
    Ok((f, (1.0 - dist.cdf(f)).clamp(0.0, 1.0)))
}

/// Row-major matrix for JSON documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowMajor {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl From<&DMatrix<f64>> for RowMajor {
    fn from(m: &DMatrix<f64>) -> Self {
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m.transpose().iter().copied().collect(),
        }
    }
}

impl RowMajor {
    pub fn to_matrix(&self) -> std::result::Result<DMatrix<f64>, String> {
        if self.data.len() != self.rows * self.cols {
            return Err(format!(
                "matrix data has {} entries, expected {}×{}",
                self.data.len(),
                self.rows,
                self.cols
            ));
        }
        Ok(DMatrix::from_row_slice(self.rows, self.cols, &self.data))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct VarModelDoc {
    variable_ids: Vec<String>,
    p: usize,
    intercept: Vec<f64>,
    lag_coeffs: Vec<RowMajor>,
    exog_ids: Vec<String>,
    exog_lags: Vec<usize>,
    exog_coeffs: Vec<RowMajor>,
    sigma: RowMajor,
    restriction: Restriction,
    config: EstimationConfig,
}

impl VarModel {
    pub fn to_json(&self) -> String {
        let doc = VarModelDoc {
            variable_ids: self.variable_ids.clone(),
            p: self.p,
            intercept: self.intercept.iter().copied().collect(),
            lag_coeffs: self.lag_coeffs.iter().map(RowMajor::from).collect(),
            exog_ids: self.exog_ids.clone(),
            exog_lags: self.exog_lags.clone(),
            exog_coeffs: self.exog_coeffs.iter().map(RowMajor::from).collect(),
            sigma: RowMajor::from(&self.sigma),
            restriction: self.restriction,
            config: self.config.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("model serializes")
    }

    /// Reads a model document. Residuals and standard errors are not
    /// stored, so they come back empty.
    pub fn from_json(s: &str) -> std::result::Result<VarModel, String> {
        let doc: VarModelDoc = serde_json::from_str(s).map_err(|e| e.to_string())?;
        let n = doc.variable_ids.len();
        let lag_coeffs: Vec<DMatrix<f64>> = doc
            .lag_coeffs
            .iter()
            .map(RowMajor::to_matrix)
            .collect::<std::result::Result<_, _>>()?;
        if lag_coeffs.len() != doc.p || lag_coeffs.iter().any(|a| a.shape() != (n, n)) {
            return Err("lag coefficient shapes do not match p and n".into());
        }
        let sigma = doc.sigma.to_matrix()?;
        if sigma.shape() != (n, n) || doc.intercept.len() != n {
            return Err("sigma or intercept has the wrong shape".into());
        }
        Ok(VarModel {
            variable_ids: doc.variable_ids,
            p: doc.p,
            intercept: DVector::from_vec(doc.intercept),
            lag_std_errors: vec![DMatrix::zeros(n, n); doc.p],
            lag_coeffs,
            exog_ids: doc.exog_ids,
            exog_lags: doc.exog_lags,
            exog_coeffs: doc
                .exog_coeffs
                .iter()
                .map(RowMajor::to_matrix)
                .collect::<std::result::Result<_, _>>()?,
            residuals: DMatrix::zeros(0, n),
            sigma,
            restriction: doc.restriction,
            config: doc.config,
            sample_periods: Vec::new(),
        })
    }

    /// Builds a model directly from coefficients, e.g. as a simulation DGP.
    pub fn from_parts(
        variable_ids: &[&str],
        intercept: DVector<f64>,
        lag_coeffs: Vec<DMatrix<f64>>,
        sigma: DMatrix<f64>,
    ) -> VarModel {
        let n = variable_ids.len();
        let p = lag_coeffs.len();
        assert!(p >= 1, "at least one lag");
        assert!(lag_coeffs.iter().all(|a| a.shape() == (n, n)));
        assert_eq!(sigma.shape(), (n, n));
        assert_eq!(intercept.len(), n);
        VarModel {
            variable_ids: variable_ids.iter().map(|s| s.to_string()).collect(),
            p,
            intercept,
            lag_std_errors: vec![DMatrix::zeros(n, n); p],
            lag_coeffs,
            exog_ids: Vec::new(),
            exog_lags: Vec::new(),
            exog_coeffs: Vec::new(),
            residuals: DMatrix::zeros(0, n),
            sigma,
            restriction: Restriction::Unrestricted,
            config: EstimationConfig::unrestricted(variable_ids, p),
            sample_periods: Vec::new(),
        }
    }

    /// Marks the trailing `tau_ids` as a block-exogenous τ block, so that
    /// re-fits on simulated data use the restricted layout.
    pub fn with_block_layout(mut self, tau_ids: &[&str]) -> VarModel {
        let y: Vec<String> = self
            .variable_ids
            .iter()
            .filter(|v| !tau_ids.contains(&v.as_str()))
            .cloned()
            .collect();
        self.config = EstimationConfig {
            y_ids: y,
            p: self.p,
            intercept: true,
            layout: VarLayout::BlockExogenous {
                tau_ids: tau_ids.iter().map(|s| s.to_string()).collect(),
                tau_identity: false,
            },
        };
        self.restriction = Restriction::BlockExogenous;
        self
    }
}
