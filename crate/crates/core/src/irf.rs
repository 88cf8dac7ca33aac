//! Impulse responses, cumulative responses, variance decompositions and
//! residual-bootstrap bands.

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::median_target;
use crate::identify::{
    cholesky_factor, identify_with_factor, task_rng, IdentifyConfig, IdentifyError, ImpulseVector,
    SignRestrictionSpec,
};
use crate::panel::SeriesPanel;
use crate::stats::quantile_sorted;
use crate::var::{EstimationConfig, VarError, VarModel};

/// Default horizon in periods.
pub const DEFAULT_HORIZON: usize = 10;
/// Minimum bootstrap replications accepted.
pub const MIN_REPLICATIONS: usize = 100;
/// Largest share of failed replications tolerated.
pub const MAX_DROP_SHARE: f64 = 0.2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IrfError {
    #[error("impulse has dimension {got}, model has {expected} variables")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("all values are equal; cannot normalize to [0, 1]")]
    DegenerateRange,
    #[error("at least two units are needed for normalization")]
    TooFewUnits,
    #[error("factorization does not span any variance of {variable}")]
    NotPositiveDefinite { variable: String },
    #[error("rotation is not orthonormal (max deviation {deviation:.3e})")]
    InvalidRotation { deviation: f64 },
    #[error("bootstrap needs at least {MIN_REPLICATIONS} replications, got {0}")]
    TooFewReplications(usize),
    #[error("band level must lie in (0, 1), got {0}")]
    InvalidLevel(f64),
    #[error("{dropped} of {replications} bootstrap replications failed")]
    TooManyDropped { dropped: usize, replications: usize },
    #[error(transparent)]
    Var(#[from] VarError),
    #[error(transparent)]
    Identify(#[from] IdentifyError),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, IrfError>;

impl From<std::io::Error> for IrfError {
    fn from(e: std::io::Error) -> Self {
        IrfError::Io(e.to_string())
    }
}

/// Responses of every variable to one shock, `n × (H+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponseSet {
    pub values: DMatrix<f64>,
    pub variable_ids: Vec<String>,
}

impl ImpulseResponseSet {
    pub fn horizon(&self) -> usize {
        self.values.ncols() - 1
    }

    pub fn row(&self, id: &str) -> Option<Vec<f64>> {
        let i = self.variable_ids.iter().position(|v| v == id)?;
        Some(self.values.row(i).iter().copied().collect())
    }
}

/// MA coefficients `Φ_0 = I, …, Φ_H` read off the companion powers.
pub fn ma_coefficients(model: &VarModel, horizon: usize) -> Vec<DMatrix<f64>> {
    let n = model.n();
    let comp = model.companion();
    let mut out = Vec::with_capacity(horizon + 1);
    // Φ_h = S C^h S'; iterate on the n leading columns only.
    let mut block = comp.selection.transpose();
    for h in 0..=horizon {
        if h > 0 {
            block = &comp.matrix * block;
        }
        out.push(block.rows(0, n).into_owned());
    }
    out
}

/// Responses to `impulse.impact` for horizons `0..=H`.
pub fn compute_irf(model: &VarModel, impulse: &ImpulseVector, horizon: usize) -> Result<ImpulseResponseSet> {
    irf_from_impact(model, &impulse.impact, horizon)
}

/// Responses to an arbitrary impact vector.
pub fn irf_from_impact(model: &VarModel, impact: &[f64], horizon: usize) -> Result<ImpulseResponseSet> {
    let n = model.n();
    if impact.len() != n {
        return Err(IrfError::DimensionMismatch {
            expected: n,
            got: impact.len(),
        });
    }
    let comp = model.companion();
    let np = comp.matrix.nrows();
    let mut state = DVector::zeros(np);
    state.rows_mut(0, n).copy_from_slice(impact);
    let mut values = DMatrix::zeros(n, horizon + 1);
    values.column_mut(0).copy_from_slice(impact);
    for h in 1..=horizon {
        state = &comp.matrix * state;
        values.set_column(h, &state.rows(0, n));
    }
    Ok(ImpulseResponseSet {
        values,
        variable_ids: model.variable_ids.clone(),
    })
}

/// Running sum along horizons.
pub fn cumulative(irf: &ImpulseResponseSet) -> ImpulseResponseSet {
    let mut values = irf.values.clone();
    for h in 1..values.ncols() {
        let prev = values.column(h - 1).into_owned();
        let mut col = values.column_mut(h);
        col += prev;
    }
    ImpulseResponseSet {
        values,
        variable_ids: irf.variable_ids.clone(),
    }
}

/// Maps values affinely onto `[0, 1]`.
pub fn normalize_unit_range(values: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>> {
    if values.len() < 2 {
        return Err(IrfError::TooFewUnits);
    }
    let lo = values.values().copied().fold(f64::INFINITY, f64::min);
    let hi = values.values().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(IrfError::DegenerateRange);
    }
    Ok(values
        .iter()
        .map(|(k, v)| {
            let x = if *v == hi {
                1.0
            } else {
                (v - lo) / (hi - lo)
            };
            (k.clone(), x)
        })
        .collect())
}

/// Variance decomposition; `shares[h − 1]` is the `n × K` table at
/// horizon `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct FevdTable {
    pub shares: Vec<DMatrix<f64>>,
    pub variable_ids: Vec<String>,
}

impl FevdTable {
    pub fn horizon(&self) -> usize {
        self.shares.len()
    }

    /// Share of variable `v`'s `h`-step variance due to shock `k`.
    pub fn share(&self, v: usize, h: usize, k: usize) -> f64 {
        self.shares[h - 1][(v, k)]
    }
}

/// Decomposition under the orthogonalization `P = L Q`, horizons `1..=H`.
pub fn fevd(model: &VarModel, l: &DMatrix<f64>, q: Option<&DMatrix<f64>>, horizon: usize) -> Result<FevdTable> {
    let n = model.n();
    if l.shape() != (n, n) {
        return Err(IrfError::DimensionMismatch {
            expected: n,
            got: l.nrows(),
        });
    }
    let p = match q {
        Some(q) => {
            let dev = (q.transpose() * q - DMatrix::identity(q.ncols(), q.ncols())).amax();
            if q.nrows() != n || dev > 1e-8 {
                return Err(IrfError::InvalidRotation { deviation: dev });
            }
            l * q
        }
        None => l.clone(),
    };
    let k = p.ncols();
    let phi = ma_coefficients(model, horizon.saturating_sub(1));
    let mut acc = DMatrix::zeros(n, k);
    let mut shares = Vec::with_capacity(horizon);
    for h in 1..=horizon {
        let theta = &phi[h - 1] * &p;
        acc += theta.component_mul(&theta);
        let mut table = acc.clone();
        for v in 0..n {
            let total: f64 = acc.row(v).sum();
            if !(total > 0.0) {
                return Err(IrfError::NotPositiveDefinite {
                    variable: model.variable_ids[v].clone(),
                });
            }
            table.row_mut(v).iter_mut().for_each(|x| *x /= total);
        }
        shares.push(table);
    }
    Ok(FevdTable {
        shares,
        variable_ids: model.variable_ids.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replications: usize,
    pub level: f64,
    /// Reuse the point estimate's α instead of re-identifying.
    pub fix_alpha: bool,
    /// Draws per replication when re-identifying.
    pub draws_per_replication: usize,
    pub seed: u64,
}

impl BootstrapConfig {
    pub fn new(replications: usize, level: f64, seed: u64) -> Self {
        Self {
            replications,
            level,
            fix_alpha: false,
            draws_per_replication: 500,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceBands {
    pub lower: DMatrix<f64>,
    pub upper: DMatrix<f64>,
    pub level: f64,
    /// Replications that contributed.
    pub replications: usize,
    pub dropped: usize,
    pub variable_ids: Vec<String>,
}

impl ConfidenceBands {
    pub fn max_width(&self) -> f64 {
        (&self.upper - &self.lower).amax()
    }
}

/// Fits `estimation` on `panel`, then bootstraps bands for the shock
/// identified by `spec` and `identification`.
pub fn bootstrap_bands(
    panel: &SeriesPanel,
    estimation: &EstimationConfig,
    spec: &SignRestrictionSpec,
    identification: &IdentifyConfig,
    boot: &BootstrapConfig,
) -> Result<ConfidenceBands> {
    check_boot(boot)?;
    let model = estimation.fit(panel)?;
    let alpha = if boot.fix_alpha {
        let draws = crate::identify::identify_shock(&model, spec, identification)?;
        let mt = median_target(&draws).expect("non-empty draw set");
        Some(draws.accepted[mt.chosen_index].impulse.alpha.clone())
    } else {
        None
    };
    bootstrap_from_model(panel, &model, spec, identification, boot, alpha.as_deref())
}

fn check_boot(boot: &BootstrapConfig) -> Result<()> {
    if boot.replications < MIN_REPLICATIONS {
        return Err(IrfError::TooFewReplications(boot.replications));
    }
    if !(boot.level > 0.0 && boot.level < 1.0) {
        return Err(IrfError::InvalidLevel(boot.level));
    }
    Ok(())
}

/// Bootstrap around an already fitted `model` (fitted on `panel` with its
/// own config). With `fixed_alpha`, every replication reuses that rotation.
pub fn bootstrap_from_model(
    panel: &SeriesPanel,
    model: &VarModel,
    spec: &SignRestrictionSpec,
    identification: &IdentifyConfig,
    boot: &BootstrapConfig,
    fixed_alpha: Option<&[f64]>,
) -> Result<ConfidenceBands> {
    check_boot(boot)?;
    let n = model.n();
    let h = identification.horizon;
    let resid = centered(&model.residuals);

    let results: Vec<Option<DMatrix<f64>>> = (0..boot.replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = task_rng(boot.seed, r as u64);
            let data = resample_panel(panel, model, &resid, &mut rng)?;
            let refit = model.config.fit(&data).ok()?;
            replicate_irf(&refit, spec, identification, boot, fixed_alpha, r)
        })
        .collect();

    let kept: Vec<DMatrix<f64>> = results.into_iter().flatten().collect();
    let dropped = boot.replications - kept.len();
    if dropped as f64 > MAX_DROP_SHARE * boot.replications as f64 {
        return Err(IrfError::TooManyDropped {
            dropped,
            replications: boot.replications,
        });
    }
    if dropped > 0 {
        log::warn!("{dropped} bootstrap replications dropped");
    }
    let lo_q = (1.0 - boot.level) / 2.0;
    let hi_q = 1.0 - lo_q;
    let mut lower = DMatrix::zeros(n, h + 1);
    let mut upper = DMatrix::zeros(n, h + 1);
    let mut cell = Vec::with_capacity(kept.len());
    for v in 0..n {
        for j in 0..=h {
            cell.clear();
            cell.extend(kept.iter().map(|m| m[(v, j)]));
            cell.sort_by(f64::total_cmp);
            lower[(v, j)] = quantile_sorted(&cell, lo_q);
            upper[(v, j)] = quantile_sorted(&cell, hi_q).max(lower[(v, j)]);
        }
    }
    Ok(ConfidenceBands {
        lower,
        upper,
        level: boot.level,
        replications: kept.len(),
        dropped,
        variable_ids: model.variable_ids.clone(),
    })
}

fn centered(residuals: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = residuals.clone();
    for mut col in out.column_iter_mut() {
        let m = col.mean();
        col.add_scalar_mut(-m);
    }
    out
}

/// Rebuilds the endogenous columns recursively from the first `start`
/// observations, the estimated coefficients and resampled residual rows.
/// Exogenous columns are kept as observed.
fn resample_panel<R: Rng>(
    panel: &SeriesPanel,
    model: &VarModel,
    resid: &DMatrix<f64>,
    rng: &mut R,
) -> Option<SeriesPanel> {
    let n = model.n();
    let vcols: Vec<usize> = model
        .variable_ids
        .iter()
        .map(|v| panel.position(v))
        .collect::<Option<_>>()?;
    let ecols: Vec<usize> = model
        .exog_ids
        .iter()
        .map(|v| panel.position(v))
        .collect::<Option<_>>()?;
    let start = model.p.max(model.exog_lags.iter().copied().max().unwrap_or(0));
    let mut obs = panel.observations().clone();
    let t_total = obs.nrows();
    let t_eff = resid.nrows();
    if t_eff == 0 {
        return None;
    }
    let mut y = DVector::zeros(n);
    for t in start..t_total {
        y.copy_from(&model.intercept);
        for (l, a) in model.lag_coeffs.iter().enumerate() {
            let lagged = DVector::from_iterator(n, vcols.iter().map(|&c| obs[(t - l - 1, c)]));
            y += a * lagged;
        }
        for (lag, b) in model.exog_lags.iter().zip(&model.exog_coeffs) {
            let x = DVector::from_iterator(ecols.len(), ecols.iter().map(|&c| obs[(t - lag, c)]));
            y += b * x;
        }
        let draw = rng.random_range(0..t_eff);
        y += resid.row(draw).transpose();
        for (i, &c) in vcols.iter().enumerate() {
            obs[(t, c)] = y[i];
        }
    }
    SeriesPanel::new(obs, panel.time_index().to_vec(), panel.series_ids().to_vec()).ok()
}

fn replicate_irf(
    model: &VarModel,
    spec: &SignRestrictionSpec,
    identification: &IdentifyConfig,
    boot: &BootstrapConfig,
    fixed_alpha: Option<&[f64]>,
    r: usize,
) -> Option<DMatrix<f64>> {
    let l = cholesky_factor(&model.sigma).ok()?;
    let h = identification.horizon;
    if let Some(alpha) = fixed_alpha {
        let mut impact: Vec<f64> = (&l * DVector::from_column_slice(alpha)).iter().copied().collect();
        if let Some(id) = &identification.shock_variable {
            let s = model.position(id)?;
            if impact[s] == 0.0 {
                return None;
            }
            let scale = -1.0 / impact[s];
            impact.iter_mut().for_each(|x| *x *= scale);
        }
        return irf_from_impact(model, &impact, h).ok().map(|s| s.values);
    }
    let cfg = IdentifyConfig {
        n_draws: boot.draws_per_replication,
        seed: crate::identify::derive_seed(boot.seed, &["bootstrap", &r.to_string()]),
        ..identification.clone()
    };
    let draws = identify_with_factor(model, &l, spec, &cfg).ok()?;
    let mt = median_target(&draws).ok()?;
    Some(draws.accepted[mt.chosen_index].irf.clone())
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

/// `horizon,<ids>` table of an `n × cols` array whose column `j` is
/// horizon `first + j`.
pub fn write_horizon_table<W: Write>(
    mut w: W,
    variable_ids: &[String],
    values: &DMatrix<f64>,
    first: usize,
) -> Result<()> {
    writeln!(w, "horizon,{}", variable_ids.join(","))?;
    for j in 0..values.ncols() {
        let row: Vec<String> = values.column(j).iter().map(|v| fmt(*v)).collect();
        writeln!(w, "{},{}", first + j, row.join(","))?;
    }
    Ok(())
}

pub fn write_irf_csv<W: Write>(w: W, irf: &ImpulseResponseSet) -> Result<()> {
    write_horizon_table(w, &irf.variable_ids, &irf.values, 0)
}

/// Bands as `horizon,bound,<ids>` with a `lower` and an `upper` row per
/// horizon.
pub fn write_bands_csv<W: Write>(mut w: W, bands: &ConfidenceBands) -> Result<()> {
    writeln!(w, "horizon,bound,{}", bands.variable_ids.join(","))?;
    for j in 0..bands.lower.ncols() {
        for (name, m) in [("lower", &bands.lower), ("upper", &bands.upper)] {
            let row: Vec<String> = m.column(j).iter().map(|v| fmt(*v)).collect();
            writeln!(w, "{j},{name},{}", row.join(","))?;
        }
    }
    Ok(())
}

/// Shares of shock `k` by horizon (`1..=H`).
pub fn write_fevd_csv<W: Write>(w: W, table: &FevdTable, k: usize) -> Result<()> {
    let n = table.variable_ids.len();
    let values = DMatrix::from_fn(n, table.horizon(), |v, j| table.shares[j][(v, k)]);
    write_horizon_table(w, &table.variable_ids, &values, 1)
}

/// Reporting horizons of the wide FEVD table.
pub const FEVD_REPORT_HORIZONS: [usize; 3] = [1, 5, 10];

/// Wide table: one row per variable, one column per reporting horizon.
pub fn write_fevd_wide<W: Write>(mut w: W, table: &FevdTable, k: usize) -> Result<()> {
    let hs: Vec<usize> = FEVD_REPORT_HORIZONS
        .iter()
        .copied()
        .filter(|&h| h <= table.horizon())
        .collect();
    let header: Vec<String> = hs.iter().map(|h| h.to_string()).collect();
    writeln!(w, "variable,{}", header.join(","))?;
    for (v, id) in table.variable_ids.iter().enumerate() {
        let row: Vec<String> = hs.iter().map(|&h| fmt(table.share(v, h, k))).collect();
        writeln!(w, "{id},{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identify::{Sign, ShockSpace};
    use crate::linalg::complete_basis;

    fn ar1(a: f64) -> VarModel {
        VarModel::from_parts(
            &["x"],
            DVector::zeros(1),
            vec![DMatrix::from_element(1, 1, a)],
            DMatrix::identity(1, 1),
        )
    }

    #[test]
    fn zero_lags_give_impact_only() {
        let m = VarModel::from_parts(&["a", "b"], DVector::zeros(2), vec![DMatrix::zeros(2, 2)], DMatrix::identity(2, 2));
        let irf = irf_from_impact(&m, &[1.0, 0.0], 4).unwrap();
        assert_eq!(irf.values.column(0).as_slice(), &[1.0, 0.0]);
        assert!(irf.values.columns(1, 4).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn geometric_decay() {
        let irf = irf_from_impact(&ar1(0.5), &[1.0], 10).unwrap();
        for h in 0..=10 {
            assert!((irf.values[(0, h)] - 0.5f64.powi(h as i32)).abs() <= 1e-12);
        }
        let c = cumulative(&irf_from_impact(&ar1(0.5), &[1.0], 60).unwrap());
        assert!((c.values[(0, 60)] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn second_order_companion() {
        // y_t = 0.5 y_{t-1} + 0.2 y_{t-2}: ψ_0 = 1, ψ_1 = 0.5, ψ_h = 0.5ψ_{h-1} + 0.2ψ_{h-2}
        let m = VarModel::from_parts(
            &["x"],
            DVector::zeros(1),
            vec![DMatrix::from_element(1, 1, 0.5), DMatrix::from_element(1, 1, 0.2)],
            DMatrix::identity(1, 1),
        );
        let irf = irf_from_impact(&m, &[1.0], 8).unwrap();
        let mut psi = vec![1.0, 0.5];
        for h in 2..=8 {
            psi.push(0.5 * psi[h - 1] + 0.2 * psi[h - 2]);
        }
        for h in 0..=8 {
            assert!((irf.values[(0, h)] - psi[h]).abs() < 1e-14);
        }
        let phi = ma_coefficients(&m, 8);
        assert!((phi[5][(0, 0)] - psi[5]).abs() < 1e-14);
    }

    #[test]
    fn dimension_mismatch() {
        assert_eq!(
            irf_from_impact(&ar1(0.5), &[1.0, 2.0], 3).unwrap_err(),
            IrfError::DimensionMismatch { expected: 1, got: 2 }
        );
    }

    #[test]
    fn cumulative_examples() {
        let ones = ImpulseResponseSet {
            values: DMatrix::from_element(1, 11, 1.0),
            variable_ids: vec!["x".into()],
        };
        assert_eq!(cumulative(&ones).values[(0, 10)], 11.0);
        let zero = ImpulseResponseSet {
            values: DMatrix::zeros(2, 5),
            variable_ids: vec!["a".into(), "b".into()],
        };
        assert_eq!(cumulative(&zero).values, DMatrix::zeros(2, 5));
    }

    #[test]
    fn unit_range() {
        let m: BTreeMap<String, f64> = [("A", 2.0), ("B", 4.0), ("C", 6.0)]
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        let out = normalize_unit_range(&m).unwrap();
        assert_eq!(out["A"], 0.0);
        assert_eq!(out["B"], 0.5);
        assert_eq!(out["C"], 1.0);
        let flat: BTreeMap<String, f64> = [("A".to_string(), 5.0), ("B".to_string(), 5.0)].into();
        assert_eq!(normalize_unit_range(&flat).unwrap_err(), IrfError::DegenerateRange);
    }

    #[test]
    fn fevd_diagonal_and_scalar() {
        let m = VarModel::from_parts(
            &["a", "b"],
            DVector::zeros(2),
            vec![DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.9]))],
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0])),
        );
        let l = cholesky_factor(&m.sigma).unwrap();
        let t = fevd(&m, &l, None, 10).unwrap();
        for h in 1..=10 {
            assert_eq!(t.share(0, h, 0), 1.0);
            assert_eq!(t.share(0, h, 1), 0.0);
            assert_eq!(t.share(1, h, 1), 1.0);
        }
        let s = fevd(&ar1(0.7), &DMatrix::identity(1, 1), None, 10).unwrap();
        assert!((1..=10).all(|h| s.share(0, h, 0) == 1.0));
    }

    #[test]
    fn fevd_rows_sum_to_one_under_rotation() {
        let m = VarModel::from_parts(
            &["a", "b", "c"],
            DVector::zeros(3),
            vec![DMatrix::from_row_slice(3, 3, &[0.5, 0.1, 0.0, 0.2, 0.3, -0.1, 0.0, 0.4, 0.6])],
            DMatrix::from_row_slice(3, 3, &[1.0, 0.3, 0.1, 0.3, 2.0, -0.2, 0.1, -0.2, 0.5]),
        );
        let l = cholesky_factor(&m.sigma).unwrap();
        let q = complete_basis(&DVector::from_vec(vec![0.2, -0.7, 0.4]));
        let t = fevd(&m, &l, Some(&q), 10).unwrap();
        for h in 1..=10 {
            for v in 0..3 {
                let s: f64 = (0..3).map(|k| t.share(v, h, k)).sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
        let bad = DMatrix::from_element(3, 3, 1.0);
        assert!(matches!(fevd(&m, &l, Some(&bad), 5), Err(IrfError::InvalidRotation { .. })));
    }

    #[test]
    fn bootstrap_preconditions() {
        let panel = SeriesPanel::new(
            DMatrix::from_fn(30, 1, |i, _| ((i * 37) % 11) as f64),
            (0..30).collect(),
            vec!["x".into()],
        )
        .unwrap();
        let est = EstimationConfig::unrestricted(&["x"], 1);
        let spec = SignRestrictionSpec::uniform(&["x"], Sign::Positive, 0, 0).unwrap();
        let id = IdentifyConfig::rejection(50, 3, 1);
        let err = bootstrap_bands(&panel, &est, &spec, &id, &BootstrapConfig::new(50, 0.95, 1)).unwrap_err();
        assert_eq!(err, IrfError::TooFewReplications(50));
        let err = bootstrap_bands(&panel, &est, &spec, &id, &BootstrapConfig::new(100, 1.0, 1)).unwrap_err();
        assert_eq!(err, IrfError::InvalidLevel(1.0));
    }

    #[test]
    fn bootstrap_bands_ordered_and_reproducible() {
        let mut x = vec![0.0];
        let mut rng = task_rng(9, 0);
        for t in 1..60 {
            let e: f64 = rng.sample(rand_distr::StandardNormal);
            x.push(0.6 * x[t - 1] + e);
        }
        let panel = SeriesPanel::new(DMatrix::from_column_slice(60, 1, &x), (0..60).collect(), vec!["x".into()]).unwrap();
        let est = EstimationConfig::unrestricted(&["x"], 1);
        let spec = SignRestrictionSpec::uniform(&["x"], Sign::Positive, 0, 0).unwrap();
        let mut id = IdentifyConfig::rejection(20, 5, 1);
        id.shock_space = ShockSpace::Joint;
        let boot = BootstrapConfig::new(100, 0.9, 4);
        let a = bootstrap_bands(&panel, &est, &spec, &id, &boot).unwrap();
        let b = bootstrap_bands(&panel, &est, &spec, &id, &boot).unwrap();
        assert_eq!(a, b);
        assert!(a.lower.iter().zip(a.upper.iter()).all(|(l, u)| l <= u));
        assert!(a.max_width() > 0.0);
    }

    #[test]
    fn csv_layouts() {
        let irf = irf_from_impact(&ar1(0.5), &[1.0], 2).unwrap();
        let mut out = Vec::new();
        write_irf_csv(&mut out, &irf).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "horizon,x\n0,1\n1,0.5\n2,0.25\n");
        let t = fevd(&ar1(0.5), &DMatrix::identity(1, 1), None, 10).unwrap();
        let mut out = Vec::new();
        write_fevd_wide(&mut out, &t, 0).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "variable,1,5,10\nx,1,1,1\n");
    }
}
