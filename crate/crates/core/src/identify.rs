//! Sign-restricted identification of a single structural shock.
//!
//! The reduced-form covariance is factored as `Σ = L L'`. A candidate
//! shock is an impulse vector `a = L α` for a unit vector `α`; its
//! responses are `Θ_h α` with `Θ_h = Φ_h L`. Two modes are provided:
//!
//! * rejection: draw `α` uniformly on the sphere and keep it when every
//!   sign constraint holds strictly;
//! * penalty: minimize the asymmetric penalty
//!   `Σ Ψ(−s · r_{v,h} / σ_v)`, `Ψ(x) = x` for `x ≤ 0` and `w · x`
//!   otherwise, over the sphere from many random starts.
//!
//! When a shock variable is designated, each candidate's sign is first
//! chosen so that the shock variable falls on impact, and accepted draws
//! are rescaled so that the impact equals exactly −1.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::irf::ma_coefficients;
use crate::linalg::symmetric_eigen_desc;
use crate::optim::{minimize, TrustRegionOptions};
use crate::var::{stability, VarModel};

/// Below this (relative) eigenvalue Σ is treated as broken rather than
/// rounded.
pub const PSD_REPAIR_FLOOR: f64 = -1e-6;
/// Ridge added on repair, relative to `trace / n`.
pub const RIDGE_SCALE: f64 = 1e-10;
/// Default weight on violated constraints.
pub const DEFAULT_PENALTY_WEIGHT: f64 = 100.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IdentifyError {
    #[error("covariance is not positive definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("constraint on {variable} reaches horizon {horizon} beyond {max}")]
    HorizonOutOfRange {
        variable: String,
        horizon: usize,
        max: usize,
    },
    #[error("no accepted draws out of {attempted}; violation counts: {violations}")]
    NoAcceptedDraws { attempted: usize, violations: String },
    #[error("optimizer diverged from start {start}")]
    OptimizerDiverged { start: usize },
    #[error("invalid sign restriction: {0}")]
    InvalidSpec(String),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
}

pub type Result<T> = std::result::Result<T, IdentifyError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Negative,
    Unrestricted,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
            Sign::Unrestricted => 0.0,
        }
    }
}

impl std::str::FromStr for Sign {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "+" | "positive" => Ok(Sign::Positive),
            "-" | "negative" => Ok(Sign::Negative),
            "0" | "~0" | "≅0" | "none" | "unrestricted" => Ok(Sign::Unrestricted),
            other => Err(format!("unknown sign {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignConstraint {
    pub variable_id: String,
    pub sign: Sign,
    pub horizon_lo: usize,
    pub horizon_hi: usize,
}

/// Sign constraints over horizon windows. At least one constraint must
/// restrict a sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignRestrictionSpec {
    constraints: Vec<SignConstraint>,
}

impl SignRestrictionSpec {
    pub fn new(constraints: Vec<SignConstraint>) -> Result<Self> {
        if constraints.iter().all(|c| c.sign == Sign::Unrestricted) {
            return Err(IdentifyError::InvalidSpec(
                "every constraint is unrestricted".into(),
            ));
        }
        if let Some(c) = constraints.iter().find(|c| c.horizon_lo > c.horizon_hi) {
            return Err(IdentifyError::InvalidSpec(format!(
                "{}: horizon_lo > horizon_hi",
                c.variable_id
            )));
        }
        Ok(Self { constraints })
    }

    /// Same sign and window for every listed variable.
    pub fn uniform(variables: &[&str], sign: Sign, lo: usize, hi: usize) -> Result<Self> {
        Self::new(
            variables
                .iter()
                .map(|v| SignConstraint {
                    variable_id: v.to_string(),
                    sign,
                    horizon_lo: lo,
                    horizon_hi: hi,
                })
                .collect(),
        )
    }

    pub fn constraints(&self) -> &[SignConstraint] {
        &self.constraints
    }

    pub fn max_horizon(&self) -> usize {
        self.constraints
            .iter()
            .filter(|c| c.sign != Sign::Unrestricted)
            .map(|c| c.horizon_hi)
            .max()
            .unwrap_or(0)
    }
}

/// Constraints resolved to variable positions.
#[derive(Debug, Clone)]
struct Resolved {
    items: Vec<(usize, f64, usize, usize)>,
}

fn resolve(spec: &SignRestrictionSpec, ids: &[String], horizon: usize) -> Result<Resolved> {
    let mut items = Vec::new();
    for c in &spec.constraints {
        let v = ids
            .iter()
            .position(|id| id == &c.variable_id)
            .ok_or_else(|| IdentifyError::UnknownVariable(c.variable_id.clone()))?;
        if c.horizon_hi > horizon {
            return Err(IdentifyError::HorizonOutOfRange {
                variable: c.variable_id.clone(),
                horizon: c.horizon_hi,
                max: horizon,
            });
        }
        items.push((v, c.sign.factor(), c.horizon_lo, c.horizon_hi));
    }
    Ok(Resolved { items })
}

/// Lower-triangular `L` with `L L' = Σ`.
///
/// Eigenvalues in `[PSD_REPAIR_FLOOR · max(1, tr/n), 0]` are treated as
/// rounding: Σ is shifted by `|λ_min| + RIDGE_SCALE · tr/n` once and a
/// warning is logged. Anything more negative fails.
pub fn cholesky_factor(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = sigma.nrows();
    assert_eq!(n, sigma.ncols(), "cholesky_factor: square matrix expected");
    let sym = 0.5 * (sigma + sigma.transpose());
    if let Some(ch) = sym.clone().cholesky() {
        return Ok(ch.l());
    }
    let (vals, _) = symmetric_eigen_desc(&sym);
    let lam_min = vals.min();
    let scale = (sym.trace() / n as f64).max(0.0);
    if sym.iter().all(|v| *v == 0.0) {
        return Ok(DMatrix::zeros(n, n));
    }
    if lam_min < PSD_REPAIR_FLOOR * scale.max(1.0) {
        return Err(IdentifyError::NotPositiveDefinite {
            min_eigenvalue: lam_min,
        });
    }
    let ridge = (-lam_min).max(0.0) + RIDGE_SCALE * scale.max(f64::MIN_POSITIVE);
    log::warn!("covariance not positive definite (min eigenvalue {lam_min:.3e}); adding ridge {ridge:.3e}");
    let repaired = sym + DMatrix::identity(n, n) * ridge;
    repaired
        .cholesky()
        .map(|c| c.l())
        .ok_or(IdentifyError::NotPositiveDefinite {
            min_eigenvalue: lam_min,
        })
}

/// Uniform draw from the unit sphere in `n` dimensions.
pub fn draw_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    assert!(n >= 1, "sphere dimension must be ≥ 1");
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// `Ψ(x) = x` for `x ≤ 0`, `weight · x` otherwise.
pub fn psi(x: f64, weight: f64) -> f64 {
    if x <= 0.0 {
        x
    } else {
        weight * x
    }
}

/// Penalty of an `n × (H+1)` response array. `scales` are the innovation
/// standard deviations used to make responses unit-free.
pub fn penalty(
    irf: &DMatrix<f64>,
    variable_ids: &[String],
    spec: &SignRestrictionSpec,
    scales: &[f64],
    weight: f64,
) -> Result<f64> {
    let horizon = irf.ncols().saturating_sub(1);
    let r = resolve(spec, variable_ids, horizon)?;
    Ok(penalty_resolved(irf, &r, scales, weight))
}

fn penalty_resolved(irf: &DMatrix<f64>, r: &Resolved, scales: &[f64], weight: f64) -> f64 {
    let mut total = 0.0;
    for &(v, s, lo, hi) in &r.items {
        if s == 0.0 {
            continue;
        }
        let scale = if scales[v] > 0.0 { scales[v] } else { 1.0 };
        for h in lo..=hi {
            total += psi(-s * irf[(v, h)] / scale, weight);
        }
    }
    total
}

/// Per-constraint violation flags (strict inequalities).
fn violations(irf: &DMatrix<f64>, r: &Resolved) -> Vec<bool> {
    r.items
        .iter()
        .map(|&(v, s, lo, hi)| s != 0.0 && (lo..=hi).any(|h| s * irf[(v, h)] <= 0.0))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Rejection,
    Penalty,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "rejection" => Ok(Mode::Rejection),
            "penalty" => Ok(Mode::Penalty),
            other => Err(format!("unknown identification mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShockSpace {
    /// Rotations of the full orthogonalized innovation vector.
    #[default]
    Joint,
    /// Only the shock variable's own orthogonalized innovation.
    TauOnly,
}

impl std::str::FromStr for ShockSpace {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "joint" => Ok(ShockSpace::Joint),
            "tau_only" => Ok(ShockSpace::TauOnly),
            other => Err(format!("unknown shock space {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifyConfig {
    pub mode: Mode,
    /// Draws (rejection) or random starts (penalty).
    pub n_draws: usize,
    pub horizon: usize,
    /// Variable whose impact response is normalized to −1.
    pub shock_variable: Option<String>,
    pub shock_space: ShockSpace,
    pub penalty_weight: f64,
    pub seed: u64,
}

impl IdentifyConfig {
    pub fn rejection(n_draws: usize, horizon: usize, seed: u64) -> Self {
        Self {
            mode: Mode::Rejection,
            n_draws,
            horizon,
            shock_variable: None,
            shock_space: ShockSpace::Joint,
            penalty_weight: DEFAULT_PENALTY_WEIGHT,
            seed,
        }
    }

    pub fn penalty(n_starts: usize, horizon: usize, seed: u64) -> Self {
        Self {
            mode: Mode::Penalty,
            ..Self::rejection(n_starts, horizon, seed)
        }
    }

    pub fn with_shock_variable(mut self, id: &str) -> Self {
        self.shock_variable = Some(id.to_string());
        self
    }
}

/// Impulse vector in orthogonalized coordinates and its (normalized)
/// impact on the variables: `impact = scale · L α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpulseVector {
    pub alpha: Vec<f64>,
    pub impact: Vec<f64>,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcceptedDraw {
    pub impulse: ImpulseVector,
    /// `n × (H+1)` responses to the normalized impulse.
    pub irf: DMatrix<f64>,
    /// Penalty of the unit-norm impulse (before normalization).
    pub penalty: f64,
    pub satisfies: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrawSet {
    pub accepted: Vec<AcceptedDraw>,
    pub n_attempted: usize,
    pub spec: SignRestrictionSpec,
    pub seed: u64,
    pub mode: Mode,
    pub variable_ids: Vec<String>,
    /// Rejected draws violating each constraint (same order as `spec`).
    pub violation_counts: Vec<usize>,
    /// Rejected draws whose shock-variable impact was exactly zero.
    pub normalization_failures: usize,
    pub n_rejected: usize,
}

impl DrawSet {
    pub fn acceptance_rate(&self) -> f64 {
        if self.n_attempted == 0 {
            0.0
        } else {
            self.accepted.len() as f64 / self.n_attempted as f64
        }
    }
}

/// Precomputed `Θ_h = Φ_h L` for fast response evaluation.
pub struct ResponseBasis {
    theta: Vec<DMatrix<f64>>,
    l: DMatrix<f64>,
}

impl ResponseBasis {
    pub fn new(model: &VarModel, l: &DMatrix<f64>, horizon: usize) -> Self {
        let phi = ma_coefficients(model, horizon);
        Self {
            theta: phi.iter().map(|p| p * l).collect(),
            l: l.clone(),
        }
    }

    /// `n × (H+1)` responses to `L α`.
    pub fn responses(&self, alpha: &[f64]) -> DMatrix<f64> {
        let a = DVector::from_column_slice(alpha);
        let n = self.l.nrows();
        let mut out = DMatrix::zeros(n, self.theta.len());
        for (h, t) in self.theta.iter().enumerate() {
            out.set_column(h, &(t * &a));
        }
        out
    }

    pub fn impact(&self, alpha: &[f64]) -> DVector<f64> {
        &self.l * DVector::from_column_slice(alpha)
    }
}

/// Spherical angles → unit vector.
pub fn angles_to_unit(theta: &[f64]) -> Vec<f64> {
    let n = theta.len() + 1;
    let mut out = vec![0.0; n];
    let mut sin_prod = 1.0;
    for (k, t) in theta.iter().enumerate() {
        out[k] = sin_prod * t.cos();
        sin_prod *= t.sin();
    }
    out[n - 1] = sin_prod;
    out
}

/// Unit vector → spherical angles (inverse of [`angles_to_unit`]).
pub fn unit_to_angles(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    if n <= 1 {
        return Vec::new();
    }
    let mut theta = Vec::with_capacity(n - 1);
    for k in 0..n - 2 {
        let tail = v[k + 1..].iter().map(|x| x * x).sum::<f64>().sqrt();
        theta.push(tail.atan2(v[k]));
    }
    theta.push(v[n - 1].atan2(v[n - 2]));
    theta
}

/// Per-task RNG: the same `(seed, stream)` always yields the same draws,
/// whichever thread runs the task.
pub fn task_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Child seed for a named task: SHA-256 over the root seed and the task
/// path, first eight bytes little-endian.
pub fn derive_seed(root: u64, path: &[&str]) -> u64 {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update(root.to_le_bytes());
    for part in path {
        h.update([0u8]);
        h.update(part.as_bytes());
    }
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

struct Candidate {
    alpha: Vec<f64>,
    raw_irf: DMatrix<f64>,
    impact: DVector<f64>,
}

struct Setup<'a> {
    basis: ResponseBasis,
    resolved: Resolved,
    scales: Vec<f64>,
    shock_index: Option<usize>,
    config: &'a IdentifyConfig,
    n: usize,
}

impl Setup<'_> {
    /// Applies the sign normalization; `None` when the shock variable does
    /// not move on impact.
    fn orient(&self, mut alpha: Vec<f64>) -> Option<Candidate> {
        let mut impact = self.basis.impact(&alpha);
        if let Some(s) = self.shock_index {
            if impact[s] == 0.0 {
                return None;
            }
            if impact[s] > 0.0 {
                alpha.iter_mut().for_each(|a| *a = -*a);
                impact.neg_mut();
            }
        }
        let raw_irf = self.basis.responses(&alpha);
        Some(Candidate {
            alpha,
            raw_irf,
            impact,
        })
    }

    fn embed(&self, coord: Vec<f64>) -> Vec<f64> {
        match (self.config.shock_space, self.shock_index) {
            (ShockSpace::TauOnly, Some(s)) => {
                let mut a = vec![0.0; self.n];
                a[s] = coord[0];
                a
            }
            _ => coord,
        }
    }

    fn search_dim(&self) -> usize {
        match self.config.shock_space {
            ShockSpace::TauOnly => 1,
            ShockSpace::Joint => self.n,
        }
    }

    fn finish(&self, c: Candidate) -> AcceptedDraw {
        let pen = penalty_resolved(&c.raw_irf, &self.resolved, &self.scales, self.config.penalty_weight);
        let satisfies = !violations(&c.raw_irf, &self.resolved).iter().any(|v| *v);
        let scale = match self.shock_index {
            Some(s) => 1.0 / c.impact[s].abs(),
            None => 1.0,
        };
        let irf = &c.raw_irf * scale;
        let mut impact: Vec<f64> = c.impact.iter().map(|v| v * scale).collect();
        if let Some(s) = self.shock_index {
            impact[s] = -1.0;
        }
        AcceptedDraw {
            impulse: ImpulseVector {
                alpha: c.alpha,
                impact,
                scale,
            },
            irf,
            penalty: pen,
            satisfies,
        }
    }
}

enum Outcome {
    Accepted(AcceptedDraw),
    Rejected(Vec<bool>),
    Unnormalizable,
}

/// Runs the identification loop.
pub fn identify_shock(
    model: &VarModel,
    spec: &SignRestrictionSpec,
    config: &IdentifyConfig,
) -> Result<DrawSet> {
    let l = cholesky_factor(&model.sigma)?;
    identify_with_factor(model, &l, spec, config)
}

/// As [`identify_shock`] with a caller-supplied factor of Σ.
pub fn identify_with_factor(
    model: &VarModel,
    l: &DMatrix<f64>,
    spec: &SignRestrictionSpec,
    config: &IdentifyConfig,
) -> Result<DrawSet> {
    if config.n_draws == 0 {
        return Err(IdentifyError::InvalidSpec("n_draws must be ≥ 1".into()));
    }
    let resolved = resolve(spec, &model.variable_ids, config.horizon)?;
    let shock_index = match &config.shock_variable {
        Some(id) => Some(
            model
                .position(id)
                .ok_or_else(|| IdentifyError::UnknownVariable(id.clone()))?,
        ),
        None => None,
    };
    if config.shock_space == ShockSpace::TauOnly && shock_index.is_none() {
        return Err(IdentifyError::InvalidSpec(
            "shock_space = tau_only needs a shock variable".into(),
        ));
    }
    let (radius, stable) = stability(model);
    if !stable {
        log::debug!("identifying a shock in an unstable model (companion modulus {radius:.4})");
    }
    let setup = Setup {
        basis: ResponseBasis::new(model, l, config.horizon),
        resolved,
        scales: (0..model.n()).map(|i| model.sigma[(i, i)].max(0.0).sqrt()).collect(),
        shock_index,
        config,
        n: model.n(),
    };

    let outcomes: Vec<Result<Outcome>> = (0..config.n_draws)
        .into_par_iter()
        .map(|i| {
            let mut rng = task_rng(config.seed, i as u64);
            match config.mode {
                Mode::Rejection => {
                    let alpha = setup.embed(draw_unit_vector(&mut rng, setup.search_dim()));
                    Ok(match setup.orient(alpha) {
                        None => Outcome::Unnormalizable,
                        Some(c) => {
                            let v = violations(&c.raw_irf, &setup.resolved);
                            if v.iter().any(|x| *x) {
                                Outcome::Rejected(v)
                            } else {
                                Outcome::Accepted(setup.finish(c))
                            }
                        }
                    })
                }
                Mode::Penalty => penalty_start(&setup, &mut rng, i),
            }
        })
        .collect();

    let mut accepted = Vec::new();
    let mut violation_counts = vec![0; spec.constraints().len()];
    let mut n_rejected = 0;
    let mut normalization_failures = 0;
    for o in outcomes {
        match o? {
            Outcome::Accepted(d) => accepted.push(d),
            Outcome::Rejected(v) => {
                n_rejected += 1;
                for (c, hit) in violation_counts.iter_mut().zip(v) {
                    *c += usize::from(hit);
                }
            }
            Outcome::Unnormalizable => {
                n_rejected += 1;
                normalization_failures += 1;
            }
        }
    }
    if accepted.is_empty() {
        let detail: BTreeMap<&str, usize> = spec
            .constraints()
            .iter()
            .zip(&violation_counts)
            .map(|(c, n)| (c.variable_id.as_str(), *n))
            .collect();
        return Err(IdentifyError::NoAcceptedDraws {
            attempted: config.n_draws,
            violations: format!("{detail:?}"),
        });
    }
    Ok(DrawSet {
        accepted,
        n_attempted: config.n_draws,
        spec: spec.clone(),
        seed: config.seed,
        mode: config.mode,
        variable_ids: model.variable_ids.clone(),
        violation_counts,
        normalization_failures,
        n_rejected,
    })
}

fn penalty_start(setup: &Setup<'_>, rng: &mut ChaCha8Rng, start: usize) -> Result<Outcome> {
    let d = setup.search_dim();
    let start_vec = draw_unit_vector(rng, d);
    let objective = |theta: &[f64]| -> f64 {
        let alpha = if d == 1 {
            // a 1-D sphere has no angles; the sign is fixed by the start
            setup.embed(start_vec.clone())
        } else {
            setup.embed(angles_to_unit(theta))
        };
        match setup.orient(alpha) {
            Some(c) => penalty_resolved(&c.raw_irf, &setup.resolved, &setup.scales, setup.config.penalty_weight),
            None => f64::INFINITY,
        }
    };
    let theta0 = unit_to_angles(&start_vec);
    let best = minimize(objective, &theta0, TrustRegionOptions::default());
    if best.value.is_nan() || best.value == f64::NEG_INFINITY {
        return Err(IdentifyError::OptimizerDiverged { start });
    }
    let alpha = if d == 1 {
        setup.embed(start_vec)
    } else {
        setup.embed(angles_to_unit(&best.x))
    };
    Ok(match setup.orient(alpha) {
        Some(c) => Outcome::Accepted(setup.finish(c)),
        None => Outcome::Unnormalizable,
    })
}

/// JSON document for a draw set: seed, spec, acceptance rate, and per-draw
/// α and penalty.
pub fn draw_set_json(draws: &DrawSet) -> serde_json::Value {
    serde_json::json!({
        "seed": draws.seed,
        "mode": draws.mode,
        "spec": draws.spec,
        "variable_ids": draws.variable_ids,
        "n_attempted": draws.n_attempted,
        "n_accepted": draws.accepted.len(),
        "acceptance_rate": draws.acceptance_rate(),
        "draws": draws.accepted.iter().map(|d| serde_json::json!({
            "alpha": d.impulse.alpha,
            "impact": d.impulse.impact,
            "penalty": d.penalty,
            "satisfies": d.satisfies,
        })).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_model(a: f64, s2: f64) -> VarModel {
        VarModel::from_parts(
            &["x"],
            DVector::zeros(1),
            vec![DMatrix::from_element(1, 1, a)],
            DMatrix::from_element(1, 1, s2),
        )
    }

    fn diag_model(a: f64, b: f64) -> VarModel {
        VarModel::from_parts(
            &["a", "b"],
            DVector::zeros(2),
            vec![DMatrix::from_diagonal(&DVector::from_vec(vec![a, b]))],
            DMatrix::identity(2, 2),
        )
    }

    #[test]
    fn cholesky_examples() {
        let l = cholesky_factor(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(l, DMatrix::identity(3, 3));
        let s = DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 5.0]);
        let l = cholesky_factor(&s).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 1.0, 2.0]);
        assert!((&l - expect).amax() < 1e-14);
        assert!((&l * l.transpose() - s).amax() < 1e-10 * 7.0);
    }

    #[test]
    fn cholesky_repairs_rounding_and_rejects_broken() {
        // eigenvalues 1 and -1e-6
        let q = DMatrix::from_row_slice(2, 2, &[0.6, -0.8, 0.8, 0.6]);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1e-6]));
        let s = &q * d * q.transpose();
        let l = cholesky_factor(&s).unwrap();
        assert!(l[(0, 1)] == 0.0 && l[(0, 0)] >= 0.0 && l[(1, 1)] >= 0.0);
        assert!((&l * l.transpose() - &s).amax() < 1e-5);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -0.1]));
        let bad = &q * d * q.transpose();
        assert!(matches!(
            cholesky_factor(&bad),
            Err(IdentifyError::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn unit_vectors() {
        let mut rng = task_rng(7, 0);
        for _ in 0..100 {
            let v = draw_unit_vector(&mut rng, 1);
            assert!(v[0] == 1.0 || v[0] == -1.0);
            let w = draw_unit_vector(&mut rng, 5);
            let n: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn angles_round_trip() {
        let mut rng = task_rng(3, 1);
        for n in 2..7 {
            let v = draw_unit_vector(&mut rng, n);
            let back = angles_to_unit(&unit_to_angles(&v));
            for (a, b) in v.iter().zip(&back) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn psi_values() {
        assert_eq!(psi(-1.0, 100.0), -1.0);
        assert_eq!(psi(1.0, 100.0), 100.0);
        let ids = vec!["x".to_string()];
        let spec = SignRestrictionSpec::uniform(&["x"], Sign::Positive, 0, 0).unwrap();
        let sd = 2.0;
        let good = DMatrix::from_element(1, 1, sd);
        let bad = DMatrix::from_element(1, 1, -sd);
        assert_eq!(penalty(&good, &ids, &spec, &[sd], 100.0).unwrap(), -1.0);
        assert_eq!(penalty(&bad, &ids, &spec, &[sd], 100.0).unwrap(), 100.0);
        let spec = SignRestrictionSpec::uniform(&["x"], Sign::Positive, 0, 3).unwrap();
        assert!(matches!(
            penalty(&good, &ids, &spec, &[sd], 100.0),
            Err(IdentifyError::HorizonOutOfRange { .. })
        ));
    }

    #[test]
    fn all_unrestricted_spec_rejected() {
        assert!(SignRestrictionSpec::uniform(&["x", "y"], Sign::Unrestricted, 0, 1).is_err());
    }

    #[test]
    fn one_variable_acceptance_is_half() {
        let spec = SignRestrictionSpec::uniform(&["x"], Sign::Positive, 0, 0).unwrap();
        let d = identify_shock(&scalar_model(0.5, 1.0), &spec, &IdentifyConfig::rejection(10_000, 2, 11)).unwrap();
        let rate = d.acceptance_rate();
        assert!((rate - 0.5).abs() < 0.02, "rate {rate}");
        assert!(d.accepted.iter().all(|a| a.impulse.alpha == vec![1.0]));
    }

    #[test]
    fn negated_draw_is_rejected() {
        let model = diag_model(0.5, 0.9);
        let spec = SignRestrictionSpec::uniform(&["a"], Sign::Positive, 0, 1).unwrap();
        let d = identify_shock(&model, &spec, &IdentifyConfig::rejection(500, 3, 5)).unwrap();
        let l = cholesky_factor(&model.sigma).unwrap();
        let basis = ResponseBasis::new(&model, &l, 3);
        let r = resolve(&spec, &model.variable_ids, 3).unwrap();
        for a in &d.accepted {
            let neg: Vec<f64> = a.impulse.alpha.iter().map(|x| -x).collect();
            assert!(violations(&basis.responses(&neg), &r).iter().any(|v| *v));
        }
    }

    #[test]
    fn diagonal_closed_form() {
        let model = diag_model(0.5, 0.9);
        let spec = SignRestrictionSpec::uniform(&["a"], Sign::Positive, 0, 1).unwrap();
        let d = identify_shock(&model, &spec, &IdentifyConfig::rejection(2000, 4, 9)).unwrap();
        for a in &d.accepted {
            let a1 = a.impulse.alpha[0];
            assert!(a1 > 0.0);
            for h in 0..=4 {
                assert!((a.irf[(0, h)] - a1 * 0.5f64.powi(h as i32)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn normalization_sets_impact_to_minus_one() {
        let model = VarModel::from_parts(
            &["y", "tau"],
            DVector::zeros(2),
            vec![DMatrix::from_row_slice(2, 2, &[0.5, -0.4, 0.0, 0.2])],
            DMatrix::from_row_slice(2, 2, &[1.0, -0.3, -0.3, 1.0]),
        );
        let spec = SignRestrictionSpec::uniform(&["y"], Sign::Positive, 0, 1).unwrap();
        let cfg = IdentifyConfig::rejection(2000, 5, 1).with_shock_variable("tau");
        let d = identify_shock(&model, &spec, &cfg).unwrap();
        for a in &d.accepted {
            assert!((a.irf[(1, 0)] + 1.0).abs() < 1e-12);
            assert!(a.irf[(0, 0)] > 0.0 && a.irf[(0, 1)] > 0.0);
        }
    }

    #[test]
    fn reproducible_for_seed() {
        let model = diag_model(0.5, 0.9);
        let spec = SignRestrictionSpec::uniform(&["a", "b"], Sign::Positive, 0, 1).unwrap();
        let cfg = IdentifyConfig::rejection(300, 3, 42);
        let a = identify_shock(&model, &spec, &cfg).unwrap();
        let b = identify_shock(&model, &spec, &cfg).unwrap();
        assert_eq!(a, b);
        let pc = IdentifyConfig::penalty(5, 3, 42);
        assert_eq!(identify_shock(&model, &spec, &pc).unwrap(), identify_shock(&model, &spec, &pc).unwrap());
    }

    #[test]
    fn no_accepted_draws_reports() {
        // contradictory signs on the same cell
        let model = diag_model(0.5, 0.5);
        let spec = SignRestrictionSpec::new(vec![
            SignConstraint { variable_id: "a".into(), sign: Sign::Positive, horizon_lo: 0, horizon_hi: 0 },
            SignConstraint { variable_id: "a".into(), sign: Sign::Negative, horizon_lo: 0, horizon_hi: 0 },
        ])
        .unwrap();
        let err = identify_shock(&model, &spec, &IdentifyConfig::rejection(50, 1, 0)).unwrap_err();
        assert!(matches!(err, IdentifyError::NoAcceptedDraws { attempted: 50, .. }));
    }
}
