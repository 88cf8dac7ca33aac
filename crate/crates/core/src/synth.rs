//! Synthetic data with known ground truth: factor panels, VAR
//! simulations and a small multi-state fixture for end-to-end runs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

use crate::identify::{cholesky_factor, derive_seed, task_rng};
use crate::panel::{save_panel, write_shocks, Schema, SeriesPanel, ShockSeries};
use crate::var::{stability, RowMajor, VarModel};

pub const DEFAULT_BURN_IN: usize = 200;
pub const MIN_BURN_IN: usize = 50;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("DGP is not stable (companion modulus {0:.4})")]
    UnstableDGP(f64),
    #[error("burn-in {0} is below the minimum of {MIN_BURN_IN}")]
    BurnInTooShort(usize),
    #[error("invalid synthetic spec: {0}")]
    Invalid(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Panel(#[from] crate::panel::PanelError),
}

pub type Result<T> = std::result::Result<T, SynthError>;

/// Latent factors follow independent AR(1)s with unit variance; series
/// load on them with N(0, loading_std²) loadings plus N(0, noise_std²)
/// noise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorSpec {
    pub r: usize,
    pub loading_std: f64,
    pub ar: Vec<f64>,
    pub noise_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ShockProcess {
    /// An event occurs with `probability`; its size is N(mean, std²).
    Sparse { probability: f64, mean: f64, std: f64 },
    /// `τ_t = ρ τ_{t−1} + std · ε_t`.
    Ar { rho: f64, std: f64 },
}

#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub factor: FactorSpec,
    pub var_model: Option<VarModel>,
    pub shock: ShockProcess,
    pub t: usize,
    pub n_aggregate: usize,
    pub n_regional: usize,
    pub n_states: usize,
    pub start_period: i64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn factor_only(r: usize, n: usize, t: usize, noise_std: f64, seed: u64) -> Self {
        Self {
            factor: FactorSpec {
                r,
                loading_std: 1.0,
                ar: vec![0.5; r],
                noise_std,
            },
            var_model: None,
            shock: ShockProcess::Sparse {
                probability: 0.3,
                mean: 0.0,
                std: 1.0,
            },
            t,
            n_aggregate: n,
            n_regional: 0,
            n_states: 0,
            start_period: 1,
            seed,
        }
    }
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn periods(start: i64, t: usize) -> Vec<i64> {
    (0..t as i64).map(|i| start + i).collect()
}

/// Unit-variance AR(1) factor paths, `T × r`.
pub fn simulate_factors<R: Rng>(spec: &FactorSpec, t: usize, rng: &mut R) -> DMatrix<f64> {
    let mut f = DMatrix::zeros(t, spec.r);
    for k in 0..spec.r {
        let rho = spec.ar.get(k).copied().unwrap_or(0.0);
        let scale = (1.0 - rho * rho).max(0.0).sqrt();
        let mut x = normal(rng);
        for _ in 0..DEFAULT_BURN_IN {
            x = rho * x + scale * normal(rng);
        }
        for i in 0..t {
            x = rho * x + scale * normal(rng);
            f[(i, k)] = x;
        }
    }
    f
}

/// Panel `x_it = λ_i' f_t + σ ε_it` over `n` series, with the true
/// factors and loadings.
pub fn factor_panel_from<R: Rng>(
    factors: &DMatrix<f64>,
    n: usize,
    loading_std: f64,
    noise_std: f64,
    prefix: &str,
    start_period: i64,
    rng: &mut R,
) -> Result<(SeriesPanel, DMatrix<f64>)> {
    let (t, r) = factors.shape();
    let loadings = DMatrix::from_fn(n, r, |_, _| loading_std * normal(rng));
    let noise = DMatrix::from_fn(t, n, |_, _| noise_std * normal(rng));
    let x = factors * loadings.transpose() + noise;
    let ids = (1..=n).map(|i| format!("{prefix}{i:03}")).collect();
    Ok((SeriesPanel::new(x, periods(start_period, t), ids)?, loadings))
}

/// Factor panel with `spec.n_aggregate` series and its `T × r` truth.
pub fn generate_factor_panel<R: Rng>(spec: &SynthSpec, rng: &mut R) -> Result<(SeriesPanel, DMatrix<f64>)> {
    if spec.t == 0 || spec.n_aggregate == 0 || spec.factor.r == 0 {
        return Err(SynthError::Invalid("dimensions must be positive".into()));
    }
    let f = simulate_factors(&spec.factor, spec.t, rng);
    let (panel, _) = factor_panel_from(
        &f,
        spec.n_aggregate,
        spec.factor.loading_std,
        spec.factor.noise_std,
        "X",
        spec.start_period,
        rng,
    )?;
    Ok((panel, f))
}

/// Shock path of length `t`.
pub fn simulate_shock<R: Rng>(process: &ShockProcess, t: usize, rng: &mut R) -> Vec<f64> {
    match *process {
        ShockProcess::Sparse { probability, mean, std } => (0..t)
            .map(|_| {
                if rng.random::<f64>() < probability {
                    mean + std * normal(rng)
                } else {
                    0.0
                }
            })
            .collect(),
        ShockProcess::Ar { rho, std } => {
            let mut x = 0.0;
            (0..t)
                .map(|_| {
                    x = rho * x + std * normal(rng);
                    x
                })
                .collect()
        }
    }
}

/// Recursive simulation of `model` with Gaussian innovations `L ε`,
/// `L L' = Σ`.
///
/// `exog` supplies the model's exogenous regressors for the retained
/// periods (zero during burn-in). A column of `exog` named like a model
/// variable overrides that variable's path, which is how an observed τ
/// is injected into a joint system. Without `exog` the output periods
/// start at `start_period`.
pub fn simulate_var<R: Rng>(
    model: &VarModel,
    exog: Option<&SeriesPanel>,
    t: usize,
    burn_in: usize,
    start_period: i64,
    rng: &mut R,
) -> Result<SeriesPanel> {
    if burn_in < MIN_BURN_IN {
        return Err(SynthError::BurnInTooShort(burn_in));
    }
    let (radius, stable) = stability(model);
    if !stable {
        return Err(SynthError::UnstableDGP(radius));
    }
    let n = model.n();
    let l = cholesky_factor(&model.sigma).map_err(|e| SynthError::Invalid(e.to_string()))?;
    let time = match exog {
        Some(x) => {
            if x.n_periods() != t {
                return Err(SynthError::Invalid(format!(
                    "exogenous panel has {} periods, expected {t}",
                    x.n_periods()
                )));
            }
            x.time_index().to_vec()
        }
        None => periods(start_period, t),
    };
    let ecols: Vec<usize> = match exog {
        Some(x) => model
            .exog_ids
            .iter()
            .map(|id| x.position(id).ok_or_else(|| SynthError::Invalid(format!("missing exogenous series {id}"))))
            .collect::<Result<_>>()?,
        None if model.exog_ids.is_empty() => Vec::new(),
        None => return Err(SynthError::Invalid("model needs exogenous series".into())),
    };
    let overrides: Vec<(usize, usize)> = match exog {
        Some(x) => model
            .variable_ids
            .iter()
            .enumerate()
            .filter_map(|(i, id)| x.position(id).map(|c| (i, c)))
            .collect(),
        None => Vec::new(),
    };
    let total = burn_in + t;
    let mut y = DMatrix::zeros(total, n);
    let exog_at = |s: usize, c: usize| -> f64 {
        match exog {
            Some(x) if s >= burn_in => x.observations()[(s - burn_in, c)],
            _ => 0.0,
        }
    };
    for s in 0..total {
        let mut v = model.intercept.clone();
        for (lag, a) in model.lag_coeffs.iter().enumerate() {
            if s > lag {
                v += a * y.row(s - lag - 1).transpose();
            }
        }
        for (lag, b) in model.exog_lags.iter().zip(&model.exog_coeffs) {
            if s >= *lag {
                let x = DVector::from_iterator(ecols.len(), ecols.iter().map(|&c| exog_at(s - lag, c)));
                v += b * x;
            }
        }
        let eps = DVector::from_fn(n, |_, _| normal(rng));
        v += &l * eps;
        if s >= burn_in {
            for &(i, c) in &overrides {
                v[i] = exog_at(s, c);
            }
        }
        y.set_row(s, &v.transpose());
    }
    let out = y.rows(burn_in, t).into_owned();
    Ok(SeriesPanel::new(out, time, model.variable_ids.clone())?)
}

/// Ground truth written next to synthetic panels.
#[derive(Debug, Clone, Serialize)]
pub struct SynthTruth {
    pub seed: u64,
    pub models: BTreeMap<String, serde_json::Value>,
    pub factors: BTreeMap<String, RowMajor>,
    pub shock_dates: BTreeMap<String, Vec<i64>>,
    pub responses: BTreeMap<String, BTreeMap<String, f64>>,
}

pub fn write_truth(path: impl AsRef<Path>, truth: &SynthTruth) -> Result<()> {
    let text = serde_json::to_string_pretty(truth).map_err(|e| SynthError::Invalid(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// State codes used by the fixture.
pub const FIXTURE_STATES: [&str; 5] = ["AL", "CA", "NY", "TX", "WA"];
pub const STATE_VARIABLES: [&str; 4] = ["GDP", "DPI", "CPI", "EMP"];
pub const FIXTURE_SHOCKS: [&str; 2] = ["PIT", "CIT"];

/// Fixture dimensions.
#[derive(Debug, Clone)]
pub struct FixtureSpec {
    pub t: usize,
    pub n_aggregate: usize,
    pub n_regional: usize,
    pub start_period: i64,
    pub seed: u64,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        Self {
            t: 42,
            n_aggregate: 24,
            n_regional: 10,
            start_period: 1977,
            seed: 20_240_601,
        }
    }
}

fn diag(v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(v))
}

/// Writes a 5-state fixture (panels, shocks, covariates, config and
/// truth) into `dir` and returns the config path.
///
/// Shocks measure tax changes, so a cut is negative; each state's
/// variables rise after a cut with a strength that grows with its
/// `fin` covariate.
pub fn write_fixture(dir: &Path, spec: &FixtureSpec) -> Result<std::path::PathBuf> {
    fs::create_dir_all(dir.join("states"))?;
    let t = spec.t;
    let time = periods(spec.start_period, t);
    let mut rng: ChaCha8Rng = task_rng(derive_seed(spec.seed, &["fixture", "common"]), 0);

    let shock = ShockProcess::Sparse {
        probability: 0.4,
        mean: 0.0,
        std: 1.0,
    };
    let mut shocks = Vec::new();
    let mut shock_dates = BTreeMap::new();
    for id in FIXTURE_SHOCKS {
        let values = simulate_shock(&shock, t, &mut rng);
        let mut labels = BTreeMap::new();
        for (p, v) in time.iter().zip(&values) {
            if *v != 0.0 {
                labels.insert(*p, format!("{id} act {p}"));
            }
        }
        shock_dates.insert(id.to_string(), labels.keys().copied().collect());
        shocks.push(ShockSeries {
            shock_id: id.to_string(),
            time_index: time.clone(),
            values,
            event_labels: labels,
        });
    }
    let shock_panels: Vec<SeriesPanel> = shocks.iter().map(|s| s.to_panel()).collect::<std::result::Result<_, _>>()?;
    let shock_refs: Vec<&SeriesPanel> = shock_panels.iter().collect();
    let shock_panel = SeriesPanel::merge(&shock_refs)?;

    // Common factors respond to both shocks.
    let mut common = VarModel::from_parts(
        &["FA", "FR"],
        DVector::zeros(2),
        vec![diag(&[0.5, 0.4])],
        diag(&[0.5, 0.5]),
    );
    common.exog_ids = FIXTURE_SHOCKS.iter().map(|s| s.to_string()).collect();
    common.exog_lags = vec![0];
    common.exog_coeffs = vec![DMatrix::from_row_slice(2, 2, &[-0.6, -0.3, -0.4, -0.5])];
    let factors = simulate_var(&common, Some(&shock_panel), t, DEFAULT_BURN_IN, spec.start_period, &mut rng)?;
    let fa = factors.observations().columns(0, 1).into_owned();
    let fr = factors.observations().columns(1, 1).into_owned();
    let (mut aggregate, _) = factor_panel_from(&fa, spec.n_aggregate, 1.0, 0.3, "AGG", spec.start_period, &mut rng)?;
    let (mut regional, _) = factor_panel_from(&fr, spec.n_regional, 1.0, 0.3, "REG", spec.start_period, &mut rng)?;
    for p in [&mut aggregate, &mut regional] {
        *p = SeriesPanel::new(p.observations().add_scalar(5.0), p.time_index().to_vec(), p.series_ids().to_vec())?;
    }
    save_panel(&aggregate, dir.join("aggregate.csv"), Schema::Wide)?;
    save_panel(&regional, dir.join("regional.csv"), Schema::Wide)?;
    write_shocks(&shocks, fs::File::create(dir.join("shocks.csv"))?)?;

    let mut exog_refs: Vec<&SeriesPanel> = vec![&factors];
    exog_refs.push(&shock_panel);
    let exog = SeriesPanel::merge(&exog_refs)?;

    let mut models = BTreeMap::new();
    let mut responses = BTreeMap::new();
    let mut cov_rows = Vec::new();
    for (s, state) in FIXTURE_STATES.iter().enumerate() {
        let mut srng = task_rng(derive_seed(spec.seed, &["fixture", state]), 0);
        let fin = srng.random_range(-1.0..1.0);
        let man = srng.random_range(-1.0..1.0);
        let debt = srng.random_range(-1.0..1.0);
        cov_rows.push(format!("{state},{fin},{man},{debt}"));
        let strength = 0.8 + 0.4 * fin + 0.05 * s as f64;
        let mut m = VarModel::from_parts(
            &STATE_VARIABLES,
            DVector::from_column_slice(&[2.0, 1.5, 1.0, 1.2]),
            vec![DMatrix::from_row_slice(
                4,
                4,
                &[
                    0.4, 0.1, 0.0, 0.0, //
                    0.1, 0.3, 0.0, 0.0, //
                    0.0, 0.0, 0.5, 0.0, //
                    0.1, 0.0, 0.0, 0.3,
                ],
            )],
            DMatrix::from_row_slice(
                4,
                4,
                &[
                    0.20, 0.05, 0.02, 0.04, //
                    0.05, 0.20, 0.02, 0.03, //
                    0.02, 0.02, 0.15, 0.01, //
                    0.04, 0.03, 0.01, 0.18,
                ],
            ) * 0.25,
        );
        m.exog_ids = vec!["FA".into(), "FR".into(), "PIT".into(), "CIT".into()];
        m.exog_lags = vec![0];
        let b = -strength;
        m.exog_coeffs = vec![DMatrix::from_row_slice(
            4,
            4,
            &[
                0.3, 0.2, b, 0.8 * b, //
                0.2, 0.2, 0.9 * b, 0.6 * b, //
                0.1, 0.1, 0.5 * b, 0.4 * b, //
                0.2, 0.1, 0.7 * b, 0.5 * b,
            ],
        )];
        let panel = simulate_var(&m, Some(&exog), t, DEFAULT_BURN_IN, spec.start_period, &mut srng)?;
        save_panel(&panel, dir.join("states").join(format!("{state}.csv")), Schema::Wide)?;
        let doc: serde_json::Value = serde_json::from_str(&m.to_json()).expect("model JSON");
        models.insert(state.to_string(), doc);
        responses.insert(
            state.to_string(),
            BTreeMap::from([("GDP_per_unit_cut".to_string(), strength)]),
        );
    }
    fs::write(dir.join("covariates.csv"), format!("state,fin,man,debt\n{}\n", cov_rows.join("\n")))?;

    let truth = SynthTruth {
        seed: spec.seed,
        models,
        factors: BTreeMap::from([
            ("FA".to_string(), RowMajor::from(&fa)),
            ("FR".to_string(), RowMajor::from(&fr)),
        ]),
        shock_dates,
        responses,
    };
    write_truth(dir.join("truth.json"), &truth)?;
    let config = dir.join("config.txt");
    fs::write(&config, fixture_config(spec.seed))?;
    Ok(config)
}

/// Config text matching [`write_fixture`]'s files.
pub fn fixture_config(seed: u64) -> String {
    format!(
        "# synthetic 5-state fixture
seed={seed}
workers=4
output.dir=out
input.aggregate=aggregate.csv
input.regional=regional.csv
input.states={states}
input.state_panel=states/{{state}}.csv
input.state_variables=GDP,DPI,CPI,EMP
input.shocks=shocks.csv
input.covariates=covariates.csv
factors.r_aggregate=1
factors.r_regional=1
var.p=1
var.layout=block_exogenous
identification.mode=rejection
identification.shocks=PIT,CIT
identification.n_draws=2000
identification.shock_space=joint
identification.sign.GDP=+:0:1
identification.sign.DPI=+:0:1
identification.sign.CPI=+:0:1
identification.sign.EMP=+:0:1
irf.horizon=10
irf.bootstrap_reps=100
irf.level=0.95
irf.fix_alpha=false
irf.draws_per_replication=500
metrics.output_variable=GDP
metrics.employment_variable=EMP
regression.response=GDP
regression.horizons=10,2
regression.tables=main
regression.table.main=fin,man
",
        states = FIXTURE_STATES.join(",")
    )
}
