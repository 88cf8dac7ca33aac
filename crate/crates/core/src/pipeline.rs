//! Config-driven run: factors, per-state models, identification, responses,
//! bands and cross-state tables.
//!
//! Every state × shock pair is an independent job. Randomness is derived
//! from the root seed and the job's `(state, shock, task)` path, so output
//! does not depend on the worker count.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{validate_config, ConfigError, LagChoice, PipelineConfig};
use crate::crossreg::{
    format_raw_table, format_results_table, load_covariates, ols_cross_section, standardize_covariates,
    standardize_vector, CrossSectionDataset, RegressionResult,
};
use crate::diagnostics::{acceptance_report, median_target_of};
use crate::factors::extract_factors;
use crate::identify::{cholesky_factor, derive_seed, identify_shock, IdentifyConfig, IdentifyError, SignRestrictionSpec};
use crate::irf::{
    bootstrap_from_model, cumulative, fevd, normalize_unit_range, write_bands_csv, write_fevd_csv, write_fevd_wide,
    write_irf_csv, BootstrapConfig, FevdTable, ImpulseResponseSet, IrfError, FEVD_REPORT_HORIZONS,
};
use crate::linalg::complete_basis;
use crate::metrics::{format_elasticity_table, multiplier, peak_elasticity};
use crate::panel::{
    load_panel, load_shocks, standardize, summary_stats, transform, write_panel, Schema, SeriesGroup, SeriesPanel,
    ShockSeries, TransformSpec,
};
use crate::var::{select_lag, stability, EstimationConfig, RowMajor, VarLayout};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{context}: {message}")]
    Input { context: String, message: String },
    #[error("{state}/{shock}: estimation failed: {message}")]
    Estimation { state: String, shock: String, message: String },
    #[error("{state}/{shock}: identification failed: {message}")]
    Identification { state: String, shock: String, message: String },
    #[error("{0}")]
    Output(String),
}

impl PipelineError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 1,
            PipelineError::Identification { .. } => 3,
            _ => 2,
        }
    }

    fn input(context: impl Into<String>, e: impl ToString) -> Self {
        PipelineError::Input {
            context: context.into(),
            message: e.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;

/// Factor series shared by every state model.
#[derive(Debug, Clone)]
pub struct Factors {
    pub panel: SeriesPanel,
    pub aggregate_eigenvalues: Vec<f64>,
    pub regional_eigenvalues: Vec<f64>,
}

fn transforms_for(panel: &SeriesPanel, all: &HashMap<String, TransformSpec>) -> HashMap<String, TransformSpec> {
    all.iter()
        .filter(|(k, _)| panel.position(k).is_some())
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect()
}

fn prepare(path: &Path, schema: Schema, cfg: &PipelineConfig, what: &str) -> Result<SeriesPanel> {
    let raw = load_panel(path, schema).map_err(|e| PipelineError::input(format!("{what} {}", path.display()), e))?;
    transform(&raw, &transforms_for(&raw, &cfg.transforms)).map_err(|e| PipelineError::input(what, e))
}

/// Loads, transforms and standardizes both panels and extracts their
/// leading principal components (`FA1..`, `FR1..`).
pub fn extract_common_factors(cfg: &PipelineConfig) -> Result<Factors> {
    let mut panels = Vec::new();
    let mut eig = Vec::new();
    for (path, schema, r, prefix, group, what) in [
        (&cfg.aggregate, cfg.aggregate_schema, cfg.r_aggregate, "FA", SeriesGroup::Aggregate, "aggregate panel"),
        (&cfg.regional, cfg.regional_schema, cfg.r_regional, "FR", SeriesGroup::Regional, "regional panel"),
    ] {
        let p = prepare(path, schema, cfg, what)?;
        let z = standardize(&p).map_err(|e| PipelineError::input(what, e))?;
        let fm = extract_factors(&z.panel, r).map_err(|e| PipelineError::input(what, e))?;
        panels.push(fm.to_panel(p.time_index(), prefix, group));
        eig.push(fm.eigenvalues);
    }
    let panel = SeriesPanel::merge(&[&panels[0], &panels[1]]).map_err(|e| PipelineError::input("factors", e))?;
    let regional_eigenvalues = eig.pop().unwrap_or_default();
    let aggregate_eigenvalues = eig.pop().unwrap_or_default();
    Ok(Factors {
        panel,
        aggregate_eigenvalues,
        regional_eigenvalues,
    })
}

/// Results of one state × shock job kept for the cross-state tables.
#[derive(Debug, Clone)]
pub struct JobResult {
    pub state: String,
    pub shock: String,
    pub irf: ImpulseResponseSet,
    pub cumulative: ImpulseResponseSet,
    pub fevd: FevdTable,
    /// Output files as `(path relative to the output dir, contents)`.
    pub files: Vec<(PathBuf, Vec<u8>)>,
}

#[derive(Serialize)]
struct MedianTargetDoc<'a> {
    chosen_index: usize,
    criterion_value: f64,
    n_candidates: usize,
    alpha: &'a [f64],
    impact: &'a [f64],
    variable_ids: &'a [String],
    median_irf: RowMajor,
    standardizers: RowMajor,
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> std::result::Result<(), IrfError>) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory");
    buf
}

/// Estimates, identifies and bootstraps one state's model for one shock.
pub fn run_job(
    cfg: &PipelineConfig,
    state: &str,
    state_panel: &SeriesPanel,
    factors: &SeriesPanel,
    shock: &ShockSeries,
) -> Result<JobResult> {
    let est_err = |message: String| PipelineError::Estimation {
        state: state.into(),
        shock: shock.shock_id.clone(),
        message,
    };
    let id_err = |message: String| PipelineError::Identification {
        state: state.into(),
        shock: shock.shock_id.clone(),
        message,
    };

    let tau = shock
        .aligned(state_panel.time_index())
        .to_panel()
        .map_err(|e| est_err(e.to_string()))?;
    let data = SeriesPanel::merge(&[state_panel, factors, &tau]).map_err(|e| est_err(e.to_string()))?;
    let mut y_ids: Vec<&str> = cfg.state_variables.iter().map(String::as_str).collect();
    y_ids.extend(factors.series_ids().iter().map(String::as_str));
    let tau_ids = [shock.shock_id.as_str()];

    let p = match cfg.lags {
        LagChoice::Fixed(p) => p,
        LagChoice::Auto { p_max, criterion } => {
            let mut all = y_ids.clone();
            all.extend(tau_ids);
            select_lag(&data, &all, p_max, criterion).map_err(|e| est_err(e.to_string()))?
        }
    };
    let mut est = EstimationConfig::block_exogenous(&y_ids, &tau_ids, p);
    if let VarLayout::BlockExogenous { tau_identity, .. } = &mut est.layout {
        *tau_identity = cfg.tau_identity;
    }
    let model = est.fit(&data).map_err(|e| est_err(e.to_string()))?;
    let (radius, stable) = stability(&model);
    if !stable {
        log::warn!("{state}/{}: fitted model is unstable (companion modulus {radius:.4})", shock.shock_id);
    }

    let spec = SignRestrictionSpec::new(cfg.constraints.clone()).map_err(|e| id_err(e.to_string()))?;
    let id_cfg = IdentifyConfig {
        mode: cfg.mode,
        n_draws: cfg.n_draws,
        horizon: cfg.horizon,
        shock_variable: Some(shock.shock_id.clone()),
        shock_space: cfg.shock_space,
        penalty_weight: cfg.penalty_weight,
        seed: derive_seed(cfg.seed, &[state, &shock.shock_id, "identify"]),
    };
    let draws = identify_shock(&model, &spec, &id_cfg).map_err(|e| match e {
        IdentifyError::NotPositiveDefinite { .. } => est_err(e.to_string()),
        _ => id_err(e.to_string()),
    })?;
    // Penalty-mode starts that end outside the sign region are not
    // candidates; rejection-mode draws all satisfy.
    let candidates: Vec<usize> = (0..draws.accepted.len()).filter(|&i| draws.accepted[i].satisfies).collect();
    if candidates.is_empty() {
        return Err(id_err(format!(
            "no draw satisfies the sign restrictions ({} attempted)",
            draws.n_attempted
        )));
    }
    let irfs: Vec<&DMatrix<f64>> = candidates.iter().map(|&i| &draws.accepted[i].irf).collect();
    let mt = median_target_of(&irfs).map_err(|e| id_err(e.to_string()))?;
    let chosen = &draws.accepted[candidates[mt.chosen_index]];

    let irf = ImpulseResponseSet {
        values: chosen.irf.clone(),
        variable_ids: model.variable_ids.clone(),
    };
    let cum = cumulative(&irf);
    let l = cholesky_factor(&model.sigma).map_err(|e| est_err(e.to_string()))?;
    let q = complete_basis(&DVector::from_column_slice(&chosen.impulse.alpha));
    let table = fevd(&model, &l, Some(&q), cfg.horizon).map_err(|e| est_err(e.to_string()))?;

    let boot = BootstrapConfig {
        replications: cfg.bootstrap_reps,
        level: cfg.level,
        fix_alpha: cfg.fix_alpha,
        draws_per_replication: cfg.draws_per_replication,
        seed: derive_seed(cfg.seed, &[state, &shock.shock_id, "bootstrap"]),
    };
    let fixed = cfg.fix_alpha.then_some(chosen.impulse.alpha.as_slice());
    let bands = bootstrap_from_model(&data, &model, &spec, &id_cfg, &boot, fixed).map_err(|e| match e {
        IrfError::Identify(_) => id_err(e.to_string()),
        _ => est_err(e.to_string()),
    })?;

    let dir = PathBuf::from(state).join(&shock.shock_id);
    let mt_doc = MedianTargetDoc {
        chosen_index: candidates[mt.chosen_index],
        criterion_value: mt.criterion_value,
        n_candidates: candidates.len(),
        alpha: &chosen.impulse.alpha,
        impact: &chosen.impulse.impact,
        variable_ids: &model.variable_ids,
        median_irf: RowMajor::from(&mt.median_irf),
        standardizers: RowMajor::from(&mt.standardizers),
    };
    let files = vec![
        (dir.join("irf.csv"), csv_bytes(|w| write_irf_csv(w, &irf))),
        (dir.join("cumulative.csv"), csv_bytes(|w| write_irf_csv(w, &cum))),
        (dir.join("bands.csv"), csv_bytes(|w| write_bands_csv(w, &bands))),
        (dir.join("fevd.csv"), csv_bytes(|w| write_fevd_csv(w, &table, 0))),
        (dir.join("fevd_wide.csv"), csv_bytes(|w| write_fevd_wide(w, &table, 0))),
        (dir.join("median_target.json"), pretty_json(&mt_doc)),
        (dir.join("acceptance.json"), pretty_json(&acceptance_report(&draws))),
        (dir.join("model.json"), (model.to_json() + "\n").into_bytes()),
    ];
    Ok(JobResult {
        state: state.into(),
        shock: shock.shock_id.clone(),
        irf,
        cumulative: cum,
        fevd: table,
        files,
    })
}

fn pretty_json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut b = serde_json::to_vec_pretty(v).expect("serializable");
    b.push(b'\n');
    b
}

fn last_col(set: &ImpulseResponseSet, id: &str, h: usize) -> Option<f64> {
    set.row(id).and_then(|r| r.get(h).copied())
}

fn normalized_cumulative(cfg: &PipelineConfig, jobs: &[JobResult]) -> String {
    let mut out = String::from("shock,variable,state,cumulative,normalized\n");
    for shock in &cfg.shocks {
        for var in &cfg.state_variables {
            let values: BTreeMap<String, f64> = jobs
                .iter()
                .filter(|j| &j.shock == shock)
                .filter_map(|j| last_col(&j.cumulative, var, cfg.horizon).map(|v| (j.state.clone(), v)))
                .collect();
            let norm = normalize_unit_range(&values).ok();
            for (state, v) in &values {
                let n = norm.as_ref().and_then(|m| m.get(state)).map(|x| x.to_string()).unwrap_or_default();
                let _ = writeln!(out, "{shock},{var},{state},{v},{n}");
            }
        }
    }
    out
}

fn fevd_table(cfg: &PipelineConfig, jobs: &[JobResult], shock: &str) -> String {
    let hs: Vec<usize> = FEVD_REPORT_HORIZONS.iter().copied().filter(|&h| h <= cfg.horizon).collect();
    let header: Vec<String> = hs.iter().map(|h| h.to_string()).collect();
    let mut out = format!("state,variable,{}\n", header.join(","));
    for j in jobs.iter().filter(|j| j.shock == shock) {
        for var in &cfg.state_variables {
            let Some(v) = j.fevd.variable_ids.iter().position(|x| x == var) else {
                continue;
            };
            let row: Vec<String> = hs.iter().map(|&h| j.fevd.share(v, h, 0).to_string()).collect();
            let _ = writeln!(out, "{},{var},{}", j.state, row.join(","));
        }
    }
    out
}

fn multipliers_table(cfg: &PipelineConfig, jobs: &[JobResult]) -> Result<String> {
    let mut out = String::from("state,shock,variable,peak_multiplier,peak_horizon,total_multiplier\n");
    for j in jobs {
        for var in &cfg.state_variables {
            let m = multiplier(&j.irf, var, cfg.shock_magnitude).map_err(|e| PipelineError::Output(e.to_string()))?;
            let _ = writeln!(
                out,
                "{},{},{var},{},{},{}",
                j.state, j.shock, m.peak_multiplier, m.peak_horizon, m.total_multiplier
            );
        }
    }
    Ok(out)
}

fn elasticities_table(cfg: &PipelineConfig, jobs: &[JobResult]) -> Result<String> {
    let mut by_state: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for j in jobs {
        let e = peak_elasticity(&j.irf, &cfg.employment_variable, cfg.shock_magnitude)
            .map_err(|e| PipelineError::Output(e.to_string()))?;
        by_state.entry(j.state.clone()).or_default().insert(j.shock.clone(), e.elasticity);
    }
    Ok(format_elasticity_table(&by_state, &cfg.shocks))
}

/// `(table name, formatted, raw)` for every configured regression table.
fn regression_tables(cfg: &PipelineConfig, jobs: &[JobResult]) -> Result<Vec<(String, String, String)>> {
    let Some(reg) = &cfg.regression else {
        return Ok(Vec::new());
    };
    let path = reg.covariates_path.display().to_string();
    let (units, names, values) = load_covariates(&reg.covariates_path).map_err(|e| PipelineError::input(&path, e))?;
    let rows: Vec<usize> = cfg
        .states
        .iter()
        .map(|s| {
            units
                .iter()
                .position(|u| u == s)
                .ok_or_else(|| PipelineError::input(&path, format!("no covariates for state {s}")))
        })
        .collect::<Result<_>>()?;
    let mut dependent = BTreeMap::new();
    for shock in &cfg.shocks {
        for &h in &reg.horizons {
            let y: Vec<f64> = cfg
                .states
                .iter()
                .map(|s| {
                    let j = jobs.iter().find(|j| &j.state == s && &j.shock == shock).expect("job per state and shock");
                    last_col(&j.cumulative, &reg.response, h).unwrap_or(f64::NAN)
                })
                .collect();
            dependent.insert((shock.clone(), h), y);
        }
    }
    let data = CrossSectionDataset {
        unit_ids: cfg.states.clone(),
        dependent,
        covariate_names: names,
        covariates: values.select_rows(&rows),
    };
    let data = standardize_covariates(&data).map_err(|e| PipelineError::input(&path, e))?;

    let mut out = Vec::new();
    for table in &reg.tables {
        let ctx = format!("regression table {}", table.name);
        let x = data.design(&table.covariates).map_err(|e| PipelineError::input(&ctx, e))?;
        let mut results: Vec<RegressionResult> = Vec::new();
        let mut titles = Vec::new();
        for shock in &cfg.shocks {
            for &h in &reg.horizons {
                let mut y = data.dependent[&(shock.clone(), h)].clone();
                if reg.standardize_dependent {
                    y = standardize_vector(&y)
                        .ok_or_else(|| PipelineError::input(&ctx, format!("{shock} response at horizon {h} is constant")))?;
                }
                let r = ols_cross_section(&y, &x, &table.covariates, true, reg.std_errors)
                    .map_err(|e| PipelineError::input(&ctx, e))?;
                results.push(r);
                titles.push(format!("{shock} Cumulative-IRF{h}"));
            }
        }
        let formatted = format_results_table(&results, &table.covariates, &titles).map_err(|e| PipelineError::input(&ctx, e))?;
        out.push((table.name.clone(), formatted, format_raw_table(&results, &titles)));
    }
    Ok(out)
}

fn summary_table(cfg: &PipelineConfig, states: &[(String, SeriesPanel)], aggregate: &SeriesPanel) -> Result<String> {
    let mut out = String::from("state,variable,mean,std_dev,max,min,corr_with_reference\n");
    for var in &cfg.state_variables {
        let mut cols = Vec::new();
        for (s, p) in states {
            let c = p.column(var).map_err(|e| PipelineError::input(format!("state {s}"), e))?;
            cols.push((s.clone(), p.time_index().to_vec(), c));
        }
        let panels: Vec<SeriesPanel> = cols
            .iter()
            .map(|(s, t, c)| SeriesPanel::new(DMatrix::from_column_slice(c.len(), 1, c), t.clone(), vec![s.clone()]))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| PipelineError::input("summary", e))?;
        let mut refs: Vec<&SeriesPanel> = panels.iter().collect();
        let reference_id = "__reference__";
        let reference = match cfg.summary_reference.get(var) {
            Some(agg) => {
                let c = aggregate
                    .column(agg)
                    .map_err(|e| PipelineError::input(format!("summary.reference.{var}"), e))?;
                SeriesPanel::new(DMatrix::from_column_slice(c.len(), 1, &c), aggregate.time_index().to_vec(), vec![reference_id.into()])
            }
            None => {
                let merged = SeriesPanel::merge(&refs).map_err(|e| PipelineError::input("summary", e))?;
                let avg: Vec<f64> = merged.observations().row_iter().map(|r| r.mean()).collect();
                SeriesPanel::new(DMatrix::from_column_slice(avg.len(), 1, &avg), merged.time_index().to_vec(), vec![reference_id.into()])
            }
        }
        .map_err(|e| PipelineError::input("summary", e))?;
        refs.push(&reference);
        let merged = SeriesPanel::merge(&refs).map_err(|e| PipelineError::input("summary", e))?;
        let rows = summary_stats(&merged, reference_id).map_err(|e| PipelineError::input("summary", e))?;
        for r in rows.iter().filter(|r| r.series_id != reference_id) {
            let _ = writeln!(
                out,
                "{},{var},{},{},{},{},{}",
                r.series_id, r.mean, r.std_dev, r.max, r.min, r.corr_with_reference
            );
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct ManifestFile {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    config_hash: String,
    seed: u64,
    version: &'static str,
    dependencies: BTreeMap<&'static str, &'static str>,
    states: &'a [String],
    shocks: &'a [String],
    settings: BTreeMap<&'a str, &'a str>,
    files: Vec<ManifestFile>,
}

/// Paths written by a run, relative to its output directory.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

fn write_all(dir: &Path, files: &[(PathBuf, Vec<u8>)]) -> Result<()> {
    for (rel, bytes) in files {
        let path = dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| PipelineError::Output(format!("{}: {e}", parent.display())))?;
        }
        fs::write(&path, bytes).map_err(|e| PipelineError::Output(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

/// Runs every stage and writes the output tree.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunSummary> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| PipelineError::Output(e.to_string()))?;
    pool.install(|| run_inner(cfg))
}

fn run_inner(cfg: &PipelineConfig) -> Result<RunSummary> {
    log::info!("extracting factors");
    let factors = extract_common_factors(cfg)?;
    let aggregate = prepare(&cfg.aggregate, cfg.aggregate_schema, cfg, "aggregate panel")?;

    let shocks_all = load_shocks(&cfg.shocks_path)
        .map_err(|e| PipelineError::input(format!("shocks {}", cfg.shocks_path.display()), e))?;
    let shocks: Vec<ShockSeries> = cfg
        .shocks
        .iter()
        .map(|id| {
            shocks_all
                .iter()
                .find(|s| &s.shock_id == id)
                .cloned()
                .ok_or_else(|| PipelineError::input("identification.shocks", format!("shock {id} not in {}", cfg.shocks_path.display())))
        })
        .collect::<Result<_>>()?;

    let mut known: Vec<&String> = aggregate.series_ids().iter().collect();
    let states: Vec<(String, SeriesPanel)> = cfg
        .states
        .iter()
        .map(|s| {
            let path = cfg.state_panel_path(s);
            let p = prepare(&path, cfg.state_schema, cfg, &format!("state {s}"))?;
            let vars: Vec<&str> = cfg.state_variables.iter().map(String::as_str).collect();
            let p = p.select(&vars).map_err(|e| PipelineError::input(format!("state {s}"), e))?;
            Ok((s.clone(), p))
        })
        .collect::<Result<_>>()?;
    let regional_raw = load_panel(&cfg.regional, cfg.regional_schema).map_err(|e| PipelineError::input("regional panel", e))?;
    known.extend(regional_raw.series_ids());
    known.extend(&cfg.state_variables);
    for id in cfg.transforms.keys() {
        if !known.contains(&id) {
            return Err(PipelineError::input(format!("transform.{id}"), "matches no input series"));
        }
    }

    let mut tasks = Vec::new();
    for (state, panel) in &states {
        for shock in &shocks {
            tasks.push((state.as_str(), panel, shock));
        }
    }
    log::info!("running {} state × shock jobs", tasks.len());
    let jobs: Vec<JobResult> = tasks
        .par_iter()
        .map(|(state, panel, shock)| {
            log::debug!("job {state}/{}", shock.shock_id);
            run_job(cfg, state, panel, &factors.panel, shock)
        })
        .collect::<Result<_>>()?;

    let mut files: Vec<(PathBuf, Vec<u8>)> = jobs.iter().flat_map(|j| j.files.iter().cloned()).collect();
    let mut factor_csv = Vec::new();
    write_panel(&factors.panel, &mut factor_csv, Schema::Wide).map_err(|e| PipelineError::Output(e.to_string()))?;
    files.push(("factors.csv".into(), factor_csv));
    files.push(("normalized_cumulative.csv".into(), normalized_cumulative(cfg, &jobs).into_bytes()));
    files.push(("elasticities.csv".into(), elasticities_table(cfg, &jobs)?.into_bytes()));
    files.push(("multipliers.csv".into(), multipliers_table(cfg, &jobs)?.into_bytes()));
    for shock in &cfg.shocks {
        files.push((format!("fevd_{shock}.csv").into(), fevd_table(cfg, &jobs, shock).into_bytes()));
    }
    for (name, formatted, raw) in regression_tables(cfg, &jobs)? {
        files.push((format!("regression_{name}.csv").into(), formatted.into_bytes()));
        files.push((format!("regression_{name}_raw.csv").into(), raw.into_bytes()));
    }
    files.push(("summary_stats.csv".into(), summary_table(cfg, &states, &aggregate)?.into_bytes()));
    files.sort_by(|a, b| a.0.cmp(&b.0));

    let manifest = Manifest {
        config_hash: cfg.hash(),
        seed: cfg.seed,
        version: env!("CARGO_PKG_VERSION"),
        dependencies: BTreeMap::from([("nalgebra", "0.35"), ("rand_chacha", "0.9"), ("statrs", "0.19")]),
        states: &cfg.states,
        shocks: &cfg.shocks,
        // Paths and worker counts do not affect results.
        settings: cfg
            .canonical
            .iter()
            .filter(|(k, _)| *k != "workers" && *k != "output.dir")
            .map(|(k, v)| (k.as_str(), v.as_str()))
            .collect(),
        files: files
            .iter()
            .map(|(p, b)| ManifestFile {
                path: rel_string(p),
                sha256: hex::encode(Sha256::digest(b)),
            })
            .collect(),
    };
    files.push(("run_manifest.json".into(), pretty_json(&manifest)));

    fs::create_dir_all(&cfg.output_dir).map_err(|e| PipelineError::Output(format!("{}: {e}", cfg.output_dir.display())))?;
    write_all(&cfg.output_dir, &files)?;
    log::info!("wrote {} files to {}", files.len(), cfg.output_dir.display());
    Ok(RunSummary {
        output_dir: cfg.output_dir.clone(),
        files: files.into_iter().map(|(p, _)| p).collect(),
    })
}

fn rel_string(p: &Path) -> String {
    p.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

/// Validates the config at `path` and runs it, optionally overriding the
/// worker count and output directory.
pub fn run_from_path(path: &Path, workers: Option<usize>, output: Option<&Path>) -> Result<RunSummary> {
    let mut cfg = validate_config(path)?;
    if let Some(w) = workers {
        if w == 0 {
            return Err(ConfigError::Invalid(vec!["workers must be ≥ 1".into()]).into());
        }
        cfg.workers = w;
    }
    if let Some(o) = output {
        cfg.output_dir = o.to_path_buf();
    }
    run_pipeline(&cfg)
}

/// Human-readable digest of an output directory.
pub fn summarize(dir: &Path) -> Result<String> {
    let manifest_path = dir.join("run_manifest.json");
    let text = fs::read_to_string(&manifest_path).map_err(|e| PipelineError::input(manifest_path.display().to_string(), e))?;
    let doc: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| PipelineError::input(manifest_path.display().to_string(), e))?;
    let list = |k: &str| -> Vec<String> {
        doc[k]
            .as_array()
            .map(|a| a.iter().filter_map(|v| v.as_str().map(String::from)).collect())
            .unwrap_or_default()
    };
    let mut out = String::new();
    let _ = writeln!(out, "seed: {}", doc["seed"]);
    let _ = writeln!(out, "config hash: {}", doc["config_hash"].as_str().unwrap_or(""));
    let _ = writeln!(out, "states: {}", list("states").join(", "));
    let _ = writeln!(out, "shocks: {}", list("shocks").join(", "));
    let files = doc["files"].as_array().map(Vec::len).unwrap_or(0);
    let mut missing = 0;
    let mut changed = 0;
    for f in doc["files"].as_array().into_iter().flatten() {
        let (Some(p), Some(h)) = (f["path"].as_str(), f["sha256"].as_str()) else {
            continue;
        };
        match fs::read(dir.join(p)) {
            Ok(b) if hex::encode(Sha256::digest(&b)) == h => {}
            Ok(_) => changed += 1,
            Err(_) => missing += 1,
        }
    }
    let _ = writeln!(out, "files: {files} ({missing} missing, {changed} modified)");
    if let Ok(e) = fs::read_to_string(dir.join("elasticities.csv")) {
        out.push_str("\nemployment elasticities\n");
        out.push_str(&e);
    }
    Ok(out)
}
