//! Flat `key=value` pipeline configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are dotted
//! (`identification.n_draws=2000`). Relative paths resolve against the
//! directory holding the config file.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::crossreg::StdErrorKind;
use crate::identify::{Mode, ShockSpace, Sign, SignConstraint};
use crate::panel::{Schema, TransformSpec};
use crate::var::InformationCriterion;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("unparseable config: {0}")]
    Unparseable(String),
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
}

/// Parses `key=value` lines. Duplicate keys and lines without `=` are
/// rejected.
pub fn parse_entries(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::Unparseable(format!("line {}: expected key=value", i + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(ConfigError::Unparseable(format!("line {}: empty key", i + 1)));
        }
        if out.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(ConfigError::Unparseable(format!("line {}: duplicate key {k}", i + 1)));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum LagChoice {
    Fixed(usize),
    Auto { p_max: usize, criterion: InformationCriterion },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTable {
    pub name: String,
    pub covariates: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSettings {
    pub covariates_path: PathBuf,
    pub response: String,
    pub horizons: Vec<usize>,
    pub tables: Vec<RegressionTable>,
    pub standardize_dependent: bool,
    pub std_errors: StdErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub seed: u64,
    pub workers: usize,
    pub output_dir: PathBuf,
    pub aggregate: PathBuf,
    pub aggregate_schema: Schema,
    pub regional: PathBuf,
    pub regional_schema: Schema,
    pub states: Vec<String>,
    /// Path pattern with a `{state}` placeholder.
    pub state_panel: String,
    pub state_schema: Schema,
    pub state_variables: Vec<String>,
    pub shocks_path: PathBuf,
    pub transforms: HashMap<String, TransformSpec>,
    pub r_aggregate: usize,
    pub r_regional: usize,
    pub lags: LagChoice,
    pub tau_identity: bool,
    pub mode: Mode,
    pub shocks: Vec<String>,
    pub n_draws: usize,
    pub shock_space: ShockSpace,
    pub penalty_weight: f64,
    pub constraints: Vec<SignConstraint>,
    pub horizon: usize,
    pub bootstrap_reps: usize,
    pub level: f64,
    pub fix_alpha: bool,
    pub draws_per_replication: usize,
    pub output_variable: String,
    pub employment_variable: String,
    pub shock_magnitude: f64,
    pub regression: Option<RegressionSettings>,
    /// State variable → aggregate series used as its summary reference.
    pub summary_reference: BTreeMap<String, String>,
    /// Every setting, defaults included, as `key → value`.
    pub canonical: BTreeMap<String, String>,
}

impl PipelineConfig {
    pub fn state_panel_path(&self, state: &str) -> PathBuf {
        PathBuf::from(self.state_panel.replace("{state}", state))
    }

    /// SHA-256 over the canonical settings, ignoring `workers` and
    /// `output.dir`, which do not change results.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.canonical {
            if k == "workers" || k == "output.dir" {
                continue;
            }
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }
}

const KNOWN_KEYS: &[&str] = &[
    "seed",
    "workers",
    "output.dir",
    "input.aggregate",
    "input.aggregate.schema",
    "input.regional",
    "input.regional.schema",
    "input.states",
    "input.state_panel",
    "input.state_panel.schema",
    "input.state_variables",
    "input.shocks",
    "input.covariates",
    "factors.r_aggregate",
    "factors.r_regional",
    "var.p",
    "var.p_max",
    "var.criterion",
    "var.layout",
    "var.tau_identity",
    "identification.mode",
    "identification.shocks",
    "identification.n_draws",
    "identification.shock_space",
    "identification.penalty_weight",
    "irf.horizon",
    "irf.bootstrap_reps",
    "irf.level",
    "irf.fix_alpha",
    "irf.draws_per_replication",
    "metrics.output_variable",
    "metrics.employment_variable",
    "metrics.shock_magnitude",
    "regression.response",
    "regression.horizons",
    "regression.tables",
    "regression.standardize_dependent",
    "regression.std_errors",
];

const KNOWN_PREFIXES: &[&str] = &["transform.", "identification.sign.", "regression.table.", "summary.reference."];

struct Reader<'a> {
    entries: &'a BTreeMap<String, String>,
    errors: Vec<String>,
    canonical: BTreeMap<String, String>,
}

impl Reader<'_> {
    fn raw(&mut self, key: &str) -> Option<String> {
        self.entries.get(key).cloned()
    }

    fn required(&mut self, key: &str) -> Option<String> {
        match self.raw(key) {
            Some(v) if !v.is_empty() => {
                self.canonical.insert(key.into(), v.clone());
                Some(v)
            }
            _ => {
                self.errors.push(format!("{key} is required"));
                None
            }
        }
    }

    fn parsed<T: FromStr>(&mut self, key: &str, default: &str) -> Option<T>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.raw(key).unwrap_or_else(|| default.to_string());
        self.canonical.insert(key.into(), v.clone());
        match v.parse::<T>() {
            Ok(x) => Some(x),
            Err(e) => {
                self.errors.push(format!("{key}: cannot parse {v:?} ({e})"));
                None
            }
        }
    }

    fn list(&mut self, key: &str, default: &str) -> Vec<String> {
        let v = self.raw(key).unwrap_or_else(|| default.to_string());
        self.canonical.insert(key.into(), v.clone());
        v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
    }

    fn at_least(&mut self, key: &str, default: &str, min: usize) -> usize {
        match self.parsed::<usize>(key, default) {
            Some(v) if v >= min => v,
            Some(_) => {
                self.errors.push(format!("{key} must be ≥ {min}"));
                min
            }
            None => min,
        }
    }
}

fn parse_sign_constraint(var: &str, v: &str, horizon: usize) -> Result<SignConstraint, String> {
    let mut parts = v.split(':');
    let sign: Sign = parts.next().unwrap_or_default().parse()?;
    let lo: usize = match parts.next() {
        Some(s) => s.parse().map_err(|_| format!("bad horizon {s:?}"))?,
        None => 0,
    };
    let hi: usize = match parts.next() {
        Some(s) => s.parse().map_err(|_| format!("bad horizon {s:?}"))?,
        None => lo,
    };
    if parts.next().is_some() {
        return Err("expected sign[:lo[:hi]]".into());
    }
    if lo > hi {
        return Err(format!("horizon window {lo}..{hi} is empty"));
    }
    if hi > horizon {
        return Err(format!("horizon {hi} exceeds irf.horizon {horizon}"));
    }
    Ok(SignConstraint {
        variable_id: var.to_string(),
        sign,
        horizon_lo: lo,
        horizon_hi: hi,
    })
}

/// Resolves and checks every setting, collecting all problems.
pub fn resolve(entries: &BTreeMap<String, String>, base: &Path) -> Result<PipelineConfig, ConfigError> {
    let mut r = Reader {
        entries,
        errors: Vec::new(),
        canonical: BTreeMap::new(),
    };
    for k in entries.keys() {
        if !KNOWN_KEYS.contains(&k.as_str()) && !KNOWN_PREFIXES.iter().any(|p| k.starts_with(p) && k.len() > p.len()) {
            r.errors.push(format!("{k}: unknown key"));
        }
    }
    let path_of = |r: &mut Reader, key: &str, must_exist: bool| -> PathBuf {
        let Some(v) = r.required(key) else {
            return PathBuf::new();
        };
        let p = base.join(&v);
        if must_exist && !p.exists() {
            r.errors.push(format!("{key}: file {} does not exist", p.display()));
        }
        p
    };

    let seed = match r.raw("seed") {
        Some(_) => r.parsed::<u64>("seed", "0").unwrap_or(0),
        None => {
            r.errors.push("seed is required".into());
            0
        }
    };
    let workers = r.at_least("workers", "1", 1);
    let output_dir = {
        let v = r.raw("output.dir").unwrap_or_else(|| "out".into());
        r.canonical.insert("output.dir".into(), v.clone());
        base.join(v)
    };
    let aggregate = path_of(&mut r, "input.aggregate", true);
    let aggregate_schema = r.parsed("input.aggregate.schema", "wide").unwrap_or(Schema::Wide);
    let regional = path_of(&mut r, "input.regional", true);
    let regional_schema = r.parsed("input.regional.schema", "wide").unwrap_or(Schema::Wide);
    let states = r.list("input.states", "");
    if states.is_empty() {
        r.errors.push("input.states must list at least one state".into());
    }
    let mut seen = std::collections::HashSet::new();
    for s in &states {
        if !seen.insert(s) {
            r.errors.push(format!("input.states: duplicate state {s}"));
        }
    }
    let state_panel = match r.required("input.state_panel") {
        Some(v) => {
            if !v.contains("{state}") {
                r.errors.push("input.state_panel must contain the {state} placeholder".into());
            }
            let pattern = base.join(&v).to_string_lossy().into_owned();
            for s in &states {
                let p = PathBuf::from(pattern.replace("{state}", s));
                if !p.exists() {
                    r.errors.push(format!("input.state_panel: file {} does not exist", p.display()));
                }
            }
            pattern
        }
        None => String::new(),
    };
    let state_schema = r.parsed("input.state_panel.schema", "wide").unwrap_or(Schema::Wide);
    let state_variables = r.list("input.state_variables", "GDP,DPI,CPI,EMP");
    if state_variables.is_empty() {
        r.errors.push("input.state_variables must not be empty".into());
    }
    let shocks_path = path_of(&mut r, "input.shocks", true);

    let mut transforms = HashMap::new();
    for (k, v) in entries.iter().filter(|(k, _)| k.starts_with("transform.")) {
        let id = &k["transform.".len()..];
        r.canonical.insert(k.clone(), v.clone());
        match v.parse::<TransformSpec>() {
            Ok(t) => {
                transforms.insert(id.to_string(), t);
            }
            Err(e) => r.errors.push(format!("{k}: {e}")),
        }
    }

    let r_aggregate = r.at_least("factors.r_aggregate", "1", 1);
    let r_regional = r.at_least("factors.r_regional", "1", 1);
    let lags = {
        let v = r.raw("var.p").unwrap_or_else(|| "1".into());
        r.canonical.insert("var.p".into(), v.clone());
        if v == "auto" {
            let p_max = r.at_least("var.p_max", "4", 1);
            let criterion = r.parsed("var.criterion", "bic").unwrap_or(InformationCriterion::Bic);
            LagChoice::Auto { p_max, criterion }
        } else {
            match v.parse::<usize>() {
                Ok(p) if p >= 1 => LagChoice::Fixed(p),
                _ => {
                    r.errors.push("var.p must be ≥ 1 or auto".into());
                    LagChoice::Fixed(1)
                }
            }
        }
    };
    let layout = r.raw("var.layout").unwrap_or_else(|| "block_exogenous".into());
    r.canonical.insert("var.layout".into(), layout.clone());
    if layout != "block_exogenous" {
        r.errors.push(format!(
            "var.layout: {layout:?} is not supported by the pipeline (only block_exogenous)"
        ));
    }
    let tau_identity = r.parsed("var.tau_identity", "false").unwrap_or(false);

    let mode = match r.required("identification.mode") {
        Some(v) => match v.parse::<Mode>() {
            Ok(m) => m,
            Err(e) => {
                r.errors.push(format!("identification.mode: {e}"));
                Mode::Rejection
            }
        },
        None => Mode::Rejection,
    };
    let shocks = r.list("identification.shocks", "PIT,CIT");
    if shocks.is_empty() {
        r.errors.push("identification.shocks must not be empty".into());
    }
    let n_draws = r.at_least("identification.n_draws", "1000", 1);
    let shock_space = r.parsed("identification.shock_space", "joint").unwrap_or_default();
    let penalty_weight: f64 = r.parsed("identification.penalty_weight", "100").unwrap_or(100.0);
    if !(penalty_weight > 0.0) {
        r.errors.push("identification.penalty_weight must be > 0".into());
    }
    let horizon = r.at_least("irf.horizon", "10", 1);
    let mut constraints = Vec::new();
    for (k, v) in entries.iter().filter(|(k, _)| k.starts_with("identification.sign.")) {
        let var = &k["identification.sign.".len()..];
        r.canonical.insert(k.clone(), v.clone());
        if !state_variables.iter().any(|s| s == var) {
            r.errors.push(format!("{k}: {var} is not a state variable"));
        }
        match parse_sign_constraint(var, v, horizon) {
            Ok(c) => constraints.push(c),
            Err(e) => r.errors.push(format!("{k}: {e}")),
        }
    }
    if constraints.is_empty() {
        r.errors.push("identification.sign.<variable> must constrain at least one variable".into());
    } else if constraints.iter().all(|c| c.sign == Sign::Unrestricted) {
        r.errors.push("identification.sign: every constraint is unrestricted".into());
    }

    let bootstrap_reps = r.at_least("irf.bootstrap_reps", "1000", crate::irf::MIN_REPLICATIONS);
    let level: f64 = r.parsed("irf.level", "0.95").unwrap_or(0.95);
    if !(level > 0.0 && level < 1.0) {
        r.errors.push("irf.level must lie in (0, 1)".into());
    }
    let fix_alpha = r.parsed("irf.fix_alpha", "false").unwrap_or(false);
    let draws_per_replication = r.at_least("irf.draws_per_replication", "500", 1);

    let var_or_err = |r: &mut Reader, key: &str, default: &str| -> String {
        let v = r.parsed::<String>(key, default).unwrap_or_default();
        if !state_variables.contains(&v) {
            r.errors.push(format!("{key}: {v} is not a state variable"));
        }
        v
    };
    let output_variable = var_or_err(&mut r, "metrics.output_variable", "GDP");
    let employment_variable = var_or_err(&mut r, "metrics.employment_variable", "EMP");
    let shock_magnitude: f64 = r.parsed("metrics.shock_magnitude", "1").unwrap_or(1.0);
    if shock_magnitude == 0.0 {
        r.errors.push("metrics.shock_magnitude must be non-zero".into());
    }

    let table_names = r.list("regression.tables", "");
    let regression = if table_names.is_empty() {
        None
    } else {
        let covariates_path = path_of(&mut r, "input.covariates", true);
        let response = var_or_err(&mut r, "regression.response", "GDP");
        let horizons: Vec<usize> = r
            .list("regression.horizons", "10,2")
            .iter()
            .filter_map(|h| match h.parse::<usize>() {
                Ok(h) if h <= horizon => Some(h),
                _ => {
                    r.errors.push(format!("regression.horizons: {h} is not a horizon in 0..={horizon}"));
                    None
                }
            })
            .collect();
        let mut tables = Vec::new();
        for name in &table_names {
            let key = format!("regression.table.{name}");
            let covariates = r.list(&key, "");
            if covariates.is_empty() {
                r.errors.push(format!("{key} must list at least one covariate"));
            }
            let max_k = states.len().saturating_sub(2);
            if covariates.len() > max_k {
                r.errors.push(format!(
                    "{key}: {} covariates need at least {} states",
                    covariates.len(),
                    covariates.len() + 2
                ));
            }
            tables.push(RegressionTable {
                name: name.clone(),
                covariates,
            });
        }
        let standardize_dependent = r.parsed("regression.standardize_dependent", "false").unwrap_or(false);
        let std_errors = match r.parsed::<String>("regression.std_errors", "classical").as_deref() {
            Some("hc1") => StdErrorKind::Hc1,
            Some("classical") => StdErrorKind::Classical,
            other => {
                r.errors.push(format!("regression.std_errors: unknown kind {other:?} (classical|hc1)"));
                StdErrorKind::Classical
            }
        };
        Some(RegressionSettings {
            covariates_path,
            response,
            horizons,
            tables,
            standardize_dependent,
            std_errors,
        })
    };
    if let Some(v) = entries.get("input.covariates") {
        r.canonical.insert("input.covariates".into(), v.clone());
    }

    let mut summary_reference = BTreeMap::new();
    for (k, v) in entries.iter().filter(|(k, _)| k.starts_with("summary.reference.")) {
        r.canonical.insert(k.clone(), v.clone());
        summary_reference.insert(k["summary.reference.".len()..].to_string(), v.clone());
    }

    if !r.errors.is_empty() {
        return Err(ConfigError::Invalid(r.errors));
    }
    Ok(PipelineConfig {
        seed,
        workers,
        output_dir,
        aggregate,
        aggregate_schema,
        regional,
        regional_schema,
        states,
        state_panel,
        state_schema,
        state_variables,
        shocks_path,
        transforms,
        r_aggregate,
        r_regional,
        lags,
        tau_identity,
        mode,
        shocks,
        n_draws,
        shock_space,
        penalty_weight,
        constraints,
        horizon,
        bootstrap_reps,
        level,
        fix_alpha,
        draws_per_replication,
        output_variable,
        employment_variable,
        shock_magnitude,
        regression,
        summary_reference,
        canonical: r.canonical,
    })
}

/// Reads and resolves a config file.
pub fn validate_config(path: impl AsRef<Path>) -> Result<PipelineConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Unparseable(format!("{}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    resolve(&parse_entries(&text)?, &base)
}
