//! Time-indexed multi-series panels: ingestion, transformation,
//! standardization and summary statistics.
//!
//! Panels are stored as a `T × N` matrix (rows are periods, columns are
//! series). Two CSV layouts are supported:
//!
//! ```text
//! wide:  period,GDP,CPI          long:  period,series_id,value
//!        1977,1.0,2.0                   1977,GDP,1.0
//!        1978,2.0,2.1                   1977,CPI,2.0
//! ```
//!
//! Empty cells (wide) or absent cells (long) are treated as missing.
//! Leading and trailing periods with any missing cell are trimmed; a gap
//! inside the remaining window is an error.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stats;

#[derive(Debug, Error)]
pub enum PanelError {
    #[error("malformed file: {0}")]
    MalformedFile(String),
    #[error("duplicate cell for period {period}, series {series}")]
    DuplicateCell { period: i64, series: String },
    #[error("non-numeric value {value:?} at period {period}, series {series}")]
    NonNumericValue {
        period: String,
        series: String,
        value: String,
    },
    #[error("missing value inside the common window: period {period}, series {series}")]
    MissingValue { period: i64, series: String },
    #[error("log transform of non-positive value in series {series} at period {period}")]
    NonPositiveLogInput { series: String, period: i64 },
    #[error("deflator {deflator:?} for series {series} not found")]
    MissingDeflator { series: String, deflator: String },
    #[error("series {0} has zero variance")]
    ZeroVarianceSeries(String),
    #[error("unknown reference series {0}")]
    UnknownReference(String),
    #[error("unknown series {0}")]
    UnknownSeries(String),
    #[error("invalid panel: {0}")]
    Invalid(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, PanelError>;

/// CSV layout of a panel file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schema {
    Wide,
    Long,
}

impl std::str::FromStr for Schema {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "wide" => Ok(Schema::Wide),
            "long" => Ok(Schema::Long),
            other => Err(format!("unknown schema {other:?} (expected wide|long)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesGroup {
    #[default]
    Aggregate,
    Regional,
    State,
    Shock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    #[default]
    Level,
    FirstDifference,
    LogLevel,
    LogDifference,
    DeflateThenLogDifference,
}

impl TransformKind {
    fn shortens(self) -> bool {
        matches!(
            self,
            TransformKind::FirstDifference
                | TransformKind::LogDifference
                | TransformKind::DeflateThenLogDifference
        )
    }
}

/// How a series was (or should be) transformed. A deflator is carried
/// exactly when the kind is [`TransformKind::DeflateThenLogDifference`].
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TransformSpec {
    kind: TransformKind,
    deflator_series_id: Option<String>,
}

impl TransformSpec {
    pub fn new(kind: TransformKind) -> Self {
        assert!(
            kind != TransformKind::DeflateThenLogDifference,
            "use TransformSpec::deflated for deflation"
        );
        Self {
            kind,
            deflator_series_id: None,
        }
    }

    pub fn deflated(deflator: impl Into<String>) -> Self {
        Self {
            kind: TransformKind::DeflateThenLogDifference,
            deflator_series_id: Some(deflator.into()),
        }
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn deflator(&self) -> Option<&str> {
        self.deflator_series_id.as_deref()
    }
}

impl std::str::FromStr for TransformSpec {
    type Err = String;

    /// Parses `level`, `first_difference`, `log_level`, `log_difference` or
    /// `deflate_then_log_difference:<deflator id>`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(deflator) = s.strip_prefix("deflate_then_log_difference:") {
            if deflator.is_empty() {
                return Err("deflate_then_log_difference needs a deflator id".into());
            }
            return Ok(TransformSpec::deflated(deflator));
        }
        let kind = match s {
            "level" => TransformKind::Level,
            "first_difference" => TransformKind::FirstDifference,
            "log_level" => TransformKind::LogLevel,
            "log_difference" => TransformKind::LogDifference,
            "deflate_then_log_difference" => {
                return Err("deflate_then_log_difference needs ':<deflator id>'".into())
            }
            other => return Err(format!("unknown transform {other:?}")),
        };
        Ok(TransformSpec::new(kind))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub group: SeriesGroup,
    pub unit_id: String,
    pub transform_applied: TransformSpec,
}

/// Rectangular panel of annual series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPanel {
    observations: DMatrix<f64>,
    time_index: Vec<i64>,
    series_ids: Vec<String>,
    series_meta: Vec<SeriesMeta>,
}

impl SeriesPanel {
    /// Builds a panel, checking shape, ordering, uniqueness and finiteness.
    pub fn new(
        observations: DMatrix<f64>,
        time_index: Vec<i64>,
        series_ids: Vec<String>,
    ) -> Result<Self> {
        let meta = vec![SeriesMeta::default(); series_ids.len()];
        Self::with_meta(observations, time_index, series_ids, meta)
    }

    pub fn with_meta(
        observations: DMatrix<f64>,
        time_index: Vec<i64>,
        series_ids: Vec<String>,
        series_meta: Vec<SeriesMeta>,
    ) -> Result<Self> {
        if observations.nrows() != time_index.len() {
            return Err(PanelError::Invalid(format!(
                "{} rows but {} periods",
                observations.nrows(),
                time_index.len()
            )));
        }
        if observations.ncols() != series_ids.len() || series_meta.len() != series_ids.len() {
            return Err(PanelError::Invalid(format!(
                "{} columns but {} series ids",
                observations.ncols(),
                series_ids.len()
            )));
        }
        if time_index.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PanelError::Invalid("time index not strictly increasing".into()));
        }
        let mut seen = HashSet::new();
        for id in &series_ids {
            if !seen.insert(id.as_str()) {
                return Err(PanelError::Invalid(format!("duplicate series id {id}")));
            }
        }
        if let Some(pos) = observations.iter().position(|v| !v.is_finite()) {
            let (r, c) = (pos % observations.nrows(), pos / observations.nrows());
            return Err(PanelError::Invalid(format!(
                "non-finite value at period {}, series {}",
                time_index[r], series_ids[c]
            )));
        }
        Ok(Self {
            observations,
            time_index,
            series_ids,
            series_meta,
        })
    }

    pub fn observations(&self) -> &DMatrix<f64> {
        &self.observations
    }

    pub fn time_index(&self) -> &[i64] {
        &self.time_index
    }

    pub fn series_ids(&self) -> &[String] {
        &self.series_ids
    }

    pub fn meta(&self) -> &[SeriesMeta] {
        &self.series_meta
    }

    pub fn n_periods(&self) -> usize {
        self.observations.nrows()
    }

    pub fn n_series(&self) -> usize {
        self.observations.ncols()
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.series_ids.iter().position(|s| s == id)
    }

    pub fn column(&self, id: &str) -> Result<Vec<f64>> {
        let j = self
            .position(id)
            .ok_or_else(|| PanelError::UnknownSeries(id.to_string()))?;
        Ok(self.observations.column(j).iter().copied().collect())
    }

    /// Tags every series with a group and unit id.
    pub fn set_group(&mut self, group: SeriesGroup, unit_id: &str) {
        for m in &mut self.series_meta {
            m.group = group;
            m.unit_id = unit_id.to_string();
        }
    }

    /// Panel restricted to the given series, in the given order.
    pub fn select(&self, ids: &[&str]) -> Result<SeriesPanel> {
        let mut cols = Vec::with_capacity(ids.len());
        for id in ids {
            cols.push(
                self.position(id)
                    .ok_or_else(|| PanelError::UnknownSeries(id.to_string()))?,
            );
        }
        let obs = self.observations.select_columns(&cols);
        SeriesPanel::with_meta(
            obs,
            self.time_index.clone(),
            ids.iter().map(|s| s.to_string()).collect(),
            cols.iter().map(|&j| self.series_meta[j].clone()).collect(),
        )
    }

    /// Rows whose period lies in `[first, last]`.
    pub fn window(&self, first: i64, last: i64) -> Result<SeriesPanel> {
        let rows: Vec<usize> = (0..self.n_periods())
            .filter(|&i| self.time_index[i] >= first && self.time_index[i] <= last)
            .collect();
        SeriesPanel::with_meta(
            self.observations.select_rows(&rows),
            rows.iter().map(|&i| self.time_index[i]).collect(),
            self.series_ids.clone(),
            self.series_meta.clone(),
        )
    }

    /// Column-wise concatenation of panels over the periods they share.
    /// The shared periods must form a contiguous run in each input.
    pub fn merge(panels: &[&SeriesPanel]) -> Result<SeriesPanel> {
        let first = panels
            .first()
            .ok_or_else(|| PanelError::Invalid("nothing to merge".into()))?;
        let mut common: BTreeSet<i64> = first.time_index.iter().copied().collect();
        for p in &panels[1..] {
            let other: BTreeSet<i64> = p.time_index.iter().copied().collect();
            common = common.intersection(&other).copied().collect();
        }
        let (Some(&lo), Some(&hi)) = (common.first(), common.last()) else {
            return Err(PanelError::Invalid("panels share no periods".into()));
        };
        let mut obs_cols = Vec::new();
        let mut ids = Vec::new();
        let mut meta = Vec::new();
        let mut time = None;
        for p in panels {
            let w = p.window(lo, hi)?;
            if w.n_periods() != common.len() {
                return Err(PanelError::Invalid(
                    "shared periods are not contiguous across panels".into(),
                ));
            }
            time.get_or_insert_with(|| w.time_index.clone());
            for j in 0..w.n_series() {
                obs_cols.push(w.observations.column(j).into_owned());
            }
            ids.extend(w.series_ids.iter().cloned());
            meta.extend(w.series_meta.iter().cloned());
        }
        let obs = DMatrix::from_columns(&obs_cols);
        SeriesPanel::with_meta(obs, time.unwrap_or_default(), ids, meta)
    }
}

fn parse_period(raw: &str) -> std::result::Result<i64, PanelError> {
    raw.trim()
        .parse::<i64>()
        .map_err(|_| PanelError::MalformedFile(format!("bad period label {raw:?}")))
}

fn parse_value(raw: &str, period: &str, series: &str) -> Result<Option<f64>> {
    let t = raw.trim();
    if t.is_empty() {
        return Ok(None);
    }
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(PanelError::NonNumericValue {
            period: period.to_string(),
            series: series.to_string(),
            value: raw.to_string(),
        }),
    }
}

type CellMap = BTreeMap<i64, HashMap<usize, f64>>;

/// Reads a panel CSV.
pub fn load_panel(path: impl AsRef<Path>, schema: Schema) -> Result<SeriesPanel> {
    let file = File::open(path.as_ref())?;
    read_panel(file, schema)
}

pub fn read_panel<R: Read>(reader: R, schema: Schema) -> Result<SeriesPanel> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let (ids, cells) = match schema {
        Schema::Wide => read_wide(&headers, &mut rdr)?,
        Schema::Long => {
            let (ids, cells, _) = read_long(&headers, &mut rdr, false)?;
            (ids, cells)
        }
    };
    assemble(ids, cells)
}

fn read_wide<R: Read>(
    headers: &csv::StringRecord,
    rdr: &mut csv::Reader<R>,
) -> Result<(Vec<String>, CellMap)> {
    if headers.get(0) != Some("period") {
        return Err(PanelError::MalformedFile(
            "wide schema: first header must be \"period\"".into(),
        ));
    }
    let ids: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    if ids.is_empty() {
        return Err(PanelError::MalformedFile("wide schema: no series columns".into()));
    }
    let mut seen = HashSet::new();
    for id in &ids {
        if id.is_empty() || !seen.insert(id.clone()) {
            return Err(PanelError::MalformedFile(format!("bad or duplicate series id {id:?}")));
        }
    }
    let mut cells = CellMap::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != ids.len() + 1 {
            return Err(PanelError::MalformedFile(format!(
                "row {} has {} fields, expected {}",
                line + 2,
                rec.len(),
                ids.len() + 1
            )));
        }
        let period = parse_period(&rec[0])?;
        let row = cells.entry(period).or_default();
        for (j, id) in ids.iter().enumerate() {
            if let Some(v) = parse_value(&rec[j + 1], &rec[0], id)? {
                if row.insert(j, v).is_some() {
                    return Err(PanelError::DuplicateCell {
                        period,
                        series: id.clone(),
                    });
                }
            }
        }
    }
    Ok((ids, cells))
}

type Labels = BTreeMap<(usize, i64), String>;

fn read_long<R: Read>(
    headers: &csv::StringRecord,
    rdr: &mut csv::Reader<R>,
    allow_label: bool,
) -> Result<(Vec<String>, CellMap, Labels)> {
    let expected = ["period", "series_id", "value"];
    let ok = headers.len() >= 3
        && headers.iter().take(3).eq(expected.iter().copied())
        && (headers.len() == 3 || (allow_label && headers.len() == 4 && &headers[3] == "label"));
    if !ok {
        return Err(PanelError::MalformedFile(format!(
            "long schema: expected header \"period,series_id,value{}\"",
            if allow_label { "[,label]" } else { "" }
        )));
    }
    let width = headers.len();
    let mut ids: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut cells = CellMap::new();
    let mut labels = Labels::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != width {
            return Err(PanelError::MalformedFile(format!(
                "row {} has {} fields, expected {}",
                line + 2,
                rec.len(),
                width
            )));
        }
        let period = parse_period(&rec[0])?;
        let id = rec[1].to_string();
        if id.is_empty() {
            return Err(PanelError::MalformedFile(format!("row {} has empty series_id", line + 2)));
        }
        let j = *index.entry(id.clone()).or_insert_with(|| {
            ids.push(id.clone());
            ids.len() - 1
        });
        if let Some(v) = parse_value(&rec[2], &rec[0], &id)? {
            if cells.entry(period).or_default().insert(j, v).is_some() {
                return Err(PanelError::DuplicateCell { period, series: id });
            }
        }
        if width == 4 && !rec[3].is_empty() {
            labels.insert((j, period), rec[3].to_string());
        }
    }
    Ok((ids, cells, labels))
}

/// Trims to the maximal complete window and builds the matrix.
fn assemble(ids: Vec<String>, cells: CellMap) -> Result<SeriesPanel> {
    let n = ids.len();
    let periods: Vec<i64> = cells.keys().copied().collect();
    if periods.is_empty() || n == 0 {
        return Err(PanelError::MalformedFile("no data rows".into()));
    }
    let complete = |p: &i64| cells[p].len() == n;
    let first = periods
        .iter()
        .position(complete)
        .ok_or_else(|| PanelError::MalformedFile("no period has all series present".into()))?;
    let last = periods.iter().rposition(complete).unwrap_or(first);
    let window = &periods[first..=last];
    for w in window.windows(2) {
        if w[1] != w[0] + 1 {
            return Err(PanelError::MissingValue {
                period: w[0] + 1,
                series: ids[0].clone(),
            });
        }
    }
    let mut obs = DMatrix::zeros(window.len(), n);
    for (i, p) in window.iter().enumerate() {
        let row = &cells[p];
        for (j, id) in ids.iter().enumerate() {
            match row.get(&j) {
                Some(&v) => obs[(i, j)] = v,
                None => {
                    return Err(PanelError::MissingValue {
                        period: *p,
                        series: id.clone(),
                    })
                }
            }
        }
    }
    SeriesPanel::new(obs, window.to_vec(), ids)
}

/// Writes a panel in either schema. Values use Rust's shortest
/// round-trip formatting, so reading the file back is bit-exact.
pub fn write_panel<W: Write>(panel: &SeriesPanel, writer: W, schema: Schema) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    match schema {
        Schema::Wide => {
            let mut header = vec!["period".to_string()];
            header.extend(panel.series_ids.iter().cloned());
            w.write_record(&header)?;
            for (i, p) in panel.time_index.iter().enumerate() {
                let mut row = vec![p.to_string()];
                row.extend(panel.observations.row(i).iter().map(|v| v.to_string()));
                w.write_record(&row)?;
            }
        }
        Schema::Long => {
            w.write_record(["period", "series_id", "value"])?;
            for (i, p) in panel.time_index.iter().enumerate() {
                for (j, id) in panel.series_ids.iter().enumerate() {
                    let v = panel.observations[(i, j)].to_string();
                    w.write_record([p.to_string().as_str(), id, &v])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_panel(panel: &SeriesPanel, path: impl AsRef<Path>, schema: Schema) -> Result<()> {
    let file = File::create(path.as_ref())?;
    write_panel(panel, std::io::BufWriter::new(file), schema)
}

/// Applies per-series transforms. Series absent from `specs` keep their
/// values. If any transform differences the data, the whole panel loses
/// its first period so that all series share a window.
pub fn transform(panel: &SeriesPanel, specs: &HashMap<String, TransformSpec>) -> Result<SeriesPanel> {
    for id in specs.keys() {
        if panel.position(id).is_none() {
            return Err(PanelError::UnknownSeries(id.clone()));
        }
    }
    let t = panel.n_periods();
    let shorten = specs.values().any(|s| s.kind.shortens());
    let start = usize::from(shorten);
    if t <= start {
        return Err(PanelError::Invalid("too few periods to difference".into()));
    }
    let mut out = DMatrix::zeros(t - start, panel.n_series());
    let mut meta = panel.series_meta.clone();

    for (j, id) in panel.series_ids.iter().enumerate() {
        let x: Vec<f64> = panel.observations.column(j).iter().copied().collect();
        let spec = specs.get(id).cloned().unwrap_or_default();
        let log_checked = |v: &[f64]| -> Result<Vec<f64>> {
            v.iter()
                .enumerate()
                .map(|(i, &a)| {
                    if a > 0.0 {
                        Ok(a.ln())
                    } else {
                        Err(PanelError::NonPositiveLogInput {
                            series: id.clone(),
                            period: panel.time_index[i],
                        })
                    }
                })
                .collect()
        };
        let values: Vec<f64> = match spec.kind {
            TransformKind::Level => x[start..].to_vec(),
            TransformKind::LogLevel => log_checked(&x)?[start..].to_vec(),
            TransformKind::FirstDifference => x.windows(2).map(|w| w[1] - w[0]).collect(),
            TransformKind::LogDifference => {
                let l = log_checked(&x)?;
                l.windows(2).map(|w| w[1] - w[0]).collect()
            }
            TransformKind::DeflateThenLogDifference => {
                let defl_id = spec.deflator().unwrap_or_default();
                let d = panel.column(defl_id).map_err(|_| PanelError::MissingDeflator {
                    series: id.clone(),
                    deflator: defl_id.to_string(),
                })?;
                let real: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a / b).collect();
                let l = log_checked(&real)?;
                l.windows(2).map(|w| w[1] - w[0]).collect()
            }
        };
        for (i, v) in values.into_iter().enumerate() {
            out[(i, j)] = v;
        }
        meta[j].transform_applied = spec;
    }
    SeriesPanel::with_meta(
        out,
        panel.time_index[start..].to_vec(),
        panel.series_ids.clone(),
        meta,
    )
}

/// Standardized panel plus the column means and (population) standard
/// deviations that invert it.
#[derive(Debug, Clone)]
pub struct Standardized {
    pub panel: SeriesPanel,
    pub means: Vec<f64>,
    pub std_devs: Vec<f64>,
}

/// Maps every column to zero mean and unit population standard deviation.
pub fn standardize(panel: &SeriesPanel) -> Result<Standardized> {
    let mut out = panel.observations.clone();
    let mut means = Vec::with_capacity(panel.n_series());
    let mut sds = Vec::with_capacity(panel.n_series());
    for j in 0..panel.n_series() {
        let col: Vec<f64> = panel.observations.column(j).iter().copied().collect();
        let m = stats::mean(&col);
        let sd = stats::std_population(&col);
        if !(sd > stats::ZERO_VARIANCE_TOL * (1.0 + m.abs())) {
            return Err(PanelError::ZeroVarianceSeries(panel.series_ids[j].clone()));
        }
        for v in out.column_mut(j).iter_mut() {
            *v = (*v - m) / sd;
        }
        means.push(m);
        sds.push(sd);
    }
    Ok(Standardized {
        panel: SeriesPanel::with_meta(
            out,
            panel.time_index.clone(),
            panel.series_ids.clone(),
            panel.series_meta.clone(),
        )?,
        means,
        std_devs: sds,
    })
}

/// One row of the summary-statistics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub series_id: String,
    pub mean: f64,
    pub std_dev: f64,
    pub max: f64,
    pub min: f64,
    pub corr_with_reference: f64,
}

/// Mean, sample standard deviation, extremes and correlation with a
/// reference series, for every series in the panel.
pub fn summary_stats(panel: &SeriesPanel, reference_series_id: &str) -> Result<Vec<SummaryRow>> {
    let reference = panel
        .column(reference_series_id)
        .map_err(|_| PanelError::UnknownReference(reference_series_id.to_string()))?;
    Ok(panel
        .series_ids
        .iter()
        .enumerate()
        .map(|(j, id)| {
            let col: Vec<f64> = panel.observations.column(j).iter().copied().collect();
            SummaryRow {
                series_id: id.clone(),
                mean: stats::mean(&col),
                std_dev: stats::std_sample(&col),
                max: col.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                min: col.iter().copied().fold(f64::INFINITY, f64::min),
                corr_with_reference: if j == panel.position(reference_series_id).unwrap_or(usize::MAX) {
                    1.0
                } else {
                    stats::pearson(&col, &reference)
                },
            }
        })
        .collect())
}

/// A narrative shock measure aligned to annual periods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShockSeries {
    pub shock_id: String,
    pub time_index: Vec<i64>,
    pub values: Vec<f64>,
    pub event_labels: BTreeMap<i64, String>,
}

impl ShockSeries {
    /// Re-indexes the shock onto `periods`; periods without an entry carry 0.
    pub fn aligned(&self, periods: &[i64]) -> ShockSeries {
        let lookup: HashMap<i64, f64> = self
            .time_index
            .iter()
            .copied()
            .zip(self.values.iter().copied())
            .collect();
        ShockSeries {
            shock_id: self.shock_id.clone(),
            time_index: periods.to_vec(),
            values: periods.iter().map(|p| lookup.get(p).copied().unwrap_or(0.0)).collect(),
            event_labels: self
                .event_labels
                .iter()
                .filter(|(p, _)| periods.contains(p))
                .map(|(p, l)| (*p, l.clone()))
                .collect(),
        }
    }

    /// The shock as a one-column panel tagged with the shock group.
    pub fn to_panel(&self) -> Result<SeriesPanel> {
        let mut p = SeriesPanel::new(
            DMatrix::from_column_slice(self.values.len(), 1, &self.values),
            self.time_index.clone(),
            vec![self.shock_id.clone()],
        )?;
        p.set_group(SeriesGroup::Shock, &self.shock_id);
        Ok(p)
    }
}

/// Reads shock series from a long-schema file with an optional `label`
/// column. Shock files may be sparse: only event years need to appear.
pub fn load_shocks(path: impl AsRef<Path>) -> Result<Vec<ShockSeries>> {
    read_shocks(File::open(path.as_ref())?)
}

pub fn read_shocks<R: Read>(reader: R) -> Result<Vec<ShockSeries>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let (ids, cells, labels) = read_long(&headers, &mut rdr, true)?;
    Ok(ids
        .iter()
        .enumerate()
        .map(|(j, id)| {
            let mut time_index = Vec::new();
            let mut values = Vec::new();
            for (p, row) in &cells {
                if let Some(&v) = row.get(&j) {
                    time_index.push(*p);
                    values.push(v);
                }
            }
            ShockSeries {
                shock_id: id.clone(),
                time_index,
                values,
                event_labels: labels
                    .iter()
                    .filter(|((c, _), _)| *c == j)
                    .map(|((_, p), l)| (*p, l.clone()))
                    .collect(),
            }
        })
        .collect())
}

pub fn write_shocks<W: Write>(shocks: &[ShockSeries], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["period", "series_id", "value", "label"])?;
    for s in shocks {
        for (p, v) in s.time_index.iter().zip(&s.values) {
            let label = s.event_labels.get(p).map(String::as_str).unwrap_or("");
            w.write_record([p.to_string().as_str(), &s.shock_id, &v.to_string(), label])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wide(s: &str) -> Result<SeriesPanel> {
        read_panel(s.as_bytes(), Schema::Wide)
    }

    fn long(s: &str) -> Result<SeriesPanel> {
        read_panel(s.as_bytes(), Schema::Long)
    }

    fn single(values: &[f64]) -> SeriesPanel {
        SeriesPanel::new(
            DMatrix::from_column_slice(values.len(), 1, values),
            (0..values.len() as i64).map(|i| 1977 + i).collect(),
            vec!["x".into()],
        )
        .unwrap()
    }

    #[test]
    fn minimal_wide_file() {
        let p = wide("period,x\n1977,1.0\n1978,2.0\n").unwrap();
        assert_eq!(p.n_periods(), 2);
        assert_eq!(p.n_series(), 1);
        assert_eq!(p.column("x").unwrap(), vec![1.0, 2.0]);
        assert_eq!(p.time_index(), &[1977, 1978]);
    }

    #[test]
    fn long_file_order_independent() {
        let a = wide("period,x\n1977,1.0\n1978,2.0\n").unwrap();
        let b = long("period,series_id,value\n1978,x,2.0\n1977,x,1.0\n").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn duplicate_cell_rejected() {
        let err = long("period,series_id,value\n1977,x,1\n1978,x,2\n1978,x,3\n").unwrap_err();
        assert!(matches!(err, PanelError::DuplicateCell { period: 1978, .. }));
        let err = wide("period,x\n1978,1\n1978,2\n").unwrap_err();
        assert!(matches!(err, PanelError::DuplicateCell { .. }));
    }

    #[test]
    fn malformed_and_non_numeric() {
        assert!(matches!(wide("year,x\n1977,1\n"), Err(PanelError::MalformedFile(_))));
        assert!(matches!(wide("period,x\n1977,1,2\n"), Err(PanelError::MalformedFile(_))));
        assert!(matches!(
            wide("period,x\n1977,abc\n"),
            Err(PanelError::NonNumericValue { .. })
        ));
        assert!(matches!(
            long("period,series,value\n1977,x,1\n"),
            Err(PanelError::MalformedFile(_))
        ));
    }

    #[test]
    fn edges_trimmed_interior_gap_rejected() {
        let p = wide("period,x,y\n1976,,1\n1977,1,2\n1978,2,3\n1979,3,\n").unwrap();
        assert_eq!(p.time_index(), &[1977, 1978]);
        let err = wide("period,x,y\n1977,1,2\n1978,,3\n1979,3,4\n").unwrap_err();
        assert!(matches!(err, PanelError::MissingValue { period: 1978, .. }));
        let err = long("period,series_id,value\n1977,x,1\n1979,x,3\n").unwrap_err();
        assert!(matches!(err, PanelError::MissingValue { .. }));
    }

    #[test]
    fn log_difference_definition() {
        let p = single(&[100.0, 110.0]);
        let specs = HashMap::from([("x".to_string(), TransformSpec::new(TransformKind::LogDifference))]);
        let out = transform(&p, &specs).unwrap();
        assert_eq!(out.n_periods(), 1);
        assert!((out.observations()[(0, 0)] - 1.1f64.ln()).abs() < 1e-15);
        assert!((out.observations()[(0, 0)] - 0.09531).abs() < 1e-5);
        assert_eq!(out.time_index(), &[1978]);
        assert_eq!(out.meta()[0].transform_applied.kind(), TransformKind::LogDifference);
    }

    #[test]
    fn first_difference_of_constant() {
        let p = single(&[5.0, 5.0, 5.0]);
        let specs = HashMap::from([("x".to_string(), TransformSpec::new(TransformKind::FirstDifference))]);
        let out = transform(&p, &specs).unwrap();
        assert_eq!(out.column("x").unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn deflated_log_difference() {
        let p = SeriesPanel::new(
            DMatrix::from_row_slice(2, 2, &[100.0, 1.0, 121.0, 1.1]),
            vec![1977, 1978],
            vec!["nom".into(), "defl".into()],
        )
        .unwrap();
        let specs = HashMap::from([("nom".to_string(), TransformSpec::deflated("defl"))]);
        let out = transform(&p, &specs).unwrap();
        let v = out.column("nom").unwrap()[0];
        assert!((v - (110.0f64 / 100.0).ln()).abs() < 1e-12);
        // untouched series is truncated to the common window
        assert_eq!(out.column("defl").unwrap(), vec![1.1]);
    }

    #[test]
    fn transform_errors() {
        let p = single(&[1.0, -1.0]);
        let specs = HashMap::from([("x".to_string(), TransformSpec::new(TransformKind::LogLevel))]);
        assert!(matches!(
            transform(&p, &specs),
            Err(PanelError::NonPositiveLogInput { period: 1978, .. })
        ));
        let specs = HashMap::from([("x".to_string(), TransformSpec::deflated("nope"))]);
        assert!(matches!(transform(&p, &specs), Err(PanelError::MissingDeflator { .. })));
        assert!("deflate_then_log_difference".parse::<TransformSpec>().is_err());
        assert_eq!(
            "deflate_then_log_difference:GDPDEF".parse::<TransformSpec>().unwrap(),
            TransformSpec::deflated("GDPDEF")
        );
    }

    #[test]
    fn standardize_population_convention() {
        let s = standardize(&single(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(s.means, vec![2.0]);
        // population sd of (1,2,3) is sqrt(2/3)
        assert!((s.std_devs[0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let z = s.panel.column("x").unwrap();
        let k = (1.5f64).sqrt();
        for (a, b) in z.iter().zip([-k, 0.0, k]) {
            assert!((a - b).abs() < 1e-12);
        }
        let again = standardize(&s.panel).unwrap();
        for (a, b) in again.panel.column("x").unwrap().iter().zip(&z) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn standardize_constant_column_fails() {
        let p = SeriesPanel::new(
            DMatrix::from_row_slice(3, 2, &[1.0, 5.0, 2.0, 5.0, 3.0, 5.0]),
            vec![1, 2, 3],
            vec!["a".into(), "flat".into()],
        )
        .unwrap();
        match standardize(&p) {
            Err(PanelError::ZeroVarianceSeries(id)) => assert_eq!(id, "flat"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn summary_examples() {
        let p = SeriesPanel::new(
            DMatrix::from_row_slice(3, 2, &[1.0, 3.0, 2.0, 2.0, 3.0, 1.0]),
            vec![1, 2, 3],
            vec!["s".into(), "ref".into()],
        )
        .unwrap();
        let rows = summary_stats(&p, "ref").unwrap();
        assert!((rows[0].corr_with_reference + 1.0).abs() < 1e-15);
        assert_eq!(rows[1].corr_with_reference, 1.0);
        assert!(matches!(summary_stats(&p, "zz"), Err(PanelError::UnknownReference(_))));

        let rows = summary_stats(&single(&[1.0, 2.0, 3.0, 4.0]), "x").unwrap();
        assert_eq!(rows[0].mean, 2.5);
        assert_eq!(rows[0].max, 4.0);
        assert_eq!(rows[0].min, 1.0);
        // sample sd of 1..4
        assert!((rows[0].std_dev - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn shocks_align_with_zero_fill() {
        let raw = "period,series_id,value,label\n1981,PIT,1,Economic Recovery Tax Act of 1981\n1986,PIT,1,\n1986,CIT,1,Tax Reform Act of 1986\n";
        let shocks = read_shocks(raw.as_bytes()).unwrap();
        assert_eq!(shocks.len(), 2);
        let pit = shocks[0].aligned(&(1980..=1987).collect::<Vec<_>>());
        assert_eq!(pit.values, vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(pit.event_labels.len(), 1);
        let mut buf = Vec::new();
        write_shocks(&shocks, &mut buf).unwrap();
        assert_eq!(read_shocks(buf.as_slice()).unwrap(), shocks);
    }

    #[test]
    fn merge_intersects_periods() {
        let a = single(&[1.0, 2.0, 3.0]);
        let mut b = single(&[4.0, 5.0]);
        b = SeriesPanel::new(b.observations().clone(), vec![1978, 1979], vec!["y".into()]).unwrap();
        let m = SeriesPanel::merge(&[&a, &b]).unwrap();
        assert_eq!(m.time_index(), &[1978, 1979]);
        assert_eq!(m.column("x").unwrap(), vec![2.0, 3.0]);
        assert_eq!(m.column("y").unwrap(), vec![4.0, 5.0]);
    }
}
