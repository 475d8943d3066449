//! Reading and writing trace files, plus a seeded synthetic trace generator.
//!
//! CSV input goes through a [`ColumnMap`] so that logs written by energy
//! trackers can be read without reshaping them first: columns are picked by
//! name or index, per-interval energy is prefix-summed into cumulative kWh,
//! and percentage scores are brought back to `[0, 1]`.
//!
//! The default CSV schema is `iter,energy_kwh,performance`. Numbers are
//! written with the shortest representation that parses back to the same
//! `f64`, so `parse_csv(emit_csv(t)) == t`.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::trace::{validate_trace, PerformanceKind, Trace, TraceError, TracePoint};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("columns must be distinct, `{0}` is used twice")]
    DuplicateColumn(String),
    #[error("row {row}: cannot parse `{text}` in column `{column}` as a number")]
    UnparsableNumber {
        row: usize,
        column: String,
        text: String,
    },
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("schema violation at {path}: {message}")]
    SchemaViolation { path: String, message: String },
    #[error("row {}: {source}", .row.map(|r| r.to_string()).unwrap_or_else(|| "-".into()))]
    Invalid {
        row: Option<usize>,
        #[source]
        source: TraceError,
    },
    #[error("invalid column map: {0}")]
    BadColumnMap(String),
    #[error("invalid synthetic spec: {0}")]
    BadSyntheticSpec(String),
}

impl IngestError {
    pub fn code(&self) -> &'static str {
        match self {
            IngestError::MissingColumn(_) => "MissingColumn",
            IngestError::DuplicateColumn(_) => "DuplicateColumn",
            IngestError::UnparsableNumber { .. } => "UnparsableNumber",
            IngestError::Csv(_) => "MalformedCsv",
            IngestError::SchemaViolation { .. } => "SchemaViolation",
            IngestError::Invalid { source, .. } => source.code(),
            IngestError::BadColumnMap(_) => "BadColumnMap",
            IngestError::BadSyntheticSpec(_) => "BadSyntheticSpec",
        }
    }

    /// Data row (0-based, header excluded) or JSON path the error refers to.
    pub fn location(&self) -> Option<String> {
        match self {
            IngestError::UnparsableNumber { row, .. } => Some(format!("row {row}")),
            IngestError::SchemaViolation { path, .. } => Some(path.clone()),
            IngestError::Invalid { row: Some(r), .. } => Some(format!("row {r}")),
            _ => None,
        }
    }

    fn invalid(source: TraceError) -> Self {
        IngestError::Invalid {
            row: source.index(),
            source,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnRef {
    Name(String),
    Index(usize),
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnRef::Name(n) => f.write_str(n),
            ColumnRef::Index(i) => write!(f, "#{i}"),
        }
    }
}

impl FromStr for ColumnRef {
    type Err = IngestError;

    /// `#3` selects by index, anything else by header name.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.strip_prefix('#') {
            Some(idx) => idx
                .parse()
                .map(ColumnRef::Index)
                .map_err(|_| IngestError::BadColumnMap(format!("bad column index `{s}`"))),
            None if s.is_empty() => Err(IngestError::BadColumnMap("empty column name".into())),
            None => Ok(ColumnRef::Name(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyMode {
    #[default]
    Cumulative,
    /// Each row holds the energy used since the previous row.
    PerInterval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerformanceScale {
    #[default]
    Fraction,
    Percent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub iteration: ColumnRef,
    pub energy: ColumnRef,
    pub performance: ColumnRef,
    pub energy_mode: EnergyMode,
    pub performance_scale: PerformanceScale,
    /// Whether the first record is a header. Required when any column is named.
    pub has_header: bool,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            iteration: ColumnRef::Name("iter".into()),
            energy: ColumnRef::Name("energy_kwh".into()),
            performance: ColumnRef::Name("performance".into()),
            energy_mode: EnergyMode::Cumulative,
            performance_scale: PerformanceScale::Fraction,
            has_header: true,
        }
    }
}

impl ColumnMap {
    pub fn validate(&self) -> Result<(), IngestError> {
        let cols = [&self.iteration, &self.energy, &self.performance];
        for (i, a) in cols.iter().enumerate() {
            if cols[i + 1..].contains(a) {
                return Err(IngestError::DuplicateColumn(a.to_string()));
            }
        }
        let named = cols.iter().any(|c| matches!(c, ColumnRef::Name(_)));
        if named && !self.has_header {
            return Err(IngestError::BadColumnMap(
                "named columns need a header row".into(),
            ));
        }
        Ok(())
    }

    /// Applies a `key=column,...` spec on top of `self`. Keys are
    /// `iter`/`iteration`, `energy`, `perf`/`performance`; `#N` picks by index.
    pub fn with_spec(mut self, spec: &str) -> Result<Self, IngestError> {
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, col) = part.split_once('=').ok_or_else(|| {
                IngestError::BadColumnMap(format!("expected key=column, got `{part}`"))
            })?;
            let col: ColumnRef = col.trim().parse()?;
            match key.trim() {
                "iter" | "iteration" => self.iteration = col,
                "energy" | "energy_kwh" => self.energy = col,
                "perf" | "performance" => self.performance = col,
                other => {
                    return Err(IngestError::BadColumnMap(format!(
                        "unknown column key `{other}`"
                    )))
                }
            }
        }
        self.validate()?;
        Ok(self)
    }
}

fn resolve_column(col: &ColumnRef, headers: Option<&csv::StringRecord>) -> Result<usize, IngestError> {
    match col {
        ColumnRef::Index(i) => Ok(*i),
        ColumnRef::Name(name) => headers
            .and_then(|h| h.iter().position(|c| c.trim() == name))
            .ok_or_else(|| IngestError::MissingColumn(name.clone())),
    }
}

fn field<'r>(
    record: &'r csv::StringRecord,
    idx: usize,
    col: &ColumnRef,
) -> Result<&'r str, IngestError> {
    record
        .get(idx)
        .map(str::trim)
        .ok_or_else(|| IngestError::MissingColumn(col.to_string()))
}

/// Parses a delimited trace file. CRLF and LF line endings are both accepted.
pub fn parse_csv(bytes: &[u8], map: &ColumnMap, label: &str) -> Result<Trace, IngestError> {
    map.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(map.has_header)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(bytes);
    let headers = if map.has_header {
        Some(
            reader
                .headers()
                .map_err(|e| IngestError::Csv(e.to_string()))?
                .clone(),
        )
    } else {
        None
    };
    let it_col = resolve_column(&map.iteration, headers.as_ref())?;
    let en_col = resolve_column(&map.energy, headers.as_ref())?;
    let pf_col = resolve_column(&map.performance, headers.as_ref())?;

    let mut points = Vec::new();
    let mut running = 0.0;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| IngestError::Csv(e.to_string()))?;
        let number = |idx: usize, col: &ColumnRef| -> Result<f64, IngestError> {
            let text = field(&record, idx, col)?;
            text.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| IngestError::UnparsableNumber {
                    row,
                    column: col.to_string(),
                    text: text.to_string(),
                })
        };
        let it_text = field(&record, it_col, &map.iteration)?;
        let iteration = parse_iteration(it_text).ok_or_else(|| IngestError::UnparsableNumber {
            row,
            column: map.iteration.to_string(),
            text: it_text.to_string(),
        })?;
        let raw_energy = number(en_col, &map.energy)?;
        let energy_kwh = match map.energy_mode {
            EnergyMode::Cumulative => raw_energy,
            EnergyMode::PerInterval => {
                running += raw_energy;
                running
            }
        };
        let raw_perf = number(pf_col, &map.performance)?;
        let performance = match map.performance_scale {
            PerformanceScale::Fraction => raw_perf,
            PerformanceScale::Percent => raw_perf / 100.0,
        };
        points.push(TracePoint::new(iteration, energy_kwh, performance));
    }
    validate_trace(points, label, PerformanceKind::Other).map_err(IngestError::invalid)
}

/// Accepts plain integers and integral floats such as `100.0`.
fn parse_iteration(text: &str) -> Option<u64> {
    text.parse::<u64>().ok().or_else(|| {
        let v: f64 = text.parse().ok()?;
        (v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v < u64::MAX as f64).then_some(v as u64)
    })
}

/// Writes the default schema with LF line endings.
pub fn emit_csv(trace: &Trace) -> String {
    let mut out = String::from("iter,energy_kwh,performance\n");
    for p in trace.points() {
        out.push_str(&format!("{},{},{}\n", p.iteration, p.energy_kwh, p.performance));
    }
    out
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> IngestError {
    IngestError::SchemaViolation {
        path: path.into(),
        message: message.into(),
    }
}

fn json_number(obj: &Map<String, Value>, key: &str, base: &str) -> Result<f64, IngestError> {
    let path = format!("{base}/{key}");
    match obj.get(key) {
        None => Err(schema(path, "missing required key")),
        Some(v) => v
            .as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| schema(path, "expected a number")),
    }
}

fn json_points(arr: &[Value], base: &str) -> Result<Vec<TracePoint>, IngestError> {
    arr.iter()
        .enumerate()
        .map(|(i, v)| {
            let here = format!("{base}/{i}");
            let obj = v
                .as_object()
                .ok_or_else(|| schema(here.clone(), "expected an object"))?;
            let iteration = match obj.get("iteration") {
                None => return Err(schema(format!("{here}/iteration"), "missing required key")),
                Some(v) => v.as_u64().ok_or_else(|| {
                    schema(format!("{here}/iteration"), "expected a non-negative integer")
                })?,
            };
            Ok(TracePoint::new(
                iteration,
                json_number(obj, "energy_kwh", &here)?,
                json_number(obj, "performance", &here)?,
            ))
        })
        .collect()
}

/// Parses either a bare array of points or an object
/// `{"label", "performance_kind", "params_m", "points": [...]}`.
/// `label` is used when the document carries none.
pub fn parse_json(bytes: &[u8], label: &str) -> Result<Trace, IngestError> {
    let doc: Value = serde_json::from_slice(bytes).map_err(|e| schema("", e.to_string()))?;
    let (points, label, kind, params_m) = match &doc {
        Value::Array(arr) => (json_points(arr, "")?, label.to_string(), PerformanceKind::Other, None),
        Value::Object(obj) => {
            let arr = match obj.get("points") {
                Some(Value::Array(a)) => a,
                Some(_) => return Err(schema("/points", "expected an array")),
                None => return Err(schema("/points", "missing required key")),
            };
            let label = match obj.get("label") {
                None | Some(Value::Null) => label.to_string(),
                Some(Value::String(s)) => s.clone(),
                Some(_) => return Err(schema("/label", "expected a string")),
            };
            let kind = match obj.get("performance_kind") {
                None | Some(Value::Null) => PerformanceKind::Other,
                Some(Value::String(s)) => s
                    .parse()
                    .map_err(|e: String| schema("/performance_kind", e))?,
                Some(_) => return Err(schema("/performance_kind", "expected a string")),
            };
            let params_m = match obj.get("params_m") {
                None | Some(Value::Null) => None,
                Some(v) => Some(
                    v.as_f64()
                        .ok_or_else(|| schema("/params_m", "expected a number"))?,
                ),
            };
            (json_points(arr, "/points")?, label, kind, params_m)
        }
        _ => return Err(schema("", "expected an array or an object")),
    };
    validate_trace(points, label, kind)
        .map(|t| t.with_params_m(params_m))
        .map_err(IngestError::invalid)
}

#[derive(Serialize)]
struct JsonPoint {
    iteration: u64,
    energy_kwh: f64,
    performance: f64,
}

#[derive(Serialize)]
struct JsonTrace<'a> {
    label: &'a str,
    performance_kind: PerformanceKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    params_m: Option<f64>,
    points: Vec<JsonPoint>,
}

/// Object form with key order `iteration, energy_kwh, performance`.
pub fn emit_json(trace: &Trace) -> String {
    let doc = JsonTrace {
        label: trace.label(),
        performance_kind: trace.kind(),
        params_m: trace.params_m(),
        points: trace
            .points()
            .iter()
            .map(|p| JsonPoint {
                iteration: p.iteration,
                energy_kwh: p.energy_kwh,
                performance: p.performance,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("trace serializes");
    s.push('\n');
    s
}

/// Constant draw, or a schedule of `(through_iteration, kW)` segments. The last
/// segment extends to the end of the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PowerSchedule {
    Constant(f64),
    Piecewise(Vec<PowerSegment>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSegment {
    /// Last iteration (inclusive) drawing `power_kw`.
    pub through: u64,
    pub power_kw: f64,
}

impl PowerSchedule {
    fn power_at(&self, iteration: u64) -> f64 {
        match self {
            PowerSchedule::Constant(kw) => *kw,
            PowerSchedule::Piecewise(segs) => segs
                .iter()
                .find(|s| iteration <= s.through)
                .or(segs.last())
                .map_or(0.0, |s| s.power_kw),
        }
    }
}

impl FromStr for PowerSchedule {
    type Err = IngestError;

    /// `2.5` for a constant draw, `1.2@500,3.6` for a schedule.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |m: String| IngestError::BadSyntheticSpec(m);
        if !s.contains(',') && !s.contains('@') {
            let kw = s
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad power `{s}`")))?;
            return Ok(PowerSchedule::Constant(kw));
        }
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let mut segs = Vec::with_capacity(parts.len());
        for (i, part) in parts.iter().enumerate() {
            let (kw, through) = match part.split_once('@') {
                Some((kw, it)) => (
                    kw,
                    it.parse()
                        .map_err(|_| bad(format!("bad segment end `{it}`")))?,
                ),
                None if i + 1 == parts.len() => (*part, u64::MAX),
                None => return Err(bad(format!("segment `{part}` needs @<iteration>"))),
            };
            segs.push(PowerSegment {
                through,
                power_kw: kw.parse().map_err(|_| bad(format!("bad power `{kw}`")))?,
            });
        }
        Ok(PowerSchedule::Piecewise(segs))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerfCurve {
    /// `p_max * (1 - exp(-rate * k))` at iteration `k`.
    Saturating { p_max: f64, rate: f64 },
    /// `slope * k`, clipped to `[0, 1]`.
    Linear { slope: f64 },
    /// `lo` before iteration `at`, `hi` from it on.
    Step { at: u64, lo: f64, hi: f64 },
}

impl PerfCurve {
    pub fn at(&self, k: u64) -> f64 {
        let k = k as f64;
        match *self {
            PerfCurve::Saturating { p_max, rate } => p_max * -(-rate * k).exp_m1(),
            PerfCurve::Linear { slope } => (slope * k).clamp(0.0, 1.0),
            PerfCurve::Step { at, lo, hi } => {
                if k < at as f64 {
                    lo
                } else {
                    hi
                }
            }
        }
    }

    /// `saturating:<p_max>[:<rate>]`, `linear:<slope>`, `step:<at>:<lo>:<hi>`.
    /// A missing saturating rate defaults to `5 / total_iterations`.
    pub fn parse(s: &str, total_iterations: u64) -> Result<Self, IngestError> {
        let bad = || IngestError::BadSyntheticSpec(format!("bad performance curve `{s}`"));
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<f64, IngestError> {
            parts.get(i).ok_or_else(bad)?.parse().map_err(|_| bad())
        };
        match parts[0] {
            "saturating" if parts.len() == 2 || parts.len() == 3 => Ok(PerfCurve::Saturating {
                p_max: num(1)?,
                rate: if parts.len() == 3 {
                    num(2)?
                } else {
                    5.0 / total_iterations.max(1) as f64
                },
            }),
            "linear" if parts.len() == 2 => Ok(PerfCurve::Linear { slope: num(1)? }),
            "step" if parts.len() == 4 => Ok(PerfCurve::Step {
                at: parts[1].parse().map_err(|_| bad())?,
                lo: num(2)?,
                hi: num(3)?,
            }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub label: String,
    /// Iterations are numbered `1..=total_iterations`.
    pub total_iterations: u64,
    pub power: PowerSchedule,
    /// Wall-clock hours per iteration; energy per step is `kW * hours`.
    pub hours_per_iteration: f64,
    pub perf_curve: PerfCurve,
    pub seed: u64,
    /// Standard deviation of Gaussian noise added to performance, then clipped.
    pub noise_sigma: f64,
}

impl SyntheticSpec {
    pub fn new(total_iterations: u64, power: PowerSchedule, perf_curve: PerfCurve) -> Self {
        Self {
            label: "synthetic".into(),
            total_iterations,
            power,
            hours_per_iteration: 1.0 / 3600.0,
            perf_curve,
            seed: 0,
            noise_sigma: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        let bad = |m: &str| Err(IngestError::BadSyntheticSpec(m.into()));
        if self.total_iterations < 2 {
            return bad("need at least 2 iterations");
        }
        if !(self.hours_per_iteration.is_finite() && self.hours_per_iteration > 0.0) {
            return bad("hours per iteration must be positive");
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad("noise sigma must be non-negative");
        }
        match &self.power {
            PowerSchedule::Constant(kw) if !(kw.is_finite() && *kw > 0.0) => {
                return bad("power must be positive")
            }
            PowerSchedule::Piecewise(segs) => {
                if segs.is_empty() {
                    return bad("empty power schedule");
                }
                if segs.iter().any(|s| !(s.power_kw.is_finite() && s.power_kw > 0.0)) {
                    return bad("power must be positive");
                }
                if segs.windows(2).any(|w| w[1].through <= w[0].through) {
                    return bad("schedule segments must end at increasing iterations");
                }
            }
            _ => {}
        }
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        match self.perf_curve {
            PerfCurve::Saturating { p_max, rate } if !unit(p_max) || !(rate.is_finite() && rate > 0.0) => {
                bad("saturating curve needs p_max in [0, 1] and a positive rate")
            }
            PerfCurve::Linear { slope } if !slope.is_finite() => bad("slope must be finite"),
            PerfCurve::Step { lo, hi, .. } if !unit(lo) || !unit(hi) => {
                bad("step levels must lie in [0, 1]")
            }
            _ => Ok(()),
        }
    }
}

/// Deterministic for a fixed spec. Energy within a constant-power stretch is
/// computed by multiplication from the stretch start, so a schedule that
/// totals a round number of kWh ends on it to within a few ulps.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Trace, IngestError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = (spec.noise_sigma > 0.0)
        .then(|| Normal::new(0.0, spec.noise_sigma).expect("sigma validated"));

    let mut points = Vec::with_capacity(spec.total_iterations as usize);
    let mut stretch_base = 0.0;
    let mut stretch_start = 1;
    let mut stretch_power = spec.power.power_at(1);
    for k in 1..=spec.total_iterations {
        let kw = spec.power.power_at(k);
        if kw != stretch_power {
            stretch_base += stretch_power * spec.hours_per_iteration * (k - stretch_start) as f64;
            stretch_start = k;
            stretch_power = kw;
        }
        let energy =
            stretch_base + stretch_power * spec.hours_per_iteration * (k - stretch_start + 1) as f64;
        let mut perf = spec.perf_curve.at(k);
        if let Some(n) = &noise {
            perf += n.sample(&mut rng);
        }
        points.push(TracePoint::new(k, energy, perf.clamp(0.0, 1.0)));
    }
    validate_trace(points, spec.label.clone(), PerformanceKind::Accuracy).map_err(IngestError::invalid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn percent_map() -> ColumnMap {
        ColumnMap {
            performance_scale: PerformanceScale::Percent,
            ..ColumnMap::default()
        }
        .with_spec("iter=iter,energy=kwh,perf=acc")
        .unwrap()
    }

    #[test]
    fn csv_direct_mapping() {
        let t = parse_csv(b"iter,kwh,acc\n0,0.0,10\n1,0.1,50", &percent_map(), "run").unwrap();
        assert_eq!(
            t.points(),
            &[TracePoint::new(0, 0.0, 0.10), TracePoint::new(1, 0.1, 0.50)]
        );
        assert_eq!(t.label(), "run");
    }

    #[test]
    fn csv_crlf_and_quotes() {
        let t = parse_csv(
            b"iter,energy_kwh,performance\r\n\"0\",0,0.1\r\n1,\"0.25\",0.5\r\n",
            &ColumnMap::default(),
            "r",
        )
        .unwrap();
        assert_eq!(t.points()[1], TracePoint::new(1, 0.25, 0.5));
    }

    #[test]
    fn per_interval_energy_is_prefix_summed() {
        let map = ColumnMap {
            energy_mode: EnergyMode::PerInterval,
            ..ColumnMap::default()
        };
        let t = parse_csv(
            b"iter,energy_kwh,performance\n1,0.1,0.2\n2,0.1,0.3\n3,0.2,0.4\n",
            &map,
            "r",
        )
        .unwrap();
        let e: Vec<f64> = t.points().iter().map(|p| p.energy_kwh).collect();
        assert!((e[0] - 0.1).abs() < 1e-15 && (e[1] - 0.2).abs() < 1e-15 && (e[2] - 0.4).abs() < 1e-15);

        let err = parse_csv(
            b"iter,energy_kwh,performance\n1,0.1,0.2\n2,-0.05,0.3\n",
            &map,
            "r",
        )
        .unwrap_err();
        assert_eq!(err.code(), "NonMonotoneEnergy");
        assert_eq!(err.location().as_deref(), Some("row 1"));
    }

    #[test]
    fn percent_over_hundred_is_out_of_range() {
        let err = parse_csv(b"iter,kwh,acc\n0,0.0,10\n1,0.1,101", &percent_map(), "r").unwrap_err();
        assert_eq!(err.code(), "PerformanceOutOfRange");
    }

    #[test]
    fn csv_errors() {
        let err = parse_csv(b"iter,kwh\n0,0.0\n", &ColumnMap::default(), "r").unwrap_err();
        assert!(matches!(err, IngestError::MissingColumn(ref c) if c == "energy_kwh"));
        let err = parse_csv(
            b"iter,energy_kwh,performance\n0,0.0,0.1\n1,abc,0.2\n",
            &ColumnMap::default(),
            "r",
        )
        .unwrap_err();
        assert_eq!(err.code(), "UnparsableNumber");
        assert_eq!(err.location().as_deref(), Some("row 1"));
        let err = ColumnMap::default().with_spec("iter=a,energy=a").unwrap_err();
        assert_eq!(err.code(), "DuplicateColumn");
    }

    #[test]
    fn csv_by_index_without_header() {
        let map = ColumnMap {
            has_header: false,
            ..ColumnMap::default()
        }
        .with_spec("iter=#2,energy=#0,perf=#1")
        .unwrap();
        let t = parse_csv(b"0.0,0.3,5\n0.5,0.6,10\n", &map, "r").unwrap();
        assert_eq!(t.points()[1], TracePoint::new(10, 0.5, 0.6));
    }

    #[test]
    fn json_bare_array() {
        let doc = br#"[{"iteration":0,"energy_kwh":0,"performance":0.1},{"iteration":1,"energy_kwh":0.1,"performance":0.5}]"#;
        let t = parse_json(doc, "x").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.label(), "x");
    }

    #[test]
    fn json_schema_violations() {
        let doc = br#"[{"iteration":0,"performance":0.1},{"iteration":1,"energy_kwh":0.1,"performance":0.5}]"#;
        match parse_json(doc, "x").unwrap_err() {
            IngestError::SchemaViolation { path, .. } => assert_eq!(path, "/0/energy_kwh"),
            other => panic!("{other:?}"),
        }
        let doc = br#"{"points":[{"iteration":-1,"energy_kwh":0,"performance":0.1}]}"#;
        match parse_json(doc, "x").unwrap_err() {
            IngestError::SchemaViolation { path, .. } => assert_eq!(path, "/points/0/iteration"),
            other => panic!("{other:?}"),
        }
        assert_eq!(parse_json(b"42", "x").unwrap_err().code(), "SchemaViolation");
        assert_eq!(parse_json(b"{not json", "x").unwrap_err().code(), "SchemaViolation");
    }

    #[test]
    fn json_object_form_carries_metadata() {
        let doc = br#"{"label":"swin","performance_kind":"accuracy","params_m":87.77,
            "points":[{"iteration":1,"energy_kwh":0.5,"performance":0.8},{"iteration":2,"energy_kwh":1.13,"performance":0.843}]}"#;
        let t = parse_json(doc, "fallback").unwrap();
        assert_eq!(t.label(), "swin");
        assert_eq!(t.kind(), PerformanceKind::Accuracy);
        assert_eq!(t.params_m(), Some(87.77));
    }

    #[test]
    fn emitted_json_has_stable_key_order() {
        let t = validate_trace(
            vec![TracePoint::new(0, 0.0, 0.1), TracePoint::new(1, 0.1, 0.5)],
            "k",
            PerformanceKind::Other,
        )
        .unwrap();
        let s = emit_json(&t);
        let i = s.find("\"iteration\"").unwrap();
        let e = s.find("\"energy_kwh\"").unwrap();
        let p = s.find("\"performance\": ").unwrap();
        assert!(i < e && e < p);
    }

    #[test]
    fn synthetic_saturating_is_monotone_and_capped() {
        let spec = SyntheticSpec::new(
            2000,
            PowerSchedule::Constant(1.0),
            PerfCurve::Saturating { p_max: 0.9, rate: 0.01 },
        );
        let t = generate_synthetic(&spec).unwrap();
        let p: Vec<f64> = t.points().iter().map(|x| x.performance).collect();
        assert!(p.windows(2).all(|w| w[1] >= w[0]));
        assert!(p.iter().all(|&v| v <= 0.9));
        assert!((0.9 - p.last().unwrap()) < 1e-8);
    }

    #[test]
    fn synthetic_total_energy_hits_schedule_sum() {
        let spec = SyntheticSpec::new(
            1000,
            PowerSchedule::Constant(3.6),
            PerfCurve::Linear { slope: 0.001 },
        );
        let t = generate_synthetic(&spec).unwrap();
        assert!((t.last().energy_kwh - 1.0).abs() <= 1e-12);

        // 400 iterations at 1.8 kW + 600 at 4.8 kW = 0.2 + 0.8 kWh
        let sched: PowerSchedule = "1.8@400,4.8".parse().unwrap();
        let t = generate_synthetic(&SyntheticSpec::new(1000, sched, PerfCurve::Linear { slope: 0.001 })).unwrap();
        assert!((t.last().energy_kwh - 1.0).abs() <= 1e-12);
        assert!((t.points()[399].energy_kwh - 0.2).abs() <= 1e-12);
    }

    #[test]
    fn synthetic_is_seed_deterministic() {
        let mut spec = SyntheticSpec::new(
            300,
            PowerSchedule::Constant(2.0),
            PerfCurve::Saturating { p_max: 0.8, rate: 0.02 },
        );
        spec.noise_sigma = 0.05;
        spec.seed = 7;
        assert_eq!(generate_synthetic(&spec).unwrap(), generate_synthetic(&spec).unwrap());
        spec.seed = 8;
        let other = generate_synthetic(&spec).unwrap();
        spec.seed = 7;
        assert_ne!(generate_synthetic(&spec).unwrap(), other);
    }

    #[test]
    fn synthetic_spec_validation() {
        let spec = SyntheticSpec::new(1, PowerSchedule::Constant(1.0), PerfCurve::Linear { slope: 0.1 });
        assert_eq!(generate_synthetic(&spec).unwrap_err().code(), "BadSyntheticSpec");
        let spec = SyntheticSpec::new(10, PowerSchedule::Constant(-1.0), PerfCurve::Linear { slope: 0.1 });
        assert!(spec.validate().is_err());
        assert!(PerfCurve::parse("wiggle:3", 10).is_err());
        assert_eq!(
            PerfCurve::parse("step:5:0.1:0.9", 10).unwrap(),
            PerfCurve::Step { at: 5, lo: 0.1, hi: 0.9 }
        );
    }

    fn arb_spec() -> impl Strategy<Value = SyntheticSpec> {
        (
            2u64..400,
            0.01f64..20.0,
            0.0f64..=1.0,
            1e-4f64..0.5,
            0u64..1000,
            0.0f64..0.2,
            0usize..3,
        )
            .prop_map(|(n, kw, pmax, rate, seed, sigma, which)| {
                let curve = match which {
                    0 => PerfCurve::Saturating { p_max: pmax, rate },
                    1 => PerfCurve::Linear { slope: rate / 10.0 },
                    _ => PerfCurve::Step { at: n / 2, lo: pmax / 2.0, hi: pmax },
                };
                let mut s = SyntheticSpec::new(n, PowerSchedule::Constant(kw), curve);
                s.seed = seed;
                s.noise_sigma = sigma;
                s
            })
    }

    proptest! {
        #[test]
        fn synthetic_always_validates(spec in arb_spec()) {
            let t = generate_synthetic(&spec).unwrap();
            prop_assert_eq!(t.len() as u64, spec.total_iterations);
        }

        #[test]
        fn csv_round_trip(spec in arb_spec()) {
            let t = generate_synthetic(&spec).unwrap();
            let back = parse_csv(emit_csv(&t).as_bytes(), &ColumnMap::default(), t.label()).unwrap();
            prop_assert_eq!(back.points(), t.points());
        }

        #[test]
        fn json_round_trip(spec in arb_spec()) {
            let t = generate_synthetic(&spec).unwrap();
            let back = parse_json(emit_json(&t).as_bytes(), "ignored").unwrap();
            prop_assert_eq!(back, t);
        }
    }
}
