//! Per-trace metric reports, comparison tables and their renderings.
//!
//! JSON output always carries fractions. Percentages with two decimals only
//! appear in the human-facing table layouts (text and table CSV).

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::ablation::{RankTable, SweepResult};
use crate::curve::{asc_of_trace, CurveConfig, SustainabilityCurve};
use crate::metrics::{
    fms_of_trace, sam_metric, score_metric, si_metric, BaselineConfig, FmsConfig, MetricError,
};
use crate::trace::{PerformanceKind, Trace};

/// Everything needed to reproduce a report.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EvaluationConfig {
    pub fms: FmsConfig,
    pub baseline: BaselineConfig,
    pub curve: CurveConfig,
}

/// A metric value, or the reason it is undefined for this trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricCell {
    Value(f64),
    Error { error: String },
}

impl MetricCell {
    pub fn value(&self) -> Option<f64> {
        match self {
            MetricCell::Value(v) => Some(*v),
            MetricCell::Error { .. } => None,
        }
    }

    pub fn error(&self) -> Option<&str> {
        match self {
            MetricCell::Value(_) => None,
            MetricCell::Error { error } => Some(error),
        }
    }
}

impl From<Result<f64, MetricError>> for MetricCell {
    fn from(r: Result<f64, MetricError>) -> Self {
        match r {
            Ok(v) => MetricCell::Value(v),
            Err(e) => MetricCell::Error {
                error: e.code().to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub label: String,
    pub performance_kind: PerformanceKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params_m: Option<f64>,
    pub fms: f64,
    pub asc: f64,
    pub score: MetricCell,
    pub si: MetricCell,
    pub sam: MetricCell,
    pub iteration_at_eval: u64,
    pub energy_at_eval_kwh: f64,
    pub performance_at_eval: f64,
    pub alpha_used: f64,
    pub energy_metric_at_eval: f64,
    pub config: EvaluationConfig,
}

/// All five metrics for one trace. Baselines are evaluated at the same
/// best-performance checkpoint as FMS.
pub fn evaluate_trace(trace: &Trace, config: &EvaluationConfig) -> Result<MetricReport, MetricError> {
    config.baseline.validate()?;
    let fms = fms_of_trace(trace, &config.fms)?;
    let asc = asc_of_trace(trace, &config.curve)?;
    let (p, w) = (fms.eval_point.performance, fms.eval_point.energy_kwh);
    Ok(MetricReport {
        label: trace.label().to_string(),
        performance_kind: trace.kind(),
        params_m: trace.params_m(),
        fms: fms.value,
        asc: asc.value,
        score: score_metric(p, w).into(),
        si: si_metric(p, w, &config.baseline).into(),
        sam: sam_metric(p, w, &config.baseline).into(),
        iteration_at_eval: fms.eval_point.iteration,
        energy_at_eval_kwh: w,
        performance_at_eval: p,
        alpha_used: fms.alpha,
        energy_metric_at_eval: fms.energy_metric,
        config: *config,
    })
}

fn json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn cell_full(c: &MetricCell) -> String {
    match c {
        MetricCell::Value(v) => v.to_string(),
        MetricCell::Error { error } => format!("ERR:{error}"),
    }
}

pub fn report_json(r: &MetricReport) -> String {
    json_line(r)
}

pub fn report_csv(r: &MetricReport) -> String {
    format!(
        "label,fms,asc,score,si,sam,iteration_at_eval,energy_at_eval_kwh,performance_at_eval,alpha_used,beta,n_partitions,w_max,rule\n{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        csv_field(&r.label),
        r.fms,
        r.asc,
        cell_full(&r.score),
        cell_full(&r.si),
        cell_full(&r.sam),
        r.iteration_at_eval,
        r.energy_at_eval_kwh,
        r.performance_at_eval,
        r.alpha_used,
        r.config.fms.beta,
        r.config.curve.n_partitions,
        r.config.curve.w_max,
        r.config.curve.rule.as_str(),
    )
}

pub fn report_text(r: &MetricReport) -> String {
    let cell = |c: &MetricCell| match c {
        MetricCell::Value(v) => format!("{v:.4}"),
        MetricCell::Error { error } => format!("undefined ({error})"),
    };
    let mut out = String::new();
    let rows: Vec<(&str, String)> = vec![
        ("trace", r.label.clone()),
        ("performance kind", r.performance_kind.to_string()),
        ("FMS (%)", format!("{:.2}", r.fms * 100.0)),
        ("ASC (%)", format!("{:.2}", r.asc * 100.0)),
        ("Score", cell(&r.score)),
        ("SI", cell(&r.si)),
        ("SAM", cell(&r.sam)),
        ("eval iteration", r.iteration_at_eval.to_string()),
        ("eval energy (kWh)", format!("{:.6}", r.energy_at_eval_kwh)),
        ("eval performance (%)", format!("{:.2}", r.performance_at_eval * 100.0)),
        ("alpha", format!("{:.6}", r.alpha_used)),
        ("E(w) (%)", format!("{:.2}", r.energy_metric_at_eval * 100.0)),
        ("beta", r.config.fms.beta.to_string()),
        ("N", r.config.curve.n_partitions.to_string()),
        ("w_max (kWh)", r.config.curve.w_max.to_string()),
        ("rule", r.config.curve.rule.as_str().to_string()),
    ];
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in rows {
        let _ = writeln!(out, "{k:<width$}  {v}");
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortKey {
    #[default]
    Fms,
    Asc,
    Score,
    Si,
    Sam,
}

impl SortKey {
    pub const ALL: [SortKey; 5] = [SortKey::Score, SortKey::Si, SortKey::Sam, SortKey::Fms, SortKey::Asc];

    pub fn as_str(&self) -> &'static str {
        match self {
            SortKey::Fms => "fms",
            SortKey::Asc => "asc",
            SortKey::Score => "score",
            SortKey::Si => "si",
            SortKey::Sam => "sam",
        }
    }

    fn of(&self, r: &MetricReport) -> Option<f64> {
        match self {
            SortKey::Fms => Some(r.fms),
            SortKey::Asc => Some(r.asc),
            SortKey::Score => r.score.value(),
            SortKey::Si => r.si.value(),
            SortKey::Sam => r.sam.value(),
        }
    }
}

impl std::str::FromStr for SortKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fms" => Ok(SortKey::Fms),
            "asc" => Ok(SortKey::Asc),
            "score" => Ok(SortKey::Score),
            "si" => Ok(SortKey::Si),
            "sam" => Ok(SortKey::Sam),
            other => Err(format!("unknown sort key `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub rank: usize,
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params_m: Option<f64>,
    pub train_energy_kwh: f64,
    pub performance: f64,
    pub score: MetricCell,
    pub si: MetricCell,
    pub sam: MetricCell,
    pub fms: f64,
    pub asc: f64,
    /// Metric columns in which this row holds the best value.
    pub best: Vec<SortKey>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareTable {
    pub sort_by: SortKey,
    pub config: EvaluationConfig,
    pub rows: Vec<CompareRow>,
}

fn desc_option(a: Option<f64>, b: Option<f64>) -> Ordering {
    match (a, b) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}

/// Ranks reports by `sort_by`, descending. The ordering depends only on the
/// report contents, never on input order.
pub fn compare_table(mut reports: Vec<MetricReport>, sort_by: SortKey, config: EvaluationConfig) -> CompareTable {
    reports.sort_by(|a, b| {
        desc_option(sort_by.of(a), sort_by.of(b))
            .then_with(|| a.label.cmp(&b.label))
            .then_with(|| {
                SortKey::ALL
                    .iter()
                    .fold(Ordering::Equal, |o, k| o.then_with(|| desc_option(k.of(a), k.of(b))))
            })
            .then_with(|| a.energy_at_eval_kwh.total_cmp(&b.energy_at_eval_kwh))
    });
    let best_value = |k: SortKey| {
        reports
            .iter()
            .filter_map(|r| k.of(r))
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
    };
    let bests: Vec<(SortKey, Option<f64>)> = SortKey::ALL.iter().map(|&k| (k, best_value(k))).collect();
    let rows = reports
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let best = bests
                .iter()
                .filter(|(k, b)| b.is_some() && k.of(&r) == *b)
                .map(|(k, _)| *k)
                .collect();
            CompareRow {
                rank: i + 1,
                label: r.label,
                params_m: r.params_m,
                train_energy_kwh: r.energy_at_eval_kwh,
                performance: r.performance_at_eval,
                score: r.score,
                si: r.si,
                sam: r.sam,
                fms: r.fms,
                asc: r.asc,
                best,
            }
        })
        .collect();
    CompareTable {
        sort_by,
        config,
        rows,
    }
}

pub fn compare_json(t: &CompareTable) -> String {
    json_line(t)
}

const TABLE_HEADER: [&str; 10] = [
    "Rank", "Model", "Params (M)", "TE (kWh)", "Perf (%)", "Score", "SI", "SAM", "FMS (%)", "ASC (%)",
];

fn table_cells(row: &CompareRow, marker: &str) -> [String; 10] {
    let mark = |k: SortKey, s: String| {
        if row.best.contains(&k) {
            format!("{s}{marker}")
        } else {
            s
        }
    };
    let cell = |k: SortKey, c: &MetricCell| match c {
        MetricCell::Value(v) => mark(k, format!("{v:.2}")),
        MetricCell::Error { error } => format!("ERR:{error}"),
    };
    [
        row.rank.to_string(),
        row.label.clone(),
        row.params_m.map_or_else(|| "-".into(), |v| format!("{v:.2}")),
        format!("{:.2}", row.train_energy_kwh),
        format!("{:.2}", row.performance * 100.0),
        cell(SortKey::Score, &row.score),
        cell(SortKey::Si, &row.si),
        cell(SortKey::Sam, &row.sam),
        mark(SortKey::Fms, format!("{:.2}", row.fms * 100.0)),
        mark(SortKey::Asc, format!("{:.2}", row.asc * 100.0)),
    ]
}

/// Table layout: one row per trace, best value per metric column marked `*`.
pub fn compare_text(t: &CompareTable) -> String {
    let body: Vec<[String; 10]> = t.rows.iter().map(|r| table_cells(r, "*")).collect();
    let mut widths = TABLE_HEADER.map(str::len);
    for row in &body {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let line = |cells: &[String], out: &mut String| {
        let parts: Vec<String> = cells
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 1 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&TABLE_HEADER.map(String::from), &mut out);
    for row in &body {
        line(row, &mut out);
    }
    let _ = writeln!(out, "\nsorted by {} (descending); * marks the best value per metric", t.sort_by.as_str());
    let errors: Vec<String> = t
        .rows
        .iter()
        .flat_map(|r| {
            [("Score", &r.score), ("SI", &r.si), ("SAM", &r.sam)]
                .into_iter()
                .filter_map(move |(name, c)| c.error().map(|e| format!("{}: {name} undefined ({e})", r.label)))
        })
        .collect();
    for e in errors {
        let _ = writeln!(out, "  {e}");
    }
    if t.rows.iter().any(|r| r.sam.value().is_some_and(|v| v < 0.0)) {
        let _ = writeln!(out, "  negative SAM values occur whenever TE < 1 kWh");
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Same layout as the text table, comma separated, with a `best` column.
pub fn compare_csv(t: &CompareTable) -> String {
    let mut out = String::from("rank,label,params_m,te_kwh,performance_pct,score,si,sam,fms_pct,asc_pct,best\n");
    for r in &t.rows {
        let cells = table_cells(r, "");
        let best: Vec<&str> = r.best.iter().map(SortKey::as_str).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            cells[0],
            csv_field(&cells[1]),
            if r.params_m.is_some() { cells[2].as_str() } else { "" },
            cells[3],
            cells[4],
            cells[5],
            cells[6],
            cells[7],
            cells[8],
            cells[9],
            best.join(";")
        );
    }
    out
}

/// Long format: `trace,parameter,value,metric,result,error`. Errored cells
/// leave `result` empty and name the error code.
pub fn sweep_csv(s: &SweepResult) -> String {
    let mut out = String::from("trace,parameter,value,metric,result,error\n");
    for r in &s.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            csv_field(&r.trace),
            r.parameter.as_str(),
            r.value,
            r.metric.as_str(),
            r.result.map(|v| v.to_string()).unwrap_or_default(),
            r.error.as_ref().map(|e| e.code.as_str()).unwrap_or_default()
        );
    }
    out
}

pub fn sweep_json(s: &SweepResult) -> String {
    json_line(s)
}

pub fn sweep_text(s: &SweepResult) -> String {
    let mut out = String::new();
    let width = s.rows.iter().map(|r| r.trace.len()).max().unwrap_or(5).max(5);
    let _ = writeln!(out, "{:<width$}  {:>12}  {:>10}", "trace", s.parameter.as_str(), s.metric.as_str());
    for r in &s.rows {
        let v = match (&r.result, &r.error) {
            (Some(v), _) => format!("{v:.6}"),
            (None, Some(e)) => e.code.clone(),
            (None, None) => "-".into(),
        };
        let _ = writeln!(out, "{:<width$}  {:>12}  {:>10}", r.trace, r.value, v);
    }
    out
}

pub fn ranks_csv(t: &RankTable) -> String {
    let mut out = String::from("value,order,differs_from_base\n");
    let _ = writeln!(out, "base,{},false", t.base_order.join(">"));
    for r in &t.rows {
        let _ = writeln!(out, "{},{},{}", r.value, r.order.join(">"), r.differs_from_base);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveReport {
    pub label: String,
    pub asc: f64,
    pub config: CurveConfig,
    pub boundaries: Vec<usize>,
    pub points: Vec<CurveExportPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveExportPoint {
    pub x_normalized: f64,
    pub performance: f64,
}

pub fn curve_report(label: &str, asc: f64, curve: &SustainabilityCurve, config: CurveConfig) -> CurveReport {
    CurveReport {
        label: label.to_string(),
        asc,
        config,
        boundaries: curve.boundaries().to_vec(),
        points: curve
            .points()
            .iter()
            .map(|p| CurveExportPoint {
                x_normalized: p.x,
                performance: p.performance,
            })
            .collect(),
    }
}

/// `x_normalized,performance` rows followed by one `#`-prefixed metadata record.
pub fn curve_csv(c: &CurveReport) -> String {
    let mut out = String::from("x_normalized,performance\n");
    for p in &c.points {
        let _ = writeln!(out, "{},{}", p.x_normalized, p.performance);
    }
    let _ = writeln!(
        out,
        "# label={} asc={} rule={} n_partitions={} w_max={}",
        c.label,
        c.asc,
        c.config.rule.as_str(),
        c.config.n_partitions,
        c.config.w_max
    );
    out
}

pub fn curve_json(c: &CurveReport) -> String {
    json_line(c)
}
