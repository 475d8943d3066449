//! Parameter sweeps over the FMS and ASC configuration.
//!
//! Every `(trace, value)` cell is evaluated independently with the rest of the
//! configuration held at its base. A failing cell is recorded in its row and
//! never aborts the sweep.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{asc_of_trace, CurveConfig};
use crate::metrics::{fms_of_trace, resolve_alpha, AlphaPolicy, FmsConfig, MetricError};
use crate::trace::{rescale_energy, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Alpha,
    Beta,
    Wmax,
    NPartitions,
}

impl SweepParameter {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParameter::Alpha => "alpha",
            SweepParameter::Beta => "beta",
            SweepParameter::Wmax => "wmax",
            SweepParameter::NPartitions => "n",
        }
    }

    pub fn metric(&self) -> SweptMetric {
        match self {
            SweepParameter::Alpha | SweepParameter::Beta => SweptMetric::Fms,
            SweepParameter::Wmax | SweepParameter::NPartitions => SweptMetric::Asc,
        }
    }
}

impl std::str::FromStr for SweepParameter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "alpha" => Ok(SweepParameter::Alpha),
            "beta" => Ok(SweepParameter::Beta),
            "wmax" | "w_max" => Ok(SweepParameter::Wmax),
            "n" | "n_partitions" => Ok(SweepParameter::NPartitions),
            other => Err(format!("unknown sweep parameter `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptMetric {
    Fms,
    Asc,
}

impl SweptMetric {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweptMetric::Fms => "fms",
            SweptMetric::Asc => "asc",
        }
    }
}

/// How alpha sweep values are read.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlphaSweepMode {
    /// Values are decay rates.
    #[default]
    Raw,
    /// Values are anchor iterations; alpha is `factor` times the energy there.
    AnchorIteration { factor: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("sweep needs at least one value")]
    NoValues,
    #[error("sweep values must be strictly increasing (index {0})")]
    NotIncreasing(usize),
    #[error("sweep value {0} is not positive and finite")]
    NonPositive(f64),
    #[error("sweep value {0} is not an integer")]
    NotInteger(f64),
    #[error("rank check needs at least 2 traces")]
    TooFewTraces,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    parameter: SweepParameter,
    values: Vec<f64>,
    pub base_fms: FmsConfig,
    pub base_curve: CurveConfig,
    pub alpha_mode: AlphaSweepMode,
}

impl SweepSpec {
    pub fn new(
        parameter: SweepParameter,
        values: Vec<f64>,
        base_fms: FmsConfig,
        base_curve: CurveConfig,
    ) -> Result<Self, SweepError> {
        if values.is_empty() {
            return Err(SweepError::NoValues);
        }
        for (i, &v) in values.iter().enumerate() {
            if !(v.is_finite() && v > 0.0) {
                return Err(SweepError::NonPositive(v));
            }
            if i > 0 && values[i - 1] >= v {
                return Err(SweepError::NotIncreasing(i));
            }
        }
        if parameter == SweepParameter::NPartitions {
            if let Some(&v) = values.iter().find(|v| v.fract() != 0.0) {
                return Err(SweepError::NotInteger(v));
            }
        }
        Ok(Self {
            parameter,
            values,
            base_fms,
            base_curve,
            alpha_mode: AlphaSweepMode::Raw,
        })
    }

    /// Reads alpha values as anchor iterations.
    pub fn anchored(mut self, factor: f64) -> Result<Self, SweepError> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(SweepError::NonPositive(factor));
        }
        if self.parameter == SweepParameter::Alpha {
            if let Some(&v) = self.values.iter().find(|v| v.fract() != 0.0) {
                return Err(SweepError::NotInteger(v));
            }
        }
        self.alpha_mode = AlphaSweepMode::AnchorIteration { factor };
        Ok(self)
    }

    pub fn parameter(&self) -> SweepParameter {
        self.parameter
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn fms_config_at(&self, value: f64) -> FmsConfig {
        let mut cfg = self.base_fms;
        match self.parameter {
            SweepParameter::Alpha => {
                cfg.alpha_policy = match self.alpha_mode {
                    AlphaSweepMode::Raw => AlphaPolicy::fixed(value),
                    AlphaSweepMode::AnchorIteration { factor } => {
                        AlphaPolicy::at_iteration(value as u64, factor)
                    }
                }
            }
            SweepParameter::Beta => cfg.beta = value,
            _ => {}
        }
        cfg
    }

    fn curve_config_at(&self, value: f64) -> CurveConfig {
        let mut cfg = self.base_curve;
        match self.parameter {
            SweepParameter::Wmax => cfg.w_max = value,
            SweepParameter::NPartitions => cfg.n_partitions = value as usize,
            _ => {}
        }
        cfg
    }

    /// Metric value of one cell.
    pub fn evaluate(&self, trace: &Trace, value: f64) -> Result<f64, MetricError> {
        match self.parameter.metric() {
            SweptMetric::Fms => fms_of_trace(trace, &self.fms_config_at(value)).map(|o| o.value),
            SweptMetric::Asc => asc_of_trace(trace, &self.curve_config_at(value)).map(|o| o.value),
        }
    }

    /// Metric value under the unswept base configuration.
    pub fn evaluate_base(&self, trace: &Trace) -> Result<f64, MetricError> {
        match self.parameter.metric() {
            SweptMetric::Fms => fms_of_trace(trace, &self.base_fms).map(|o| o.value),
            SweptMetric::Asc => asc_of_trace(trace, &self.base_curve).map(|o| o.value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellError {
    pub code: String,
    pub message: String,
}

impl From<&MetricError> for CellError {
    fn from(e: &MetricError) -> Self {
        CellError {
            code: e.code().to_string(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub trace: String,
    pub parameter: SweepParameter,
    pub value: f64,
    pub metric: SweptMetric,
    pub result: Option<f64>,
    pub error: Option<CellError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub parameter: SweepParameter,
    pub metric: SweptMetric,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Rows of one trace, in sweep order.
    pub fn for_trace<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a SweepRow> + 'a {
        self.rows.iter().filter(move |r| r.trace == label)
    }
}

/// Rows are ordered by trace (input order), then by sweep value.
pub fn sweep(traces: &[Trace], spec: &SweepSpec) -> SweepResult {
    let metric = spec.parameter.metric();
    let rows = traces
        .iter()
        .flat_map(|t| {
            spec.values.iter().map(move |&value| {
                let outcome = spec.evaluate(t, value);
                SweepRow {
                    trace: t.label().to_string(),
                    parameter: spec.parameter,
                    value,
                    metric,
                    error: outcome.as_ref().err().map(CellError::from),
                    result: outcome.ok(),
                }
            })
        })
        .collect();
    SweepResult {
        parameter: spec.parameter,
        metric,
        rows,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub value: f64,
    /// Trace labels, best first.
    pub order: Vec<String>,
    pub differs_from_base: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub base_order: Vec<String>,
    pub rows: Vec<RankRow>,
}

impl RankTable {
    /// First sweep value at which the ordering departs from the base ordering.
    pub fn first_flip(&self) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.differs_from_base)
            .map(|r| r.value)
    }

    pub fn is_stable(&self) -> bool {
        self.rows.iter().all(|r| !r.differs_from_base)
    }
}

/// Descending by metric; errored cells sink to the bottom; ties go by label.
fn rank(labels: &[&str], scores: &[Option<f64>]) -> Vec<String> {
    let mut idx: Vec<usize> = (0..labels.len()).collect();
    idx.sort_by(|&a, &b| {
        let by_score = match (scores[a], scores[b]) {
            (Some(x), Some(y)) => y.total_cmp(&x),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        };
        by_score.then_with(|| labels[a].cmp(labels[b]))
    });
    idx.into_iter().map(|i| labels[i].to_string()).collect()
}

/// Ranking of the traces at every sweep value, flagged against the base ranking.
pub fn rank_preservation_check(traces: &[Trace], spec: &SweepSpec) -> Result<RankTable, SweepError> {
    if traces.len() < 2 {
        return Err(SweepError::TooFewTraces);
    }
    let labels: Vec<&str> = traces.iter().map(|t| t.label()).collect();
    let base_scores: Vec<Option<f64>> = traces.iter().map(|t| spec.evaluate_base(t).ok()).collect();
    let base_order = rank(&labels, &base_scores);
    let rows = spec
        .values
        .iter()
        .map(|&value| {
            let scores: Vec<Option<f64>> =
                traces.iter().map(|t| spec.evaluate(t, value).ok()).collect();
            let order = rank(&labels, &scores);
            RankRow {
                value,
                differs_from_base: order != base_order,
                order,
            }
        })
        .collect();
    Ok(RankTable { base_order, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleRow {
    pub factor: f64,
    /// `|FMS(t, a) - FMS(c t, a / c)|` relative to the unscaled value.
    pub fms_residual: f64,
    /// `|ASC(t, w) - ASC(c t, c w)|` relative to the unscaled value.
    pub asc_residual: f64,
    /// Whether FMS was evaluated at the same checkpoint before and after.
    pub same_eval_point: bool,
}

fn relative(a: f64, b: f64) -> f64 {
    let diff = (a - b).abs();
    if diff == 0.0 {
        0.0
    } else {
        diff / a.abs().max(b.abs())
    }
}

/// Rescales the trace by each factor, compensating alpha and `w_max`, and
/// reports how far each metric moved. Alpha is resolved on the unscaled trace
/// and then applied as a fixed rate `alpha / c` to the scaled one.
pub fn scale_invariance_report(
    trace: &Trace,
    factors: &[f64],
    fms_cfg: &FmsConfig,
    curve_cfg: &CurveConfig,
) -> Result<Vec<ScaleRow>, SweepError> {
    let alpha = resolve_alpha(trace, &fms_cfg.alpha_policy)?;
    let base_fms = fms_of_trace(trace, &FmsConfig { alpha_policy: AlphaPolicy::fixed(alpha), ..*fms_cfg })?;
    let base_asc = asc_of_trace(trace, curve_cfg)?;
    factors
        .iter()
        .map(|&c| {
            let scaled = rescale_energy(trace, c).map_err(MetricError::from)?;
            let fms_cfg_c = FmsConfig {
                alpha_policy: AlphaPolicy::fixed(alpha / c),
                ..*fms_cfg
            };
            let curve_cfg_c = CurveConfig {
                w_max: curve_cfg.w_max * c,
                ..*curve_cfg
            };
            let f = fms_of_trace(&scaled, &fms_cfg_c)?;
            let a = asc_of_trace(&scaled, &curve_cfg_c)?;
            Ok(ScaleRow {
                factor: c,
                same_eval_point: f.eval_point.index == base_fms.eval_point.index,
                fms_residual: relative(base_fms.value, f.value),
                asc_residual: relative(base_asc.value, a.value),
            })
        })
        .collect()
}
