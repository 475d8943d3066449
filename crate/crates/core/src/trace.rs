//! Trace data model.
//!
//! A [`Trace`] is the ordered record of `(iteration, cumulative energy, performance)`
//! samples taken while an iterative algorithm runs. Every metric in this crate
//! consumes a validated trace, so the invariants are checked once here:
//!
//! * at least two points,
//! * iterations strictly increasing,
//! * cumulative energy non-negative and non-decreasing (plateaus allowed),
//! * performance inside `[0, 1]`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One sampled point of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: u64,
    /// Cumulative electricity consumed up to and including this iteration, in kWh.
    pub energy_kwh: f64,
    /// Test-set performance in `[0, 1]`.
    pub performance: f64,
}

impl TracePoint {
    pub fn new(iteration: u64, energy_kwh: f64, performance: f64) -> Self {
        Self {
            iteration,
            energy_kwh,
            performance,
        }
    }
}

/// Which bounded score the performance column holds. Metadata only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum PerformanceKind {
    #[serde(rename = "accuracy")]
    Accuracy,
    #[serde(rename = "aAcc")]
    AAcc,
    #[serde(rename = "mIoU")]
    MIoU,
    #[serde(rename = "AUC")]
    Auc,
    #[default]
    #[serde(rename = "other")]
    Other,
}

impl PerformanceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PerformanceKind::Accuracy => "accuracy",
            PerformanceKind::AAcc => "aAcc",
            PerformanceKind::MIoU => "mIoU",
            PerformanceKind::Auc => "AUC",
            PerformanceKind::Other => "other",
        }
    }
}

impl fmt::Display for PerformanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PerformanceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "accuracy" | "acc" => Ok(PerformanceKind::Accuracy),
            "aAcc" | "aacc" => Ok(PerformanceKind::AAcc),
            "mIoU" | "miou" => Ok(PerformanceKind::MIoU),
            "AUC" | "auc" => Ok(PerformanceKind::Auc),
            "other" => Ok(PerformanceKind::Other),
            other => Err(format!("unknown performance kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("trace needs at least 2 points, got {len}")]
    EmptyTrace { len: usize },
    #[error("cumulative energy decreases at index {index} ({previous} -> {value} kWh)")]
    NonMonotoneEnergy {
        index: usize,
        previous: f64,
        value: f64,
    },
    #[error("iteration {iteration} at index {index} repeats the previous iteration")]
    DuplicateIteration { index: usize, iteration: u64 },
    #[error("iteration {iteration} at index {index} is lower than the previous iteration {previous}")]
    IterationNotIncreasing {
        index: usize,
        previous: u64,
        iteration: u64,
    },
    #[error("energy {value} kWh at index {index} is negative")]
    NegativeEnergy { index: usize, value: f64 },
    #[error("performance {value} at index {index} is outside [0, 1]")]
    PerformanceOutOfRange { index: usize, value: f64 },
    #[error("non-finite {field} at index {index}")]
    NonFinite { index: usize, field: &'static str },
    #[error("truncation leaves {remaining} point(s); at least 2 are required")]
    TruncationTooSevere { remaining: usize },
    #[error("energy budget must be positive and finite, got {0}")]
    NonPositiveBudget(f64),
    #[error("rescale factor must be positive and finite, got {0}")]
    NonPositiveFactor(f64),
}

impl TraceError {
    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            TraceError::EmptyTrace { .. } => "EmptyTrace",
            TraceError::NonMonotoneEnergy { .. } => "NonMonotoneEnergy",
            TraceError::DuplicateIteration { .. } => "DuplicateIteration",
            TraceError::IterationNotIncreasing { .. } => "IterationNotIncreasing",
            TraceError::NegativeEnergy { .. } => "NegativeEnergy",
            TraceError::PerformanceOutOfRange { .. } => "PerformanceOutOfRange",
            TraceError::NonFinite { .. } => "NonFinite",
            TraceError::TruncationTooSevere { .. } => "TruncationTooSevere",
            TraceError::NonPositiveBudget(_) => "NonPositiveBudget",
            TraceError::NonPositiveFactor(_) => "NonPositiveFactor",
        }
    }

    /// Index of the offending point, when the error is tied to one.
    pub fn index(&self) -> Option<usize> {
        match *self {
            TraceError::NonMonotoneEnergy { index, .. }
            | TraceError::DuplicateIteration { index, .. }
            | TraceError::IterationNotIncreasing { index, .. }
            | TraceError::NegativeEnergy { index, .. }
            | TraceError::PerformanceOutOfRange { index, .. }
            | TraceError::NonFinite { index, .. } => Some(index),
            _ => None,
        }
    }
}

/// A validated run record. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    label: String,
    kind: PerformanceKind,
    points: Vec<TracePoint>,
    params_m: Option<f64>,
}

/// Point of a trace at which the pointwise metrics are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationPoint {
    /// Position of the point inside the source trace.
    pub index: usize,
    pub iteration: u64,
    pub energy_kwh: f64,
    pub performance: f64,
}

/// Checks every trace invariant and builds a [`Trace`]. Input order is kept.
pub fn validate_trace(
    points: Vec<TracePoint>,
    label: impl Into<String>,
    kind: PerformanceKind,
) -> Result<Trace, TraceError> {
    if points.len() < 2 {
        return Err(TraceError::EmptyTrace { len: points.len() });
    }
    for (index, p) in points.iter().enumerate() {
        if !p.energy_kwh.is_finite() {
            return Err(TraceError::NonFinite {
                index,
                field: "energy_kwh",
            });
        }
        if !p.performance.is_finite() {
            return Err(TraceError::NonFinite {
                index,
                field: "performance",
            });
        }
        if p.energy_kwh < 0.0 {
            return Err(TraceError::NegativeEnergy {
                index,
                value: p.energy_kwh,
            });
        }
        if !(0.0..=1.0).contains(&p.performance) {
            return Err(TraceError::PerformanceOutOfRange {
                index,
                value: p.performance,
            });
        }
        if index > 0 {
            let prev = &points[index - 1];
            if p.iteration == prev.iteration {
                return Err(TraceError::DuplicateIteration {
                    index,
                    iteration: p.iteration,
                });
            }
            if p.iteration < prev.iteration {
                return Err(TraceError::IterationNotIncreasing {
                    index,
                    previous: prev.iteration,
                    iteration: p.iteration,
                });
            }
            if p.energy_kwh < prev.energy_kwh {
                return Err(TraceError::NonMonotoneEnergy {
                    index,
                    previous: prev.energy_kwh,
                    value: p.energy_kwh,
                });
            }
        }
    }
    Ok(Trace {
        label: label.into(),
        kind,
        points,
        params_m: None,
    })
}

impl Trace {
    pub fn new(
        points: Vec<TracePoint>,
        label: impl Into<String>,
        kind: PerformanceKind,
    ) -> Result<Self, TraceError> {
        validate_trace(points, label, kind)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> PerformanceKind {
        self.kind
    }

    pub fn points(&self) -> &[TracePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false for a validated trace; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Model size in millions of parameters, carried through to comparison tables.
    pub fn params_m(&self) -> Option<f64> {
        self.params_m
    }

    pub fn with_params_m(mut self, params_m: Option<f64>) -> Self {
        self.params_m = params_m;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn first(&self) -> &TracePoint {
        &self.points[0]
    }

    pub fn last(&self) -> &TracePoint {
        &self.points[self.points.len() - 1]
    }

    pub fn max_performance(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.performance)
            .fold(0.0, f64::max)
    }

    pub fn evaluation_point(&self, index: usize) -> EvaluationPoint {
        let p = &self.points[index];
        EvaluationPoint {
            index,
            iteration: p.iteration,
            energy_kwh: p.energy_kwh,
            performance: p.performance,
        }
    }

    pub fn truncate_at_energy(&self, w_max: f64) -> Result<Trace, TraceError> {
        truncate_at_energy(self, w_max)
    }

    pub fn best_performance_point(&self) -> EvaluationPoint {
        best_performance_point(self)
    }

    pub fn rescale_energy(&self, factor: f64) -> Result<Trace, TraceError> {
        rescale_energy(self, factor)
    }
}

/// Keeps the longest prefix whose cumulative energy stays within `w_max`.
pub fn truncate_at_energy(trace: &Trace, w_max: f64) -> Result<Trace, TraceError> {
    if !(w_max.is_finite() && w_max > 0.0) {
        return Err(TraceError::NonPositiveBudget(w_max));
    }
    // energy is non-decreasing, so the in-budget points form a prefix
    let keep = trace.points.partition_point(|p| p.energy_kwh <= w_max);
    if keep < 2 {
        return Err(TraceError::TruncationTooSevere { remaining: keep });
    }
    let mut out = trace.clone();
    out.points.truncate(keep);
    Ok(out)
}

/// Point with the highest performance. Ties go to the lowest energy, then the
/// earliest iteration, which for a cumulative trace is simply the first maximum.
pub fn best_performance_point(trace: &Trace) -> EvaluationPoint {
    let mut best = 0;
    for (i, p) in trace.points.iter().enumerate().skip(1) {
        let b = &trace.points[best];
        if p.performance > b.performance
            || (p.performance == b.performance && p.energy_kwh < b.energy_kwh)
        {
            best = i;
        }
    }
    trace.evaluation_point(best)
}

/// Multiplies every energy by `factor`, leaving iterations and performances alone.
pub fn rescale_energy(trace: &Trace, factor: f64) -> Result<Trace, TraceError> {
    if !(factor.is_finite() && factor > 0.0) {
        return Err(TraceError::NonPositiveFactor(factor));
    }
    let mut out = trace.clone();
    for p in &mut out.points {
        p.energy_kwh *= factor;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(rows: &[(u64, f64, f64)]) -> Vec<TracePoint> {
        rows.iter()
            .map(|&(i, e, p)| TracePoint::new(i, e, p))
            .collect()
    }

    fn trace(rows: &[(u64, f64, f64)]) -> Trace {
        validate_trace(pts(rows), "t", PerformanceKind::Accuracy).unwrap()
    }

    fn energies(rows: &[f64]) -> Trace {
        let p: Vec<_> = rows
            .iter()
            .enumerate()
            .map(|(i, &e)| TracePoint::new(i as u64, e, 0.5))
            .collect();
        validate_trace(p, "t", PerformanceKind::Other).unwrap()
    }

    #[test]
    fn minimal_trace_is_valid() {
        let t = trace(&[(0, 0.0, 0.10), (1, 0.1, 0.50)]);
        assert_eq!(t.len(), 2);
        assert_eq!(t.points()[1], TracePoint::new(1, 0.1, 0.5));
    }

    #[test]
    fn decreasing_energy_is_rejected() {
        let err = validate_trace(
            pts(&[(0, 0.2, 0.1), (1, 0.1, 0.5)]),
            "t",
            PerformanceKind::Other,
        )
        .unwrap_err();
        assert_eq!(err.code(), "NonMonotoneEnergy");
        assert_eq!(err.index(), Some(1));
    }

    #[test]
    fn single_point_is_empty() {
        let err = validate_trace(pts(&[(0, 0.0, 0.1)]), "t", PerformanceKind::Other).unwrap_err();
        assert_eq!(err, TraceError::EmptyTrace { len: 1 });
    }

    #[test]
    fn other_invariant_violations() {
        let dup = validate_trace(
            pts(&[(3, 0.0, 0.1), (3, 0.1, 0.5)]),
            "t",
            PerformanceKind::Other,
        );
        assert_eq!(dup.unwrap_err().code(), "DuplicateIteration");
        let back = validate_trace(
            pts(&[(3, 0.0, 0.1), (2, 0.1, 0.5)]),
            "t",
            PerformanceKind::Other,
        );
        assert_eq!(back.unwrap_err().code(), "IterationNotIncreasing");
        let perf = validate_trace(
            pts(&[(0, 0.0, 0.1), (1, 0.1, 1.01)]),
            "t",
            PerformanceKind::Other,
        );
        assert_eq!(
            perf.unwrap_err(),
            TraceError::PerformanceOutOfRange {
                index: 1,
                value: 1.01
            }
        );
        let neg = validate_trace(
            pts(&[(0, -0.1, 0.1), (1, 0.1, 0.5)]),
            "t",
            PerformanceKind::Other,
        );
        assert_eq!(neg.unwrap_err().code(), "NegativeEnergy");
        let nan = validate_trace(
            pts(&[(0, 0.0, f64::NAN), (1, 0.1, 0.5)]),
            "t",
            PerformanceKind::Other,
        );
        assert_eq!(nan.unwrap_err().code(), "NonFinite");
    }

    #[test]
    fn energy_plateau_is_allowed() {
        let t = trace(&[(0, 0.1, 0.1), (1, 0.1, 0.2), (2, 0.3, 0.4)]);
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn truncation_examples() {
        let t = energies(&[0.2, 0.5, 0.9, 1.2]);
        let cut = truncate_at_energy(&t, 1.0).unwrap();
        assert_eq!(cut.points(), &t.points()[..3]);

        let t = energies(&[0.1, 0.4, 0.7]);
        assert_eq!(truncate_at_energy(&t, 1.0).unwrap(), t);

        let t = energies(&[0.5, 1.2, 1.3]);
        assert_eq!(
            truncate_at_energy(&t, 1.0).unwrap_err(),
            TraceError::TruncationTooSevere { remaining: 1 }
        );
        assert_eq!(
            truncate_at_energy(&t, 0.0).unwrap_err().code(),
            "NonPositiveBudget"
        );
    }

    #[test]
    fn truncation_keeps_point_exactly_at_budget() {
        let t = energies(&[0.0, 0.5, 1.0, 1.5]);
        assert_eq!(truncate_at_energy(&t, 1.0).unwrap().len(), 3);
    }

    #[test]
    fn best_point_examples() {
        let t = trace(&[(0, 0.1, 0.3), (1, 0.4, 0.9), (2, 0.6, 0.7)]);
        let b = best_performance_point(&t);
        assert_eq!((b.energy_kwh, b.performance), (0.4, 0.9));

        let t = trace(&[(0, 0.2, 0.8), (1, 0.5, 0.8)]);
        let b = best_performance_point(&t);
        assert_eq!((b.energy_kwh, b.performance), (0.2, 0.8));

        let t = trace(&[(0, 0.1, 0.5), (1, 0.2, 0.5), (2, 0.3, 0.5)]);
        let b = best_performance_point(&t);
        assert_eq!((b.index, b.energy_kwh, b.performance), (0, 0.1, 0.5));
    }

    #[test]
    fn best_point_tie_on_plateau_picks_earliest() {
        let t = trace(&[(0, 0.0, 0.2), (1, 0.3, 0.9), (2, 0.3, 0.9)]);
        assert_eq!(best_performance_point(&t).iteration, 1);
    }

    #[test]
    fn rescale_examples() {
        let t = energies(&[1.0, 2.0]);
        let r = rescale_energy(&t, 1000.0).unwrap();
        let e: Vec<f64> = r.points().iter().map(|p| p.energy_kwh).collect();
        assert_eq!(e, vec![1000.0, 2000.0]);
        assert_eq!(rescale_energy(&t, 1.0).unwrap(), t);
        assert_eq!(
            rescale_energy(&t, 0.0).unwrap_err(),
            TraceError::NonPositiveFactor(0.0)
        );
    }

    fn arb_trace() -> impl Strategy<Value = Trace> {
        prop::collection::vec((1u64..50, 0.0f64..0.3, 0.0f64..=1.0), 2..40).prop_map(|steps| {
            let mut it = 0;
            let mut e = 0.0;
            let points = steps
                .into_iter()
                .map(|(di, de, p)| {
                    it += di;
                    e += de;
                    TracePoint::new(it, e, p)
                })
                .collect();
            validate_trace(points, "arb", PerformanceKind::Other).unwrap()
        })
    }

    proptest! {
        #[test]
        fn validation_is_idempotent(t in arb_trace()) {
            let again = validate_trace(t.points().to_vec(), t.label(), t.kind()).unwrap();
            prop_assert_eq!(again, t);
        }

        #[test]
        fn nested_truncation_equals_min_budget(t in arb_trace(), w1 in 0.05f64..5.0, w2 in 0.05f64..5.0) {
            let nested = truncate_at_energy(&t, w1).and_then(|a| truncate_at_energy(&a, w2));
            let direct = truncate_at_energy(&t, w1.min(w2));
            match (nested, direct) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
                (Err(a), Err(b)) => prop_assert_eq!(a.code(), b.code()),
                (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
            }
        }

        #[test]
        fn best_point_matches_linear_scan(t in arb_trace()) {
            let b = best_performance_point(&t);
            let max = t.points().iter().map(|p| p.performance).fold(f64::MIN, f64::max);
            prop_assert_eq!(b.performance, max);
            prop_assert_eq!(t.points()[b.index], TracePoint::new(b.iteration, b.energy_kwh, b.performance));
            // nothing earlier than the chosen point reaches the max
            prop_assert!(t.points()[..b.index].iter().all(|p| p.performance < max));
        }

        #[test]
        fn rescale_round_trips(t in arb_trace(), a in 1e-6f64..1e6) {
            let back = rescale_energy(&rescale_energy(&t, a).unwrap(), 1.0 / a).unwrap();
            for (x, y) in t.points().iter().zip(back.points()) {
                prop_assert!((x.energy_kwh - y.energy_kwh).abs() <= 1e-12 * x.energy_kwh.abs().max(f64::MIN_POSITIVE));
                prop_assert_eq!(x.performance, y.performance);
                prop_assert_eq!(x.iteration, y.iteration);
            }
        }
    }
}
