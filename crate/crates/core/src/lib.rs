//! Sustainability metrics for iterative algorithms.
//!
//! Given a trace of `(iteration, cumulative kWh, test performance)` samples,
//! this crate computes
//!
//! * **FMS**, the beta-weighted harmonic mean of performance and the
//!   exponential energy metric `E(w) = exp(-alpha * w)`, taken at the
//!   best-performance checkpoint;
//! * **ASC**, the area under the performance vs normalized-energy curve,
//!   integrated up to an energy budget `w_max`;
//! * the Score, SI and SAM baselines;
//!
//! along with parameter sweeps, rank-stability checks and scale-invariance
//! reports. Trace files are read from CSV or JSON (see [`ingest`]), and the
//! `sustain` binary wraps everything in [`cli`].
//!
//! ```
//! use sustain::{fms, energy_metric};
//!
//! let e = energy_metric(0.49, 1.6).unwrap();
//! let score = fms(0.936, e, 1.0).unwrap();
//! assert!((score - 0.614).abs() < 0.01);
//! ```

pub mod ablation;
pub mod cli;
pub mod curve;
pub mod ingest;
pub mod metrics;
pub mod report;
pub mod trace;

pub use ablation::{
    rank_preservation_check, scale_invariance_report, sweep, AlphaSweepMode, RankTable, ScaleRow,
    SweepError, SweepParameter, SweepResult, SweepRow, SweepSpec, SweptMetric,
};
pub use curve::{
    asc_of_trace, asc_rectangle, asc_simpson, build_curve, AscOutcome, CurveConfig, CurvePoint,
    IntegrationRule, SustainabilityCurve,
};
pub use ingest::{
    emit_csv, emit_json, generate_synthetic, parse_csv, parse_json, ColumnMap, ColumnRef,
    EnergyMode, IngestError, PerfCurve, PerformanceScale, PowerSchedule, SyntheticSpec,
};
pub use metrics::{
    energy_metric, fms, fms_of_trace, resolve_alpha, sam_metric, score_metric, si_metric,
    AlphaPolicy, BaselineConfig, FmsConfig, FmsOutcome, MetricError,
};
pub use report::{compare_table, evaluate_trace, CompareTable, EvaluationConfig, MetricCell, MetricReport, SortKey};
pub use trace::{
    best_performance_point, rescale_energy, truncate_at_energy, validate_trace, EvaluationPoint,
    PerformanceKind, Trace, TraceError, TracePoint,
};
