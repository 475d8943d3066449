//! Pointwise sustainability metrics.
//!
//! The energy metric maps cumulative kWh into `(0, 1]` with an exponential
//! decay, `E(w) = exp(-alpha * w)`, so that it lives on the same scale as a
//! bounded performance score. FMS is the beta-weighted harmonic mean of the
//! two:
//!
//! ```text
//! FMS = (1 + beta^2) * P * E / (beta^2 * P + E)
//!     = 1 / (beta^2 / (1 + beta^2) * 1/E + 1 / (1 + beta^2) * 1/P)
//! ```
//!
//! Larger beta moves weight onto the energy term. Score, SI and SAM are the
//! baseline criteria FMS is compared against; they take raw kWh rather than
//! the transformed energy metric.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trace::{best_performance_point, EvaluationPoint, Trace, TraceError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("energy {0} kWh is negative")]
    NegativeEnergy(f64),
    #[error("alpha must be positive and finite, got {0}")]
    NonPositiveAlpha(f64),
    #[error("beta must be positive and finite, got {0}")]
    BetaNonPositive(f64),
    #[error("{name} = {value} is outside its valid range")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("energy is zero; the metric divides by it")]
    ZeroEnergy,
    #[error("performance {0} is negative")]
    NegativePerformance(f64),
    #[error("energy {0} kWh is 1 kWh, where log10(E) = 0")]
    UnitEnergySingularity(f64),
    #[error("trace ends at iteration {last} before the alpha anchor iteration {iteration}")]
    IterationNotReached { iteration: u64, last: u64 },
    #[error("energy at anchor iteration {iteration} is zero, which would give alpha = 0")]
    ZeroEnergyAtAnchor { iteration: u64 },
    #[error("invalid baseline configuration: {0}")]
    InvalidBaseline(String),
    #[error("invalid curve configuration: {0}")]
    InvalidCurve(String),
    #[error("need at least {needed} curve points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error(transparent)]
    Trace(#[from] TraceError),
}

impl MetricError {
    pub fn code(&self) -> &'static str {
        match self {
            MetricError::NegativeEnergy(_) => "NegativeEnergy",
            MetricError::NonPositiveAlpha(_) => "NonPositiveAlpha",
            MetricError::BetaNonPositive(_) => "BetaNonPositive",
            MetricError::OutOfRange { .. } => "OutOfRange",
            MetricError::ZeroEnergy => "ZeroEnergy",
            MetricError::NegativePerformance(_) => "NegativePerformance",
            MetricError::UnitEnergySingularity(_) => "UnitEnergySingularity",
            MetricError::IterationNotReached { .. } => "IterationNotReached",
            MetricError::ZeroEnergyAtAnchor { .. } => "ZeroEnergyAtAnchor",
            MetricError::InvalidBaseline(_) => "InvalidBaseline",
            MetricError::InvalidCurve(_) => "InvalidCurve",
            MetricError::TooFewPoints { .. } => "TooFewPoints",
            MetricError::Trace(e) => e.code(),
        }
    }
}

/// How the energy decay rate is bound to a trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlphaPolicy {
    Fixed { alpha: f64 },
    /// `factor` times the cumulative energy at the first point whose iteration
    /// is at least `iteration`.
    EnergyAtIteration { iteration: u64, factor: f64 },
}

impl AlphaPolicy {
    pub fn fixed(alpha: f64) -> Self {
        AlphaPolicy::Fixed { alpha }
    }

    pub fn at_iteration(iteration: u64, factor: f64) -> Self {
        AlphaPolicy::EnergyAtIteration { iteration, factor }
    }
}

impl Default for AlphaPolicy {
    /// 100 times the energy after the 100th iteration.
    fn default() -> Self {
        AlphaPolicy::EnergyAtIteration {
            iteration: 100,
            factor: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FmsConfig {
    pub alpha_policy: AlphaPolicy,
    pub beta: f64,
}

impl Default for FmsConfig {
    fn default() -> Self {
        Self {
            alpha_policy: AlphaPolicy::default(),
            beta: 1.0,
        }
    }
}

impl FmsConfig {
    pub fn with_alpha(alpha: f64) -> Self {
        Self {
            alpha_policy: AlphaPolicy::fixed(alpha),
            ..Self::default()
        }
    }

    pub fn beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }
}

/// Hyperparameters of the SI and SAM baselines. These are unrelated to the
/// alpha and beta of FMS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub si_alpha: f64,
    pub si_beta: f64,
    pub sam_alpha: f64,
    pub sam_beta: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            si_alpha: 0.5,
            si_beta: 0.5,
            sam_alpha: 5.0,
            sam_beta: 5.0,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<(), MetricError> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !open_unit(self.si_alpha) || !open_unit(self.si_beta) {
            return Err(MetricError::InvalidBaseline(format!(
                "SI exponents must lie in (0, 1), got {} and {}",
                self.si_alpha, self.si_beta
            )));
        }
        if (self.si_alpha + self.si_beta - 1.0).abs() > 1e-12 {
            return Err(MetricError::InvalidBaseline(format!(
                "SI exponents must sum to 1, got {}",
                self.si_alpha + self.si_beta
            )));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.sam_alpha) || !positive(self.sam_beta) {
            return Err(MetricError::InvalidBaseline(format!(
                "SAM hyperparameters must be positive, got {} and {}",
                self.sam_alpha, self.sam_beta
            )));
        }
        Ok(())
    }
}

/// `exp(-alpha * w)`.
pub fn energy_metric(w: f64, alpha: f64) -> Result<f64, MetricError> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(MetricError::NonPositiveAlpha(alpha));
    }
    if w.is_nan() || w < 0.0 {
        return Err(MetricError::NegativeEnergy(w));
    }
    Ok((-alpha * w).exp())
}

/// Binds the decay rate to `trace` according to `policy`.
pub fn resolve_alpha(trace: &Trace, policy: &AlphaPolicy) -> Result<f64, MetricError> {
    match *policy {
        AlphaPolicy::Fixed { alpha } => {
            if alpha.is_finite() && alpha > 0.0 {
                Ok(alpha)
            } else {
                Err(MetricError::NonPositiveAlpha(alpha))
            }
        }
        AlphaPolicy::EnergyAtIteration { iteration, factor } => {
            if !(factor.is_finite() && factor > 0.0) {
                return Err(MetricError::NonPositiveAlpha(factor));
            }
            let anchor = trace
                .points()
                .iter()
                .find(|p| p.iteration >= iteration)
                .ok_or(MetricError::IterationNotReached {
                    iteration,
                    last: trace.last().iteration,
                })?;
            if anchor.energy_kwh == 0.0 {
                return Err(MetricError::ZeroEnergyAtAnchor {
                    iteration: anchor.iteration,
                });
            }
            let alpha = factor * anchor.energy_kwh;
            if alpha.is_finite() && alpha > 0.0 {
                Ok(alpha)
            } else {
                Err(MetricError::NonPositiveAlpha(alpha))
            }
        }
    }
}

/// Beta-weighted harmonic mean of performance and energy metric.
///
/// `P = 0` gives 0; the `P = E = 0` corner is also 0.
pub fn fms(performance: f64, energy_metric_value: f64, beta: f64) -> Result<f64, MetricError> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(MetricError::BetaNonPositive(beta));
    }
    if !(0.0..=1.0).contains(&performance) {
        return Err(MetricError::OutOfRange {
            name: "performance",
            value: performance,
        });
    }
    if !(0.0..=1.0).contains(&energy_metric_value) {
        return Err(MetricError::OutOfRange {
            name: "energy metric",
            value: energy_metric_value,
        });
    }
    let b2 = beta * beta;
    let denom = b2 * performance + energy_metric_value;
    if denom == 0.0 {
        return Ok(0.0);
    }
    let value = (1.0 + b2) * performance * energy_metric_value / denom;
    // rounding can push the mean a hair past its operands
    let lo = performance.min(energy_metric_value);
    let hi = performance.max(energy_metric_value);
    Ok(value.clamp(lo, hi))
}

/// FMS of a whole trace together with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FmsOutcome {
    pub value: f64,
    pub eval_point: EvaluationPoint,
    pub alpha: f64,
    pub energy_metric: f64,
}

/// FMS evaluated at the best-performance checkpoint of `trace`.
pub fn fms_of_trace(trace: &Trace, config: &FmsConfig) -> Result<FmsOutcome, MetricError> {
    let alpha = resolve_alpha(trace, &config.alpha_policy)?;
    let eval_point = best_performance_point(trace);
    let e = energy_metric(eval_point.energy_kwh, alpha)?;
    let value = fms(eval_point.performance, e, config.beta)?;
    Ok(FmsOutcome {
        value,
        eval_point,
        alpha,
        energy_metric: e,
    })
}

fn check_raw_energy(energy_kwh: f64) -> Result<(), MetricError> {
    if energy_kwh.is_nan() || energy_kwh < 0.0 {
        return Err(MetricError::NegativeEnergy(energy_kwh));
    }
    if energy_kwh == 0.0 {
        return Err(MetricError::ZeroEnergy);
    }
    Ok(())
}

/// Performance per kWh.
pub fn score_metric(performance: f64, energy_kwh: f64) -> Result<f64, MetricError> {
    check_raw_energy(energy_kwh)?;
    Ok(performance / energy_kwh)
}

/// `P^a * (1/E)^b`.
pub fn si_metric(
    performance: f64,
    energy_kwh: f64,
    config: &BaselineConfig,
) -> Result<f64, MetricError> {
    config.validate()?;
    check_raw_energy(energy_kwh)?;
    if performance < 0.0 {
        return Err(MetricError::NegativePerformance(performance));
    }
    Ok(performance.powf(config.si_alpha) * energy_kwh.powf(-config.si_beta))
}

/// `b * P^a / log10(E)`. Negative below 1 kWh, undefined at 1 kWh.
pub fn sam_metric(
    performance: f64,
    energy_kwh: f64,
    config: &BaselineConfig,
) -> Result<f64, MetricError> {
    config.validate()?;
    check_raw_energy(energy_kwh)?;
    if performance < 0.0 {
        return Err(MetricError::NegativePerformance(performance));
    }
    if (energy_kwh - 1.0).abs() <= 1e-12 {
        return Err(MetricError::UnitEnergySingularity(energy_kwh));
    }
    Ok(config.sam_beta * performance.powf(config.sam_alpha) / energy_kwh.log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{validate_trace, PerformanceKind, TracePoint};
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn energy_metric_values() {
        assert_eq!(energy_metric(0.0, 3.7).unwrap(), 1.0);
        // back-solved decay rate for the 0.49 kWh / 45.68 % row
        let alpha = -(0.4568f64).ln() / 0.49;
        assert!(close(alpha, 1.599, 1e-3));
        assert!(close(energy_metric(0.49, alpha).unwrap(), 0.4568, 1e-12));
        // e^-10 = 4.539992976248485e-5
        assert!(close(
            energy_metric(10.0, 1.0).unwrap(),
            4.539992976248485e-5,
            1e-18
        ));
    }

    #[test]
    fn energy_metric_errors() {
        assert_eq!(
            energy_metric(-0.1, 1.0).unwrap_err(),
            MetricError::NegativeEnergy(-0.1)
        );
        assert_eq!(
            energy_metric(0.1, 0.0).unwrap_err(),
            MetricError::NonPositiveAlpha(0.0)
        );
    }

    fn anchor_trace() -> Trace {
        validate_trace(
            vec![
                TracePoint::new(0, 0.0, 0.1),
                TracePoint::new(50, 0.0015, 0.2),
                TracePoint::new(100, 0.003, 0.3),
                TracePoint::new(600, 0.02, 0.5),
                TracePoint::new(1000, 0.05, 0.7),
            ],
            "anchor",
            PerformanceKind::Accuracy,
        )
        .unwrap()
    }

    #[test]
    fn resolve_alpha_examples() {
        let t = anchor_trace();
        assert_eq!(resolve_alpha(&t, &AlphaPolicy::fixed(2.5)).unwrap(), 2.5);
        assert!(close(
            resolve_alpha(&t, &AlphaPolicy::at_iteration(100, 100.0)).unwrap(),
            0.3,
            1e-12
        ));
        assert_eq!(
            resolve_alpha(&t, &AlphaPolicy::at_iteration(1000, 1.0)).unwrap(),
            0.05
        );
        // no point exactly at 700: the next one (1000) anchors
        assert_eq!(
            resolve_alpha(&t, &AlphaPolicy::at_iteration(700, 1.0)).unwrap(),
            0.05
        );
    }

    #[test]
    fn resolve_alpha_errors() {
        let t = anchor_trace();
        assert_eq!(
            resolve_alpha(&t, &AlphaPolicy::at_iteration(5000, 1.0)).unwrap_err(),
            MetricError::IterationNotReached {
                iteration: 5000,
                last: 1000
            }
        );
        assert_eq!(
            resolve_alpha(&t, &AlphaPolicy::at_iteration(0, 1.0)).unwrap_err(),
            MetricError::ZeroEnergyAtAnchor { iteration: 0 }
        );
        assert_eq!(
            resolve_alpha(&t, &AlphaPolicy::fixed(-1.0)).unwrap_err().code(),
            "NonPositiveAlpha"
        );
    }

    #[test]
    fn fms_calibration_values() {
        assert!(close(fms(0.9, 0.1, 1.0).unwrap(), 0.18, 1e-12));
        assert!(close(fms(0.5, 0.5, 1.0).unwrap(), 0.5, 1e-12));
        assert!(close(fms(0.936, 0.4568, 1.0).unwrap(), 0.6140, 0.005));
        assert!(close(fms(0.936, 0.4568, 0.5).unwrap(), 0.7676, 0.01));
        assert!(close(fms(0.936, 0.4568, 2.0).unwrap(), 0.5082, 0.01));
    }

    #[test]
    fn fms_degenerate_corners() {
        assert_eq!(fms(0.0, 0.7, 1.0).unwrap(), 0.0);
        assert_eq!(fms(0.0, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(fms(0.6, 0.0, 2.0).unwrap(), 0.0);
        assert_eq!(fms(0.5, 0.5, 0.0).unwrap_err(), MetricError::BetaNonPositive(0.0));
        assert_eq!(fms(1.5, 0.5, 1.0).unwrap_err().code(), "OutOfRange");
    }

    #[test]
    fn fms_of_trace_composition() {
        let t = validate_trace(
            vec![
                TracePoint::new(1, 0.1, 0.5),
                TracePoint::new(2, 0.49, 0.936),
                TracePoint::new(3, 0.8, 0.92),
            ],
            "res50",
            PerformanceKind::AAcc,
        )
        .unwrap();
        let alpha = -(0.4568f64).ln() / 0.49;
        let out = fms_of_trace(&t, &FmsConfig::with_alpha(alpha)).unwrap();
        assert!(close(out.value, 0.6140, 0.005));
        assert_eq!(out.eval_point.iteration, 2);
        assert_eq!(out.alpha, alpha);
    }

    #[test]
    fn fms_of_constant_trace_tends_to_two_thirds() {
        let t = validate_trace(
            vec![
                TracePoint::new(0, 0.1, 0.5),
                TracePoint::new(1, 0.2, 0.5),
                TracePoint::new(2, 0.3, 0.5),
            ],
            "flat",
            PerformanceKind::Other,
        )
        .unwrap();
        let out = fms_of_trace(&t, &FmsConfig::with_alpha(1e-12)).unwrap();
        assert_eq!(out.eval_point.index, 0);
        assert!(close(out.value, 2.0 / 3.0, 1e-9));
    }

    #[test]
    fn fms_of_all_zero_trace_is_zero() {
        let t = validate_trace(
            vec![TracePoint::new(0, 0.1, 0.0), TracePoint::new(1, 0.2, 0.0)],
            "zero",
            PerformanceKind::Other,
        )
        .unwrap();
        assert_eq!(fms_of_trace(&t, &FmsConfig::with_alpha(1.0)).unwrap().value, 0.0);
    }

    #[test]
    fn score_values() {
        assert!(close(score_metric(0.7028, 0.73).unwrap(), 0.9627, 1e-4));
        assert!(close(score_metric(0.843, 1.13).unwrap(), 0.746, 1e-3));
        assert_eq!(score_metric(0.0, 0.4).unwrap(), 0.0);
        assert_eq!(score_metric(0.5, 0.0).unwrap_err(), MetricError::ZeroEnergy);
    }

    #[test]
    fn si_values() {
        let c = BaselineConfig::default();
        assert!(close(si_metric(0.7028, 0.73, &c).unwrap(), 0.9812, 1e-4));
        assert!(close(si_metric(0.904, 1.43, &c).unwrap(), 0.7951, 1e-4));
        assert_eq!(si_metric(1.0, 1.0, &c).unwrap(), 1.0);
        assert_eq!(si_metric(0.5, 0.0, &c).unwrap_err(), MetricError::ZeroEnergy);
        assert_eq!(
            si_metric(-0.5, 1.0, &c).unwrap_err(),
            MetricError::NegativePerformance(-0.5)
        );
    }

    #[test]
    fn sam_values() {
        let c = BaselineConfig::default();
        // 5 * 0.904^5 / log10(1.43), evaluated independently
        assert!(close(sam_metric(0.904, 1.43, &c).unwrap(), 19.433003744826916, 1e-9));
        assert!(sam_metric(0.7028, 0.73, &c).unwrap() < 0.0);
        assert_eq!(
            sam_metric(0.5, 1.0, &c).unwrap_err(),
            MetricError::UnitEnergySingularity(1.0)
        );
    }

    #[test]
    fn baseline_config_validation() {
        let bad = BaselineConfig {
            si_alpha: 0.6,
            si_beta: 0.6,
            ..BaselineConfig::default()
        };
        assert_eq!(bad.validate().unwrap_err().code(), "InvalidBaseline");
        let ok = BaselineConfig {
            si_alpha: 0.3,
            si_beta: 0.7,
            ..BaselineConfig::default()
        };
        assert!(ok.validate().is_ok());
    }

    proptest! {
        #[test]
        fn fms_is_bounded_by_its_operands(p in 0.0f64..=1.0, e in 0.0f64..=1.0, beta in 0.01f64..100.0) {
            let v = fms(p, e, beta).unwrap();
            prop_assert!(p.min(e) <= v && v <= p.max(e));
        }

        #[test]
        fn fms_symmetric_at_unit_beta(p in 0.0f64..=1.0, e in 0.0f64..=1.0) {
            let a = fms(p, e, 1.0).unwrap();
            let b = fms(e, p, 1.0).unwrap();
            prop_assert!((a - b).abs() <= 1e-15);
        }

        #[test]
        fn fms_moves_toward_energy_as_beta_grows(p in 0.01f64..=1.0, e in 0.01f64..=1.0, b1 in 0.01f64..10.0, db in 0.0f64..10.0) {
            let lo = fms(p, e, b1).unwrap();
            let hi = fms(p, e, b1 + db).unwrap();
            if p > e {
                prop_assert!(hi <= lo + 1e-15);
            } else {
                prop_assert!(hi + 1e-15 >= lo);
            }
        }

        #[test]
        fn sam_sign_follows_log(p in 0.001f64..=1.0, e in 0.001f64..10.0) {
            prop_assume!((e - 1.0).abs() > 1e-9);
            let v = sam_metric(p, e, &BaselineConfig::default()).unwrap();
            prop_assert_eq!(v < 0.0, e < 1.0);
        }
    }

    #[test]
    fn fms_beta_limits() {
        let (p, e) = (0.8, 0.3);
        assert!(close(fms(p, e, 1e-6).unwrap(), p, 1e-9));
        assert!(close(fms(p, e, 1e6).unwrap(), e, 1e-9));
    }
}
