//! Sustainability curve and the area beneath it (ASC).
//!
//! The curve plots performance against cumulative energy normalized by the
//! budget `w_max`. The trace is truncated at the budget, then `N + 1` boundary
//! samples are picked so that every partition spans (as nearly as possible)
//! the same number of samples: `b_i = round(i * last / N)` where `last` is
//! the index of the final sample. ASC is the right-endpoint rectangle sum
//!
//! ```text
//! ASC = sum_i (w[b_i] - w[b_{i-1}]) / w_max * p[b_i]
//! ```
//!
//! No synthetic origin is prepended and uncovered budget is not extrapolated,
//! so a run that stops short of `w_max` only gets credit for the span it
//! actually measured.

use serde::{Deserialize, Serialize};

use crate::metrics::MetricError;
use crate::trace::{truncate_at_energy, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum IntegrationRule {
    /// Right-endpoint rectangle sum over the partition boundaries.
    #[default]
    #[serde(rename = "rect")]
    RectangleRightPoint,
    /// Composite Simpson over the piecewise-linear interpolant of the boundaries.
    #[serde(rename = "simpson")]
    Simpson,
}

impl IntegrationRule {
    pub fn as_str(&self) -> &'static str {
        match self {
            IntegrationRule::RectangleRightPoint => "rect",
            IntegrationRule::Simpson => "simpson",
        }
    }
}

impl std::str::FromStr for IntegrationRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rect" | "rectangle" => Ok(IntegrationRule::RectangleRightPoint),
            "simpson" => Ok(IntegrationRule::Simpson),
            other => Err(format!("unknown integration rule `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveConfig {
    pub n_partitions: usize,
    pub w_max: f64,
    pub rule: IntegrationRule,
}

impl Default for CurveConfig {
    fn default() -> Self {
        Self {
            n_partitions: 10,
            w_max: 1.0,
            rule: IntegrationRule::RectangleRightPoint,
        }
    }
}

impl CurveConfig {
    pub fn new(n_partitions: usize, w_max: f64, rule: IntegrationRule) -> Self {
        Self {
            n_partitions,
            w_max,
            rule,
        }
    }

    pub fn validate(&self) -> Result<(), MetricError> {
        if self.n_partitions == 0 {
            return Err(MetricError::InvalidCurve(
                "partition count must be at least 1".into(),
            ));
        }
        if !(self.w_max.is_finite() && self.w_max > 0.0) {
            return Err(MetricError::InvalidCurve(format!(
                "w_max must be positive, got {}",
                self.w_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Energy divided by `w_max`.
    pub x: f64,
    pub performance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SustainabilityCurve {
    points: Vec<CurvePoint>,
    boundaries: Vec<usize>,
    w_max: f64,
}

impl SustainabilityCurve {
    /// Builds a curve directly from normalized points, bypassing partitioning.
    /// Boundaries are then the identity `0..len`.
    pub fn from_points(points: Vec<CurvePoint>) -> Result<Self, MetricError> {
        if points.len() < 2 {
            return Err(MetricError::TooFewPoints {
                needed: 2,
                got: points.len(),
            });
        }
        if points.windows(2).any(|w| w[1].x < w[0].x) {
            return Err(MetricError::InvalidCurve(
                "normalized energy must be non-decreasing".into(),
            ));
        }
        let boundaries = (0..points.len()).collect();
        Ok(Self {
            points,
            boundaries,
            w_max: 1.0,
        })
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    /// Indices into the (truncated) source trace of the selected samples.
    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn w_max(&self) -> f64 {
        self.w_max
    }

    pub fn partitions(&self) -> usize {
        self.points.len() - 1
    }
}

/// Boundary sample indices `round(i * last / n)` for `i = 0..=n`, with `n`
/// clamped to `last` so every partition holds at least one step.
pub fn partition_boundaries(len: usize, n_partitions: usize) -> Vec<usize> {
    let last = len.saturating_sub(1);
    let n = n_partitions.min(last).max(1);
    let mut out: Vec<usize> = (0..=n)
        .map(|i| {
            // round half up in integer arithmetic
            let num = 2 * i as u128 * last as u128 + n as u128;
            (num / (2 * n as u128)) as usize
        })
        .collect();
    out.dedup();
    out
}

/// Truncates `trace` at the budget and selects the partition boundaries.
pub fn build_curve(trace: &Trace, config: &CurveConfig) -> Result<SustainabilityCurve, MetricError> {
    config.validate()?;
    let within = truncate_at_energy(trace, config.w_max)?;
    let boundaries = partition_boundaries(within.len(), config.n_partitions);
    let points = boundaries
        .iter()
        .map(|&b| {
            let p = &within.points()[b];
            CurvePoint {
                x: p.energy_kwh / config.w_max,
                performance: p.performance,
            }
        })
        .collect();
    Ok(SustainabilityCurve {
        points,
        boundaries,
        w_max: config.w_max,
    })
}

/// Sums `height * (x1 - x0)` over consecutive spans, coalescing runs of equal
/// height so that plateaus integrate by one telescoped width.
fn coalesced_area(spans: impl Iterator<Item = (f64, f64, f64)>) -> f64 {
    let mut total = 0.0;
    let mut run: Option<(f64, f64, f64)> = None;
    for (x0, x1, h) in spans {
        run = match run {
            Some((start, _, rh)) if rh == h => Some((start, x1, rh)),
            Some((start, end, rh)) => {
                total += rh * (end - start);
                Some((x0, x1, h))
            }
            None => Some((x0, x1, h)),
        };
    }
    if let Some((start, end, h)) = run {
        total += h * (end - start);
    }
    total
}

/// Right-endpoint rectangle rule over the curve points.
pub fn asc_rectangle(curve: &SustainabilityCurve) -> f64 {
    coalesced_area(
        curve
            .points
            .windows(2)
            .map(|w| (w[0].x, w[1].x, w[1].performance)),
    )
}

/// Composite Simpson on the piecewise-linear interpolant, one panel per
/// segment with the knots as breakpoints. On linear pieces this is exact and
/// coincides with the trapezoid rule.
pub fn asc_simpson(curve: &SustainabilityCurve) -> Result<f64, MetricError> {
    if curve.points.len() < 3 {
        return Err(MetricError::TooFewPoints {
            needed: 3,
            got: curve.points.len(),
        });
    }
    Ok(coalesced_area(curve.points.windows(2).map(|w| {
        let (fa, fb) = (w[0].performance, w[1].performance);
        let fm = 0.5 * (fa + fb);
        // (fa + 4 fm + fb) / 6, written so that fa == fb yields fa exactly
        let mean = fm + (fa + fb - 2.0 * fm) / 6.0;
        (w[0].x, w[1].x, mean)
    })))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AscOutcome {
    pub value: f64,
    pub curve: SustainabilityCurve,
}

/// Truncate, partition, integrate.
pub fn asc_of_trace(trace: &Trace, config: &CurveConfig) -> Result<AscOutcome, MetricError> {
    let curve = build_curve(trace, config)?;
    let value = match config.rule {
        IntegrationRule::RectangleRightPoint => asc_rectangle(&curve),
        IntegrationRule::Simpson => asc_simpson(&curve)?,
    };
    Ok(AscOutcome { value, curve })
}
