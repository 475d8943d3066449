//! Builds the performance vs normalized-energy curve and integrates it.

use sustain::report::{curve_csv, curve_report};
use sustain::{asc_of_trace, validate_trace, CurveConfig, IntegrationRule, PerformanceKind, TracePoint};

fn main() {
    let rows = [
        (0, 0.00, 0.10),
        (100, 0.08, 0.42),
        (200, 0.17, 0.61),
        (300, 0.29, 0.70),
        (400, 0.41, 0.76),
        (500, 0.55, 0.79),
        (600, 0.68, 0.81),
        (700, 0.80, 0.82),
        (800, 0.93, 0.83),
        (900, 1.06, 0.83),
    ];
    let points = rows.iter().map(|&(i, e, p)| TracePoint::new(i, e, p)).collect();
    let trace = validate_trace(points, "resnet", PerformanceKind::Accuracy).unwrap();

    for rule in [IntegrationRule::RectangleRightPoint, IntegrationRule::Simpson] {
        for n in [2, 4, 8] {
            let cfg = CurveConfig::new(n, 1.0, rule);
            let asc = asc_of_trace(&trace, &cfg).unwrap();
            println!("{:<7} N={n}: ASC = {:.4}", rule.as_str(), asc.value);
        }
    }

    // Samples past 1 kWh are dropped before the curve is built.
    let cfg = CurveConfig::new(4, 1.0, IntegrationRule::RectangleRightPoint);
    let out = asc_of_trace(&trace, &cfg).unwrap();
    print!("{}", curve_csv(&curve_report(trace.label(), out.value, &out.curve, cfg)));
}
