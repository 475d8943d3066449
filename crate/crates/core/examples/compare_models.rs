//! Ranks several training runs in one table.

use sustain::report::{compare_csv, compare_text};
use sustain::{
    compare_table, evaluate_trace, generate_synthetic, EvaluationConfig, FmsConfig, PerfCurve,
    PowerSchedule, SortKey, SyntheticSpec,
};

fn run(label: &str, kw: f64, p_max: f64, rate: f64) -> sustain::Trace {
    let mut spec = SyntheticSpec::new(800, PowerSchedule::Constant(kw), PerfCurve::Saturating { p_max, rate });
    spec.label = label.into();
    generate_synthetic(&spec).unwrap()
}

fn main() {
    let traces = [
        run("small", 1.5, 0.78, 0.010),
        run("medium", 3.0, 0.86, 0.008),
        run("large", 4.4, 0.91, 0.004),
    ];
    let config = EvaluationConfig {
        fms: FmsConfig::with_alpha(2.0),
        ..EvaluationConfig::default()
    };
    let reports = traces
        .iter()
        .map(|t| evaluate_trace(t, &config).unwrap())
        .collect::<Vec<_>>();

    for key in [SortKey::Fms, SortKey::Asc] {
        let table = compare_table(reports.clone(), key, config);
        println!("sorted by {}:\n{}", key.as_str(), compare_text(&table));
    }
    print!("{}", compare_csv(&compare_table(reports, SortKey::Fms, config)));
}
