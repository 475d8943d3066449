//! Reads a tracker-style log with per-interval energy and percent accuracy.

use sustain::{evaluate_trace, parse_csv, ColumnMap, EnergyMode, EvaluationConfig, PerformanceScale};
use sustain::report::report_text;

const LOG: &str = "\
timestamp,project_name,step,duration,energy_consumed,val_acc
2024-03-01T10:00:00,demo,50,300,0.041,31.2
2024-03-01T10:05:00,demo,100,300,0.043,55.0
2024-03-01T10:10:00,demo,150,300,0.042,68.4
2024-03-01T10:15:00,demo,200,300,0.044,74.9
2024-03-01T10:20:00,demo,250,300,0.043,77.1
2024-03-01T10:25:00,demo,300,300,0.042,78.0
";

fn main() {
    let map = ColumnMap {
        energy_mode: EnergyMode::PerInterval,
        performance_scale: PerformanceScale::Percent,
        ..ColumnMap::default()
    }
    .with_spec("iter=step,energy=energy_consumed,perf=val_acc")
    .unwrap();

    let trace = parse_csv(LOG.as_bytes(), &map, "demo").unwrap();
    for p in trace.points() {
        println!("{:>4}  {:.3} kWh  {:.3}", p.iteration, p.energy_kwh, p.performance);
    }
    let report = evaluate_trace(&trace, &EvaluationConfig::default()).unwrap();
    println!("\n{}", report_text(&report));

    // A bad row is reported with its position.
    let broken = LOG.replace("0.044", "n/a");
    if let Err(e) = parse_csv(broken.as_bytes(), &map, "demo") {
        println!("{}: {e}", e.code());
    }
}
