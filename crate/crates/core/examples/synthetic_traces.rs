//! Generates synthetic traces and round-trips them through CSV and JSON.

use sustain::{
    emit_csv, emit_json, generate_synthetic, parse_csv, parse_json, ColumnMap, PerfCurve,
    PowerSchedule, SyntheticSpec,
};

fn main() {
    let curves = ["saturating:0.9", "linear:0.001", "step:300:0.2:0.8"];
    for c in curves {
        let mut spec = SyntheticSpec::new(1000, PowerSchedule::Constant(3.6), PerfCurve::parse(c, 1000).unwrap());
        spec.label = c.into();
        spec.seed = 9;
        spec.noise_sigma = 0.01;
        let t = generate_synthetic(&spec).unwrap();
        println!(
            "{c:<18} {} points, final {:.4} kWh, best perf {:.3}",
            t.len(),
            t.last().energy_kwh,
            t.max_performance()
        );

        let csv = emit_csv(&t);
        let back = parse_csv(csv.as_bytes(), &ColumnMap::default(), "x").unwrap();
        assert_eq!(back.points(), t.points());
        let json = emit_json(&t);
        assert_eq!(parse_json(json.as_bytes(), "x").unwrap().points(), t.points());
    }

    // 1.2 kW for 1500 s, then 2.4 kW: 0.5 kWh + 1.5 kWh
    let power: PowerSchedule = "1.2@1500,2.4".parse().unwrap();
    let spec = SyntheticSpec::new(3750, power, PerfCurve::Saturating { p_max: 0.9, rate: 0.002 });
    let t = generate_synthetic(&spec).unwrap();
    println!("piecewise schedule ends at {} kWh", t.last().energy_kwh);
    print!("{}", emit_csv(&t).lines().take(4).collect::<Vec<_>>().join("\n"));
    println!();
}
