//! Sweeps alpha, beta, w_max and N and checks whether rankings survive.

use sustain::report::{ranks_csv, sweep_text};
use sustain::{
    generate_synthetic, rank_preservation_check, sweep, CurveConfig, FmsConfig, PerfCurve,
    PowerSchedule, SweepParameter, SweepSpec, SyntheticSpec,
};

fn run(label: &str, kw: f64, p_max: f64) -> sustain::Trace {
    let mut spec = SyntheticSpec::new(1000, PowerSchedule::Constant(kw), PerfCurve::Saturating { p_max, rate: 0.006 });
    spec.label = label.into();
    generate_synthetic(&spec).unwrap()
}

fn main() {
    let traces = vec![run("frugal", 1.2, 0.80), run("hungry", 6.0, 0.92)];
    let fms = FmsConfig::with_alpha(1.0);
    let curve = CurveConfig::default();

    let sweeps = [
        (SweepParameter::Alpha, vec![0.1, 0.5, 1.0, 2.0, 4.0]),
        (SweepParameter::Beta, vec![0.25, 0.5, 1.0, 2.0, 4.0]),
        (SweepParameter::Wmax, vec![0.25, 0.5, 1.0, 2.0]),
        (SweepParameter::NPartitions, vec![1.0, 2.0, 5.0, 10.0, 50.0]),
    ];
    for (param, values) in sweeps {
        let spec = SweepSpec::new(param, values, fms, curve).unwrap();
        println!("{}", sweep_text(&sweep(&traces, &spec)));
        let ranks = rank_preservation_check(&traces, &spec).unwrap();
        match ranks.first_flip() {
            Some(v) => println!("ranking flips at {}={v}\n", param.as_str()),
            None => println!("ranking stable across {}\n", param.as_str()),
        }
        if param == SweepParameter::Alpha {
            print!("{}", ranks_csv(&ranks));
        }
    }

    // Alpha given as anchor iterations: alpha = factor * E(anchor).
    let spec = SweepSpec::new(SweepParameter::Alpha, vec![50.0, 100.0, 500.0], fms, curve)
        .unwrap()
        .anchored(100.0)
        .unwrap();
    println!("{}", sweep_text(&sweep(&traces, &spec)));
}
