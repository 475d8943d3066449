//! Rescales energy by a unit factor and confirms FMS and ASC do not move
//! once alpha and w_max are rescaled with it.

use sustain::{
    generate_synthetic, scale_invariance_report, CurveConfig, FmsConfig, PerfCurve, PowerSchedule,
    SyntheticSpec,
};

fn main() {
    let mut spec = SyntheticSpec::new(600, "2.0@200,5.5".parse::<PowerSchedule>().unwrap(), PerfCurve::Saturating {
        p_max: 0.88,
        rate: 0.01,
    });
    spec.noise_sigma = 0.02;
    spec.seed = 42;
    let trace = generate_synthetic(&spec).unwrap();

    // kWh -> Wh, kWh -> MWh, and a couple of arbitrary factors
    let factors = [1e3, 1e-3, 3.6, 0.25];
    let rows = scale_invariance_report(&trace, &factors, &FmsConfig::default(), &CurveConfig::default()).unwrap();
    println!("{:>8}  {:>10}  {:>10}  same point", "factor", "fms resid", "asc resid");
    for r in rows {
        println!(
            "{:>8}  {:>10.2e}  {:>10.2e}  {}",
            r.factor, r.fms_residual, r.asc_residual, r.same_eval_point
        );
    }
}
