//! Energy metric, FMS and the raw-energy baselines for a single checkpoint.

use sustain::{energy_metric, fms, sam_metric, score_metric, si_metric, BaselineConfig};

fn main() {
    let (performance, kwh) = (0.936, 0.49);
    let alpha = 1.6;
    let e = energy_metric(kwh, alpha).unwrap();
    println!("E({kwh} kWh, alpha={alpha}) = {e:.4}");

    for beta in [0.5, 1.0, 2.0] {
        let v = fms(performance, e, beta).unwrap();
        println!("FMS beta={beta:<3} = {v:.4}");
    }

    let cfg = BaselineConfig::default();
    println!("Score = {:.4}", score_metric(performance, kwh).unwrap());
    println!("SI    = {:.4}", si_metric(performance, kwh, &cfg).unwrap());
    println!("SAM   = {:.4}", sam_metric(performance, kwh, &cfg).unwrap());

    // SAM divides by log10(E) and is undefined at exactly 1 kWh.
    match sam_metric(performance, 1.0, &cfg) {
        Ok(v) => println!("SAM at 1 kWh = {v}"),
        Err(e) => println!("SAM at 1 kWh: {} ({})", e.code(), e),
    }
}
