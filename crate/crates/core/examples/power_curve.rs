//! Probability of accepting the true alternative as the signal grows.

use equicorr::sim::{run_power_curve, ExperimentConfig};

fn main() -> equicorr::Result<()> {
    let mut text = String::from("experiment = power_curve\nn = 1000\nrho = 0.3\ntau_mode = adaptive\nreps = 2000\nseed = 5\n");
    for k in 0..=12 {
        text += &format!("theta = {}\n", 0.5 * k as f64);
    }
    let cfg = ExperimentConfig::parse(&text)?;
    for pt in run_power_curve(&cfg)? {
        let bar = "#".repeat((40.0 * pt.rate.estimate).round() as usize);
        println!("theta {:>4.1} {:.3} {bar}", pt.theta, pt.rate.estimate);
    }
    Ok(())
}
