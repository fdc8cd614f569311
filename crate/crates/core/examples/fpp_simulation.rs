//! Simulated false positive probability against its asymptotic form.

use equicorr::sim::{fpp_rows, run_fpp, ExperimentConfig};

fn main() -> equicorr::Result<()> {
    let cfg = ExperimentConfig::parse(
        "experiment = fpp
         n = 100
         n = 1000
         n = 10000
         rho = 0.5
         tau_mode = adaptive
         reps = 5000
         seed = 11",
    )?;
    let points = run_fpp(&cfg)?;
    for pt in &points {
        println!(
            "n {:>6}: simulated {:.4} +/- {:.4}, asymptotic {:.4}",
            pt.n,
            pt.estimate.estimate,
            pt.estimate.stderr,
            pt.asymptotic.unwrap_or(f64::NAN)
        );
    }
    print!("{}", fpp_rows(&cfg, &points).to_csv_string());
    Ok(())
}
