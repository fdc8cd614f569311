//! Null posterior trajectories: P(M_0 | x) drifts back to the prior weight.

use equicorr::sim::{run, ExperimentConfig};

fn main() -> equicorr::Result<()> {
    let cfg = ExperimentConfig::parse(
        "experiment = null_posterior_convergence
         n = 10
         n = 100
         n = 1000
         n = 10000
         rho = 0.1
         rho = 0.9
         tau2 = 1
         reps = 50
         seed = 2",
    )?;
    let table = run(&cfg)?;
    for row in table.agg("abs_dev") {
        println!("rho {:.1} n {:>6}: mean |P0 - r| = {:.4}", row.rho, row.n, row.value);
    }
    Ok(())
}
