//! Posterior limits when the noise variance shrinks with n.

use equicorr::sim::{run, ExperimentConfig};

fn main() -> equicorr::Result<()> {
    for regime in ["regime = zero", "regime = finite\nd = 0.5\nd = 2", "regime = infinity"] {
        let cfg = ExperimentConfig::parse(&format!(
            "experiment = info_growth\nn = 10000\nrho = 0.2\ntau2 = 1\nreps = 500\nseed = 4\n{regime}"
        ))?;
        for row in run(&cfg)?.rows.iter().filter(|r| r.is_agg()) {
            println!("{:<36} {:.4}", row.grid_param, row.value);
        }
    }
    Ok(())
}
