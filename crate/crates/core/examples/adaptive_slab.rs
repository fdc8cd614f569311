//! Slab variance chosen to maximize the false positive probability, and the
//! type II maximum likelihood estimate on simulated data.

use equicorr::adaptive::{fpp_adaptive_asymptotic, tau2_max_fpp, type2_mle_tau2, AdaptiveConfig};
use equicorr::model::sample;
use equicorr::{ModelSpec, RandomStream, TruthScenario};

fn main() -> equicorr::Result<()> {
    let (p, r, rho) = (0.5, 0.5, 0.3);
    for n in [100, 1_000, 10_000, 100_000] {
        let cfg = AdaptiveConfig::new(p, r, rho, n)?;
        let t = tau2_max_fpp(&cfg)?;
        let fpp = fpp_adaptive_asymptotic(&cfg)?;

        let spec = ModelSpec::new(n, rho)?;
        let x = sample(&TruthScenario::null(), &spec, &mut RandomStream::new(7, n as u64))?;
        let est = type2_mle_tau2(&x, &spec)?;
        println!(
            "n {n:>6}: tau2* {t:8.3}  FPP ~ {fpp:.5}   type II tau2 {:.3} ({:?})",
            est.tau2, est.boundary
        );
    }
    Ok(())
}
