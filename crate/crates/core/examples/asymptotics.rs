//! Large-n rates: fixed versus adaptive slab, detection boundary, tail bounds.

use equicorr::adaptive::{fpp_adaptive_asymptotic, fpp_type2_asymptotic, tau2_max_fpp, AdaptiveConfig};
use equicorr::asymptotics::{detection_boundary, fpp_fixed_tau_rate, normal_tail_bounds};
use equicorr::{ModelSpec, PriorSpec};

fn main() -> equicorr::Result<()> {
    let (p, r, rho) = (0.5, 0.5, 0.0);
    let fixed = PriorSpec::new(r, 1.0)?;
    println!("{:>10} {:>12} {:>12} {:>12} {:>10}", "n", "fixed tau2", "adaptive", "type II", "z^2 bound");
    for e in [2, 3, 4, 6, 9] {
        let n = 10usize.pow(e);
        let spec = ModelSpec::new(n, rho)?;
        let cfg = AdaptiveConfig::new(p, r, rho, n)?;
        let slab = PriorSpec::new(r, tau2_max_fpp(&cfg)?)?;
        println!(
            "{n:>10} {:>12.3e} {:>12.5} {:>12.5} {:>10.3}",
            fpp_fixed_tau_rate(&spec, &fixed, p)?,
            fpp_adaptive_asymptotic(&cfg)?,
            fpp_type2_asymptotic(p, r, n)?,
            detection_boundary(&spec, &slab, p)?
        );
    }

    for t in [1.0, 3.0, 6.0] {
        let b = normal_tail_bounds(t)?;
        println!("P(Z > {t}) in [{:.4e}, {:.4e}]", b.lower, b.upper);
    }
    Ok(())
}
