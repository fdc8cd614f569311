//! Family-wise critical values for the ad hoc max-|x| test and the LRT.

use equicorr::frequentist::{adhoc_critical_value, adhoc_rho_limits, lrt_critical_value};
use equicorr::{ModelSpec, RandomStream};

fn main() -> equicorr::Result<()> {
    let (alpha, n) = (0.05, 10);
    let (lo, hi) = adhoc_rho_limits(alpha, n)?;
    println!("Phi(c) limits: rho=0 {lo:.6}, rho->1 {hi:.6}");

    for rho in [0.0, 0.3, 0.6, 0.9, 0.99, 0.9999] {
        let spec = ModelSpec::new(n, rho)?;
        let adhoc = adhoc_critical_value(alpha, &spec)?;
        let lrt = lrt_critical_value(alpha, &spec, 20_000, &mut RandomStream::new(1, 0))?;
        println!(
            "rho {rho:<7} ad hoc c {:.4}   LRT c {:.3} +/- {:.3}",
            adhoc.c,
            lrt.c,
            lrt.stderr.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
