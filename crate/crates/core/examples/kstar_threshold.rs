//! The EB constant k* and the posterior threshold that hits a target FPP.

use equicorr::adaptive::{fpp_adaptive_asymptotic, solve_kstar, threshold_for_fpp, AdaptiveConfig};

fn main() -> equicorr::Result<()> {
    for (p, r) in [(0.5, 0.5), (0.9, 0.5), (0.5, 0.9)] {
        let s = solve_kstar(p, r)?;
        println!("p {p} r {r}: k* = {:.6} (c* = {:.4}, residual {:.1e})", s.k_star, s.c_star, s.residual);
    }

    let r = 0.5;
    for n in [100, 10_000, 1_000_000] {
        let p = threshold_for_fpp(0.05, r, n)?;
        let back = fpp_adaptive_asymptotic(&AdaptiveConfig::new(p, r, 0.0, n)?)?;
        println!("n {n:>7}: p = {p:.5} gives FPP {back:.6}");
    }
    Ok(())
}
