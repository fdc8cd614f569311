//! Closed-form posterior against the dense-covariance reference.
//!
//! `cargo run --example oracle_check --features oracle`

use equicorr::bayes::posterior;
use equicorr::model::sample;
use equicorr::oracle::{dense_lr, dense_posterior};
use equicorr::frequentist::lrt_statistic_with_index;
use equicorr::{ModelSpec, PriorSpec, RandomStream, TruthScenario};

fn main() -> equicorr::Result<()> {
    let spec = ModelSpec::new(12, 0.7)?;
    let prior = PriorSpec::new(0.3, 2.5)?;
    let mut worst = 0.0f64;
    for rep in 0..200 {
        let truth = TruthScenario::alternative(1 + rep as usize % 12, 2.0)?;
        let x = sample(&truth, &spec, &mut RandomStream::new(3, rep))?;
        let (fast, dense) = (posterior(&x, &spec, &prior)?, dense_posterior(&x, &spec, &prior)?);
        for (a, b) in fast.probs().iter().zip(dense.probs()) {
            worst = worst.max((a - b).abs());
        }
        assert_eq!(lrt_statistic_with_index(&x, &spec)?.1, dense_lr(&x, &spec)?.argmin);
    }
    println!("max |closed form - dense| over 200 draws: {worst:.2e}");
    Ok(())
}
