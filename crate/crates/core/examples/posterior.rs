//! Exact posterior model probabilities and the thresholded decision.

use equicorr::bayes::{decide, posterior, posterior_asymptotic};
use equicorr::{ModelSpec, Observation, PriorSpec};

fn main() -> equicorr::Result<()> {
    let spec = ModelSpec::new(6, 0.4)?;
    let prior = PriorSpec::new(0.5, 4.0)?;
    let x = Observation::new(vec![0.3, -0.8, 4.1, 0.2, 1.0, -0.1])?;

    let post = posterior(&x, &spec, &prior)?;
    let approx = posterior_asymptotic(&x, &spec, &prior)?;
    for (i, (p, q)) in post.probs().iter().zip(approx.probs()).enumerate() {
        println!("M{i}: exact {p:.5}  large-n {q:.5}");
    }
    for p in [0.5, 0.9, 0.99] {
        let d = decide(&post, p)?;
        println!("threshold {p}: accepted {:?}", d.accepted);
    }
    Ok(())
}
