use proptest::prelude::*;

use equicorr::adaptive::{type2_mle_tau2, k_of_c};
use equicorr::bayes::{decide, posterior, posterior_n2, PosteriorVector};
use equicorr::frequentist::{adhoc_alpha, lrt_statistic};
use equicorr::oracle::dense_lr;
use equicorr::model::{precision_weighted, sigma_coeffs};
use equicorr::sim::{Experiment, ExperimentConfig};
use equicorr::{ModelSpec, Observation, PriorSpec};

fn case(n_max: usize, x_max: f64) -> impl Strategy<Value = (Vec<f64>, f64, f64, f64)> {
    (2..=n_max).prop_flat_map(move |n| {
        (
            prop::collection::vec(-x_max..x_max, n),
            0.0..0.999f64,
            0.01..0.99f64,
            0.0..100.0f64,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn posterior_sums_to_one((x, rho, r, tau2) in case(200, 40.0)) {
        let spec = ModelSpec::new(x.len(), rho).unwrap();
        let post = posterior(&Observation::new(x).unwrap(), &spec, &PriorSpec::new(r, tau2).unwrap()).unwrap();
        let total: f64 = post.probs().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12, "sum {}", total);
        prop_assert!(post.probs().iter().all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn precision_coefficients_differ_by_inverse_gap(n in 2usize..10_000, rho in 0.0..0.9999f64) {
        let c = sigma_coeffs(&ModelSpec::new(n, rho).unwrap());
        prop_assert!((c.a - c.b - 1.0 / (1.0 - rho)).abs() <= 1e-9 * c.a.abs().max(1.0));
    }

    #[test]
    fn two_channel_closed_form_agrees(
        x in prop::array::uniform2(-20.0..20.0f64),
        rho in 0.0..0.9999f64,
        r in 0.01..0.99f64,
        tau2 in 0.001..50.0f64,
    ) {
        let obs = Observation::new(x.to_vec()).unwrap();
        let prior = PriorSpec::new(r, tau2).unwrap();
        let a = posterior(&obs, &ModelSpec::new(2, rho).unwrap(), &prior).unwrap();
        let b = posterior_n2(&obs, rho, &prior).unwrap();
        for (p, q) in a.probs().iter().zip(b.probs()) {
            prop_assert!((p - q).abs() <= 1e-12, "{:?} vs {:?}", a.probs(), b.probs());
        }
    }

    #[test]
    fn alternatives_ordered_by_precision_weighted_square((x, rho, r, tau2) in case(30, 8.0)) {
        prop_assume!(tau2 > 0.01);
        let spec = ModelSpec::new(x.len(), rho).unwrap();
        let s = precision_weighted(&x, rho);
        let post = posterior(&Observation::new(x).unwrap(), &spec, &PriorSpec::new(r, tau2).unwrap()).unwrap();
        for i in 0..s.len() {
            for j in 0..s.len() {
                if s[i] * s[i] > s[j] * s[j] * (1.0 + 1e-9) + 1e-9 {
                    prop_assert!(post.alternative(i + 1) >= post.alternative(j + 1));
                }
            }
        }
    }

    #[test]
    fn adhoc_alpha_decreasing_in_c(n in 1usize..40, rho in 0.0..0.999f64, c in 0.0..5.0f64, dc in 0.01..1.0f64) {
        let spec = ModelSpec::new(n, rho).unwrap();
        let (a0, a1) = (adhoc_alpha(c, &spec).unwrap(), adhoc_alpha(c + dc, &spec).unwrap());
        // near c = 0 with many channels alpha rounds to exactly 1
        prop_assert!(a1 < a0 || (a0 == 1.0 && a1 == 1.0), "{} then {}", a0, a1);
    }

    #[test]
    fn type2_estimate_within_bracket((x, rho, _, _) in case(60, 6.0)) {
        let spec = ModelSpec::new(x.len(), rho).unwrap();
        let est = type2_mle_tau2(&Observation::new(x).unwrap(), &spec).unwrap();
        prop_assert!(est.tau2 >= 0.0 && est.tau2 <= est.tau2_max);
    }

    #[test]
    fn statistic_and_likelihood_ratio_are_monotone_linked(
        (x, rho, _, _) in case(12, 5.0),
        y in prop::collection::vec(-5.0..5.0f64, 12),
    ) {
        // the profile likelihood ratio from the dense covariance
        let spec = ModelSpec::new(x.len(), rho).unwrap();
        let (x, y) = (Observation::new(x).unwrap(), Observation::new(y[..spec.n()].to_vec()).unwrap());
        let (t, u) = (lrt_statistic(&x, &spec).unwrap(), lrt_statistic(&y, &spec).unwrap());
        let (lx, ly) = (dense_lr(&x, &spec).unwrap().log_lr, dense_lr(&y, &spec).unwrap().log_lr);
        prop_assume!((t - u).abs() > 1e-8 * (1.0 + t.abs()));
        prop_assert_eq!(t > u, lx < ly);
    }

    #[test]
    fn decide_breaks_ties_low(k in 2usize..10, p in 0.01..0.49f64) {
        // two equal leaders at 1/2 each
        let mut probs = vec![0.0; k];
        probs[k - 2] = 0.5;
        probs[k - 1] = 0.5;
        let d = decide(&PosteriorVector::new(probs).unwrap(), p).unwrap();
        prop_assert_eq!(d.accepted, Some(k - 2));
    }

    #[test]
    fn k_of_c_is_positive(c in -5.0..5.0f64) {
        prop_assert!(k_of_c(c) > 0.0);
    }

    #[test]
    fn config_round_trips(
        ns in prop::collection::vec(2usize..100_000, 1..4),
        rho in 0.0..0.99f64,
        r in 0.01..0.99f64,
        p in 0.01..0.99f64,
        reps in 1usize..1_000_000,
        seed in any::<u64>(),
    ) {
        let mut text = String::from("experiment = fpp\n# comment\n");
        for n in &ns {
            text += &format!("n = {n}\n");
        }
        text += &format!("rho = {rho}\nr = {r}\np = {p}\nreps = {reps}\nseed = {seed}\ntau_mode = adaptive\n");
        let cfg = ExperimentConfig::parse(&text).unwrap();
        prop_assert_eq!(cfg.experiment, Experiment::Fpp);
        prop_assert_eq!(&cfg.ns, &ns);
        prop_assert_eq!(cfg.rhos.clone(), vec![rho]);
        prop_assert_eq!((cfg.r, cfg.p, cfg.reps, cfg.seed), (r, p, reps, seed));
    }
}
