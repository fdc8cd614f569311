//! Deterministic Monte Carlo and grid checks of the model's stated invariants.

use equicorr::adaptive::{
    fpp_adaptive_asymptotic, fpp_type2_asymptotic, k_of_c, solve_kstar, tau2_max_fpp, type2_mle_tau2, AdaptiveConfig,
};
use equicorr::asymptotics::{detection_boundary, fpp_fixed_tau_rate, normal_tail_bounds};
use equicorr::frequentist::{
    adhoc_alpha, adhoc_critical_value, adhoc_rejects, adhoc_rho_limits, lrt_rejects, lrt_statistic_with_index,
    CriticalValue, Method,
};
use equicorr::model::{sample, sample_into, z_transform};
use equicorr::numeric::normal;
use equicorr::{ModelSpec, Observation, PriorSpec, RandomStream, TruthScenario};

#[test]
fn sampler_covariance_within_four_standard_errors() {
    let n = 20;
    let reps = 200_000u64;
    for (g, rho) in [0.0, 0.3, 0.7, 0.95].into_iter().enumerate() {
        let spec = ModelSpec::new(n, rho).unwrap();
        let mut x = vec![0.0; n];
        let mut sum = vec![0.0; n];
        let mut cross = vec![0.0; n * n];
        for rep in 0..reps {
            sample_into(&TruthScenario::null(), &spec, &mut RandomStream::for_replicate(1, g as u64, rep), &mut x);
            for i in 0..n {
                sum[i] += x[i];
                for j in i..n {
                    cross[i * n + j] += x[i] * x[j];
                }
            }
        }
        let d = reps as f64;
        for i in 0..n {
            for j in i..n {
                let cov = cross[i * n + j] / d - sum[i] * sum[j] / (d * d);
                let want = if i == j { 1.0 } else { rho };
                // Var(X_i X_j) = 1 + rho_ij^2 for unit-variance normals
                let se = ((1.0 + want * want) / d).sqrt();
                assert!((cov - want).abs() < 4.0 * se, "rho {rho} ({i},{j}): {cov} vs {want}");
            }
        }
    }
}

/// Kolmogorov–Smirnov distance of pooled values from the standard normal.
fn ks_normal(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal::cdf(x);
            (f - i as f64 / m).abs().max((f - (i + 1) as f64 / m).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn z_scores_approach_standard_normal() {
    let pooled = 100_000;
    let ds: Vec<f64> = [3usize, 10, 1000]
        .iter()
        .map(|&n| {
            let spec = ModelSpec::new(n, 0.6).unwrap();
            let mut all = Vec::with_capacity(pooled);
            let mut rep = 0;
            while all.len() < pooled {
                let x = sample(&TruthScenario::null(), &spec, &mut RandomStream::new(2, rep)).unwrap();
                all.extend(z_transform(&x, &spec).unwrap());
                rep += 1;
            }
            ks_normal(all)
        })
        .collect();
    assert!(ds[0] > ds[1] && ds[1] > ds[2], "{ds:?}");
}

#[test]
fn max_idiosyncratic_term_below_power_bound() {
    let n = 10_000;
    let bound = (n as f64).powf(0.5 - 0.1);
    let mut z = vec![0.0; n];
    let ok = (0..1000)
        .filter(|&rep| {
            let mut rng = RandomStream::new(3, rep);
            rng.fill_normal(&mut z);
            z.iter().all(|v| v.abs() <= bound)
        })
        .count();
    assert!(ok as f64 >= 0.999 * 1000.0);
}

#[test]
fn adhoc_alpha_monotone_and_continuous() {
    let spec = ModelSpec::new(8, 0.4).unwrap();
    let mut prev = 1.0;
    for i in 0..=60 {
        let a = adhoc_alpha(0.1 * i as f64, &spec).unwrap();
        assert!(a < prev || i == 0, "not decreasing at c = {}", 0.1 * i as f64);
        prev = a;
    }
    let mut prev = adhoc_alpha(2.5, &ModelSpec::new(8, 0.0).unwrap()).unwrap();
    for i in 1..=9999 {
        let a = adhoc_alpha(2.5, &ModelSpec::new(8, i as f64 * 1e-4).unwrap()).unwrap();
        assert!((a - prev).abs() < 2e-3, "jump at rho = {}", i as f64 * 1e-4);
        prev = a;
    }
}

#[test]
fn adhoc_endpoints_match_rho_limits() {
    // the rho -> 1 gap grows with n (about 1.3e-4 at n = 50), so stay at small n
    for n in [1, 2, 10] {
        let (lo, hi) = adhoc_rho_limits(0.05, n).unwrap();
        let c0 = adhoc_critical_value(0.05, &ModelSpec::new(n, 1e-12).unwrap()).unwrap().c;
        let c1 = adhoc_critical_value(0.05, &ModelSpec::new(n, 1.0 - 1e-6).unwrap()).unwrap().c;
        assert!((normal::cdf(c0) - lo).abs() < 1e-4);
        assert!((normal::cdf(c1) - hi).abs() < 1e-4, "n {n}: {} vs {hi}", normal::cdf(c1));
    }
}

#[test]
fn lrt_and_adhoc_agree_without_correlation() {
    let spec = ModelSpec::new(7, 0.0).unwrap();
    let adhoc = adhoc_critical_value(0.05, &spec).unwrap();
    let lrt = CriticalValue {
        c: adhoc.c * adhoc.c,
        alpha: adhoc.alpha,
        method: Method::Lrt,
        stderr: None,
        reps: None,
        warning: None,
    };
    for rep in 0..1000 {
        let truth = if rep % 2 == 0 {
            TruthScenario::null()
        } else {
            TruthScenario::alternative(3, 2.5).unwrap()
        };
        let x = sample(&truth, &spec, &mut RandomStream::new(4, rep)).unwrap();
        assert_eq!(adhoc_rejects(&x, &adhoc), lrt_rejects(&x, &spec, &lrt).unwrap());
    }
}

#[test]
fn two_channel_lrt_argmax_split_is_lopsided() {
    // The symmetric split is not what happens: T_j ranks channels by |x_j|
    // once rho is near one, and the signal channel wins most of the time.
    let spec = ModelSpec::new(2, 0.9999).unwrap();
    let truth = TruthScenario::alternative(1, 2.0).unwrap();
    let first = (0..10_000)
        .filter(|&rep| {
            let x = sample(&truth, &spec, &mut RandomStream::new(5, rep)).unwrap();
            let (_, j) = lrt_statistic_with_index(&x, &spec).unwrap();
            let v = x.values();
            assert_eq!(j, if v[0].abs() >= v[1].abs() { 0 } else { 1 });
            j == 0
        })
        .count();
    let share = first as f64 / 10_000.0;
    assert!((share - 0.5).abs() > 0.05, "share {share}");
}

#[test]
fn kstar_residual_on_grid() {
    for i in 1..=20 {
        for j in 1..=20 {
            let (p, r) = (i as f64 / 21.0, j as f64 / 21.0);
            let s = solve_kstar(p, r).unwrap();
            assert!(s.residual <= 1e-10, "p {p} r {r}: {}", s.residual);
        }
    }
}

fn boundary_data(n: usize, rho: f64, c: f64) -> Observation {
    let nf = n as f64;
    let scale = (1.0 - rho).sqrt();
    let mut x: Vec<f64> = (1..n)
        .map(|j| scale * normal::quantile((j as f64 - 0.5) / (n - 1) as f64))
        .collect();
    x.push(scale * (2.0 * nf.ln() + nf.ln().ln() + c).sqrt());
    Observation::new(x).unwrap()
}

#[test]
fn type2_boundary_error_decreases() {
    for rho in [0.0, 0.5] {
        let mut prev = f64::INFINITY;
        for n in [1_000, 10_000, 100_000] {
            let spec = ModelSpec::new(n, rho).unwrap();
            let est = type2_mle_tau2(&boundary_data(n, rho, 0.0), &spec).unwrap();
            assert!(est.tau2 >= 0.0 && est.tau2 <= est.tau2_max);
            let err = (est.tau2 / ((1.0 - rho) * k_of_c(0.0) * (n as f64).ln()) - 1.0).abs();
            assert!(err < prev, "rho {rho} n {n}: {err} >= {prev}");
            prev = err;
        }
    }
}

/// `(sqrt(1 - c_n)/n) sum_i exp{c_n z_i^2 / 2}` with `c_n = t/(1 - rho + t)`, `t = (1-rho) k ln n`.
fn eb_statistic(n: usize, rho: f64, k: f64, reps: u64) -> Vec<f64> {
    let spec = ModelSpec::new(n, rho).unwrap();
    let t = (1.0 - rho) * k * (n as f64).ln();
    let c = t / (1.0 - rho + t);
    (0..reps)
        .map(|rep| {
            let x = sample(&TruthScenario::null(), &spec, &mut RandomStream::new(6, rep)).unwrap();
            let z = z_transform(&x, &spec).unwrap();
            (1.0 - c).sqrt() / n as f64 * z.iter().map(|z| (c * z * z / 2.0).exp()).sum::<f64>()
        })
        .collect()
}

#[test]
fn eb_statistic_concentrates_at_limit() {
    let k = solve_kstar(0.5, 0.5).unwrap().k_star;
    let mut v = eb_statistic(100_000, 0.3, k, 201);
    v.sort_by(f64::total_cmp);
    let limit = 2.0 * normal::cdf((2.0 / k).sqrt()) - 1.0;
    assert!((v[100] - limit).abs() < 0.01, "median {} vs {limit}", v[100]);
}

#[test]
#[ignore = "unattainable as stated: the statistic has expectation near 1, so its mean does not approach the in-probability limit"]
fn eb_statistic_mean_at_limit() {
    let k = solve_kstar(0.5, 0.5).unwrap().k_star;
    let v = eb_statistic(100_000, 0.3, k, 400);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let limit = 2.0 * normal::cdf((2.0 / k).sqrt()) - 1.0;
    assert!((mean - limit).abs() < 0.01, "mean {mean} vs {limit}");
}

#[test]
fn adaptive_rates_are_inverse_log_and_free_of_rho() {
    let (p, r) = (0.5, 0.5);
    let scaled = |n: usize, rho: f64| fpp_adaptive_asymptotic(&AdaptiveConfig::new(p, r, rho, n).unwrap()).unwrap();
    for n in [1_000, 100_000, 10_000_000] {
        assert_eq!(scaled(n, 0.0), scaled(n, 0.8));
    }
    let a: Vec<f64> = [1e3f64, 1e6, 1e9, 1e12]
        .iter()
        .map(|&n| scaled(n as usize, 0.0) * n.ln())
        .collect();
    let b: Vec<f64> = [1e3f64, 1e6, 1e9, 1e12]
        .iter()
        .map(|&n| fpp_type2_asymptotic(p, r, n as usize).unwrap() * n.ln())
        .collect();
    for v in a.iter().chain(&b) {
        assert!(*v > 0.01 && *v < 1.0, "{v}");
    }
    // ln n * FPP settles toward a constant
    assert!((a[3] / a[2] - 1.0).abs() < (a[1] / a[0] - 1.0).abs());
    assert!((b[3] / b[2] - 1.0).abs() < (b[1] / b[0] - 1.0).abs() + 1e-12);
}

fn boundary_gap(n: usize) -> f64 {
    let (p, r, rho) = (0.5, 0.5, 0.3);
    let spec = ModelSpec::new(n, rho).unwrap();
    let t = tau2_max_fpp(&AdaptiveConfig::new(p, r, rho, n).unwrap()).unwrap();
    let z2 = detection_boundary(&spec, &PriorSpec::new(r, t).unwrap(), p).unwrap();
    let nf = n as f64;
    let q = (p / ((1.0 - p) * (1.0 - r))).ln();
    z2 - (2.0 * nf.ln() + nf.ln().ln() + 2.0 * q + 1.0 + std::f64::consts::LN_2)
}

#[test]
#[ignore = "unattainable as stated: the remainder decays like ln ln n / ln n and is still about 0.19 at n = 1e6"]
fn boundary_with_adaptive_slab_matches_constants() {
    let gap = boundary_gap(1_000_000);
    assert!(gap.abs() < 0.05, "gap {gap}");
}

#[test]
fn boundary_with_adaptive_slab_approaches_constants() {
    let gaps: Vec<f64> = [1e3, 1e6, 1e9, 1e12, 1e15].iter().map(|&n| boundary_gap(n as usize)).collect();
    assert!(gaps.windows(2).all(|w| w[1].abs() < w[0].abs()), "{gaps:?}");
}

#[test]
fn fixed_slab_rate_falls_below_adaptive() {
    let (p, r) = (0.5, 0.5);
    let prior = PriorSpec::new(r, 1.0).unwrap();
    let ratio = |n: usize| {
        fpp_fixed_tau_rate(&ModelSpec::new(n, 0.0).unwrap(), &prior, p).unwrap()
            / fpp_adaptive_asymptotic(&AdaptiveConfig::new(p, r, 0.0, n).unwrap()).unwrap()
    };
    let rs: Vec<f64> = [1e2, 1e3, 1e4, 1e6, 1e9].iter().map(|&n| ratio(n as usize)).collect();
    assert!(rs.windows(2).all(|w| w[1] < w[0]), "{rs:?}");
    assert!(rs[4] < 1e-3);
}

#[test]
fn tail_bounds_bracket_on_grid() {
    for i in 1..=400 {
        let t = 0.1 * i as f64;
        let b = normal_tail_bounds(t).unwrap();
        // compare on the log scale; beyond t ~ 38 the plain values underflow
        let ln_sf = normal::ln_sf(t);
        let ln_lo = normal::ln_pdf(t) + t.ln() - (t * t + 1.0).ln();
        let ln_hi = normal::ln_pdf(t) - t.ln();
        assert!(ln_lo <= ln_sf + 1e-12 && ln_sf <= ln_hi + 1e-12, "t = {t}");
        // subnormal values carry too few digits for a relative comparison
        if b.lower > f64::MIN_POSITIVE {
            assert!(b.lower <= normal::sf(t) * (1.0 + 1e-12) && normal::sf(t) <= b.upper * (1.0 + 1e-12));
        }
    }
}
