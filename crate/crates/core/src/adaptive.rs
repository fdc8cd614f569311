//! Data-adaptive choices of the slab variance `tau2`.
//!
//! Two routes: the closed-form `tau2` that maximizes the false positive
//! probability, and the Type II maximum-likelihood estimate from the
//! marginal likelihood `L_n`. Each comes with its asymptotic FPP.

use crate::error::{check_open_unit, Error, Result};
use crate::model::{precision_weighted, sigma_coeffs, ModelSpec, Observation};
use crate::numeric::lse::log_sum_exp;
use crate::numeric::roots::{brent, golden_max};
use std::f64::consts::{LN_2, PI};

/// Threshold, prior and model constants shared by the adaptive formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveConfig {
    p: f64,
    r: f64,
    rho: f64,
    n: usize,
    /// `2 ln(p / ((1-p)(1-r))) + ln 2 + 1`
    c_tau: f64,
}

impl AdaptiveConfig {
    pub fn new(p: f64, r: f64, rho: f64, n: usize) -> Result<Self> {
        check_open_unit("p", p)?;
        check_open_unit("r", r)?;
        ModelSpec::new(n, rho)?;
        let c_tau = 2.0 * log_odds(p, r) + LN_2 + 1.0;
        Ok(Self { p, r, rho, n, c_tau })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c_tau(&self) -> f64 {
        self.c_tau
    }

    /// The constant `c(p, r)` in the detection boundary; equal to `c_tau`.
    pub fn c_pr(&self) -> f64 {
        self.c_tau
    }

    /// Non-fatal remarks about the configuration (e.g. `ln ln n <= 0`).
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if (self.n as f64) <= std::f64::consts::E {
            out.push(format!(
                "n = {} gives ln ln n <= 0; the asymptotic tau2 formula is outside its regime",
                self.n
            ));
        }
        out
    }
}

/// `ln(p / ((1-p)(1-r)))`
fn log_odds(p: f64, r: f64) -> f64 {
    p.ln() - (-p).ln_1p() - (-r).ln_1p()
}

fn ln_n_terms(n: usize) -> f64 {
    let ln_n = (n as f64).ln();
    2.0 * ln_n + ln_n.ln()
}

/// `(1-rho) [2 ln n + ln ln n + 2 ln(p/((1-p)(1-r))) + ln 2]`.
pub fn tau2_max_fpp(cfg: &AdaptiveConfig) -> Result<f64> {
    if cfg.n < 2 {
        return Err(Error::param("n", "needs n >= 2"));
    }
    let v = (1.0 - cfg.rho) * (ln_n_terms(cfg.n) + 2.0 * log_odds(cfg.p, cfg.r) + LN_2);
    if v <= 0.0 {
        return Err(Error::Domain(format!(
            "FPP-maximizing tau2 is {v:.4} <= 0 for n = {}, p = {}, r = {}",
            cfg.n, cfg.p, cfg.r
        )));
    }
    Ok(v)
}

/// `e^{-1/2} sqrt(2/pi) ((1-p)(1-r)/p) / (2 ln n + ln ln n + c_tau)`; free of `rho`.
pub fn fpp_adaptive_asymptotic(cfg: &AdaptiveConfig) -> Result<f64> {
    if cfg.n < 3 {
        return Err(Error::param("n", "needs n >= 3"));
    }
    fpp_adaptive_core(cfg.p, cfg.r, cfg.n)
}

fn fpp_adaptive_core(p: f64, r: f64, n: usize) -> Result<f64> {
    let denom = ln_n_terms(n) + 2.0 * log_odds(p, r) + LN_2 + 1.0;
    if denom <= 0.0 {
        return Err(Error::Domain(format!(
            "asymptotic FPP undefined: 2 ln n + ln ln n + c_tau = {denom:.4} <= 0"
        )));
    }
    Ok((-0.5f64).exp() * (2.0 / PI).sqrt() * (1.0 - p) * (1.0 - r) / p / denom)
}

/// `log L_n(tau2) = -ln n - 0.5 ln(1 + tau2 a) + ln sum_i exp{tau2 s_i^2 / (2(1 + tau2 a))}`
/// with `s = Sigma0^{-1} x`.
pub fn marginal_likelihood(tau2: f64, x: &Observation, spec: &ModelSpec) -> Result<f64> {
    check_tau2(tau2)?;
    x.check_len(spec)?;
    let lik = Likelihood::new(x, spec);
    Ok(lik.log_l(tau2))
}

/// Large-`n` form
/// `(1/n) sqrt((1-rho)/(1-rho+tau2)) sum_i exp{tau2 z_i^2 / (2(1-rho+tau2))}`, log scale.
pub fn marginal_likelihood_z_form(tau2: f64, x: &Observation, spec: &ModelSpec) -> Result<f64> {
    check_tau2(tau2)?;
    let z = crate::model::z_transform(x, spec)?;
    let q = 1.0 - spec.rho();
    let coef = tau2 / (2.0 * (q + tau2));
    let terms: Vec<f64> = z.iter().map(|v| coef * v * v).collect();
    Ok(-(spec.n() as f64).ln() + 0.5 * (q / (q + tau2)).ln() + log_sum_exp(&terms))
}

fn check_tau2(tau2: f64) -> Result<()> {
    if tau2 >= 0.0 && tau2.is_finite() {
        Ok(())
    } else {
        Err(Error::param("tau2", format!("must be finite and >= 0, got {tau2}")))
    }
}

struct Likelihood {
    s2: Vec<f64>,
    a: f64,
    ln_n: f64,
    buf: std::cell::RefCell<Vec<f64>>,
}

impl Likelihood {
    fn new(x: &Observation, spec: &ModelSpec) -> Self {
        let s2: Vec<f64> = precision_weighted(x.values(), spec.rho())
            .into_iter()
            .map(|v| v * v)
            .collect();
        let n = s2.len();
        Self {
            s2,
            a: sigma_coeffs(spec).a,
            ln_n: (n as f64).ln(),
            buf: std::cell::RefCell::new(vec![0.0; n]),
        }
    }

    fn log_l(&self, tau2: f64) -> f64 {
        let g = 1.0 + tau2 * self.a;
        let coef = tau2 / (2.0 * g);
        let mut buf = self.buf.borrow_mut();
        for (b, s2) in buf.iter_mut().zip(&self.s2) {
            *b = coef * s2;
        }
        -self.ln_n - 0.5 * g.ln() + log_sum_exp(&buf)
    }

    /// `sum_i w_i s_i^2 - a (1 + tau2 a)`; zero at a stationary point.
    fn score(&self, tau2: f64) -> f64 {
        let g = 1.0 + tau2 * self.a;
        let coef = tau2 / (2.0 * g);
        let m = self.s2.iter().copied().fold(0.0f64, f64::max) * coef;
        let (mut num, mut den) = (0.0, 0.0);
        for &s2 in &self.s2 {
            let w = (coef * s2 - m).exp();
            num += w * s2;
            den += w;
        }
        num / den - self.a * g
    }
}

/// Where the Type II estimate ended up relative to its search interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// `tau2 = 0`: the likelihood is decreasing from the origin.
    Lower,
    /// `tau2 = tau2_max`: still increasing at the end of the bracket.
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Type2Estimate {
    pub tau2: f64,
    pub log_likelihood: f64,
    pub boundary: Option<Boundary>,
    /// Upper end of the search interval.
    pub tau2_max: f64,
}

/// Upper end of the Type II search: `10 (1-rho)(2 ln n + ln ln n + 20)`.
pub fn type2_search_max(spec: &ModelSpec) -> f64 {
    10.0 * (1.0 - spec.rho()) * (ln_n_terms(spec.n()) + 20.0)
}

/// Maximize `L_n` over `[0, tau2_max]`.
///
/// A 64-point scan on `ln(1 + tau2)` picks the bracket, golden-section search
/// refines it, and a root solve of the score equation
/// `sum_i w_i s_i^2 = a (1 + tau2 a)` polishes the result.
pub fn type2_mle_tau2(x: &Observation, spec: &ModelSpec) -> Result<Type2Estimate> {
    spec.require_n_at_least(2)?;
    x.check_len(spec)?;
    const GRID: usize = 64;
    let lik = Likelihood::new(x, spec);
    let tau2_max = type2_search_max(spec);
    let u_max = tau2_max.ln_1p();
    let at = |u: f64| lik.log_l(u.exp_m1());
    let us: Vec<f64> = (0..GRID).map(|i| u_max * i as f64 / (GRID - 1) as f64).collect();
    let vals: Vec<f64> = us.iter().map(|&u| at(u)).collect();
    let best = vals
        .iter()
        .enumerate()
        .fold(0, |b, (i, &v)| if v > vals[b] { i } else { b });

    let done = |tau2: f64, boundary| Type2Estimate {
        tau2,
        log_likelihood: lik.log_l(tau2),
        boundary,
        tau2_max,
    };
    if best == 0 && lik.score(0.0) <= 0.0 {
        return Ok(done(0.0, Some(Boundary::Lower)));
    }
    if best == GRID - 1 && lik.score(tau2_max) >= 0.0 {
        return Ok(done(tau2_max, Some(Boundary::Upper)));
    }
    let lo = us[best.saturating_sub(1)];
    let hi = us[(best + 1).min(GRID - 1)];
    let u = golden_max(at, lo, hi, 1e-10);
    let mut tau2 = u.exp_m1();

    let (t_lo, t_hi) = (lo.exp_m1(), hi.exp_m1());
    if lik.score(t_lo) > 0.0 && lik.score(t_hi) < 0.0 {
        if let Ok(root) = brent(|t| lik.score(t), t_lo, t_hi, 1e-12 * tau2.max(1e-12)) {
            if lik.log_l(root) >= lik.log_l(tau2) {
                tau2 = root;
            }
        }
    }
    Ok(done(tau2, None))
}

/// Which of two candidate expressions for `k(c)` to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KForm {
    /// `(1/2 + e^{-c/2}/sqrt(pi))^{-1}`, from maximizing the limit of `L_n`.
    #[default]
    Derivation,
    /// `(1 + 2 e^{-c/2}/sqrt(pi))^{-1}`; half the derived value.
    HalfScale,
}

/// Limiting `tau2_hat / ((1-rho) ln n)` when the largest `z_i^2` equals
/// `2 ln n + ln ln n + c`.
pub fn k_of_c(c: f64) -> f64 {
    k_of_c_form(c, KForm::Derivation)
}

pub fn k_of_c_form(c: f64, form: KForm) -> f64 {
    let e = (-0.5 * c).exp() / PI.sqrt();
    match form {
        KForm::Derivation => 1.0 / (0.5 + e),
        KForm::HalfScale => 1.0 / (1.0 + 2.0 * e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KStarSolution {
    pub k_star: f64,
    /// Absolute residual of the defining equation at `k_star`.
    pub residual: f64,
    /// The `c` with `k(c) = k_star`.
    pub c_star: f64,
}

/// `-2 ln(sqrt(pi)(1/k - 1/2)) - ln k - 2 ln q - 2/k`
fn kstar_equation(k: f64, ln_q: f64) -> f64 {
    -2.0 * (PI.sqrt() * (1.0 / k - 0.5)).ln() - k.ln() - 2.0 * ln_q - 2.0 / k
}

/// Root in `(0, 2)` of `-2 ln(sqrt(pi)(1/k - 1/2)) = ln k + 2 ln(p/((1-p)(1-r))) + 2/k`.
pub fn solve_kstar(p: f64, r: f64) -> Result<KStarSolution> {
    check_open_unit("p", p)?;
    check_open_unit("r", r)?;
    let ln_q = log_odds(p, r);
    let k = brent(|k| kstar_equation(k, ln_q), 1e-6, 2.0 - 1e-9, 1e-15)?;
    let residual = kstar_equation(k, ln_q).abs();
    if residual > 1e-10 {
        return Err(Error::numerical(
            "solve_kstar",
            format!("residual {residual:e} at k = {k}"),
        ));
    }
    Ok(KStarSolution {
        k_star: k,
        residual,
        c_star: -2.0 * (PI.sqrt() * (1.0 / k - 0.5)).ln(),
    })
}

/// `(1/k* - 1/2) / ln n`; free of `rho`.
pub fn fpp_type2_asymptotic(p: f64, r: f64, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::param("n", "needs n >= 3"));
    }
    let k = solve_kstar(p, r)?.k_star;
    Ok((1.0 / k - 0.5) / (n as f64).ln())
}

/// Threshold `p` at which the FPP-maximizing-`tau2` asymptotic FPP equals `target_fpp`.
///
/// On the branch where the formula's denominator is positive the FPP falls
/// monotonically from `+inf` to 0 as `p` rises, so every target in `(0, 1)`
/// has exactly one solution.
pub fn threshold_for_fpp(target_fpp: f64, r: f64, n: usize) -> Result<f64> {
    check_open_unit("r", r)?;
    if n < 3 {
        return Err(Error::param("n", "needs n >= 3"));
    }
    if !(target_fpp > 0.0 && target_fpp < 1.0) {
        return Err(Error::Domain(format!(
            "target FPP {target_fpp} is unattainable; attainable targets lie in (0, 1)"
        )));
    }
    // work in u = logit(p); the denominator vanishes at u0
    let base = ln_n_terms(n) + LN_2 + 1.0;
    let u0 = -0.5 * base + (-r).ln_1p();
    let ln_fpp = |u: f64| {
        let denom = base + 2.0 * (u - (-r).ln_1p());
        -0.5 + 0.5 * (2.0 / PI).ln() - u + (-r).ln_1p() - denom.ln()
    };
    let target = target_fpp.ln();
    let lo = u0 + 1e-12;
    let mut hi = u0 + 1.0;
    while ln_fpp(hi) > target {
        hi = u0 + 2.0 * (hi - u0);
        if hi - u0 > 1e4 {
            return Err(Error::numerical("threshold_for_fpp", "could not bracket the threshold"));
        }
    }
    let u = brent(|u| ln_fpp(u) - target, lo, hi, 1e-14)?;
    Ok(1.0 / (1.0 + (-u).exp()))
}
