//! Closed-form large-`n` and `rho -> 1` results: the fixed-`tau2` false
//! positive rate, the detection boundary, posterior limits, normal tail
//! bounds, and the growing-information regimes.

use crate::error::{Error, Result};
use crate::model::{ModelSpec, Observation, PriorSpec, TruthScenario};
use crate::numeric::normal;
use std::f64::consts::PI;

fn require_positive_tau2(prior: &PriorSpec) -> Result<f64> {
    let t = prior.tau2();
    if t > 0.0 {
        Ok(t)
    } else {
        Err(Error::Domain("tau2 = 0: the Bayes test never fires".into()))
    }
}

/// Leading-order FPP of the fixed-`tau2` Bayes test under the null, for
/// `n = spec.n()`:
///
/// `n^{-g} |tau| (1-rho)^{(1+g)/2} / (sqrt(pi) (1-rho+tau2)^{1+g/2})
///   ((1-r)(1-p)/p)^{1+g} (ln(n/(1-r)) + ln((p/(1-p)) sqrt((1-rho+tau2)/(1-rho))))^{-1/2}`
/// with `g = (1-rho)/tau2`.
///
/// The `(1-rho)^{(1+g)/2}` factor follows from the tail-probability step of
/// the derivation; it equals one at `rho = 0`.
pub fn fpp_fixed_tau_rate(spec: &ModelSpec, prior: &PriorSpec, p: f64) -> Result<f64> {
    crate::error::check_open_unit("p", p)?;
    let t = require_positive_tau2(prior)?;
    let (n, rho, r) = (spec.n() as f64, spec.rho(), prior.r());
    let q = 1.0 - rho;
    let g = q / t;
    let log_term = (n / (1.0 - r)).ln() + (p / (1.0 - p)).ln() + 0.5 * ((q + t) / q).ln();
    if log_term <= 0.0 {
        return Err(Error::Domain(format!(
            "n = {n} is too small: the boundary log term is {log_term:.4} <= 0"
        )));
    }
    let ln_fpp = -g * n.ln() + 0.5 * t.ln() + 0.5 * (1.0 + g) * q.ln()
        - 0.5 * PI.ln()
        - (1.0 + 0.5 * g) * (q + t).ln()
        + (1.0 + g) * ((1.0 - r) * (1.0 - p) / p).ln()
        - 0.5 * log_term.ln();
    Ok(ln_fpp.exp())
}

/// `z^2` above which the large-`n` posterior of an alternative reaches `p`:
/// `2 ((1-rho+tau2)/tau2) ln(n/(1-r) p/(1-p) sqrt((1-rho+tau2)/(1-rho)))`.
pub fn detection_boundary(spec: &ModelSpec, prior: &PriorSpec, p: f64) -> Result<f64> {
    crate::error::check_open_unit("p", p)?;
    let t = require_positive_tau2(prior)?;
    let (n, q, r) = (spec.n() as f64, 1.0 - spec.rho(), prior.r());
    let inner = (n / (1.0 - r)).ln() + (p / (1.0 - p)).ln() + 0.5 * ((q + t) / q).ln();
    Ok(2.0 * (q + t) / t * inner)
}

/// `P(M_0 | X) -> r` under the null at fixed `tau2`.
pub fn null_posterior_limit(prior: &PriorSpec) -> f64 {
    prior.r()
}

/// `rho -> 1` limit of `P(M_i | x)` for two channels:
/// `(1 + exp{-(x_i^2 - x_{-i}^2)/2})^{-1}`, `i` in `{1, 2}`.
pub fn rho1_posterior_limit_n2(x: &Observation, i: usize) -> Result<f64> {
    if x.len() != 2 {
        return Err(Error::param("x", format!("needs two channels, got {}", x.len())));
    }
    if !(1..=2).contains(&i) {
        return Err(Error::param("i", format!("must be 1 or 2, got {i}")));
    }
    let v = x.values();
    let d = 0.5 * (v[i - 1].powi(2) - v[2 - i].powi(2));
    Ok(1.0 / (1.0 + (-d).exp()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBounds {
    /// `t phi(t) / (t^2 + 1)`
    pub lower: f64,
    /// `phi(t) / t`
    pub upper: f64,
    /// `phi(t) / t`, the leading term of the Mills-ratio expansion
    pub asymptotic: f64,
}

/// Elementary bounds on `1 - Phi(t)` for `t > 0`.
pub fn normal_tail_bounds(t: f64) -> Result<TailBounds> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("tail bounds need t > 0, got {t}")));
    }
    let (lower, upper) = normal::mills_bounds(t);
    Ok(TailBounds {
        lower,
        upper,
        asymptotic: upper,
    })
}

/// How `d_n = sigma_n^2 ln n` behaves, where `sigma_n^2` scales the noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InfoRegime {
    DToZero,
    DFinite { d: f64 },
    /// `d_n -> inf` but `d_n = o(ln n)`
    DToInfinity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoGrowthSpec {
    regime: InfoRegime,
}

impl InfoGrowthSpec {
    pub fn new(regime: InfoRegime) -> Result<Self> {
        if let InfoRegime::DFinite { d } = regime {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::param("d", format!("must be finite and > 0, got {d}")));
            }
        }
        Ok(Self { regime })
    }

    pub fn regime(&self) -> InfoRegime {
        self.regime
    }

    /// Representative schedule used in simulation: `1/ln ln n`, `d`, or `sqrt(ln n)`.
    pub fn d_at(&self, n: usize) -> f64 {
        let ln_n = (n as f64).ln();
        match self.regime {
            InfoRegime::DToZero => 1.0 / ln_n.ln(),
            InfoRegime::DFinite { d } => d,
            InfoRegime::DToInfinity => ln_n.sqrt(),
        }
    }

    /// `sigma_n^2 = d_n / ln n`
    pub fn sigma2_at(&self, n: usize) -> f64 {
        self.d_at(n) / (n as f64).ln()
    }

    pub fn describe(&self) -> String {
        match self.regime {
            InfoRegime::DToZero => "sigma_n^2 = 1/(ln n ln ln n)".into(),
            InfoRegime::DFinite { d } => format!("sigma_n^2 = {d}/ln n"),
            InfoRegime::DToInfinity => "sigma_n^2 = 1/sqrt(ln n)".into(),
        }
    }
}

/// Argument `g` in the null limit `(1 + ((1-r)/r)(2 Phi(g) - 1))^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhiArgument {
    /// `sqrt(2 (1-rho) d / tau2)`, carried through from the limit of the
    /// exponential average. Selected by Monte Carlo.
    #[default]
    ProofChain,
    /// `(1-rho) d / tau2`, without the square root and factor 2.
    Statement,
}

impl PhiArgument {
    pub fn eval(&self, rho: f64, d: f64, tau2: f64) -> f64 {
        let base = (1.0 - rho) * d / tau2;
        match self {
            PhiArgument::ProofChain => (2.0 * base).sqrt(),
            PhiArgument::Statement => base,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InfoLimit {
    /// Posterior of this model tends to one.
    ConsistentTo(usize),
    /// Posterior of the true model tends to this value.
    LimitValue(f64),
    /// The true model's posterior does not tend to one.
    NotConsistent,
    /// `d` sits exactly on the consistency boundary.
    Indeterminate,
}

/// Limit of the posterior of the true model as information grows.
pub fn info_growth_limit(
    igs: &InfoGrowthSpec,
    spec: &ModelSpec,
    prior: &PriorSpec,
    truth: &TruthScenario,
    phi_arg: PhiArgument,
) -> Result<InfoLimit> {
    let t = require_positive_tau2(prior)?;
    if truth.model_index() > spec.n() {
        return Err(Error::param("model_index", "exceeds n"));
    }
    let (rho, r) = (spec.rho(), prior.r());
    let j = truth.model_index();
    Ok(match igs.regime {
        InfoRegime::DToZero => InfoLimit::ConsistentTo(j),
        InfoRegime::DToInfinity if j == 0 => InfoLimit::LimitValue(r),
        InfoRegime::DToInfinity => InfoLimit::NotConsistent,
        InfoRegime::DFinite { d } if j == 0 => {
            let g = phi_arg.eval(rho, d, t);
            let spread = 2.0 * normal::cdf(g) - 1.0;
            InfoLimit::LimitValue(1.0 / (1.0 + (1.0 - r) / r * spread))
        }
        InfoRegime::DFinite { d } => {
            let edge = truth.theta().powi(2) / (2.0 * (1.0 - rho));
            if d < edge {
                InfoLimit::ConsistentTo(j)
            } else if d > edge {
                InfoLimit::NotConsistent
            } else {
                InfoLimit::Indeterminate
            }
        }
    })
}
