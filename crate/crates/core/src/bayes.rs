//! Posterior model probabilities for the point-null / normal-slab prior.
//!
//! With `s = Sigma0^{-1} x`, the marginal of `x` under `M_i` relative to `M_0` is
//! `(1 + tau2 a)^{-1/2} exp{tau2 s_i^2 / (2 (1 + tau2 a))}`, so every
//! posterior is a softmax over `n + 1` log weights.

use crate::error::{check_open_unit, Error, Result};
use crate::model::{precision_weighted_into, sigma_coeffs, ModelSpec, Observation, PriorSpec};
use crate::numeric::lse::{log_sum_exp, softmax_in_place};

/// `P(M_0 | x), P(M_1 | x), ..., P(M_n | x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorVector {
    probs: Vec<f64>,
}

impl PosteriorVector {
    /// Wrap probabilities that are already normalized.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::param("probs", "need the null and at least one alternative"));
        }
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::param("probs", "entries must lie in [0, 1]"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::param("probs", format!("entries sum to {total}, not 1")));
        }
        Ok(Self { probs })
    }

    pub(crate) fn from_log_weights(mut log_w: Vec<f64>) -> Self {
        softmax_in_place(&mut log_w);
        Self { probs: log_w }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn null(&self) -> f64 {
        self.probs[0]
    }

    /// `P(M_i | x)` for `i` in `1..=n`.
    pub fn alternative(&self, i: usize) -> f64 {
        assert!(i >= 1 && i < self.probs.len(), "alternative index {i} out of range");
        self.probs[i]
    }

    /// Number of alternatives `n`.
    pub fn n(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }
}

/// Outcome of the thresholded detection rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    /// Accepted model index, or `None` when no model reaches the threshold.
    pub accepted: Option<usize>,
    pub threshold_p: f64,
}

impl Decision {
    /// Accepting any `M_i`, `i >= 1` — a false positive when the truth is `M_0`.
    pub fn accepts_alternative(&self) -> bool {
        matches!(self.accepted, Some(i) if i >= 1)
    }
}

/// Per-call constants of the log-weight formula.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kernel {
    pub ln_null: f64,
    pub ln_alt: f64,
    pub coef: f64,
}

impl Kernel {
    pub fn new(spec: &ModelSpec, prior: &PriorSpec) -> Self {
        let a = sigma_coeffs(spec).a;
        let t = prior.tau2();
        let g = 1.0 + t * a;
        Self {
            ln_null: prior.r().ln(),
            ln_alt: (1.0 - prior.r()).ln() - (spec.n() as f64).ln() - 0.5 * g.ln(),
            coef: t / (2.0 * g),
        }
    }

    #[inline]
    pub fn alt(&self, s: f64) -> f64 {
        self.ln_alt + self.coef * s * s
    }
}

fn check_inputs(x: &Observation, spec: &ModelSpec) -> Result<()> {
    spec.require_n_at_least(2)?;
    x.check_len(spec)
}

/// Exact posterior over `M_0, ..., M_n`, evaluated in log space.
pub fn posterior(x: &Observation, spec: &ModelSpec, prior: &PriorSpec) -> Result<PosteriorVector> {
    check_inputs(x, spec)?;
    let n = spec.n();
    if prior.tau2() == 0.0 {
        let mut probs = vec![(1.0 - prior.r()) / n as f64; n + 1];
        probs[0] = prior.r();
        return Ok(PosteriorVector { probs });
    }
    let mut log_w = vec![0.0; n + 1];
    precision_weighted_into(x.values(), spec.rho(), &mut log_w[1..]);
    let k = Kernel::new(spec, prior);
    log_w[0] = k.ln_null;
    for w in &mut log_w[1..] {
        *w = k.alt(*w);
    }
    Ok(PosteriorVector::from_log_weights(log_w))
}

/// Two-channel closed form written in `(x_i - rho x_{-i})^2 / (1 - rho^2)`.
///
/// Independent of the general path; the two agree to rounding.
pub fn posterior_n2(x: &Observation, rho: f64, prior: &PriorSpec) -> Result<PosteriorVector> {
    let spec = ModelSpec::new(2, rho)?;
    x.check_len(&spec)?;
    let (r, t) = (prior.r(), prior.tau2());
    if t == 0.0 {
        return Ok(PosteriorVector {
            probs: vec![r, 0.5 * (1.0 - r), 0.5 * (1.0 - r)],
        });
    }
    let v = x.values();
    let one_m = 1.0 - rho * rho;
    let kappa = t / (2.0 * (one_m + t));
    // ln A_i: log of P(M_0 | x) / P(M_i | x)
    let ln_a = |i: usize| {
        let d = v[i] - rho * v[1 - i];
        (2.0 * r / (1.0 - r)).ln() + 0.5 * ((one_m + t) / one_m).ln() - kappa * d * d / one_m
    };
    let (a1, a2) = (ln_a(0), ln_a(1));
    let diff = kappa * (v[0] * v[0] - v[1] * v[1]);
    let p1 = (-log_sum_exp(&[a1, 0.0, -diff])).exp();
    let p2 = (-log_sum_exp(&[a2, 0.0, diff])).exp();
    let p0 = (-log_sum_exp(&[0.0, -a1, -a2])).exp();
    Ok(PosteriorVector {
        probs: vec![p0, p1, p2],
    })
}

/// Large-`n` approximation
/// `P(M_i | x) ~ (1 + n/(1-r) sqrt((1-rho+tau2)/(1-rho)) exp{-tau2 z_i^2 / (2(1-rho+tau2))})^{-1}`
/// with `z_i = (x_i - xbar)/sqrt(1-rho)`; the null takes the remaining mass.
///
/// Only meaningful for large `n` under the null. If the alternatives sum
/// past one (far outside that regime) the null is set to zero and the
/// alternatives are rescaled.
pub fn posterior_asymptotic(x: &Observation, spec: &ModelSpec, prior: &PriorSpec) -> Result<PosteriorVector> {
    check_inputs(x, spec)?;
    let (n, rho, t, r) = (spec.n() as f64, spec.rho(), prior.tau2(), prior.r());
    let lead = (n / (1.0 - r)).ln() + 0.5 * ((1.0 - rho + t) / (1.0 - rho)).ln();
    let kappa = t / (2.0 * (1.0 - rho + t));
    let mean = x.mean();
    let mut probs = Vec::with_capacity(spec.n() + 1);
    probs.push(0.0);
    for v in x.values() {
        let z2 = (v - mean).powi(2) / (1.0 - rho);
        // logistic(kappa z^2 - lead)
        let e = lead - kappa * z2;
        probs.push(if e > 0.0 {
            (-e).exp() / (1.0 + (-e).exp())
        } else {
            1.0 / (1.0 + e.exp())
        });
    }
    let alt: f64 = probs[1..].iter().sum();
    if alt > 1.0 {
        for p in &mut probs[1..] {
            *p /= alt;
        }
    } else {
        probs[0] = 1.0 - alt;
    }
    Ok(PosteriorVector { probs })
}

/// Accept the most probable model if it reaches `p`; ties go to the lowest index.
pub fn decide(post: &PosteriorVector, p: f64) -> Result<Decision> {
    check_open_unit("p", p)?;
    let mut best = 0;
    for (i, &q) in post.probs.iter().enumerate() {
        if q > post.probs[best] {
            best = i;
        }
    }
    let accepted = (post.probs[best] >= p).then_some(best);
    Ok(Decision {
        accepted,
        threshold_p: p,
    })
}
