//! Dense-matrix reference implementations.
//!
//! Everything here builds the covariance matrices explicitly and uses a
//! Cholesky factorization, so it shares no algebra with the closed forms in
//! [`crate::bayes`] or [`crate::frequentist`]. Small `n` only.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::bayes::PosteriorVector;
use crate::error::{Error, Result};
use crate::model::{ModelSpec, Observation, PriorSpec, TruthScenario};
use crate::numeric::lse::log_sum_exp;
use crate::rng::RandomStream;

const MAX_DENSE_N: usize = 50;
const MAX_SAMPLE_N: usize = 1000;

/// An explicit covariance with its log-determinant and inverse.
#[derive(Debug, Clone)]
pub struct DenseCovariance {
    matrix: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    log_det: f64,
    inverse: DMatrix<f64>,
}

impl DenseCovariance {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || matrix != matrix.transpose() {
            return Err(Error::numerical("DenseCovariance", "matrix is not symmetric"));
        }
        let chol = Cholesky::new(matrix.clone())
            .ok_or_else(|| Error::numerical("DenseCovariance", "matrix is not positive definite"))?;
        let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let inverse = chol.inverse();
        Ok(Self {
            matrix,
            chol,
            log_det,
            inverse,
        })
    }

    /// `Sigma_0`: unit diagonal, `rho` elsewhere.
    pub fn equicorrelation(spec: &ModelSpec) -> Result<Self> {
        let n = spec.n();
        let rho = spec.rho();
        Self::new(DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { rho }))
    }

    /// `Sigma_i = Sigma_0 + tau2 e_i e_i'` (0-based `i`).
    pub fn slab(spec: &ModelSpec, tau2: f64, i: usize) -> Result<Self> {
        let n = spec.n();
        let rho = spec.rho();
        Self::new(DMatrix::from_fn(n, n, |r, c| match (r == c, r == i) {
            (true, true) => 1.0 + tau2,
            (true, false) => 1.0,
            _ => rho,
        }))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    /// Lower Cholesky factor.
    pub fn factor(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    /// `ln N(x; 0, Sigma)` up to the `-(n/2) ln 2 pi` constant.
    pub fn log_density_kernel(&self, x: &DVector<f64>) -> f64 {
        let y = self.chol.solve(x);
        -0.5 * self.log_det - 0.5 * x.dot(&y)
    }
}

fn cap(n: usize, max: usize) -> Result<()> {
    if n > max {
        return Err(Error::param("n", format!("dense oracle is limited to n <= {max}")));
    }
    Ok(())
}

/// Posterior from explicit Gaussian marginals `N(0, Sigma_i)`.
pub fn dense_posterior(x: &Observation, spec: &ModelSpec, prior: &PriorSpec) -> Result<PosteriorVector> {
    let n = spec.n();
    cap(n, MAX_DENSE_N)?;
    if x.len() != n {
        return Err(Error::param("x", format!("length {} does not match n = {n}", x.len())));
    }
    let xv = DVector::from_column_slice(x.values());
    let mut log_w = Vec::with_capacity(n + 1);
    log_w.push(prior.r().ln() + DenseCovariance::equicorrelation(spec)?.log_density_kernel(&xv));
    let ln_alt = ((1.0 - prior.r()) / n as f64).ln();
    for i in 0..n {
        let cov = DenseCovariance::slab(spec, prior.tau2(), i)?;
        log_w.push(ln_alt + cov.log_density_kernel(&xv));
    }
    let total = log_sum_exp(&log_w);
    let probs = log_w.iter().map(|w| (w - total).exp()).collect();
    PosteriorVector::new(probs)
}

/// Likelihood ratio of `M_0` against the best single-mean alternative.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLr {
    pub lr: f64,
    pub log_lr: f64,
    /// Channel (0-based) whose alternative attains the minimum.
    pub argmin: usize,
    /// Profile MLE of the shifted mean, per channel.
    pub theta_hat: Vec<f64>,
    /// `ln LR_i` per channel.
    pub log_lr_each: Vec<f64>,
}

/// Profile the mean of each channel in turn against the dense `Sigma_0^{-1}`.
pub fn dense_lr(x: &Observation, spec: &ModelSpec) -> Result<DenseLr> {
    let n = spec.n();
    cap(n, MAX_DENSE_N)?;
    if x.len() != n {
        return Err(Error::param("x", format!("length {} does not match n = {n}", x.len())));
    }
    let cov = DenseCovariance::equicorrelation(spec)?;
    let p = cov.inverse();
    let xv = DVector::from_column_slice(x.values());
    let q0 = xv.dot(&(p * &xv));
    let px = p * &xv;
    let mut theta_hat = Vec::with_capacity(n);
    let mut log_lr_each = Vec::with_capacity(n);
    for i in 0..n {
        let th = px[i] / p[(i, i)];
        let mut resid = xv.clone();
        resid[i] -= th;
        let qi = resid.dot(&(p * &resid));
        theta_hat.push(th);
        log_lr_each.push(-0.5 * (q0 - qi));
    }
    let mut argmin = 0;
    for (i, v) in log_lr_each.iter().enumerate() {
        if *v < log_lr_each[argmin] {
            argmin = i;
        }
    }
    let log_lr = log_lr_each[argmin];
    Ok(DenseLr {
        lr: log_lr.exp(),
        log_lr,
        argmin,
        theta_hat,
        log_lr_each,
    })
}

/// Sample through the Cholesky factor of `Sigma_0`.
pub fn dense_sample(truth: &TruthScenario, spec: &ModelSpec, rng: &mut RandomStream) -> Result<Observation> {
    let n = spec.n();
    cap(n, MAX_SAMPLE_N)?;
    if truth.model_index() > n {
        return Err(Error::param("model_index", "exceeds n"));
    }
    let l = DenseCovariance::equicorrelation(spec)?.factor();
    let mut z = DVector::zeros(n);
    rng.fill_normal(z.as_mut_slice());
    let x = l * z + DVector::from_vec(truth.mean_vector(n));
    Observation::new(x.as_slice().to_vec())
}

/// `Sigma_0^{-1} - tau2 v v' / (1 + tau2 a)` with `v = Sigma_0^{-1} e_i`.
pub fn woodbury_slab_inverse(spec: &ModelSpec, tau2: f64, i: usize) -> Result<DMatrix<f64>> {
    cap(spec.n(), MAX_DENSE_N)?;
    let p = DenseCovariance::equicorrelation(spec)?.inverse().clone();
    let v = p.column(i).into_owned();
    let a = p[(i, i)];
    Ok(&p - (&v * v.transpose()) * (tau2 / (1.0 + tau2 * a)))
}

/// Posterior written directly in `x`, with
/// `K = (1+(n-1)rho) / ([(1-rho+tau2)(1+(n-1)rho) - tau2 rho](1-rho))`.
///
/// The alternatives use the reciprocal-sum form; the null uses the matching
/// reciprocal of the total alternative odds.
pub fn explicit_posterior(x: &Observation, spec: &ModelSpec, prior: &PriorSpec) -> Result<PosteriorVector> {
    let n = spec.n();
    if x.len() != n {
        return Err(Error::param("x", format!("length {} does not match n = {n}", x.len())));
    }
    let (rho, t, r) = (spec.rho(), prior.tau2(), prior.r());
    let nf = n as f64;
    let lead = 1.0 + (nf - 1.0) * rho;
    let det = (1.0 - rho + t) * lead - t * rho;
    let k = lead / (det * (1.0 - rho));
    let root = (det / (lead * (1.0 - rho))).sqrt();
    let xs = x.values();
    let xbar = x.mean();
    let shift = (1.0 - rho) / lead;
    let odds0 = root * nf * r / (1.0 - r);

    let mut probs = vec![0.0; n + 1];
    let mut null_recip = 1.0;
    for i in 0..n {
        let xi = xs[i];
        let y = (xi - xbar) + shift * xbar;
        let mut denom = odds0 * (-0.5 * t * k * y * y).exp();
        for &xk in xs {
            let q = (xi + xk - 2.0 * xbar) * (xi - xk) + 2.0 * xbar * (xi - xk) * shift;
            denom += (-0.5 * t * k * q).exp();
        }
        probs[i + 1] = 1.0 / denom;
        null_recip += (0.5 * t * k * y * y).exp() / odds0;
    }
    probs[0] = 1.0 / null_recip;
    PosteriorVector::new(probs)
}
