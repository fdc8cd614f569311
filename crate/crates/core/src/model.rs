//! The equicorrelated normal-means model.
//!
//! `X ~ N(theta, Sigma0)` with unit variances and common correlation `rho`.
//! Under the alternative `M_j` only `theta_j` is nonzero. Sampling uses the
//! common-factor form `X_i = theta_i + sqrt(rho) Z + sqrt(1 - rho) Z_i`,
//! which costs `O(n)` per draw.

use crate::error::{check_open_unit, Error, Result};
use crate::rng::RandomStream;

/// Dimension and correlation of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    n: usize,
    rho: f64,
}

impl ModelSpec {
    pub fn new(n: usize, rho: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::param("n", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::param(
                "rho",
                format!("must lie in [0, 1), got {rho}"),
            ));
        }
        Ok(Self { n, rho })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Same correlation, different dimension.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(n, self.rho)
    }

    pub(crate) fn require_n_at_least(&self, min: usize) -> Result<()> {
        if self.n < min {
            Err(Error::param(
                "n",
                format!("this operation needs n >= {min}, got {}", self.n),
            ))
        } else {
            Ok(())
        }
    }
}

/// Prior mass on the null and slab variance of the single nonzero mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorSpec {
    r: f64,
    tau2: f64,
}

impl PriorSpec {
    pub fn new(r: f64, tau2: f64) -> Result<Self> {
        check_open_unit("r", r)?;
        if !(tau2 >= 0.0 && tau2.is_finite()) {
            return Err(Error::param(
                "tau2",
                format!("must be finite and >= 0, got {tau2}"),
            ));
        }
        Ok(Self { r, tau2 })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn tau2(&self) -> f64 {
        self.tau2
    }

    pub fn with_tau2(&self, tau2: f64) -> Result<Self> {
        Self::new(self.r, tau2)
    }
}

/// Which model generated the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthScenario {
    model_index: usize,
    theta: f64,
}

impl TruthScenario {
    pub fn null() -> Self {
        Self {
            model_index: 0,
            theta: 0.0,
        }
    }

    /// `M_j` with signal `theta` in channel `j` (1-based).
    pub fn alternative(j: usize, theta: f64) -> Result<Self> {
        if j == 0 {
            return Err(Error::param(
                "model_index",
                "alternatives are numbered from 1; use TruthScenario::null for M0",
            ));
        }
        if !theta.is_finite() {
            return Err(Error::param("theta", "must be finite"));
        }
        Ok(Self {
            model_index: j,
            theta,
        })
    }

    pub fn model_index(&self) -> usize {
        self.model_index
    }

    /// Signal size; zero under the null.
    pub fn theta(&self) -> f64 {
        if self.model_index == 0 {
            0.0
        } else {
            self.theta
        }
    }

    pub fn mean_vector(&self, n: usize) -> Vec<f64> {
        let mut m = vec![0.0; n];
        if self.model_index >= 1 && self.model_index <= n {
            m[self.model_index - 1] = self.theta;
        }
        m
    }

    fn check_against(&self, spec: &ModelSpec) -> Result<()> {
        if self.model_index > spec.n {
            return Err(Error::param(
                "model_index",
                format!("M{} does not exist for n = {}", self.model_index, spec.n),
            ));
        }
        Ok(())
    }
}

/// A data vector `x` of finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    x: Vec<f64>,
}

impl Observation {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::param("x", "observation must be non-empty"));
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::param("x", format!("entry {i} is not finite")));
        }
        Ok(Self { x })
    }

    pub fn values(&self) -> &[f64] {
        &self.x
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.x.iter().sum::<f64>() / self.x.len() as f64
    }

    /// `u_i = sum_{j != i} x_j`
    pub fn leave_one_out_sums(&self) -> Vec<f64> {
        let total: f64 = self.x.iter().sum();
        self.x.iter().map(|v| total - v).collect()
    }

    pub(crate) fn check_len(&self, spec: &ModelSpec) -> Result<()> {
        if self.x.len() != spec.n {
            return Err(Error::param(
                "x",
                format!("length {} does not match n = {}", self.x.len(), spec.n),
            ));
        }
        Ok(())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.x
    }
}

/// Diagonal `a` and off-diagonal `b` of `Sigma0^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaCoeffs {
    pub a: f64,
    pub b: f64,
}

/// Closed-form inverse of the equicorrelation matrix.
///
/// For `n = 1` the matrix is the scalar 1, so `a = 1` and `b` is reported as 0.
pub fn sigma_coeffs(spec: &ModelSpec) -> SigmaCoeffs {
    let (n, rho) = (spec.n as f64, spec.rho);
    if spec.n == 1 {
        return SigmaCoeffs { a: 1.0, b: 0.0 };
    }
    let denom = (1.0 + (n - 1.0) * rho) * (1.0 - rho);
    SigmaCoeffs {
        a: (1.0 + (n - 2.0) * rho) / denom,
        b: -rho / denom,
    }
}

/// Draw one observation under `truth`.
pub fn sample(truth: &TruthScenario, spec: &ModelSpec, rng: &mut RandomStream) -> Result<Observation> {
    truth.check_against(spec)?;
    let mut x = vec![0.0; spec.n];
    sample_into(truth, spec, rng, &mut x);
    Ok(Observation { x })
}

/// Allocation-free sampler; `out.len()` sets the dimension.
///
/// Draw order is the shared factor first, then the idiosyncratic terms in
/// channel order, so a longer buffer extends a shorter one.
pub fn sample_into(truth: &TruthScenario, spec: &ModelSpec, rng: &mut RandomStream, out: &mut [f64]) {
    let common = spec.rho.sqrt() * rng.normal();
    let idio = (1.0 - spec.rho).sqrt();
    for v in out.iter_mut() {
        *v = common + idio * rng.normal();
    }
    let j = truth.model_index;
    if j >= 1 && j <= out.len() {
        out[j - 1] += truth.theta;
    }
}

/// `z_i = (x_i - xbar) / sqrt(1 - rho)`
pub fn z_transform(x: &Observation, spec: &ModelSpec) -> Result<Vec<f64>> {
    x.check_len(spec)?;
    if spec.rho >= 1.0 {
        return Err(Error::param("rho", "z-transform is undefined at rho = 1"));
    }
    let mean = x.mean();
    let scale = (1.0 - spec.rho).sqrt();
    Ok(x.x.iter().map(|v| (v - mean) / scale).collect())
}

/// `Sigma0^{-1} x`, written as `(x_i - xbar)/(1 - rho) + xbar/(1 + (n-1) rho)`
/// so nothing cancels as `rho -> 1`.
pub fn precision_weighted(x: &[f64], rho: f64) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    precision_weighted_into(x, rho, &mut out);
    out
}

pub fn precision_weighted_into(x: &[f64], rho: f64, out: &mut [f64]) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let common = mean / (1.0 + (n - 1.0) * rho);
    let inv = 1.0 / (1.0 - rho);
    for (o, v) in out.iter_mut().zip(x) {
        *o = (v - mean) * inv + common;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn spec_validation() {
        assert!(ModelSpec::new(0, 0.1).is_err());
        assert!(ModelSpec::new(3, 1.0).is_err());
        assert!(ModelSpec::new(3, -0.1).is_err());
        assert!(ModelSpec::new(1, 0.0).is_ok());
        assert!(PriorSpec::new(0.0, 1.0).is_err());
        assert!(PriorSpec::new(0.5, -1.0).is_err());
        assert!(PriorSpec::new(0.5, 0.0).is_ok());
    }

    #[test]
    fn sigma_coeffs_reference_values() {
        let c = sigma_coeffs(&ModelSpec::new(5, 0.0).unwrap());
        assert_eq!((c.a, c.b), (1.0, 0.0));
        // 2x2 inverse of [[1, .5], [.5, 1]] is [[4/3, -2/3], [-2/3, 4/3]]
        let c = sigma_coeffs(&ModelSpec::new(2, 0.5).unwrap());
        assert_abs_diff_eq!(c.a, 4.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.b, -2.0 / 3.0, epsilon = 1e-15);
        let c = sigma_coeffs(&ModelSpec::new(1, 0.7).unwrap());
        assert_eq!((c.a, c.b), (1.0, 0.0));
    }

    #[test]
    fn sigma_coeffs_reconstruct_identity() {
        for &n in &[2usize, 3, 7, 20] {
            for &rho in &[0.0, 0.3, 0.9, 0.999] {
                let c = sigma_coeffs(&ModelSpec::new(n, rho).unwrap());
                // row of Sigma0 times column of the inverse
                let diag = c.a + (n as f64 - 1.0) * rho * c.b;
                let off = rho * c.a + c.b + (n as f64 - 2.0) * rho * c.b;
                assert_abs_diff_eq!(diag, 1.0, epsilon = 1e-10);
                assert_abs_diff_eq!(off, 0.0, epsilon = 1e-10);
                assert_abs_diff_eq!(c.a - c.b, 1.0 / (1.0 - rho), epsilon = 1e-9 / (1.0 - rho));
            }
        }
    }

    #[test]
    fn precision_weighted_matches_coefficients() {
        let spec = ModelSpec::new(4, 0.6).unwrap();
        let c = sigma_coeffs(&spec);
        let x = [0.3, -1.2, 2.0, 0.5];
        let s = precision_weighted(&x, spec.rho());
        let total: f64 = x.iter().sum();
        for i in 0..4 {
            let direct = (c.a - c.b) * x[i] + c.b * total;
            assert_abs_diff_eq!(s[i], direct, epsilon = 1e-12);
        }
    }

    #[test]
    fn z_transform_examples() {
        let spec = ModelSpec::new(3, 0.4).unwrap();
        let x = Observation::new(vec![1.5, 1.5, 1.5]).unwrap();
        assert_eq!(z_transform(&x, &spec).unwrap(), vec![0.0; 3]);
        let spec = ModelSpec::new(2, 0.0).unwrap();
        let x = Observation::new(vec![1.0, -1.0]).unwrap();
        assert_eq!(z_transform(&x, &spec).unwrap(), vec![1.0, -1.0]);
        let bad = Observation::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(z_transform(&bad, &spec).is_err());
    }

    #[test]
    fn sampler_places_signal() {
        let spec = ModelSpec::new(4, 0.5).unwrap();
        let truth = TruthScenario::alternative(2, 3.0).unwrap();
        let mut rng = RandomStream::new(3, 0);
        let reps = 20_000;
        let mut mean = [0.0; 4];
        for _ in 0..reps {
            let x = sample(&truth, &spec, &mut rng).unwrap();
            for (m, v) in mean.iter_mut().zip(x.values()) {
                *m += v / reps as f64;
            }
        }
        // sd of each mean is 1/sqrt(reps) ~ 0.007
        for (i, m) in mean.iter().enumerate() {
            let target = if i == 1 { 3.0 } else { 0.0 };
            assert!((m - target).abs() < 0.04, "channel {i}: {m}");
        }
        assert!(sample(&TruthScenario::alternative(5, 1.0).unwrap(), &spec, &mut rng).is_err());
    }

    #[test]
    fn observation_rejects_non_finite() {
        assert!(Observation::new(vec![1.0, f64::NAN]).is_err());
        assert!(Observation::new(vec![]).is_err());
        let x = Observation::new(vec![1.0, 2.0, 4.0]).unwrap();
        assert_eq!(x.leave_one_out_sums(), vec![6.0, 5.0, 3.0]);
    }
}
