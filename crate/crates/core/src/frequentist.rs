//! Frequentist tests: the ad hoc `max |X_j| > c` test and the likelihood
//! ratio test.

use rand::RngCore;

use crate::error::{check_open_unit, Error, Result};
use crate::model::{sample_into, ModelSpec, Observation, TruthScenario};
use crate::numeric::normal;
use crate::numeric::quadrature::{expect_normal_adaptive, GaussHermite};
use crate::numeric::roots::brent;
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Adhoc,
    Lrt,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Adhoc => "adhoc",
            Method::Lrt => "lrt",
        })
    }
}

/// A calibrated rejection threshold.
///
/// For the LRT the threshold applies to `T`; `stderr`, `reps` and possibly
/// `warning` describe the Monte Carlo calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalValue {
    pub c: f64,
    pub alpha: f64,
    pub method: Method,
    pub stderr: Option<f64>,
    pub reps: Option<usize>,
    pub warning: Option<String>,
}

/// Successive Gauss–Hermite estimates must agree this closely.
const GH_AGREEMENT: f64 = 1e-12;

/// Family-wise level of the ad hoc test with threshold `c`:
/// `1 - E_Z[(Phi((c - sqrt(rho) Z)/sqrt(1-rho)) - Phi((-c - sqrt(rho) Z)/sqrt(1-rho)))^n]`.
pub fn adhoc_alpha(c: f64, spec: &ModelSpec) -> Result<f64> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::param("c", format!("must be finite and >= 0, got {c}")));
    }
    // quadrature weights need not sum to exactly one
    Ok(adhoc_alpha_unchecked(c, spec).clamp(0.0, 1.0))
}

fn adhoc_alpha_unchecked(c: f64, spec: &ModelSpec) -> f64 {
    let n = spec.n() as f64;
    let rho = spec.rho();
    let (sr, s) = (rho.sqrt(), (1.0 - rho).sqrt());
    // 1 - (interval prob)^n, formed with expm1 to keep small levels accurate
    let miss = |z: f64| {
        let m = sr * z;
        -(n * normal::ln_interval((-c - m) / s, (c - m) / s)).exp_m1()
    };
    if rho == 0.0 {
        return miss(0.0);
    }
    let mut prev = GaussHermite::cached(0).expect(miss);
    for level in 1..=4 {
        let next = GaussHermite::cached(level).expect(miss);
        if (next - prev).abs() < GH_AGREEMENT {
            return next;
        }
        prev = next;
    }
    // The integrand has steps of width ~sqrt(1-rho) at z = +-c/sqrt(rho),
    // which a global polynomial rule cannot resolve. Breakpoints on the
    // step's own scale stop the adaptive rule from stepping over it.
    let width = s / sr;
    let mut breaks = Vec::with_capacity(30);
    for centre in [-c / sr, c / sr] {
        for k in [-12.0, -6.0, -3.0, -1.5, 0.0, 1.5, 3.0, 6.0, 12.0] {
            breaks.push(centre + k * width);
        }
    }
    let (v, _) = expect_normal_adaptive(miss, &breaks, 12.0, 1e-13);
    v
}

/// Threshold `c` on `[0, 10]` with `|adhoc_alpha(c) - alpha| <= 1e-9`.
pub fn adhoc_critical_value(alpha: f64, spec: &ModelSpec) -> Result<CriticalValue> {
    check_open_unit("alpha", alpha)?;
    let c = brent(|c| adhoc_alpha_unchecked(c, spec) - alpha, 0.0, 10.0, 1e-13)?;
    let attained = adhoc_alpha_unchecked(c, spec);
    if (attained - alpha).abs() > 1e-9 {
        return Err(Error::numerical(
            "adhoc_critical_value",
            format!("root c = {c} attains alpha = {attained}, target {alpha}"),
        ));
    }
    Ok(CriticalValue {
        c,
        alpha: attained,
        method: Method::Adhoc,
        stderr: None,
        reps: None,
        warning: None,
    })
}

/// `Phi(c)` at the two correlation extremes: `(1 + (1-alpha)^(1/n))/2` for
/// independent channels and `1 - alpha/2` as `rho -> 1`.
pub fn adhoc_rho_limits(alpha: f64, n: usize) -> Result<(f64, f64)> {
    check_open_unit("alpha", alpha)?;
    if n < 1 {
        return Err(Error::param("n", "must be at least 1"));
    }
    let at0 = 0.5 * (1.0 + ((-alpha).ln_1p() / n as f64).exp());
    Ok((at0, 1.0 - 0.5 * alpha))
}

/// LRT statistic `T = max_j [sqrt(1-rho) x_j + n rho (x_j - xbar)/sqrt(1-rho)]^2`.
pub fn lrt_statistic(x: &Observation, spec: &ModelSpec) -> Result<f64> {
    Ok(lrt_statistic_with_index(x, spec)?.0)
}

/// `T` together with the maximizing channel (0-based; lowest index on ties).
pub fn lrt_statistic_with_index(x: &Observation, spec: &ModelSpec) -> Result<(f64, usize)> {
    x.check_len(spec)?;
    Ok(lrt_core(x.values(), spec.rho()))
}

fn lrt_core(x: &[f64], rho: f64) -> (f64, usize) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let s = (1.0 - rho).sqrt();
    let k = n * rho / s;
    let mut best = (f64::NEG_INFINITY, 0);
    for (j, &v) in x.iter().enumerate() {
        let t = (s * v + k * (v - mean)).powi(2);
        if t > best.0 {
            best = (t, j);
        }
    }
    best
}

/// Monte Carlo `(1 - alpha)` quantile of `T` under the null.
///
/// Uses `reps` draws from `rng`, then 200 bootstrap resamples (same stream)
/// for the standard error. Fewer than 100 expected exceedances attaches a
/// precision warning rather than failing.
pub fn lrt_critical_value(
    alpha: f64,
    spec: &ModelSpec,
    reps: usize,
    rng: &mut RandomStream,
) -> Result<CriticalValue> {
    const MIN_REPS: usize = 10_000;
    const BOOT: usize = 200;
    check_open_unit("alpha", alpha)?;
    if reps < MIN_REPS {
        return Err(Error::param("reps", format!("need at least {MIN_REPS}, got {reps}")));
    }
    let null = TruthScenario::null();
    let mut x = vec![0.0; spec.n()];
    let mut t: Vec<f64> = (0..reps)
        .map(|_| {
            sample_into(&null, spec, rng, &mut x);
            lrt_core(&x, spec.rho()).0
        })
        .collect();

    let rank = upper_rank(alpha, reps);
    let c = *t.select_nth_unstable_by(rank, f64::total_cmp).1;
    let attained = t.iter().filter(|&&v| v > c).count() as f64 / reps as f64;

    let mut boot = Vec::with_capacity(BOOT);
    let mut resample = vec![0.0; reps];
    for _ in 0..BOOT {
        for v in resample.iter_mut() {
            *v = t[(rng.next_u64() % reps as u64) as usize];
        }
        boot.push(*resample.select_nth_unstable_by(rank, f64::total_cmp).1);
    }
    let mean = boot.iter().sum::<f64>() / BOOT as f64;
    let var = boot.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (BOOT - 1) as f64;

    let expected = reps as f64 * alpha;
    let warning = (expected < 100.0).then(|| {
        format!("only {expected:.1} exceedances expected at alpha = {alpha} with {reps} reps; quantile is imprecise")
    });
    Ok(CriticalValue {
        c,
        alpha: attained,
        method: Method::Lrt,
        stderr: Some(var.sqrt()),
        reps: Some(reps),
        warning,
    })
}

/// 0-based order statistic used as the empirical `(1 - alpha)` quantile.
fn upper_rank(alpha: f64, reps: usize) -> usize {
    let k = ((1.0 - alpha) * reps as f64).ceil() as usize;
    k.clamp(1, reps) - 1
}

/// Whether `T` exceeds the calibrated threshold.
pub fn lrt_rejects(x: &Observation, spec: &ModelSpec, cv: &CriticalValue) -> Result<bool> {
    Ok(lrt_statistic(x, spec)? > cv.c)
}

/// Whether `max |x_j|` exceeds the ad hoc threshold.
pub fn adhoc_rejects(x: &Observation, cv: &CriticalValue) -> bool {
    x.values().iter().any(|v| v.abs() > cv.c)
}
