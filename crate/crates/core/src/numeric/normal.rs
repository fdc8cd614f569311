//! Standard normal density, distribution and quantile functions.
//!
//! Body values come from `erfc`; log-tail values switch to the asymptotic
//! Mills-ratio series once `erfc` would underflow. Quantiles start from
//! `erfc_inv` and are polished by Newton steps on `ln(1 - Phi)`, because
//! the inverse alone is only good to about 1e-10.

use libm::erfc;
use statrs::function::erf::erfc_inv;
use std::f64::consts::{PI, SQRT_2};

/// `ln(1/sqrt(2*pi))`
pub const LN_INV_SQRT_2PI: f64 = -0.918_938_533_204_672_8;

/// Beyond this point `erfc(t/sqrt 2)` is too close to underflow to trust.
const LOG_TAIL_SWITCH: f64 = 37.0;

#[inline]
pub fn pdf(x: f64) -> f64 {
    ln_pdf(x).exp()
}

#[inline]
pub fn ln_pdf(x: f64) -> f64 {
    LN_INV_SQRT_2PI - 0.5 * x * x
}

/// `Phi(x)`
#[inline]
pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Upper tail `1 - Phi(x)`, accurate far into the right tail.
#[inline]
pub fn sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// `ln(1 - Phi(x))`, finite for every finite `x`.
pub fn ln_sf(x: f64) -> f64 {
    if x < LOG_TAIL_SWITCH {
        return sf(x).ln();
    }
    let inv2 = 1.0 / (x * x);
    // 1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8 - 945/x^10
    let series = 1.0 + inv2 * (-1.0 + inv2 * (3.0 + inv2 * (-15.0 + inv2 * (105.0 - 945.0 * inv2))));
    ln_pdf(x) - x.ln() + series.ln()
}

/// `ln Phi(x)`
#[inline]
pub fn ln_cdf(x: f64) -> f64 {
    ln_sf(-x)
}

/// `Phi^{-1}(p)` for `p` in `[0, 1]`.
pub fn quantile(p: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p));
    if p > 0.5 {
        upper_quantile(1.0 - p)
    } else {
        -upper_quantile(p)
    }
}

/// `Phi^{-1}(1 - q)`, computed without forming `1 - q`.
pub fn upper_quantile(q: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&q));
    let mut x = SQRT_2 * erfc_inv(2.0 * q);
    if !x.is_finite() {
        return x;
    }
    let target = q.ln();
    for _ in 0..3 {
        // d/dx ln(1 - Phi(x)) = -pdf/sf
        let ls = ln_sf(x);
        let step = (ls - target) * (ls - ln_pdf(x)).exp();
        x += step;
        if step.abs() <= 1e-16 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

/// `P(lo < Z < hi)` for a standard normal `Z`, returned on the log scale.
///
/// Both tails are taken from whichever side keeps the subtraction benign.
pub fn ln_interval(lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return f64::NEG_INFINITY;
    }
    if lo >= 0.0 {
        let (a, b) = (sf(lo), sf(hi));
        if a > 0.0 {
            return (a - b).ln();
        }
        // deep right tail
        let (la, lb) = (ln_sf(lo), ln_sf(hi));
        return la + (-(lb - la).exp()).ln_1p();
    }
    if hi <= 0.0 {
        return ln_interval(-hi, -lo);
    }
    (-(sf(hi) + sf(-lo))).ln_1p()
}

/// Mills-ratio quantities at `t`: `(t*phi/(t^2+1), phi/t)`.
pub fn mills_bounds(t: f64) -> (f64, f64) {
    let phi = (-0.5 * t * t).exp() / (2.0 * PI).sqrt();
    (t * phi / (t * t + 1.0), phi / t)
}
