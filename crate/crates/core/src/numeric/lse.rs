/// `ln(sum(exp(xs)))` without overflow. Empty input gives `-inf`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

/// `ln(exp(a) + exp(b))`
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Normalize log weights into probabilities in place.
///
/// Divides by the sum after shifting by the maximum rather than subtracting
/// the log-normalizer: with log weights in the thousands the latter costs
/// `|ln Z| * eps` of relative accuracy in every entry.
pub fn softmax_in_place(log_w: &mut [f64]) {
    let m = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for w in log_w.iter_mut() {
        *w = (*w - m).exp();
        sum += *w;
    }
    for w in log_w.iter_mut() {
        *w /= sum;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn handles_huge_exponents() {
        let v = log_sum_exp(&[1000.0, 1000.0]);
        assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert!((log_add_exp(-1000.0, -1000.0) - (-1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn softmax_sums_to_one() {
        let mut w = vec![3.0, -700.0, 710.0, 0.5];
        softmax_in_place(&mut w);
        let s: f64 = w.iter().sum();
        assert!((s - 1.0).abs() < 1e-15);
    }
}
