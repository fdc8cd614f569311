//! Expectations over a standard normal variable.
//!
//! Two independent routes: a Gauss–Hermite rule (fast for smooth integrands)
//! and adaptive Gauss–Kronrod on a truncated line with caller-supplied
//! breakpoints (robust when the integrand has sharp transitions).

use std::sync::OnceLock;

use super::normal;

/// Gauss–Hermite rule for `E[f(Z)]`, `Z ~ N(0, 1)`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Build an `n`-point rule. Nodes whose weight underflows are dropped.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Hermite rule needs at least one node");
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for z in jacobi_eigenvalues(n) {
            let z = newton_polish(n, z);
            let w = (-ln_christoffel_sum(n, z)).exp();
            if w > 0.0 {
                nodes.push(z);
                weights.push(w);
            }
        }
        Self { nodes, weights }
    }

    /// Shared rule of size `64 * 2^level` for `level` in `0..=4`.
    pub fn cached(level: usize) -> &'static GaussHermite {
        static RULES: [OnceLock<GaussHermite>; 5] = [
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
        ];
        RULES[level].get_or_init(|| GaussHermite::new(64 << level))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| w * f(z))
            .sum()
    }
}

// The nodes are the eigenvalues of the Jacobi matrix with zero diagonal and
// off-diagonal sqrt(1), ..., sqrt(n-1). Sturm-sequence bisection finds each
// one independently, so no root can be skipped or found twice.
fn jacobi_eigenvalues(n: usize) -> Vec<f64> {
    // number of eigenvalues strictly below x
    let count_below = |x: f64| -> usize {
        let mut count = 0;
        let mut d = -x;
        if d < 0.0 {
            count += 1;
        }
        for k in 1..n {
            let prev = if d == 0.0 { f64::EPSILON } else { d };
            d = -x - k as f64 / prev;
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    let bound = 2.0 * (n as f64).sqrt() + 1.0;
    (0..n)
        .map(|k| {
            let (mut lo, mut hi) = (-bound, bound);
            // smallest x with more than k eigenvalues below it
            while hi - lo > 1e-15 * hi.abs().max(lo.abs()).max(1.0) {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                if count_below(mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Orthonormal probabilists' Hermite values `(q_n(z), q_{n-1}(z))` up to a
/// common positive factor.
fn orthonormal_pair(n: usize, z: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (0.0f64, 1.0f64);
    for j in 0..n {
        let next = (z * cur - (j as f64).sqrt() * prev) / ((j + 1) as f64).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > 1e100 {
            prev *= 1e-100;
            cur *= 1e-100;
        }
    }
    (cur, prev)
}

fn newton_polish(n: usize, mut z: f64) -> f64 {
    for _ in 0..3 {
        let (q, qm1) = orthonormal_pair(n, z);
        if qm1 == 0.0 {
            break;
        }
        let step = q / ((n as f64).sqrt() * qm1);
        if !step.is_finite() || step.abs() > 1e-8 * z.abs().max(1.0) {
            break;
        }
        z -= step;
    }
    z
}

/// `ln sum_{j<n} q_j(z)^2`; the Gauss weight at a node is its reciprocal
/// (normalized to the standard normal density).
fn ln_christoffel_sum(n: usize, z: f64) -> f64 {
    let (mut prev, mut cur) = (0.0f64, 1.0f64);
    let mut sum = 0.0f64;
    let mut ln_scale = 0.0f64;
    for j in 0..n {
        sum += cur * cur;
        let next = (z * cur - (j as f64).sqrt() * prev) / ((j + 1) as f64).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > 1e100 {
            prev *= 1e-100;
            cur *= 1e-100;
            sum *= 1e-200;
            ln_scale += 200.0 * std::f64::consts::LN_10;
        }
    }
    sum.ln() + ln_scale
}

// Gauss–Kronrod 7/15 abscissae and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, (k - g).abs() * h)
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> (f64, f64) {
    let (val, err) = kronrod15(f, a, b);
    if err <= tol || depth == 0 || (b - a) < 1e-12 {
        return (val, err);
    }
    let m = 0.5 * (a + b);
    let (l, el) = adapt(f, a, m, 0.5 * tol, depth - 1);
    let (r, er) = adapt(f, m, b, 0.5 * tol, depth - 1);
    (l + r, el + er)
}

/// Adaptive Gauss–Kronrod integral of `f(z) * phi(z)` over `[-half_width, half_width]`.
///
/// `breaks` marks places where `f` changes quickly; each segment between
/// consecutive breaks is refined independently. Returns `(value, error_estimate)`.
pub fn expect_normal_adaptive<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    half_width: f64,
    abs_tol: f64,
) -> (f64, f64) {
    let g = |z: f64| f(z) * normal::pdf(z);
    let mut pts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|b| b.is_finite() && b.abs() < half_width)
        .collect();
    pts.push(-half_width);
    pts.push(half_width);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let segments = (pts.len() - 1) as f64;
    let mut total = 0.0;
    let mut err = 0.0;
    for w in pts.windows(2) {
        let (v, e) = adapt(&g, w[0], w[1], abs_tol / segments, 40);
        total += v;
        err += e;
    }
    (total, err)
}
