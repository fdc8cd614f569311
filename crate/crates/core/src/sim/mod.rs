//! Replicated Monte Carlo experiments written out as CSV tables.
//!
//! Replicate `k` of grid point `g` always draws from
//! `RandomStream::for_replicate(seed, g, k)`. Replicates are processed in
//! fixed-size chunks whose partial results are merged in chunk order, so the
//! output is bit-identical for any worker count.

mod config;
mod output;

pub use config::{Experiment, ExperimentConfig, RegimeKind, TauMode};
pub use output::{Row, Table, HEADER};

use rayon::prelude::*;

use crate::adaptive::{
    fpp_adaptive_asymptotic, fpp_type2_asymptotic, tau2_max_fpp, threshold_for_fpp, type2_mle_tau2, AdaptiveConfig,
};
use crate::asymptotics::{fpp_fixed_tau_rate, info_growth_limit, InfoGrowthSpec, InfoLimit, InfoRegime, PhiArgument};
use crate::bayes::{posterior, posterior_asymptotic, Kernel};
use crate::error::{Error, Result};
use crate::model::{precision_weighted_into, sample_into, ModelSpec, Observation, PriorSpec, TruthScenario};
use crate::numeric::lse::{log_add_exp, log_sum_exp};
use crate::rng::RandomStream;

const CHUNK: u64 = 256;

/// Per-worker buffers; contents never leak between replicates.
struct Scratch {
    x: Vec<f64>,
    s: Vec<f64>,
    w: Vec<f64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self {
            x: vec![0.0; n],
            s: vec![0.0; n],
            w: vec![0.0; n + 1],
        }
    }
}

/// Worker count: explicit setting, then `THREADS`, then all cores.
pub fn resolve_threads(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| std::env::var("THREADS").ok().and_then(|v| v.trim().parse().ok()))
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(resolve_threads(threads))
        .build()
        .map_err(|e| Error::numerical("thread pool", e.to_string()))?;
    Ok(pool.install(f))
}

/// Fold over `reps` replicates in chunks, merging chunk results in order.
fn replicate_fold<A, I, S, M>(seed: u64, grid: u64, reps: usize, n_max: usize, init: I, step: S, merge: M) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    S: Fn(&mut A, &mut Scratch, &mut RandomStream, u64) -> Result<()> + Sync,
    M: Fn(&mut A, A),
{
    let reps = reps as u64;
    let chunks = reps.div_ceil(CHUNK);
    let parts: Vec<A> = (0..chunks)
        .into_par_iter()
        .map_init(
            || Scratch::new(n_max),
            |scratch, c| {
                let mut acc = init();
                for rep in c * CHUNK..((c + 1) * CHUNK).min(reps) {
                    let mut rng = RandomStream::for_replicate(seed, grid, rep);
                    step(&mut acc, scratch, &mut rng, rep)?;
                }
                Ok(acc)
            },
        )
        .collect::<Result<_>>()?;
    let mut total = init();
    for part in parts {
        merge(&mut total, part);
    }
    Ok(total)
}

/// Running sums for a mean and its standard error.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    sum: f64,
    sumsq: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.count += 1;
        self.sum += v;
        self.sumsq += v * v;
    }

    fn merge(&mut self, o: Moments) {
        self.count += o.count;
        self.sum += o.sum;
        self.sumsq += o.sumsq;
    }

    fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    fn stderr(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let var = ((self.sumsq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Fill `scratch.w` with the log weights for `x = scratch.x[..n]`.
fn log_weights(scratch: &mut Scratch, n: usize, rho: f64, k: &Kernel) {
    precision_weighted_into(&scratch.x[..n], rho, &mut scratch.s[..n]);
    scratch.w[0] = k.ln_null;
    for i in 0..n {
        scratch.w[i + 1] = k.alt(scratch.s[i]);
    }
}

/// Index accepted by the threshold rule, from log weights already in `w`.
///
/// Same arithmetic as `decide(posterior(..))`, without the allocation.
fn accepted_from_weights(w: &[f64], p: f64) -> Option<usize> {
    let mut best = 0;
    for (i, &v) in w.iter().enumerate() {
        if v > w[best] {
            best = i;
        }
    }
    let m = w[best];
    let sum: f64 = w.iter().map(|v| (v - m).exp()).sum();
    (1.0 / sum >= p).then_some(best)
}

/// Whether the threshold rule accepts a non-null model for `x = scratch.x[..n]`.
///
/// Skips the full normalization when even the largest alternative, paired
/// only with the null, falls short of `p`.
fn false_positive(scratch: &mut Scratch, n: usize, rho: f64, k: &Kernel, ln_p: f64, p: f64) -> bool {
    precision_weighted_into(&scratch.x[..n], rho, &mut scratch.s[..n]);
    let m = scratch.s[..n].iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let w = k.alt(m);
    if w - log_add_exp(k.ln_null, w) < ln_p - 1e-12 {
        return false;
    }
    scratch.w[0] = k.ln_null;
    for i in 0..n {
        scratch.w[i + 1] = k.alt(scratch.s[i]);
    }
    matches!(accepted_from_weights(&scratch.w[..=n], p), Some(i) if i >= 1)
}

/// Binomial proportion from simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct FppEstimate {
    pub estimate: f64,
    /// `sqrt(estimate (1 - estimate) / reps)`
    pub stderr: f64,
    pub reps: usize,
    pub config_echo: String,
}

impl FppEstimate {
    pub fn from_count(count: u64, reps: usize, config_echo: String) -> Self {
        let estimate = count as f64 / reps as f64;
        Self {
            estimate,
            stderr: (estimate * (1.0 - estimate) / reps as f64).sqrt(),
            reps,
            config_echo,
        }
    }
}

/// Null false-positive counts for several slab variances on shared draws.
///
/// Replicate `k` uses the stream `(seed, grid, k)`, so every entry of
/// `tau2s` sees exactly the same data.
pub fn null_false_positive_counts(
    spec: &ModelSpec,
    r: f64,
    p: f64,
    tau2s: &[f64],
    reps: usize,
    seed: u64,
    grid: u64,
) -> Result<Vec<u64>> {
    let kernels = tau2s
        .iter()
        .map(|&t| Ok(Kernel::new(spec, &PriorSpec::new(r, t)?)))
        .collect::<Result<Vec<_>>>()?;
    crate::error::check_open_unit("p", p)?;
    let (n, rho, ln_p) = (spec.n(), spec.rho(), p.ln());
    let null = TruthScenario::null();
    replicate_fold(
        seed,
        grid,
        reps,
        n,
        || vec![0u64; kernels.len()],
        |acc, scratch, rng, _| {
            sample_into(&null, spec, rng, &mut scratch.x[..n]);
            for (c, k) in acc.iter_mut().zip(&kernels) {
                *c += false_positive(scratch, n, rho, k, ln_p, p) as u64;
            }
            Ok(())
        },
        |a, b| a.iter_mut().zip(b).for_each(|(x, y)| *x += y),
    )
}

/// Null false positives when each replicate estimates its own slab variance.
fn type2_false_positive_count(spec: &ModelSpec, r: f64, p: f64, reps: usize, seed: u64, grid: u64) -> Result<u64> {
    let n = spec.n();
    let null = TruthScenario::null();
    replicate_fold(
        seed,
        grid,
        reps,
        n,
        || 0u64,
        |acc, scratch, rng, _| {
            sample_into(&null, spec, rng, &mut scratch.x[..n]);
            let obs = Observation::new(scratch.x[..n].to_vec())?;
            let tau2 = type2_mle_tau2(&obs, spec)?.tau2;
            let k = Kernel::new(spec, &PriorSpec::new(r, tau2)?);
            log_weights(scratch, n, spec.rho(), &k);
            *acc += matches!(accepted_from_weights(&scratch.w[..=n], p), Some(i) if i >= 1) as u64;
            Ok(())
        },
        |a, b| *a += b,
    )
}

/// Slab variance for one grid point.
fn grid_tau2(mode: TauMode, fixed: Option<f64>, p: f64, r: f64, spec: &ModelSpec) -> Result<Option<f64>> {
    match mode {
        TauMode::Fixed => Ok(fixed),
        TauMode::AdaptiveMaxFpp => tau2_max_fpp(&AdaptiveConfig::new(p, r, spec.rho(), spec.n())?).map(Some),
        TauMode::Type2Mle => Ok(None),
    }
}

fn require(cfg: &ExperimentConfig, allowed: &[Experiment]) -> Result<()> {
    cfg.validate()?;
    if allowed.contains(&cfg.experiment) {
        Ok(())
    } else {
        Err(Error::Config {
            line: None,
            message: format!("experiment `{}` cannot be run by this entry point", cfg.experiment),
        })
    }
}

/// Simulated and asymptotic FPP at one `(rho, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FppPoint {
    pub n: usize,
    pub rho: f64,
    /// Slab variance used, when it does not vary by replicate.
    pub tau2: Option<f64>,
    pub estimate: FppEstimate,
    /// The matching large-`n` formula, when defined at this `n`.
    pub asymptotic: Option<f64>,
}

pub fn run_fpp(cfg: &ExperimentConfig) -> Result<Vec<FppPoint>> {
    require(cfg, &[Experiment::Fpp])?;
    with_pool(cfg.threads, || {
        let mut out = Vec::new();
        for (ri, &rho) in cfg.rhos.iter().enumerate() {
            for (ni, &n) in cfg.ns.iter().enumerate() {
                let grid = (ri * cfg.ns.len() + ni) as u64;
                let spec = ModelSpec::new(n, rho)?;
                let tau2 = grid_tau2(cfg.tau_mode, cfg.tau2.first().copied(), cfg.p, cfg.r, &spec)?;
                let count = match tau2 {
                    Some(t) => null_false_positive_counts(&spec, cfg.r, cfg.p, &[t], cfg.reps, cfg.seed, grid)?[0],
                    None => type2_false_positive_count(&spec, cfg.r, cfg.p, cfg.reps, cfg.seed, grid)?,
                };
                let asymptotic = match cfg.tau_mode {
                    TauMode::Fixed => fpp_fixed_tau_rate(&spec, &PriorSpec::new(cfg.r, tau2.unwrap_or(0.0))?, cfg.p).ok(),
                    TauMode::AdaptiveMaxFpp => AdaptiveConfig::new(cfg.p, cfg.r, rho, n)
                        .and_then(|a| fpp_adaptive_asymptotic(&a))
                        .ok(),
                    TauMode::Type2Mle => fpp_type2_asymptotic(cfg.p, cfg.r, n).ok(),
                };
                out.push(FppPoint {
                    n,
                    rho,
                    tau2,
                    estimate: FppEstimate::from_count(count, cfg.reps, cfg.summary()),
                    asymptotic,
                });
            }
        }
        Ok(out)
    })?
}

fn base_row(cfg: &ExperimentConfig, n: usize, rho: f64, tau2: Option<f64>, theta: Option<f64>) -> Row {
    Row {
        experiment: cfg.experiment.name(),
        n,
        rho,
        r: cfg.r,
        tau2_mode: cfg.tau_mode.name(),
        tau2,
        p: cfg.p,
        theta,
        grid_param: String::new(),
        replicate: None,
        value: 0.0,
        stderr: None,
        reps: cfg.reps,
        seed: cfg.seed,
    }
}

fn estimate_row(base: &Row, label: &str, value: f64, stderr: f64, reps: usize) -> Row {
    Row {
        grid_param: label.to_string(),
        value,
        stderr: Some(stderr),
        reps,
        ..base.clone()
    }
}

fn replicate_row(base: &Row, label: &str, rep: u64, value: f64) -> Row {
    Row {
        grid_param: label.to_string(),
        replicate: Some(rep),
        value,
        ..base.clone()
    }
}

pub fn fpp_rows(cfg: &ExperimentConfig, points: &[FppPoint]) -> Table {
    let mut rows = Vec::new();
    for pt in points {
        let base = base_row(cfg, pt.n, pt.rho, pt.tau2, None);
        rows.push(estimate_row(&base, "simulated", pt.estimate.estimate, pt.estimate.stderr, pt.estimate.reps));
        if let Some(a) = pt.asymptotic {
            rows.push(estimate_row(&base, "asymptotic", a, 0.0, 0));
        }
    }
    Table { rows }
}

/// Acceptance rate of the true model `M_1` at one `(rho, n, theta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerPoint {
    pub n: usize,
    pub rho: f64,
    pub theta: f64,
    pub tau2: Option<f64>,
    pub rate: FppEstimate,
}

pub fn run_power_curve(cfg: &ExperimentConfig) -> Result<Vec<PowerPoint>> {
    require(cfg, &[Experiment::PowerCurve])?;
    with_pool(cfg.threads, || {
        let mut out = Vec::new();
        let (nn, nt) = (cfg.ns.len(), cfg.thetas.len());
        for (ri, &rho) in cfg.rhos.iter().enumerate() {
            for (ni, &n) in cfg.ns.iter().enumerate() {
                let spec = ModelSpec::new(n, rho)?;
                let tau2 = grid_tau2(cfg.tau_mode, cfg.tau2.first().copied(), cfg.p, cfg.r, &spec)?;
                let fixed_kernel = tau2.map(|t| PriorSpec::new(cfg.r, t).map(|pr| Kernel::new(&spec, &pr))).transpose()?;
                for (ti, &theta) in cfg.thetas.iter().enumerate() {
                    let grid = ((ri * nn + ni) * nt + ti) as u64;
                    let truth = TruthScenario::alternative(1, theta)?;
                    let hits = replicate_fold(
                        cfg.seed,
                        grid,
                        cfg.reps,
                        n,
                        || 0u64,
                        |acc, scratch, rng, _| {
                            sample_into(&truth, &spec, rng, &mut scratch.x[..n]);
                            let k = match fixed_kernel {
                                Some(k) => k,
                                None => {
                                    let obs = Observation::new(scratch.x[..n].to_vec())?;
                                    let t = type2_mle_tau2(&obs, &spec)?.tau2;
                                    Kernel::new(&spec, &PriorSpec::new(cfg.r, t)?)
                                }
                            };
                            log_weights(scratch, n, rho, &k);
                            *acc += (accepted_from_weights(&scratch.w[..=n], cfg.p) == Some(1)) as u64;
                            Ok(())
                        },
                        |a, b| *a += b,
                    )?;
                    out.push(PowerPoint {
                        n,
                        rho,
                        theta,
                        tau2,
                        rate: FppEstimate::from_count(hits, cfg.reps, cfg.summary()),
                    });
                }
            }
        }
        Ok(out)
    })?
}

pub fn power_rows(cfg: &ExperimentConfig, points: &[PowerPoint]) -> Table {
    let rows = points
        .iter()
        .map(|pt| {
            let base = base_row(cfg, pt.n, pt.rho, pt.tau2, Some(pt.theta));
            estimate_row(&base, "acceptance_rate", pt.rate.estimate, pt.rate.stderr, pt.rate.reps)
        })
        .collect();
    Table { rows }
}

/// Per-replicate values along the `n` grid, plus their running moments.
struct Trajectories {
    reps: Vec<(u64, Vec<Vec<f64>>)>,
}

/// Simulate nested null trajectories: one draw of length `max n` per
/// replicate, evaluated on each prefix in the grid.
///
/// `eval` returns one or more values per `(n, prefix)`.
fn null_trajectories<F>(cfg: &ExperimentConfig, rho: f64, grid: u64, eval: F) -> Result<Trajectories>
where
    F: Fn(&Observation, &ModelSpec) -> Result<Vec<f64>> + Sync,
{
    let n_max = *cfg.ns.iter().max().expect("validated non-empty");
    let spec_max = ModelSpec::new(n_max, rho)?;
    let null = TruthScenario::null();
    let specs = cfg.ns.iter().map(|&n| ModelSpec::new(n, rho)).collect::<Result<Vec<_>>>()?;
    let reps = replicate_fold(
        cfg.seed,
        grid,
        cfg.reps,
        n_max,
        Vec::new,
        |acc: &mut Vec<(u64, Vec<Vec<f64>>)>, scratch, rng, rep| {
            sample_into(&null, &spec_max, rng, &mut scratch.x);
            let mut row = Vec::with_capacity(specs.len());
            for spec in &specs {
                let obs = Observation::new(scratch.x[..spec.n()].to_vec())?;
                row.push(eval(&obs, spec)?);
            }
            acc.push((rep, row));
            Ok(())
        },
        |a, b| a.extend(b),
    )?;
    Ok(Trajectories { reps })
}

fn prior_for(cfg: &ExperimentConfig, tau2: Option<f64>, x: &Observation, spec: &ModelSpec) -> Result<PriorSpec> {
    let t = match tau2 {
        Some(t) => t,
        None => match cfg.tau_mode {
            TauMode::AdaptiveMaxFpp => tau2_max_fpp(&AdaptiveConfig::new(cfg.p, cfg.r, spec.rho(), spec.n())?)?,
            _ => type2_mle_tau2(x, spec)?.tau2,
        },
    };
    PriorSpec::new(cfg.r, t)
}

/// The slab variances a trajectory experiment sweeps: the fixed grid, or one
/// data- or `n`-dependent choice.
fn tau_grid(cfg: &ExperimentConfig) -> Vec<Option<f64>> {
    match cfg.tau_mode {
        TauMode::Fixed => cfg.tau2.iter().map(|&t| Some(t)).collect(),
        _ => vec![None],
    }
}

fn trajectory_rows(
    cfg: &ExperimentConfig,
    rho: f64,
    tau2: Option<f64>,
    tr: &Trajectories,
    labels: &[&str],
    per_replicate: &[bool],
) -> Vec<Row> {
    let mut rows = Vec::new();
    for (ni, &n) in cfg.ns.iter().enumerate() {
        let base = base_row(cfg, n, rho, tau2, None);
        for (li, label) in labels.iter().enumerate() {
            let mut m = Moments::default();
            for (rep, vals) in &tr.reps {
                let v = vals[ni][li];
                m.push(v);
                if per_replicate[li] {
                    rows.push(replicate_row(&base, label, *rep, v));
                }
            }
            rows.push(estimate_row(&base, label, m.mean(), m.stderr(), m.count as usize));
        }
    }
    rows
}

/// Ratio of the large-`n` approximation to the exact `P(M_1 | x)` along
/// nested null trajectories. Also serves `tau_sweep`.
pub fn run_ratio_convergence(cfg: &ExperimentConfig) -> Result<Table> {
    require(cfg, &[Experiment::RatioConvergence, Experiment::TauSweep])?;
    with_pool(cfg.threads, || {
        let taus = tau_grid(cfg);
        let mut rows = Vec::new();
        for (ri, &rho) in cfg.rhos.iter().enumerate() {
            for (ti, &tau2) in taus.iter().enumerate() {
                let grid = (ri * taus.len() + ti) as u64;
                let tr = null_trajectories(cfg, rho, grid, |x, spec| {
                    let prior = prior_for(cfg, tau2, x, spec)?;
                    let exact = posterior(x, spec, &prior)?.alternative(1);
                    let approx = posterior_asymptotic(x, spec, &prior)?.alternative(1);
                    Ok(vec![approx / exact, exact, approx])
                })?;
                rows.extend(trajectory_rows(
                    cfg,
                    rho,
                    tau2,
                    &tr,
                    &["ratio", "posterior_exact", "posterior_asymptotic"],
                    &[true, false, false],
                ));
            }
        }
        Ok(Table { rows })
    })?
}

/// `P(M_0 | x)` along nested null trajectories, with `|P(M_0 | x) - r|`.
pub fn run_null_posterior_convergence(cfg: &ExperimentConfig) -> Result<Table> {
    require(cfg, &[Experiment::NullPosteriorConvergence])?;
    with_pool(cfg.threads, || {
        let taus = tau_grid(cfg);
        let mut rows = Vec::new();
        for (ri, &rho) in cfg.rhos.iter().enumerate() {
            for (ti, &tau2) in taus.iter().enumerate() {
                let grid = (ri * taus.len() + ti) as u64;
                let tr = null_trajectories(cfg, rho, grid, |x, spec| {
                    let prior = prior_for(cfg, tau2, x, spec)?;
                    let p0 = posterior(x, spec, &prior)?.null();
                    Ok(vec![p0, (p0 - cfg.r).abs()])
                })?;
                rows.extend(trajectory_rows(cfg, rho, tau2, &tr, &["p_null", "abs_dev"], &[true, false]));
            }
        }
        Ok(Table { rows })
    })?
}

/// Adaptive thresholds that hit `target_fpp`, with a simulated check at each.
pub fn run_threshold_curve(cfg: &ExperimentConfig) -> Result<Table> {
    require(cfg, &[Experiment::ThresholdCurve])?;
    let target = cfg.target_fpp.expect("validated");
    with_pool(cfg.threads, || {
        let mut rows = Vec::new();
        for (ri, &rho) in cfg.rhos.iter().enumerate() {
            for (ni, &n) in cfg.ns.iter().enumerate() {
                let grid = (ri * cfg.ns.len() + ni) as u64;
                let spec = ModelSpec::new(n, rho)?;
                let p = threshold_for_fpp(target, cfg.r, n)?;
                let tau2 = tau2_max_fpp(&AdaptiveConfig::new(p, cfg.r, rho, n)?)?;
                let count = null_false_positive_counts(&spec, cfg.r, p, &[tau2], cfg.reps, cfg.seed, grid)?[0];
                let est = FppEstimate::from_count(count, cfg.reps, cfg.summary());
                let base = Row {
                    tau2_mode: TauMode::AdaptiveMaxFpp.name(),
                    p,
                    ..base_row(cfg, n, rho, Some(tau2), None)
                };
                rows.push(estimate_row(&base, "threshold", p, 0.0, 0));
                rows.push(estimate_row(&base, "simulated_fpp", est.estimate, est.stderr, est.reps));
            }
        }
        Ok(Table { rows })
    })?
}

fn regimes(cfg: &ExperimentConfig) -> Result<Vec<(String, InfoGrowthSpec)>> {
    match cfg.regime.expect("validated") {
        RegimeKind::Zero => Ok(vec![("d_to_zero".into(), InfoGrowthSpec::new(InfoRegime::DToZero)?)]),
        RegimeKind::Infinity => Ok(vec![("d_to_infinity".into(), InfoGrowthSpec::new(InfoRegime::DToInfinity)?)]),
        RegimeKind::Finite => cfg
            .ds
            .iter()
            .map(|&d| Ok((format!("d={d}"), InfoGrowthSpec::new(InfoRegime::DFinite { d })?)))
            .collect(),
    }
}

/// Posterior of the true model when the noise shrinks as `sigma_n^2 = d_n / ln n`.
///
/// Scaling the data by `1/sigma_n` turns this into the unit-variance model
/// with slab `tau2 / sigma_n^2` and signal `theta / sigma_n`, which is what
/// is simulated. Rows labelled `<regime>:posterior_true` carry the Monte Carlo
/// mean; `<regime>:limit_proof_chain` and `<regime>:limit_statement` the
/// predicted limits where one exists.
pub fn run_info_growth(cfg: &ExperimentConfig) -> Result<Table> {
    require(cfg, &[Experiment::InfoGrowth])?;
    let tau2 = cfg.tau2[0];
    let theta = cfg.thetas.first().copied().unwrap_or(0.0);
    let j = cfg.truth;
    let regs = regimes(cfg)?;
    with_pool(cfg.threads, || {
        let mut rows = Vec::new();
        for (ri, &rho) in cfg.rhos.iter().enumerate() {
            for (gi, (label, igs)) in regs.iter().enumerate() {
                for (ni, &n) in cfg.ns.iter().enumerate() {
                    let grid = ((ri * regs.len() + gi) * cfg.ns.len() + ni) as u64;
                    let spec = ModelSpec::new(n, rho)?;
                    let scale = 1.0 / igs.sigma2_at(n);
                    let prior = PriorSpec::new(cfg.r, tau2 * scale)?;
                    let truth = if j == 0 {
                        TruthScenario::null()
                    } else {
                        TruthScenario::alternative(j, theta * scale.sqrt())?
                    };
                    let k = Kernel::new(&spec, &prior);
                    let m = replicate_fold(
                        cfg.seed,
                        grid,
                        cfg.reps,
                        n,
                        Moments::default,
                        |acc, scratch, rng, _| {
                            sample_into(&truth, &spec, rng, &mut scratch.x[..n]);
                            log_weights(scratch, n, rho, &k);
                            let w = &scratch.w[..=n];
                            acc.push((w[j] - log_sum_exp(w)).exp());
                            Ok(())
                        },
                        Moments::merge,
                    )?;
                    let base = base_row(cfg, n, rho, Some(tau2), (j > 0).then_some(theta));
                    rows.push(estimate_row(&base, &format!("{label}:posterior_true"), m.mean(), m.stderr(), cfg.reps));
                    let base_prior = PriorSpec::new(cfg.r, tau2)?;
                    let base_truth = if j == 0 {
                        TruthScenario::null()
                    } else {
                        TruthScenario::alternative(j, theta)?
                    };
                    for (name, arg) in [("limit_proof_chain", PhiArgument::ProofChain), ("limit_statement", PhiArgument::Statement)] {
                        let v = match info_growth_limit(igs, &spec, &base_prior, &base_truth, arg)? {
                            InfoLimit::LimitValue(v) => Some(v),
                            InfoLimit::ConsistentTo(i) if i == j => Some(1.0),
                            _ => None,
                        };
                        if let Some(v) = v {
                            rows.push(estimate_row(&base, &format!("{label}:{name}"), v, 0.0, 0));
                        }
                    }
                }
            }
        }
        Ok(Table { rows })
    })?
}

/// Run whatever `cfg.experiment` names.
pub fn run(cfg: &ExperimentConfig) -> Result<Table> {
    match cfg.experiment {
        Experiment::Fpp => Ok(fpp_rows(cfg, &run_fpp(cfg)?)),
        Experiment::PowerCurve => Ok(power_rows(cfg, &run_power_curve(cfg)?)),
        Experiment::RatioConvergence | Experiment::TauSweep => run_ratio_convergence(cfg),
        Experiment::NullPosteriorConvergence => run_null_posterior_convergence(cfg),
        Experiment::ThresholdCurve => run_threshold_curve(cfg),
        Experiment::InfoGrowth => run_info_growth(cfg),
    }
}
