//! Command-line front end.
//!
//! Every scalar subcommand accepts `--config FILE` with `key = value` lines
//! naming its own flags; flags given on the command line win. Output is one
//! `key=value` per line (CSV for `simulate`), always with `.` decimals.
//!
//! Exit codes: 0 success, 2 usage or parameter error, 3 numerical failure.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::adaptive::{
    fpp_adaptive_asymptotic, fpp_type2_asymptotic, solve_kstar, tau2_max_fpp, threshold_for_fpp, AdaptiveConfig,
};
use crate::asymptotics::fpp_fixed_tau_rate;
use crate::bayes::{decide, posterior, posterior_n2};
use crate::error::Error;
use crate::frequentist::{adhoc_critical_value, lrt_critical_value};
use crate::model::{ModelSpec, Observation, PriorSpec};
use crate::rng::RandomStream;
use crate::sim::{self, ExperimentConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "equicorr", version, about = "Multiplicity control for mutually exclusive normal means")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Critical value of the ad hoc max-|x| test or the likelihood ratio test.
    CriticalValue(CriticalValueArgs),
    /// Posterior model probabilities and the thresholded decision.
    Posterior(PosteriorArgs),
    /// FPP-maximizing slab variance.
    Tau2(Tau2Args),
    /// Fixed point k* of the type II estimator.
    Kstar(KstarArgs),
    /// Threshold p giving a target asymptotic FPP under the adaptive slab.
    Threshold(ThresholdArgs),
    /// Large-n false positive probability.
    FppAsymptotic(FppArgs),
    /// Run a Monte Carlo experiment from a config file and write CSV.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Adhoc,
    Lrt,
}

impl FromStr for MethodArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FppMode {
    Adaptive,
    Type2,
    Fixed,
}

impl FromStr for FppMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Args)]
struct CriticalValueArgs {
    #[arg(long)]
    method: Option<MethodArg>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    /// Monte Carlo replicates for the LRT quantile.
    #[arg(long)]
    reps: Option<usize>,
    /// Falls back to the SEED environment variable.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PosteriorArgs {
    /// Comma-separated observation, e.g. `--x 1.2,-0.3,2.5`.
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    /// File of numbers separated by commas or whitespace.
    #[arg(long)]
    x_file: Option<PathBuf>,
    /// Expected length; checked against x when given.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    tau2: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    /// Cross-check against the two-channel closed form (n = 2) or the
    /// normalization (other n).
    #[arg(long)]
    verify: bool,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Tau2Args {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct KstarArgs {
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    /// Target false positive probability.
    #[arg(long)]
    fpp: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    /// Re-evaluate the FPP at the returned threshold.
    #[arg(long)]
    verify: bool,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FppArgs {
    #[arg(long)]
    mode: Option<FppMode>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    /// Slab variance for `--mode fixed`.
    #[arg(long)]
    tau2: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Experiment file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `seed` in the file; falls back to SEED.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    /// Overrides `threads` in the file and the THREADS variable.
    #[arg(long)]
    threads: Option<usize>,
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Numerical { .. } => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type CliResult<T> = Result<T, Failure>;

/// Key/value pairs from `--config`, consumed one key at a time.
struct FileValues {
    path: String,
    values: BTreeMap<String, (usize, String)>,
}

impl FileValues {
    fn load(path: Option<&PathBuf>) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        let Some(path) = path else {
            return Ok(Self {
                path: String::new(),
                values,
            });
        };
        let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        let shown = path.display().to_string();
        for (idx, raw) in text.lines().enumerate() {
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body
                .split_once('=')
                .ok_or_else(|| usage(format!("{shown}:{}: expected `key = value`", idx + 1)))?;
            let key = k.trim().replace('_', "-");
            if values.insert(key.clone(), (idx + 1, v.trim().to_string())).is_some() {
                return Err(usage(format!("{shown}:{}: `{key}` given twice", idx + 1)));
            }
        }
        Ok(Self { path: shown, values })
    }

    /// Fill `slot` from the file unless the flag already set it.
    fn fill<T: FromStr>(&mut self, slot: &mut Option<T>, key: &str) -> CliResult<()>
    where
        T::Err: std::fmt::Display,
    {
        if let Some((line, raw)) = self.values.remove(key) {
            if slot.is_none() {
                let v = raw
                    .parse()
                    .map_err(|e| usage(format!("{}:{line}: bad value for `{key}`: {e}", self.path)))?;
                *slot = Some(v);
            }
        }
        Ok(())
    }

    /// Every key must have been consumed.
    fn finish(self) -> CliResult<()> {
        match self.values.iter().next() {
            Some((k, (line, _))) => Err(usage(format!("{}:{line}: unknown key `{k}`", self.path))),
            None => Ok(()),
        }
    }
}

fn need<T>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| usage(format!("missing required --{flag}")))
}

fn seed_or_env(flag: Option<u64>) -> CliResult<Option<u64>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| usage(format!("SEED must be a u64, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

fn emit(out: &mut dyn Write, pairs: &[(&str, String)]) -> CliResult<()> {
    for (k, v) in pairs {
        writeln!(out, "{k}={v}").map_err(|e| usage(format!("write failed: {e}")))?;
    }
    Ok(())
}

fn cmd_critical_value(mut a: CriticalValueArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let mut f = FileValues::load(a.config.as_ref())?;
    f.fill(&mut a.method, "method")?;
    f.fill(&mut a.alpha, "alpha")?;
    f.fill(&mut a.n, "n")?;
    f.fill(&mut a.rho, "rho")?;
    f.fill(&mut a.reps, "reps")?;
    let file_seed = {
        let mut s = None;
        f.fill(&mut s, "seed")?;
        s
    };
    f.finish()?;
    let spec = ModelSpec::new(need(a.n, "n")?, need(a.rho, "rho")?)?;
    let alpha = need(a.alpha, "alpha")?;
    let cv = match need(a.method, "method")? {
        MethodArg::Adhoc => adhoc_critical_value(alpha, &spec)?,
        MethodArg::Lrt => {
            let seed = seed_or_env(a.seed)?.or(file_seed).unwrap_or(0);
            let mut rng = RandomStream::new(seed, 0);
            lrt_critical_value(alpha, &spec, a.reps.unwrap_or(100_000), &mut rng)?
        }
    };
    let mut pairs = vec![
        ("method", cv.method.to_string()),
        ("c", cv.c.to_string()),
        ("alpha", cv.alpha.to_string()),
    ];
    if let Some(se) = cv.stderr {
        pairs.push(("stderr", se.to_string()));
    }
    if let Some(reps) = cv.reps {
        pairs.push(("reps", reps.to_string()));
    }
    emit(out, &pairs)?;
    if let Some(w) = &cv.warning {
        let _ = writeln!(err, "warning: {w}");
    }
    Ok(())
}

fn read_x(inline: Option<&str>, file: Option<&PathBuf>) -> CliResult<Vec<f64>> {
    let text = match (inline, file) {
        (Some(s), None) => s.to_string(),
        (None, Some(p)) => fs::read_to_string(p).map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?,
        (Some(_), Some(_)) => return Err(usage("give --x or --x-file, not both")),
        (None, None) => return Err(usage("missing required --x or --x-file")),
    };
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| usage(format!("not a number in x: `{t}`"))))
        .collect()
}

fn cmd_posterior(mut a: PosteriorArgs, out: &mut dyn Write) -> CliResult<()> {
    let mut f = FileValues::load(a.config.as_ref())?;
    f.fill(&mut a.x, "x")?;
    f.fill(&mut a.x_file, "x-file")?;
    f.fill(&mut a.n, "n")?;
    f.fill(&mut a.rho, "rho")?;
    f.fill(&mut a.tau2, "tau2")?;
    f.fill(&mut a.r, "r")?;
    f.fill(&mut a.p, "p")?;
    f.finish()?;
    let x = Observation::new(read_x(a.x.as_deref(), a.x_file.as_ref())?)?;
    if let Some(n) = a.n {
        if n != x.len() {
            return Err(usage(format!("x has {} entries but --n is {n}", x.len())));
        }
    }
    let spec = ModelSpec::new(x.len(), need(a.rho, "rho")?)?;
    let prior = PriorSpec::new(a.r.unwrap_or(0.5), need(a.tau2, "tau2")?)?;
    let p = a.p.unwrap_or(0.5);
    let post = posterior(&x, &spec, &prior)?;
    let d = decide(&post, p)?;
    let mut pairs: Vec<(String, String)> = post
        .probs()
        .iter()
        .enumerate()
        .map(|(i, q)| (format!("P{i}"), q.to_string()))
        .collect();
    pairs.push(("threshold_p".into(), p.to_string()));
    pairs.push((
        "accepted".into(),
        d.accepted.map(|i| i.to_string()).unwrap_or_else(|| "none".into()),
    ));
    if a.verify {
        let diff = if spec.n() == 2 {
            let alt = posterior_n2(&x, spec.rho(), &prior)?;
            post.probs()
                .iter()
                .zip(alt.probs())
                .map(|(u, v)| (u - v).abs())
                .fold(0.0, f64::max)
        } else {
            (post.probs().iter().sum::<f64>() - 1.0).abs()
        };
        pairs.push(("verify_max_abs_diff".into(), diff.to_string()));
        if diff > 1e-9 {
            let borrowed: Vec<(&str, String)> = pairs.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
            emit(out, &borrowed)?;
            return Err(Failure {
                code: EXIT_NUMERICAL,
                message: format!("verification failed: paths differ by {diff}"),
            });
        }
    }
    let borrowed: Vec<(&str, String)> = pairs.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
    emit(out, &borrowed)
}

fn cmd_tau2(mut a: Tau2Args, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let mut f = FileValues::load(a.config.as_ref())?;
    f.fill(&mut a.n, "n")?;
    f.fill(&mut a.rho, "rho")?;
    f.fill(&mut a.p, "p")?;
    f.fill(&mut a.r, "r")?;
    f.finish()?;
    let cfg = AdaptiveConfig::new(need(a.p, "p")?, need(a.r, "r")?, a.rho.unwrap_or(0.0), need(a.n, "n")?)?;
    let t = tau2_max_fpp(&cfg)?;
    for w in cfg.warnings() {
        let _ = writeln!(err, "warning: {w}");
    }
    emit(out, &[("tau2", t.to_string()), ("c_tau", cfg.c_tau().to_string())])
}

fn cmd_kstar(mut a: KstarArgs, out: &mut dyn Write) -> CliResult<()> {
    let mut f = FileValues::load(a.config.as_ref())?;
    f.fill(&mut a.p, "p")?;
    f.fill(&mut a.r, "r")?;
    f.finish()?;
    let s = solve_kstar(need(a.p, "p")?, need(a.r, "r")?)?;
    emit(
        out,
        &[
            ("k_star", s.k_star.to_string()),
            ("c_star", s.c_star.to_string()),
            ("residual", s.residual.to_string()),
        ],
    )
}

fn cmd_threshold(mut a: ThresholdArgs, out: &mut dyn Write) -> CliResult<()> {
    let mut f = FileValues::load(a.config.as_ref())?;
    f.fill(&mut a.fpp, "fpp")?;
    f.fill(&mut a.r, "r")?;
    f.fill(&mut a.n, "n")?;
    f.finish()?;
    let (target, r, n) = (need(a.fpp, "fpp")?, need(a.r, "r")?, need(a.n, "n")?);
    let p = threshold_for_fpp(target, r, n)?;
    let achieved = fpp_adaptive_asymptotic(&AdaptiveConfig::new(p, r, 0.0, n)?)?;
    let mut pairs = vec![("p", p.to_string()), ("residual", (achieved - target).abs().to_string())];
    if a.verify {
        pairs.push(("fpp_at_p", achieved.to_string()));
        if (achieved - target).abs() > 1e-9 * target.max(1e-3) {
            emit(out, &pairs)?;
            return Err(Failure {
                code: EXIT_NUMERICAL,
                message: format!("round trip gives FPP {achieved}, not {target}"),
            });
        }
    }
    emit(out, &pairs)
}

fn cmd_fpp(mut a: FppArgs, out: &mut dyn Write) -> CliResult<()> {
    let mut f = FileValues::load(a.config.as_ref())?;
    f.fill(&mut a.mode, "mode")?;
    f.fill(&mut a.n, "n")?;
    f.fill(&mut a.p, "p")?;
    f.fill(&mut a.r, "r")?;
    f.fill(&mut a.rho, "rho")?;
    f.fill(&mut a.tau2, "tau2")?;
    f.finish()?;
    let (n, p, r) = (need(a.n, "n")?, need(a.p, "p")?, need(a.r, "r")?);
    let rho = a.rho.unwrap_or(0.0);
    let mode = need(a.mode, "mode")?;
    if !matches!(mode, FppMode::Fixed) && a.tau2.is_some() {
        return Err(usage("--tau2 is only used with --mode fixed"));
    }
    let v = match mode {
        FppMode::Adaptive => fpp_adaptive_asymptotic(&AdaptiveConfig::new(p, r, rho, n)?)?,
        FppMode::Type2 => fpp_type2_asymptotic(p, r, n)?,
        FppMode::Fixed => fpp_fixed_tau_rate(&ModelSpec::new(n, rho)?, &PriorSpec::new(r, need(a.tau2, "tau2")?)?, p)?,
    };
    emit(out, &[("fpp", v.to_string())])
}

fn cmd_simulate(a: SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let text = fs::read_to_string(&a.config).map_err(|e| usage(format!("cannot read {}: {e}", a.config.display())))?;
    let mut cfg = ExperimentConfig::parse(&text).map_err(|e| usage(format!("{}: {e}", a.config.display())))?;
    if let Some(seed) = seed_or_env(a.seed)? {
        cfg.seed = seed;
    }
    if let Some(reps) = a.reps {
        cfg.reps = reps;
    }
    if a.threads.is_some() {
        cfg.threads = a.threads;
    }
    cfg.validate()?;
    let table = sim::run(&cfg)?;
    let io = |e: std::io::Error| usage(format!("write failed: {e}"));
    match &a.out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| usage(format!("cannot create {}: {e}", path.display())))?;
            table.write_csv(std::io::BufWriter::new(file)).map_err(io)?;
        }
        None => table.write_csv(&mut *out).map_err(io)?,
    }
    let _ = writeln!(
        err,
        "{}: {} rows, reps={}, seed={}, threads={}",
        cfg.experiment,
        table.rows.len(),
        cfg.reps,
        cfg.seed,
        sim::resolve_threads(cfg.threads)
    );
    Ok(())
}

/// Parse `args` (including the program name) and execute; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return EXIT_OK;
                }
                _ => EXIT_USAGE,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    let result = match cli.cmd {
        Command::CriticalValue(a) => cmd_critical_value(a, out, err),
        Command::Posterior(a) => cmd_posterior(a, out),
        Command::Tau2(a) => cmd_tau2(a, out, err),
        Command::Kstar(a) => cmd_kstar(a, out),
        Command::Threshold(a) => cmd_threshold(a, out),
        Command::FppAsymptotic(a) => cmd_fpp(a, out),
        Command::Simulate(a) => cmd_simulate(a, out, err),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
