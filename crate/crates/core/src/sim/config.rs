//! Flat `key = value` experiment files.
//!
//! `#` starts a comment. Grid keys (`n`, `rho`, `tau2`, `theta`, `d`) may be
//! repeated and accumulate in file order; every other key may appear once.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Fpp,
    PowerCurve,
    RatioConvergence,
    NullPosteriorConvergence,
    TauSweep,
    ThresholdCurve,
    InfoGrowth,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Fpp => "fpp",
            Experiment::PowerCurve => "power_curve",
            Experiment::RatioConvergence => "ratio_convergence",
            Experiment::NullPosteriorConvergence => "null_posterior_convergence",
            Experiment::TauSweep => "tau_sweep",
            Experiment::ThresholdCurve => "threshold_curve",
            Experiment::InfoGrowth => "info_growth",
        }
    }

    fn default_reps(&self) -> usize {
        match self {
            Experiment::RatioConvergence | Experiment::TauSweep => 200,
            Experiment::NullPosteriorConvergence => 50,
            _ => 10_000,
        }
    }

    /// Keys this experiment reads besides the common ones.
    fn extra_keys(&self) -> &'static [&'static str] {
        match self {
            Experiment::Fpp => &["tau_mode", "tau2"],
            Experiment::PowerCurve => &["tau_mode", "tau2", "theta"],
            Experiment::RatioConvergence | Experiment::NullPosteriorConvergence | Experiment::TauSweep => {
                &["tau_mode", "tau2"]
            }
            Experiment::ThresholdCurve => &["target_fpp"],
            Experiment::InfoGrowth => &["tau2", "theta", "regime", "d", "truth"],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "fpp" => Experiment::Fpp,
            "power_curve" => Experiment::PowerCurve,
            "ratio_convergence" => Experiment::RatioConvergence,
            "null_posterior_convergence" => Experiment::NullPosteriorConvergence,
            "tau_sweep" => Experiment::TauSweep,
            "threshold_curve" => Experiment::ThresholdCurve,
            "info_growth" => Experiment::InfoGrowth,
            _ => return Err(format!("unknown experiment `{s}`")),
        })
    }
}

/// How the slab variance is chosen at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TauMode {
    #[default]
    Fixed,
    /// The FPP-maximizing closed form.
    AdaptiveMaxFpp,
    /// Per-replicate type II maximum likelihood.
    Type2Mle,
}

impl TauMode {
    pub fn name(&self) -> &'static str {
        match self {
            TauMode::Fixed => "fixed",
            TauMode::AdaptiveMaxFpp => "adaptive_max_fpp",
            TauMode::Type2Mle => "type2_mle",
        }
    }
}

impl FromStr for TauMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "fixed" => TauMode::Fixed,
            "adaptive_max_fpp" | "adaptive" => TauMode::AdaptiveMaxFpp,
            "type2_mle" | "type2" => TauMode::Type2Mle,
            _ => return Err(format!("unknown tau_mode `{s}`")),
        })
    }
}

/// `d_n` schedule for the information-growth experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeKind {
    Zero,
    Finite,
    Infinity,
}

impl FromStr for RegimeKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "zero" => RegimeKind::Zero,
            "finite" => RegimeKind::Finite,
            "infinity" => RegimeKind::Infinity,
            _ => return Err(format!("unknown regime `{s}` (zero, finite, infinity)")),
        })
    }
}

const GRID_KEYS: &[&str] = &["n", "rho", "tau2", "theta", "d"];
const COMMON_KEYS: &[&str] = &["experiment", "n", "rho", "r", "p", "reps", "seed", "threads"];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub ns: Vec<usize>,
    pub rhos: Vec<f64>,
    pub r: f64,
    pub p: f64,
    pub tau_mode: TauMode,
    pub tau2: Vec<f64>,
    pub thetas: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    /// Worker count; falls back to `THREADS`, then available parallelism.
    pub threads: Option<usize>,
    pub regime: Option<RegimeKind>,
    pub ds: Vec<f64>,
    /// True model index for `info_growth` (0 = null).
    pub truth: usize,
    pub target_fpp: Option<f64>,
}

impl ExperimentConfig {
    /// Defaults for everything but the grid.
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            ns: Vec::new(),
            rhos: Vec::new(),
            r: 0.5,
            p: 0.5,
            tau_mode: TauMode::Fixed,
            tau2: Vec::new(),
            thetas: Vec::new(),
            reps: experiment.default_reps(),
            seed: 0,
            threads: None,
            regime: None,
            ds: Vec::new(),
            truth: 0,
            target_fpp: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body
                .split_once('=')
                .ok_or_else(|| cfg_err(line, format!("expected `key = value`, got `{body}`")))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(cfg_err(line, format!("empty key or value in `{body}`")));
            }
            pairs.push((line, k.to_string(), v.to_string()));
        }
        let exp_line = pairs
            .iter()
            .filter(|(_, k, _)| k == "experiment")
            .map(|(l, _, v)| (*l, v.clone()))
            .collect::<Vec<_>>();
        let (line, name) = match exp_line.as_slice() {
            [one] => one.clone(),
            [] => return Err(cfg_err_any("missing `experiment` key")),
            [_, (l, _), ..] => return Err(cfg_err(*l, "`experiment` given twice".into())),
        };
        let experiment: Experiment = name.parse().map_err(|e| cfg_err(line, e))?;
        let mut cfg = Self::new(experiment);
        let mut seen: Vec<String> = Vec::new();
        for (line, k, v) in &pairs {
            if k == "experiment" {
                continue;
            }
            if !GRID_KEYS.contains(&k.as_str()) && seen.contains(k) {
                return Err(cfg_err(*line, format!("`{k}` given twice; only grid keys may repeat")));
            }
            seen.push(k.clone());
            cfg.apply(k, v).map_err(|m| cfg_err(*line, m))?;
        }
        cfg.finish()?;
        Ok(cfg)
    }

    /// Set one key. Grid keys append; scalar keys overwrite.
    pub fn apply(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let known = COMMON_KEYS.contains(&key) || self.experiment.extra_keys().contains(&key);
        if !known {
            let everywhere = COMMON_KEYS.iter().chain(
                [
                    "tau_mode", "tau2", "theta", "regime", "d", "truth", "target_fpp",
                ]
                .iter(),
            );
            return Err(if everywhere.clone().any(|k| *k == key) {
                format!("key `{key}` is not used by experiment `{}`", self.experiment)
            } else {
                format!("unknown key `{key}`")
            });
        }
        match key {
            "experiment" => return Err("`experiment` cannot be overridden".into()),
            "n" => self.ns.push(parse_count(key, value)?),
            "rho" => self.rhos.push(parse_num(key, value)?),
            "tau2" => self.tau2.push(parse_num(key, value)?),
            "theta" => self.thetas.push(parse_num(key, value)?),
            "d" => self.ds.push(parse_num(key, value)?),
            "r" => self.r = parse_num(key, value)?,
            "p" => self.p = parse_num(key, value)?,
            "target_fpp" => self.target_fpp = Some(parse_num(key, value)?),
            "reps" => self.reps = parse_count(key, value)?,
            "truth" => self.truth = parse_count(key, value)?,
            "seed" => self.seed = value.parse().map_err(|_| format!("`seed` must be a u64, got `{value}`"))?,
            "threads" => self.threads = Some(parse_count(key, value)?),
            "tau_mode" => self.tau_mode = value.parse()?,
            "regime" => self.regime = Some(value.parse()?),
            _ => unreachable!("key list and match arms disagree"),
        }
        Ok(())
    }

    /// Fill defaults and check the configuration is runnable.
    pub fn finish(&mut self) -> Result<()> {
        if self.rhos.is_empty() {
            self.rhos.push(0.0);
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(cfg_err_any(&m));
        if self.ns.is_empty() {
            return bad("grid is empty: give at least one `n`".into());
        }
        if let Some(n) = self.ns.iter().find(|&&n| n < 2) {
            return bad(format!("n = {n}: need at least two channels"));
        }
        if self.rhos.is_empty() {
            return bad("grid is empty: give at least one `rho`".into());
        }
        if let Some(r) = self.rhos.iter().find(|r| !(**r >= 0.0 && **r < 1.0)) {
            return bad(format!("rho = {r} outside [0, 1)"));
        }
        for (name, v) in [("r", self.r), ("p", self.p)] {
            if !(v > 0.0 && v < 1.0) {
                return bad(format!("{name} = {v} outside (0, 1)"));
            }
        }
        if self.reps < 1 {
            return bad("reps must be at least 1".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        if let Some(t) = self.tau2.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
            return bad(format!("tau2 = {t} must be finite and >= 0"));
        }
        let uses_tau_mode = self.experiment.extra_keys().contains(&"tau_mode");
        if uses_tau_mode {
            match self.tau_mode {
                TauMode::Fixed if self.tau2.is_empty() => {
                    return bad("tau_mode = fixed requires `tau2`".into());
                }
                TauMode::AdaptiveMaxFpp | TauMode::Type2Mle if !self.tau2.is_empty() => {
                    return bad(format!("`tau2` is not used with tau_mode = {}", self.tau_mode.name()));
                }
                _ => {}
            }
        }
        match self.experiment {
            Experiment::Fpp | Experiment::PowerCurve if self.tau2.len() > 1 => {
                return bad("give a single `tau2` (grid over tau2 with experiment = tau_sweep)".into());
            }
            Experiment::PowerCurve if self.thetas.is_empty() => {
                return bad("power_curve needs at least one `theta`".into());
            }
            Experiment::TauSweep if self.tau_mode != TauMode::Fixed => {
                return bad("tau_sweep needs tau_mode = fixed".into());
            }
            Experiment::ThresholdCurve => match self.target_fpp {
                Some(t) if t > 0.0 && t < 1.0 => {}
                Some(t) => return bad(format!("target_fpp = {t} outside (0, 1)")),
                None => return bad("threshold_curve needs `target_fpp`".into()),
            },
            Experiment::InfoGrowth => self.validate_info_growth()?,
            _ => {}
        }
        Ok(())
    }

    fn validate_info_growth(&self) -> Result<()> {
        let bad = |m: &str| Err(cfg_err_any(m));
        match self.regime {
            None => return bad("info_growth needs `regime` (zero, finite, infinity)"),
            Some(RegimeKind::Finite) if self.ds.is_empty() => return bad("regime = finite needs `d`"),
            Some(RegimeKind::Finite) if self.ds.iter().any(|d| !(*d > 0.0 && d.is_finite())) => {
                return bad("every `d` must be finite and > 0")
            }
            Some(RegimeKind::Zero | RegimeKind::Infinity) if !self.ds.is_empty() => {
                return bad("`d` is only used with regime = finite")
            }
            _ => {}
        }
        if self.tau2.len() != 1 || self.tau2[0] <= 0.0 {
            return bad("info_growth needs exactly one `tau2` > 0");
        }
        if self.ns.iter().any(|&n| n < 3) {
            return bad("info_growth needs n >= 3 (the schedules use ln ln n)");
        }
        if self.truth > 0 {
            if self.thetas.len() != 1 {
                return bad("a non-null truth needs exactly one `theta`");
            }
            if self.ns.iter().any(|&n| n < self.truth) {
                return bad("truth index exceeds the smallest n");
            }
        } else if !self.thetas.is_empty() {
            return bad("`theta` is only used with truth >= 1");
        }
        Ok(())
    }

    /// One-line description echoed in estimates.
    pub fn summary(&self) -> String {
        format!(
            "{} reps={} seed={} r={} p={} tau_mode={}",
            self.experiment,
            self.reps,
            self.seed,
            self.r,
            self.p,
            self.tau_mode.name()
        )
    }
}

fn cfg_err(line: usize, message: String) -> Error {
    Error::Config {
        line: Some(line),
        message,
    }
}

fn cfg_err_any(message: &str) -> Error {
    Error::Config {
        line: None,
        message: message.to_string(),
    }
}

fn parse_num(key: &str, value: &str) -> std::result::Result<f64, String> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("`{key}` must be a finite number, got `{value}`"))
}

/// Accepts `10000` as well as `1e4`.
fn parse_count(key: &str, value: &str) -> std::result::Result<usize, String> {
    if let Ok(v) = value.parse::<usize>() {
        return Ok(v);
    }
    let v = parse_num(key, value)?;
    if v >= 0.0 && v.fract() == 0.0 && v <= 1e15 {
        Ok(v as usize)
    } else {
        Err(format!("`{key}` must be a non-negative integer, got `{value}`"))
    }
}
