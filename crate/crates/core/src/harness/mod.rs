//! Rate experiments: simulate sfBM clouds over a grid of horizons, estimate
//! `E[W_p(μ, 𝔪)]` per horizon, fit a log-log slope and compare it with the
//! predicted exponent.
//!
//! Every `(t, replica)` pair draws from its own random stream and results are
//! collected in task order, so outputs do not depend on the thread count.

mod output;
mod predict;
mod simulate;

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bernstein::BernsteinFunction;
use crate::error::{argument, domain, Error, Result};
use crate::fbm::FbmSampler;
use crate::rng::stream;
use crate::stats::{weighted_line_fit, Estimate, LineFit};
use crate::torus_spectral::{cutoff_for, empirical_fourier, uniform_weights, TorusPoint};
use crate::wasserstein::{
    circle_wp_exact, default_grid_per_axis, discrete_wp, fourier_lower, fourier_upper, fourier_upper_samples, grid_wp,
    Ground, Method,
};

pub use output::{write_outputs, Record};
pub use predict::{predicted_exponent, Prediction, Theorem};
pub use simulate::{simulate_sfbm_raw, simulate_sfbm_samples, simulate_sfbm_samples_with, subordinated_times};

/// Step cap for the continuous-time discretization.
pub const DEFAULT_MAX_STEPS: usize = 4096;
/// Step cap for Brownian runs with the exact circle estimator, whose cost is
/// `O(n log n)`; a 4096 cap would freeze `τ` at large `t` and flatten the rate.
pub const CIRCLE_MAX_STEPS: usize = 1 << 20;
/// Step cap for the two-process experiment, whose cost is a dense assignment.
pub const TWO_PROCESS_MAX_STEPS: usize = 1024;
/// Flatness tolerance on `value·√(t / log t)` in the log regime.
pub const LOG_FLAT_TOL: f64 = 0.1;
/// Largest `units · sources²` accepted for grid transport inside an experiment.
const GRID_WORK_LIMIT: f64 = 1.7e10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    RateContinuous,
    RateDiscrete,
    TwoProcess,
    VerifySdu,
    VerifySpectrum,
    VerifyDiscreteSpectrum,
    VerifyMixed,
    VerifyNpoint,
    VerifyConvexity,
}

impl Scenario {
    pub fn tag(&self) -> &'static str {
        match self {
            Scenario::RateContinuous => "rate_continuous",
            Scenario::RateDiscrete => "rate_discrete",
            Scenario::TwoProcess => "two_process",
            Scenario::VerifySdu => "verify_sdu",
            Scenario::VerifySpectrum => "verify_spectrum",
            Scenario::VerifyDiscreteSpectrum => "verify_discrete_spectrum",
            Scenario::VerifyMixed => "verify_mixed",
            Scenario::VerifyNpoint => "verify_npoint",
            Scenario::VerifyConvexity => "verify_convexity",
        }
    }
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_tolerance() -> f64 {
    0.15
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub d: usize,
    #[serde(rename = "H")]
    pub hurst: f64,
    #[serde(rename = "B")]
    pub bernstein: BernsteinFunction,
    /// Clock of the second process in the two-process experiment.
    #[serde(rename = "B2", default, skip_serializing_if = "Option::is_none")]
    pub bernstein2: Option<BernsteinFunction>,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub t_grid: Vec<f64>,
    pub replicas: usize,
    pub method: Method,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Replace the seed by `TOR_SEED` when that variable is set.
    pub fn apply_env_seed(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var("TOR_SEED") {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("TOR_SEED must be an unsigned 64-bit integer, got {v:?}")))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.d == 0 {
            return bad("d must be at least 1".into());
        }
        if !(self.hurst > 0.0 && self.hurst < 1.0) {
            return bad(format!("H must lie in (0, 1), got {}", self.hurst));
        }
        if !(self.p > 0.0) || !self.p.is_finite() {
            return bad(format!("p must be positive, got {}", self.p));
        }
        if self.replicas < 2 {
            return bad(format!("replicas must be at least 2, got {}", self.replicas));
        }
        if self.t_grid.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
            return bad("t_grid entries must be positive and finite".into());
        }
        if self.t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad("t_grid must be strictly increasing".into());
        }
        if !(self.tolerance > 0.0) {
            return bad(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if self.max_steps == Some(0) {
            return bad("max_steps must be positive".into());
        }
        match self.scenario {
            Scenario::RateDiscrete => match self.beta {
                Some(b) if b > 0.0 && b.is_finite() => {}
                Some(b) => return bad(format!("beta must be positive, got {b}")),
                None => return bad("rate_discrete needs beta".into()),
            },
            Scenario::TwoProcess if self.bernstein2.is_none() => {
                return bad("two_process needs B2".into());
            }
            _ => {}
        }
        Ok(())
    }

    fn step_cap(&self) -> usize {
        self.max_steps.unwrap_or(match self.scenario {
            Scenario::TwoProcess => TWO_PROCESS_MAX_STEPS,
            _ if self.hurst == 0.5 && self.method == Method::ExactCircle => CIRCLE_MAX_STEPS,
            _ => DEFAULT_MAX_STEPS,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Match,
    Mismatch,
    LogRegime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub t: f64,
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub points: Vec<RatePoint>,
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub predicted: f64,
    pub log_regime: bool,
    /// Slope of `value·√(t / log t)`, fitted in the log regime only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_slope: Option<f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
}

/// Weighted least squares on `(log x, log y)` with weights `(y/σ)²`.
///
/// Points without a positive standard error make the fit unweighted.
pub fn fit_loglog(points: &[(f64, f64, f64)]) -> Result<LineFit> {
    if points.len() < 4 {
        return argument(format!("a log-log fit needs at least 4 points, got {}", points.len()));
    }
    if let Some(&(x, y, _)) = points.iter().find(|&&(x, y, _)| !(x > 0.0) || !(y > 0.0)) {
        return domain(format!("log-log fit needs positive coordinates, got ({x}, {y})"));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let weighted = points.iter().all(|&(_, _, s)| s > 0.0 && s.is_finite());
    let ws: Vec<f64> = points
        .iter()
        .map(|&(_, y, s)| if weighted { (y / s).powi(2) } else { 1.0 })
        .collect();
    weighted_line_fit(&xs, &ys, &ws)
}

/// Fit a series against a prediction and decide the verdict.
pub fn fit_rate(points: Vec<RatePoint>, prediction: &Prediction, tolerance: f64) -> Result<RateFit> {
    let triples: Vec<(f64, f64, f64)> = points.iter().map(|p| (p.t, p.mean, p.std_error)).collect();
    let fit = fit_loglog(&triples)?;
    let (residual_slope, verdict) = if prediction.log_regime {
        if let Some(p) = points.iter().find(|p| !(p.t > 1.0)) {
            return domain(format!("log-regime fits need t > 1, got {}", p.t));
        }
        let scaled: Vec<(f64, f64, f64)> = points
            .iter()
            .map(|p| {
                let s = (p.t / p.t.ln()).sqrt();
                (p.t, p.mean * s, p.std_error * s)
            })
            .collect();
        let r = fit_loglog(&scaled)?.slope;
        let v = if r.abs() <= LOG_FLAT_TOL {
            Verdict::LogRegime
        } else {
            Verdict::Mismatch
        };
        (Some(r), v)
    } else if (fit.slope - prediction.exponent).abs() <= tolerance {
        (None, Verdict::Match)
    } else {
        (None, Verdict::Mismatch)
    };
    Ok(RateFit {
        points,
        slope: fit.slope,
        intercept: fit.intercept,
        slope_stderr: fit.slope_stderr,
        predicted: prediction.exponent,
        log_regime: prediction.log_regime,
        residual_slope,
        tolerance,
        verdict,
    })
}

/// Smoothing scale for the Fourier functionals at horizon `t`.
pub fn eps_schedule(t: f64, d: usize, h: f64, alpha: f64) -> Result<f64> {
    let r = alpha / h;
    let df = d as f64;
    let eps = if (df - (2.0 + r)).abs() <= 1e-12 {
        if !(t > 1.0) {
            return domain(format!("the critical ε schedule needs t > 1, got {t}"));
        }
        t.ln() / t
    } else if df < 2.0 + r {
        1.0 / t
    } else {
        t.powf(-2.0 / (df - r))
    };
    Ok(eps)
}

/// Everything produced by one experiment run.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub theorem: Theorem,
    pub prediction: Prediction,
    pub fit: RateFit,
    /// Fourier-upper series of a consistency run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub secondary_fit: Option<RateFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope_gap: Option<f64>,
    /// Instances where both Fourier functionals were evaluated.
    pub ordering_checked: usize,
    /// Instances with `fourier_lower > fourier_upper`.
    pub ordering_violations: usize,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub records: Vec<Record>,
}

impl ExperimentOutput {
    pub fn passed(&self) -> bool {
        let main = self.fit.verdict != Verdict::Mismatch && self.ordering_violations == 0;
        match self.slope_gap {
            Some(g) => main && g <= CONSISTENCY_TOL,
            None => main,
        }
    }
}

/// Largest slope gap accepted between the exact and Fourier series.
pub const CONSISTENCY_TOL: f64 = 0.1;

/// Values computed on one instance, primary method first.
struct Instance {
    values: Vec<(Method, f64)>,
    ordering: Option<bool>,
}

fn check_mass(coeff0: num_complex::Complex64) -> Result<()> {
    if (coeff0.re - 1.0).abs() > 1e-12 || coeff0.im.abs() > 1e-12 {
        return Err(Error::Numerical(format!("empirical measure has mass {coeff0}")));
    }
    Ok(())
}

fn check_method(cfg: &ExperimentConfig, n_steps: usize) -> Result<()> {
    let bad = |m: String| Err(Error::Config(m));
    match cfg.method {
        Method::ExactCircle if cfg.d != 1 => bad(format!("exact_circle needs d = 1, got d = {}", cfg.d)),
        Method::ExactCircle if cfg.p < 1.0 => bad(format!("exact_circle needs p ≥ 1, got {}", cfg.p)),
        Method::Assignment => {
            if cfg.p < 1.0 {
                return bad(format!("assignment needs p ≥ 1, got {}", cfg.p));
            }
            let g = default_grid_per_axis(n_steps, cfg.d);
            let m = g.pow(cfg.d as u32);
            let units = num_integer_lcm(n_steps, m);
            if units as f64 * (n_steps as f64).powi(2) > GRID_WORK_LIMIT
                || units > crate::wasserstein::MAX_TRANSPORT_UNITS
            {
                return bad(format!(
                    "assignment against a {m}-point grid with {n_steps} samples is too large; use smaller t or a Fourier method"
                ));
            }
            Ok(())
        }
        Method::FourierUpper if cfg.d >= 3 && !(1.0..=2.0).contains(&cfg.p) => {
            bad(format!("fourier_upper in d ≥ 3 needs p ∈ [1, 2], got {}", cfg.p))
        }
        Method::FourierLower if cfg.d >= 3 => bad(format!("fourier_lower needs d ≤ 2, got d = {}", cfg.d)),
        Method::Sinkhorn => bad("sinkhorn compares two clouds and is not a rate estimator".into()),
        _ => Ok(()),
    }
}

fn num_integer_lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

fn estimate_instance(
    cfg: &ExperimentConfig,
    method: Method,
    samples: &[TorusPoint],
    t: f64,
    with_exact: bool,
) -> Result<Instance> {
    let n = samples.len();
    let weights = uniform_weights(n);
    let mut values = Vec::new();
    let mut ordering = None;
    let eps = || eps_schedule(t, cfg.d, cfg.hurst, cfg.bernstein.growth_index());
    match method {
        Method::ExactCircle => {
            let atoms: Vec<f64> = samples.iter().map(|x| x.coords()[0]).collect();
            values.push((method, circle_wp_exact(&atoms, &weights, cfg.p)?.value));
        }
        Method::Assignment => {
            let g = default_grid_per_axis(n, cfg.d);
            values.push((method, grid_wp(samples, cfg.p, g)?.value));
        }
        Method::FourierUpper | Method::FourierLower => {
            let eps = eps()?;
            if cfg.d >= 3 {
                values.push((
                    Method::FourierUpper,
                    fourier_upper_samples(samples, &weights, eps, cfg.p)?.value,
                ));
            } else {
                let m = empirical_fourier(samples, None, cutoff_for(eps)?)?;
                check_mass(m.mass())?;
                let upper = fourier_upper(&m, eps, cfg.p)?.value;
                let lower = fourier_lower(&m, eps, 1.0)?.value;
                ordering = Some(lower <= upper);
                if method == Method::FourierUpper {
                    values.push((Method::FourierUpper, upper));
                    values.push((Method::FourierLower, lower));
                } else {
                    values.push((Method::FourierLower, lower));
                    values.push((Method::FourierUpper, upper));
                }
            }
        }
        Method::Sinkhorn => return Err(Error::Config("sinkhorn is not a rate estimator".into())),
    }
    if with_exact {
        let atoms: Vec<f64> = samples.iter().map(|x| x.coords()[0]).collect();
        values.push((Method::ExactCircle, circle_wp_exact(&atoms, &weights, cfg.p)?.value));
    }
    Ok(Instance { values, ordering })
}

/// Run every `(t, replica)` task in parallel and collect results in task order.
fn run_tasks<T: Send>(cfg: &ExperimentConfig, f: impl Fn(usize, usize) -> Result<T> + Sync) -> Result<Vec<Vec<T>>> {
    let tasks: Vec<(usize, usize)> = (0..cfg.t_grid.len())
        .flat_map(|ti| (0..cfg.replicas).map(move |r| (ti, r)))
        .collect();
    let flat: Vec<T> = tasks.into_par_iter().map(|(ti, r)| f(ti, r)).collect::<Result<_>>()?;
    let mut it = flat.into_iter();
    Ok((0..cfg.t_grid.len())
        .map(|_| it.by_ref().take(cfg.replicas).collect())
        .collect())
}

fn series(t_grid: &[f64], values: &[Vec<f64>]) -> Result<Vec<RatePoint>> {
    t_grid
        .iter()
        .zip(values)
        .map(|(&t, v)| {
            let e = Estimate::from_samples(v)?;
            Ok(RatePoint {
                t,
                mean: e.estimate,
                std_error: e.std_error,
            })
        })
        .collect()
}

fn records_for(cfg: &ExperimentConfig, per_t: &[Vec<Instance>]) -> Vec<Record> {
    let mut out = Vec::new();
    for (ti, reps) in per_t.iter().enumerate() {
        for (r, inst) in reps.iter().enumerate() {
            for &(method, value) in &inst.values {
                out.push(Record {
                    scenario: cfg.scenario.tag().to_string(),
                    t: cfg.t_grid[ti],
                    replica: r,
                    method: method.as_str().to_string(),
                    p: cfg.p,
                    value,
                });
            }
        }
    }
    out
}

fn column(per_t: &[Vec<Instance>], method: Method) -> Vec<Vec<f64>> {
    per_t
        .iter()
        .map(|reps| {
            reps.iter()
                .map(|inst| inst.values.iter().find(|(m, _)| *m == method).map_or(f64::NAN, |v| v.1))
                .collect()
        })
        .collect()
}

fn ordering_counts(per_t: &[Vec<Instance>]) -> (usize, usize) {
    let flags = per_t.iter().flatten().filter_map(|i| i.ordering);
    flags.fold((0, 0), |(c, v), ok| (c + 1, v + usize::from(!ok)))
}

fn require(cfg: &ExperimentConfig, scenario: Scenario) -> Result<()> {
    cfg.validate()?;
    if cfg.scenario != scenario {
        return Err(Error::Config(format!(
            "expected scenario {}, got {}",
            scenario.tag(),
            cfg.scenario.tag()
        )));
    }
    if cfg.t_grid.len() < 4 {
        return Err(Error::Config(format!(
            "a rate fit needs at least 4 horizons, got {}",
            cfg.t_grid.len()
        )));
    }
    Ok(())
}

fn continuous_steps(cfg: &ExperimentConfig, t: f64) -> usize {
    ((16.0 * t).ceil() as usize).clamp(1, cfg.step_cap())
}

fn simulate_instances(
    cfg: &ExperimentConfig,
    method: Method,
    with_exact: bool,
    steps: impl Fn(f64) -> (f64, usize) + Sync,
) -> Result<Vec<Vec<Instance>>> {
    let sampler = FbmSampler::new(cfg.hurst)?;
    run_tasks(cfg, |ti, r| {
        let (horizon, n) = steps(cfg.t_grid[ti]);
        let mut rng = stream(cfg.seed, cfg.scenario.tag(), &[ti as u64, r as u64]);
        let samples = simulate_sfbm_samples_with(&cfg.bernstein, &sampler, cfg.d, horizon, n, &mut rng)?;
        estimate_instance(cfg, method, &samples, cfg.t_grid[ti], with_exact)
    })
}

fn finish(
    cfg: &ExperimentConfig,
    theorem: Theorem,
    prediction: Prediction,
    per_t: Vec<Vec<Instance>>,
    primary: Method,
) -> Result<ExperimentOutput> {
    let points = series(&cfg.t_grid, &column(&per_t, primary))?;
    let fit = fit_rate(points, &prediction, cfg.tolerance)?;
    let (ordering_checked, ordering_violations) = ordering_counts(&per_t);
    let mut notes = Vec::new();
    if let Some(n) = &prediction.note {
        notes.push(n.clone());
    }
    Ok(ExperimentOutput {
        config: cfg.clone(),
        theorem,
        prediction,
        fit,
        secondary_fit: None,
        slope_gap: None,
        ordering_checked,
        ordering_violations,
        notes,
        records: records_for(cfg, &per_t),
    })
}

/// Continuous-time rate experiment against the upper-bound exponent.
pub fn run_rate_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    require(cfg, Scenario::RateContinuous)?;
    let theorem = Theorem::UpperTH2;
    let prediction = predicted_exponent(theorem, cfg.d, cfg.hurst, cfg.bernstein.growth_index(), cfg.p, 0.0)?;
    let n_last = continuous_steps(cfg, *cfg.t_grid.last().expect("validated"));
    check_method(cfg, n_last)?;
    let per_t = simulate_instances(cfg, cfg.method, false, |t| (t, continuous_steps(cfg, t)))?;
    finish(cfg, theorem, prediction, per_t, cfg.method)
}

/// Number of steps `floor(t^{1+β})` of the discretized measure with `τ = t^{−β}`.
pub fn discrete_steps(t: f64, beta: f64) -> usize {
    (t.powf(1.0 + beta) * (1.0 + 1e-12)).floor() as usize
}

/// Rate experiment for `μ_{τ,t}` with `τ = t^{−β}`.
pub fn run_discrete_rate_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    require(cfg, Scenario::RateDiscrete)?;
    let beta = cfg.beta.expect("validated");
    let theorem = Theorem::DiscreteW1TU;
    let prediction = predicted_exponent(theorem, cfg.d, cfg.hurst, cfg.bernstein.growth_index(), cfg.p, beta)?;
    for &t in &cfg.t_grid {
        let n = discrete_steps(t, beta);
        if n == 0 {
            return Err(Error::Config(format!("t = {t} gives no time steps at β = {beta}")));
        }
        if n > cfg.step_cap() {
            return Err(Error::Config(format!(
                "t = {t} needs {n} steps at β = {beta}, above the cap {}; use a smaller t range",
                cfg.step_cap()
            )));
        }
    }
    check_method(cfg, discrete_steps(*cfg.t_grid.last().expect("validated"), beta))?;
    let per_t = simulate_instances(cfg, cfg.method, false, |t| {
        let n = discrete_steps(t, beta);
        (n as f64 * t.powf(-beta), n)
    })?;
    finish(cfg, theorem, prediction, per_t, cfg.method)
}

/// `W_p^p` in `R^d` between the two clouds of independent sBMs driven by `b1` and `b2`.
#[allow(clippy::too_many_arguments)]
pub fn two_process_distance<R: rand::Rng + ?Sized>(
    b1: &BernsteinFunction,
    b2: &BernsteinFunction,
    d: usize,
    t: f64,
    n_steps: usize,
    p: f64,
    rng1: &mut R,
    rng2: &mut R,
) -> Result<f64> {
    let sampler = FbmSampler::new(0.5)?;
    let x = simulate_sfbm_raw(b1, &sampler, d, t, n_steps, rng1)?;
    let y = simulate_sfbm_raw(b2, &sampler, d, t, n_steps, rng2)?;
    let w = discrete_wp(&x, &y, p, Ground::Euclidean)?.value;
    Ok(w.powf(p.max(1.0)))
}

/// Two independent sBMs in `R^d`; fits the slope of `E[W_p^p]`.
pub fn run_two_process_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    require(cfg, Scenario::TwoProcess)?;
    let b2 = cfg.bernstein2.expect("validated");
    if cfg.hurst != 0.5 {
        return Err(Error::Config(format!("two_process needs H = 1/2, got {}", cfg.hurst)));
    }
    if cfg.method != Method::Assignment {
        return Err(Error::Config("two_process uses the assignment method".into()));
    }
    let (a1, a2) = (cfg.bernstein.growth_index(), b2.growth_index());
    if a1 > a2 {
        return Err(Error::Config(format!("two_process needs α₁ ≤ α₂, got {a1} > {a2}")));
    }
    let theorem = Theorem::TwoProcessCor;
    let prediction = predicted_exponent(theorem, cfg.d, cfg.hurst, a1, cfg.p, 0.0)?;
    let per_t = run_tasks(cfg, |ti, r| {
        let t = cfg.t_grid[ti];
        let n = continuous_steps(cfg, t);
        let tag = cfg.scenario.tag();
        let mut rng1 = stream(cfg.seed, tag, &[ti as u64, r as u64, 0]);
        let mut rng2 = stream(cfg.seed, tag, &[ti as u64, r as u64, 1]);
        let v = two_process_distance(&cfg.bernstein, &b2, cfg.d, t, n, cfg.p, &mut rng1, &mut rng2)?;
        Ok(Instance {
            values: vec![(Method::Assignment, v)],
            ordering: None,
        })
    })?;
    finish(cfg, theorem, prediction, per_t, Method::Assignment)
}

/// Exact and Fourier-upper estimates on the same `d = 1` clouds; their
/// slopes must agree within [`CONSISTENCY_TOL`].
pub fn run_ot_compare(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    if cfg.d != 1 {
        return Err(Error::Config(format!("ot-compare needs d = 1, got d = {}", cfg.d)));
    }
    if cfg.t_grid.len() < 4 {
        return Err(Error::Config("a rate fit needs at least 4 horizons".into()));
    }
    let mut cfg = cfg.clone();
    cfg.scenario = Scenario::RateContinuous;
    cfg.method = Method::FourierUpper;
    let theorem = Theorem::UpperTH2;
    let prediction = predicted_exponent(theorem, 1, cfg.hurst, cfg.bernstein.growth_index(), cfg.p, 0.0)?;
    let per_t = simulate_instances(&cfg, Method::FourierUpper, true, |t| (t, continuous_steps(&cfg, t)))?;
    let fourier = fit_rate(
        series(&cfg.t_grid, &column(&per_t, Method::FourierUpper))?,
        &prediction,
        cfg.tolerance,
    )?;
    let mut out = finish(&cfg, theorem, prediction, per_t, Method::ExactCircle)?;
    out.slope_gap = Some((out.fit.slope - fourier.slope).abs());
    out.secondary_fit = Some(fourier);
    Ok(out)
}

/// Dispatch on the configured scenario.
pub fn run_config(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    match cfg.scenario {
        Scenario::RateContinuous => run_rate_experiment(cfg),
        Scenario::RateDiscrete => run_discrete_rate_experiment(cfg),
        Scenario::TwoProcess => run_two_process_experiment(cfg),
        s => Err(Error::Config(format!(
            "scenario {} is a verification check; run it with `tor verify`",
            s.tag()
        ))),
    }
}
