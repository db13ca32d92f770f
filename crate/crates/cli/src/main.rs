//! `tor`: rate experiments and numeric checks for subordinated fBM on the torus.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sfbm::harness::{
    run_discrete_rate_experiment, run_ot_compare, run_rate_experiment, run_two_process_experiment, write_outputs,
    ExperimentConfig, ExperimentOutput,
};
use sfbm::verification::{
    convexity_check, npoint_lower_check, verify_discrete_second_moment, verify_mixed_moment, verify_sdu,
    verify_spectral_second_moment, CheckReport,
};
use sfbm::BernsteinFunction;

#[derive(Parser)]
#[command(
    name = "tor",
    version,
    about = "Occupation-measure rates of subordinated fBM on the flat torus"
)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Root seed; overrides the config and TOR_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides `out_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write `report.json` into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Continuous-time rate experiment.
    Rates(RunArgs),
    /// Rate experiment for the time-discretized measure.
    DiscreteRates(RunArgs),
    /// Distance between two independent sBM clouds in R^d.
    TwoProcess(RunArgs),
    /// Compare exact and Fourier-upper slopes on d = 1 clouds.
    OtCompare(RunArgs),
    /// Numeric checks of the auxiliary estimates.
    #[command(subcommand)]
    Verify(Verify),
}

#[derive(Subcommand)]
enum Verify {
    /// Stretched-exponential moments of the subordinator.
    Sdu {
        /// identity, stable:α, tempered:α or drift:b,α
        #[arg(long, default_value = "stable:0.5")]
        bernstein: String,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 0.1)]
        lambda: f64,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64")]
        t_grid: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        replicas: usize,
        #[command(flatten)]
        common: CheckArgs,
    },
    /// Second moment of a Fourier coefficient of the occupation measure.
    Spectrum {
        #[arg(long, default_value = "identity")]
        bernstein: String,
        /// Lattice vector, comma separated; its length sets d.
        #[arg(long, value_delimiter = ',', default_value = "1", allow_hyphen_values = true)]
        xi: Vec<i64>,
        #[arg(long, value_delimiter = ',', default_value = "64,128,256,512,1024,2048,4096")]
        t_grid: Vec<f64>,
        #[arg(long, default_value_t = 160)]
        replicas: usize,
        #[arg(long)]
        path_dt: Option<f64>,
        #[command(flatten)]
        common: CheckArgs,
    },
    /// Second moment for the time-discretized measure.
    DiscreteSpectrum {
        #[arg(long, default_value = "identity")]
        bernstein: String,
        #[arg(long, default_value_t = 0.5)]
        hurst: f64,
        #[arg(long, value_delimiter = ',', default_value = "1", allow_hyphen_values = true)]
        xi: Vec<i64>,
        #[arg(long, default_value_t = 0.25)]
        tau: f64,
        #[arg(long, default_value_t = 64.0)]
        t: f64,
        #[arg(long, default_value_t = 20_000)]
        replicas: usize,
        #[command(flatten)]
        common: CheckArgs,
    },
    /// Mixed moments of Fourier coefficients with frequencies summing to zero.
    Mixed {
        #[arg(long, default_value = "identity")]
        bernstein: String,
        /// Frequencies separated by ';', components by ','.
        #[arg(long, default_value = "1;-1;2;-2", allow_hyphen_values = true)]
        xi: String,
        #[arg(long, default_value_t = 256.0)]
        t: f64,
        #[arg(long, default_value_t = 200)]
        replicas: usize,
        #[arg(long)]
        path_dt: Option<f64>,
        #[command(flatten)]
        common: CheckArgs,
    },
    /// Slope of W_p for the best N-point grids.
    Npoint {
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[command(flatten)]
        common: CheckArgs,
    },
    /// Monotonicity and convexity of the auxiliary function g.
    Convexity {
        #[arg(long, default_value_t = 2.0)]
        delta: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 1000)]
        grid_n: usize,
        #[command(flatten)]
        common: CheckArgs,
    },
}

fn parse_bernstein(s: &str) -> Result<BernsteinFunction> {
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    let nums: Vec<f64> = if rest.is_empty() {
        Vec::new()
    } else {
        rest.split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .with_context(|| format!("bad parameters in {s:?}"))?
    };
    Ok(match (kind, nums.as_slice()) {
        ("identity", []) => BernsteinFunction::identity(),
        ("stable", [a]) => BernsteinFunction::stable(*a)?,
        ("tempered", [a]) => BernsteinFunction::tempered_stable(*a)?,
        ("drift", [b, a]) => BernsteinFunction::drift_plus_stable(*b, *a)?,
        _ => bail!("unknown Bernstein function {s:?}; use identity, stable:α, tempered:α or drift:b,α"),
    })
}

fn parse_frequencies(s: &str) -> Result<Vec<Vec<i64>>> {
    s.split(';')
        .map(|v| {
            v.split(',')
                .map(|k| k.trim().parse::<i64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .with_context(|| format!("bad frequency {v:?}"))
        })
        .collect()
}

fn load(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg =
        ExperimentConfig::from_path(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    cfg.apply_env_seed()?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    Ok(cfg)
}

fn report_run(out: &ExperimentOutput) -> Result<bool> {
    write_outputs(out, &out.config.out_dir)?;
    let fit = &out.fit;
    println!(
        "slope {:.4} ± {:.4}, predicted {:.4}{}, verdict {:?}",
        fit.slope,
        fit.slope_stderr,
        fit.predicted,
        if fit.log_regime { " (log regime)" } else { "" },
        fit.verdict
    );
    if let (Some(gap), Some(fourier)) = (out.slope_gap, &out.secondary_fit) {
        println!("fourier_upper slope {:.4}, gap {gap:.4}", fourier.slope);
    }
    if out.ordering_checked > 0 {
        println!(
            "ordering violations: {} of {}",
            out.ordering_violations, out.ordering_checked
        );
    }
    for note in &out.notes {
        println!("note: {note}");
    }
    println!("outputs written to {}", out.config.out_dir.display());
    Ok(out.passed())
}

fn report_check(r: &CheckReport, common: &CheckArgs) -> Result<bool> {
    let json = r.to_json()?;
    println!("{json}");
    if let Some(dir) = &common.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), json + "\n")?;
    }
    Ok(r.pass)
}

fn verify(v: Verify) -> Result<bool> {
    match v {
        Verify::Sdu {
            bernstein,
            delta,
            lambda,
            t_grid,
            replicas,
            common,
        } => {
            let b = parse_bernstein(&bernstein)?;
            report_check(&verify_sdu(&b, delta, lambda, &t_grid, replicas, common.seed)?, &common)
        }
        Verify::Spectrum {
            bernstein,
            xi,
            t_grid,
            replicas,
            path_dt,
            common,
        } => {
            let b = parse_bernstein(&bernstein)?;
            let r = verify_spectral_second_moment(&b, xi.len(), &xi, &t_grid, replicas, path_dt, common.seed)?;
            report_check(&r, &common)
        }
        Verify::DiscreteSpectrum {
            bernstein,
            hurst,
            xi,
            tau,
            t,
            replicas,
            common,
        } => {
            let b = parse_bernstein(&bernstein)?;
            let r = verify_discrete_second_moment(&b, hurst, xi.len(), &xi, tau, t, replicas, common.seed)?;
            report_check(&r, &common)
        }
        Verify::Mixed {
            bernstein,
            xi,
            t,
            replicas,
            path_dt,
            common,
        } => {
            let b = parse_bernstein(&bernstein)?;
            let list = parse_frequencies(&xi)?;
            let d = list.first().map_or(0, Vec::len);
            report_check(
                &verify_mixed_moment(&b, d, &list, t, replicas, path_dt, common.seed)?,
                &common,
            )
        }
        Verify::Npoint { d, n, p, common } => report_check(&npoint_lower_check(d, &n, p)?, &common),
        Verify::Convexity {
            delta,
            alpha,
            grid_n,
            common,
        } => report_check(&convexity_check(delta, alpha, grid_n)?, &common),
    }
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Rates(a) => report_run(&run_rate_experiment(&load(&a)?)?),
        Command::DiscreteRates(a) => report_run(&run_discrete_rate_experiment(&load(&a)?)?),
        Command::TwoProcess(a) => report_run(&run_two_process_experiment(&load(&a)?)?),
        Command::OtCompare(a) => report_run(&run_ot_compare(&load(&a)?)?),
        Command::Verify(v) => verify(v),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
