//! `ginibrenet`: batch experiments on β-Ginibre interference.

mod config;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ginibrenet_core::estimation::{
    estimate_interference_tail_with, slope_report, write_estimates_csv, write_slope_report_csv, EstimateRecord,
    EstimatorOptions,
};
use ginibrenet_core::rates::{poisson_comparison, poisson_rate, poisson_speed, rate, speed, tail_asymptote};
use ginibrenet_core::sampling::{
    sample_beta_ginibre, sample_ginibre_disk, sample_palm_beta_ginibre, sample_poisson,
};
use ginibrenet_core::validation::{run_suite, Budget, SUITE_SEED};
use ginibrenet_core::{Error as CoreError, LdpRegime, RngStream, TailEstimate};

use config::{fading_from, ExperimentConfig, CONFIG_HELP};

#[derive(Debug, Parser)]
#[command(name = "ginibrenet", version, about = "Interference experiments on beta-Ginibre wireless networks")]
struct Cli {
    /// Worker threads; results do not depend on this value.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample one point pattern and write it as CSV.
    Sample(SampleArgs),
    /// Run the configured estimator over a grid of levels.
    #[command(after_long_help = CONFIG_HELP)]
    Estimate(EstimateArgs),
    /// Print closed-form rates, speeds and tail asymptotes.
    Rates(RatesArgs),
    /// Run the fixed-seed validation suite.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProcessArg {
    Ginibre,
    BetaGinibre,
    Palm,
    Poisson,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long, value_enum)]
    process: ProcessArg,
    /// Thinning parameter in (0, 1]; ignored for ginibre and poisson.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Window radius.
    #[arg(long, default_value_t = 10.0)]
    radius: f64,
    /// Intensity of the poisson process.
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_PI)]
    intensity: f64,
    #[arg(long, env = "GINIBRENET_SEED", default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Experiment configuration file.
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RatesArgs {
    /// bounded | weibull_super | exponential | weibull_sub | pareto
    #[arg(long)]
    fading: String,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Essential supremum of bounded fading.
    #[arg(long)]
    sup: Option<f64>,
    /// Attenuation cutoff radius.
    #[arg(long = "R", alias = "r", default_value_t = 1.0)]
    r: f64,
    #[arg(long, default_value_t = 4.0)]
    alpha: f64,
    /// Comma-separated levels.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0, 5.0, 10.0])]
    x_grid: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Adds the Poisson-network constants (bounded and weibull_super only).
    #[arg(long)]
    compare_poisson: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Reduced replication budget.
    #[arg(long)]
    quick: bool,
    #[arg(long, default_value_t = SUITE_SEED)]
    seed: u64,
}

/// Failure of a command, mapped to an exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(format!("i/o error: {e}"))
    }
}

fn runtime(e: CoreError) -> Failure {
    Failure::Runtime(e.to_string())
}

fn usage(e: CoreError) -> Failure {
    Failure::Usage(e.to_string())
}

fn open_out(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_sample(a: &SampleArgs) -> Result<(), Failure> {
    let mut rng = RngStream::new(a.seed, 0);
    let pattern = match a.process {
        ProcessArg::Ginibre => sample_ginibre_disk(a.radius, &mut rng),
        ProcessArg::BetaGinibre => sample_beta_ginibre(a.beta, a.radius, &mut rng),
        ProcessArg::Palm => sample_palm_beta_ginibre(a.beta, a.radius, &mut rng),
        ProcessArg::Poisson => sample_poisson(a.radius, a.intensity, &mut rng),
    };
    let pattern = pattern.map_err(|e| match e {
        CoreError::SamplerStall { .. } => runtime(e),
        other => usage(other),
    })?;
    let mut out = open_out(a.out.as_deref())?;
    pattern.write_csv(&mut out)?;
    out.flush()?;
    eprintln!("sampled {} points", pattern.len());
    Ok(())
}

fn write_estimates(dir: &Path, rows: &[EstimateRecord]) -> io::Result<()> {
    let mut f = BufWriter::new(File::create(dir.join("estimates.csv"))?);
    write_estimates_csv(rows, &mut f)?;
    f.flush()
}

fn cmd_estimate(a: &EstimateArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&a.config)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", a.config.display())))?;
    let cfg = ExperimentConfig::parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", a.config.display())))?;
    let seed = a
        .seed
        .or(cfg.seed)
        .or_else(|| std::env::var("GINIBRENET_SEED").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(0);
    let dir = a.out_dir.clone().unwrap_or_else(|| cfg.output_dir.clone());
    fs::create_dir_all(&dir)?;

    let root = RngStream::new(seed, 0);
    let options = EstimatorOptions { tilt: cfg.tilt, split: cfg.split };
    let mut rows = Vec::new();
    let mut estimates: Vec<(f64, TailEstimate)> = Vec::new();
    for (k, g) in cfg.grid.iter().enumerate() {
        match estimate_interference_tail_with(&cfg.model, g.level, cfg.n_reps, cfg.estimator, &options, &root.substream(k as u64)) {
            Ok(e) => {
                println!("x={} eps={} p={:.6e} stderr={:.3e}", g.level * g.eps, g.eps, e.probability, e.stderr);
                rows.push(EstimateRecord::new(g.level * g.eps, g.eps, &e, seed));
                estimates.push((g.level, e));
            }
            Err(e) => {
                write_estimates(&dir, &rows)?;
                return Err(Failure::Runtime(format!("estimation failed at grid point {}: {e}", k + 1)));
            }
        }
    }
    write_estimates(&dir, &rows)?;

    if let Some(regime) = &cfg.regime {
        estimates.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (levels, ests): (Vec<f64>, Vec<TailEstimate>) = estimates.into_iter().unzip();
        let report = slope_report(&cfg.model, regime, &levels, &ests).map_err(runtime)?;
        let mut f = BufWriter::new(File::create(dir.join("slope_report.csv"))?);
        write_slope_report_csv(&report, &mut f)?;
        f.flush()?;
        println!(
            "fitted_slope={:.6} target_slope={:.6} relative_error={:.4}",
            report.fitted_slope, report.target_slope, report.relative_error
        );
    }
    Ok(())
}

fn cmd_rates(a: &RatesArgs) -> Result<(), Failure> {
    let spec = fading_from(&a.fading, a.c, a.gamma, a.sup, None, None).map_err(Failure::Usage)?;
    let regime = LdpRegime::from_fading(spec, a.r, a.alpha).map_err(usage)?;
    let poisson = if a.compare_poisson { Some(poisson_comparison(&regime).map_err(usage)?) } else { None };
    let sp = speed(&regime, a.eps).map_err(usage)?;
    let mut out = open_out(a.out.as_deref())?;
    writeln!(out, "# regime={} target_slope={}", regime.kind().as_str(), regime.target_slope())?;
    if let Some(c) = poisson {
        writeln!(out, "# poisson_constant={c}")?;
        writeln!(out, "x,rate,speed,asymptote,poisson_rate,poisson_speed")?;
    } else {
        writeln!(out, "x,rate,speed,asymptote")?;
    }
    for &x in &a.x_grid {
        let i = rate(&regime, x).map_err(usage)?;
        let t = tail_asymptote(&regime, x).map_err(usage)?;
        if poisson.is_some() {
            let pr = poisson_rate(&regime, x).map_err(usage)?;
            let ps = poisson_speed(&regime, a.eps).map_err(usage)?;
            writeln!(out, "{x},{i},{sp},{t},{pr},{ps}")?;
        } else {
            writeln!(out, "{x},{i},{sp},{t}")?;
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_validate(a: &ValidateArgs) -> Result<(), Failure> {
    let budget = if a.quick { Budget::quick() } else { Budget::full() };
    let results = run_suite(&budget, a.seed, |r| println!("{}", r.line()));
    let failed: Vec<u32> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    let total: f64 = results.iter().map(|r| r.elapsed.as_secs_f64()).sum();
    println!("{} of {} checks passed in {total:.1}s", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Runtime(format!("failed checks: {failed:?}")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Sample(a) => cmd_sample(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Rates(a) => cmd_rates(a),
        Command::Validate(a) => cmd_validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
