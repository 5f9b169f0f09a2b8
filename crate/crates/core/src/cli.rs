//! The `ozrisk` command line.
//!
//! Exit codes: 0 success, 1 configuration or argument error, 2 runtime
//! error.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_config, ConfigError, RunConfig};
use crate::engine::{run_risk, write_person_records, RunOptions, RunSummary};
use crate::oracle::zero_ozone_risk;
use crate::population::{OzoneSeries, Season, SyntheticOzone};
use crate::sweep::{default_grid, emit_chart, emit_table, run_sweep, SweepSpec, SweptTerms};
use crate::variability::{parse_bound, Redraw};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_RUNTIME: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "ozrisk", version, about = "Population ozone lung-function risk with bounded variability")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "OZRISK_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one season for a population and write per-person records.
    Simulate(SimulateArgs),
    /// Run a bound sweep and write a table (and a chart for single terms).
    Sweep(SweepArgs),
    /// Closed-form zero-ozone risk for grids of sigma, bound and draws.
    Oracle(OracleArgs),
    /// Write an hourly ozone CSV for a season.
    GenScenario(GenScenarioArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `master_seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `[output] dir`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// u, nu1, nu2 or joint (nu1 x nu2).
    #[arg(long, default_value = "nu1")]
    pub term: String,
    /// Comma-separated bounds in sd (default 0,0.5,...,4).
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', default_value = "daily,hourly")]
    pub frequencies: Vec<String>,
    /// Bound on the terms not swept.
    #[arg(long, default_value = "2")]
    pub fixed_bound: String,
    /// Overrides the population size.
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Comma-separated sd of the additive term.
    #[arg(long, value_delimiter = ',', default_value = "4.13")]
    pub sigma: Vec<f64>,
    /// Comma-separated bounds in sd; `inf` for none.
    #[arg(long, value_delimiter = ',', default_value = "inf")]
    pub bound: Vec<String>,
    /// Decrement threshold, percent.
    #[arg(long, default_value_t = 10.0)]
    pub threshold: f64,
    /// Comma-separated numbers of independent draws.
    #[arg(long, value_delimiter = ',', default_value = "275")]
    pub draws: Vec<u64>,
    /// Also write `oracle.csv` here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["zero_ozone", "constant", "synthetic"])))]
pub struct GenScenarioArgs {
    #[arg(long)]
    pub zero_ozone: bool,
    /// Constant concentration, ppb.
    #[arg(long)]
    pub constant: Option<f64>,
    /// Diurnal synthetic series.
    #[arg(long)]
    pub synthetic: bool,
    /// Synthetic afternoon peak, ppb.
    #[arg(long)]
    pub peak_ppb: Option<f64>,
    /// START:END, inclusive.
    #[arg(long, default_value = "2017-03-01:2017-11-30")]
    pub season: Season,
    #[arg(long, default_value = "ozone.csv")]
    pub out: PathBuf,
    #[arg(long, default_value_t = crate::config::DEFAULT_MASTER_SEED)]
    pub seed: u64,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn config(message: impl ToString) -> Self {
        Self { code: EXIT_CONFIG, message: message.to_string() }
    }

    fn runtime(message: impl ToString) -> Self {
        Self { code: EXIT_RUNTIME, message: message.to_string() }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Read { .. } | ConfigError::Parse(_) | ConfigError::Invalid { .. } => Self::config(e),
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK });
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let options = RunOptions { threads: cli.threads };
    match &cli.command {
        Command::Simulate(a) => simulate(a, &options),
        Command::Sweep(a) => sweep(a, &options),
        Command::Oracle(a) => oracle(a),
        Command::GenScenario(a) => gen_scenario(a),
    }
}

fn load(path: &Path, seed: Option<u64>) -> Result<RunConfig, CliError> {
    let mut config = parse_config(path)?;
    if let Some(seed) = seed {
        config.master_seed = seed;
    }
    Ok(config)
}

fn out_dir(config: &RunConfig, flag: &Option<PathBuf>) -> Result<PathBuf, CliError> {
    let dir = match flag {
        Some(d) => d.clone(),
        None if config.output.dir.is_absolute() => config.output.dir.clone(),
        None => config.base_dir.join(&config.output.dir),
    };
    std::fs::create_dir_all(&dir).map_err(|e| CliError::runtime(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))
}

fn simulate(args: &SimulateArgs, options: &RunOptions) -> Result<(), CliError> {
    let config = load(&args.config, args.seed)?;
    let inputs = config.to_inputs()?;
    let dir = out_dir(&config, &args.out_dir)?;
    let run = run_risk(&inputs, &config.risk, options).map_err(CliError::runtime)?;

    let persons = dir.join("persons.jsonl");
    let file = std::fs::File::create(&persons)
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", persons.display())))?;
    write_person_records(&run.records, std::io::BufWriter::new(file)).map_err(CliError::runtime)?;
    let summary = RunSummary::new(&inputs, &config.risk, &run);
    write_file(&dir.join("summary.json"), &(summary.to_json() + "\n"))?;
    write_file(&dir.join("config.echo.toml"), &config.to_toml())?;

    println!(
        "{} {} bounds U/nu1/nu2 = {}/{}/{} sd{}",
        summary.variant,
        summary.redraw,
        summary.bound_u_sd,
        summary.bound_nu1_sd,
        summary.bound_nu2_sd,
        if summary.beta3_zero { ", zero ozone" } else { "" }
    );
    println!(
        "risk: {:.2}% ({} of {}, se {:.2}) with dFEV1 >= {}% on >= {} day(s)",
        summary.risk_pct, summary.n_exceeding, summary.n_total, summary.standard_error_pct, summary.threshold, summary.min_days
    );
    if summary.negative_amplitude_persons > 0 {
        println!("note: {} persons have a negative response amplitude", summary.negative_amplitude_persons);
    }
    println!("wrote {}", dir.display());
    Ok(())
}

fn sweep(args: &SweepArgs, options: &RunOptions) -> Result<(), CliError> {
    let mut config = load(&args.config, args.seed)?;
    if let Some(n) = args.population {
        config.population.size = n;
        config.validate()?;
    }
    let terms: SweptTerms = args.term.parse().map_err(CliError::config)?;
    let frequencies = args
        .frequencies
        .iter()
        .map(|f| f.parse::<Redraw>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::config)?;
    let mut spec = SweepSpec::new(config.to_inputs()?, terms);
    spec.query = config.risk;
    spec.grid = args.grid.clone().unwrap_or_else(default_grid);
    spec.frequencies = frequencies;
    spec.fixed_bound = parse_bound(&args.fixed_bound).map_err(CliError::config)?;
    spec.validate().map_err(CliError::config)?;

    let dir = out_dir(&config, &args.out_dir)?;
    let result = run_sweep(&spec, options).map_err(CliError::runtime)?;
    let stem = format!("sweep_{}", terms.label().replace('+', "_"));
    let table = dir.join(format!("{stem}.csv"));
    emit_table(&result, &table).map_err(CliError::runtime)?;
    if terms != SweptTerms::Joint {
        emit_chart(&result, dir.join(format!("{stem}.svg"))).map_err(CliError::runtime)?;
    }
    write_file(&dir.join("config.echo.toml"), &config.to_toml())?;

    println!("{:>10} {:>8} {:>8} {:>8} {:>9}", "frequency", "u", "nu1", "nu2", "risk %");
    for r in &result.rows {
        println!(
            "{:>10} {:>8} {:>8} {:>8} {:>9.2}",
            r.frequency.label(),
            r.bound_u,
            r.bound_nu1,
            r.bound_nu2,
            r.risk_pct
        );
    }
    println!("wrote {}", table.display());
    if !result.failures.is_empty() {
        for f in &result.failures {
            eprintln!("cell {:?} {} failed: {}", f.bounds, f.frequency.label(), f.message);
        }
        return Err(CliError::runtime(format!("{} sweep cells failed", result.failures.len())));
    }
    Ok(())
}

fn oracle(args: &OracleArgs) -> Result<(), CliError> {
    let bounds = args
        .bound
        .iter()
        .map(|b| parse_bound(b))
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::config)?;
    if args.sigma.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(CliError::config("sigma must be > 0"));
    }
    if bounds.iter().any(|b| b.is_nan() || *b < 0.0) {
        return Err(CliError::config("bounds must be >= 0"));
    }
    if !args.threshold.is_finite() {
        return Err(CliError::config("threshold must be finite"));
    }

    let mut csv = String::from("sigma,bound_sd,threshold,draws,x_sd,risk_pct\n");
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let _ = writeln!(out, "{:>8} {:>8} {:>10} {:>8} {:>8} {:>10}", "sigma", "bound", "threshold", "draws", "x (sd)", "risk %");
    for &sigma in &args.sigma {
        for &b in &bounds {
            for &t in &args.draws {
                let x = args.threshold / sigma;
                let risk = zero_ozone_risk(args.threshold, sigma, b, t);
                let bound = crate::sweep::fmt_bound(b);
                let _ = writeln!(out, "{sigma:>8} {bound:>8} {:>10} {t:>8} {x:>8.4} {risk:>10.2}", args.threshold);
                csv.push_str(&format!("{sigma},{bound},{},{t},{x:.6},{risk:.6}\n", args.threshold));
            }
        }
    }
    if let Some(dir) = &args.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::runtime(format!("cannot create {}: {e}", dir.display())))?;
        write_file(&dir.join("oracle.csv"), &csv)?;
    }
    Ok(())
}

fn gen_scenario(args: &GenScenarioArgs) -> Result<(), CliError> {
    let season = args.season;
    let series = if args.zero_ozone {
        OzoneSeries::zeros(season)
    } else if let Some(c) = args.constant {
        OzoneSeries::constant(season, c).map_err(CliError::config)?
    } else {
        let mut params = SyntheticOzone::default();
        if let Some(p) = args.peak_ppb {
            params.peak_ppb = p;
        }
        OzoneSeries::synthetic(season, &params, args.seed).map_err(CliError::config)?
    };
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", parent.display())))?;
    }
    let file = std::fs::File::create(&args.out)
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", args.out.display())))?;
    series.write_csv(std::io::BufWriter::new(file)).map_err(CliError::runtime)?;
    let ppb = series.hourly_ppb();
    let max = ppb.iter().copied().fold(0.0, f64::max);
    let mean = ppb.iter().sum::<f64>() / ppb.len() as f64;
    println!(
        "wrote {} hourly values ({} to {}), mean {mean:.1} ppb, max {max:.1} ppb, to {}",
        ppb.len(),
        season.start(),
        season.end(),
        args.out.display()
    );
    Ok(())
}
