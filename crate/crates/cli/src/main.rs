//! Command-line runner for disordered quantum walk experiments.
//!
//! Subcommands:
//! - `simulate`: run the ensembles and emit distribution/variance CSV data
//! - `reproduce-table`: fit both exponents per disorder level into a table
//! - `fit`: refit emitted distribution data
//! - `theory`: evaluate the stretched-exponential reference quantities
//!
//! Exit codes: 0 on success, 2 for configuration errors, 1 for runtime
//! failures.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use subwalk::config::{ConfigError, Mode, Overrides, RunConfig};
use subwalk::disorder::ResampleRule;
use subwalk::fit::{
    estimate_b_from_moments, fit_spatial_profile, fit_spatial_profile_pinned,
    fit_variance_power_law,
};
use subwalk::report::{emit_distribution_data, parse_distribution_csv, reproduce_table};
use subwalk::theory::{b_from_phi, f_of_b, generator_moments, TheoryProfile};

#[derive(Parser)]
#[command(
    name = "subwalk",
    version,
    about = "p-diluted disordered quantum walk simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run ensembles and write distribution, log-profile, and variance CSVs.
    Simulate(RunArgs),
    /// Run ensembles and fit (b, delta, 2d, c^2) per disorder level.
    #[command(name = "reproduce-table")]
    ReproduceTable(RunArgs),
    /// Refit a distribution CSV produced by `simulate`.
    Fit(FitArgs),
    /// Evaluate theory quantities: f(b), its inverse, moments.
    Theory(TheoryArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Disorder levels, comma separated (e.g. 0.0,0.1,0.2).
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    /// Coin maps per disorder level.
    #[arg(long)]
    maps: Option<usize>,
    /// Walk length in steps.
    #[arg(long)]
    steps: Option<usize>,
    /// Master seed for all map generation.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Ensemble-size preset; an explicit --maps wins.
    #[arg(long)]
    mode: Option<Mode>,
    /// Probability cutoff for log-profile fits.
    #[arg(long)]
    min_prob: Option<f64>,
    /// Spatial-fit window |x| <= W; defaults to 70% of the walk length.
    #[arg(long)]
    fit_window: Option<usize>,
    /// How diluted cells are redrawn: over all coins or excluding the static one.
    #[arg(long)]
    resample: Option<CliResample>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum CliResample {
    All,
    ExcludeStatic,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let overrides = Overrides {
            p_values: self.p.clone(),
            steps: self.steps,
            maps: self.maps,
            mode: self.mode,
            master_seed: self.seed,
            output_dir: self.out.clone(),
            min_prob: self.min_prob,
            fit_window: self.fit_window,
            resample: self.resample.map(|r| match r {
                CliResample::All => ResampleRule::All,
                CliResample::ExcludeStatic => ResampleRule::ExcludeStatic,
            }),
        };
        RunConfig::resolve(self.config.as_deref(), &overrides)
    }
}

#[derive(Args)]
struct FitArgs {
    /// Distribution CSV (columns t,x,P_mean) to refit.
    #[arg(long)]
    input: PathBuf,
    /// Step to fit the spatial profile at; defaults to the largest present.
    #[arg(long)]
    t: Option<usize>,
    /// Probability cutoff for the log-profile fit.
    #[arg(long, default_value_t = subwalk::fit::DEFAULT_MIN_PROB)]
    min_prob: f64,
    /// Also run the variance-pinned fit restricted to |x| <= W.
    #[arg(long)]
    fit_window: Option<usize>,
}

#[derive(Args)]
struct TheoryArgs {
    /// Evaluate f(b) and the profile scale a.
    #[arg(long)]
    b: Option<f64>,
    /// Invert f: report the b with f(b) = phi.
    #[arg(long)]
    phi: Option<f64>,
    /// Even moment order 2n to evaluate (needs --b and --sigma).
    #[arg(long)]
    moment: Option<u32>,
    /// Profile standard deviation for moment evaluation.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => run_simulate(&args),
        Command::ReproduceTable(args) => run_table(&args),
        Command::Fit(args) => run_fit(&args),
        Command::Theory(args) => run_theory(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.is::<ConfigError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run_simulate(args: &RunArgs) -> anyhow::Result<()> {
    let config = args.resolve()?;
    let artifacts = emit_distribution_data(&config)?;
    println!(
        "wrote {} distribution files and {} to {}",
        artifacts.distribution_files.len(),
        artifacts.variance_file.display(),
        config.output_dir.display()
    );
    Ok(())
}

fn run_table(args: &RunArgs) -> anyhow::Result<()> {
    let config = args.resolve()?;
    let artifact = reproduce_table(&config)?;
    print!(
        "{}",
        std::fs::read_to_string(&artifact.text_path)
            .with_context(|| format!("reading {}", artifact.text_path.display()))?
    );
    println!("table written to {}", artifact.csv_path.display());
    Ok(())
}

fn run_fit(args: &FitArgs) -> anyhow::Result<()> {
    let recorded = parse_distribution_csv(&args.input)?;
    let t_fit = match args.t {
        Some(t) => t,
        None => recorded.iter().map(|(t, _)| *t).max().unwrap(),
    };
    let dist = recorded
        .iter()
        .find(|(t, _)| *t == t_fit)
        .map(|(_, d)| d)
        .with_context(|| format!("step {t_fit} not present in {}", args.input.display()))?;

    let spatial = fit_spatial_profile(dist, args.min_prob)?;
    println!(
        "spatial fit at t={t_fit}: b = {:.4} ± {:.4}, delta = {:.5} ± {:.5}, intercept = {:.4}, rms = {:.3e}, points = {}",
        spatial.b,
        spatial.stderr_b,
        spatial.delta,
        spatial.stderr_delta,
        spatial.intercept,
        spatial.residual_rms,
        spatial.points_used
    );

    if let Some(w) = args.fit_window {
        let windowed = dist.restricted(w as i64)?;
        let pinned = fit_spatial_profile_pinned(
            &windowed,
            args.min_prob,
            subwalk::fit::DEFAULT_B_RANGE.0,
            subwalk::fit::DEFAULT_B_RANGE.1,
        )?;
        println!(
            "variance-pinned fit (|x| <= {w}): b = {:.4} ± {:.4}, delta = {:.5} ± {:.5}",
            pinned.b, pinned.stderr_b, pinned.delta, pinned.stderr_delta
        );
    }

    let moments = estimate_b_from_moments(dist)?;
    println!(
        "moment estimate: b = {:.4} (phi = {:.4}{})",
        moments.b,
        moments.phi,
        if moments.clamped { ", clamped" } else { "" }
    );

    if recorded.len() >= 3 {
        let series: Vec<(f64, f64)> = recorded
            .iter()
            .map(|(t, d)| Ok((*t as f64, subwalk::ensemble::variance(d)?)))
            .collect::<Result<_, subwalk::ensemble::EnsembleError>>()?;
        let temporal = fit_variance_power_law(&series)?;
        println!(
            "temporal fit over {} steps: 2d = {:.4} ± {:.4}, c^2 = {:.4}",
            series.len(),
            temporal.two_d,
            temporal.stderr_two_d,
            temporal.c_squared
        );
    }
    Ok(())
}

fn run_theory(args: &TheoryArgs) -> anyhow::Result<()> {
    let mut did_something = false;
    if let Some(b) = args.b {
        let phi = f_of_b(b)?;
        let profile = TheoryProfile::new(b, args.sigma)?;
        println!("f({b}) = {phi:.12}");
        println!("a({b}) = {:.12}", profile.scale_a());
        if let Some(n) = args.moment {
            println!(
                "E(x^{}) at sigma={} -> {:.12}",
                2 * n,
                args.sigma,
                profile.even_moment(n)
            );
            let g = generator_moments(b, args.sigma)?;
            println!(
                "lambda2 integral = {:.12}, lambda4 integral = {:.12}",
                g.lambda2_integral, g.lambda4_integral
            );
        }
        did_something = true;
    }
    if let Some(phi) = args.phi {
        println!("f^-1({phi}) = {:.12}", b_from_phi(phi)?);
        did_something = true;
    }
    anyhow::ensure!(
        did_something,
        "nothing to do: pass --b and/or --phi (see --help)"
    );
    Ok(())
}
