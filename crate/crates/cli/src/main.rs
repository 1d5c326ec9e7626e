//! `blscale` — batch analysis of boundary-layer mean-velocity profiles.
//!
//! Subcommands: `analyze` runs the full pipeline over profile files and
//! writes the per-run table plus plots; `generate` writes synthetic
//! profiles in the canonical format; `collapse` emits the universal-collapse
//! dataset; `compare` prints the power-law vs log-law comparison table.
//!
//! Exit codes: 0 when every run succeeds, 2 on partial failure, 1 on total
//! failure or bad invocation.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use blscale::diagnostics::collapse_deviation;
use blscale::ingest;
use blscale::report::{
    analyze_batch, compare_models, emit_outputs, AnalysisConfig, BatchFormat, BatchSummary,
    BetaCorrelation, OutputFormat,
};
use blscale::scaling::ScalingLawConstants;
use blscale::synthetic::{generate, GeneratorSpec, GridSpec, ProfileModel};
use blscale::RunMetadata;

#[derive(Parser)]
#[command(
    name = "blscale",
    version,
    about = "Boundary-layer mean-velocity profile analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze profile files: segmented fits, ln Re solve, diagnostics.
    Analyze(AnalyzeArgs),
    /// Write a synthetic profile in the canonical format.
    Generate(GenerateArgs),
    /// Emit the universal-collapse dataset and plot for profile files.
    Collapse(CollapseArgs),
    /// Per-run power-law vs log-law comparison table.
    Compare(CompareArgs),
}

#[derive(Args, Clone)]
struct AnalysisFlags {
    /// Lower edge of the fitting region in wall units.
    #[arg(long, default_value_t = 100.0)]
    sublayer_cutoff: f64,
    /// Breakpoint search range LO:HI in wall units (default 150:0.5*y+max).
    #[arg(long, value_parser = parse_range)]
    breakpoint_range: Option<(f64, f64)>,
    /// Closeness threshold on the ln Re discrepancy, percent.
    #[arg(long, default_value_t = 3.0)]
    closeness_threshold_pct: f64,
    /// Re_theta boundary between collapse bands.
    #[arg(long, default_value_t = 15000.0)]
    re_theta_split: f64,
    /// Input format: 'canonical' or 'table' (headerless two-column).
    #[arg(long, default_value = "canonical")]
    format_hint: String,
    /// Metadata for 'table' inputs, repeatable: key=value with keys
    /// re_theta, u_free, u_tau, nu, label, momentum_thickness.
    #[arg(long, value_name = "KEY=VALUE")]
    metadata: Vec<String>,
    /// Treat 'table' columns as dimensional (y [m], u [m/s]).
    #[arg(long)]
    dimensional: bool,
}

impl AnalysisFlags {
    fn config(&self) -> AnalysisConfig {
        AnalysisConfig {
            sublayer_cutoff: self.sublayer_cutoff,
            breakpoint_search: self.breakpoint_range,
            closeness_threshold_pct: self.closeness_threshold_pct,
            re_theta_split: self.re_theta_split,
            constants: ScalingLawConstants::default(),
        }
    }

    fn batch_format(&self) -> Result<BatchFormat> {
        match self.format_hint.as_str() {
            "canonical" => Ok(BatchFormat::Canonical),
            "table" => Ok(BatchFormat::WhitespaceTable {
                meta: metadata_from_pairs(&self.metadata)?,
                dimensional: self.dimensional,
            }),
            other => bail!("unknown format hint '{other}' (expected 'canonical' or 'table')"),
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Profile files to analyze.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[command(flatten)]
    flags: AnalysisFlags,
    /// Output directory for emitted files.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Comma-separated outputs: table_csv, table_json, collapse_csv,
    /// profile_svg, collapse_svg. Empty string emits nothing.
    #[arg(long, default_value = "table_csv,table_json")]
    format: String,
}

#[derive(Args)]
struct CollapseArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[command(flatten)]
    flags: AnalysisFlags,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long, default_value = "collapse_csv,collapse_svg")]
    format: String,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[command(flatten)]
    flags: AnalysisFlags,
}

#[derive(Args)]
struct GenerateArgs {
    /// Model: scaling_law, log_law, or two_segment.
    #[arg(long)]
    model: String,
    /// ln Re for the scaling-law model.
    #[arg(long)]
    ln_re: Option<f64>,
    /// kappa for the log-law model.
    #[arg(long)]
    kappa: Option<f64>,
    /// Additive constant B for the log-law model.
    #[arg(long)]
    b: Option<f64>,
    /// Inner amplitude for the two-segment model.
    #[arg(long)]
    a: Option<f64>,
    /// Inner exponent for the two-segment model.
    #[arg(long)]
    alpha: Option<f64>,
    /// Breakpoint y+ for the two-segment model.
    #[arg(long)]
    breakpoint: Option<f64>,
    /// Outer exponent for the two-segment model.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 100.0)]
    grid_lo: f64,
    #[arg(long, default_value_t = 10000.0)]
    grid_hi: f64,
    #[arg(long, default_value_t = 60)]
    grid_count: usize,
    /// Relative noise amplitude (0.01 is 1%).
    #[arg(long, default_value_t = 0.0)]
    noise_pct: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20000.0)]
    re_theta: f64,
    #[arg(long, default_value_t = 15.0)]
    u_free: f64,
    #[arg(long, default_value_t = 0.5)]
    u_tau: f64,
    #[arg(long, default_value_t = 1.5e-5)]
    nu: f64,
    /// Momentum thickness [m]; must be consistent with re_theta.
    #[arg(long)]
    momentum_thickness: Option<f64>,
    /// Run label (defaults to a model/seed tag).
    #[arg(long)]
    label: Option<String>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected LO:HI, got '{s}'"))?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad number '{lo}'"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad number '{hi}'"))?;
    if lo >= hi {
        return Err(format!("range must satisfy LO < HI, got {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn metadata_from_pairs(pairs: &[String]) -> Result<RunMetadata> {
    let mut re_theta = None;
    let mut u_free = None;
    let mut u_tau = None;
    let mut nu = None;
    let mut theta = None;
    let mut label = String::new();
    for pair in pairs {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| anyhow!("metadata entry '{pair}' is not key=value"))?;
        let key = key.trim();
        let value = value.trim();
        let num = || -> Result<f64> {
            value
                .parse()
                .with_context(|| format!("metadata {key}='{value}' is not a number"))
        };
        match key {
            "re_theta" => re_theta = Some(num()?),
            "u_free" => u_free = Some(num()?),
            "u_tau" => u_tau = Some(num()?),
            "nu" => nu = Some(num()?),
            "momentum_thickness" => theta = Some(num()?),
            "label" => label = value.to_string(),
            other => bail!("unknown metadata key '{other}'"),
        }
    }
    let missing: Vec<&str> = [
        ("re_theta", re_theta.is_none()),
        ("u_free", u_free.is_none()),
        ("u_tau", u_tau.is_none()),
        ("nu", nu.is_none()),
    ]
    .into_iter()
    .filter_map(|(k, absent)| absent.then_some(k))
    .collect();
    if !missing.is_empty() {
        bail!(
            "table inputs need --metadata for: {} (label optional, defaults to file stem)",
            missing.join(", ")
        );
    }
    let mut meta = RunMetadata::new(
        re_theta.unwrap(),
        u_free.unwrap(),
        u_tau.unwrap(),
        nu.unwrap(),
        label,
    )?;
    if let Some(t) = theta {
        meta = meta.with_momentum_thickness(t)?;
    }
    Ok(meta)
}

fn parse_formats(s: &str) -> Result<Vec<OutputFormat>> {
    let mut formats = Vec::new();
    for name in s.split(',').map(str::trim).filter(|n| !n.is_empty()) {
        let f = OutputFormat::parse(name)
            .ok_or_else(|| anyhow!("unknown output format '{name}'"))?;
        formats.push(f);
    }
    Ok(formats)
}

fn print_failures(summary: &BatchSummary) {
    for f in &summary.failures {
        eprintln!("error: {}: {}", f.source, f.message);
    }
}

fn exit_code(summary: &BatchSummary) -> u8 {
    if summary.total_failure() {
        1
    } else if summary.failures.is_empty() {
        0
    } else {
        2
    }
}

fn run_analyze(args: &AnalyzeArgs) -> Result<u8> {
    let config = args.flags.config();
    let format = args.flags.batch_format()?;
    let summary = analyze_batch(&args.files, &config, &format);

    println!(
        "{:<16} {:>10} {:>9} {:>9} {:>7} {:>12} {:>11}  {}",
        "label", "Re_theta", "ln_Re1", "ln_Re2", "disc%", "Re_eff", "breakpoint", "verdict"
    );
    for r in summary.reports() {
        println!(
            "{:<16} {:>10.1} {:>9.4} {:>9.4} {:>7.3} {:>12.1} {:>11.1}  {}",
            r.label,
            r.re_theta,
            r.ln_re1,
            r.ln_re2,
            r.discrepancy_pct,
            r.re_eff,
            r.breakpoint_y_plus,
            if r.discrepancy_pct <= config.closeness_threshold_pct {
                "close"
            } else {
                "apart"
            }
        );
    }
    match summary.beta_vs_lnre {
        BetaCorrelation::Fitted(f) => println!(
            "beta vs 1/ln Re: slope = {:.4} +- {:.4}, intercept = {:.5} +- {:.5} (r^2 = {:.4}, n = {})",
            f.slope, f.stderr_slope, f.intercept, f.stderr_intercept, f.r_squared, f.n_runs
        ),
        BetaCorrelation::InsufficientRuns { n_runs } => {
            println!("beta vs 1/ln Re: insufficient runs (n = {n_runs}, need 3)")
        }
    }
    for band in &summary.collapse_by_band {
        println!(
            "collapse {}: mean offset = {:+.4}, rms = {:.4}, max = {:.4} ({} runs, {} points)",
            band.band,
            band.stats.mean_offset,
            band.stats.rms,
            band.stats.max_abs,
            band.n_runs,
            band.n_points
        );
    }
    let inverted = summary
        .runs
        .iter()
        .filter(|r| !r.segmented.slope_decreases_outward())
        .count();
    if inverted > 0 {
        println!("note: {inverted} run(s) have outer exponent >= inner exponent");
    }

    let formats = parse_formats(&args.format)?;
    let written = emit_outputs(&summary, &args.out_dir, &formats)?;
    for path in &written {
        println!("wrote {}", path.display());
    }
    print_failures(&summary);
    Ok(exit_code(&summary))
}

fn run_collapse(args: &CollapseArgs) -> Result<u8> {
    let config = args.flags.config();
    let format = args.flags.batch_format()?;
    let summary = analyze_batch(&args.files, &config, &format);
    for run in &summary.runs {
        let stats = collapse_deviation(&run.collapse)?;
        println!(
            "{:<16} ln_Re_eff = {:>8.4}  mean offset = {:+.4}  rms = {:.4}  max = {:.4}",
            run.report.label,
            run.solution.ln_re_eff,
            stats.mean_offset,
            stats.rms,
            stats.max_abs
        );
    }
    let formats = parse_formats(&args.format)?;
    let written = emit_outputs(&summary, &args.out_dir, &formats)?;
    for path in &written {
        println!("wrote {}", path.display());
    }
    print_failures(&summary);
    Ok(exit_code(&summary))
}

fn run_compare(args: &CompareArgs) -> Result<u8> {
    let config = args.flags.config();
    let format = args.flags.batch_format()?;
    let summary = analyze_batch(&args.files, &config, &format);
    println!(
        "{:<16} {:>18} {:>14} {:>15} {:>13} {:>13}  {}",
        "label",
        "window",
        "sse_power(ll)",
        "sse_log(semil)",
        "rms_lin_pow",
        "rms_lin_log",
        "preferred"
    );
    for run in &summary.runs {
        let c = compare_models(run);
        println!(
            "{:<16} {:>8.1}:{:<9.1} {:>14.3e} {:>15.3e} {:>13.4e} {:>13.4e}  {}",
            c.label,
            c.window.lo,
            c.window.hi,
            c.sse_power_loglog,
            c.sse_loglaw_semilog,
            c.rms_linear_power,
            c.rms_linear_loglaw,
            c.preferred
        );
    }
    print_failures(&summary);
    Ok(exit_code(&summary))
}

fn run_generate(args: &GenerateArgs) -> Result<u8> {
    let model = match args.model.as_str() {
        "scaling_law" => ProfileModel::ScalingLaw {
            ln_re: args
                .ln_re
                .ok_or_else(|| anyhow!("scaling_law needs --ln-re"))?,
        },
        "log_law" => ProfileModel::LogLaw {
            kappa: args.kappa.ok_or_else(|| anyhow!("log_law needs --kappa"))?,
            intercept_b: args.b.ok_or_else(|| anyhow!("log_law needs --b"))?,
        },
        "two_segment" => ProfileModel::TwoSegment {
            amplitude: args.a.ok_or_else(|| anyhow!("two_segment needs --a"))?,
            alpha: args
                .alpha
                .ok_or_else(|| anyhow!("two_segment needs --alpha"))?,
            breakpoint_y_plus: args
                .breakpoint
                .ok_or_else(|| anyhow!("two_segment needs --breakpoint"))?,
            beta: args.beta.ok_or_else(|| anyhow!("two_segment needs --beta"))?,
        },
        other => bail!("unknown model '{other}'"),
    };
    let label = args.label.clone().unwrap_or_else(|| {
        format!("{}-s{}", args.model.replace('_', "-"), args.seed)
    });
    let mut meta = RunMetadata::new(args.re_theta, args.u_free, args.u_tau, args.nu, label)?;
    if let Some(theta) = args.momentum_thickness {
        meta = meta.with_momentum_thickness(theta)?;
    }
    let spec = GeneratorSpec::new(
        model,
        GridSpec::new(args.grid_lo, args.grid_hi, args.grid_count)?,
        meta,
    )
    .with_noise(args.noise_pct, args.seed);
    let profile = generate(&spec)?;
    let text = ingest::profile_to_string(&profile);
    match &args.out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Analyze(args) => run_analyze(args),
        Command::Generate(args) => run_generate(args),
        Command::Collapse(args) => run_collapse(args),
        Command::Compare(args) => run_compare(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
