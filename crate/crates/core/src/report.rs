//! End-to-end run analysis and batch reporting: the per-run table, the
//! cross-run beta correlation, banded collapse statistics, and the CSV/JSON
//! emitters.
//!
//! Per-run analysis is independent of the rest of the batch and runs
//! data-parallel when the `parallel` feature is enabled; results are always
//! ordered by input order. All floating-point output is formatted with 10
//! significant digits so identical inputs give byte-identical files.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use crate::diagnostics::{
    collapse_deviation, gamma_series, psi_transform, CollapsePoint, CollapseStats, GammaSeries,
};
use crate::error::{Error, Result};
use crate::ingest::{parse_profile, FormatHint};
use crate::par::map_ordered;
use crate::profile::{LogLawFit, RunMetadata, SegmentedFit, VelocityProfile, Window};
use crate::regression::{fit_broken_line, fit_line, fit_log_law_full, fit_power_law_full};
use crate::scaling::{effective_reynolds, solve_ln_re1, solve_ln_re2, ScalingLawConstants,
    ScalingSolution};
use crate::svg;

/// Knobs of the per-run pipeline.
#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    /// Lower edge of the fitting region; the viscous sublayer below is
    /// excluded. Sensible values run 70..=200.
    pub sublayer_cutoff: f64,
    /// Breakpoint search range; `None` means [150, 0.5 * y+_max].
    pub breakpoint_search: Option<(f64, f64)>,
    /// Threshold on the ln Re discrepancy for the closeness verdict, percent.
    pub closeness_threshold_pct: f64,
    /// Re_theta boundary between the low- and high-Re collapse bands.
    pub re_theta_split: f64,
    pub constants: ScalingLawConstants,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            sublayer_cutoff: 100.0,
            breakpoint_search: None,
            closeness_threshold_pct: 3.0,
            re_theta_split: 15000.0,
            constants: ScalingLawConstants::default(),
        }
    }
}

impl AnalysisConfig {
    fn search_range(&self, y_plus_max: f64) -> (f64, f64) {
        self.breakpoint_search
            .unwrap_or((150.0, 0.5 * y_plus_max))
    }
}

/// One row of the per-run table.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub label: String,
    pub re_theta: f64,
    pub a_amplitude: f64,
    pub alpha: f64,
    pub b2_amplitude: f64,
    pub beta: f64,
    pub kappa_fit: f64,
    pub b_fit: f64,
    pub ln_re1: f64,
    pub ln_re2: f64,
    pub discrepancy_pct: f64,
    pub re_eff: f64,
    pub lambda_scale: f64,
    pub theta_over_lambda: Option<f64>,
    pub sse_power_region1: f64,
    pub sse_loglaw_region1: f64,
    pub breakpoint_y_plus: f64,
    pub gamma_mean: f64,
    pub gamma_std: f64,
}

/// Everything computed for one run: the report row plus the intermediate
/// objects the plot and collapse outputs need.
#[derive(Debug, Clone)]
pub struct RunAnalysis {
    pub profile: VelocityProfile,
    pub segmented: SegmentedFit,
    pub log_law: LogLawFit,
    pub solution: ScalingSolution,
    pub gamma: GammaSeries,
    pub collapse: Vec<CollapsePoint>,
    pub report: RunReport,
}

/// Full pipeline for one profile: segmentation, region fits, log-law
/// comparison fit, the two-equation ln Re solve, effective Reynolds number,
/// and diagnostics. Errors carry the run label and failing stage.
pub fn analyze_run(profile: VelocityProfile, config: &AnalysisConfig) -> Result<RunAnalysis> {
    let label = profile.meta().label.clone();
    let stage = |e: Error, s: &'static str| e.at_stage(&label, s);

    let (lo, hi) = config.search_range(profile.y_plus_max());
    let segmented = fit_broken_line(&profile, lo, hi, config.sublayer_cutoff)
        .map_err(|e| stage(e, "segmentation"))?;
    let region1_window = segmented.region1.window;

    let (_, power_line1) = fit_power_law_full(&profile, region1_window)
        .map_err(|e| stage(e, "region fits"))?;
    let (log_law, log_line1) = fit_log_law_full(&profile, region1_window)
        .map_err(|e| stage(e, "log-law fit"))?;

    let ln_re1 = solve_ln_re1(segmented.region1.amplitude, &config.constants)
        .map_err(|e| stage(e, "scaling solve"))?;
    let ln_re2 = solve_ln_re2(segmented.region1.exponent, &config.constants)
        .map_err(|e| stage(e, "scaling solve"))?;
    let solution = effective_reynolds(
        ln_re1,
        ln_re2,
        profile.meta(),
        config.closeness_threshold_pct,
    )
    .map_err(|e| stage(e, "scaling solve"))?;

    let gamma = gamma_series(&profile);
    let (gamma_mean, gamma_std) = gamma
        .stats_over(region1_window)
        .map_err(|e| stage(e, "diagnostics"))?;

    let collapse = psi_transform(
        &profile,
        solution.ln_re_eff,
        &config.constants,
        region1_window,
    )
    .map_err(|e| stage(e, "collapse transform"))?;

    let report = RunReport {
        label,
        re_theta: profile.meta().re_theta,
        a_amplitude: segmented.region1.amplitude,
        alpha: segmented.region1.exponent,
        b2_amplitude: segmented.region2.amplitude,
        beta: segmented.region2.exponent,
        kappa_fit: log_law.kappa,
        b_fit: log_law.intercept_b,
        ln_re1,
        ln_re2,
        discrepancy_pct: solution.discrepancy_pct,
        re_eff: solution.re_eff,
        lambda_scale: solution.lambda_scale,
        theta_over_lambda: solution.theta_over_lambda(profile.meta()),
        sse_power_region1: power_line1.sse,
        sse_loglaw_region1: log_line1.sse,
        breakpoint_y_plus: segmented.breakpoint_y_plus,
        gamma_mean,
        gamma_std,
    };

    Ok(RunAnalysis {
        profile,
        segmented,
        log_law,
        solution,
        gamma,
        collapse,
        report,
    })
}

/// Cross-run fit of beta against 1/ln Re_eff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaReCorrelation {
    pub slope: f64,
    pub intercept: f64,
    pub stderr_slope: f64,
    pub stderr_intercept: f64,
    pub r_squared: f64,
    pub n_runs: usize,
}

/// Outcome of the cross-run correlation fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaCorrelation {
    Fitted(BetaReCorrelation),
    /// Fewer than three runs succeeded; no fit is possible.
    InsufficientRuns { n_runs: usize },
}

/// Collapse statistics over all runs on one side of the Re_theta split.
#[derive(Debug, Clone, PartialEq)]
pub struct BandCollapseStats {
    /// Human-readable band description, e.g. "re_theta >= 15000".
    pub band: String,
    pub n_runs: usize,
    pub n_points: usize,
    pub stats: CollapseStats,
}

/// A run or file that failed, with the failure message.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    /// File path or run label identifying the input.
    pub source: String,
    pub message: String,
}

/// Batch result: per-run analyses in input order, collected failures, the
/// beta correlation, and collapse statistics split by Re_theta band.
#[derive(Debug, Clone)]
pub struct BatchSummary {
    pub runs: Vec<RunAnalysis>,
    pub failures: Vec<RunFailure>,
    pub beta_vs_lnre: BetaCorrelation,
    pub collapse_by_band: Vec<BandCollapseStats>,
    pub re_theta_split: f64,
}

impl BatchSummary {
    pub fn reports(&self) -> impl Iterator<Item = &RunReport> {
        self.runs.iter().map(|r| &r.report)
    }

    pub fn all_ok(&self) -> bool {
        self.failures.is_empty() && !self.runs.is_empty()
    }

    pub fn total_failure(&self) -> bool {
        self.runs.is_empty()
    }
}

/// Analyze a set of in-memory profiles. Per-run failures are collected and
/// the batch continues; the summary aggregates whatever succeeded.
pub fn analyze_profiles(profiles: Vec<VelocityProfile>, config: &AnalysisConfig) -> BatchSummary {
    let outcomes = map_ordered(profiles, |p| {
        let source = p.meta().label.clone();
        analyze_run(p, config).map_err(|e| RunFailure {
            source,
            message: e.to_string(),
        })
    });

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(run) => runs.push(run),
            Err(f) => failures.push(f),
        }
    }
    summarize(runs, failures, config)
}

fn summarize(
    runs: Vec<RunAnalysis>,
    failures: Vec<RunFailure>,
    config: &AnalysisConfig,
) -> BatchSummary {
    let beta_vs_lnre = if runs.len() >= 3 {
        let xs: Vec<f64> = runs.iter().map(|r| 1.0 / r.solution.ln_re_eff).collect();
        let ys: Vec<f64> = runs.iter().map(|r| r.report.beta).collect();
        match fit_line(&xs, &ys) {
            Ok(line) => BetaCorrelation::Fitted(BetaReCorrelation {
                slope: line.slope,
                intercept: line.intercept,
                stderr_slope: line.stderr_slope,
                stderr_intercept: line.stderr_intercept,
                r_squared: line.r_squared,
                n_runs: runs.len(),
            }),
            Err(_) => BetaCorrelation::InsufficientRuns { n_runs: runs.len() },
        }
    } else {
        BetaCorrelation::InsufficientRuns { n_runs: runs.len() }
    };

    let split = config.re_theta_split;
    let mut collapse_by_band = Vec::new();
    for (below, band) in [
        (true, format!("re_theta < {split}")),
        (false, format!("re_theta >= {split}")),
    ] {
        let members: Vec<&RunAnalysis> = runs
            .iter()
            .filter(|r| (r.report.re_theta < split) == below)
            .collect();
        let points: Vec<CollapsePoint> = members
            .iter()
            .flat_map(|r| r.collapse.iter().cloned())
            .collect();
        if let Ok(stats) = collapse_deviation(&points) {
            collapse_by_band.push(BandCollapseStats {
                band,
                n_runs: members.len(),
                n_points: points.len(),
                stats,
            });
        }
    }

    BatchSummary {
        runs,
        failures,
        beta_vs_lnre,
        collapse_by_band,
        re_theta_split: split,
    }
}

/// How files in a batch are to be read.
#[derive(Debug, Clone)]
pub enum BatchFormat {
    Canonical,
    WhitespaceTable {
        meta: RunMetadata,
        dimensional: bool,
    },
}

impl BatchFormat {
    fn hint_for(&self, path: &Path) -> FormatHint {
        match self {
            BatchFormat::Canonical => FormatHint::Canonical,
            BatchFormat::WhitespaceTable { meta, dimensional } => {
                let mut meta = meta.clone();
                if meta.label.is_empty() {
                    meta.label = path
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_else(|| path.display().to_string());
                }
                FormatHint::WhitespaceTable {
                    meta,
                    dimensional: *dimensional,
                }
            }
        }
    }
}

/// Read and analyze a batch of profile files. File-level failures are
/// collected alongside run-level ones; the batch always continues.
pub fn analyze_batch(
    paths: &[PathBuf],
    config: &AnalysisConfig,
    format: &BatchFormat,
) -> BatchSummary {
    let mut profiles = Vec::new();
    let mut failures = Vec::new();
    for path in paths {
        let parsed = fs::File::open(path)
            .map_err(Error::from)
            .and_then(|f| parse_profile(BufReader::new(f), format.hint_for(path)));
        match parsed {
            Ok(p) => profiles.push(p),
            Err(e) => failures.push(RunFailure {
                source: path.display().to_string(),
                message: e.to_string(),
            }),
        }
    }
    let mut summary = analyze_profiles(profiles, config);
    let mut all_failures = failures;
    all_failures.append(&mut summary.failures);
    summary.failures = all_failures;
    summary
}

/// File outputs `emit_outputs` can produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OutputFormat {
    TableCsv,
    TableJson,
    CollapseCsv,
    ProfileSvg,
    CollapseSvg,
}

impl OutputFormat {
    pub fn parse(name: &str) -> Option<OutputFormat> {
        match name.trim() {
            "table_csv" => Some(OutputFormat::TableCsv),
            "table_json" => Some(OutputFormat::TableJson),
            "collapse_csv" => Some(OutputFormat::CollapseCsv),
            "profile_svg" => Some(OutputFormat::ProfileSvg),
            "collapse_svg" => Some(OutputFormat::CollapseSvg),
            _ => None,
        }
    }
}

/// Write the requested output files into `out_dir`, returning the paths
/// written. An empty format list writes nothing and succeeds.
pub fn emit_outputs(
    summary: &BatchSummary,
    out_dir: &Path,
    formats: &[OutputFormat],
) -> Result<Vec<PathBuf>> {
    let mut wanted: Vec<OutputFormat> = formats.to_vec();
    wanted.sort();
    wanted.dedup();
    if wanted.is_empty() {
        return Ok(Vec::new());
    }
    fs::create_dir_all(out_dir)?;

    let write = |path: PathBuf, contents: String| -> Result<PathBuf> {
        fs::write(&path, contents).map_err(|source| Error::WriteFile {
            path: path.display().to_string(),
            source,
        })?;
        Ok(path)
    };

    let mut written = Vec::new();
    for format in wanted {
        match format {
            OutputFormat::TableCsv => {
                written.push(write(out_dir.join("reports.csv"), reports_csv(summary))?);
            }
            OutputFormat::TableJson => {
                written.push(write(out_dir.join("reports.json"), reports_json(summary))?);
            }
            OutputFormat::CollapseCsv => {
                written.push(write(out_dir.join("collapse.csv"), collapse_csv(summary))?);
            }
            OutputFormat::CollapseSvg => {
                let points: Vec<CollapsePoint> = summary
                    .runs
                    .iter()
                    .flat_map(|r| r.collapse.iter().cloned())
                    .collect();
                written.push(write(
                    out_dir.join("collapse.svg"),
                    svg::collapse_plot(&points),
                )?);
            }
            OutputFormat::ProfileSvg => {
                for run in &summary.runs {
                    let name = format!("profile_{}.svg", sanitize(&run.report.label));
                    written.push(write(out_dir.join(name), svg::profile_plot(run))?);
                }
            }
        }
    }
    Ok(written)
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

/// Format a float with `digits` significant digits, fixed or scientific
/// notation as appropriate. The output is a valid JSON number.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        // Does not occur for validated reports; keep output parseable.
        return if x.is_nan() {
            "null".to_string()
        } else if x > 0.0 {
            "1e999".to_string()
        } else {
            "-1e999".to_string()
        };
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let exp: i32 = sci
        .split_once('e')
        .expect("e-format always contains an exponent")
        .1
        .parse()
        .expect("exponent is an integer");
    if exp >= -4 && exp < digits as i32 {
        let prec = (digits as i32 - 1 - exp).max(0) as usize;
        format!("{x:.prec$}")
    } else {
        sci
    }
}

/// Ten significant digits: the report formatting contract.
fn g10(x: f64) -> String {
    fmt_sig(x, 10)
}

/// Column order of the per-run CSV table.
pub const REPORT_COLUMNS: [&str; 19] = [
    "label",
    "re_theta",
    "a_amplitude",
    "alpha",
    "b2_amplitude",
    "beta",
    "kappa_fit",
    "b_fit",
    "ln_re1",
    "ln_re2",
    "discrepancy_pct",
    "re_eff",
    "lambda_scale",
    "theta_over_lambda",
    "sse_power_region1",
    "sse_loglaw_region1",
    "breakpoint_y_plus",
    "gamma_mean",
    "gamma_std",
];

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Numeric cells of one report row, in column order after `label`.
fn report_cells(r: &RunReport) -> Vec<String> {
    vec![
        g10(r.re_theta),
        g10(r.a_amplitude),
        g10(r.alpha),
        g10(r.b2_amplitude),
        g10(r.beta),
        g10(r.kappa_fit),
        g10(r.b_fit),
        g10(r.ln_re1),
        g10(r.ln_re2),
        g10(r.discrepancy_pct),
        g10(r.re_eff),
        g10(r.lambda_scale),
        r.theta_over_lambda.map(g10).unwrap_or_default(),
        g10(r.sse_power_region1),
        g10(r.sse_loglaw_region1),
        g10(r.breakpoint_y_plus),
        g10(r.gamma_mean),
        g10(r.gamma_std),
    ]
}

/// Per-run table as CSV with the documented column order.
pub fn reports_csv(summary: &BatchSummary) -> String {
    let mut out = String::new();
    out.push_str(&REPORT_COLUMNS.join(","));
    out.push('\n');
    for r in summary.reports() {
        let mut row = vec![csv_field(&r.label)];
        row.extend(report_cells(r));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Batch summary as JSON, mirroring the report field names.
pub fn reports_json(summary: &BatchSummary) -> String {
    let mut out = String::from("{\n  \"reports\": [");
    for (i, r) in summary.reports().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str("\n    {");
        let mut fields: Vec<(&str, String)> = vec![("label", json_string(&r.label))];
        let cells = report_cells(r);
        for (name, cell) in REPORT_COLUMNS[1..].iter().zip(cells) {
            let value = if cell.is_empty() { "null".to_string() } else { cell };
            fields.push((name, value));
        }
        let body: Vec<String> = fields
            .iter()
            .map(|(k, v)| format!("\"{k}\": {v}"))
            .collect();
        out.push_str(&body.join(", "));
        out.push('}');
    }
    out.push_str("\n  ],\n  \"beta_vs_lnre\": ");
    match summary.beta_vs_lnre {
        BetaCorrelation::Fitted(f) => {
            out.push_str(&format!(
                "{{\"status\": \"fitted\", \"slope\": {}, \"intercept\": {}, \"stderr_slope\": {}, \"stderr_intercept\": {}, \"r_squared\": {}, \"n_runs\": {}}}",
                g10(f.slope),
                g10(f.intercept),
                g10(f.stderr_slope),
                g10(f.stderr_intercept),
                g10(f.r_squared),
                f.n_runs
            ));
        }
        BetaCorrelation::InsufficientRuns { n_runs } => {
            out.push_str(&format!(
                "{{\"status\": \"insufficient runs\", \"n_runs\": {n_runs}}}"
            ));
        }
    }
    out.push_str(",\n  \"collapse_stats_by_band\": [");
    for (i, b) in summary.collapse_by_band.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format!(
            "\n    {{\"band\": {}, \"n_runs\": {}, \"n_points\": {}, \"mean_offset\": {}, \"rms\": {}, \"max_abs\": {}}}",
            json_string(&b.band),
            b.n_runs,
            b.n_points,
            g10(b.stats.mean_offset),
            g10(b.stats.rms),
            g10(b.stats.max_abs)
        ));
    }
    out.push_str("\n  ],\n  \"failures\": [");
    for (i, f) in summary.failures.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format!(
            "\n    {{\"source\": {}, \"message\": {}}}",
            json_string(&f.source),
            json_string(&f.message)
        ));
    }
    out.push_str("\n  ]\n}\n");
    out
}

/// Collapse dataset as CSV: one row per windowed point per run.
pub fn collapse_csv(summary: &BatchSummary) -> String {
    let mut out = String::from("ln_y_plus,psi,run_label\n");
    for run in &summary.runs {
        for p in &run.collapse {
            out.push_str(&format!(
                "{},{},{}\n",
                g10(p.ln_y_plus),
                g10(p.psi),
                csv_field(&p.run_label)
            ));
        }
    }
    out
}

/// Region-I model comparison for one run: residuals in each model's own
/// fitting coordinates plus linear-velocity RMS errors for an
/// apples-to-apples column.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelComparison {
    pub label: String,
    pub window: Window,
    pub sse_power_loglog: f64,
    pub sse_loglaw_semilog: f64,
    pub rms_linear_power: f64,
    pub rms_linear_loglaw: f64,
    /// "power" or "log" by smaller linear RMS.
    pub preferred: &'static str,
}

pub fn compare_models(run: &RunAnalysis) -> ModelComparison {
    let window = run.segmented.region1.window;
    let pts = run.profile.points_in(window);
    let n = pts.len() as f64;
    let mut sq_power = 0.0;
    let mut sq_log = 0.0;
    for p in pts {
        let power_pred = run
            .segmented
            .region1
            .evaluate(p.y_plus)
            .expect("window points are positive");
        let log_pred = run.log_law.evaluate(p.y_plus).expect("window points are positive");
        sq_power += (power_pred - p.u_plus) * (power_pred - p.u_plus);
        sq_log += (log_pred - p.u_plus) * (log_pred - p.u_plus);
    }
    let rms_linear_power = (sq_power / n).sqrt();
    let rms_linear_loglaw = (sq_log / n).sqrt();
    ModelComparison {
        label: run.report.label.clone(),
        window,
        sse_power_loglog: run.report.sse_power_region1,
        sse_loglaw_semilog: run.report.sse_loglaw_region1,
        rms_linear_power,
        rms_linear_loglaw,
        preferred: if rms_linear_power <= rms_linear_loglaw {
            "power"
        } else {
            "log"
        },
    }
}
