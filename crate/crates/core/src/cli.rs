//! Command-line surface: `compute | compare | sweep | curve | gen`.
//!
//! Exit status is 0 on success, 1 for input or validation errors and 2 for
//! usage errors. All output is rendered in full before anything is written,
//! so a failing run never leaves a partial machine-mode document on stdout.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::ablation::{rank_preservation_check, sweep, SweepError, SweepParameter, SweepSpec};
use crate::curve::{asc_of_trace, CurveConfig, IntegrationRule};
use crate::ingest::{
    emit_csv, generate_synthetic, parse_csv, parse_json, ColumnMap, EnergyMode, IngestError,
    PerfCurve, PerformanceScale, PowerSchedule, SyntheticSpec,
};
use crate::metrics::{AlphaPolicy, BaselineConfig, FmsConfig, MetricError};
use crate::report::{
    compare_csv, compare_json, compare_table, compare_text, curve_csv, curve_json, curve_report,
    evaluate_trace, ranks_csv, report_csv, report_json, report_text, sweep_csv, sweep_json,
    sweep_text, EvaluationConfig, SortKey,
};
use crate::trace::Trace;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Rect,
    Simpson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EnergyModeArg {
    Cumulative,
    Interval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PerfScaleArg {
    Fraction,
    Percent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SortArg {
    Fms,
    Asc,
    Score,
    Si,
    Sam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParamArg {
    Alpha,
    Beta,
    Wmax,
    N,
}

/// Parses `at-iter:<k>:x<factor>`.
pub fn parse_alpha_policy(s: &str) -> Result<AlphaPolicy, String> {
    let rest = s
        .strip_prefix("at-iter:")
        .ok_or_else(|| format!("expected at-iter:<k>:x<factor>, got `{s}`"))?;
    let (k, factor) = rest
        .split_once(':')
        .ok_or_else(|| format!("expected at-iter:<k>:x<factor>, got `{s}`"))?;
    let iteration = k.parse().map_err(|_| format!("bad iteration `{k}`"))?;
    let factor: f64 = factor
        .strip_prefix('x')
        .unwrap_or(factor)
        .parse()
        .map_err(|_| format!("bad factor `{factor}`"))?;
    if !(factor.is_finite() && factor > 0.0) {
        return Err(format!("factor must be positive, got {factor}"));
    }
    Ok(AlphaPolicy::at_iteration(iteration, factor))
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Output format (default: text for compute/compare, csv for sweep/curve)
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Fixed energy decay rate (1/kWh)
    #[arg(long, global = true, conflicts_with = "alpha_policy")]
    pub alpha: Option<f64>,
    /// Bind alpha to the trace: factor times the energy at iteration k
    #[arg(long, global = true, value_parser = parse_alpha_policy, default_value = "at-iter:100:x100")]
    pub alpha_policy: AlphaPolicy,
    #[arg(long, global = true, default_value_t = 1.0)]
    pub beta: f64,
    /// Energy budget and normalizer of the curve (kWh)
    #[arg(long, global = true, default_value_t = 1.0)]
    pub wmax: f64,
    /// Number of curve partitions
    #[arg(long, global = true, default_value_t = 10)]
    pub n: usize,
    #[arg(long, global = true, value_enum, default_value_t = RuleArg::Rect)]
    pub rule: RuleArg,
    #[arg(long, global = true, value_enum, default_value_t = SortArg::Fms)]
    pub sort_by: SortArg,
    /// Column map for CSV input, e.g. `iter=step,energy=kwh,perf=#3`
    #[arg(long, global = true)]
    pub columns: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = EnergyModeArg::Cumulative)]
    pub energy_mode: EnergyModeArg,
    #[arg(long, global = true, value_enum, default_value_t = PerfScaleArg::Fraction)]
    pub perf_scale: PerfScaleArg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute all metrics for one trace
    Compute { trace: PathBuf },
    /// Rank several traces under one configuration
    Compare {
        #[arg(required = true, num_args = 2..)]
        traces: Vec<PathBuf>,
    },
    /// Sweep one configuration parameter (long-format output)
    Sweep {
        #[arg(required = true, num_args = 1..)]
        traces: Vec<PathBuf>,
        #[arg(long, value_enum)]
        param: ParamArg,
        /// Comma-separated, strictly increasing
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Read alpha values as anchor iterations; alpha = factor x energy there
        #[arg(long)]
        anchor_factor: Option<f64>,
        /// Emit the per-value ranking instead of the metric rows
        #[arg(long)]
        check_ranks: bool,
    },
    /// Emit the sustainability curve and its area
    Curve { trace: PathBuf },
    /// Write a synthetic trace in the default CSV schema
    Gen {
        #[arg(long, default_value_t = 1000)]
        iters: u64,
        /// kW, either constant (`3.6`) or a schedule (`1.8@400,4.8`)
        #[arg(long, default_value = "3.6")]
        power: String,
        /// saturating:<p_max>[:<rate>] | linear:<slope> | step:<at>:<lo>:<hi>
        #[arg(long, default_value = "saturating:0.9")]
        perf: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long)]
        hours_per_iter: Option<f64>,
        #[arg(long, default_value = "synthetic")]
        label: String,
        /// Output file (stdout when omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Parser)]
#[command(name = "sustain", version, about = "Sustainability metrics for energy/performance traces")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Error surfaced to the user with a stable code.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
}

impl CliError {
    fn at(file: &Path, code: &str, message: String, inner: Option<String>) -> Self {
        let location = match inner {
            Some(l) => format!("{}: {l}", file.display()),
            None => file.display().to_string(),
        };
        CliError {
            code: code.to_string(),
            message,
            location: Some(location),
        }
    }

    fn from_ingest(file: &Path, e: IngestError) -> Self {
        Self::at(file, e.code(), e.to_string(), e.location())
    }

    fn from_metric(file: &Path, e: MetricError) -> Self {
        Self::at(file, e.code(), e.to_string(), None)
    }

    fn plain(code: &str, message: impl Into<String>) -> Self {
        CliError {
            code: code.to_string(),
            message: message.into(),
            location: None,
        }
    }

    fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => {
                #[derive(Serialize)]
                struct Wrapper<'a> {
                    error: &'a CliError,
                }
                let mut s = serde_json::to_string(&Wrapper { error: self }).expect("error serializes");
                s.push('\n');
                s
            }
            _ => match &self.location {
                Some(l) => format!("error[{}]: {} (at {l})\n", self.code, self.message),
                None => format!("error[{}]: {}\n", self.code, self.message),
            },
        }
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Metric(m) => CliError::plain(m.code(), m.to_string()),
            other => CliError::plain("InvalidSweep", other.to_string()),
        }
    }
}

impl GlobalArgs {
    pub fn evaluation_config(&self) -> EvaluationConfig {
        EvaluationConfig {
            fms: FmsConfig {
                alpha_policy: match self.alpha {
                    Some(a) => AlphaPolicy::fixed(a),
                    None => self.alpha_policy,
                },
                beta: self.beta,
            },
            baseline: BaselineConfig::default(),
            curve: CurveConfig {
                n_partitions: self.n,
                w_max: self.wmax,
                rule: match self.rule {
                    RuleArg::Rect => IntegrationRule::RectangleRightPoint,
                    RuleArg::Simpson => IntegrationRule::Simpson,
                },
            },
        }
    }

    pub fn column_map(&self) -> Result<ColumnMap, IngestError> {
        let base = ColumnMap {
            energy_mode: match self.energy_mode {
                EnergyModeArg::Cumulative => EnergyMode::Cumulative,
                EnergyModeArg::Interval => EnergyMode::PerInterval,
            },
            performance_scale: match self.perf_scale {
                PerfScaleArg::Fraction => PerformanceScale::Fraction,
                PerfScaleArg::Percent => PerformanceScale::Percent,
            },
            ..ColumnMap::default()
        };
        match &self.columns {
            Some(spec) => base.with_spec(spec),
            None => Ok(base),
        }
    }

    fn sort_key(&self) -> SortKey {
        match self.sort_by {
            SortArg::Fms => SortKey::Fms,
            SortArg::Asc => SortKey::Asc,
            SortArg::Score => SortKey::Score,
            SortArg::Si => SortKey::Si,
            SortArg::Sam => SortKey::Sam,
        }
    }
}

/// Loads a trace; `.json` files use the JSON schema, anything else is CSV.
/// CSV traces are labelled by file stem.
pub fn load_trace(path: &Path, map: &ColumnMap) -> Result<Trace, CliError> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::at(path, "Io", format!("cannot read file: {e}"), None))?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let parsed = if is_json {
        parse_json(&bytes, &stem)
    } else {
        parse_csv(&bytes, map, &stem)
    };
    parsed.map_err(|e| CliError::from_ingest(path, e))
}

fn load_all(paths: &[PathBuf], g: &GlobalArgs) -> Result<Vec<Trace>, CliError> {
    let map = g
        .column_map()
        .map_err(|e| CliError::plain(e.code(), e.to_string()))?;
    paths.iter().map(|p| load_trace(p, &map)).collect()
}

/// Output of a successful command: bytes for stdout.
type Rendered = Result<String, CliError>;

pub fn cmd_compute(path: &Path, g: &GlobalArgs) -> Rendered {
    let trace = load_all(&[path.to_path_buf()], g)?.remove(0);
    let report = evaluate_trace(&trace, &g.evaluation_config())
        .map_err(|e| CliError::from_metric(path, e))?;
    Ok(match g.format.unwrap_or(OutputFormat::Text) {
        OutputFormat::Text => report_text(&report),
        OutputFormat::Json => report_json(&report),
        OutputFormat::Csv => report_csv(&report),
    })
}

pub fn cmd_compare(paths: &[PathBuf], g: &GlobalArgs) -> Rendered {
    if paths.len() < 2 {
        return Err(CliError::plain("TooFewTraces", "compare needs at least 2 traces"));
    }
    let traces = load_all(paths, g)?;
    let config = g.evaluation_config();
    let reports = traces
        .iter()
        .zip(paths)
        .map(|(t, p)| evaluate_trace(t, &config).map_err(|e| CliError::from_metric(p, e)))
        .collect::<Result<Vec<_>, _>>()?;
    let table = compare_table(reports, g.sort_key(), config);
    Ok(match g.format.unwrap_or(OutputFormat::Text) {
        OutputFormat::Text => compare_text(&table),
        OutputFormat::Json => compare_json(&table),
        OutputFormat::Csv => compare_csv(&table),
    })
}

pub fn cmd_sweep(
    paths: &[PathBuf],
    param: ParamArg,
    values: Vec<f64>,
    anchor_factor: Option<f64>,
    check_ranks: bool,
    g: &GlobalArgs,
) -> Rendered {
    let traces = load_all(paths, g)?;
    let config = g.evaluation_config();
    let parameter = match param {
        ParamArg::Alpha => SweepParameter::Alpha,
        ParamArg::Beta => SweepParameter::Beta,
        ParamArg::Wmax => SweepParameter::Wmax,
        ParamArg::N => SweepParameter::NPartitions,
    };
    let mut spec = SweepSpec::new(parameter, values, config.fms, config.curve)?;
    if let Some(f) = anchor_factor {
        spec = spec.anchored(f)?;
    }
    if check_ranks {
        let table = rank_preservation_check(&traces, &spec)?;
        return Ok(match g.format.unwrap_or(OutputFormat::Csv) {
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(&table).expect("rank table serializes");
                s.push('\n');
                s
            }
            _ => ranks_csv(&table),
        });
    }
    let result = sweep(&traces, &spec);
    Ok(match g.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => sweep_csv(&result),
        OutputFormat::Json => sweep_json(&result),
        OutputFormat::Text => sweep_text(&result),
    })
}

pub fn cmd_curve(path: &Path, g: &GlobalArgs) -> Rendered {
    let trace = load_all(&[path.to_path_buf()], g)?.remove(0);
    let config = g.evaluation_config().curve;
    let out = asc_of_trace(&trace, &config).map_err(|e| CliError::from_metric(path, e))?;
    let report = curve_report(trace.label(), out.value, &out.curve, config);
    Ok(match g.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Json => curve_json(&report),
        _ => curve_csv(&report),
    })
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_gen(
    iters: u64,
    power: &str,
    perf: &str,
    seed: u64,
    noise: f64,
    hours_per_iter: Option<f64>,
    label: &str,
) -> Rendered {
    let ingest = |e: IngestError| CliError::plain(e.code(), e.to_string());
    let power: PowerSchedule = power.parse().map_err(ingest)?;
    let curve = PerfCurve::parse(perf, iters).map_err(ingest)?;
    let mut spec = SyntheticSpec::new(iters, power, curve);
    spec.seed = seed;
    spec.noise_sigma = noise;
    spec.label = label.to_string();
    if let Some(h) = hours_per_iter {
        spec.hours_per_iteration = h;
    }
    let trace = generate_synthetic(&spec).map_err(ingest)?;
    Ok(emit_csv(&trace))
}

/// Runs the CLI with explicit argument list and output sinks; returns the
/// exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                EXIT_USAGE
            } else {
                let _ = stdout.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    let g = &cli.global;
    let format = g.format.unwrap_or(OutputFormat::Text);
    let rendered = match &cli.command {
        Command::Compute { trace } => cmd_compute(trace, g),
        Command::Compare { traces } => cmd_compare(traces, g),
        Command::Sweep {
            traces,
            param,
            values,
            anchor_factor,
            check_ranks,
        } => cmd_sweep(
            traces,
            *param,
            values.clone(),
            *anchor_factor,
            *check_ranks,
            g,
        ),
        Command::Curve { trace } => cmd_curve(trace, g),
        Command::Gen {
            iters,
            power,
            perf,
            seed,
            noise,
            hours_per_iter,
            label,
            output,
        } => cmd_gen(*iters, power, perf, *seed, *noise, *hours_per_iter, label).and_then(|csv| {
            match output {
                Some(path) => fs::write(path, csv)
                    .map(|_| String::new())
                    .map_err(|e| CliError::at(path, "Io", format!("cannot write file: {e}"), None)),
                None => Ok(csv),
            }
        }),
    };
    match rendered {
        Ok(text) => {
            if stdout.write_all(text.as_bytes()).is_err() {
                return EXIT_INPUT;
            }
            EXIT_OK
        }
        Err(e) => {
            let _ = stderr.write_all(e.render(format).as_bytes());
            EXIT_INPUT
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_policy_flag() {
        assert_eq!(
            parse_alpha_policy("at-iter:100:x100").unwrap(),
            AlphaPolicy::at_iteration(100, 100.0)
        );
        assert_eq!(
            parse_alpha_policy("at-iter:1000:1").unwrap(),
            AlphaPolicy::at_iteration(1000, 1.0)
        );
        assert!(parse_alpha_policy("fixed:3").is_err());
        assert!(parse_alpha_policy("at-iter:10:x0").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["sustain", "frobnicate"], &mut out, &mut err), EXIT_USAGE);
        assert_eq!(
            run(["sustain", "compute", "x.csv", "--alpha-policy", "nope"], &mut out, &mut err),
            EXIT_USAGE
        );
        assert_eq!(
            run(["sustain", "compute", "x.csv", "--alpha", "1", "--alpha-policy", "at-iter:1:x1"], &mut out, &mut err),
            EXIT_USAGE
        );
        assert_eq!(run(["sustain", "compare", "only-one.csv"], &mut out, &mut err), EXIT_USAGE);
    }

    #[test]
    fn missing_file_exits_one_with_structured_error() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(
            ["sustain", "compute", "/nonexistent/trace.csv", "--format", "json"],
            &mut out,
            &mut err,
        );
        assert_eq!(code, EXIT_INPUT);
        assert!(out.is_empty());
        let v: serde_json::Value = serde_json::from_slice(&err).unwrap();
        assert_eq!(v["error"]["code"], "Io");
    }

    #[test]
    fn gen_to_stdout() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(["sustain", "gen", "--iters", "5"], &mut out, &mut err);
        assert_eq!(code, EXIT_OK);
        let s = String::from_utf8(out).unwrap();
        assert_eq!(s.lines().count(), 6);
        assert!(s.starts_with("iter,energy_kwh,performance\n1,0.001,"));
    }
}
