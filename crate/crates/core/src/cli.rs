//! The `rtcurve` command line.
//!
//! Exit codes: 0 on success, 1 for domain errors (missing curve group, empty
//! curve, degenerate test), 2 for I/O and parse errors.

use std::io::Write;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::thread;

use clap::{Args, Parser, Subcommand};

use crate::corpus::{CorpusError, CorpusFormat};
use crate::curve_file::{load_curve, save_curve, CurveFileError};
use crate::influence::{
    accumulate_file, curve, pattern_instances, AggregateState, DEFAULT_MAX_N, DEFAULT_MIN_INSTANCES,
};
use crate::plot::render_svg;
use crate::state_file::{load_state, save_state, StateFileError};
use crate::stats::{test_drop, StatsError};
use crate::synth::{generate_with_manifest, manifest_path, parse_response, SynthConfig, SynthError};

#[derive(Debug, Parser)]
#[command(name = "rtcurve", version, about = "Spreader-count retweet influence curves from tweet corpora")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count authors and following triples over one or more corpus shards.
    Analyze(AnalyzeArgs),
    /// Compute the Pr(n) curve from a state file.
    Curve(CurveArgs),
    /// One-sided Welch test of Pr(n1) > Pr(n2) on a curve file.
    Test(TestArgs),
    /// Generate a synthetic corpus with a known response function.
    Synth(SynthArgs),
    /// Render a curve file as an SVG chart.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long = "input", required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value = "tsv")]
    pub format: CorpusFormat,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MIN_INSTANCES, value_parser = clap::value_parser!(u64).range(1..))]
    pub min_instances: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_N)]
    pub max_n: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub n1: usize,
    #[arg(long)]
    pub n2: usize,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Defaults to `<out>.manifest.csv`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, default_value = "tsv")]
    pub format: CorpusFormat,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Response table, e.g. `1:0.1,2:0.15,3:0.2`.
    #[arg(long)]
    pub response: String,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub instances_per_n: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub originals_per_sender: u64,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn domain(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }

    fn io(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        CliError::domain(e.to_string())
    }
}

fn write_failed(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::io(format!("{}: {e}", path.display()))
}

fn state_error(path: &Path, e: StateFileError) -> CliError {
    CliError::io(format!("{}: {e}", path.display()))
}

fn curve_error(path: &Path, e: CurveFileError) -> CliError {
    CliError::io(format!("{}: {e}", path.display()))
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError { code: 2, message: e.to_string() })?;
    run(cli, stdout, stderr)
}

pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(a) => cmd_analyze(&a.inputs, a.format, &a.out, stderr),
        Command::Curve(a) => cmd_curve(&a.input, a.min_instances, a.max_n, &a.out, stdout, stderr),
        Command::Test(a) => cmd_test(&a.input, a.n1, a.n2, stdout),
        Command::Synth(a) => cmd_synth(&a, stderr),
        Command::Plot(a) => cmd_plot(&a.input, &a.out),
    }
}

/// Accumulates every input on a small worker pool and merges the shards.
pub fn analyze_inputs(inputs: &[PathBuf], format: CorpusFormat) -> Result<AggregateState, CorpusError> {
    let workers = thread::available_parallelism().map_or(1, NonZeroUsize::get).min(inputs.len()).max(1);
    if workers == 1 {
        let mut total = AggregateState::new();
        for path in inputs {
            total = total.merge(accumulate_file(path, format)?);
        }
        return Ok(total);
    }
    let chunk = inputs.len().div_ceil(workers);
    thread::scope(|scope| {
        let handles: Vec<_> = inputs
            .chunks(chunk)
            .map(|paths| {
                scope.spawn(move || {
                    let mut part = AggregateState::new();
                    for path in paths {
                        part = part.merge(accumulate_file(path, format)?);
                    }
                    Ok::<_, CorpusError>(part)
                })
            })
            .collect();
        let mut total = AggregateState::new();
        for h in handles {
            total = total.merge(h.join().expect("analyze worker panicked")?);
        }
        Ok(total)
    })
}

pub fn cmd_analyze(
    inputs: &[PathBuf],
    format: CorpusFormat,
    out: &Path,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let state = analyze_inputs(inputs, format).map_err(|e| CliError::io(e.to_string()))?;
    save_state(&state, out).map_err(|e| write_failed(out, e))?;
    let d = state.diagnostics;
    let _ = writeln!(
        stderr,
        "analyzed {} file(s): tweets={} triples={} malformed_skipped={} authors={} distinct_triples={}",
        inputs.len(),
        d.tweets_seen,
        d.triples_emitted,
        d.malformed_skipped,
        state.author_counts.len(),
        state.triple_counts.len()
    );
    Ok(())
}

pub fn cmd_curve(
    input: &Path,
    min_instances: u64,
    max_n: usize,
    out: &Path,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    if max_n == 0 {
        return Err(CliError::domain("--max-n must be at least 1"));
    }
    let state = load_state(input).map_err(|e| state_error(input, e))?;
    let report = pattern_instances(&state);
    let all = curve(&report.instances, 1, usize::MAX).map_err(|e| CliError::domain(e.to_string()))?;
    let points = curve(&report.instances, min_instances, max_n).map_err(|e| CliError::domain(e.to_string()))?;
    save_curve(&points, out).map_err(|e| write_failed(out, e))?;
    for p in &all {
        let status = if points.iter().any(|q| q.n == p.n) { "reported" } else { "omitted" };
        let _ = writeln!(stdout, "n={} instances={} {status}", p.n, p.instances);
    }
    let _ = writeln!(
        stderr,
        "instances={} absent_senders={} clamped={} points={}",
        report.instances.len(),
        report.absent_senders,
        report.clamped,
        points.len()
    );
    Ok(())
}

pub fn cmd_test(input: &Path, n1: usize, n2: usize, stdout: &mut dyn Write) -> Result<(), CliError> {
    let points = load_curve(input).map_err(|e| curve_error(input, e))?;
    let result = test_drop(&points, n1, n2)?;
    writeln!(stdout, "{}", result.csv_line()).map_err(|e| CliError::io(e.to_string()))?;
    Ok(())
}

pub fn cmd_synth(args: &SynthArgs, stderr: &mut dyn Write) -> Result<(), CliError> {
    let response = parse_response(&args.response).map_err(|e| CliError::domain(e.to_string()))?;
    let config = SynthConfig {
        seed: args.seed,
        response,
        instances_per_n: args.instances_per_n,
        originals_per_sender: args.originals_per_sender,
        format: args.format,
    };
    let manifest_out = args.manifest.clone().unwrap_or_else(|| manifest_path(&args.out));
    let manifest = generate_with_manifest(&config, &args.out, &manifest_out).map_err(|e| match e {
        SynthError::Config(m) => CliError::domain(m),
        SynthError::Io(e) => write_failed(&args.out, e),
    })?;
    let _ = writeln!(
        stderr,
        "wrote {} tweets to {} (manifest {}), silent groups={}",
        manifest.tweets_written,
        args.out.display(),
        manifest_out.display(),
        manifest.silent_groups
    );
    Ok(())
}

pub fn cmd_plot(input: &Path, out: &Path) -> Result<(), CliError> {
    let points = load_curve(input).map_err(|e| curve_error(input, e))?;
    if points.is_empty() {
        return Err(CliError::domain(format!("{}: curve has no points", input.display())));
    }
    std::fs::write(out, render_svg(&points)).map_err(|e| write_failed(out, e))
}
