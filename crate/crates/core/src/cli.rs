//! Command-line front end: `maxbell`, `pmax`, `sweep` and `verify`.
//!
//! Exit codes: 0 on success, 1 on optimizer non-convergence, write failure
//! or a failed audit, 2 on invalid arguments.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::channels_states::{NoiseKind, NoiseSpec, DENSE_QUBIT_CAP};
use crate::optimizer::{max_bell, OptimizationReport, OptimizerConfig, DEFAULT_SEED};
use crate::threshold::{numeric_pmax, ThresholdConfig, DEFAULT_CAP, MIN_TOLERANCE};
use crate::verify::{run_verify, Check, VerifyConfig, CORRELATION_TOL, MATRIX_TOL};

pub const CSV_HEADER: [&str; 4] = ["channel", "n", "p", "max_bell"];

#[derive(Debug, Parser)]
#[command(name = "mkbell", version, about = "Mermin-Klyshko violation of decohered GHZ states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Maximize the Bell value for one (n, channel, p).
    Maxbell(MaxbellArgs),
    /// Locate the largest noise that still violates the local bound.
    Pmax(PmaxArgs),
    /// Write max_bell over an evenly spaced range of p as CSV.
    Sweep(SweepArgs),
    /// Audit closed-form correlations and states against the dense path.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ChannelArg {
    Depolarizing,
    Dephasing,
    Dissipation,
    None,
}

impl ChannelArg {
    fn kind(self) -> Option<NoiseKind> {
        match self {
            ChannelArg::Depolarizing => Some(NoiseKind::Depolarizing),
            ChannelArg::Dephasing => Some(NoiseKind::Dephasing),
            ChannelArg::Dissipation => Some(NoiseKind::Dissipation),
            ChannelArg::None => None,
        }
    }

    fn name(self) -> &'static str {
        self.kind().map_or("none", NoiseKind::name)
    }
}

#[derive(Debug, Args)]
struct OptimizerArgs {
    /// Random see-saw starts.
    #[arg(long, default_value_t = 64)]
    starts: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Per-start sweep budget.
    #[arg(long, default_value_t = 500)]
    max_sweeps: usize,
    /// Convergence threshold on the gain of one full sweep.
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
}

impl OptimizerArgs {
    fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            starts: self.starts,
            seed: self.seed,
            max_sweeps: self.max_sweeps,
            tolerance: self.tolerance,
            ..OptimizerConfig::default()
        }
    }
}

#[derive(Debug, Args)]
struct MaxbellArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum)]
    channel: ChannelArg,
    #[arg(long)]
    p: Option<f64>,
    #[command(flatten)]
    opt: OptimizerArgs,
    /// Print a single JSON object instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct PmaxArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum)]
    channel: ChannelArg,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long, default_value_t = 0.01)]
    scan_step: f64,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: f64,
    #[command(flatten)]
    opt: OptimizerArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum)]
    channel: ChannelArg,
    #[arg(long)]
    p_min: f64,
    #[arg(long)]
    p_max: f64,
    #[arg(long)]
    steps: usize,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    opt: OptimizerArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 5)]
    n_max: usize,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

/// Fixed-point rendering used for every reported real.
pub fn fmt9(x: f64) -> String {
    format!("{x:.9}")
}

struct Usage(String);

fn usage(kind: ErrorKind, msg: impl Into<String>) -> Usage {
    let mut cmd = Cli::command();
    Usage(cmd.error(kind, msg.into()).render().to_string())
}

fn check_n(n: usize) -> Result<(), Usage> {
    if !(2..=DENSE_QUBIT_CAP).contains(&n) {
        return Err(usage(
            ErrorKind::ValueValidation,
            format!("--n must be between 2 and {DENSE_QUBIT_CAP}, got {n}"),
        ));
    }
    Ok(())
}

fn check_p(name: &str, p: f64) -> Result<(), Usage> {
    if !(0.0..=1.0).contains(&p) {
        return Err(usage(ErrorKind::ValueValidation, format!("{name} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

fn noise_for(channel: ChannelArg, p: f64) -> Option<NoiseSpec> {
    channel
        .kind()
        .map(|kind| NoiseSpec::new(kind, p).expect("p validated"))
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Maxbell(a) => cmd_maxbell(&a, out, err),
        Command::Pmax(a) => cmd_pmax(&a, out, err),
        Command::Sweep(a) => cmd_sweep(&a, out, err),
        Command::Verify(a) => cmd_verify(&a, out, err),
    };
    match outcome {
        Ok(code) => code,
        Err(CmdError::Usage(Usage(text))) => {
            let _ = write!(err, "{text}");
            2
        }
        Err(CmdError::Failed(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

enum CmdError {
    Usage(Usage),
    Failed(String),
}

impl From<Usage> for CmdError {
    fn from(u: Usage) -> Self {
        CmdError::Usage(u)
    }
}

impl From<io::Error> for CmdError {
    fn from(e: io::Error) -> Self {
        CmdError::Failed(e.to_string())
    }
}

impl From<crate::error::Error> for CmdError {
    fn from(e: crate::error::Error) -> Self {
        CmdError::Failed(e.to_string())
    }
}

#[derive(Serialize)]
struct PartyJson {
    theta: f64,
    theta_prime: f64,
    phi: f64,
    phi_prime: f64,
}

#[derive(Serialize)]
struct MaxbellJson<'a> {
    n: usize,
    channel: &'a str,
    p: Option<f64>,
    max_bell: f64,
    settings: Vec<PartyJson>,
    converged: bool,
    seed: u64,
}

fn report_json(report: &OptimizationReport, channel: ChannelArg, seed: u64) -> MaxbellJson<'static> {
    MaxbellJson {
        n: report.n,
        channel: channel.name(),
        p: report.noise.map(|z| z.p()),
        max_bell: report.best_value,
        settings: report
            .best_settings
            .pairs()
            .iter()
            .map(|pair| PartyJson {
                theta: pair.unprimed.theta(),
                theta_prime: pair.primed.theta(),
                phi: pair.unprimed.phi(),
                phi_prime: pair.primed.phi(),
            })
            .collect(),
        converged: report.converged,
        seed,
    }
}

fn cmd_maxbell(a: &MaxbellArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CmdError> {
    check_n(a.n)?;
    let p = match (a.channel, a.p) {
        (ChannelArg::None, _) => 0.0,
        (_, Some(p)) => {
            check_p("--p", p)?;
            p
        }
        (_, None) => {
            return Err(usage(
                ErrorKind::MissingRequiredArgument,
                format!("--p is required for channel {}", a.channel.name()),
            )
            .into())
        }
    };
    let report = max_bell(a.n, noise_for(a.channel, p), &a.opt.config())?;

    if a.json {
        let json = serde_json::to_string(&report_json(&report, a.channel, a.opt.seed))
            .map_err(|e| CmdError::Failed(e.to_string()))?;
        writeln!(out, "{json}")?;
    } else {
        writeln!(out, "n {}", report.n)?;
        writeln!(out, "channel {}", a.channel.name())?;
        writeln!(out, "p {}", report.noise.map_or("-".to_string(), |z| fmt9(z.p())))?;
        writeln!(out, "best value {}", fmt9(report.best_value))?;
        writeln!(
            out,
            "converged {} ({}/{} starts)",
            report.converged, report.converged_starts, report.starts_used
        )?;
        writeln!(out, "seed {}", a.opt.seed)?;
        for (i, pair) in report.best_settings.pairs().iter().enumerate() {
            writeln!(
                out,
                "party {} theta {} phi {} theta' {} phi' {}",
                i + 1,
                fmt9(pair.unprimed.theta()),
                fmt9(pair.unprimed.phi()),
                fmt9(pair.primed.theta()),
                fmt9(pair.primed.phi()),
            )?;
        }
    }
    if !report.converged {
        writeln!(err, "error: no start reached the sweep tolerance")?;
        return Ok(1);
    }
    Ok(0)
}

fn cmd_pmax(a: &PmaxArgs, out: &mut dyn Write, _err: &mut dyn Write) -> Result<i32, CmdError> {
    check_n(a.n)?;
    let Some(kind) = a.channel.kind() else {
        return Err(usage(ErrorKind::InvalidValue, "pmax needs a noise channel, not 'none'").into());
    };
    if !(a.tol >= MIN_TOLERANCE) {
        return Err(usage(ErrorKind::ValueValidation, format!("--tol must be at least {MIN_TOLERANCE:e}")).into());
    }
    if !(a.scan_step > 0.0 && a.scan_step < 1.0) {
        return Err(usage(ErrorKind::ValueValidation, "--scan-step must lie in (0, 1)").into());
    }
    if !(a.cap > 0.0 && a.cap <= 1.0) {
        return Err(usage(ErrorKind::ValueValidation, "--cap must lie in (0, 1]").into());
    }
    let config = ThresholdConfig {
        scan_step: a.scan_step,
        cap: a.cap,
        optimizer: a.opt.config(),
        ..ThresholdConfig::default()
    };
    let result = numeric_pmax(a.n, kind, a.tol, &config)?;

    writeln!(out, "n {}", a.n)?;
    writeln!(out, "channel {}", kind)?;
    match result.p_max {
        Some(p) => writeln!(out, "numeric p_max {} (bracket width {:.3e})", fmt9(p), result.bracket_width)?,
        None => writeln!(out, "no threshold found below cap {}", result.cap)?,
    }
    match result.analytic_reference {
        Some(r) => writeln!(out, "analytic p_max {}", fmt9(r))?,
        None => writeln!(out, "analytic p_max n/a")?,
    }
    if let Some(d) = result.deviation() {
        writeln!(out, "difference {d:.3e}")?;
    }
    Ok(0)
}

/// `steps` evenly spaced points from `lo` to `hi`, both included.
pub fn sweep_points(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|k| {
            if k + 1 == steps {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (steps - 1) as f64
            }
        })
        .collect()
}

fn write_sweep(path: &Path, rows: &[[String; 4]]) -> Result<(), CmdError> {
    let file = File::create(path).map_err(|e| CmdError::Failed(format!("{}: {e}", path.display())))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file);
    let fail = |e: csv::Error| CmdError::Failed(format!("{}: {e}", path.display()));
    w.write_record(CSV_HEADER).map_err(fail)?;
    for row in rows {
        w.write_record(row).map_err(fail)?;
    }
    w.flush().map_err(|e| CmdError::Failed(format!("{}: {e}", path.display())))?;
    Ok(())
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CmdError> {
    check_n(a.n)?;
    check_p("--p-min", a.p_min)?;
    check_p("--p-max", a.p_max)?;
    if a.p_min > a.p_max {
        return Err(usage(ErrorKind::ValueValidation, "--p-min must not exceed --p-max").into());
    }
    if a.steps < 2 {
        return Err(usage(ErrorKind::ValueValidation, "--steps must be at least 2").into());
    }
    let config = a.opt.config();
    let mut rows = Vec::with_capacity(a.steps);
    for p in sweep_points(a.p_min, a.p_max, a.steps) {
        let report = max_bell(a.n, noise_for(a.channel, p), &config)?;
        if !report.converged {
            writeln!(err, "warning: no start converged at p = {}", fmt9(p))?;
        }
        rows.push([
            a.channel.name().to_string(),
            a.n.to_string(),
            fmt9(p),
            fmt9(report.best_value),
        ]);
    }
    write_sweep(&a.out, &rows)?;
    writeln!(out, "wrote {} rows to {}", rows.len(), a.out.display())?;
    Ok(0)
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write, _err: &mut dyn Write) -> Result<i32, CmdError> {
    if !(2..=DENSE_QUBIT_CAP).contains(&a.n_max) {
        return Err(usage(
            ErrorKind::ValueValidation,
            format!("--n-max must be between 2 and {DENSE_QUBIT_CAP}"),
        )
        .into());
    }
    let summary = run_verify(&VerifyConfig {
        n_max: a.n_max,
        trials: a.trials,
        seed: a.seed,
    })?;
    writeln!(
        out,
        "correlations: {} comparisons, max deviation {:.3e}",
        summary.correlation_comparisons, summary.max_correlation_deviation
    )?;
    writeln!(
        out,
        "states: {} comparisons, max deviation {:.3e}",
        summary.matrix_comparisons, summary.max_matrix_deviation
    )?;
    if summary.passed() {
        writeln!(out, "max correlation deviation < {CORRELATION_TOL:e}, max state deviation < {MATRIX_TOL:e}, PASS")?;
        return Ok(0);
    }
    for b in &summary.breaches {
        let what = match b.check {
            Check::Correlation => "correlation",
            Check::Matrix => "state",
        };
        let seed = b.settings_seed.map_or("-".to_string(), |s| s.to_string());
        writeln!(
            out,
            "breach {what}: n={} channel={} p={} settings-seed={} deviation={:.3e}",
            b.n,
            b.channel.map_or("none", NoiseKind::name),
            b.p,
            seed,
            b.deviation
        )?;
    }
    writeln!(out, "FAIL")?;
    Ok(1)
}
