//! Command-line front end for the two-facility welfare solver.
//!
//! [`run_with`] is the whole program; `main` only binds it to the process
//! streams. Exit codes: 0 on success, 1 when a verification fails or output
//! cannot be written, 2 on usage errors.

pub mod records;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hotelling_core::{
    candidate_stationary, detect_threshold, solve, sweep_theta, verify_lemma_boundary,
    verify_remark, verify_remark_grid, verify_theorem1, verify_theorem2, Preferences, SolveOptions,
    VerificationResult,
};
use serde::Serialize;

use records::*;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "hotelling",
    version,
    about = "Welfare-maximizing placement of two public facilities on [0, 1]"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the optimal configuration at one theta
    Solve(SolveArgs),
    /// Check a closed-form claim against the numerical oracle
    Verify(VerifyArgs),
    /// Solve over an evenly spaced theta grid
    Sweep(SweepArgs),
    /// Bisect for the theta where the optimal regime changes
    Threshold(ThresholdArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClaimArg {
    Theorem1,
    Theorem2,
    Remark,
    Lemma,
}

#[derive(Debug, Args)]
struct Output {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Search {
    /// Lattice points per axis
    #[arg(long, default_value_t = 201)]
    resolution: usize,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long, allow_negative_numbers = true)]
    theta: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    gamma: f64,
    #[command(flatten)]
    search: Search,
    /// Refinement tolerance
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    claim: ClaimArg,
    #[arg(long, allow_negative_numbers = true)]
    theta: f64,
    /// Defaults to the claim's own gamma, or 1 for remark and lemma
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[command(flatten)]
    search: Search,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Remark: check a single location instead of a grid
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Remark: grid points over [0, 1]
    #[arg(long, default_value_t = 101)]
    points: usize,
    /// Lemma: boundary configurations to sample
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Lemma: sampling seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, allow_negative_numbers = true)]
    theta_min: f64,
    #[arg(long, allow_negative_numbers = true)]
    theta_max: f64,
    #[arg(long)]
    steps: usize,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    gamma: f64,
    #[command(flatten)]
    search: Search,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    gamma: f64,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], required = true)]
    bracket: Vec<f64>,
    /// Width of the final bracket
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[command(flatten)]
    search: Search,
    #[command(flatten)]
    output: Output,
}

/// What a command produced, before formatting.
enum Outcome {
    Done(String),
    Verified { text: String, passed: bool },
}

enum Failure {
    Usage(String),
    Io(String),
}

impl From<hotelling_core::Error> for Failure {
    fn from(e: hotelling_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit code.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };

    let (outcome, out) = match dispatch(&cli.command) {
        Ok(v) => v,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_USAGE;
        }
        Err(Failure::Io(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_FAILED;
        }
    };
    let (text, passed) = match outcome {
        Outcome::Done(text) => (text, true),
        Outcome::Verified { text, passed } => (text, passed),
    };
    let written = match out {
        Some(path) => {
            fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        let _ = writeln!(stderr, "error: {msg}");
        return EXIT_FAILED;
    }
    if passed {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}

fn dispatch(command: &Command) -> Result<(Outcome, Option<&PathBuf>), Failure> {
    match command {
        Command::Solve(args) => Ok((run_solve(args)?, args.output.out.as_ref())),
        Command::Verify(args) => Ok((run_verify(args)?, args.output.out.as_ref())),
        Command::Sweep(args) => Ok((run_sweep(args)?, args.output.out.as_ref())),
        Command::Threshold(args) => Ok((run_threshold(args)?, args.output.out.as_ref())),
    }
}

fn options(search: &Search, tol: f64) -> SolveOptions {
    SolveOptions {
        resolution: search.resolution,
        tol,
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("records serialize");
    s.push('\n');
    s
}

fn csv<T: Serialize>(records: &[T]) -> Result<String, Failure> {
    let mut buf = Vec::new();
    write_csv(&mut buf, records).map_err(|e| Failure::Io(e.to_string()))?;
    String::from_utf8(buf).map_err(|e| Failure::Io(e.to_string()))
}

fn envelope<P, R, D>(command: &str, params: P, result: R, diagnostics: D) -> Envelope<P, R, D> {
    Envelope {
        command: command.to_string(),
        params,
        result,
        diagnostics,
    }
}

fn run_solve(args: &SolveArgs) -> Result<Outcome, Failure> {
    let prefs = Preferences::new(args.theta, args.gamma)?;
    let report = solve(&prefs, &options(&args.search, args.tol))?;
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Csv => csv(&solve_rows(&report))?,
        Format::Json => {
            // only gamma = 1 and gamma = 1/2 have closed-form candidates
            let candidates = candidate_stationary(&prefs).unwrap_or_default();
            json(&envelope(
                "solve",
                SolveParams {
                    theta: args.theta,
                    gamma: args.gamma,
                    resolution: args.search.resolution,
                    tol: args.tol,
                },
                SolveResult::new(&report, &candidates),
                SolveDiagnostics::from(&report),
            ))
        }
    };
    Ok(Outcome::Done(text))
}

fn claim_gamma(args: &VerifyArgs) -> Result<f64, Failure> {
    let fixed = match args.claim {
        ClaimArg::Theorem1 => Some(1.0),
        ClaimArg::Theorem2 => Some(0.5),
        ClaimArg::Remark | ClaimArg::Lemma => None,
    };
    match (fixed, args.gamma) {
        (Some(f), Some(g)) if f != g => Err(Failure::Usage(format!(
            "{} is stated for gamma = {f}, got --gamma {g}",
            claim_name(args.claim)
        ))),
        (Some(f), _) => Ok(f),
        (None, g) => Ok(g.unwrap_or(1.0)),
    }
}

fn claim_name(claim: ClaimArg) -> &'static str {
    match claim {
        ClaimArg::Theorem1 => "theorem1",
        ClaimArg::Theorem2 => "theorem2",
        ClaimArg::Remark => "remark",
        ClaimArg::Lemma => "lemma",
    }
}

fn run_verify(args: &VerifyArgs) -> Result<Outcome, Failure> {
    let gamma = claim_gamma(args)?;
    let prefs = Preferences::new(args.theta, gamma)?;
    let opts = options(&args.search, args.tol);
    let mut params = VerifyParams {
        claim: claim_name(args.claim).to_string(),
        theta: args.theta,
        gamma,
        resolution: args.search.resolution,
        tol: args.tol,
        a: None,
        points: None,
        samples: None,
        seed: None,
    };
    let result = match args.claim {
        ClaimArg::Theorem1 => verify_theorem1(args.theta, &opts)?,
        ClaimArg::Theorem2 => verify_theorem2(args.theta, &opts)?,
        ClaimArg::Remark => match args.a {
            Some(a) => {
                params.a = Some(a);
                verify_remark(a, &prefs)?
            }
            None => {
                params.points = Some(args.points);
                verify_remark_grid(&prefs, args.points)?
            }
        },
        ClaimArg::Lemma => {
            params.samples = Some(args.samples);
            params.seed = Some(args.seed);
            verify_lemma_boundary(&prefs, args.samples, args.seed, &opts)?
        }
    };
    let text = match args.output.format {
        None => summary_line(&result),
        Some(Format::Json) => json(&envelope(
            "verify",
            params,
            VerifyResult::from(&result),
            VerifyDiagnostics::from(&result),
        )),
        Some(Format::Csv) => csv(&VerifyDiagnostics::from(&result).checks)?,
    };
    Ok(Outcome::Verified {
        text,
        passed: result.passed,
    })
}

fn summary_line(r: &VerificationResult) -> String {
    format!(
        "{} theta={} gamma={}: {} (max discrepancy {:e}, tolerance {:e}, {} checks)\n",
        r.claim,
        r.theta,
        r.gamma,
        if r.passed { "PASSED" } else { "FAILED" },
        round_sig(r.max_discrepancy),
        r.tolerance,
        r.checks.len()
    )
}

fn run_sweep(args: &SweepArgs) -> Result<Outcome, Failure> {
    let rows = sweep_theta(
        args.theta_min,
        args.theta_max,
        args.steps,
        args.gamma,
        &options(&args.search, args.tol),
    )?;
    let records: Vec<SweepRecord> = rows.iter().map(SweepRecord::from).collect();
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Csv => csv(&records)?,
        Format::Json => json(&envelope(
            "sweep",
            SweepParams {
                theta_min: args.theta_min,
                theta_max: args.theta_max,
                steps: args.steps,
                gamma: args.gamma,
                resolution: args.search.resolution,
                tol: args.tol,
            },
            SweepResult { rows: records },
            Empty {},
        )),
    };
    Ok(Outcome::Done(text))
}

fn run_threshold(args: &ThresholdArgs) -> Result<Outcome, Failure> {
    let bracket = (args.bracket[0], args.bracket[1]);
    let opts = options(&args.search, hotelling_core::optimize::DEFAULT_TOL);
    let t = detect_threshold(args.gamma, bracket, args.tol, &opts)?;
    let record = ThresholdRecord::from(&t);
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Csv => csv(&[record])?,
        Format::Json => json(&envelope(
            "threshold",
            ThresholdParams {
                gamma: args.gamma,
                bracket: [bracket.0, bracket.1],
                tol: args.tol,
                resolution: args.search.resolution,
            },
            record,
            Empty {},
        )),
    };
    Ok(Outcome::Done(text))
}
