//! Command-line front end.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 numerical error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use epitrigger_core::{
    daily_prevalence, detection_time, naive_phase, run_scenario, sir_final_size_oracle, DailyTests,
    ScenarioError, SurveillanceParams, SweepPlan, TriggerSpec, DEFAULT_NONMONOTONIC_TOLERANCE,
};

use crate::config::{parse_config, ConfigDocument};
use crate::output::{sweep_document, trajectory_document};
use crate::parallel::run_sweep_parallel;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "epitrigger",
    version,
    about = "Surveillance-triggered epidemic scenarios"
)]
struct Cli {
    /// Accepted for compatibility; every run is deterministic.
    #[arg(long, global = true)]
    seedless: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write its trajectory.
    Run(RunArgs),
    /// Evaluate the sweep grid defined in the config.
    Sweep(SweepArgs),
    /// Print the day-by-day detection table of the untriggered outbreak.
    Detect(DetectArgs),
    /// Print SIR final sizes for a list of R0 values.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
struct Io {
    #[arg(long)]
    config: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    io: Io,
    /// Keep every k-th integrator step in the output.
    #[arg(long)]
    stride: Option<usize>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    io: Io,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[command(flatten)]
    io: Io,
    /// Tests per day; overrides trigger.daily_tests.
    #[arg(long)]
    daily_tests: Option<f64>,
    /// Overrides trigger.confidence.
    #[arg(long)]
    confidence: Option<f64>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    r0: Vec<f64>,
    /// Initial susceptible fraction.
    #[arg(long, default_value_t = 1.0)]
    s0: f64,
    /// Initial recovered fraction.
    #[arg(long, default_value_t = 0.0)]
    r_init: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn config(message: impl ToString) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message: message.to_string(),
        }
    }

    fn scenario(e: ScenarioError) -> Self {
        Failure {
            code: if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_CONFIG
            },
            message: e.to_string(),
        }
    }
}

fn load(path: &Path) -> Result<ConfigDocument, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, document: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, document)
            .map_err(|e| Failure::config(format!("{}: {e}", p.display()))),
        None => stdout
            .write_all(document.as_bytes())
            .map_err(|e| Failure::config(e.to_string())),
    }
}

fn cmd_run(args: RunArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let mut doc = load(&args.io.config)?;
    if let Some(stride) = args.stride {
        doc.scenario.integrator.stride = stride;
        doc.scenario
            .integrator
            .validate()
            .map_err(Failure::config)?;
    }
    let result = run_scenario(&doc.scenario).map_err(Failure::scenario)?;
    let document = trajectory_document(&result, &doc.metadata());
    emit(args.io.out.as_deref(), &document, stdout)
}

fn cmd_sweep(args: SweepArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let doc = load(&args.io.config)?;
    if doc.axes.is_empty() {
        return Err(Failure::config(
            "config defines no sweep axes (sweep.axis1.*)",
        ));
    }
    if args.workers == 0 {
        return Err(Failure::config("--workers must be at least 1"));
    }
    let plan = SweepPlan::new(doc.scenario.clone(), &doc.axes).map_err(Failure::config)?;
    let result = run_sweep_parallel(&plan, args.workers).map_err(Failure::config)?;
    let mut meta = doc.metadata();
    meta.push(format!(
        "sweep.nonmonotonic_tolerance = {DEFAULT_NONMONOTONIC_TOLERANCE}"
    ));
    let failed = result.cells.iter().filter(|c| c.is_err()).count();
    meta.push(format!("sweep.failed_cells = {failed}"));
    emit(
        args.io.out.as_deref(),
        &sweep_document(&result, &meta),
        stdout,
    )
}

fn cmd_detect(args: DetectArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let doc = load(&args.io.config)?;
    let mut params = match &doc.scenario.trigger {
        TriggerSpec::SurveillanceEffort(p) => p.clone(),
        TriggerSpec::PrevalenceThreshold { .. } => SurveillanceParams::constant(100.0),
    };
    if let Some(n) = args.daily_tests {
        params.daily_tests = DailyTests::Constant(n);
    }
    if let Some(c) = args.confidence {
        params.confidence = c;
    }
    params.validate().map_err(Failure::config)?;
    let naive = naive_phase(&doc.scenario).map_err(Failure::scenario)?;
    let prevalence = daily_prevalence(&naive);
    let detection = detection_time(&prevalence, &params).map_err(|e| Failure {
        code: EXIT_NUMERICAL,
        message: e.to_string(),
    })?;

    let mut out = String::new();
    for line in doc.metadata() {
        let _ = writeln!(out, "# {line}");
    }
    let tests = match &params.daily_tests {
        DailyTests::Constant(n) => format!("{n}"),
        DailyTests::PerDay(v) => format!("{} per-day values", v.len()),
    };
    let _ = writeln!(out, "# detect.daily_tests = {tests}");
    let _ = writeln!(out, "# detect.confidence = {}", params.confidence);
    let day = detection
        .detection_day
        .map(|d| d.to_string())
        .unwrap_or_default();
    let _ = writeln!(out, "# detect.detection_day = {day}");
    let pstar = detection
        .prevalence_at_detection
        .map(|p| format!("{p:.15e}"))
        .unwrap_or_default();
    let _ = writeln!(out, "# detect.prevalence_at_detection = {pstar}");
    out.push_str("day,prevalence,cumulative_probability\n");
    for (k, (p, c)) in prevalence
        .iter()
        .zip(&detection.cumulative_probability)
        .enumerate()
    {
        let _ = writeln!(out, "{},{p:.15e},{c:.15e}", k + 1);
    }
    emit(args.io.out.as_deref(), &out, stdout)
}

fn cmd_oracle(args: OracleArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    if !(0.0..=1.0).contains(&args.s0) || !(0.0..=1.0).contains(&args.r_init) {
        return Err(Failure::config("--s0 and --r-init must lie in [0, 1]"));
    }
    let mut out = format!(
        "# oracle.s0 = {}\n# oracle.r_init = {}\n",
        args.s0, args.r_init
    );
    out.push_str("r0,final_size\n");
    for r0 in args.r0 {
        if !(r0 >= 0.0 && r0.is_finite()) {
            return Err(Failure::config(format!(
                "r0 = {r0} violates constraint \"r0 ≥ 0\""
            )));
        }
        let z = sir_final_size_oracle(r0, args.s0, args.r_init);
        let _ = writeln!(out, "{r0:.15e},{z:.15e}");
    }
    emit(args.out.as_deref(), &out, stdout)
}

/// Runs the CLI with explicit output streams.
pub fn run_cli<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a, stdout),
        Command::Sweep(a) => cmd_sweep(a, stdout),
        Command::Detect(a) => cmd_detect(a, stdout),
        Command::Oracle(a) => cmd_oracle(a, stdout),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli(argv, &mut stdout.lock(), &mut stderr.lock())
}
