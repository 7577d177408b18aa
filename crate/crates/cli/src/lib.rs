//! Command-line runner for the qcmod experiments.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 numerical or
//! runtime failure (including a failed fatal verdict).

pub mod config;
pub mod dispatch;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use qcmod::lab::ExperimentResult;

use config::{ConfigError, ConfigIssue, Experiment, Format, GaugeConfig, RawConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "qcmod",
    version,
    about = "Quasicentral modulus experiments on generalized Cantor sets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Property (R) checks and regular-variation deviations of a gauge
    GaugeCheck(CommonArgs),
    /// Cell corners, sides and measures of one generation
    CantorExport(CommonArgs),
    /// The weight sequence rho_k = h'(k) with its window values
    Rho(CommonArgs),
    /// Upper-estimate curve U(L) of the commutator norms
    KUpper(CommonArgs),
    /// kappa^+ across model depths
    Kappa(CommonArgs),
    /// Ampliation homogeneity |X (x) I_m| against m^(1/s) |X|
    Ampliation(CommonArgs),
    /// Sub-cube scaling of U(w, d)
    Scaling(CommonArgs),
    /// U(omega) / H_f(omega)^(1/s) over unions of cells
    SmallSet(CommonArgs),
    /// Decay of U along shrinking and fragmented families
    SingularDemo(CommonArgs),
    /// Shift gap |X|_pi - |X|_{S^t pi}
    ShiftCheck(CommonArgs),
    /// Run the experiment named in the config file
    Run(CommonArgs),
}

impl Command {
    fn parts(&self) -> (Option<Experiment>, &CommonArgs) {
        use Command::*;
        match self {
            GaugeCheck(a) => (Some(Experiment::GaugeCheck), a),
            CantorExport(a) => (Some(Experiment::CantorExport), a),
            Rho(a) => (Some(Experiment::Rho), a),
            KUpper(a) => (Some(Experiment::KUpper), a),
            Kappa(a) => (Some(Experiment::Kappa), a),
            Ampliation(a) => (Some(Experiment::Ampliation), a),
            Scaling(a) => (Some(Experiment::Scaling), a),
            SmallSet(a) => (Some(Experiment::SmallSet), a),
            SingularDemo(a) => (Some(Experiment::SingularDemo), a),
            ShiftCheck(a) => (Some(Experiment::ShiftCheck), a),
            Run(a) => (None, a),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON run configuration
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory [default: qcmod-out]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Which files to write [default: both]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; 0 or unset uses all cores. Never changes the output.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Reserved; every computation is deterministic
    #[arg(long)]
    pub seed: Option<u64>,
    /// Gauge, e.g. power:1.5, example37 or power_log:1:0.5
    #[arg(long)]
    pub gauge: Option<String>,
    /// Ambient dimension override
    #[arg(long)]
    pub n: Option<usize>,
    /// Model depth M
    #[arg(long)]
    pub depth: Option<usize>,
}

fn load(
    experiment: Option<Experiment>,
    args: &CommonArgs,
) -> Result<(config::RunConfig, RawConfig), ConfigError> {
    let mut raw = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))?;
            config::parse_raw(&text)?
        }
        None => RawConfig::default(),
    };
    if let Some(exp) = experiment {
        match raw.experiment.as_deref() {
            Some(id) if id != exp.id() => {
                return Err(ConfigError::Invalid(vec![ConfigIssue {
                    path: "experiment".into(),
                    message: format!("config names {id:?} but the subcommand is {exp}"),
                }]))
            }
            _ => raw.experiment = Some(exp.id().to_string()),
        }
    }
    if let Some(g) = &args.gauge {
        raw.gauge = Some(GaugeConfig::parse_flag(g).map_err(|message| {
            ConfigError::Invalid(vec![ConfigIssue {
                path: "--gauge".into(),
                message,
            }])
        })?);
    }
    if args.n.is_some() {
        raw.n = args.n;
    }
    if args.depth.is_some() {
        raw.depth = args.depth;
    }
    let resolved = raw.clone().resolve()?;
    Ok((resolved, raw))
}

/// Runs one parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let (experiment, args) = cli.command.parts();
    let (config, raw) = match load(experiment, args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let output = raw.output.unwrap_or_default();
    let dir = args
        .out
        .clone()
        .or(output.dir.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("qcmod-out"));
    let format = args.format.or(output.format).unwrap_or(Format::Both);

    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return EXIT_RUNTIME;
        }
    };
    let started = Instant::now();
    let outcome = match pool.install(|| dispatch::dispatch(&config)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {} failed: {e}", config.experiment);
            return EXIT_RUNTIME;
        }
    };
    let elapsed = started.elapsed();
    let written = match output::write_outputs(&outcome, &dir, format) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: writing outputs to {}: {e}", dir.display());
            return EXIT_RUNTIME;
        }
    };
    for v in &outcome.result.verdicts {
        let tag = match (v.pass, v.fatal) {
            (true, _) => "ok",
            (false, true) => "FAIL",
            (false, false) => "warn",
        };
        eprintln!(
            "[{tag}] {}: measured {:e}, tolerance {:e}",
            v.invariant, v.measured, v.tolerance
        );
    }
    for path in &written {
        eprintln!("wrote {}", path.display());
    }
    eprintln!(
        "{} finished in {:.3} s",
        config.experiment,
        elapsed.as_secs_f64()
    );
    verdict_exit_code(&outcome.result)
}

fn verdict_exit_code(result: &ExperimentResult) -> i32 {
    let failures = result.fatal_failures();
    if failures.is_empty() {
        EXIT_OK
    } else {
        let names: Vec<&str> = failures.iter().map(|v| v.invariant.as_str()).collect();
        eprintln!("error: failed invariants: {}", names.join(", "));
        EXIT_RUNTIME
    }
}

/// Parses arguments and runs; usage errors map to exit code 1.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}
