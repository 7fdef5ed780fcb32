//! `bbm`: simulations, convergence studies and operator checks for the
//! BBM equation on the torus.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use settings::Settings;

#[derive(Parser, Debug)]
#[command(name = "bbm", version, about = "Splitting schemes for the BBM equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Flat `key = value` file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Scheme name, or a comma-separated list for `convergence`.
    #[arg(long, global = true)]
    scheme: Option<String>,
    /// ε value or comma-separated list.
    #[arg(long, global = true)]
    epsilon: Option<String>,
    /// Step size or comma-separated list.
    #[arg(long, global = true)]
    tau: Option<String>,
    /// Grid points (default 200).
    #[arg(long, global = true)]
    modes: Option<String>,
    /// Final time (default 5).
    #[arg(long, global = true)]
    time: Option<String>,
    /// Sobolev index of auxiliary norms.
    #[arg(long = "norm-r", global = true)]
    norm_r: Option<String>,
    /// Output directory or file.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Comma-separated output formats: csv, json, plotdata.
    #[arg(long, global = true)]
    format: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Apply the 2/3 rule after products.
    #[arg(long, global = true)]
    dealias: bool,
    /// Record wall-clock time per study cell (reports stop being reproducible).
    #[arg(long, global = true)]
    timings: bool,
    /// Initial datum: bump or sine.
    #[arg(long, global = true)]
    datum: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one trajectory and export snapshots as CSV.
    Simulate {
        /// Steps between snapshots.
        #[arg(long)]
        stride: Option<String>,
    },
    /// Error against the adaptive reference over a (scheme, ε, τ) grid.
    Convergence {
        /// Reference solver tolerance.
        #[arg(long)]
        tol: Option<String>,
    },
    /// Distance between BBM and KdV solutions as ε shrinks.
    KdvLimit,
    /// Randomized check of the operator inequalities.
    Lemmas {
        #[arg(long)]
        sigma: Option<String>,
        /// Time argument of the linear-flow increment inequality.
        #[arg(long = "flow-time")]
        flow_time: Option<String>,
        #[arg(long)]
        trials: Option<String>,
        /// Sobolev weight: bessel (1+k²)^r or shifted (1+|k|)^{2r}.
        #[arg(long)]
        weight: Option<String>,
    },
    /// Local order of the Taylor nonlinear flows against an exact subflow.
    LocalOrder {
        /// Taylor orders, comma-separated.
        #[arg(long)]
        order: Option<String>,
        /// Oracle tolerance.
        #[arg(long)]
        tol: Option<String>,
    },
}

/// Failure classes, mapped onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "invalid configuration: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<bbm_core::Error> for Failure {
    fn from(e: bbm_core::Error) -> Self {
        use bbm_core::Error;
        match e {
            Error::BlowUp { .. } | Error::ConvergenceFailure { .. } | Error::InsufficientData(_) => {
                Failure::Numerical(e.to_string())
            }
            Error::InvalidArgument(_) | Error::Io(_) | Error::Json(_) => Failure::Config(e.to_string()),
        }
    }
}

fn settings(cli: &Cli) -> Result<Settings, Failure> {
    let c = &cli.common;
    let mut s = match &c.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    let mut overrides: Vec<(&str, Option<&String>)> = vec![
        ("scheme", c.scheme.as_ref()),
        ("epsilon", c.epsilon.as_ref()),
        ("tau", c.tau.as_ref()),
        ("modes", c.modes.as_ref()),
        ("time", c.time.as_ref()),
        ("norm-r", c.norm_r.as_ref()),
        ("out", c.out.as_ref()),
        ("format", c.format.as_ref()),
        ("seed", c.seed.as_ref()),
        ("datum", c.datum.as_ref()),
    ];
    match &cli.command {
        Command::Simulate { stride } => overrides.push(("stride", stride.as_ref())),
        Command::Convergence { tol } => overrides.push(("tol", tol.as_ref())),
        Command::KdvLimit => {}
        Command::Lemmas {
            sigma,
            flow_time,
            trials,
            weight,
        } => overrides.extend([
            ("sigma", sigma.as_ref()),
            ("flow-time", flow_time.as_ref()),
            ("trials", trials.as_ref()),
            ("weight", weight.as_ref()),
        ]),
        Command::LocalOrder { order, tol } => {
            overrides.extend([("order", order.as_ref()), ("tol", tol.as_ref())])
        }
    }
    for (key, value) in overrides {
        if let Some(v) = value {
            s.set(key, v)?;
        }
    }
    if c.dealias {
        s.set("dealias", "true")?;
    }
    if c.timings {
        s.set("timings", "true")?;
    }
    Ok(s)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let s = settings(cli)?;
    match cli.command {
        Command::Simulate { .. } => commands::simulate(&s),
        Command::Convergence { .. } => commands::convergence(&s),
        Command::KdvLimit => commands::kdv_limit(&s),
        Command::Lemmas { .. } => commands::lemmas(&s),
        Command::LocalOrder { .. } => commands::local_order(&s),
    }
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
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("bbm: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
