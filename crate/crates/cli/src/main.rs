mod config;
mod error;
mod run;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_config, CommandKind, RawConfig};
use error::CliError;

/// Mean-field, Liouvillian and cat-qubit studies of the open quantum Rabi
/// model with two-photon relaxation.
#[derive(Parser, Debug)]
#[command(name = "rabi2p", version, about, allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stable fixed point over a g or h grid.
    MeanfieldSweep(Flags),
    /// Mean-field trajectories from a ring of initial conditions.
    Portrait(Flags),
    /// Liouvillian gap, degeneracy and photon ratio over g and zeta.
    GapSweep(Flags),
    /// Steady-state photon ratio over g and zeta.
    PhotonSweep(Flags),
    /// One run of the cat-qubit error-correction protocol.
    CatProtocol(Flags),
    /// Error-correction protocol over g_err and zeta.
    CatSweep(Flags),
}

#[derive(Args, Debug, Default)]
#[command(allow_negative_numbers = true)]
struct Flags {
    /// Output directory [default: runs/<command>]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat key = value file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads [default: available processors]
    #[arg(long)]
    parallel: Option<String>,
    #[arg(long)]
    g_min: Option<String>,
    #[arg(long)]
    g_max: Option<String>,
    #[arg(long)]
    g_steps: Option<String>,
    /// Fixed coupling, or a comma list of them for an h sweep
    #[arg(long)]
    g: Option<String>,
    /// Decay rate, or a comma list for a g sweep
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    h_min: Option<String>,
    #[arg(long)]
    h_max: Option<String>,
    #[arg(long)]
    h_steps: Option<String>,
    /// Swept variable of meanfield-sweep: g or h
    #[arg(long)]
    axis: Option<String>,
    #[arg(long)]
    eta: Option<String>,
    /// One value or a comma list
    #[arg(long)]
    zeta: Option<String>,
    #[arg(long)]
    fock_dim: Option<String>,
    #[arg(long)]
    g_target: Option<String>,
    #[arg(long)]
    g_err: Option<String>,
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    t_corr: Option<String>,
    /// Even-cat coefficient, e.g. 0.6 or 0.6+0.2i
    #[arg(long)]
    ce: Option<String>,
    /// Odd-cat coefficient
    #[arg(long)]
    co: Option<String>,
    /// Double t_corr until the fidelity settles
    #[arg(long)]
    asymptotic: bool,
    #[arg(long)]
    t_max: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    /// Number of initial conditions on the ring
    #[arg(long)]
    initial: Option<String>,
    #[arg(long)]
    radius: Option<String>,
    #[arg(long)]
    seed: Option<String>,
}

impl Flags {
    fn raw(&self) -> RawConfig {
        let mut r = RawConfig::default();
        if let Some(out) = &self.out {
            r.set("out", out.to_string_lossy());
        }
        if self.asymptotic {
            r.set("asymptotic", "true");
        }
        let pairs = [
            ("parallel", &self.parallel),
            ("g_min", &self.g_min),
            ("g_max", &self.g_max),
            ("g_steps", &self.g_steps),
            ("g", &self.g),
            ("h", &self.h),
            ("h_min", &self.h_min),
            ("h_max", &self.h_max),
            ("h_steps", &self.h_steps),
            ("axis", &self.axis),
            ("eta", &self.eta),
            ("zeta", &self.zeta),
            ("fock_dim", &self.fock_dim),
            ("g_target", &self.g_target),
            ("g_err", &self.g_err),
            ("tau", &self.tau),
            ("t_corr", &self.t_corr),
            ("ce", &self.ce),
            ("co", &self.co),
            ("t_max", &self.t_max),
            ("samples", &self.samples),
            ("initial", &self.initial),
            ("radius", &self.radius),
            ("seed", &self.seed),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                r.set(k, v.clone());
            }
        }
        r
    }
}

fn execute(kind: CommandKind, flags: &Flags) -> Result<(), CliError> {
    let file = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            Some(RawConfig::parse(&text)?)
        }
        None => None,
    };
    let config = parse_config(kind, file, flags.raw())?;
    let manifest = run::run(&config)?;
    println!("{}: {} rows written to {}", kind.name(), manifest.rows, config.output_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (kind, flags) = match &cli.command {
        Command::MeanfieldSweep(f) => (CommandKind::MeanfieldSweep, f),
        Command::Portrait(f) => (CommandKind::Portrait, f),
        Command::GapSweep(f) => (CommandKind::GapSweep, f),
        Command::PhotonSweep(f) => (CommandKind::PhotonSweep, f),
        Command::CatProtocol(f) => (CommandKind::CatProtocol, f),
        Command::CatSweep(f) => (CommandKind::CatSweep, f),
    };
    match execute(kind, flags) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rabi2p: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
