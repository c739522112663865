use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::{error, info};

mod commands;
mod config;
mod error;
mod output;

use config::{InterfaceKind, MorphologyKind, Overrides, ScenarioConfig};
use error::CliError;

/// Fractional diffusion in binary media: convergence studies, layered
/// comparisons and effective diffusivity tensors.
#[derive(Debug, Parser)]
#[command(name = "subdiff", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario TOML; relative paths inside it are resolved from its directory.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Mesh file (repeat for a convergence sequence, coarse to fine).
    #[arg(long, global = true)]
    mesh: Vec<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// Time order of the inclusion (or of the single phase in `convergence`).
    #[arg(long, global = true)]
    gamma1: Option<f64>,
    /// Time order of the matrix.
    #[arg(long, global = true)]
    gamma2: Option<f64>,
    /// Inclusion to matrix diffusivity ratio.
    #[arg(long, global = true)]
    ratio: Option<f64>,
    /// Memory order `1 - gamma` of the inclusion (solid phase for `wood`).
    #[arg(long, global = true)]
    alpha1: Option<f64>,
    #[arg(long, global = true, value_enum)]
    morphology: Option<MorphologyArg>,
    #[arg(long, global = true, value_enum)]
    interface: Option<InterfaceArg>,
    #[arg(long, global = true)]
    steady_tol: Option<f64>,
    #[arg(long, global = true)]
    max_steps: Option<usize>,
    /// Write the cell fields as legacy VTK (`homogenize`).
    #[arg(long, global = true)]
    vtk: bool,
    /// Compare against the config's `expect` block; exit 5 on mismatch.
    #[arg(long, global = true)]
    check: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Spatial convergence on the manufactured problem.
    Convergence,
    /// Strip cell against the semi-analytical layered solution.
    Layered,
    /// Effective diffusivity tensor from periodic cell problems.
    Homogenize,
    /// Effective moisture diffusivity of a wood cell.
    Wood,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MorphologyArg {
    Rect,
    Circle,
    Lshape,
    Tagged,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InterfaceArg {
    Rl,
    Classical,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            meshes: self.mesh.clone(),
            tau: self.tau,
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            ratio: self.ratio,
            alpha1: self.alpha1,
            morphology: self.morphology.map(|m| match m {
                MorphologyArg::Rect => MorphologyKind::Rect,
                MorphologyArg::Circle => MorphologyKind::Circle,
                MorphologyArg::Lshape => MorphologyKind::Lshape,
                MorphologyArg::Tagged => MorphologyKind::Tagged,
            }),
            interface: self.interface.map(|i| match i {
                InterfaceArg::Rl => InterfaceKind::Rl,
                InterfaceArg::Classical => InterfaceKind::Classical,
            }),
            steady_tol: self.steady_tol,
            max_steps: self.max_steps,
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    };
    cfg.apply(&cli.overrides());
    if cli.vtk {
        cfg.homogenize.vtk = true;
    }
    std::fs::create_dir_all(&cli.out)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", cli.out.display())))?;
    let outcome = match cli.command {
        Command::Convergence => commands::convergence(&cfg.convergence, &cli.out)?,
        Command::Layered => commands::layered(&cfg.layered, &cli.out)?,
        Command::Homogenize => commands::homogenize(&cfg.homogenize, &cli.out)?,
        Command::Wood => commands::wood(&cfg.wood, &cli.out)?,
    };
    println!("{}", serde_json::to_string_pretty(&outcome.summary)?);
    info!("results written to {}", cli.out.display());
    if cli.check {
        if outcome.failures.is_empty() {
            info!("all checks passed");
        } else {
            return Err(CliError::Check(outcome.failures.join("; ")));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
