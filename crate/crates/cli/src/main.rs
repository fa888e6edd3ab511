use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod selftest;

/// Spin dynamics under chirped RF pulses.
#[derive(Parser)]
#[command(name = "chirpdyn", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for CSV, JSON and SVG output; created if missing.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the configured pulse sequence.
    Waveform {
        #[arg(long)]
        config: PathBuf,
        /// CSV destination.
        #[arg(long)]
        out: PathBuf,
        /// Optional SVG plot of the waveform.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run one of the dynamics engines.
    Simulate {
        #[command(subcommand)]
        engine: Engine,
    },
    /// Run a worked experiment.
    Demo {
        experiment: Experiment,
        #[command(flatten)]
        args: ConfigArgs,
    },
    /// Parameter optimisation.
    Optimize {
        #[command(subcommand)]
        target: OptimizeTarget,
    },
    /// Robustness maps.
    Map {
        #[command(subcommand)]
        target: MapTarget,
    },
    /// Cross-check the engines against each other and the exponential oracle.
    Selftest,
}

#[derive(Subcommand)]
enum Engine {
    /// Coefficient dynamics (one spin, two spins, or a gradient ensemble).
    Lvn(ConfigArgs),
    /// Factorized single-spin propagator and Bloch trajectory.
    Wn(ConfigArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    Zq,
    Psyche,
    Composite,
    Chorus,
}

#[derive(Subcommand)]
enum OptimizeTarget {
    /// Flatten the CHORUS phase over the central band.
    ChorusPhase(ConfigArgs),
}

#[derive(Subcommand)]
enum MapTarget {
    /// CHORUS c2 against offset and RF amplitude scale.
    B1(ConfigArgs),
}

fn exit_code(err: &chirpdyn::Error) -> u8 {
    if err.is_numerical() || matches!(err, chirpdyn::Error::EmptyResult(_)) {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Waveform { config, out, svg } => commands::waveform(&config, &out, svg.as_deref()),
        Command::Simulate { engine } => match engine {
            Engine::Lvn(a) => commands::simulate_lvn(&a.config, &a.out_dir),
            Engine::Wn(a) => commands::simulate_wn(&a.config, &a.out_dir),
        },
        Command::Demo { experiment, args } => match experiment {
            Experiment::Zq => commands::demo_zq(&args.config, &args.out_dir),
            Experiment::Psyche => commands::demo_psyche(&args.config, &args.out_dir),
            Experiment::Composite => commands::demo_composite(&args.config, &args.out_dir),
            Experiment::Chorus => commands::demo_chorus(&args.config, &args.out_dir),
        },
        Command::Optimize {
            target: OptimizeTarget::ChorusPhase(a),
        } => commands::optimize_chorus(&a.config, &a.out_dir),
        Command::Map {
            target: MapTarget::B1(a),
        } => commands::map_b1(&a.config, &a.out_dir),
        Command::Selftest => match selftest::run() {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(3),
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
