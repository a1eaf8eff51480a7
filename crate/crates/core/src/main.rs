use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kerr_vdp::figures::{run_figure, run_wigner, write_wigner_csv};
use kerr_vdp::sweep::{parse_sweep_config, parse_wigner_config, run_sweep, write_csv, Model};
use kerr_vdp::verify::run_oracle_suite;
use kerr_vdp::Error;

#[derive(Parser)]
#[command(name = "kerr-vdp", version, about = "Coupled Kerr van der Pol oscillator simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct SweepArgs {
    /// TOML sweep config.
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: $KERR_VDP_THREADS, else all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Steady-state phonon numbers over a parameter grid.
    QuantumSweep(SweepArgs),
    /// Langevin ensemble averages over a parameter grid.
    SemiclassicalSweep(SweepArgs),
    /// Noiseless long-time amplitudes over a parameter grid.
    ClassicalSweep(SweepArgs),
    /// Steady-state Wigner function of one mode.
    Wigner {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the oracle self-check suite.
    Verify,
    /// Regenerate the data of one figure.
    Figures {
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=5))]
        which: u8,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
}

/// Failures split by exit status: 2 for bad input, 1 for runtime errors.
enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::Spec(_) => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn read_config(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn sweep(model: Model, args: &SweepArgs) -> Result<(), Failure> {
    let spec = parse_sweep_config(&read_config(&args.config)?)
        .map_err(|e| Failure::Config(format!("{}: {e}", args.config.display())))?;
    if spec.model != model {
        return Err(Failure::Config(format!(
            "{}: key `model` is \"{}\" but this command runs the {} model",
            args.config.display(),
            spec.model.name(),
            model.name()
        )));
    }
    let result = run_sweep(&spec, args.threads)?;
    write_csv(&result, &args.out)?;
    println!("{result}");
    println!("wrote {}", args.out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::QuantumSweep(a) => sweep(Model::Quantum, &a),
        Command::SemiclassicalSweep(a) => sweep(Model::Semiclassical, &a),
        Command::ClassicalSweep(a) => sweep(Model::Classical, &a),
        Command::Wigner { config, out } => {
            let spec = parse_wigner_config(&read_config(&config)?)
                .map_err(|e| Failure::Config(format!("{}: {e}", config.display())))?;
            let grid = run_wigner(&spec)?;
            write_wigner_csv(&spec, &grid, &out)?;
            println!("wigner grid {}x{}: integral {:.6}, max {:.6}", grid.n_re, grid.n_im, grid.integral(), grid.max_value());
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Verify => {
            let checks = run_oracle_suite();
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed == 0 {
                println!("all {} checks passed", checks.len());
                Ok(())
            } else {
                Err(Failure::Runtime(format!("{failed} of {} checks failed", checks.len())))
            }
        }
        Command::Figures { which, out, threads } => {
            for path in run_figure(which, &out, threads)? {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
