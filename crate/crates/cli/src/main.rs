use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use shadow_cli::{run, Command, ExperimentConfig};

#[derive(Parser, Debug)]
#[command(name = "shadow", version, about = "Model-set autocorrelation and diffraction experiments")]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV and JSON reports.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Empirical autocorrelation against the window-overlap coefficients.
    Autocorr,
    /// Theoretical diffraction peaks.
    Peaks,
    /// Lattice, dual and quotient-norm evaluations of the Poisson identity.
    VerifyPoisson,
    /// Empirical pairing against the predicted pure-point spectrum.
    Consistency,
    /// Heisenberg branch coefficients and the lattice-sum identity.
    Heisenberg,
    /// Transform decay of the averaging sequence.
    DiagnoseSequence,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Autocorr => Command::Autocorr,
            Cmd::Peaks => Command::Peaks,
            Cmd::VerifyPoisson => Command::VerifyPoisson,
            Cmd::Consistency => Command::Consistency,
            Cmd::Heisenberg => Command::Heisenberg,
            Cmd::DiagnoseSequence => Command::DiagnoseSequence,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let Some(path) = &args.config else {
        eprintln!("error: --config is required");
        return ExitCode::from(2);
    };
    let mut cfg = match ExperimentConfig::load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(3);
        }
    }
    let command: Command = args.command.into();
    info!("running {} with {}", command.name(), path.display());
    match run(command, &cfg, &args.out) {
        Ok(report) => {
            for c in &report.checks {
                println!("{} {}: {:.16e} (tolerance {:.16e})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.tolerance);
            }
            println!("report written to {}", args.out.join(format!("{}.json", command.name())).display());
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
