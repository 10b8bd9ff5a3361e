use clap::{Parser, Subcommand};
use contourtime::cli;
use contourtime::error::Error;
use std::path::PathBuf;
use std::process::ExitCode;

/// Minimum-time reference optimization for biaxial contouring stages.
#[derive(Parser)]
#[command(name = "contourtime", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Identify PD gains from a tracking log CSV.
    Fit {
        /// Tracking log CSV (header t,rx,ry,rvx,rvy,ox,oy,ovx,ovy,ux,uy).
        #[arg(long)]
        log: PathBuf,
        /// Output gains key-value file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full pipeline for one config: optimize, resample, simulate.
    Optimize {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the output directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Solve once per tolerance value and tabulate time and L2 error.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated tolerances in meters, e.g. 5e-6,1e-5,2e-5,4e-5.
        #[arg(long)]
        tolerances: String,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Simulate the closed loop on a reference file and score it.
    Simulate {
        #[arg(long)]
        reference: PathBuf,
        /// Gains key-value file (from `fit`).
        #[arg(long)]
        gains: PathBuf,
        /// Config providing the objective geometry and bounds.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Generate a synthetic tracking log with seeded actuator noise.
    SynthLog {
        #[arg(long)]
        gains: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        /// Acceleration noise standard deviation, m/s^2.
        #[arg(long, default_value_t = 0.01)]
        noise_std: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Resample a config's geometry and write the objective CSV.
    Contour {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Fit { log, out } => cli::cmd_fit(&log, &out),
        Command::Optimize { config, out_dir } => {
            cli::cmd_optimize(&config, out_dir.as_deref()).map(|_| ())
        }
        Command::Sweep {
            config,
            tolerances,
            out_dir,
        } => {
            let tols: Result<Vec<f64>, Error> = tolerances
                .split(',')
                .map(|s| {
                    s.trim().parse::<f64>().map_err(|_| {
                        Error::Validation(format!("bad tolerance value `{}`", s.trim()))
                    })
                })
                .collect();
            cli::cmd_sweep(&config, &tols?, out_dir.as_deref()).map(|_| ())
        }
        Command::Simulate {
            reference,
            gains,
            config,
            out_dir,
        } => cli::cmd_simulate(&reference, &gains, &config, out_dir.as_deref()).map(|_| ()),
        Command::SynthLog {
            gains,
            reference,
            noise_std,
            seed,
            out,
        } => cli::cmd_synth_log(&gains, &reference, noise_std, seed, &out),
        Command::Contour { config, out } => cli::cmd_contour(&config, &out),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
