use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use aomsim::Convention;
use aomsim_cli::commands::{self, Failure, JsonOpts};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "aomsim", version, about = "Frequency-bin photonic circuit simulator with acousto-optic modulators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Demo {
    Swap,
    Ghz,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sweep {
    Ghz,
}

#[derive(Subcommand)]
enum Command {
    /// Run a circuit file.
    Run {
        file: PathBuf,
        /// Write a JSON report to PATH (`-` for stdout).
        #[arg(long, value_name = "PATH")]
        json: Option<String>,
        /// Override the convention of every AOM (unitary|paper).
        #[arg(long)]
        convention: Option<Convention>,
        #[arg(long)]
        pretty: bool,
    },
    /// Run a built-in experiment.
    Demo {
        #[arg(value_enum)]
        name: Demo,
        /// Source mixing angle in radians.
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, default_value = "unitary")]
        convention: Convention,
        #[arg(long, value_name = "PATH")]
        json: Option<String>,
        #[arg(long)]
        pretty: bool,
    },
    /// Sweep the source angle and write CSV.
    Sweep {
        #[arg(value_enum)]
        name: Sweep,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        alpha_from: f64,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2, allow_negative_numbers = true)]
        alpha_to: f64,
        #[arg(long, default_value_t = 33)]
        steps: usize,
        #[arg(long, default_value = "unitary")]
        convention: Convention,
        /// Output file; stdout if omitted.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Run { file, json, convention, pretty } => {
            commands::run_file(&mut out, &file, convention, &JsonOpts { target: json, pretty })
        }
        Command::Demo { name, alpha, convention, json, pretty } => {
            let json = JsonOpts { target: json, pretty };
            match name {
                Demo::Swap => commands::demo_swap(&mut out, alpha, convention, &json),
                Demo::Ghz => commands::demo_ghz(&mut out, alpha, convention, &json),
            }
        }
        Command::Sweep { name: Sweep::Ghz, alpha_from, alpha_to, steps, convention, csv } => {
            commands::sweep_ghz_cmd(&mut out, alpha_from, alpha_to, steps, convention, csv.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code as u8)
        }
    }
}
