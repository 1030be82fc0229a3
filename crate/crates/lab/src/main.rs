use std::path::PathBuf;
use std::process::ExitCode;

use blowup_lab::commands::{self, Command, Outcome};
use blowup_lab::config::LabConfig;
use clap::Parser;

#[derive(Parser, Debug)]
#[command(name = "blowup-lab", version, about = "Blow-up experiments for u_t = u_xx + u^2 in reciprocal form")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    n_modes: Option<usize>,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for commands with independent solves.
    #[arg(long)]
    jobs: Option<usize>,
    /// Final time for `continue`.
    #[arg(long)]
    t_end: Option<f64>,
    /// Extra snapshot times, comma separated.
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    /// Also integrate around t_c along a half circle in complex time.
    #[arg(long)]
    complex_path: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// JSON file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Recompute the hashes of a previous run instead of running.
    #[arg(long)]
    verify: bool,
}

impl Cli {
    fn flags(&self) -> LabConfig {
        LabConfig {
            alpha: self.alpha,
            epsilon: self.epsilon,
            n_modes: self.n_modes,
            rtol: self.rtol,
            atol: self.atol,
            seed: self.seed,
            jobs: self.jobs,
            t_end: self.t_end,
            times: self.times.clone(),
            complex_path: self.complex_path.then_some(true),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.verify {
        return match commands::verify(cli.command, &cli.out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        };
    }
    let cfg = match &cli.config {
        Some(path) => match LabConfig::from_file(path) {
            Ok(c) => c.overlay(cli.flags()),
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(1);
            }
        },
        None => cli.flags(),
    };
    match commands::run(cli.command, &cfg, &cli.out) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Partial) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
