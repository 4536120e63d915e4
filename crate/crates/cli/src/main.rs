use std::path::PathBuf;
use std::process;

use clap::{Parser, ValueEnum};
use stefan_front::jobs::{self, Command};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Simulate,
    Semiwave,
    Threshold,
    Sweep,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Command {
        match c {
            Cmd::Simulate => Command::Simulate,
            Cmd::Semiwave => Command::Semiwave,
            Cmd::Threshold => Command::Threshold,
            Cmd::Sweep => Command::Sweep,
        }
    }
}

/// Simulate reaction-diffusion equations with Stefan free boundaries.
#[derive(Debug, Parser)]
#[command(name = "stefan-front", version)]
struct Args {
    command: Cmd,
    /// JSON job file
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output_dir` in the job file)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps and threshold searches
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let mut job = match jobs::parse_config(&args.config) {
        Ok(j) => j,
        Err(e) => {
            log::error!("{e}");
            process::exit(jobs::exit_code(&e));
        }
    };
    let cmd: Command = args.command.into();
    if cmd != job.command {
        log::warn!("command line says {:?}, job file says {:?}; running {:?}", cmd, job.command, cmd);
        job.command = cmd;
    }
    process::exit(jobs::execute(&job, args.out.as_deref(), args.jobs));
}
