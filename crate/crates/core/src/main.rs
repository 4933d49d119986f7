use std::path::PathBuf;
use std::process::ExitCode;

use bohm_vortex::cli::{self, Command};
use clap::{Parser, ValueEnum};

/// Worker-thread count when `--threads` is not given.
const THREADS_ENV: &str = "BOHM_VORTEX_THREADS";

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Section,
    VortexPath,
    FixedPoint,
    Manifolds,
    Lyapunov,
    Scan,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Section => Command::Section,
            Cmd::VortexPath => Command::VortexPath,
            Cmd::FixedPoint => Command::FixedPoint,
            Cmd::Manifolds => Command::Manifolds,
            Cmd::Lyapunov => Command::Lyapunov,
            Cmd::Scan => Command::Scan,
        }
    }
}

/// Bohmian trajectories around a moving quantum vortex.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; defaults to $BOHM_VORTEX_THREADS, then to all cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, String> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("{THREADS_ENV}: expected a thread count, got {v:?}")),
        Err(_) => Ok(None),
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let threads = match thread_count(args.threads) {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("config error: {msg}");
            return ExitCode::from(2);
        }
    };
    if let Some(n) = threads {
        if n == 0 {
            eprintln!("config error: thread count must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("runtime error: {e}");
            return ExitCode::from(3);
        }
    }
    let result = cli::load_config(&args.config).and_then(|c| cli::run(args.command.into(), &c, &args.out));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
