mod args;
mod commands;
mod manifest;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::{Outcome, Status};

/// An input error: reported on standard error with exit code 1.
#[derive(Debug)]
pub struct Failure {
    pub message: String,
}

impl Failure {
    pub fn input(message: String) -> Self {
        Self { message }
    }
}

impl From<chordmink_core::Error> for Failure {
    fn from(e: chordmink_core::Error) -> Self {
        Self { message: e.to_string() }
    }
}

const EXIT_INPUT: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;

fn init_logging() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CHORDMINK_LOG", "error"))
        .format_timestamp(None)
        .init();
}

fn dispatch(command: &Command) -> Result<Outcome, Failure> {
    match command {
        Command::Solve(a) => commands::solve(a),
        Command::Verify(a) => commands::verify_cmd(a),
        Command::Integrals(a) => commands::integrals(a),
        Command::GenMeasure(a) => commands::gen_measure(a),
        Command::CheckGp(a) => commands::check_gp(a),
    }
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    match cli.jobs {
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| Failure::input(format!("cannot start {jobs} worker threads: {e}")))?;
            pool.install(|| dispatch(&cli.command))
        }
        None => dispatch(&cli.command),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_INPUT),
            };
        }
    };
    init_logging();

    let outcome = match run(&cli) {
        Ok(outcome) => outcome,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let text = match chordmink_core::json::to_string(&outcome.report) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    if let Err(e) = output::emit(cli.out.as_deref(), &text) {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(EXIT_INPUT);
    }
    match outcome.status {
        Status::Success => ExitCode::SUCCESS,
        Status::NotConverged(message) => {
            eprintln!("{message}");
            ExitCode::from(EXIT_NOT_CONVERGED)
        }
        Status::Rejected(message) => {
            eprintln!("{message}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
