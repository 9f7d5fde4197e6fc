//! Command-line front end for `kerneldist`.
//!
//! Every command is deterministic given its inputs and `--seed`, apart from
//! the `wall_time_ms` and `time_ms` fields.

pub mod args;
pub mod bench;
pub mod commands;
pub mod error;
pub mod io;
pub mod report;

pub use args::{Cli, Command};
pub use error::{CliError, Result};

/// Size the global thread pool; `None` keeps one thread per core.
pub fn init_threads(threads: Option<usize>) -> Result<()> {
    match threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}"))),
        None => Ok(()),
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    init_threads(cli.threads)?;
    let params = match &cli.command {
        Command::Dist(a) => &a.params,
        Command::Align(a) => &a.params,
        Command::Coreset(a) => &a.params,
        Command::Embed(a) => &a.params,
        Command::Bench(a) => &a.params,
    };
    params.validate()?;
    match &cli.command {
        Command::Dist(a) => commands::dist::run(a),
        Command::Align(a) => commands::align::run(a),
        Command::Coreset(a) => commands::coreset::run(a),
        Command::Embed(a) => commands::embed::run(a),
        Command::Bench(a) => commands::bench::run(a),
    }
}
