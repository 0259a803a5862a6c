mod commands;

use std::process::ExitCode;

use clap::Parser;

use commands::{Cli, UsageError};
use sabicluster_core::BiclusterError;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// 2 for bad flags, files or formats; 1 for failures during the search.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<BiclusterError>() {
        Some(e) if e.is_usage() => 2,
        _ => 1,
    }
}
