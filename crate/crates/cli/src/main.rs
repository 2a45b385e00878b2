//! `skyroute` command-line tool: generate scenarios, build radio maps, train
//! and compare planners, and evaluate saved trajectories.

mod commands;
mod options;

use std::process::ExitCode;

use clap::Parser;

use options::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Map(a) => commands::map(a),
        Command::Train(a) => commands::train(a),
        Command::Plan(a) => commands::plan(a),
        Command::Eval(a) => commands::eval(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 for invalid input, 3 for infeasible missions, 4 for I/O and file format
/// problems.
fn exit_code(e: &anyhow::Error) -> u8 {
    use skyroute::Error;
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<Error>() {
            return match err {
                Error::Infeasible(_)
                | Error::NoFeasibleEpisode(_)
                | Error::RolloutLoop { .. }
                | Error::RolloutTruncated(_)
                | Error::TooLarge { .. } => 3,
                Error::Io(_) | Error::Format { .. } => 4,
                _ => 2,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 4;
        }
    }
    2
}
