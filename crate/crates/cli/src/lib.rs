//! Command-line front end for `copula-split`.

pub mod args;
mod commands;
pub mod error;
pub mod input;
pub mod manifest;
pub mod schema;
pub mod svg;

pub use args::{Cli, Command};
pub use error::{CliError, ExitKind};

/// Run a parsed command line. `argv` is echoed into the run manifest.
pub fn run(cli: &Cli, argv: &[String]) -> Result<(), CliError> {
    match &cli.command {
        Command::Fit(a) => commands::cmd_fit(a, argv),
        Command::SplitFit(a) => commands::cmd_split_fit(a, argv),
        Command::Simulate(a) => commands::cmd_simulate(a, argv),
        Command::Report(a) => commands::cmd_report(a, argv),
        Command::Sample(a) => commands::cmd_sample(a, argv),
    }
}
