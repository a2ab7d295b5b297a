use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};

use gazekit_service::cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            print_subcommand_help();
            return ExitCode::from(2);
        }
    };
    match run(&cli.command) {
        Ok(report) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(report.as_bytes()).and_then(|()| stdout.flush()).is_err() {
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Prints the help of the subcommand named on the command line, or the
/// top-level help when there is none.
fn print_subcommand_help() {
    let mut cmd = Cli::command();
    cmd.build();
    let named = std::env::args()
        .skip(1)
        .find(|a| cmd.get_subcommands().any(|s| s.get_name() == a));
    let help = match named.and_then(|n| cmd.find_subcommand_mut(&n).map(|s| s.render_help())) {
        Some(h) => h,
        None => cmd.render_help(),
    };
    eprintln!("\n{help}");
}
