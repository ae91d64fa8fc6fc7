//! Command-line front end: problem files, reports, and the `envyorder`
//! subcommands. The binary is a thin wrapper around [`main_with_args`].

pub mod commands;
pub mod error;
pub mod file;
pub mod report;

use clap::Parser;

pub use commands::Cli;
pub use error::{CliError, EXIT_INCOMPATIBLE, EXIT_INVALID, EXIT_SIZE_CAP, EXIT_VERIFY_FAILED};
pub use file::ProblemFile;

/// Parses `args` (including the program name), runs the command, prints
/// errors to standard error, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}
