//! Command-line front end for the `beeid` tool.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 resource
//! limit, 4 I/O error.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;

use clap::Parser;

pub mod args;
pub mod commands;
pub mod config;
pub mod output;

use args::{Cli, Command};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: msg.into(),
        }
    }

    pub fn io(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_IO,
            message: msg.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<beeid_core::Error> for CliError {
    fn from(e: beeid_core::Error) -> Self {
        use beeid_core::Error as E;
        let code = match &e {
            E::InvalidArgument(_) | E::Parse { .. } => EXIT_USAGE,
            E::ResourceLimit(_) => EXIT_RESOURCE,
            E::Io(_) => EXIT_IO,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match config::expand(args) {
        Ok(a) => a,
        Err(e) => return report(e, stderr),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            // help and version requests are not errors and go to stdout
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let pool = match cli.threads {
        Some(0) => return report(CliError::usage("--threads must be positive"), stderr),
        Some(t) => rayon::ThreadPoolBuilder::new().num_threads(t).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => return report(CliError::io(format!("starting threads: {e}")), stderr),
    };
    let result = pool.install(|| match &cli.command {
        Command::Simulate(a) => commands::simulate(a, stdout).map(|()| EXIT_OK),
        Command::Exact(a) => commands::exact(a, stdout).map(|()| EXIT_OK),
        Command::Bounds(a) => commands::bounds(a, stdout).map(|()| EXIT_OK),
        Command::Capacity(a) => commands::capacity(a, stdout).map(|()| EXIT_OK),
        Command::Figures(a) => commands::figures(a).map(|_| EXIT_OK),
        Command::Verify(a) => {
            commands::verify(a, stdout, stderr).map(|ok| if ok { EXIT_OK } else { EXIT_VERIFY })
        }
    });
    match result {
        Ok(code) => code,
        Err(e) => report(e, stderr),
    }
}

fn report(e: CliError, stderr: &mut dyn Write) -> i32 {
    let _ = writeln!(stderr, "error: {e}");
    e.code
}
