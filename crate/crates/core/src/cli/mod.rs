//! Command-line front end. Each subcommand reads its inputs, runs one
//! pipeline stage, writes its artifacts and prints a JSON run manifest on
//! stdout. Failures print a JSON error object on stderr.

mod commands;
mod config;
mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{CommandFactory, FromArgMatches, Parser};
use serde::Serialize;

pub use commands::Command;
pub use config::{parse_config, ConfigEntry};
pub use manifest::{hash_bytes, FileDigest, Manifest, SCHEMA_VERSION};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "querytax",
    version,
    about = "Build query taxonomies from embedded search-query corpora",
    arg_required_else_help = true
)]
pub struct Cli {
    /// Worker threads; defaults to every core. Outputs do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Plain-text `key = value` defaults; command-line flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Also write the run manifest to this file.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

/// A failed run as reported to the caller: a machine-readable kind plus a
/// human message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub kind: String,
    pub message: String,
}

impl Failure {
    pub fn new(kind: &str, message: impl Into<String>) -> Self {
        Self {
            kind: kind.to_owned(),
            message: message.into(),
        }
    }

    fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::new(e.kind(), e.to_string())
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation; clap has the usage text.
    Usage(clap::Error),
    Failure(Failure),
}

impl From<Failure> for CliError {
    fn from(f: Failure) -> Self {
        CliError::Failure(f)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Failure(e.into())
    }
}

fn command() -> clap::Command {
    // Config-file values are spliced in ahead of the user's flags, so a
    // repeated flag must replace rather than conflict.
    Cli::command()
        .args_override_self(true)
        .mut_subcommands(|s| s.args_override_self(true))
}

/// Path given to `--config`, if any.
fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let a = a.to_str()?;
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Inserts config-file flags right after the subcommand name.
fn splice_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Failure::new("Io", format!("{}: {e}", path.display())))?;
    let entries = parse_config(&text)?;
    let names: Vec<String> = command()
        .get_subcommands()
        .map(|s| s.get_name().to_owned())
        .collect();
    let Some(pos) = args
        .iter()
        .skip(1)
        .position(|a| a.to_str().is_some_and(|s| names.iter().any(|n| n == s)))
    else {
        return Ok(args);
    };
    let at = pos + 2;
    let mut out = args[..at].to_vec();
    for entry in entries {
        out.extend(entry.to_flags().into_iter().map(OsString::from));
    }
    out.extend_from_slice(&args[at..]);
    Ok(out)
}

/// Parses `args` (program name first), runs the subcommand and returns its
/// manifest. Nothing is printed.
pub fn run<I, T>(args: I) -> Result<Manifest, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = splice_config(args)?;
    let matches = command()
        .try_get_matches_from(args)
        .map_err(CliError::Usage)?;
    let cli = Cli::from_arg_matches(&matches).map_err(CliError::Usage)?;
    let manifest = match cli.threads {
        Some(0) => {
            return Err(CliError::Usage(command().error(
                clap::error::ErrorKind::ValueValidation,
                "--threads must be at least 1",
            )))
        }
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::new("ThreadPool", e.to_string()))?
            .install(|| cli.command.execute())?,
        None => cli.command.execute()?,
    };
    if let Some(path) = &cli.manifest {
        std::fs::write(path, manifest.to_json())
            .map_err(|e| Failure::new("Io", format!("{}: {e}", path.display())))?;
    }
    Ok(manifest)
}

/// Runs a command line and returns the process exit code: 0 when every
/// requested artifact was written, 1 on a pipeline error, 2 on bad usage.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match run(args) {
        Ok(manifest) => {
            println!("{}", manifest.to_json());
            EXIT_OK
        }
        Err(CliError::Usage(e)) => {
            let _ = e.print();
            e.exit_code()
        }
        Err(CliError::Failure(f)) => {
            eprintln!("{}", f.to_json());
            EXIT_FAILURE
        }
    }
}
