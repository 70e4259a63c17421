//! Command-line front end for a heritage catalog directory.
//!
//! Exit codes: 0 success, 1 the command ran and reported findings, 2 setup
//! error, 3 input error, 4 unknown entity.

mod catalog;
mod commands;
pub mod server;

use std::io::{self, Read, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use catalog::{CatalogDir, Config, CONFIG_FILE, DATA_FILE, DEFAULT_BASE, PROV_FILE};

pub const OK: u8 = 0;
pub const FINDINGS: u8 = 1;
pub const SETUP: u8 = 2;
pub const INPUT: u8 = 3;
pub const UNKNOWN: u8 = 4;

/// An error paired with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code,
            error: error.into(),
        }
    }

    pub fn msg(code: u8, message: impl std::fmt::Display) -> Self {
        Failure::new(code, anyhow::anyhow!("{message}"))
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::new(SETUP, e)
    }
}

pub(crate) trait Coded<T> {
    fn code(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Coded<T> for Result<T, E> {
    fn code(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure::new(code, e))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "heritage",
    version,
    about = "Manage a cultural-heritage digitisation catalog"
)]
pub struct Cli {
    /// Catalog directory.
    #[arg(long, global = true, env = "HERITAGE_CATALOG", default_value = ".")]
    pub catalog: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableKind {
    Bibliographic,
    Process,
}

impl TableKind {
    pub fn name(self) -> &'static str {
        match self {
            TableKind::Bibliographic => "bibliographic",
            TableKind::Process => "process",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create an empty catalog.
    Init {
        path: PathBuf,
        #[arg(long, default_value = DEFAULT_BASE)]
        base_iri: String,
    },
    /// Load a bibliographic or process table, recording provenance for every change.
    Ingest {
        csv: PathBuf,
        #[arg(long, value_enum)]
        kind: TableKind,
    },
    /// Run a mapping over a stored table (by name) or a CSV file.
    Map { mapping: PathBuf, table: String },
    /// Inspect entity history.
    Prov {
        #[command(subcommand)]
        command: ProvCommand,
    },
    /// Run the FAIR checks.
    Audit {
        /// text, csv or rdf.
        #[arg(long, default_value = "text")]
        format: String,
    },
    /// Check every asset version against the configured limits.
    Validate,
    /// Evaluate a basic graph pattern (argument or standard input), or serve queries over HTTP.
    Query {
        pattern: Option<String>,
        #[arg(long, conflicts_with = "pattern")]
        serve: bool,
        #[arg(long, requires = "serve")]
        port: Option<u16>,
    },
    /// Storage, workflow status and deposit bundles.
    Report {
        #[command(subcommand)]
        command: ReportCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum ProvCommand {
    /// One line per snapshot.
    Log { entity: String },
    /// Print the entity's quads as they were at a point in time.
    Restore { entity: String, timestamp: String },
}

#[derive(Debug, Subcommand)]
pub enum ReportCommand {
    Storage,
    /// Phase vector of a physical object (id or IRI).
    Status {
        cho: String,
    },
    /// Write the deposit package of a digital object (id or IRI).
    Bundle {
        dcho: String,
        dir: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, input: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    INPUT
                }
            };
        }
    };
    match commands::dispatch(cli, input, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {:#}", f.error);
            f.code
        }
    }
}
