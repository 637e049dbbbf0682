//! Configuration-driven runner for the morsebott pipelines: JSON run
//! configs, versioned JSON reports with named pass/fail checks, and
//! optional CSV dumps of the integrated trajectories.

mod commands;
mod config;
mod error;
mod report;

use std::fs;
use std::path::{Path, PathBuf};

pub use commands::{run, Command, Outcome, RunOptions, DOUBLE_COMPLEX_FIXTURE};
pub use config::{CoeffFlag, RunConfig};
pub use error::CliError;
pub use report::{Check, Report, SCHEMA};

/// Everything the binary needs, after flag parsing.
#[derive(Clone, Debug, Default)]
pub struct Invocation {
    pub command: String,
    pub document: Option<PathBuf>,
    pub config: Option<PathBuf>,
    pub landscape: Option<String>,
    pub out: Option<PathBuf>,
    pub dump_trajectories: bool,
    pub coeff: Option<String>,
    pub seed: Option<u64>,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Resolves the config from the file and flags (flags win), runs the
/// command, and returns its outcome with the output directory, if any.
/// `--out` is not echoed into the report so that reports written to
/// different directories stay byte-identical.
pub fn execute(inv: &Invocation) -> Result<(Outcome, Option<PathBuf>), CliError> {
    let command: Command = inv.command.parse()?;
    let mut config = match (&inv.config, &inv.landscape) {
        (Some(path), _) => Some(RunConfig::parse(&read(path)?)?),
        (None, Some(name)) => Some(RunConfig::for_landscape(name)),
        (None, None) => None,
    };
    if let Some(c) = config.as_mut() {
        if let Some(name) = &inv.landscape {
            c.landscape = name.clone();
        }
        if let Some(coeff) = &inv.coeff {
            c.coefficients = coeff.parse()?;
        }
        if let Some(seed) = inv.seed {
            c.seed = seed;
        }
    } else if let Some(coeff) = &inv.coeff {
        coeff.parse::<CoeffFlag>()?;
    }
    let out = inv
        .out
        .clone()
        .or_else(|| config.as_ref().and_then(|c| c.out_dir.as_ref().map(PathBuf::from)));
    if inv.dump_trajectories && out.is_none() {
        return Err(CliError::Config("--dump-trajectories needs an output directory".into()));
    }
    let document = inv.document.as_deref().map(read).transpose()?;
    let options = RunOptions {
        dump_trajectories: inv.dump_trajectories,
        document,
    };
    let outcome = run(command, config.as_ref(), &options)?;
    Ok((outcome, out))
}

/// Writes `<command>.json` (and `<command>-trajectories.csv`) into `dir`.
pub fn write_outputs(outcome: &Outcome, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut written = Vec::new();
    let report = dir.join(format!("{}.json", outcome.report.command));
    write(&report, &outcome.report.to_json())?;
    written.push(report);
    if let Some(csv) = &outcome.trajectories {
        let path = dir.join(format!("{}-trajectories.csv", outcome.report.command));
        write(&path, csv)?;
        written.push(path);
    }
    Ok(written)
}
