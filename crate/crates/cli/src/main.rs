use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use morsebott_cli::{execute, write_outputs, Invocation};

/// Morse–Bott homology laboratory.
#[derive(Parser, Debug)]
#[command(name = "morsebott", version)]
struct Args {
    /// catalog | analyze | msw | perturb | cascade | multicomplex | crosscheck | algebra-verify
    command: String,
    /// Multicomplex document for `algebra-verify` (defaults to the bundled
    /// double-complex fixture).
    document: Option<PathBuf>,
    /// JSON run config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Landscape name; overrides the config's.
    #[arg(long)]
    landscape: Option<String>,
    /// Output directory for the report and dumps; the report goes to stdout
    /// otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write sampled trajectories as CSV next to the report.
    #[arg(long)]
    dump_trajectories: bool,
    /// Coefficient ring: z or z2.
    #[arg(long)]
    coeff: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let a = Args::parse();
    let inv = Invocation {
        command: a.command,
        document: a.document,
        config: a.config,
        landscape: a.landscape,
        out: a.out,
        dump_trajectories: a.dump_trajectories,
        coeff: a.coeff,
        seed: a.seed,
    };
    let (outcome, out) = match execute(&inv) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    for c in &outcome.report.checks {
        eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    match out {
        Some(dir) => match write_outputs(&outcome, &dir) {
            Ok(paths) => {
                for p in paths {
                    eprintln!("wrote {}", p.display());
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(e.exit_code() as u8);
            }
        },
        None => print!("{}", outcome.report.to_json()),
    }
    let failed = outcome.report.failed_checks();
    if !failed.is_empty() {
        eprintln!("failed checks: {}", failed.join(", "));
    }
    ExitCode::from(outcome.exit_code() as u8)
}
