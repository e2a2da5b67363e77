//! Command-line harness over the certification library: checks null space
//! properties on instance files, solves the associated recovery programs,
//! builds and validates the moment-curve operator family, queries polytope
//! neighborliness, runs verdict-versus-recovery equivalence experiments,
//! and replays the built-in arithmetic fixtures.
//!
//! Reports are JSON with schema version "nsp-lab/1" and go to stdout or the
//! `--out` path. Exit codes: 0 on success, 1 on a validation failure (an
//! expected verdict that did not materialize, a failed fixture, or an
//! equivalence violation), 2 on input errors. For a fixed seed and inputs,
//! reports are byte-identical across runs and thread counts except for the
//! `elapsed_ms` fields.

pub mod commands;
pub mod experiment;
pub mod fixtures;
pub mod schema;

use clap::{Parser, Subcommand};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "nsp-lab",
    version,
    about = "Certify null space properties, solve the recovery programs they control, and build the moment-curve operator family"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Solve the recovery program of an instance file.
    Solve {
        /// Setting tag; must match the instance file when given.
        #[arg(long)]
        setting: Option<String>,
        /// Instance file path.
        #[arg(long = "in")]
        input: PathBuf,
        /// Inner norm for block-q1: 1, 2, or inf.
        #[arg(long)]
        q: Option<String>,
        /// Relative tolerance for the reference-signal uniqueness probe.
        #[arg(long)]
        tol: Option<f64>,
        /// Report path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify a null space property on an instance file.
    CheckNsp {
        /// Setting tag; must match the instance file when given.
        #[arg(long)]
        setting: Option<String>,
        /// Sparsity order of the property.
        #[arg(long)]
        order: usize,
        /// Instance file path.
        #[arg(long = "in")]
        input: PathBuf,
        /// Inner norm for block-q1: 1, 2, or inf.
        #[arg(long)]
        q: Option<String>,
        /// Report path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the m x (k+1) moment-curve family member.
    ConstructFamily {
        /// Row count, at least 3.
        #[arg(long)]
        m: usize,
        /// Block count, greater than m.
        #[arg(long)]
        k: usize,
        /// Comma-separated curve parameters (k-1 values); default 1..k-1.
        #[arg(long)]
        ts: Option<String>,
        /// Run the blockwise verdict checks and exit 1 if any fails.
        #[arg(long)]
        validate: bool,
        /// Scale emitted columns to unit Euclidean norm. Checks always run
        /// on the raw construction, since scaling changes the null space.
        #[arg(long)]
        normalize: bool,
        /// Report path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a family member and run its verdict checks.
    ValidateFamily {
        /// Row count, at least 3.
        #[arg(long)]
        m: usize,
        /// Block count, greater than m.
        #[arg(long)]
        k: usize,
        /// Comma-separated curve parameters (k-1 values); default 1..k-1.
        #[arg(long)]
        ts: Option<String>,
        /// Report path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test whether a point cloud is neighborly of a given order.
    CheckNeighborly {
        /// Points file path.
        #[arg(long = "in")]
        input: PathBuf,
        /// Subset size to test.
        #[arg(long)]
        order: usize,
        /// Report path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare certified verdicts against sampled recovery outcomes.
    Experiment {
        /// Setting tag; required unless --in supplies an instance.
        #[arg(long)]
        setting: Option<String>,
        /// Inner norm for block-q1: 1, 2, or inf.
        #[arg(long)]
        q: Option<String>,
        /// Sparsity order of the property.
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// Number of trials.
        #[arg(long)]
        trials: usize,
        /// Base seed; trials derive their own seeds from it.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads for trials.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Measurement count for random operators; default 6.
        #[arg(long)]
        m: Option<usize>,
        /// Fixed instance file; trials then sample signals for it.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Report path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay the built-in arithmetic fixtures.
    Fixtures {
        /// Report path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn finish(result: commands::CmdResult, out: Option<&Path>) -> i32 {
    match result {
        Ok((json, code)) => match out {
            Some(path) => match fs::write(path, &json) {
                Ok(()) => code,
                Err(e) => {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    2
                }
            },
            None => {
                print!("{json}");
                code
            }
        },
        Err(msg) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Solve {
            setting,
            input,
            q,
            tol,
            out,
        } => finish(
            commands::solve(setting.as_deref(), &input, q.as_deref(), tol),
            out.as_deref(),
        ),
        Command::CheckNsp {
            setting,
            order,
            input,
            q,
            out,
        } => finish(
            commands::check_nsp(setting.as_deref(), order, &input, q.as_deref()),
            out.as_deref(),
        ),
        Command::ConstructFamily {
            m,
            k,
            ts,
            validate,
            normalize,
            out,
        } => finish(
            commands::construct_family(m, k, ts.as_deref(), validate, normalize),
            out.as_deref(),
        ),
        Command::ValidateFamily { m, k, ts, out } => finish(
            commands::construct_family(m, k, ts.as_deref(), true, false),
            out.as_deref(),
        ),
        Command::CheckNeighborly { input, order, out } => {
            finish(commands::check_neighborly(&input, order), out.as_deref())
        }
        Command::Experiment {
            setting,
            q,
            order,
            trials,
            seed,
            jobs,
            m,
            input,
            out,
        } => finish(
            commands::experiment(
                setting.as_deref(),
                q.as_deref(),
                order,
                trials,
                seed,
                jobs,
                m,
                input.as_deref(),
            ),
            out.as_deref(),
        ),
        Command::Fixtures { out } => finish(commands::fixtures(), out.as_deref()),
    }
}
