//! Configuration, snapshots, logs and the command-line driver.
//!
//! Every mode writes into the output directory:
//!
//! | file | content |
//! |---|---|
//! | `summary.json` | outcome, residuals, regime flags (no timings) |
//! | `log.jsonl` | one [`TraceRecord`](crate::solver::TraceRecord) per line |
//! | `*.gsge` | field snapshots (see [`snapshot`]) |
//! | `*.csv` | norm tables with a header row |
//! | `report.txt`, `report.json` | verification report (`verify` only) |
//!
//! Exit statuses: 0 success, 1 solver failure or failed verification,
//! 2 configuration or validation error.

mod config;
mod driver;
pub mod snapshot;

use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::{ASpec, FieldSpec, GridSection, Mode, ProblemSection, RunConfig, RunSection, TrigSpec, VerifySection};
pub use driver::{execute, RunOutcome};
pub use snapshot::{decode_snapshot, encode_snapshot, read_snapshot, write_snapshot, SNAPSHOT_VERSION};

use crate::error::{Error, Result};
use crate::grid::SupNorms;
use crate::solver::SolveTrace;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Command-line values that take precedence over the `[run]` section.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub deterministic: bool,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Solver { .. } | Error::LinearSolve(_) | Error::Initialization { .. } | Error::NodeDomain { .. } => {
            EXIT_FAILURE
        }
        _ => EXIT_CONFIG,
    }
}

/// Loads the config, applies `overrides`, runs the selected mode and
/// returns the exit status. Errors are reported on stderr.
pub fn run(config_path: &Path, overrides: &Overrides) -> i32 {
    let mut cfg = match RunConfig::load(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Some(m) = overrides.mode {
        cfg.run.mode = Some(m);
    }
    if let Some(out) = &overrides.out {
        cfg.run.out = out.clone();
    }
    if let Some(seed) = overrides.seed {
        cfg.run.seed = seed;
    }
    cfg.run.deterministic |= overrides.deterministic;
    if cfg.run.deterministic {
        faer::set_global_parallelism(faer::Par::Seq);
    }
    match execute(&cfg) {
        Ok(outcome) => {
            println!("{}", outcome.message);
            outcome.status
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn write_log(trace: &SolveTrace, path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in &trace.records {
        let line = serde_json::to_string(r).map_err(|e| Error::Io(e.into()))?;
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

/// One row of a norm table; `epsilon` and `diff_prev` are empty where they
/// do not apply.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormRow {
    pub epsilon: Option<f64>,
    /// `‖u^ε − u^{ε_prev}‖_∞`.
    pub diff_prev: Option<f64>,
    pub u: f64,
    pub u_t: f64,
    pub grad_u: f64,
    pub u_tt_max: f64,
    pub hess_u: f64,
    pub grad_u_t: f64,
}

impl NormRow {
    pub fn new(epsilon: Option<f64>, diff_prev: Option<f64>, n: &SupNorms) -> Self {
        Self {
            epsilon,
            diff_prev,
            u: n.u,
            u_t: n.ut,
            grad_u: n.grad_u,
            u_tt_max: n.utt_max,
            hess_u: n.hess_u,
            grad_u_t: n.grad_ut,
        }
    }
}

pub fn write_csv<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
