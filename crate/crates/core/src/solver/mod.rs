//! Newton, continuation and regularization drivers.

mod degenerate;
mod homotopy;
mod init;
mod newton;
mod slice;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use degenerate::{degenerate_solve, regularized, richardson, DegenerateMode, DegenerateResult};
pub use homotopy::{homotopy_from, homotopy_solve};
pub use init::{build_initializer, choose_initializer, convexify, interpolate_boundary, InitializerKind};
pub use newton::{newton_solve, newton_solve_log};
pub use slice::{elliptic_slice_solve, slice_initializer, slice_initializer_traced, slice_residual};

use crate::error::{Error, Result};
use crate::linsolve::LinearSolver;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Target for the sup norm of the log residual.
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Backtracking factor.
    pub damping: f64,
    /// Smallest step scale tried before giving up.
    pub damping_floor: f64,
    /// Strict admissibility threshold for accepted iterates.
    pub admissibility_margin: f64,
    /// Initial continuation step.
    pub tau_step: f64,
    pub tau_step_floor: f64,
    pub tau_step_max: f64,
    /// Regularization parameters, solved in the given order.
    pub epsilon_schedule: Vec<f64>,
    pub linear_solver: LinearSolver,
    /// Record `wall_ms = 0` so traces are reproducible.
    pub deterministic: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            newton_tol: 1e-9,
            max_newton: 50,
            damping: 0.5,
            damping_floor: 2f64.powi(-20),
            admissibility_margin: 1e-10,
            tau_step: 0.1,
            tau_step_floor: 1e-4,
            tau_step_max: 0.5,
            epsilon_schedule: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5],
            linear_solver: LinearSolver::default(),
            deterministic: false,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("newton_tol", self.newton_tol),
            ("damping", self.damping),
            ("damping_floor", self.damping_floor),
            ("admissibility_margin", self.admissibility_margin),
            ("tau_step", self.tau_step),
            ("tau_step_floor", self.tau_step_floor),
            ("tau_step_max", self.tau_step_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_newton == 0 {
            return Err(Error::Parameter("max_newton must be positive".into()));
        }
        if self.damping >= 1.0 || self.damping_floor >= 1.0 {
            return Err(Error::Parameter("damping and damping_floor must be < 1".into()));
        }
        if self.tau_step_floor > self.tau_step || self.tau_step > self.tau_step_max {
            return Err(Error::Parameter(
                "need tau_step_floor <= tau_step <= tau_step_max".into(),
            ));
        }
        if self.epsilon_schedule.is_empty() || self.epsilon_schedule.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
            return Err(Error::Parameter("epsilon_schedule entries must lie in (0, 1]".into()));
        }
        if self.epsilon_schedule.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Parameter("epsilon_schedule must be strictly decreasing".into()));
        }
        Ok(())
    }
}

/// One line of the iteration log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub phase: String,
    pub tau_or_epsilon: f64,
    pub iter: usize,
    pub residual_sup: f64,
    pub min_margin: f64,
    pub step_scale: f64,
    pub wall_ms: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub records: Vec<TraceRecord>,
}

impl SolveTrace {
    pub fn last_residual(&self) -> Option<f64> {
        self.records.last().map(|r| r.residual_sup)
    }

    pub fn extend(&mut self, other: SolveTrace) {
        self.records.extend(other.records);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Wall-clock source that reads zero in deterministic mode.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Clock {
    start: Instant,
    enabled: bool,
}

impl Clock {
    pub(crate) fn new(opts: &SolverOptions) -> Self {
        Self {
            start: Instant::now(),
            enabled: !opts.deterministic,
        }
    }

    pub(crate) fn ms(&self) -> u64 {
        if self.enabled {
            self.start.elapsed().as_millis() as u64
        } else {
            0
        }
    }
}

pub(crate) fn failure(reason: impl Into<String>, trace: &SolveTrace) -> Error {
    Error::Solver {
        reason: reason.into(),
        trace: Box::new(trace.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SolverOptions::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_options() {
        let bad = [
            SolverOptions { damping_floor: 1.0, ..Default::default() },
            SolverOptions { epsilon_schedule: vec![1e-2, 1e-1], ..Default::default() },
            SolverOptions { newton_tol: 0.0, ..Default::default() },
        ];
        for o in bad {
            assert!(o.validate().is_err(), "{o:?}");
        }
    }
}
