//! Regularization paths towards the degenerate equation `F_k = ψ ≥ 0`.
//!
//! * `RhsEpsilon` solves `F_k(u) = ψ + ε`.
//! * `GammaEpsilon` solves `F_k(u) = ψ + ε` with `γ` replaced by `γ + ε`,
//!   i.e. with `W + ε Δu I` in place of `W`.
//!
//! Each `ε` warm-starts from the previous solution.

use serde::{Deserialize, Serialize};

use crate::conformal::{validate_theorem_regime, Coefficients};
use crate::discrete::scan_admissibility;
use crate::error::{Error, Result};
use crate::grid::{sup_norms, SpacetimeField, SupNorms};
use crate::problem::Problem;

use super::{homotopy_from, homotopy_solve, Clock, SolveTrace, SolverOptions, TraceRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegenerateMode {
    RhsEpsilon,
    GammaEpsilon,
}

#[derive(Clone, Debug)]
pub struct DegenerateResult {
    pub mode: DegenerateMode,
    /// The `ε` values that were solved, in schedule order.
    pub epsilons: Vec<f64>,
    pub fields: Vec<SpacetimeField>,
    /// Single Richardson step on the last two solutions. Indicative only.
    pub extrapolated: Option<SpacetimeField>,
    /// `‖u^{ε_i} − u^{ε_{i+1}}‖_∞`.
    pub successive_diffs: Vec<f64>,
    pub norms: Vec<SupNorms>,
    /// Largest `u^{ε₁} − u^{ε₂}` over all pairs with `ε₁ > ε₂`
    /// (`RhsEpsilon` only).
    pub monotonicity_excess: Option<f64>,
    /// Whether the `C⁰`/`C¹` monitors vary over the last decade by at most
    /// twice their variation over the first.
    pub monitors_stable: Option<bool>,
    /// Reason the schedule stopped early.
    pub failure: Option<String>,
    pub trace: SolveTrace,
}

impl DegenerateResult {
    pub fn last(&self) -> Option<&SpacetimeField> {
        self.fields.last()
    }

    pub fn is_monotone(&self, tol: f64) -> Option<bool> {
        self.monotonicity_excess.map(|e| e <= tol)
    }
}

/// The regularized problem for one `ε`.
pub fn regularized(problem: &Problem, mode: DegenerateMode, eps: f64) -> Result<Problem> {
    let psi: Vec<f64> = problem.psi().iter().map(|p| p + eps).collect();
    let p = problem.with_psi(psi)?;
    match mode {
        DegenerateMode::RhsEpsilon => Ok(p),
        DegenerateMode::GammaEpsilon => {
            let c = p.coefficients();
            p.with_coefficients(Coefficients { gamma: c.gamma + eps, ..*c })
        }
    }
}

/// `u₂ + (u₂ − u₁) ε₂/(ε₁ − ε₂)`: the value at `ε = 0` of the line through
/// `(ε₁, u₁)` and `(ε₂, u₂)`.
pub fn richardson(u1: &SpacetimeField, eps1: f64, u2: &SpacetimeField, eps2: f64) -> SpacetimeField {
    let w = eps2 / (eps1 - eps2);
    let values = u1
        .values()
        .iter()
        .zip(u2.values())
        .map(|(a, b)| b + (b - a) * w)
        .collect();
    SpacetimeField::new(*u2.grid(), values).expect("same grid")
}

pub fn degenerate_solve(problem: &Problem, opts: &SolverOptions, mode: DegenerateMode) -> Result<DegenerateResult> {
    opts.validate()?;
    let c = problem.coefficients();
    match mode {
        DegenerateMode::RhsEpsilon if !validate_theorem_regime(c).existence() => {
            return Err(Error::Parameter(
                "rhs-epsilon mode needs gamma > 0 or (r > 0 and 2sk <= rn)".into(),
            ))
        }
        DegenerateMode::GammaEpsilon if c.r == 0.0 => {
            return Err(Error::Parameter("gamma-epsilon mode needs r != 0".into()))
        }
        _ => {}
    }
    let clock = Clock::new(opts);
    let mut out = DegenerateResult {
        mode,
        epsilons: Vec::new(),
        fields: Vec::new(),
        extrapolated: None,
        successive_diffs: Vec::new(),
        norms: Vec::new(),
        monotonicity_excess: None,
        monitors_stable: None,
        failure: None,
        trace: SolveTrace::default(),
    };
    for &eps in &opts.epsilon_schedule {
        let p = regularized(problem, mode, eps)?;
        let solved = match out.fields.last() {
            Some(prev) => {
                let mut t = SolveTrace::default();
                match homotopy_from(prev, &p, opts, &mut t) {
                    Ok(u) => Ok((u, t)),
                    Err(_) => homotopy_solve(&p, opts).map(|(u, t2)| {
                        t.extend(t2);
                        (u, t)
                    }),
                }
            }
            None => homotopy_solve(&p, opts),
        };
        match solved {
            Ok((u, t)) => {
                let residual = t.last_residual().unwrap_or(0.0);
                out.trace.extend(t);
                out.trace.records.push(TraceRecord {
                    phase: mode_name(mode).into(),
                    tau_or_epsilon: eps,
                    iter: out.epsilons.len(),
                    residual_sup: residual,
                    min_margin: scan_admissibility(&u, &p, 0.0).min_margin,
                    step_scale: 1.0,
                    wall_ms: clock.ms(),
                });
                if let Some(prev) = out.fields.last() {
                    out.successive_diffs.push(prev.max_abs_diff(&u));
                }
                out.norms.push(sup_norms(&u));
                out.epsilons.push(eps);
                out.fields.push(u);
            }
            Err(e) => {
                if let Error::Solver { trace, .. } = &e {
                    out.trace.extend((**trace).clone());
                }
                out.failure = Some(format!("epsilon = {eps:e}: {e}"));
                break;
            }
        }
    }
    let m = out.fields.len();
    if m >= 2 {
        out.extrapolated = Some(richardson(
            &out.fields[m - 2],
            out.epsilons[m - 2],
            &out.fields[m - 1],
            out.epsilons[m - 1],
        ));
    }
    if mode == DegenerateMode::RhsEpsilon && m >= 2 {
        let mut excess = f64::NEG_INFINITY;
        for i in 0..m {
            for j in i + 1..m {
                for (a, b) in out.fields[i].values().iter().zip(out.fields[j].values()) {
                    excess = excess.max(a - b);
                }
            }
        }
        out.monotonicity_excess = Some(excess);
    }
    if m >= 3 {
        let var = |a: &SupNorms, b: &SupNorms| {
            (a.u - b.u).abs().max((a.ut - b.ut).abs()).max((a.grad_u - b.grad_u).abs())
        };
        let first = var(&out.norms[0], &out.norms[1]);
        let last = var(&out.norms[m - 2], &out.norms[m - 1]);
        out.monitors_stable = Some(last <= 2.0 * first + 1e-12);
    }
    Ok(out)
}

fn mode_name(mode: DegenerateMode) -> &'static str {
    match mode {
        DegenerateMode::RhsEpsilon => "rhs-epsilon",
        DegenerateMode::GammaEpsilon => "gamma-epsilon",
    }
}
