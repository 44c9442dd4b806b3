use crate::discrete::log_f_field;
use crate::error::{Error, Result};
use crate::grid::SpacetimeField;
use crate::problem::Problem;

use super::{choose_initializer, failure, newton_solve_log, SolveTrace, SolverOptions};

/// Continuation from an admissible initializer to the target `ψ`.
pub fn homotopy_solve(problem: &Problem, opts: &SolverOptions) -> Result<(SpacetimeField, SolveTrace)> {
    opts.validate()?;
    let (w, _) = choose_initializer(problem, opts)?;
    let mut trace = SolveTrace::default();
    let u = homotopy_from(&w, problem, opts, &mut trace)?;
    Ok((u, trace))
}

/// Follows `rhs_τ = (1−τ) F_k(w) + τ ψ` from `τ = 0`, where `w` is an exact
/// solution by construction, to `τ = 1`.
pub fn homotopy_from(
    w: &SpacetimeField,
    problem: &Problem,
    opts: &SolverOptions,
    trace: &mut SolveTrace,
) -> Result<SpacetimeField> {
    let g = problem.grid();
    let ns = g.spatial_len();
    let psi = &problem.psi()[ns..ns * (g.nt + 1)];
    if let Some(i) = psi.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::Input(format!(
            "continuation needs psi > 0 on interior levels; psi = {} at node {}",
            psi[i],
            g.interior_node(i)
        )));
    }
    let ln_fw = log_f_field(w, problem)?;
    let ln_rhs = |tau: f64| -> Vec<f64> {
        if tau == 0.0 {
            ln_fw.clone()
        } else if tau == 1.0 {
            psi.iter().map(|p| p.ln()).collect()
        } else {
            ln_fw
                .iter()
                .zip(psi)
                .map(|(lf, p)| ((1.0 - tau) * lf.exp() + tau * p).ln())
                .collect()
        }
    };

    let (mut u, _) = newton_solve_log(w, &ln_rhs(0.0), problem, opts, "homotopy", 0.0, trace)?;
    let mut tau = 0.0;
    let mut step = opts.tau_step;
    let mut streak = 0;
    while tau < 1.0 {
        let next = (tau + step).min(1.0);
        match newton_solve_log(&u, &ln_rhs(next), problem, opts, "homotopy", next, trace) {
            Ok((v, _)) => {
                u = v;
                tau = next;
                streak += 1;
                if streak == 2 {
                    step = (2.0 * step).min(opts.tau_step_max);
                    streak = 0;
                }
            }
            Err(Error::Solver { .. } | Error::LinearSolve(_)) => {
                streak = 0;
                step *= 0.5;
                if step < opts.tau_step_floor {
                    return Err(failure(
                        format!("continuation step fell below {:e} at tau = {tau}", opts.tau_step_floor),
                        trace,
                    ));
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(u)
}
