use crate::discrete::{log_residual_field, scan_admissibility, sup_abs};
use crate::error::{Error, Result};
use crate::grid::SpacetimeField;
use crate::linearize::{assemble_jacobian, SparseOperator};
use crate::linsolve;
use crate::problem::Problem;

use super::{failure, Clock, SolveTrace, SolverOptions, TraceRecord};

/// Damped Newton for `ln F_k(u) = ln rhs` at interior nodes, where `rhs`
/// (positive, one value per interior unknown) replaces `ψ`.
pub fn newton_solve(
    field0: &SpacetimeField,
    rhs: &[f64],
    problem: &Problem,
    opts: &SolverOptions,
) -> Result<(SpacetimeField, SolveTrace)> {
    if let Some(i) = rhs.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Input(format!(
            "rhs must be positive; got {} at node {}",
            rhs[i],
            field0.grid().interior_node(i)
        )));
    }
    let ln_rhs: Vec<f64> = rhs.iter().map(|x| x.ln()).collect();
    let mut trace = SolveTrace::default();
    let (u, _) = newton_solve_log(field0, &ln_rhs, problem, opts, "newton", 0.0, &mut trace)?;
    Ok((u, trace))
}

/// Same as [`newton_solve`] with the right side given as `ln rhs`. Appends
/// one record per accepted iterate (including iterate 0) to `trace` and
/// returns the solution with the number of Newton steps taken.
pub fn newton_solve_log(
    field0: &SpacetimeField,
    ln_rhs: &[f64],
    problem: &Problem,
    opts: &SolverOptions,
    phase: &str,
    param: f64,
    trace: &mut SolveTrace,
) -> Result<(SpacetimeField, usize)> {
    let g = field0.grid();
    if !problem.boundary_matches(field0) {
        return Err(Error::Input("start field does not carry the problem's boundary slices".into()));
    }
    if ln_rhs.len() != g.interior_len() {
        return Err(Error::Input(format!(
            "rhs has {} values, expected {}",
            ln_rhs.len(),
            g.interior_len()
        )));
    }
    let clock = Clock::new(opts);
    let scan = scan_admissibility(field0, problem, opts.admissibility_margin);
    if !scan.all_strict() {
        return Err(scan.into_error("Newton start field"));
    }
    let mut u = field0.clone();
    let mut res = log_residual_field(&u, problem, ln_rhs)?;
    let mut sup = sup_abs(&res);
    let record = |iter, residual_sup, min_margin, step_scale, trace: &mut SolveTrace| {
        trace.records.push(TraceRecord {
            phase: phase.to_string(),
            tau_or_epsilon: param,
            iter,
            residual_sup,
            min_margin,
            step_scale,
            wall_ms: clock.ms(),
        })
    };
    record(0, sup, scan.min_margin, 0.0, trace);
    if !sup.is_finite() {
        return Err(failure("non-finite residual at the start field", trace));
    }
    for iter in 1..=opts.max_newton {
        if sup <= opts.newton_tol {
            return Ok((u, iter - 1));
        }
        let jac = assemble_jacobian(&u, problem)?;
        let floor = roundoff_floor(&jac, &u);
        let neg: Vec<f64> = res.iter().map(|r| -r).collect();
        let step = linsolve::solve(&jac, &neg, opts.linear_solver)?;
        let mut scale = 1.0;
        loop {
            let trial = u.stepped(&step, scale);
            let scan = scan_admissibility(&trial, problem, opts.admissibility_margin);
            if scan.all_strict() {
                if let Ok(r) = log_residual_field(&trial, problem, ln_rhs) {
                    let s = sup_abs(&r);
                    if s < sup {
                        u = trial;
                        res = r;
                        sup = s;
                        record(iter, sup, scan.min_margin, scale, trace);
                        break;
                    }
                }
            }
            scale *= opts.damping;
            if scale < opts.damping_floor {
                if sup <= floor {
                    let margin = scan_admissibility(&u, problem, opts.admissibility_margin).min_margin;
                    record(iter, sup, margin, 0.0, trace);
                    return Ok((u, iter - 1));
                }
                return Err(failure(
                    format!("line search reached the damping floor at iteration {iter} (residual {sup:e})"),
                    trace,
                ));
            }
        }
    }
    if sup <= opts.newton_tol {
        Ok((u, opts.max_newton))
    } else {
        Err(failure(
            format!("no convergence in {} iterations (residual {sup:e})", opts.max_newton),
            trace,
        ))
    }
}

/// Size of the log residual that rounding in the stencil differences alone
/// can produce at `u`: a perturbation of one ulp of `‖u‖_∞` at every stencil
/// point, pushed through the Jacobian rows. The factor 4 covers the boundary
/// columns dropped from the operator.
fn roundoff_floor(jac: &SparseOperator, u: &SpacetimeField) -> f64 {
    let ulp = f64::EPSILON * u.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (0..jac.dim())
        .map(|r| jac.row(r).map(|(_, v)| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        * 4.0
        * ulp
}
