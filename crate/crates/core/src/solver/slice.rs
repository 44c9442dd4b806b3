//! The elliptic problem `e^{−2ku} σ_k(W[u]) = rhs` on one time slice,
//! solved in the log form `ln σ_k(W[u]) − 2ku = ln rhs`. The `−2ku` term
//! adds a negative zeroth-order coefficient to the linearization, which
//! keeps the Newton matrix invertible.

use rayon::prelude::*;

use crate::discrete::sup_abs;
use crate::error::{Error, NodeRef, Result};
use crate::grid::{scatter_spatial, spatial_jet, JetFunctional, SpacetimeField};
use crate::linearize::{add_w_chain, SparseOperator};
use crate::linsolve;
use crate::problem::Problem;
use crate::symfunc::{sigma_grad_unchecked, sigma_unchecked, SymMatrix};

use super::{convexify, failure, Clock, SolveTrace, SolverOptions, TraceRecord};

fn slice_w(problem: &Problem, values: &[f64], x: usize) -> SymMatrix {
    problem.spatial_w(values, x)
}

/// `ln σ_k(W[u]) − 2ku − ln rhs` at every spatial node. Fails at the worst
/// node if `W[u]` leaves `Γ_k` there (by more than `margin`).
pub fn slice_residual(problem: &Problem, values: &[f64], rhs: &[f64], margin: f64) -> Result<Vec<f64>> {
    let k = problem.coefficients().k;
    let ns = problem.grid().spatial_len();
    let rows: Vec<(f64, f64)> = (0..ns)
        .into_par_iter()
        .map(|x| {
            let w = slice_w(problem, values, x);
            let r = sigma_unchecked(&w, k).ln() - 2.0 * k as f64 * values[x] - rhs[x].ln();
            (w.gamma_margin(k), r)
        })
        .collect();
    let (worst, cm) = rows
        .iter()
        .enumerate()
        .map(|(x, r)| (x, r.0))
        .fold((0, f64::INFINITY), |acc, (x, m)| if m < acc.1 || m.is_nan() { (x, m) } else { acc });
    if !(cm > margin) {
        return Err(Error::NodeDomain {
            node: NodeRef { level: 0, spatial: worst },
            reason: format!("W[u] left Gamma_{k} on the slice"),
            margin: cm,
        });
    }
    Ok(rows.into_iter().map(|r| r.1).collect())
}

fn slice_jacobian(problem: &Problem, values: &[f64]) -> Result<SparseOperator> {
    let g = problem.grid();
    let c = problem.coefficients();
    let k = c.k;
    let rows: Vec<Vec<(usize, f64)>> = (0..g.spatial_len())
        .into_par_iter()
        .map(|x| {
            let mut jet = spatial_jet(g, values, x);
            jet.a_here = *problem.a_at(x);
            let w = crate::conformal::assemble_w(&jet, c);
            let m = (1.0 / sigma_unchecked(&w, k)) * sigma_grad_unchecked(&w, k);
            let mut l = JetFunctional::zero(g.n);
            l.zero = -2.0 * k as f64;
            add_w_chain(&m, &jet, c, &mut l);
            let mut out = Vec::with_capacity(16);
            scatter_spatial(g, x, &l, &mut out);
            out
        })
        .collect();
    SparseOperator::from_rows(g.spatial_len(), rows)
}

/// Newton solve of the slice equation at time level `level` (used only to
/// label the trace), starting from `guess`.
pub fn elliptic_slice_solve(
    problem: &Problem,
    level: usize,
    rhs: &[f64],
    guess: &[f64],
    opts: &SolverOptions,
) -> Result<(Vec<f64>, SolveTrace)> {
    let g = problem.grid();
    let ns = g.spatial_len();
    if problem.coefficients().gamma <= 0.0 {
        return Err(Error::Parameter("the slice solver requires gamma > 0".into()));
    }
    if rhs.len() != ns || guess.len() != ns {
        return Err(Error::Input(format!("slice data must have {ns} values")));
    }
    if let Some(x) = rhs.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::Input(format!("slice rhs must be positive; got {} at {x}", rhs[x])));
    }
    let clock = Clock::new(opts);
    let mut trace = SolveTrace::default();
    let param = g.t(level);
    let push = |iter, res, margin, scale, trace: &mut SolveTrace| {
        trace.records.push(TraceRecord {
            phase: "slice".into(),
            tau_or_epsilon: param,
            iter,
            residual_sup: res,
            min_margin: margin,
            step_scale: scale,
            wall_ms: clock.ms(),
        })
    };
    let margin_of = |u: &[f64]| {
        (0..ns)
            .map(|x| slice_w(problem, u, x).gamma_margin(problem.coefficients().k))
            .fold(f64::INFINITY, f64::min)
    };
    let mut u = guess.to_vec();
    let mut res = slice_residual(problem, &u, rhs, opts.admissibility_margin)?;
    let mut sup = sup_abs(&res);
    push(0, sup, margin_of(&u), 0.0, &mut trace);
    for iter in 1..=opts.max_newton {
        if sup <= opts.newton_tol {
            return Ok((u, trace));
        }
        let jac = slice_jacobian(problem, &u)?;
        let neg: Vec<f64> = res.iter().map(|r| -r).collect();
        let step = linsolve::solve(&jac, &neg, opts.linear_solver)?;
        let mut scale = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(&step).map(|(a, d)| a + scale * d).collect();
            if let Ok(r) = slice_residual(problem, &trial, rhs, opts.admissibility_margin) {
                let s = sup_abs(&r);
                if s < sup {
                    u = trial;
                    res = r;
                    sup = s;
                    push(iter, sup, margin_of(&u), scale, &mut trace);
                    break;
                }
            }
            scale *= opts.damping;
            if scale < opts.damping_floor {
                return Err(failure(format!("slice {level}: line search reached the damping floor"), &trace));
            }
        }
    }
    if sup <= opts.newton_tol {
        Ok((u, trace))
    } else {
        Err(failure(format!("slice {level}: no convergence (residual {sup:e})"), &trace))
    }
}

/// Solves the slice equation at every interior level with right side
/// `(1−t) e^{−2k u0} σ_k(W[u0]) + t e^{−2k u1} σ_k(W[u1])`, stacks the
/// slices and convexifies in time.
pub fn slice_initializer(problem: &Problem, opts: &SolverOptions) -> Result<SpacetimeField> {
    slice_initializer_traced(problem, opts, &mut SolveTrace::default())
}

/// [`slice_initializer`], appending the Newton records of every slice to
/// `trace`.
pub fn slice_initializer_traced(problem: &Problem, opts: &SolverOptions, trace: &mut SolveTrace) -> Result<SpacetimeField> {
    let g = *problem.grid();
    let k = problem.coefficients().k;
    let ns = g.spatial_len();
    let weight = |u: &[f64], x: usize| (-2.0 * k as f64 * u[x]).exp() * sigma_unchecked(&slice_w(problem, u, x), k);
    let r0: Vec<f64> = (0..ns).map(|x| weight(problem.u0(), x)).collect();
    let r1: Vec<f64> = (0..ns).map(|x| weight(problem.u1(), x)).collect();
    let mut slices = Vec::with_capacity(g.nt);
    let mut guess = problem.u0().to_vec();
    for m in 1..=g.nt {
        let t = g.t(m);
        let rhs: Vec<f64> = r0.iter().zip(&r1).map(|(a, b)| (1.0 - t) * a + t * b).collect();
        let (u, t) = elliptic_slice_solve(problem, m, &rhs, &guess, opts).map_err(|e| {
            if let Error::Solver { trace: t, .. } = &e {
                trace.extend((**t).clone());
            }
            Error::Initialization {
                node: NodeRef { level: m, spatial: 0 },
                reason: format!("slice solve failed: {e}"),
            }
        })?;
        trace.extend(t);
        guess = u.clone();
        slices.push(u);
    }
    let v = SpacetimeField::with_boundary(g, problem.u0(), problem.u1(), |m, x| slices[m - 1][x]);
    convexify(&v, problem, opts.admissibility_margin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::Coefficients;
    use crate::grid::GridSpec;

    fn problem() -> Problem {
        let g = GridSpec::new(2, 8, 3).unwrap();
        let c = Coefficients::new(2, 2, 0.5, 0.0, -1.0).unwrap();
        Problem::constant(c, g, 1.5, 1.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn constant_solution_and_shift() {
        let p = problem();
        let ns = p.grid().spatial_len();
        let sk = sigma_unchecked(&SymMatrix::scaled_identity(2, 1.5), 2);
        let (ustar, delta) = (0.2f64, 0.05f64);
        let rhs = vec![(-4.0 * ustar).exp() * sk; ns];
        let opts = SolverOptions::default();
        let (u, _) = elliptic_slice_solve(&p, 1, &rhs, &vec![0.0; ns], &opts).unwrap();
        assert!(u.iter().all(|v| (v - ustar).abs() < 1e-10));
        let shifted: Vec<f64> = rhs.iter().map(|r| r * (-4.0 * delta).exp()).collect();
        let (v, _) = elliptic_slice_solve(&p, 1, &shifted, &u, &opts).unwrap();
        assert!(v.iter().all(|x| (x - ustar - delta).abs() < 1e-10));
    }

    #[test]
    fn requires_positive_gamma() {
        let p = problem().with_coefficients(Coefficients::new(2, 2, 0.0, 0.0, 1.0).unwrap()).unwrap();
        let ns = p.grid().spatial_len();
        assert!(elliptic_slice_solve(&p, 1, &vec![1.0; ns], &vec![0.0; ns], &SolverOptions::default()).is_err());
    }
}
