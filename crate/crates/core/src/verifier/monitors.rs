use std::fmt::Write as _;

use crate::conformal::assemble_w;
use crate::discrete::interior_jets;
use crate::grid::{sup_norms, SpacetimeField, SupNorms};
use crate::problem::Problem;

use super::CheckResult;

/// `u ≤ (1−t) u0 + t u1 + tol` and discrete `u_tt ≥ −tol` at every interior
/// node.
pub fn check_maximum_principle(solution: &SpacetimeField, problem: &Problem, tol: f64) -> CheckResult {
    let g = problem.grid();
    let jets = interior_jets(solution, problem);
    let mut violations = 0;
    let mut worst = (f64::INFINITY, g.interior_node(0));
    for (i, j) in jets.iter().enumerate() {
        let node = g.interior_node(i);
        let t = g.t(node.level);
        let chord = (1.0 - t) * problem.u0()[node.spatial] + t * problem.u1()[node.spatial];
        let margin = (chord + tol - j.u).min(j.utt + tol);
        if margin < 0.0 {
            violations += 1;
        }
        if margin < worst.0 {
            worst = (margin, node);
        }
    }
    CheckResult::new(
        "maximum-principle",
        jets.len(),
        violations,
        worst.0,
        format!("tol={tol:e} worst_node={}", worst.1),
    )
}

/// Sup norms of the solution and the pointwise consequence
/// `|∇u_t|² ≤ u_tt tr W[u] + tol` of `λ(E) ∈ Γ_1`.
pub fn monitor_estimates(solution: &SpacetimeField, problem: &Problem) -> (CheckResult, SupNorms) {
    monitor_estimates_with(solution, problem, 1e-8)
}

pub fn monitor_estimates_with(solution: &SpacetimeField, problem: &Problem, tol: f64) -> (CheckResult, SupNorms) {
    let g = problem.grid();
    let c = problem.coefficients();
    let jets = interior_jets(solution, problem);
    let mut violations = 0;
    let mut worst = (f64::INFINITY, g.interior_node(0));
    for (i, j) in jets.iter().enumerate() {
        let lhs: f64 = j.grad_t().iter().map(|v| v * v).sum();
        let margin = j.utt * assemble_w(j, c).trace() + tol - lhs;
        if margin < 0.0 {
            violations += 1;
        }
        if margin < worst.0 {
            worst = (margin, g.interior_node(i));
        }
    }
    let norms = sup_norms(solution);
    let check = CheckResult::new(
        "trace-inequality",
        jets.len(),
        violations,
        worst.0,
        format!(
            "tol={tol:e} worst_node={} |u|={:e} |u_t|={:e} |grad u|={:e} max u_tt={:e} |hess u|={:e} |grad u_t|={:e}",
            worst.1, norms.u, norms.ut, norms.grad_u, norms.utt_max, norms.hess_u, norms.grad_ut
        ),
    );
    (check, norms)
}

/// Sup norms tabulated against the regularization parameter.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EstimateTable {
    pub rows: Vec<(f64, SupNorms)>,
}

impl EstimateTable {
    pub fn push(&mut self, eps: f64, norms: SupNorms) {
        self.rows.push((eps, norms));
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("epsilon,u,u_t,grad_u,u_tt_max,hess_u,grad_u_t\n");
        for (e, n) in &self.rows {
            let _ = writeln!(
                s,
                "{e:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                n.u, n.ut, n.grad_u, n.utt_max, n.hess_u, n.grad_ut
            );
        }
        s
    }
}
