//! Nodewise evaluation of the discrete operator over all interior nodes.
//!
//! Every function here maps over interior unknowns in parallel and collects
//! in unknown order, so results do not depend on the thread count.

use rayon::prelude::*;

use crate::conformal::{classify_admissible, f_k_of, assemble_r, log_f, Admissibility, Jet};
use crate::error::{Error, NodeRef, Result};
use crate::grid::{interior_jet, SpacetimeField};
use crate::problem::Problem;

/// Jet at interior unknown `idx`, with the local `A` and `ψ`.
pub fn jet_of_unknown(field: &SpacetimeField, problem: &Problem, idx: usize) -> Jet {
    let g = field.grid();
    let node = g.interior_node(idx);
    let mut jet = interior_jet(field, node.level, node.spatial);
    jet.a_here = *problem.a_at(node.spatial);
    jet.psi_here = problem.psi_at(node);
    jet
}

/// All interior jets in unknown order.
pub fn interior_jets(field: &SpacetimeField, problem: &Problem) -> Vec<Jet> {
    (0..field.grid().interior_len())
        .into_par_iter()
        .map(|i| jet_of_unknown(field, problem, i))
        .collect()
}

/// `F_k(R)` at every interior node (direct branch, defined for any jet).
pub fn f_k_field(field: &SpacetimeField, problem: &Problem) -> Vec<f64> {
    let k = problem.coefficients().k;
    (0..field.grid().interior_len())
        .into_par_iter()
        .map(|i| f_k_of(&assemble_r(&jet_of_unknown(field, problem, i), problem.coefficients()), k))
        .collect()
}

/// `ln F_k` at every interior node via `u_tt^{1−k} σ_k(E)`; fails at the
/// worst node if any node is not strictly admissible.
pub fn log_f_field(field: &SpacetimeField, problem: &Problem) -> Result<Vec<f64>> {
    let c = problem.coefficients();
    let values: Vec<Result<f64>> = (0..field.grid().interior_len())
        .into_par_iter()
        .map(|i| log_f(&jet_of_unknown(field, problem, i), c))
        .collect();
    if values.iter().any(Result::is_err) {
        let scan = scan_admissibility(field, problem, 0.0);
        return Err(scan.into_error("log residual undefined"));
    }
    Ok(values.into_iter().map(|v| v.expect("checked above")).collect())
}

/// `ln F_k − ln_rhs` at every interior node.
pub fn log_residual_field(field: &SpacetimeField, problem: &Problem, ln_rhs: &[f64]) -> Result<Vec<f64>> {
    let mut r = log_f_field(field, problem)?;
    for (x, b) in r.iter_mut().zip(ln_rhs) {
        *x -= b;
    }
    Ok(r)
}

pub fn sup_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Summary of admissibility over all interior nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdmissibilityScan {
    /// Smallest of the three margins over all nodes.
    pub min_margin: f64,
    pub worst_node: NodeRef,
    pub strict: usize,
    pub degenerate: usize,
    pub violated: usize,
}

impl AdmissibilityScan {
    pub fn all_strict(&self) -> bool {
        self.degenerate == 0 && self.violated == 0
    }

    pub fn into_error(self, what: &str) -> Error {
        Error::NodeDomain {
            node: self.worst_node,
            reason: format!(
                "{what}: {} node(s) not strictly admissible",
                self.degenerate + self.violated
            ),
            margin: self.min_margin,
        }
    }
}

pub fn scan_admissibility(field: &SpacetimeField, problem: &Problem, margin: f64) -> AdmissibilityScan {
    let c = problem.coefficients();
    let g = field.grid();
    let verdicts: Vec<_> = (0..g.interior_len())
        .into_par_iter()
        .map(|i| classify_admissible(&jet_of_unknown(field, problem, i), c, margin))
        .collect();
    let mut scan = AdmissibilityScan {
        min_margin: f64::INFINITY,
        worst_node: g.interior_node(0),
        strict: 0,
        degenerate: 0,
        violated: 0,
    };
    for (i, v) in verdicts.iter().enumerate() {
        match v.class {
            Admissibility::Strict => scan.strict += 1,
            Admissibility::Degenerate => scan.degenerate += 1,
            Admissibility::Violated => scan.violated += 1,
        }
        // NaN margins count as worst.
        let w = if v.worst().is_nan() { f64::NEG_INFINITY } else { v.worst() };
        if w < scan.min_margin {
            scan.min_margin = w;
            scan.worst_node = g.interior_node(i);
        }
    }
    scan
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::Coefficients;
    use crate::grid::GridSpec;

    #[test]
    fn convex_path_is_admissible_and_f_matches() {
        let g = GridSpec::new(2, 4, 3).unwrap();
        let c = Coefficients::new(2, 2, 0.0, 0.0, 1.0).unwrap();
        let p = Problem::constant(c, g, 1.0, 1.0, 0.0, 0.0).unwrap();
        let f = SpacetimeField::from_fn(g, |_, t| t * (t - 1.0));
        let scan = scan_admissibility(&f, &p, 1e-10);
        assert!(scan.all_strict());
        // u_tt = 2 exactly, W = I, so F_2 = 2·σ_2(I) = 2.
        for v in f_k_field(&f, &p) {
            assert!((v - 2.0).abs() < 1e-12);
        }
        let lf = log_f_field(&f, &p).unwrap();
        assert!(lf.iter().all(|x| (x - 2f64.ln()).abs() < 1e-12));
    }

    #[test]
    fn flat_path_names_a_node() {
        let g = GridSpec::new(2, 4, 3).unwrap();
        let c = Coefficients::new(2, 2, 0.0, 0.0, 1.0).unwrap();
        let p = Problem::constant(c, g, 1.0, 1.0, 0.0, 0.0).unwrap();
        let f = SpacetimeField::from_fn(g, |_, _| 0.0);
        let err = log_f_field(&f, &p).unwrap_err();
        assert!(matches!(err, Error::NodeDomain { margin, .. } if margin == 0.0));
    }
}
