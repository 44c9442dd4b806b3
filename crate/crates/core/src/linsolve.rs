//! Linear solves with the Newton Jacobian.
//!
//! The default is a sparse LU factorization. Restarted GMRES with a
//! pointwise-diagonal left preconditioner is available as an alternative;
//! when it stalls, systems up to [`LU_FALLBACK_LIMIT`] unknowns fall back to
//! the factorization.

use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};
use faer::prelude::Solve;
use faer::Col;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linearize::SparseOperator;

pub const LU_FALLBACK_LIMIT: usize = 20_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LinearSolver {
    #[default]
    SparseLu,
    Gmres { restart: usize, max_iter: usize, rtol: f64 },
}

pub fn solve(op: &SparseOperator, b: &[f64], kind: LinearSolver) -> Result<Vec<f64>> {
    if b.len() != op.dim() {
        return Err(Error::LinearSolve(format!(
            "right side has {} entries, operator is {}x{}",
            b.len(),
            op.dim(),
            op.dim()
        )));
    }
    match kind {
        LinearSolver::SparseLu => sparse_lu(op, b),
        LinearSolver::Gmres { restart, max_iter, rtol } => match gmres(op, b, restart, max_iter, rtol) {
            Ok(x) => Ok(x),
            Err(_) if op.dim() <= LU_FALLBACK_LIMIT => sparse_lu(op, b),
            Err(e) => Err(e),
        },
    }
}

pub fn sparse_lu(op: &SparseOperator, b: &[f64]) -> Result<Vec<f64>> {
    let n = op.dim();
    let triplets: Vec<Triplet<usize, usize, f64>> =
        op.triplets().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::LinearSolve(format!("matrix assembly: {e:?}")))?;
    let symbolic = SymbolicLu::try_new(a.symbolic())
        .map_err(|e| Error::LinearSolve(format!("symbolic factorization: {e:?}")))?;
    let lu = Lu::try_new_with_symbolic(symbolic, a.as_ref())
        .map_err(|e| Error::LinearSolve(format!("numeric factorization: {e:?}")))?;
    let rhs = Col::<f64>::from_fn(n, |i| b[i]);
    let x = lu.solve(&rhs);
    let out: Vec<f64> = (0..n).map(|i| x[i]).collect();
    if out.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(Error::LinearSolve("factorization produced non-finite values (singular matrix?)".into()))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Restarted GMRES on `D⁻¹ A x = D⁻¹ b` with `D = diag(A)`.
pub fn gmres(op: &SparseOperator, b: &[f64], restart: usize, max_iter: usize, rtol: f64) -> Result<Vec<f64>> {
    let n = op.dim();
    let restart = restart.max(1);
    let dinv: Vec<f64> = op
        .diagonal()
        .into_iter()
        .map(|d| if d != 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let apply = |x: &[f64]| -> Vec<f64> { op.matvec(x).iter().zip(&dinv).map(|(v, d)| v * d).collect() };
    let pb: Vec<f64> = b.iter().zip(&dinv).map(|(v, d)| v * d).collect();
    let target = rtol * norm(&pb);
    let mut x = vec![0.0; n];
    if norm(&pb) == 0.0 {
        return Ok(x);
    }
    let mut iters = 0;
    while iters < max_iter {
        let ax = apply(&x);
        let r: Vec<f64> = pb.iter().zip(&ax).map(|(a, c)| a - c).collect();
        let beta = norm(&r);
        if beta <= target {
            return Ok(x);
        }
        let mut basis = vec![r.iter().map(|v| v / beta).collect::<Vec<f64>>()];
        let mut h = vec![vec![0.0; restart]; restart + 1];
        let (mut cs, mut sn) = (vec![0.0; restart], vec![0.0; restart]);
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut used = 0;
        for j in 0..restart {
            iters += 1;
            let mut w = apply(&basis[j]);
            for (i, v) in basis.iter().enumerate() {
                h[i][j] = dot(&w, v);
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= h[i][j] * vk;
                }
            }
            h[j + 1][j] = norm(&w);
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let rho = h[j][j].hypot(h[j + 1][j]);
            if rho == 0.0 {
                break;
            }
            cs[j] = h[j][j] / rho;
            sn[j] = h[j + 1][j] / rho;
            h[j][j] = rho;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            used = j + 1;
            let next_norm = norm(&w);
            if g[j + 1].abs() <= target || iters >= max_iter || next_norm == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / next_norm).collect());
        }
        let mut y = vec![0.0; used];
        for i in (0..used).rev() {
            let s: f64 = (i + 1..used).map(|l| h[i][l] * y[l]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (i, yi) in y.iter().enumerate() {
            for (xk, vk) in x.iter_mut().zip(&basis[i]) {
                *xk += yi * vk;
            }
        }
        if used == 0 {
            break;
        }
    }
    let ax = apply(&x);
    let res = norm(&pb.iter().zip(&ax).map(|(a, c)| a - c).collect::<Vec<_>>());
    if res <= target {
        Ok(x)
    } else {
        Err(Error::LinearSolve(format!(
            "GMRES did not converge in {max_iter} iterations (relative residual {:e})",
            res / norm(&pb)
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> SparseOperator {
        let rows = (0..n)
            .map(|i| {
                let mut r = vec![(i, 4.0)];
                if i > 0 {
                    r.push((i - 1, -1.0));
                }
                if i + 1 < n {
                    r.push((i + 1, -1.5));
                }
                r
            })
            .collect();
        SparseOperator::from_rows(n, rows).unwrap()
    }

    fn residual(op: &SparseOperator, x: &[f64], b: &[f64]) -> f64 {
        op.matvec(x).iter().zip(b).fold(0.0, |m, (a, c)| m.max((a - c).abs()))
    }

    #[test]
    fn lu_and_gmres_agree() {
        let op = tridiag(50);
        let b: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let x1 = solve(&op, &b, LinearSolver::SparseLu).unwrap();
        let x2 = gmres(&op, &b, 20, 500, 1e-13).unwrap();
        assert!(residual(&op, &x1, &b) < 1e-12);
        assert!(residual(&op, &x2, &b) < 1e-10);
    }

    #[test]
    fn gmres_falls_back() {
        let op = tridiag(30);
        let b = vec![1.0; 30];
        let x = solve(&op, &b, LinearSolver::Gmres { restart: 2, max_iter: 2, rtol: 1e-14 }).unwrap();
        assert!(residual(&op, &x, &b) < 1e-12);
    }

    #[test]
    fn singular_is_an_error() {
        let op = SparseOperator::from_rows(2, vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 1.0), (1, 1.0)]]).unwrap();
        assert!(sparse_lu(&op, &[1.0, 2.0]).is_err());
    }
}
