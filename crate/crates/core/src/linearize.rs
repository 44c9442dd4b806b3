//! Linearization of the log-form operator `G(R) = ln F_k(R)`.
//!
//! At a strictly admissible jet the derivative of `ln F_k` in the direction
//! of a perturbation `v` is
//!
//! ```text
//! 𝕃(v) = g_tt v_tt + 2 g_ti v_ti
//!      + g_ij (v_ij + s u_i v_j + s u_j v_i + (γ Δv − r ∇u·∇v) δ_ij)
//! ```
//!
//! with the coefficients of [`GCoefficients`]. Because every jet entry is a
//! linear stencil of the nodal values, the discrete Jacobian is exactly the
//! stencil expansion of `𝕃` at each interior node.

use std::io::Write;

use rayon::prelude::*;

use crate::conformal::{assemble_e, assemble_w, classify_admissible, Admissibility, Coefficients, Jet};
use crate::discrete::{jet_of_unknown, scan_admissibility};
use crate::error::{Error, Result};
use crate::grid::{scatter_spacetime, JetFunctional, SpacetimeField};
use crate::problem::Problem;
use crate::symfunc::{sigma_grad_unchecked, sigma_unchecked, SymMatrix, MAX_DIM};

/// Coefficients of `𝕃` at one jet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GCoefficients {
    pub g_tt: f64,
    pub g_ti: [f64; MAX_DIM],
    pub g_ij: SymMatrix,
}

impl GCoefficients {
    pub fn dim(&self) -> usize {
        self.g_ij.dim()
    }

    pub fn g_t(&self) -> &[f64] {
        &self.g_ti[..self.dim()]
    }
}

fn require_strict(jet: &Jet, c: &Coefficients) -> Result<()> {
    let v = classify_admissible(jet, c, 0.0);
    if v.class == Admissibility::Strict {
        Ok(())
    } else {
        Err(Error::Domain {
            reason: "linearization requires a strictly admissible jet".into(),
            margin: v.worst(),
        })
    }
}

/// ```text
/// g_tt = σ_k(W) u_tt^{k−1} / σ_k(E)
/// g_ti = −σ_k^{ij}(E) u_tj / σ_k(E)
/// g_ij = u_tt σ_k^{ij}(E) / σ_k(E)
/// ```
pub fn g_coefficients(jet: &Jet, c: &Coefficients) -> Result<GCoefficients> {
    require_strict(jet, c)?;
    Ok(g_unchecked(jet, c))
}

fn g_unchecked(jet: &Jet, c: &Coefficients) -> GCoefficients {
    let k = c.k;
    let n = jet.dim();
    let w = assemble_w(jet, c);
    let e = jet.utt * w - SymMatrix::outer(jet.grad_t());
    let sk_e = sigma_unchecked(&e, k);
    let grad_e = sigma_grad_unchecked(&e, k);
    let g_tt = sigma_unchecked(&w, k) * jet.utt.powi(k as i32 - 1) / sk_e;
    let mut g_ti = [0.0; MAX_DIM];
    for (i, gi) in grad_e.matvec(jet.grad_t()).into_iter().enumerate() {
        g_ti[i] = -gi / sk_e;
    }
    let g_ij = (jet.utt / sk_e) * grad_e;
    debug_assert_eq!(g_ij.dim(), n);
    GCoefficients { g_tt, g_ti, g_ij }
}

/// Adds to `out` the chain rule through `W`: the functional
/// `v ↦ Σ_ij m_ij δW_ij[v]` where
/// `δW_ij = v_ij + s(u_i v_j + u_j v_i) + (γ Δv − r ∇u·∇v) δ_ij`.
pub fn add_w_chain(m: &SymMatrix, jet: &Jet, c: &Coefficients, out: &mut JetFunctional) {
    let n = jet.dim();
    let tr = m.trace();
    let mu = m.matvec(jet.grad());
    for i in 0..n {
        out.i[i] += 2.0 * c.s * mu[i] - c.r * jet.grad_u[i] * tr;
        for j in i..n {
            let extra = if i == j { c.gamma * tr } else { 0.0 };
            out.ij.set(i, j, out.ij.get(i, j) + m.get(i, j) + extra);
        }
    }
}

/// `𝕃` at a strictly admissible jet, as a functional of the jet of `v`.
pub fn linearized_functional(jet: &Jet, c: &Coefficients) -> Result<JetFunctional> {
    let g = g_coefficients(jet, c)?;
    Ok(functional_of(&g, jet, c))
}

fn functional_of(g: &GCoefficients, jet: &Jet, c: &Coefficients) -> JetFunctional {
    let n = jet.dim();
    let mut l = JetFunctional::zero(n);
    l.tt = g.g_tt;
    for i in 0..n {
        l.ti[i] = 2.0 * g.g_ti[i];
    }
    add_w_chain(&g.g_ij, jet, c, &mut l);
    l
}

/// Principal symbol of the un-normalized linearization in the completed
/// square form
///
/// ```text
/// u_tt⁻¹ σ_k(E) ξ_0² + (n−k+1) σ_{k−1}(E) γ u_tt |ξ|²
///   + σ_k^{ij}(E) (u_ti ξ_0/√u_tt − √u_tt ξ_i)(u_tj ξ_0/√u_tt − √u_tt ξ_j)
/// ```
///
/// where `ξ = (ξ_0, ξ_1, …, ξ_n)`.
pub fn ellipticity_form(jet: &Jet, c: &Coefficients, xi: &[f64]) -> Result<f64> {
    let (n, e, grad_e) = symbol_parts(jet, c, xi)?;
    let utt = jet.utt;
    let sq = utt.sqrt();
    let x: Vec<f64> = (0..n).map(|i| jet.grad_ut[i] * xi[0] / sq - sq * xi[i + 1]).collect();
    let spatial: f64 = xi[1..].iter().map(|v| v * v).sum();
    let sk1 = if c.k > 1 { sigma_unchecked(&e, c.k - 1) } else { 1.0 };
    Ok(sigma_unchecked(&e, c.k) / utt * xi[0] * xi[0]
        + (n - c.k + 1) as f64 * sk1 * c.gamma * utt * spatial
        + grad_e.quad(&x))
}

/// The same quadratic form read off from the coefficients directly:
///
/// ```text
/// ((1−k) σ_k(E)/u_tt + σ_k^{ij}(E) W_ij) ξ_0² − 2 σ_k^{ij}(E) u_tj ξ_0 ξ_i
///   + (σ_k^{ij}(E) + (n−k+1) σ_{k−1}(E) γ δ_ij) u_tt ξ_i ξ_j
/// ```
pub fn ellipticity_form_direct(jet: &Jet, c: &Coefficients, xi: &[f64]) -> Result<f64> {
    let (n, e, grad_e) = symbol_parts(jet, c, xi)?;
    let utt = jet.utt;
    let w = assemble_w(jet, c);
    let sk1 = if c.k > 1 { sigma_unchecked(&e, c.k - 1) } else { 1.0 };
    let c00 = (1.0 - c.k as f64) * sigma_unchecked(&e, c.k) / utt + grad_e.contract(&w);
    let cross: f64 = grad_e
        .matvec(jet.grad_t())
        .iter()
        .zip(&xi[1..])
        .map(|(a, b)| a * b)
        .sum();
    let mut spatial = grad_e;
    for i in 0..n {
        spatial.set(i, i, spatial.get(i, i) + (n - c.k + 1) as f64 * sk1 * c.gamma);
    }
    Ok(c00 * xi[0] * xi[0] - 2.0 * xi[0] * cross + utt * spatial.quad(&xi[1..]))
}

fn symbol_parts(jet: &Jet, c: &Coefficients, xi: &[f64]) -> Result<(usize, SymMatrix, SymMatrix)> {
    let n = jet.dim();
    if xi.len() != n + 1 {
        return Err(Error::Input(format!("xi must have {} entries, got {}", n + 1, xi.len())));
    }
    require_strict(jet, c)?;
    let e = assemble_e(jet, c);
    let grad_e = sigma_grad_unchecked(&e, c.k);
    Ok((n, e, grad_e))
}

/// Square sparse matrix over interior unknowns in compressed-row form.
/// Column indices within a row are strictly increasing.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
}

impl SparseOperator {
    /// Builds from per-row `(column, value)` lists; duplicates are summed.
    pub fn from_rows(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        if rows.len() != n {
            return Err(Error::Input(format!("{} rows for a {n}x{n} operator", rows.len())));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col = Vec::new();
        let mut val = Vec::new();
        row_ptr.push(0);
        for (r, mut entries) in rows.into_iter().enumerate() {
            entries.sort_by_key(|e| e.0);
            for (c, v) in entries {
                if c >= n || !v.is_finite() {
                    return Err(Error::Input(format!("bad entry ({r}, {c}) = {v}")));
                }
                if col.len() > row_ptr[r] && *col.last().expect("nonempty") == c {
                    *val.last_mut().expect("nonempty") += v;
                } else {
                    col.push(c);
                    val.push(v);
                }
            }
            row_ptr.push(col.len());
        }
        Ok(Self { n, row_ptr, col, val })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col[range.clone()].iter().copied().zip(self.val[range].iter().copied())
    }

    pub fn max_row_len(&self) -> usize {
        self.row_ptr.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0)
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col[range.clone()].binary_search(&c) {
            Ok(p) => self.val[range.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.get(r, r)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    /// Coordinate text dump: one `row col value` line per stored entry.
    pub fn write_coordinate(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "% {} {} {}", self.n, self.n, self.nnz())?;
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                writeln!(w, "{r} {c} {v:e}")?;
            }
        }
        Ok(())
    }

    pub(crate) fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }
}

/// Jacobian of the stacked discrete log residual with respect to the
/// interior values. Boundary levels are data, so their stencil weights are
/// dropped.
pub fn assemble_jacobian(field: &SpacetimeField, problem: &Problem) -> Result<SparseOperator> {
    let g = *field.grid();
    let c = problem.coefficients();
    let ns = g.spatial_len();
    let rows: Vec<Option<Vec<(usize, f64)>>> = (0..g.interior_len())
        .into_par_iter()
        .map(|idx| {
            let jet = jet_of_unknown(field, problem, idx);
            let l = linearized_functional(&jet, c).ok()?;
            let node = g.interior_node(idx);
            let mut stencil = Vec::with_capacity(32);
            scatter_spacetime(&g, node.level, node.spatial, &l, &mut stencil);
            Some(
                stencil
                    .into_iter()
                    .filter_map(|(global, w)| g.unknown_of(global / ns, global % ns).map(|u| (u, w)))
                    .collect(),
            )
        })
        .collect();
    if rows.iter().any(Option::is_none) {
        return Err(scan_admissibility(field, problem, 0.0).into_error("Jacobian undefined"));
    }
    SparseOperator::from_rows(g.interior_len(), rows.into_iter().map(|r| r.expect("checked")).collect())
}
