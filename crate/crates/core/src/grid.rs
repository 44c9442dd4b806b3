//! Discretization of `T^n × [0, 1]`: a periodic lattice with `nx` points
//! per axis (spacing `h = 1/nx`) crossed with `nt + 2` uniformly spaced time
//! levels whose first and last entries carry the Dirichlet data.
//!
//! All derivatives are second-order central differences. Mixed spatial
//! derivatives use the four-point cross, so the discrete Hessian is
//! symmetric by construction.

use serde::Serialize;

use crate::conformal::Jet;
use crate::error::{Error, NodeRef, Result};
use crate::problem::Problem;
use crate::symfunc::{SymMatrix, MAX_DIM};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
pub struct GridSpec {
    /// Spatial dimension.
    pub n: usize,
    /// Points per spatial axis.
    pub nx: usize,
    /// Interior time levels.
    pub nt: usize,
}

impl GridSpec {
    pub fn new(n: usize, nx: usize, nt: usize) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::Parameter(format!(
                "dimension n = {n} outside 1..={MAX_DIM}"
            )));
        }
        if nx < 4 {
            return Err(Error::Parameter(format!("nx = {nx} must be >= 4")));
        }
        if nt < 1 {
            return Err(Error::Parameter("nt must be >= 1".into()));
        }
        if (nx as f64).powi(n as i32) * (nt + 2) as f64 > u32::MAX as f64 {
            return Err(Error::Parameter("grid too large".into()));
        }
        Ok(Self { n, nx, nt })
    }

    /// Spatial spacing `1/nx`.
    pub fn h(&self) -> f64 {
        1.0 / self.nx as f64
    }

    /// Time spacing `1/(nt+1)`.
    pub fn dt(&self) -> f64 {
        1.0 / (self.nt + 1) as f64
    }

    /// Number of spatial nodes, `nx^n`.
    pub fn spatial_len(&self) -> usize {
        self.nx.pow(self.n as u32)
    }

    pub fn levels(&self) -> usize {
        self.nt + 2
    }

    pub fn len(&self) -> usize {
        self.levels() * self.spatial_len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of unknowns (interior levels only).
    pub fn interior_len(&self) -> usize {
        self.nt * self.spatial_len()
    }

    pub fn t(&self, level: usize) -> f64 {
        level as f64 * self.dt()
    }

    pub fn index(&self, node: NodeRef) -> usize {
        node.level * self.spatial_len() + node.spatial
    }

    /// Node of an interior unknown, `0..interior_len()`.
    pub fn interior_node(&self, unknown: usize) -> NodeRef {
        let ns = self.spatial_len();
        NodeRef {
            level: unknown / ns + 1,
            spatial: unknown % ns,
        }
    }

    /// Inverse of [`GridSpec::interior_node`]; `None` on boundary levels.
    pub fn unknown_of(&self, level: usize, spatial: usize) -> Option<usize> {
        (1..=self.nt)
            .contains(&level)
            .then(|| (level - 1) * self.spatial_len() + spatial)
    }

    fn stride(&self, axis: usize) -> usize {
        self.nx.pow((self.n - 1 - axis) as u32)
    }

    /// Integer coordinate of `spatial` along `axis`.
    pub fn coord(&self, spatial: usize, axis: usize) -> usize {
        (spatial / self.stride(axis)) % self.nx
    }

    /// Position of a spatial node in `[0, 1)^n`.
    pub fn position(&self, spatial: usize) -> Vec<f64> {
        (0..self.n)
            .map(|d| self.coord(spatial, d) as f64 * self.h())
            .collect()
    }

    /// Periodic neighbour of `spatial` shifted by `offset` along `axis`.
    #[inline]
    pub fn shift(&self, spatial: usize, axis: usize, offset: isize) -> usize {
        let stride = self.stride(axis);
        let c = (spatial / stride) % self.nx;
        let nc = (c as isize + offset).rem_euclid(self.nx as isize) as usize;
        spatial + nc * stride - c * stride
    }
}

/// Scalar values on all nodes, time-major then lexicographic in space.
#[derive(Clone, Debug, PartialEq)]
pub struct SpacetimeField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl SpacetimeField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Input(format!(
                "field has {} values, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(x, t)` at every node, boundary levels included.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64], f64) -> f64) -> Self {
        let ns = grid.spatial_len();
        let positions: Vec<Vec<f64>> = (0..ns).map(|s| grid.position(s)).collect();
        let values = (0..grid.levels())
            .flat_map(|m| {
                let t = grid.t(m);
                positions.iter().map(move |x| (x, t))
            })
            .map(|(x, t)| f(x, t))
            .collect();
        Self { grid, values }
    }

    /// Boundary slices from `u0`, `u1`; interior levels from `interior`.
    pub fn with_boundary(
        grid: GridSpec,
        u0: &[f64],
        u1: &[f64],
        interior: impl Fn(usize, usize) -> f64,
    ) -> Self {
        let ns = grid.spatial_len();
        let last = grid.nt + 1;
        let values = (0..grid.levels())
            .flat_map(|m| (0..ns).map(move |s| (m, s)))
            .map(|(m, s)| match m {
                0 => u0[s],
                m if m == last => u1[s],
                m => interior(m, s),
            })
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, level: usize, spatial: usize) -> f64 {
        self.values[level * self.grid.spatial_len() + spatial]
    }

    pub fn level(&self, level: usize) -> &[f64] {
        let ns = self.grid.spatial_len();
        &self.values[level * ns..(level + 1) * ns]
    }

    /// Values on interior levels, in unknown order.
    pub fn interior(&self) -> &[f64] {
        let ns = self.grid.spatial_len();
        &self.values[ns..ns * (self.grid.nt + 1)]
    }

    /// Mutable access to interior levels only; boundary slices are never
    /// handed out mutably.
    pub fn interior_mut(&mut self) -> &mut [f64] {
        let ns = self.grid.spatial_len();
        &mut self.values[ns..ns * (self.grid.nt + 1)]
    }

    /// Copy with the interior replaced by `interior + scale · step`.
    pub fn stepped(&self, step: &[f64], scale: f64) -> Self {
        let mut out = self.clone();
        for (x, d) in out.interior_mut().iter_mut().zip(step) {
            *x += scale * d;
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Derivative data of a field at one interior node; `A` and `ψ` are left
/// zero (see [`jet_at`] for the problem-aware version).
pub fn field_jet(field: &SpacetimeField, node: NodeRef) -> Result<Jet> {
    let g = &field.grid;
    if node.level == 0 || node.level > g.nt {
        return Err(Error::NodeDomain {
            node,
            reason: "jets are only defined on interior time levels".into(),
            margin: 0.0,
        });
    }
    Ok(interior_jet(field, node.level, node.spatial))
}

/// Full jet at an interior node, with the local `A` and `ψ` of `problem`.
pub fn jet_at(field: &SpacetimeField, node: NodeRef, problem: &Problem) -> Result<Jet> {
    let mut jet = field_jet(field, node)?;
    jet.a_here = *problem.a_at(node.spatial);
    jet.psi_here = problem.psi_at(node);
    Ok(jet)
}

pub(crate) fn interior_jet(field: &SpacetimeField, m: usize, s: usize) -> Jet {
    let g = &field.grid;
    let (prev, cur, next) = (field.level(m - 1), field.level(m), field.level(m + 1));
    let mut jet = spatial_jet(g, cur, s);
    let dt = g.dt();
    let h = g.h();
    jet.ut = (next[s] - prev[s]) / (2.0 * dt);
    jet.utt = (next[s] - 2.0 * cur[s] + prev[s]) / (dt * dt);
    for i in 0..g.n {
        let (p, q) = (g.shift(s, i, 1), g.shift(s, i, -1));
        jet.grad_ut[i] = (next[p] - next[q] - prev[p] + prev[q]) / (4.0 * dt * h);
    }
    jet
}

/// Spatial jet of one slice: `u`, `∇u`, `∇²u`; time derivatives zero.
pub fn spatial_jet(g: &GridSpec, values: &[f64], s: usize) -> Jet {
    let n = g.n;
    let h = g.h();
    let mut jet = Jet::zero(n);
    let u = values[s];
    jet.u = u;
    for i in 0..n {
        let (p, q) = (g.shift(s, i, 1), g.shift(s, i, -1));
        jet.grad_u[i] = (values[p] - values[q]) / (2.0 * h);
        jet.hess_u.set(i, i, (values[p] - 2.0 * u + values[q]) / (h * h));
        for j in i + 1..n {
            let pp = g.shift(p, j, 1);
            let pm = g.shift(p, j, -1);
            let mp = g.shift(q, j, 1);
            let mm = g.shift(q, j, -1);
            jet.hess_u.set(
                i,
                j,
                (values[pp] - values[pm] - values[mp] + values[mm]) / (4.0 * h * h),
            );
        }
    }
    jet
}

/// Coefficients of a linear functional of the jet of a perturbation `v`:
///
/// ```text
/// L(v) = zero·v + t·v_t + tt·v_tt + Σ ti_i v_ti + Σ i_i v_i + Σ_ij ij_ij v_ij
/// ```
///
/// where the last sum runs over all ordered pairs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JetFunctional {
    pub zero: f64,
    pub t: f64,
    pub tt: f64,
    pub ti: [f64; MAX_DIM],
    pub i: [f64; MAX_DIM],
    pub ij: SymMatrix,
}

impl JetFunctional {
    pub fn zero(n: usize) -> Self {
        Self {
            zero: 0.0,
            t: 0.0,
            tt: 0.0,
            ti: [0.0; MAX_DIM],
            i: [0.0; MAX_DIM],
            ij: SymMatrix::zeros(n),
        }
    }
}

/// Expands `L` at the interior node `(m, s)` into stencil weights on global
/// node indices. Entries may repeat; callers sum duplicates.
pub fn scatter_spacetime(g: &GridSpec, m: usize, s: usize, l: &JetFunctional, out: &mut Vec<(usize, f64)>) {
    let ns = g.spatial_len();
    let base = |level: usize, sp: usize| level * ns + sp;
    let dt = g.dt();
    let h = g.h();
    scatter_spatial_into(g, s, l, |sp, w| out.push((base(m, sp), w)));
    if l.t != 0.0 {
        let w = l.t / (2.0 * dt);
        out.push((base(m + 1, s), w));
        out.push((base(m - 1, s), -w));
    }
    if l.tt != 0.0 {
        let w = l.tt / (dt * dt);
        out.push((base(m + 1, s), w));
        out.push((base(m, s), -2.0 * w));
        out.push((base(m - 1, s), w));
    }
    for i in 0..g.n {
        if l.ti[i] == 0.0 {
            continue;
        }
        let w = l.ti[i] / (4.0 * dt * h);
        let (p, q) = (g.shift(s, i, 1), g.shift(s, i, -1));
        out.push((base(m + 1, p), w));
        out.push((base(m + 1, q), -w));
        out.push((base(m - 1, p), -w));
        out.push((base(m - 1, q), w));
    }
}

/// Spatial part of [`scatter_spacetime`] on a single slice; the `t`, `tt`
/// and `ti` coefficients are ignored.
pub fn scatter_spatial(g: &GridSpec, s: usize, l: &JetFunctional, out: &mut Vec<(usize, f64)>) {
    scatter_spatial_into(g, s, l, |sp, w| out.push((sp, w)));
}

fn scatter_spatial_into(g: &GridSpec, s: usize, l: &JetFunctional, mut emit: impl FnMut(usize, f64)) {
    let h = g.h();
    let h2 = h * h;
    if l.zero != 0.0 {
        emit(s, l.zero);
    }
    for i in 0..g.n {
        let (p, q) = (g.shift(s, i, 1), g.shift(s, i, -1));
        if l.i[i] != 0.0 {
            let w = l.i[i] / (2.0 * h);
            emit(p, w);
            emit(q, -w);
        }
        let d = l.ij.get(i, i);
        if d != 0.0 {
            emit(p, d / h2);
            emit(s, -2.0 * d / h2);
            emit(q, d / h2);
        }
        for j in i + 1..g.n {
            // Both (i,j) and (j,i) read the same cross stencil.
            let c = 2.0 * l.ij.get(i, j);
            if c == 0.0 {
                continue;
            }
            let w = c / (4.0 * h2);
            emit(g.shift(p, j, 1), w);
            emit(g.shift(p, j, -1), -w);
            emit(g.shift(q, j, 1), -w);
            emit(g.shift(q, j, -1), w);
        }
    }
}

/// Maxima over interior nodes of the quantities bounded by the a priori
/// estimates. Vector quantities use the Euclidean norm, `∇²u` the
/// Frobenius norm.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SupNorms {
    pub u: f64,
    pub ut: f64,
    pub grad_u: f64,
    /// Largest value of `u_tt` (signed).
    pub utt_max: f64,
    pub hess_u: f64,
    pub grad_ut: f64,
}

pub fn sup_norms(field: &SpacetimeField) -> SupNorms {
    let g = field.grid;
    let mut out = SupNorms {
        utt_max: f64::NEG_INFINITY,
        ..Default::default()
    };
    for m in 1..=g.nt {
        for s in 0..g.spatial_len() {
            let j = interior_jet(field, m, s);
            let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
            out.u = out.u.max(j.u.abs());
            out.ut = out.ut.max(j.ut.abs());
            out.grad_u = out.grad_u.max(norm(j.grad()));
            out.utt_max = out.utt_max.max(j.utt);
            out.hess_u = out.hess_u.max(j.hess_u.contract(&j.hess_u).sqrt());
            out.grad_ut = out.grad_ut.max(norm(j.grad_t()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_small_grids() {
        assert!(GridSpec::new(2, 3, 5).is_err());
        assert!(GridSpec::new(2, 8, 0).is_err());
        assert!(GridSpec::new(0, 8, 3).is_err());
    }

    #[test]
    fn shift_wraps() {
        let g = GridSpec::new(2, 4, 1).unwrap();
        // spatial index = 4·i0 + i1
        assert_eq!(g.shift(0, 0, -1), 12);
        assert_eq!(g.shift(3, 1, 1), 0);
        assert_eq!(g.shift(5, 0, 4), 5);
        assert_eq!(g.coord(13, 0), 3);
        assert_eq!(g.coord(13, 1), 1);
    }

    #[test]
    fn constant_field_has_zero_derivatives() {
        let g = GridSpec::new(2, 6, 3).unwrap();
        let f = SpacetimeField::from_fn(g, |_, _| 1.5);
        let j = field_jet(&f, NodeRef { level: 2, spatial: 7 }).unwrap();
        assert_eq!(j.u, 1.5);
        assert_eq!((j.ut, j.utt), (0.0, 0.0));
        assert_eq!(j.hess_u, SymMatrix::zeros(2));
        assert!(j.grad().iter().chain(j.grad_t()).all(|&x| x == 0.0));
    }

    #[test]
    fn time_quadratic_is_exact() {
        let g = GridSpec::new(2, 4, 5).unwrap();
        let f = SpacetimeField::from_fn(g, |_, t| t * t);
        for m in 1..=g.nt {
            let j = field_jet(&f, NodeRef { level: m, spatial: 3 }).unwrap();
            assert!((j.utt - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_levels_have_no_jet() {
        let g = GridSpec::new(1, 4, 2).unwrap();
        let f = SpacetimeField::from_fn(g, |_, t| t);
        assert!(field_jet(&f, NodeRef { level: 0, spatial: 0 }).is_err());
        assert!(field_jet(&f, NodeRef { level: 3, spatial: 0 }).is_err());
    }

    #[test]
    fn gradient_is_second_order() {
        let err = |nx: usize| {
            let g = GridSpec::new(2, nx, 1).unwrap();
            let f = SpacetimeField::from_fn(g, |x, _| (2.0 * PI * x[0]).sin());
            (0..g.spatial_len())
                .map(|s| {
                    let j = field_jet(&f, NodeRef { level: 1, spatial: s }).unwrap();
                    let x = g.position(s);
                    (j.grad_u[0] - 2.0 * PI * (2.0 * PI * x[0]).cos()).abs()
                })
                .fold(0.0, f64::max)
        };
        let order = (err(16) / err(32)).log2();
        assert!((order - 2.0).abs() <= 0.2, "order {order}");
    }

    #[test]
    fn periodic_translation_is_bitwise() {
        let g = GridSpec::new(2, 8, 2).unwrap();
        let f = SpacetimeField::from_fn(g, |x, t| (2.0 * PI * x[0]).cos() * (1.0 + t) + x[1] * 0.0);
        let a = field_jet(&f, NodeRef { level: 1, spatial: 9 }).unwrap();
        let s = g.shift(g.shift(9, 0, 8), 1, -8);
        let b = field_jet(&f, NodeRef { level: 1, spatial: s }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sup_norm_examples() {
        let g = GridSpec::new(2, 4, 3).unwrap();
        let z = sup_norms(&SpacetimeField::from_fn(g, |_, _| 0.0));
        assert_eq!(z, SupNorms::default());

        let lin = sup_norms(&SpacetimeField::from_fn(g, |_, t| t));
        assert!((lin.ut - 1.0).abs() < 1e-12);
        assert!(lin.utt_max.abs() < 1e-12);
        assert_eq!((lin.grad_u, lin.hess_u, lin.grad_ut), (0.0, 0.0, 0.0));
        assert!((lin.u - 0.75).abs() < 1e-15);
    }

    #[test]
    fn scatter_matches_jet() {
        // L(v) applied through the stencil equals L evaluated on the jet.
        let g = GridSpec::new(2, 5, 3).unwrap();
        let f = SpacetimeField::from_fn(g, |x, t| {
            (2.0 * PI * x[0]).sin() * (1.0 + t * t) + (2.0 * PI * (x[0] + 2.0 * x[1])).cos() * t
        });
        let mut l = JetFunctional::zero(2);
        l.zero = 0.3;
        l.t = -0.7;
        l.tt = 1.1;
        l.ti = [0.2, -0.4, 0., 0., 0., 0., 0., 0.];
        l.i = [0.9, 0.5, 0., 0., 0., 0., 0., 0.];
        l.ij = SymMatrix::from_rows(&[vec![1.3, -0.6], vec![-0.6, 0.8]]).unwrap();
        let (m, s) = (2, 11);
        let j = interior_jet(&f, m, s);
        let direct = l.zero * j.u
            + l.t * j.ut
            + l.tt * j.utt
            + (0..2).map(|i| l.ti[i] * j.grad_ut[i] + l.i[i] * j.grad_u[i]).sum::<f64>()
            + l.ij.contract(&j.hess_u);
        let mut entries = Vec::new();
        scatter_spacetime(&g, m, s, &l, &mut entries);
        let via: f64 = entries.iter().map(|&(idx, w)| w * f.values()[idx]).sum();
        assert!((direct - via).abs() < 1e-10 * direct.abs().max(1.0));
    }
}
