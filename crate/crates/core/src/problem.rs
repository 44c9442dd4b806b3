//! Gridded problem data: coefficients, the background tensor `A`, the right
//! side `ψ` and the boundary slices `u0`, `u1`.

use crate::conformal::{assemble_w, Coefficients};
use crate::error::{Error, NodeRef, Result};
use crate::grid::{spatial_jet, GridSpec, SpacetimeField};
use crate::symfunc::SymMatrix;

#[derive(Clone, Debug)]
pub struct Problem {
    coeffs: Coefficients,
    grid: GridSpec,
    a: Vec<SymMatrix>,
    psi: Vec<f64>,
    u0: Vec<f64>,
    u1: Vec<f64>,
}

impl Problem {
    /// Validates and bundles the data. `a` and the boundary slices are per
    /// spatial node, `psi` per spacetime node (boundary levels are stored
    /// but never read by the solver).
    ///
    /// Checks: `ψ ≥ 0` and finite, `λ(A) ∈ Γ_k` and `λ(W[u0]), λ(W[u1]) ∈ Γ_k`
    /// at every spatial node.
    pub fn new(
        coeffs: Coefficients,
        grid: GridSpec,
        a: Vec<SymMatrix>,
        psi: Vec<f64>,
        u0: Vec<f64>,
        u1: Vec<f64>,
    ) -> Result<Self> {
        if coeffs.n != grid.n {
            return Err(Error::Parameter(format!(
                "coefficients are for n = {} but the grid has n = {}",
                coeffs.n, grid.n
            )));
        }
        let ns = grid.spatial_len();
        for (name, len, want) in [
            ("A", a.len(), ns),
            ("psi", psi.len(), grid.len()),
            ("u0", u0.len(), ns),
            ("u1", u1.len(), ns),
        ] {
            if len != want {
                return Err(Error::Input(format!("{name} has {len} values, expected {want}")));
            }
        }
        if let Some(s) = a.iter().position(|m| m.dim() != grid.n || !m.is_finite()) {
            return Err(Error::Input(format!("A is malformed at spatial node {s}")));
        }
        if let Some(i) = psi.iter().position(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::Input(format!(
                "psi must be finite and >= 0; got {} at node {}",
                psi[i],
                node_of(&grid, i)
            )));
        }
        for (name, u) in [("u0", &u0), ("u1", &u1)] {
            if let Some(s) = u.iter().position(|x| !x.is_finite()) {
                return Err(Error::Input(format!("{name} is not finite at spatial node {s}")));
            }
        }
        let p = Self {
            coeffs,
            grid,
            a,
            psi,
            u0,
            u1,
        };
        p.check_cones()?;
        Ok(p)
    }

    /// Constant `A = a·I`, constant `ψ` and constant boundary values.
    pub fn constant(coeffs: Coefficients, grid: GridSpec, a: f64, psi: f64, u0: f64, u1: f64) -> Result<Self> {
        let ns = grid.spatial_len();
        Self::new(
            coeffs,
            grid,
            vec![SymMatrix::scaled_identity(grid.n, a); ns],
            vec![psi; grid.len()],
            vec![u0; ns],
            vec![u1; ns],
        )
    }

    fn check_cones(&self) -> Result<()> {
        let k = self.coeffs.k;
        let ns = self.grid.spatial_len();
        for s in 0..ns {
            let m = self.a[s].gamma_margin(k);
            if !(m > 0.0) {
                return Err(Error::Input(format!(
                    "A is outside Gamma_{k} at spatial node {s} (margin {m:e})"
                )));
            }
        }
        for (name, level, u) in [("u0", 0, &self.u0), ("u1", self.grid.nt + 1, &self.u1)] {
            for s in 0..ns {
                let m = self.spatial_w(u, s).gamma_margin(k);
                if !(m > 0.0) {
                    return Err(Error::NodeDomain {
                        node: NodeRef { level, spatial: s },
                        reason: format!("W[{name}] is outside Gamma_{k}"),
                        margin: m,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn a_at(&self, spatial: usize) -> &SymMatrix {
        &self.a[spatial]
    }

    pub fn a_field(&self) -> &[SymMatrix] {
        &self.a
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn psi_at(&self, node: NodeRef) -> f64 {
        self.psi[self.grid.index(node)]
    }

    pub fn u0(&self) -> &[f64] {
        &self.u0
    }

    pub fn u1(&self) -> &[f64] {
        &self.u1
    }

    /// `W` of one spatial slice at node `s`, with the local `A`.
    pub fn spatial_w(&self, values: &[f64], s: usize) -> SymMatrix {
        let mut jet = spatial_jet(&self.grid, values, s);
        jet.a_here = self.a[s];
        assemble_w(&jet, &self.coeffs)
    }

    /// Same data with a different right side.
    pub fn with_psi(&self, psi: Vec<f64>) -> Result<Self> {
        Self::new(
            self.coeffs,
            self.grid,
            self.a.clone(),
            psi,
            self.u0.clone(),
            self.u1.clone(),
        )
    }

    /// Same data with different coefficients (cone conditions rechecked).
    pub fn with_coefficients(&self, coeffs: Coefficients) -> Result<Self> {
        Self::new(
            coeffs,
            self.grid,
            self.a.clone(),
            self.psi.clone(),
            self.u0.clone(),
            self.u1.clone(),
        )
    }

    /// The smallest `ψ` over interior levels.
    pub fn min_interior_psi(&self) -> f64 {
        let ns = self.grid.spatial_len();
        self.psi[ns..ns * (self.grid.nt + 1)]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// True when `field` carries exactly this problem's boundary slices.
    pub fn boundary_matches(&self, field: &SpacetimeField) -> bool {
        field.grid() == &self.grid
            && field.level(0) == self.u0.as_slice()
            && field.level(self.grid.nt + 1) == self.u1.as_slice()
    }
}

fn node_of(grid: &GridSpec, index: usize) -> NodeRef {
    let ns = grid.spatial_len();
    NodeRef {
        level: index / ns,
        spatial: index % ns,
    }
}
