//! Smooth fields with analytic jets, for manufactured-solution tests.
//!
//! A field is a sum of terms `p(t) · φ(2π ⟨f, x⟩)` where `p` is a cubic
//! polynomial, `f` an integer wave vector and `φ` either `cos` or `sin`.

use std::f64::consts::PI;

use crate::conformal::{assemble_r, f_k_of, Coefficients, Jet};
use crate::error::Result;
use crate::grid::{GridSpec, SpacetimeField};
use crate::problem::Problem;
use crate::symfunc::{SymMatrix, MAX_DIM};

#[derive(Clone, Debug, PartialEq)]
pub struct TrigTerm {
    pub amp: f64,
    pub freq: [i32; MAX_DIM],
    pub sine: bool,
    /// `p(t) = time[0] + time[1] t + time[2] t² + time[3] t³`.
    pub time: [f64; 4],
}

impl TrigTerm {
    /// A space-constant polynomial in `t`.
    pub fn polynomial(time: [f64; 4]) -> Self {
        Self {
            amp: 1.0,
            freq: [0; MAX_DIM],
            sine: false,
            time,
        }
    }

    pub fn wave(amp: f64, freq: &[i32], sine: bool, time: [f64; 4]) -> Self {
        let mut f = [0; MAX_DIM];
        f[..freq.len()].copy_from_slice(freq);
        Self { amp, freq: f, sine, time }
    }

    fn time_derivs(&self, t: f64) -> [f64; 3] {
        let c = self.time;
        [
            c[0] + t * (c[1] + t * (c[2] + t * c[3])),
            c[1] + t * (2.0 * c[2] + 3.0 * t * c[3]),
            2.0 * c[2] + 6.0 * t * c[3],
        ]
    }
}

/// A sum of [`TrigTerm`]s on `Tⁿ × [0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigField {
    pub n: usize,
    pub terms: Vec<TrigTerm>,
}

impl TrigField {
    pub fn value(&self, x: &[f64], t: f64) -> f64 {
        self.jet(x, t).u
    }

    /// Exact derivatives at `(x, t)`; `A` and `ψ` are left zero.
    pub fn jet(&self, x: &[f64], t: f64) -> Jet {
        let n = self.n;
        let mut j = Jet::zero(n);
        for term in &self.terms {
            let theta: f64 = 2.0 * PI * (0..n).map(|i| term.freq[i] as f64 * x[i]).sum::<f64>();
            let (phi, dphi) = if term.sine {
                (theta.sin(), theta.cos())
            } else {
                (theta.cos(), -theta.sin())
            };
            let [p, pt, ptt] = term.time_derivs(t);
            let a = term.amp;
            j.u += a * p * phi;
            j.ut += a * pt * phi;
            j.utt += a * ptt * phi;
            for i in 0..n {
                let wi = 2.0 * PI * term.freq[i] as f64;
                j.grad_u[i] += a * p * wi * dphi;
                j.grad_ut[i] += a * pt * wi * dphi;
                for l in i..n {
                    let wl = 2.0 * PI * term.freq[l] as f64;
                    j.hess_u.set(i, l, j.hess_u.get(i, l) - a * p * wi * wl * phi);
                }
            }
        }
        j
    }

    pub fn sample(&self, grid: GridSpec) -> SpacetimeField {
        SpacetimeField::from_fn(grid, |x, t| self.value(x, t))
    }
}

/// A manufactured problem: `u*` is given, `ψ := F_k(u*)` analytically.
#[derive(Clone, Debug)]
pub struct Manufactured {
    pub coeffs: Coefficients,
    /// `A = a·I`.
    pub a: f64,
    pub solution: TrigField,
}

impl Manufactured {
    /// `n = 2`, `k = 2`, `(γ, s, r) = (0, 0, 1)`, `A = 2I` and
    ///
    /// ```text
    /// u* = t(t−1) + 0.1 t + 0.01 (1 + t) cos 2πx₁ cos 2πx₂
    ///    + 0.005 t³ sin 2π(x₁ + 2x₂)
    /// ```
    pub fn standard() -> Self {
        let coeffs = Coefficients::new(2, 2, 0.0, 0.0, 1.0).expect("valid coefficients");
        let time = [1.0, 1.0, 0.0, 0.0];
        let solution = TrigField {
            n: 2,
            terms: vec![
                TrigTerm::polynomial([0.0, -0.9, 1.0, 0.0]),
                // cos a cos b = ½ cos(a+b) + ½ cos(a−b)
                TrigTerm::wave(0.005, &[1, 1], false, time),
                TrigTerm::wave(0.005, &[1, -1], false, time),
                TrigTerm::wave(0.005, &[1, 2], true, [0.0, 0.0, 0.0, 1.0]),
            ],
        };
        Self { coeffs, a: 2.0, solution }
    }

    /// The full jet of `u*` at `(x, t)` with `A` filled in and `ψ = F_k`.
    pub fn exact_jet(&self, x: &[f64], t: f64) -> Jet {
        let mut j = self.solution.jet(x, t);
        j.a_here = SymMatrix::scaled_identity(self.coeffs.n, self.a);
        j.psi_here = f_k_of(&assemble_r(&j, &self.coeffs), self.coeffs.k);
        j
    }

    pub fn exact_field(&self, grid: GridSpec) -> SpacetimeField {
        self.solution.sample(grid)
    }

    pub fn problem(&self, grid: GridSpec) -> Result<Problem> {
        let ns = grid.spatial_len();
        let exact = self.exact_field(grid);
        let psi = SpacetimeField::from_fn(grid, |x, t| self.exact_jet(x, t).psi_here).into_values();
        Problem::new(
            self.coeffs,
            grid,
            vec![SymMatrix::scaled_identity(grid.n, self.a); ns],
            psi,
            exact.level(0).to_vec(),
            exact.level(grid.nt + 1).to_vec(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{classify_admissible, Admissibility};

    #[test]
    fn analytic_jet_matches_finite_differences() {
        let m = Manufactured::standard();
        let (x, t) = ([0.23, 0.61], 0.37);
        let j = m.solution.jet(&x, t);
        let h = 1e-5;
        let f = |dx: [f64; 2], dt: f64| m.solution.value(&[x[0] + dx[0], x[1] + dx[1]], t + dt);
        let fd_t = (f([0.0; 2], h) - f([0.0; 2], -h)) / (2.0 * h);
        let fd_x01 = (f([h, h], 0.0) - f([h, -h], 0.0) - f([-h, h], 0.0) + f([-h, -h], 0.0)) / (4.0 * h * h);
        let fd_t1 = (f([0.0, h], h) - f([0.0, -h], h) - f([0.0, h], -h) + f([0.0, -h], -h)) / (4.0 * h * h);
        assert!((j.ut - fd_t).abs() < 1e-8);
        assert!((j.hess_u.get(0, 1) - fd_x01).abs() < 1e-4);
        assert!((j.grad_ut[1] - fd_t1).abs() < 1e-4);
    }

    #[test]
    fn standard_solution_is_strictly_admissible() {
        let m = Manufactured::standard();
        for i in 0..20 {
            for l in 0..=10 {
                let x = [i as f64 / 20.0, (7 * i % 20) as f64 / 20.0];
                let j = m.exact_jet(&x, l as f64 / 10.0);
                assert_eq!(classify_admissible(&j, &m.coeffs, 1e-3).class, Admissibility::Strict);
                assert!(j.psi_here > 0.0);
            }
        }
    }
}
