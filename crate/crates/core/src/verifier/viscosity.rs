//! Randomized spot-check of the viscosity inequalities.
//!
//! Checking every `C²` test function is impossible, so each trial builds
//! the quadratic
//!
//! ```text
//! φ(x₀ + d) = u + ∇u·d + ½ dᵀ (H ∓ P) d,   d = (Δt, Δx)
//! ```
//!
//! from the discrete space-time jet `(∇u, H)` at a random interior node and
//! a random positive semidefinite `P` bounded by ten times the local jet
//! scale. Central differences make `u − φ = ½ Pᵢᵢ hᵢ²` at the axis
//! neighbours, so `φ` touches from below (`−P`) or above (`+P`) on that
//! stencil. Trials that fail the touching test are skipped.

use rand::Rng;

use crate::conformal::{assemble_w, f_k_of, AugmentedMatrix, Jet};
use crate::discrete::jet_of_unknown;
use crate::grid::SpacetimeField;
use crate::problem::Problem;

use super::{check_rng, sampling, CheckResult};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ViscosityOptions {
    pub trials: usize,
    /// Slack in both inequalities and in the closure test for `S`.
    pub tol: f64,
    /// Bound on `P` relative to the local jet scale.
    pub scale_factor: f64,
    /// Use `P = 0`, so `φ` is the second-order interpolant itself.
    pub exact_jet: bool,
}

impl Default for ViscosityOptions {
    fn default() -> Self {
        Self {
            trials: 1000,
            tol: 1e-6,
            scale_factor: 10.0,
            exact_jet: false,
        }
    }
}

pub fn viscosity_spot_check(solution: &SpacetimeField, problem: &Problem, seed: u64, trials: usize) -> CheckResult {
    viscosity_spot_check_with(
        solution,
        problem,
        seed,
        ViscosityOptions {
            trials,
            ..Default::default()
        },
    )
}

fn in_closure_s(m: &AugmentedMatrix, k: usize, tol: f64) -> bool {
    m.r00 >= -tol && m.r.gamma_margin(k) >= -tol && f_k_of(m, k) >= -tol
}

/// Jet of `φ` at the touching point: the jet of `u` with `sign·P` added to
/// the second derivatives.
fn perturbed(jet: &Jet, p: &[Vec<f64>], sign: f64) -> Jet {
    let n = jet.dim();
    let mut out = *jet;
    out.utt += sign * p[0][0];
    for i in 0..n {
        out.grad_ut[i] += sign * p[0][i + 1];
        for j in i..n {
            out.hess_u.set(i, j, jet.hess_u.get(i, j) + sign * p[i + 1][j + 1]);
        }
    }
    out
}

/// `min over axis neighbours of (u − φ)(neighbour) − (u − φ)(node)`, scaled
/// so that `≥ 0` means `φ` touches from below (`sign = −1`) or above
/// (`sign = +1`, with the difference negated).
fn touch_margin(field: &SpacetimeField, jet: &Jet, level: usize, spatial: usize, p: &[Vec<f64>], sign: f64) -> f64 {
    let g = field.grid();
    let n = g.n;
    let (h, dt) = (g.h(), g.dt());
    let u0 = field.get(level, spatial);
    let q = |axis: usize, step: f64| -> f64 {
        // φ − u(node) along one axis.
        let (first, second) = if axis == 0 {
            (jet.ut, jet.utt + sign * p[0][0])
        } else {
            let i = axis - 1;
            (jet.grad_u[i], jet.hess_u.get(i, i) + sign * p[axis][axis])
        };
        first * step + 0.5 * second * step * step
    };
    let mut worst = f64::INFINITY;
    for axis in 0..=n {
        for dir in [-1.0, 1.0] {
            let (value, step) = if axis == 0 {
                let m = if dir > 0.0 { level + 1 } else { level - 1 };
                (field.get(m, spatial), dir * dt)
            } else {
                (field.get(level, g.shift(spatial, axis - 1, dir as isize)), dir * h)
            };
            let diff = (value - u0) - q(axis, step);
            worst = worst.min(-sign * diff);
        }
    }
    worst
}

pub fn viscosity_spot_check_with(solution: &SpacetimeField, problem: &Problem, seed: u64, opts: ViscosityOptions) -> CheckResult {
    let name = if opts.exact_jet { "viscosity-exact-jet" } else { "viscosity" };
    let mut rng = check_rng(seed, name);
    let g = problem.grid();
    let c = problem.coefficients();
    let n = g.n;
    let mut valid = 0;
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    let mut first_bad = None;
    for _ in 0..opts.trials {
        let idx = rng.random_range(0..g.interior_len());
        let node = g.interior_node(idx);
        let jet = jet_of_unknown(solution, problem, idx);
        let psi = jet.psi_here;
        let scale = jet
            .utt
            .abs()
            .max(jet.grad_t().iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .max(jet.hess_u.max_abs())
            .max(1.0);
        let p = if opts.exact_jet {
            vec![vec![0.0; n + 1]; n + 1]
        } else {
            sampling::psd(&mut rng, n + 1, opts.scale_factor * scale)
        };
        let slack = 1e-12 * (1.0 + jet.u.abs());
        for sign in [-1.0, 1.0] {
            if touch_margin(solution, &jet, node.level, node.spatial, &p, sign) < -slack {
                continue;
            }
            valid += 1;
            let phi = perturbed(&jet, &p, sign);
            let r = AugmentedMatrix::new(phi.utt, phi.grad_t(), assemble_w(&phi, c));
            let f = f_k_of(&r, c.k);
            let margin = if sign < 0.0 {
                // Supersolution: R_φ outside the closure of S, or F ≤ ψ.
                if in_closure_s(&r, c.k, opts.tol) {
                    psi + opts.tol - f
                } else {
                    f64::INFINITY
                }
            } else {
                f - psi + opts.tol
            };
            worst = worst.min(margin);
            if margin < 0.0 {
                violations += 1;
                first_bad.get_or_insert((node, sign));
            }
        }
    }
    let mut detail = format!(
        "valid_tests={valid} tol={:e} rate={:e} randomized spot-check over quadratic test functions",
        opts.tol,
        if valid > 0 { violations as f64 / valid as f64 } else { 0.0 }
    );
    if let Some((node, sign)) = first_bad {
        detail.push_str(&format!(
            " first_violation={node} branch={}",
            if sign < 0.0 { "super" } else { "sub" }
        ));
    }
    let mut r = CheckResult::new(name, opts.trials, violations, worst, detail);
    r.passed = r.passed && valid > 0;
    r
}
