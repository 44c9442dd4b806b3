use serde::Serialize;

use crate::discrete::scan_admissibility;
use crate::error::{Error, NodeRef, Result};
use crate::grid::SpacetimeField;
use crate::problem::Problem;

use super::{slice_initializer, SolverOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitializerKind {
    ClosedForm,
    Slice,
}

/// `(1−t) u0 + t u1` when `s = 0`, otherwise
/// `(1/s) ln((1−t) e^{s u0} + t e^{s u1})`.
pub fn interpolate_boundary(problem: &Problem) -> SpacetimeField {
    let g = *problem.grid();
    let s = problem.coefficients().s;
    let (u0, u1) = (problem.u0(), problem.u1());
    SpacetimeField::with_boundary(g, u0, u1, |m, x| {
        let t = g.t(m);
        if s == 0.0 {
            (1.0 - t) * u0[x] + t * u1[x]
        } else {
            // Shift by the larger exponent so large |s u| does not overflow.
            let (a, b) = (s * u0[x], s * u1[x]);
            let top = a.max(b);
            (top + ((1.0 - t) * (a - top).exp() + t * (b - top).exp()).ln()) / s
        }
    })
}

/// Returns `v + a t(t−1)` for the first `a = 1, 2, 4, …` that makes every
/// interior node strictly admissible.
pub fn convexify(v: &SpacetimeField, problem: &Problem, margin: f64) -> Result<SpacetimeField> {
    let g = *problem.grid();
    let k = problem.coefficients().k;
    let mut worst = (f64::INFINITY, NodeRef { level: 1, spatial: 0 });
    for m in 1..=g.nt {
        for x in 0..g.spatial_len() {
            let cm = problem.spatial_w(v.level(m), x).gamma_margin(k);
            if cm < worst.0 || cm.is_nan() {
                worst = (cm, NodeRef { level: m, spatial: x });
            }
        }
    }
    if !(worst.0 > margin) {
        return Err(Error::Initialization {
            node: worst.1,
            reason: format!(
                "W of the interpolated path is outside Gamma_{k} (margin {:e}); no choice of a can fix this",
                worst.0
            ),
        });
    }
    let mut a = 1.0f64;
    loop {
        let w = SpacetimeField::with_boundary(g, problem.u0(), problem.u1(), |m, x| {
            let t = g.t(m);
            v.get(m, x) + a * t * (t - 1.0)
        });
        let scan = scan_admissibility(&w, problem, margin);
        if scan.all_strict() {
            return Ok(w);
        }
        a *= 2.0;
        if a > 2f64.powi(64) {
            return Err(Error::Initialization {
                node: scan.worst_node,
                reason: format!("convexification exceeded a = 2^64 (margin {:e})", scan.min_margin),
            });
        }
    }
}

/// Closed-form initializer: [`interpolate_boundary`] followed by
/// [`convexify`].
pub fn build_initializer(problem: &Problem, opts: &SolverOptions) -> Result<SpacetimeField> {
    convexify(&interpolate_boundary(problem), problem, opts.admissibility_margin)
}

/// Closed form when `r > 0`, slice stacking when `γ > 0`, otherwise an error.
pub fn choose_initializer(problem: &Problem, opts: &SolverOptions) -> Result<(SpacetimeField, InitializerKind)> {
    let c = problem.coefficients();
    if c.r > 0.0 {
        Ok((build_initializer(problem, opts)?, InitializerKind::ClosedForm))
    } else if c.gamma > 0.0 {
        Ok((slice_initializer(problem, opts)?, InitializerKind::Slice))
    } else {
        Err(Error::Parameter(format!(
            "no admissible initializer for r = {} and gamma = {}: need r > 0 or gamma > 0",
            c.r, c.gamma
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::Coefficients;
    use crate::grid::{field_jet, GridSpec};

    fn problem(s: f64, u0: f64, u1: f64) -> Problem {
        let g = GridSpec::new(2, 4, 3).unwrap();
        let c = Coefficients::new(2, 2, 0.0, s, 1.0).unwrap();
        Problem::constant(c, g, 1.0, 1.0, u0, u1).unwrap()
    }

    #[test]
    fn constant_data_gives_parabola() {
        let p = problem(0.0, 0.7, 0.7);
        let w = build_initializer(&p, &SolverOptions::default()).unwrap();
        let g = *p.grid();
        for m in 1..=g.nt {
            let j = field_jet(&w, NodeRef { level: m, spatial: 5 }).unwrap();
            assert!((j.utt - 2.0).abs() < 1e-12, "a = 1 suffices, utt = {}", j.utt);
        }
        assert_eq!(w.level(0), p.u0());
    }

    #[test]
    fn exponential_branch_endpoints() {
        let p = problem(1.0, 0.0, 0.0);
        let v = interpolate_boundary(&p);
        assert!(v.values().iter().all(|&x| x.abs() < 1e-15));
        let p = problem(1.0, 0.3, -0.2);
        let v = interpolate_boundary(&p);
        assert_eq!(v.level(0), p.u0());
        assert_eq!(v.level(p.grid().nt + 1), p.u1());
    }
}
