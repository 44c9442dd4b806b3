//! Deliberately corrupted inputs. Each check must reject its control, which
//! shows the suite is sensitive to the defect it targets.

use serde::Serialize;

use crate::conformal::Coefficients;
use crate::grid::{GridSpec, SpacetimeField};
use crate::problem::Problem;

use super::algebra::{check_concavity_with, check_cone_propagation, Transform};
use super::monitors::{check_maximum_principle, monitor_estimates};
use super::uniqueness::{comparison_uniqueness_test, uniqueness_approximation};
use super::viscosity::viscosity_spot_check;
use super::CheckResult;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ControlOutcome {
    pub name: String,
    pub failed_as_expected: bool,
    pub detail: String,
}

impl ControlOutcome {
    fn from_check(name: &str, check: &CheckResult) -> Self {
        Self {
            name: name.to_string(),
            failed_as_expected: !check.passed,
            detail: check.line(),
        }
    }

    pub fn line(&self) -> String {
        let status = if self.failed_as_expected { "REJECTED" } else { "MISSED" };
        format!("{status} {}: {}", self.name, self.detail)
    }
}

const LEVEL: f64 = 1.0;

fn control_problem() -> Problem {
    let c = Coefficients::new(2, 2, 0.0, 0.0, 1.0).expect("valid coefficients");
    let g = GridSpec::new(2, 8, 7).expect("valid grid");
    Problem::constant(c, g, 2.0, 0.0, LEVEL, LEVEL).expect("valid problem")
}

fn field(problem: &Problem, f: impl Fn(&[f64], f64) -> f64) -> SpacetimeField {
    SpacetimeField::from_fn(*problem.grid(), f)
}

/// Runs every negative control. A sound suite returns all outcomes with
/// `failed_as_expected` set.
pub fn negative_controls(seed: u64) -> Vec<ControlOutcome> {
    let problem = control_problem();
    // Exact solution of F_k = ε for A = 2I: u_tt σ_2(2I) = ε.
    let eps = 1e-3;
    let exact = field(&problem, |_, t| LEVEL + eps / 8.0 * t * (t - 1.0));
    let mut out = Vec::new();

    out.push(ControlOutcome::from_check(
        "cone propagation without the S filter",
        &check_cone_propagation(seed, 400, false),
    ));
    out.push(ControlOutcome::from_check(
        "concavity of F_k squared",
        &check_concavity_with(seed, 400, &[Transform::Power(2.0)], "concavity-power-2"),
    ));

    let mut bumped = exact.clone();
    let g = *problem.grid();
    bumped.interior_mut()[g.unknown_of(3, 0).expect("interior level")] += 0.1;
    out.push(ControlOutcome::from_check(
        "maximum principle with a bumped node",
        &check_maximum_principle(&bumped, &problem, 1e-8),
    ));

    let twisted = field(&problem, |x, t| 0.1 * t * (std::f64::consts::TAU * x[0]).sin());
    out.push(ControlOutcome::from_check(
        "trace inequality with u_tt = 0 and nonzero grad u_t",
        &monitor_estimates(&twisted, &problem).0,
    ));

    let steep = field(&problem, |_, t| LEVEL + 0.05 * t * (t - 1.0));
    out.push(ControlOutcome::from_check(
        "viscosity supersolution with F_k > psi",
        &viscosity_spot_check(&steep, &problem, seed, 200),
    ));

    let concave = field(&problem, |_, t| LEVEL - 0.05 * t * (t - 1.0));
    out.push(match uniqueness_approximation(&concave, &problem, 1e-3) {
        Ok(a) => ControlOutcome {
            name: "approximation of a concave path".into(),
            failed_as_expected: false,
            detail: a.report.line(),
        },
        Err(e) => ControlOutcome {
            name: "approximation of a concave path".into(),
            failed_as_expected: true,
            detail: e.to_string(),
        },
    });

    // Nearly degenerate, so both approximants exist and only the distance
    // can fail.
    let tiny = 1e-5;
    let near = field(&problem, |_, t| LEVEL + tiny / 8.0 * t * (t - 1.0));
    let shifted = field(&problem, |_, t| LEVEL + 0.1 + tiny / 8.0 * t * (t - 1.0));
    out.push(ControlOutcome::from_check(
        "comparison of fields 0.1 apart",
        &comparison_uniqueness_test(&near, &shifted, &problem, 1e-3, 1e-8),
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_control_is_rejected() {
        for c in negative_controls(20240917) {
            assert!(c.failed_as_expected, "{}", c.line());
        }
    }
}
