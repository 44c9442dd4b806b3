//! Strictly admissible approximations of degenerate solutions, and the
//! comparison argument built on them.
//!
//! Given `u` with `F_k(u) ≥ 0`, the approximant is
//! `u_δ = (1−θ) u + θ t(t−1)` with the largest `θ` (found by bisection) for
//! which every interior node is strictly admissible, `0 < F_k(u_δ) ≤ δ` and
//! `‖u − u_δ‖_∞ ≤ δ`. One local averaging pass follows, with the largest
//! weight that keeps all three bounds.

use crate::conformal::{validate_theorem_regime, Coefficients};
use crate::discrete::{f_k_field, scan_admissibility};
use crate::error::{Error, Result};
use crate::grid::SpacetimeField;
use crate::problem::Problem;
use crate::symfunc::{binomial, sigma_unchecked, SymMatrix};

use super::CheckResult;

/// Whether `(r/2, …, r/2, r/2 − s) ∈ closure(Γ_k)`; returns the scaled
/// margin `min_{j≤k} σ_j / C(n, j)`.
pub fn lemma_cone_condition(c: &Coefficients) -> (bool, f64) {
    let mut d = vec![c.r / 2.0; c.n];
    d[c.n - 1] = c.r / 2.0 - c.s;
    let m = SymMatrix::diag(&d);
    let margin = (1..=c.k)
        .map(|j| sigma_unchecked(&m, j) / binomial(c.n, j))
        .fold(f64::INFINITY, f64::min);
    let scale = c.r.abs().max(c.s.abs()).max(1.0).powi(c.k as i32);
    (margin >= -1e-14 * scale, margin)
}

#[derive(Clone, Debug)]
pub struct Approximation {
    pub field: SpacetimeField,
    pub theta: f64,
    /// Weight of the averaging pass (0 when no weight kept the bounds).
    pub smoothing: f64,
    pub min_f: f64,
    pub max_f: f64,
    pub distance: f64,
    pub report: CheckResult,
}

struct Bounds {
    min_f: f64,
    max_f: f64,
    distance: f64,
}

fn evaluate(candidate: &SpacetimeField, u: &SpacetimeField, problem: &Problem, delta: f64) -> Option<Bounds> {
    if !scan_admissibility(candidate, problem, 0.0).all_strict() {
        return None;
    }
    let f = f_k_field(candidate, problem);
    let min_f = f.iter().copied().fold(f64::INFINITY, f64::min);
    let max_f = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let distance = candidate.max_abs_diff(u);
    (min_f > 0.0 && max_f <= delta && distance <= delta).then_some(Bounds { min_f, max_f, distance })
}

fn blend(u: &SpacetimeField, theta: f64) -> SpacetimeField {
    let g = *u.grid();
    let values = u
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let t = g.t(i / g.spatial_len());
            (1.0 - theta) * v + theta * t * (t - 1.0)
        })
        .collect();
    SpacetimeField::new(g, values).expect("same layout")
}

fn smoothed(v: &SpacetimeField, mu: f64) -> SpacetimeField {
    let g = *v.grid();
    let count = (2 * (g.n + 1) + 1) as f64;
    SpacetimeField::with_boundary(g, v.level(0), v.level(g.nt + 1), |m, x| {
        let mut sum = v.get(m, x) + v.get(m - 1, x) + v.get(m + 1, x);
        for i in 0..g.n {
            sum += v.get(m, g.shift(x, i, 1)) + v.get(m, g.shift(x, i, -1));
        }
        (1.0 - mu) * v.get(m, x) + mu * sum / count
    })
}

pub fn uniqueness_approximation(solution: &SpacetimeField, problem: &Problem, delta: f64) -> Result<Approximation> {
    uniqueness_approximation_with(solution, problem, delta, 1.0)
}

/// As [`uniqueness_approximation`], searching `θ ∈ (0, theta_max]`.
pub fn uniqueness_approximation_with(
    solution: &SpacetimeField,
    problem: &Problem,
    delta: f64,
    theta_max: f64,
) -> Result<Approximation> {
    let c = problem.coefficients();
    let (ok, margin) = lemma_cone_condition(c);
    if !ok {
        return Err(Error::Parameter(format!(
            "(r/2, ..., r/2, r/2 - s) is outside the closure of Gamma_{} (margin {margin:e})",
            c.k
        )));
    }
    if !(delta > 0.0) || !(theta_max > 0.0 && theta_max <= 1.0) {
        return Err(Error::Parameter("need delta > 0 and theta_max in (0, 1]".into()));
    }
    // Halve from theta_max until feasible, then bisect against the last
    // infeasible value.
    let mut hi = theta_max;
    let mut lo = None;
    for _ in 0..80 {
        let cand = blend(solution, hi);
        if let Some(b) = evaluate(&cand, solution, problem, delta) {
            lo = Some((hi, cand, b));
            break;
        }
        hi *= 0.5;
    }
    let Some((mut theta, mut field, mut bounds)) = lo else {
        let scan = scan_admissibility(&blend(solution, hi), problem, 0.0);
        return Err(Error::NodeDomain {
            node: scan.worst_node,
            reason: format!("no theta in (0, {theta_max}] meets 0 < F_k <= {delta:e} and distance <= {delta:e}"),
            margin: scan.min_margin,
        });
    };
    if theta < theta_max {
        let mut upper = (2.0 * theta).min(theta_max);
        for _ in 0..40 {
            let mid = 0.5 * (theta + upper);
            let cand = blend(solution, mid);
            match evaluate(&cand, solution, problem, delta) {
                Some(b) => {
                    theta = mid;
                    field = cand;
                    bounds = b;
                }
                None => upper = mid,
            }
        }
    }
    let mut smoothing = 0.0;
    let mut mu = 1.0;
    for _ in 0..=10 {
        let cand = smoothed(&field, mu);
        if let Some(b) = evaluate(&cand, solution, problem, delta) {
            field = cand;
            bounds = b;
            smoothing = mu;
            break;
        }
        mu *= 0.5;
    }
    let report = CheckResult::new(
        "lemma-approximation",
        solution.grid().interior_len(),
        0,
        (delta - bounds.max_f).min(delta - bounds.distance).min(bounds.min_f),
        format!(
            "delta={delta:e} theta={theta:e} smoothing={smoothing} min_F={:e} max_F={:e} distance={:e}",
            bounds.min_f, bounds.max_f, bounds.distance
        ),
    );
    Ok(Approximation {
        field,
        theta,
        smoothing,
        min_f: bounds.min_f,
        max_f: bounds.max_f,
        distance: bounds.distance,
        report,
    })
}

/// Builds approximants `v₁` of `u1` (with `delta`) and `v₂` of `u2` (with
/// `δ₂ = min F_k(v₁)`) and asserts `‖u1 − u2‖_∞ ≤ 2δ + tol`. Outside the
/// uniqueness regime the result is report-only.
pub fn comparison_uniqueness_test(
    u1: &SpacetimeField,
    u2: &SpacetimeField,
    problem: &Problem,
    delta: f64,
    tol: f64,
) -> CheckResult {
    let name = "comparison";
    let regime = validate_theorem_regime(problem.coefficients()).uniqueness;
    let diff = u1.max_abs_diff(u2);
    let bound = 2.0 * delta + tol;
    let mut result = match uniqueness_approximation(u1, problem, delta) {
        Err(e) => CheckResult::new(name, 2, 1, f64::NEG_INFINITY, format!("first approximant failed: {e}")),
        Ok(v1) => {
            let delta2 = v1.min_f;
            match uniqueness_approximation(u2, problem, delta2) {
                Err(e) => CheckResult::new(
                    name,
                    2,
                    1,
                    f64::NEG_INFINITY,
                    format!("second approximant (delta2={delta2:e}) failed: {e}"),
                ),
                Ok(v2) => CheckResult::new(
                    name,
                    2,
                    usize::from(diff > bound),
                    bound - diff,
                    format!(
                        "|u1-u2|={diff:e} bound={bound:e} |v1-v2|={:e} delta2={delta2:e} theta1={:e} theta2={:e}",
                        v1.field.max_abs_diff(&v2.field),
                        v1.theta,
                        v2.theta
                    ),
                ),
            }
        }
    };
    if !regime {
        result.report_only = true;
        result.detail.push_str(" outside the uniqueness regime");
    }
    result
}
