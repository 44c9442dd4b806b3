use rand::Rng;

use crate::conformal::{assemble_e, classify_admissible, f_k_of, residual_pair, Admissibility, AugmentedMatrix, Coefficients, Jet};
use crate::discrete::{log_f_field, scan_admissibility, sup_abs};
use crate::error::Result;
use crate::grid::SpacetimeField;
use crate::linearize::{assemble_jacobian, ellipticity_form, ellipticity_form_direct};
use crate::problem::Problem;
use crate::symfunc::{rank_one_identities, sigma_grad_unchecked, sigma_unchecked, SymMatrix};

use super::{check_rng, rel_err, sampling, CheckResult};

const IDENTITY_TOL: f64 = 1e-10;

/// Euler, trace and both rank-one identities on random symmetric matrices
/// with `n ≤ 6`.
pub fn check_symfunc_identities(seed: u64, samples: usize) -> CheckResult {
    let name = "symfunc-identities";
    let mut rng = check_rng(seed, name);
    let mut worst = 0.0f64;
    let mut violations = 0;
    for _ in 0..samples {
        let (n, k) = sampling::dims(&mut rng, 6);
        let a = sampling::symmetric(&mut rng, n, 1.0);
        let x = sampling::vector(&mut rng, n, 1.0);
        let sk = sigma_unchecked(&a, k);
        let grad = sigma_grad_unchecked(&a, k);
        let prev = if k == 1 { 1.0 } else { sigma_unchecked(&a, k - 1) };
        let (l1, r1, l2, r2) = rank_one_identities(&a, &x, k).expect("valid dimensions");
        let err = rel_err(grad.contract(&a), k as f64 * sk)
            .max(rel_err(grad.trace(), (n - k + 1) as f64 * prev))
            .max(rel_err(l1, r1))
            .max(rel_err(l2, r2));
        worst = worst.max(err);
        if err > IDENTITY_TOL {
            violations += 1;
        }
    }
    CheckResult::new(
        name,
        samples,
        violations,
        IDENTITY_TOL - worst,
        format!("max_rel_err={worst:e} tol={IDENTITY_TOL:e}"),
    )
}

/// `u_tt σ_k(W) − σ_k^{ij}(W) u_ti u_tj = u_tt^{1−k} σ_k(E)` on random
/// strict jets.
pub fn check_residual_equivalence(seed: u64, samples: usize) -> CheckResult {
    let name = "residual-equivalence";
    let mut rng = check_rng(seed, name);
    let mut worst = 0.0f64;
    let mut violations = 0;
    for _ in 0..samples {
        let (n, k) = sampling::dims(&mut rng, 6);
        let c = sampling::coefficients(&mut rng, n, k);
        let j = sampling::strict_jet(&mut rng, &c);
        let pair = residual_pair(&j, &c);
        let err = rel_err(pair.direct, pair.via_e.expect("u_tt > 0"));
        worst = worst.max(err);
        if err > IDENTITY_TOL {
            violations += 1;
        }
    }
    CheckResult::new(
        name,
        samples,
        violations,
        IDENTITY_TOL - worst,
        format!("max_rel_err={worst:e} tol={IDENTITY_TOL:e}"),
    )
}

/// Filters random jets by `λ(W) ∈ Γ_k`, `u_tt > 0`, `σ_k(E) > 0` and checks
/// `λ(E) ∈ Γ_k`. With `filter = false` the hypotheses are skipped, which
/// must produce violations.
pub fn check_cone_propagation(seed: u64, samples: usize, filter: bool) -> CheckResult {
    let name = if filter { "cone-propagation" } else { "cone-propagation-unfiltered" };
    let mut rng = check_rng(seed, name);
    let mut accepted = 0;
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    while accepted < samples {
        let (n, k) = sampling::dims(&mut rng, 5);
        let c = sampling::coefficients(&mut rng, n, k);
        let j = sampling::jet(&mut rng, n);
        if filter {
            let v = classify_admissible(&j, &c, 0.0);
            if v.class != Admissibility::Strict {
                continue;
            }
        }
        accepted += 1;
        let m = assemble_e(&j, &c).gamma_margin(k);
        worst = worst.min(m);
        if !(m > 0.0) {
            violations += 1;
        }
    }
    CheckResult::new(
        name,
        samples,
        violations,
        worst,
        "margin=min_j sigma_j(E)/C(n,j)".into(),
    )
}

/// How `F_k` is transformed before testing midpoint concavity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Transform {
    Log,
    /// `F^{1/(k+1)}`.
    Root,
    /// `F^p`, not concave for `p > 1/(k+1)`; used as a negative control.
    Power(f64),
}

impl Transform {
    fn apply(self, f: f64, k: usize) -> f64 {
        match self {
            Transform::Log => f.ln(),
            Transform::Root => f.powf(1.0 / (k as f64 + 1.0)),
            Transform::Power(p) => f.powf(p),
        }
    }
}

fn in_s(m: &AugmentedMatrix, k: usize) -> bool {
    m.r00 > 0.0 && m.r.gamma_margin(k) > 0.0 && f_k_of(m, k) > 0.0
}

/// `T(F(mid)) − ½T(F(a)) − ½T(F(b))` for each transform, or `None` when
/// the midpoint left `S`.
pub fn concavity_margins(a: &AugmentedMatrix, b: &AugmentedMatrix, k: usize, transforms: &[Transform]) -> Option<Vec<f64>> {
    let mid = a.midpoint(b);
    if !in_s(&mid, k) {
        return None;
    }
    let (fa, fb, fm) = (f_k_of(a, k), f_k_of(b, k), f_k_of(&mid, k));
    Some(
        transforms
            .iter()
            .map(|t| t.apply(fm, k) - 0.5 * t.apply(fa, k) - 0.5 * t.apply(fb, k))
            .collect(),
    )
}

/// Midpoint concavity of `ln F_k` and `F_k^{1/(k+1)}` on pairs in `S`, and
/// midpoint closure of `S`.
pub fn check_concavity(seed: u64, samples: usize) -> CheckResult {
    check_concavity_with(seed, samples, &[Transform::Log, Transform::Root], "concavity")
}

pub(crate) fn check_concavity_with(seed: u64, samples: usize, transforms: &[Transform], name: &str) -> CheckResult {
    const TOL: f64 = 1e-10;
    let mut rng = check_rng(seed, name);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    let mut left_s = 0;
    for _ in 0..samples {
        let (n, k) = sampling::dims(&mut rng, 5);
        let a = sampling::in_s(&mut rng, n, k);
        let b = sampling::in_s(&mut rng, n, k);
        match concavity_margins(&a, &b, k, transforms) {
            None => {
                left_s += 1;
                violations += 1;
            }
            Some(m) => {
                let lo = m.into_iter().fold(f64::INFINITY, f64::min);
                worst = worst.min(lo);
                if lo < -TOL {
                    violations += 1;
                }
            }
        }
    }
    CheckResult::new(
        name,
        samples,
        violations,
        worst,
        format!("midpoints_outside_S={left_s} tol={TOL:e}"),
    )
}

/// Positivity of the principal symbol on random strict jets and nonzero
/// `ξ`, agreement of its two algebraic forms, and the reference value 6.
pub fn check_ellipticity(seed: u64, samples: usize) -> CheckResult {
    let name = "ellipticity";
    let mut rng = check_rng(seed, name);
    let mut violations = 0;
    let mut worst_rel = 0.0f64;
    let mut min_ratio = f64::INFINITY;
    for _ in 0..samples {
        let (n, k) = sampling::dims(&mut rng, 6);
        let c = sampling::coefficients(&mut rng, n, k);
        let j = sampling::strict_jet(&mut rng, &c);
        let mut xi = sampling::vector(&mut rng, n + 1, 1.0);
        if xi.iter().all(|&v| v == 0.0) {
            xi[0] = 1.0;
        }
        let a = ellipticity_form(&j, &c, &xi).expect("strict jet");
        let b = ellipticity_form_direct(&j, &c, &xi).expect("strict jet");
        let norm2: f64 = xi.iter().map(|v| v * v).sum();
        let err = rel_err(a, b);
        worst_rel = worst_rel.max(err);
        min_ratio = min_ratio.min(a / norm2);
        if !(a > 0.0) || err > IDENTITY_TOL {
            violations += 1;
        }
    }
    let (reference, rc) = reference_jet();
    let xi = [1.0, 0.0, 0.0, 0.0];
    let v1 = ellipticity_form(&reference, &rc, &xi).expect("strict");
    let v2 = ellipticity_form_direct(&reference, &rc, &xi).expect("strict");
    if v1 != 6.0 || v2 != 6.0 {
        violations += 1;
    }
    CheckResult::new(
        name,
        samples + 1,
        violations,
        min_ratio,
        format!("max_rel_err={worst_rel:e} reference=({v1},{v2}) margin=min form/|xi|^2"),
    )
}

/// `u_tt = 2`, `W = I₃`, `∇u_t = e₁`, `k = 2`.
pub(crate) fn reference_jet() -> (Jet, Coefficients) {
    let mut j = Jet::zero(3);
    j.utt = 2.0;
    j.grad_ut[0] = 1.0;
    j.a_here = SymMatrix::identity(3);
    j.psi_here = 4.0;
    (j, Coefficients::new(3, 2, 0.0, 0.0, 0.0).expect("valid"))
}

/// Directional derivative check of the discrete Jacobian. Each pair is a
/// random smooth perturbation of `base` (kept at admissibility margin
/// `1e-2`, where the difference quotient is a reliable oracle) and a
/// random nodal direction; the product `J·v` must match the central
/// difference of the residual at step `1e-6` to `1e-5 (1 + ‖J·v‖_∞)`.
pub fn check_jacobian(problem: &Problem, base: &SpacetimeField, seed: u64, pairs: usize, amplitude: f64) -> Result<CheckResult> {
    const STEP: f64 = 1e-6;
    const TOL: f64 = 1e-5;
    let name = "jacobian-fd";
    let mut rng = check_rng(seed, name);
    let g = *problem.grid();
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    let mut done = 0;
    let mut attempts = 0;
    while done < pairs {
        attempts += 1;
        if attempts > 100 * pairs {
            break;
        }
        let modes: Vec<(f64, [f64; 8], f64)> = (0..3)
            .map(|_| {
                let mut f = [0.0; 8];
                for v in f.iter_mut().take(g.n) {
                    *v = rng.random_range(-2i32..=2) as f64;
                }
                (rng.random_range(-1.0..1.0) * amplitude, f, rng.random_range(0.0..std::f64::consts::TAU))
            })
            .collect();
        let field = SpacetimeField::with_boundary(g, base.level(0), base.level(g.nt + 1), |m, x| {
            let t = g.t(m);
            let pos = g.position(x);
            let bump: f64 = modes
                .iter()
                .map(|(a, f, ph)| {
                    let th: f64 = (0..g.n).map(|i| f[i] * pos[i]).sum::<f64>() * std::f64::consts::TAU;
                    a * (th + ph).cos()
                })
                .sum();
            base.get(m, x) + t * (1.0 - t) * bump
        });
        if !scan_admissibility(&field, problem, 1e-2).all_strict() {
            continue;
        }
        let dir: Vec<f64> = (0..g.interior_len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let jv = assemble_jacobian(&field, problem)?.matvec(&dir);
        let plus = log_f_field(&field.stepped(&dir, STEP), problem);
        let minus = log_f_field(&field.stepped(&dir, -STEP), problem);
        let (Ok(plus), Ok(minus)) = (plus, minus) else { continue };
        let fd: Vec<f64> = plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * STEP)).collect();
        let diff = sup_abs(&jv.iter().zip(&fd).map(|(a, b)| a - b).collect::<Vec<_>>());
        let bound = TOL * (1.0 + sup_abs(&jv));
        worst = worst.min(bound - diff);
        if diff > bound {
            violations += 1;
        }
        done += 1;
    }
    let mut r = CheckResult::new(
        name,
        done,
        violations + (pairs - done),
        worst,
        format!("step={STEP:e} tol={TOL:e} margin=bound-diff"),
    );
    r.passed = r.passed && done == pairs;
    Ok(r)
}
