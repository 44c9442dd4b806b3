//! The twelve acceptance criteria, run in order with one PASS/FAIL line
//! each. Oracles for derived values (eigenvalue route for `σ_k`, the
//! explicit operator, exact solutions) are written out here rather than
//! taken from the library.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cgeo::cli_io::{read_snapshot, RunConfig};
use cgeo::conformal::{residual_pair, Coefficients, Jet};
use cgeo::discrete::{f_k_field, log_f_field, log_residual_field, scan_admissibility, sup_abs};
use cgeo::grid::{GridSpec, SpacetimeField};
use cgeo::linearize::{assemble_jacobian, ellipticity_form, ellipticity_form_direct};
use cgeo::problem::Problem;
use cgeo::solver::{degenerate_solve, homotopy_solve, DegenerateMode, SolverOptions, TraceRecord};
use cgeo::symfunc::{rank_one_identities, sigma_grad, sigma_of_matrix, SymMatrix};
use cgeo::verifier::{
    check_concavity, check_cone_propagation, check_ellipticity, check_maximum_principle, check_residual_equivalence,
    check_symfunc_identities, negative_controls, uniqueness_approximation,
};

const SEED: u64 = 20240917;
const SAMPLES: usize = 10_000;

struct Outcome {
    id: usize,
    title: &'static str,
    passed: bool,
    detail: String,
    elapsed: Duration,
}

fn record(out: &mut Vec<Outcome>, id: usize, title: &'static str, limit: Option<Duration>, start: Instant, ok: bool, detail: String) {
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let detail = match limit {
        Some(l) => format!("{detail}; runtime {:.1} s (limit {} s)", elapsed.as_secs_f64(), l.as_secs()),
        None => format!("{detail}; runtime {:.1} s", elapsed.as_secs_f64()),
    };
    let o = Outcome {
        id,
        title,
        passed: ok && in_time,
        detail,
        elapsed,
    };
    // Written past the test harness capture so the lines show in plain
    // `cargo test` output.
    let _ = writeln!(
        std::io::stdout(),
        "{} criterion {:>2} {}: {}",
        if o.passed { "PASS" } else { "FAIL" },
        o.id,
        o.title,
        o.detail
    );
    out.push(o);
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

// ---- oracles -------------------------------------------------------------

fn to_dense(a: &SymMatrix) -> DMatrix<f64> {
    let n = a.dim();
    DMatrix::from_fn(n, n, |i, j| a.get(i, j))
}

/// Elementary symmetric polynomials of the eigenvalues, `e[0..=n]`.
fn esp(eigs: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; eigs.len() + 1];
    e[0] = 1.0;
    for (m, &l) in eigs.iter().enumerate() {
        for j in (1..=m + 1).rev() {
            e[j] += l * e[j - 1];
        }
    }
    e
}

fn sigma_eig(a: &DMatrix<f64>, k: usize) -> f64 {
    let eig = SymmetricEigen::new(a.clone()).eigenvalues;
    esp(eig.as_slice())[k]
}

fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(-1.0..1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

fn from_dense(m: &DMatrix<f64>) -> SymMatrix {
    SymMatrix::from_fn(m.nrows(), |i, j| m[(i, j)])
}

/// `W = ∇²u + s ∇u⊗∇u + (γΔu − (r/2)|∇u|²) I + A`, written out directly.
fn w_oracle(j: &Jet, c: &Coefficients) -> DMatrix<f64> {
    let n = c.n;
    let g = DMatrix::from_fn(n, 1, |i, _| j.grad_u[i]);
    let lap: f64 = (0..n).map(|i| j.hess_u.get(i, i)).sum();
    let g2 = g.norm_squared();
    to_dense(&j.hess_u) + c.s * &g * g.transpose() + DMatrix::identity(n, n) * (c.gamma * lap - 0.5 * c.r * g2)
        + to_dense(&j.a_here)
}

// ---- criteria ------------------------------------------------------------

fn criterion_1(out: &mut Vec<Outcome>) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for _ in 0..SAMPLES {
        let n = rng.random_range(1..=6usize);
        let k = rng.random_range(1..=n);
        let a = random_sym(&mut rng, n);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sa = from_dense(&a);
        let eig = esp(SymmetricEigen::new(a.clone()).eigenvalues.as_slice());
        let grad = sigma_grad(&sa, k).unwrap();
        let xv = DMatrix::from_column_slice(n, 1, &x);
        let ax = &a - &xv * xv.transpose();
        let errs = [
            rel(sigma_of_matrix(&sa, k).unwrap(), eig[k]),
            rel(grad.contract(&sa), k as f64 * eig[k]),
            rel(grad.trace(), (n - k + 1) as f64 * eig[k - 1]),
            rel(sigma_eig(&ax, k), eig[k] - grad.quad(&x)),
        ];
        let (l1, r1, l2, r2) = rank_one_identities(&sa, &x, k).unwrap();
        worst = errs.into_iter().fold(worst, f64::max).max(rel(l1, r1)).max(rel(l2, r2));
    }
    let lib = check_symfunc_identities(SEED, SAMPLES);
    record(
        out,
        1,
        "sigma_k algebra",
        Some(Duration::from_secs(10)),
        start,
        worst <= 1e-10 && lib.passed,
        format!("{SAMPLES} instances, max relative error {worst:.2e} (tol 1e-10); library check {}", lib.line()),
    );
}

fn criterion_2(out: &mut Vec<Outcome>) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 2);
    let mut worst = 0.0f64;
    for _ in 0..SAMPLES {
        let (n, k) = cgeo::verifier::sampling::dims(&mut rng, 6);
        let c = cgeo::verifier::sampling::coefficients(&mut rng, n, k);
        let j = cgeo::verifier::sampling::strict_jet(&mut rng, &c);
        let w = w_oracle(&j, &c);
        let gt = DMatrix::from_fn(n, 1, |i, _| j.grad_ut[i]);
        let e = j.utt * &w - &gt * gt.transpose();
        let via_e = j.utt.powi(1 - k as i32) * sigma_eig(&e, k);
        worst = worst.max(rel(residual_pair(&j, &c).direct, via_e));
    }
    let lib = check_residual_equivalence(SEED, SAMPLES);
    record(
        out,
        2,
        "equation equivalence",
        Some(Duration::from_secs(5)),
        start,
        worst <= 1e-10 && lib.passed,
        format!("{SAMPLES} strict jets, max relative error {worst:.2e} (tol 1e-10); library check {}", lib.line()),
    );
}

fn criterion_3(out: &mut Vec<Outcome>) {
    let start = Instant::now();
    let c = check_concavity(SEED, SAMPLES);
    let ok = c.passed && c.samples == SAMPLES && c.detail.contains("midpoints_outside_S=0");
    record(out, 3, "concavity on S", Some(Duration::from_secs(30)), start, ok, c.line());
}

fn criterion_4(out: &mut Vec<Outcome>) {
    let start = Instant::now();
    let c = check_cone_propagation(SEED, SAMPLES, true);
    record(out, 4, "cone propagation", Some(Duration::from_secs(10)), start, c.passed && c.samples == SAMPLES, c.line());
}

fn criterion_5(out: &mut Vec<Outcome>) {
    let start = Instant::now();
    let c = check_ellipticity(SEED, SAMPLES);
    // Reference: u_tt = 2, W = I₃, ∇u_t = e₁, k = 2, ξ = e₀. Then
    // E = diag(1, 2, 2), σ₂(E) = 8, σ₂^{11}(E) = 4, and the symbol is
    // σ₂(E)/u_tt + σ₂^{11}(E) (u_t1)²/u_tt = 4 + 2 = 6.
    let mut j = Jet::zero(3);
    j.utt = 2.0;
    j.grad_ut[0] = 1.0;
    j.a_here = SymMatrix::identity(3);
    let rc = Coefficients::new(3, 2, 0.0, 0.0, 0.0).unwrap();
    let xi = [1.0, 0.0, 0.0, 0.0];
    let v1 = ellipticity_form(&j, &rc, &xi).unwrap();
    let v2 = ellipticity_form_direct(&j, &rc, &xi).unwrap();
    let ok = c.passed && v1 == 6.0 && v2 == 6.0;
    record(
        out,
        5,
        "ellipticity",
        Some(Duration::from_secs(10)),
        start,
        ok,
        format!("reference value ({v1}, {v2}) expected 6; {}", c.line()),
    );
}

/// `u* = t(t−1) + 0.1t + 0.01(1+t) cos 2πx₁ cos 2πx₂ + 0.005 t³ sin 2π(x₁+2x₂)`.
fn u_star(x: &[f64], t: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    t * (t - 1.0) + 0.1 * t + 0.01 * (1.0 + t) * (tau * x[0]).cos() * (tau * x[1]).cos()
        + 0.005 * t.powi(3) * (tau * (x[0] + 2.0 * x[1])).sin()
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn manufactured_problem(grid: GridSpec) -> Problem {
    let text = std::fs::read_to_string(configs_dir().join("manufactured.toml")).unwrap();
    let mut cfg = RunConfig::from_toml(&text, &configs_dir()).unwrap();
    cfg.grid.nx = grid.nx;
    cfg.grid.nt = grid.nt;
    cfg.build_problem().unwrap()
}

fn criterion_6(out: &mut Vec<Outcome>) {
    let start = Instant::now();
    let g = GridSpec::new(2, 16, 7).unwrap();
    let problem = manufactured_problem(g);
    let base = SpacetimeField::from_fn(g, u_star);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 6);
    let step = 1e-6;
    let mut worst = 0.0f64;
    let mut pairs = 0;
    while pairs < 20 {
        let (a, f1, f2, ph) = (
            rng.random_range(-0.01..0.01),
            rng.random_range(-2..=2) as f64,
            rng.random_range(-2..=2) as f64,
            rng.random_range(0.0..std::f64::consts::TAU),
        );
        let field = SpacetimeField::with_boundary(g, base.level(0), base.level(g.nt + 1), |m, x| {
            let t = g.t(m);
            let p = g.position(x);
            base.get(m, x) + a * t * (1.0 - t) * (std::f64::consts::TAU * (f1 * p[0] + f2 * p[1]) + ph).cos()
        });
        if !scan_admissibility(&field, &problem, 1e-2).all_strict() {
            continue;
        }
        let dir: Vec<f64> = (0..g.interior_len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let jv = assemble_jacobian(&field, &problem).unwrap().matvec(&dir);
        let plus = log_f_field(&field.stepped(&dir, step), &problem).unwrap();
        let minus = log_f_field(&field.stepped(&dir, -step), &problem).unwrap();
        let fd: Vec<f64> = plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * step)).collect();
        let diff = sup_abs(&jv.iter().zip(&fd).map(|(a, b)| a - b).collect::<Vec<_>>());
        worst = worst.max(diff / sup_abs(&jv).max(sup_abs(&fd)).max(1.0));
        pairs += 1;
    }
    record(
        out,
        6,
        "Jacobian vs finite differences",
        Some(Duration::from_secs(60)),
        start,
        worst <= 1e-5,
        format!("20 pairs on (n, nx, nt) = (2, 16, 7), max relative mismatch {worst:.2e} (tol 1e-5)"),
    );
}

fn cgeo(mode: &str, config: &Path, out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_cgeo"))
        .args([mode, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .arg("--deterministic")
        .status()
        .expect("binary runs")
        .code()
        .unwrap_or(-1)
}

/// Writes the shipped config with a different grid.
fn config_with_grid(name: &str, nx: usize, nt: usize, dir: &Path) -> PathBuf {
    let text = std::fs::read_to_string(configs_dir().join(name)).unwrap();
    assert!(text.contains("nx = 16\nnt = 7"), "{name} has the expected grid section");
    let text = text.replace("nx = 16\nnt = 7", &format!("nx = {nx}\nnt = {nt}"));
    let path = dir.join(format!("{nx}x{nt}_{name}"));
    std::fs::write(&path, text).unwrap();
    path
}

fn read_log(path: &Path) -> Vec<TraceRecord> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn endpoints(log: &[TraceRecord], u: &SpacetimeField, problem: &Problem) -> (f64, f64) {
    let first = log.iter().find(|r| r.phase == "homotopy").map(|r| {
        assert_eq!((r.tau_or_epsilon, r.iter), (0.0, 0));
        r.residual_sup
    });
    let g = problem.grid();
    let ln_psi: Vec<f64> = (0..g.interior_len()).map(|i| problem.psi_at(g.interior_node(i)).ln()).collect();
    let last = sup_abs(&log_residual_field(u, problem, &ln_psi).unwrap());
    (first.unwrap_or(f64::NAN), last)
}

/// Criteria 7 and 8 on the manufactured problem, and the first set of
/// deterministic runs for criterion 12.
fn criteria_7_8(out: &mut Vec<Outcome>, work: &Path) -> (f64, f64) {
    let start = Instant::now();
    let mut errors = Vec::new();
    let mut ends = Vec::new();
    let mut exit_ok = true;
    for (nx, nt) in [(16, 7), (32, 15)] {
        let cfg = config_with_grid("manufactured.toml", nx, nt, work);
        let dir = work.join(format!("run1_manufactured_{nx}"));
        exit_ok &= cgeo("solve", &cfg, &dir) == 0;
        let g = GridSpec::new(2, nx, nt).unwrap();
        let u = read_snapshot(&dir.join("solution.gsge")).unwrap();
        errors.push(u.max_abs_diff(&SpacetimeField::from_fn(g, u_star)));
        let problem = manufactured_problem(g);
        ends.push(endpoints(&read_log(&dir.join("log.jsonl")), &u, &problem));
    }
    let order = (errors[0] / errors[1]).log2();
    let t7 = start.elapsed();
    record(
        out,
        7,
        "manufactured convergence",
        Some(Duration::from_secs(300)),
        start,
        exit_ok && (order - 2.0).abs() <= 0.3,
        format!(
            "max errors {:.3e} (16x7), {:.3e} (32x15), observed order {order:.3} (want 2.0 +- 0.3)",
            errors[0], errors[1]
        ),
    );

    // Preset run for criterion 8: Schouten pattern with 2sk <= rn.
    let start8 = Instant::now();
    let text = std::fs::read_to_string(configs_dir().join("schouten.toml")).unwrap();
    let cfg = RunConfig::from_toml(&text, &configs_dir()).unwrap();
    let c = cfg.coefficients().unwrap();
    let regime = (c.s, c.r, c.gamma) == (1.0, 1.0, 0.0) && 2.0 * c.s * c.k as f64 <= c.r * c.n as f64;
    let problem = cfg.build_problem().unwrap();
    let (u, trace) = homotopy_solve(&problem, &SolverOptions::default()).unwrap();
    let preset = endpoints(&trace.records, &u, &problem);
    ends.push(preset);
    let ok = regime && ends.iter().all(|&(a, b)| a == 0.0 && b <= 1e-9);
    record(
        out,
        8,
        "homotopy endpoints",
        Some(Duration::from_secs(300).saturating_sub(t7)),
        start8,
        ok,
        format!(
            "(tau=0, tau=1) sup log residuals: manufactured 16x7 ({:e}, {:.2e}), 32x15 ({:e}, {:.2e}), \
             schouten n=4 k=2 ({:e}, {:.2e}); 2sk <= rn: {regime}",
            ends[0].0, ends[0].1, ends[1].0, ends[1].1, preset.0, preset.1
        ),
    );
    (errors[0], errors[1])
}

const LEVEL: f64 = 0.5;

fn geodesic_problem() -> Problem {
    let c = Coefficients::new(2, 2, 0.0, 0.0, 1.0).unwrap();
    Problem::constant(c, GridSpec::new(2, 16, 7).unwrap(), 2.0, 0.0, LEVEL, LEVEL).unwrap()
}

fn criterion_9(out: &mut Vec<Outcome>) -> Option<SpacetimeField> {
    let start = Instant::now();
    let problem = geodesic_problem();
    let opts = SolverOptions::default();
    let r = degenerate_solve(&problem, &opts, DegenerateMode::RhsEpsilon).unwrap();
    let Some(last) = r.last().cloned() else {
        record(out, 9, "degenerate driver", None, start, false, format!("no level solved: {:?}", r.failure));
        return None;
    };
    let g = *problem.grid();
    let constant = SpacetimeField::from_fn(g, |_, _| LEVEL);
    let err = last.max_abs_diff(&constant);
    // ε-monotonicity across every pair of the schedule (ε decreasing).
    let mut excess = f64::NEG_INFINITY;
    for i in 0..r.fields.len() {
        for j in i + 1..r.fields.len() {
            for (a, b) in r.fields[i].values().iter().zip(r.fields[j].values()) {
                excess = excess.max(a - b);
            }
        }
    }
    let chord_excess = (0..g.interior_len())
        .map(|i| {
            let node = g.interior_node(i);
            last.get(node.level, node.spatial) - LEVEL
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let mp = check_maximum_principle(&last, &problem, 1e-8);
    let eps_final = r.epsilons.last().copied().unwrap_or(f64::NAN);
    let final_residual = r
        .trace
        .records
        .iter()
        .rev()
        .find(|x| x.phase == "homotopy")
        .map_or(f64::NAN, |x| x.residual_sup);
    let ok = r.failure.is_none() && eps_final == 1e-5 && err <= 1e-6 && excess <= 1e-8 && chord_excess <= 1e-8 && mp.passed;
    record(
        out,
        9,
        "degenerate driver",
        Some(Duration::from_secs(300)),
        start,
        ok,
        format!(
            "eps schedule {:?}, sup error to constant path {err:.3e} (tol 1e-6), monotonicity excess {excess:.2e} \
             (tol 1e-8), max u - chord {chord_excess:.2e} (tol 1e-8), final sup log residual {final_residual:.2e}; {}",
            r.epsilons,
            mp.line()
        ),
    );
    Some(last)
}

fn criterion_10(out: &mut Vec<Outcome>, solution: Option<&SpacetimeField>) {
    let start = Instant::now();
    let Some(u) = solution else {
        record(out, 10, "approximation construction", None, start, false, "no geodesic output".into());
        return;
    };
    let problem = geodesic_problem();
    let mut thetas = Vec::new();
    let mut ok = true;
    let mut parts = Vec::new();
    for delta in [1e-2, 1e-3] {
        match uniqueness_approximation(u, &problem, delta) {
            Ok(a) => {
                let f = f_k_field(&a.field, &problem);
                let min_f = f.iter().copied().fold(f64::INFINITY, f64::min);
                let max_f = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let dist = a.field.max_abs_diff(u);
                ok &= min_f > 0.0 && max_f <= delta && dist <= delta;
                thetas.push(a.theta);
                parts.push(format!(
                    "delta {delta:e}: theta {:.4e}, F in [{min_f:.3e}, {max_f:.3e}], distance {dist:.3e}",
                    a.theta
                ));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("delta {delta:e}: {e}"));
            }
        }
    }
    ok &= thetas.len() == 2 && thetas[1] <= thetas[0];
    record(out, 10, "approximation construction", Some(Duration::from_secs(60)), start, ok, parts.join("; "));
}

fn criterion_11(out: &mut Vec<Outcome>) {
    let start = Instant::now();
    let controls = negative_controls(SEED);
    let missed: Vec<_> = controls.iter().filter(|c| !c.failed_as_expected).map(|c| c.name.clone()).collect();
    record(
        out,
        11,
        "negative controls",
        Some(Duration::from_secs(10)),
        start,
        missed.is_empty() && controls.len() >= 7,
        format!("{} controls, missed: {missed:?}", controls.len()),
    );
}

fn criterion_12(out: &mut Vec<Outcome>, work: &Path) {
    let start = Instant::now();
    let mut runs = Vec::new();
    for (nx, nt) in [(16, 7), (32, 15)] {
        let cfg = config_with_grid("manufactured.toml", nx, nt, work);
        let dir = work.join(format!("run2_manufactured_{nx}"));
        cgeo("solve", &cfg, &dir);
        runs.push((work.join(format!("run1_manufactured_{nx}")), dir));
    }
    let geo = configs_dir().join("geodesic.toml");
    for i in 1..=2 {
        cgeo("geodesic", &geo, &work.join(format!("run{i}_geodesic")));
    }
    runs.push((work.join("run1_geodesic"), work.join("run2_geodesic")));
    let mut compared = 0;
    let mut mismatches = Vec::new();
    for (a, b) in &runs {
        for file in ["solution.gsge", "log.jsonl", "summary.json"] {
            let (x, y) = (std::fs::read(a.join(file)), std::fs::read(b.join(file)));
            match (x, y) {
                (Ok(x), Ok(y)) if x == y && !x.is_empty() => compared += 1,
                _ => mismatches.push(format!("{}/{file}", b.file_name().unwrap().to_string_lossy())),
            }
        }
    }
    record(
        out,
        12,
        "determinism",
        None,
        start,
        mismatches.is_empty(),
        format!("{compared} file pairs byte-identical, mismatches {mismatches:?}"),
    );
}

#[test]
fn acceptance() {
    let work = tempfile::tempdir().unwrap();
    let mut out = Vec::new();
    criterion_1(&mut out);
    criterion_2(&mut out);
    criterion_3(&mut out);
    criterion_4(&mut out);
    criterion_5(&mut out);
    criterion_6(&mut out);
    criteria_7_8(&mut out, work.path());
    let geodesic = criterion_9(&mut out);
    criterion_10(&mut out, geodesic.as_ref());
    criterion_11(&mut out);
    criterion_12(&mut out, work.path());

    let failed: Vec<usize> = out.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    let total: f64 = out.iter().map(|o| o.elapsed.as_secs_f64()).sum();
    let _ = writeln!(
        std::io::stdout(),
        "acceptance: {} of {} criteria passed in {total:.1} s",
        out.len() - failed.len(),
        out.len()
    );
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
