use std::path::Path;

use serde_json::{json, Value};

use crate::conformal::validate_theorem_regime;
use crate::discrete::{log_residual_field, scan_admissibility, sup_abs};
use crate::error::{Error, Result};
use crate::grid::sup_norms;
use crate::problem::Problem;
use crate::solver::{
    choose_initializer, degenerate_solve, homotopy_solve, slice_initializer_traced, DegenerateMode, DegenerateResult,
    SolveTrace, SolverOptions,
};
use crate::verifier::{
    check_concavity, check_cone_propagation, check_ellipticity, check_jacobian, check_maximum_principle,
    check_residual_equivalence, check_symfunc_identities, comparison_uniqueness_test, monitor_estimates,
    negative_controls, uniqueness_approximation, viscosity_spot_check, CheckResult, VerificationReport,
};

use super::config::{Mode, RunConfig};
use super::{write_csv, write_log, write_snapshot, NormRow, EXIT_FAILURE, EXIT_OK};

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub mode: Mode,
    pub status: i32,
    /// One-line human summary.
    pub message: String,
    /// Content of `summary.json`.
    pub summary: Value,
}

/// Runs the configured mode and writes its outputs. Returns `Err` only for
/// configuration and I/O problems; solver failures produce an outcome with
/// status 1 after writing whatever was computed.
pub fn execute(cfg: &RunConfig) -> Result<RunOutcome> {
    let mode = cfg.run.mode.ok_or_else(|| Error::Config("run.mode is missing".into()))?;
    let mut opts = cfg.solver.clone();
    opts.deterministic |= cfg.run.deterministic;
    opts.validate()?;
    let problem = cfg
        .build_problem()
        .map_err(|e| if matches!(e, Error::Config(_)) { e } else { Error::Config(format!("invalid problem: {e}")) })?;
    let out = cfg.run.out.as_path();
    std::fs::create_dir_all(out)?;
    let mut summary = json!({
        "mode": mode.name(),
        "seed": cfg.run.seed,
        "grid": problem.grid(),
        "coefficients": problem.coefficients(),
        "regime": validate_theorem_regime(problem.coefficients()),
    });
    let (status, message) = match mode {
        Mode::Init => init(&problem, &opts, out, &mut summary)?,
        Mode::Solve => solve(cfg, &problem, &opts, out, &mut summary)?,
        Mode::Geodesic => geodesic(cfg, &problem, &opts, out, &mut summary)?,
        Mode::Slice => slice(&problem, &opts, out, &mut summary)?,
        Mode::Verify => verify(cfg, &problem, &opts, out, &mut summary)?,
    };
    summary["status"] = json!(status);
    summary["message"] = json!(message);
    let text = serde_json::to_string_pretty(&summary).map_err(|e| Error::Io(e.into()))?;
    std::fs::write(out.join("summary.json"), text + "\n")?;
    Ok(RunOutcome {
        mode,
        status,
        message,
        summary,
    })
}

/// Splits solver-side failures (reported, status 1) from configuration
/// errors (propagated).
fn solver_outcome<T>(r: Result<T>, trace: &mut SolveTrace) -> Result<std::result::Result<T, String>> {
    match r {
        Ok(v) => Ok(Ok(v)),
        Err(e) if super::exit_code(&e) == EXIT_FAILURE => {
            if let Error::Solver { trace: t, .. } = &e {
                trace.extend((**t).clone());
            }
            Ok(Err(e.to_string()))
        }
        Err(e) => Err(e),
    }
}

fn init(problem: &Problem, opts: &SolverOptions, out: &Path, summary: &mut Value) -> Result<(i32, String)> {
    let mut trace = SolveTrace::default();
    match solver_outcome(choose_initializer(problem, opts), &mut trace)? {
        Ok((field, kind)) => {
            write_snapshot(&field, &out.join("init.gsge"))?;
            let scan = scan_admissibility(&field, problem, opts.admissibility_margin);
            summary["initializer"] = json!(kind);
            summary["min_margin"] = json!(scan.min_margin);
            Ok((EXIT_OK, format!("init: wrote init.gsge ({kind:?}, min margin {:e})", scan.min_margin)))
        }
        Err(msg) => Ok((EXIT_FAILURE, format!("init failed: {msg}"))),
    }
}

fn solve(cfg: &RunConfig, problem: &Problem, opts: &SolverOptions, out: &Path, summary: &mut Value) -> Result<(i32, String)> {
    let mut trace = SolveTrace::default();
    let result = solver_outcome(homotopy_solve(problem, opts), &mut trace)?;
    let status = match result {
        Ok((u, t)) => {
            trace.extend(t);
            write_snapshot(&u, &out.join("solution.gsge"))?;
            write_csv(&[NormRow::new(None, None, &sup_norms(&u))], &out.join("norms.csv"))?;
            let ln_psi: Vec<f64> = (0..problem.grid().interior_len())
                .map(|i| problem.psi_at(problem.grid().interior_node(i)).ln())
                .collect();
            let residual = sup_abs(&log_residual_field(&u, problem, &ln_psi)?);
            summary["residual_sup"] = json!(residual);
            if let Some(m) = cfg.manufactured()? {
                summary["manufactured_error"] = json!(u.max_abs_diff(&m.exact_field(*problem.grid())));
            }
            (EXIT_OK, format!("solve: converged, sup log residual {residual:e}"))
        }
        Err(msg) => (EXIT_FAILURE, format!("solve failed: {msg}")),
    };
    summary["iterations"] = json!(trace.len());
    write_log(&trace, &out.join("log.jsonl"))?;
    Ok(status)
}

fn other_mode(mode: DegenerateMode) -> DegenerateMode {
    match mode {
        DegenerateMode::RhsEpsilon => DegenerateMode::GammaEpsilon,
        DegenerateMode::GammaEpsilon => DegenerateMode::RhsEpsilon,
    }
}

fn record_degenerate(r: &DegenerateResult, out: &Path, summary: &mut Value) -> Result<()> {
    if let Some(u) = r.last() {
        write_snapshot(u, &out.join("solution.gsge"))?;
    }
    if let Some(u) = &r.extrapolated {
        write_snapshot(u, &out.join("extrapolated.gsge"))?;
    }
    let rows: Vec<NormRow> = r
        .norms
        .iter()
        .enumerate()
        .map(|(i, n)| NormRow::new(Some(r.epsilons[i]), i.checked_sub(1).map(|j| r.successive_diffs[j]), n))
        .collect();
    write_csv(&rows, &out.join("epsilon_sweep.csv"))?;
    summary["degenerate"] = json!({
        "mode": r.mode,
        "epsilons": r.epsilons,
        "successive_diffs": r.successive_diffs,
        "monotonicity_excess": r.monotonicity_excess,
        "monitors_stable": r.monitors_stable,
        "failure": r.failure,
    });
    Ok(())
}

fn geodesic(cfg: &RunConfig, problem: &Problem, opts: &SolverOptions, out: &Path, summary: &mut Value) -> Result<(i32, String)> {
    let r = degenerate_solve(problem, opts, cfg.run.degenerate)?;
    record_degenerate(&r, out, summary)?;
    write_log(&r.trace, &out.join("log.jsonl"))?;
    Ok(match (&r.failure, r.epsilons.last()) {
        (None, Some(eps)) => (EXIT_OK, format!("geodesic: solved {} levels down to epsilon {eps:e}", r.epsilons.len())),
        (Some(f), _) => (EXIT_FAILURE, format!("geodesic failed: {f}")),
        (None, None) => (EXIT_FAILURE, "geodesic failed: no epsilon level solved".into()),
    })
}

fn slice(problem: &Problem, opts: &SolverOptions, out: &Path, summary: &mut Value) -> Result<(i32, String)> {
    let mut trace = SolveTrace::default();
    let result = solver_outcome(slice_initializer_traced(problem, opts, &mut trace), &mut trace)?;
    write_log(&trace, &out.join("log.jsonl"))?;
    summary["iterations"] = json!(trace.len());
    Ok(match result {
        Ok(field) => {
            write_snapshot(&field, &out.join("slices.gsge"))?;
            (EXIT_OK, format!("slice: solved {} slices", problem.grid().nt))
        }
        Err(msg) => (EXIT_FAILURE, format!("slice failed: {msg}")),
    })
}

fn verify(cfg: &RunConfig, problem: &Problem, opts: &SolverOptions, out: &Path, summary: &mut Value) -> Result<(i32, String)> {
    let v = &cfg.verify;
    let seed = cfg.run.seed;
    let mut trace = SolveTrace::default();
    let solution = match &v.solution {
        Some(path) => {
            let path = if path.is_absolute() { path.clone() } else { cfg.base_dir.join(path) };
            let u = super::read_snapshot(&path)?;
            if *u.grid() != *problem.grid() || !problem.boundary_matches(&u) {
                return Err(Error::Config(format!(
                    "verify.solution {} does not match the grid or boundary data",
                    path.display()
                )));
            }
            u
        }
        None => {
            let r = degenerate_solve(problem, opts, cfg.run.degenerate)?;
            record_degenerate(&r, out, summary)?;
            trace.extend(r.trace.clone());
            match (r.failure, r.fields.into_iter().last()) {
                (None, Some(u)) => u,
                (f, _) => {
                    write_log(&trace, &out.join("log.jsonl"))?;
                    return Ok((EXIT_FAILURE, format!("verify: geodesic solve failed: {}", f.unwrap_or_default())));
                }
            }
        }
    };

    let mut report = VerificationReport::new(seed);
    report.push(check_symfunc_identities(seed, v.samples));
    report.push(check_residual_equivalence(seed, v.samples));
    report.push(check_concavity(seed, v.samples));
    report.push(check_cone_propagation(seed, v.samples, true));
    report.push(check_ellipticity(seed, v.samples));
    if v.jacobian_pairs > 0 {
        let eps = opts.epsilon_schedule.last().copied().unwrap_or(1e-3);
        let strict = problem.with_psi(problem.psi().iter().map(|p| p + eps).collect())?;
        match choose_initializer(&strict, opts) {
            Ok((base, _)) => report.push(check_jacobian(&strict, &base, seed, v.jacobian_pairs, 0.01)?),
            Err(e) => report.push(skipped("jacobian-fd", &format!("no admissible base field: {e}"))),
        }
    }
    report.push(check_maximum_principle(&solution, problem, 1e-8));
    report.push(monitor_estimates(&solution, problem).0);
    report.push(viscosity_spot_check(&solution, problem, seed, v.trials));
    for &delta in &v.deltas {
        match uniqueness_approximation(&solution, problem, delta) {
            Ok(a) => report.push(a.report),
            Err(e) => report.push(CheckResult {
                name: "lemma-approximation".into(),
                passed: false,
                worst_margin: f64::NEG_INFINITY,
                samples: 0,
                violations: 1,
                report_only: false,
                detail: format!("delta={delta:e}: {e}"),
            }),
        }
    }
    if v.comparison {
        let delta = v.deltas.iter().copied().fold(f64::INFINITY, f64::min);
        let delta = if delta.is_finite() { delta } else { 1e-3 };
        let second = degenerate_solve(problem, opts, other_mode(cfg.run.degenerate));
        match second {
            Ok(r) if r.failure.is_none() && r.last().is_some() => {
                trace.extend(r.trace.clone());
                let u2 = r.last().expect("checked");
                report.push(comparison_uniqueness_test(&solution, u2, problem, delta, 1e-8));
            }
            Ok(r) => report.push(skipped("comparison", &format!("second run failed: {}", r.failure.unwrap_or_default()))),
            Err(e) => report.push(skipped("comparison", &format!("second run unavailable: {e}"))),
        }
    }
    if v.controls {
        for c in negative_controls(seed) {
            report.push(CheckResult {
                name: format!("control: {}", c.name),
                passed: c.failed_as_expected,
                worst_margin: if c.failed_as_expected { 0.0 } else { f64::NEG_INFINITY },
                samples: 1,
                violations: usize::from(!c.failed_as_expected),
                report_only: false,
                detail: c.detail,
            });
        }
    }
    std::fs::write(out.join("report.txt"), report.to_text())?;
    std::fs::write(out.join("report.json"), report.to_json() + "\n")?;
    if v.solution.is_none() {
        write_log(&trace, &out.join("log.jsonl"))?;
    }
    let failed: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| !c.passed && !c.report_only)
        .map(|c| c.name.as_str())
        .collect();
    summary["checks"] = json!(report.checks.len());
    summary["failed_checks"] = json!(failed);
    Ok(if failed.is_empty() {
        (EXIT_OK, format!("verify: {} checks passed", report.checks.len()))
    } else {
        (EXIT_FAILURE, format!("verify: {} of {} checks failed: {}", failed.len(), report.checks.len(), failed.join(", ")))
    })
}

fn skipped(name: &str, why: &str) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed: true,
        worst_margin: f64::NAN,
        samples: 0,
        violations: 0,
        report_only: true,
        detail: why.into(),
    }
}
