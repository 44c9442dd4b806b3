//! TOML run configuration.
//!
//! ```toml
//! [problem]
//! n = 2
//! k = 2
//! r = 1.0                      # gamma and s default to 0
//! # preset = "schouten"        # sets (gamma, s, r); "tau" for neg-modified-schouten
//! a = { diagonal = 2.0 }       # or { file = "a.txt" }
//! psi = { constant = 0.0 }     # or { trig = [...] } or { file = "psi.txt" }
//! u0 = { constant = 0.5 }
//! u1 = { constant = 0.5 }
//! # manufactured = [ { amp = 1.0, freq = [0, 0], time = [0.0, -1.0, 1.0, 0.0] } ]
//!
//! [grid]
//! nx = 16
//! nt = 7
//!
//! [solver]                     # any SolverOptions field
//! newton_tol = 1e-9
//!
//! [run]
//! mode = "geodesic"            # init | solve | geodesic | slice | verify
//! seed = 0
//! out = "out"
//! deterministic = true
//! ```
//!
//! A `manufactured` list of trig terms replaces `psi`, `u0` and `u1`: the
//! terms define `u*`, `ψ := F_k(u*)` exactly and the boundary slices are
//! `u*(·, 0)`, `u*(·, 1)`. It needs a diagonal `A`.
//!
//! Relative file paths are resolved against the directory of the config.
//! Text files hold whitespace-separated numbers (`#` starts a comment);
//! scalar fields may also be snapshots.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::conformal::{Coefficients, Preset};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, SpacetimeField};
use crate::manufactured::{Manufactured, TrigField, TrigTerm};
use crate::problem::Problem;
use crate::solver::{DegenerateMode, SolverOptions};
use crate::symfunc::{SymMatrix, MAX_DIM};

use super::snapshot::{decode_snapshot, is_snapshot};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Init,
    Solve,
    Geodesic,
    Slice,
    Verify,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Init => "init",
            Mode::Solve => "solve",
            Mode::Geodesic => "geodesic",
            Mode::Slice => "slice",
            Mode::Verify => "verify",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    pub grid: GridSection,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub verify: VerifySection,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub n: usize,
    pub k: usize,
    pub gamma: Option<f64>,
    pub s: Option<f64>,
    pub r: Option<f64>,
    pub preset: Option<String>,
    pub tau: Option<f64>,
    pub a: ASpec,
    pub psi: Option<FieldSpec>,
    pub u0: Option<FieldSpec>,
    pub u1: Option<FieldSpec>,
    pub manufactured: Option<Vec<TrigSpec>>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ASpec {
    /// `A = c·I`.
    Diagonal(f64),
    /// `n(n+1)/2` upper-triangle entries (row-major), either once for a
    /// constant `A` or once per spatial node.
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum FieldSpec {
    Constant(f64),
    Trig(Vec<TrigSpec>),
    /// One value per spatial node, or (for `psi`) one per spacetime node.
    File(PathBuf),
}

/// `amp · p(t) · cos(2π⟨freq, x⟩)` (or `sin` when `sine` is set), with
/// `p(t) = time[0] + time[1] t + time[2] t² + time[3] t³`.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigSpec {
    pub amp: f64,
    #[serde(default)]
    pub freq: Vec<i32>,
    #[serde(default)]
    pub sine: bool,
    #[serde(default = "unit_time")]
    pub time: [f64; 4],
}

fn unit_time() -> [f64; 4] {
    [1.0, 0.0, 0.0, 0.0]
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub nx: usize,
    pub nt: usize,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub mode: Option<Mode>,
    pub seed: u64,
    pub out: PathBuf,
    pub deterministic: bool,
    /// Regularization used by `geodesic` and `verify`.
    pub degenerate: DegenerateMode,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            mode: None,
            seed: 0,
            out: PathBuf::from("out"),
            deterministic: false,
            degenerate: DegenerateMode::RhsEpsilon,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    /// Snapshot to verify; when absent the geodesic is solved first.
    pub solution: Option<PathBuf>,
    pub samples: usize,
    pub trials: usize,
    pub jacobian_pairs: usize,
    pub deltas: Vec<f64>,
    /// Also solve with the other regularization and compare.
    pub comparison: bool,
    pub controls: bool,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            solution: None,
            samples: 10_000,
            trials: 1000,
            jacobian_pairs: 20,
            deltas: vec![1e-2, 1e-3],
            comparison: true,
            controls: true,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.problem.n, self.grid.nx, self.grid.nt)
    }

    pub fn coefficients(&self) -> Result<Coefficients> {
        let p = &self.problem;
        let (gamma, s, r) = match &p.preset {
            Some(name) => {
                let (s, r, gamma) = Preset::from_name(name, p.n, p.tau)?.params()?;
                for (field, given, value) in [("gamma", p.gamma, gamma), ("s", p.s, s), ("r", p.r, r)] {
                    if given.is_some_and(|g| g != value) {
                        return Err(Error::Config(format!(
                            "problem.{field} = {} conflicts with preset {name:?} ({field} = {value})",
                            given.unwrap_or_default()
                        )));
                    }
                }
                (gamma, s, r)
            }
            None => (p.gamma.unwrap_or(0.0), p.s.unwrap_or(0.0), p.r.unwrap_or(0.0)),
        };
        Coefficients::new(p.n, p.k, gamma, s, r)
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn manufactured(&self) -> Result<Option<Manufactured>> {
        let Some(terms) = &self.problem.manufactured else {
            return Ok(None);
        };
        for name in ["psi", "u0", "u1"] {
            let given = match name {
                "psi" => self.problem.psi.is_some(),
                "u0" => self.problem.u0.is_some(),
                _ => self.problem.u1.is_some(),
            };
            if given {
                return Err(Error::Config(format!("problem.{name} cannot be combined with problem.manufactured")));
            }
        }
        let ASpec::Diagonal(a) = self.problem.a else {
            return Err(Error::Config("problem.manufactured needs a = { diagonal = ... }".into()));
        };
        Ok(Some(Manufactured {
            coeffs: self.coefficients()?,
            a,
            solution: trig_field(self.problem.n, terms, "problem.manufactured")?,
        }))
    }

    /// Builds and validates the problem.
    pub fn build_problem(&self) -> Result<Problem> {
        let grid = self.grid_spec()?;
        if let Some(m) = self.manufactured()? {
            return m.problem(grid);
        }
        let coeffs = self.coefficients()?;
        let ns = grid.spatial_len();
        let p = &self.problem;
        let a = match &p.a {
            ASpec::Diagonal(c) => vec![SymMatrix::scaled_identity(p.n, *c); ns],
            ASpec::File(path) => self.a_from_file(path, grid)?,
        };
        let missing = |name: &str| Error::Config(format!("problem.{name} is missing"));
        let psi = self.field(p.psi.as_ref().ok_or_else(|| missing("psi"))?, grid, "psi", true)?;
        let u0 = self.field(p.u0.as_ref().ok_or_else(|| missing("u0"))?, grid, "u0", false)?;
        let u1 = self.field(p.u1.as_ref().ok_or_else(|| missing("u1"))?, grid, "u1", false)?;
        Problem::new(coeffs, grid, a, psi, u0, u1)
    }

    fn a_from_file(&self, path: &Path, grid: GridSpec) -> Result<Vec<SymMatrix>> {
        let n = grid.n;
        let per = n * (n + 1) / 2;
        let values = read_numbers(&self.resolve(path), "problem.a")?;
        let ns = grid.spatial_len();
        let entries = |chunk: &[f64]| {
            let mut m = SymMatrix::zeros(n);
            let mut it = chunk.iter();
            for i in 0..n {
                for j in i..n {
                    m.set(i, j, *it.next().expect("chunk length checked"));
                }
            }
            m
        };
        if values.len() == per {
            Ok(vec![entries(&values); ns])
        } else if values.len() == per * ns {
            Ok(values.chunks(per).map(entries).collect())
        } else {
            Err(Error::Config(format!(
                "problem.a file has {} values, expected {per} or {}",
                values.len(),
                per * ns
            )))
        }
    }

    /// Spatial slices (`u0`, `u1`) or a full spacetime field (`psi`).
    fn field(&self, spec: &FieldSpec, grid: GridSpec, name: &str, spacetime: bool) -> Result<Vec<f64>> {
        let ns = grid.spatial_len();
        let want = if spacetime { grid.len() } else { ns };
        let values = match spec {
            FieldSpec::Constant(c) => vec![*c; want],
            FieldSpec::Trig(terms) => {
                let f = trig_field(grid.n, terms, &format!("problem.{name}"))?;
                if spacetime {
                    SpacetimeField::from_fn(grid, |x, t| f.value(x, t)).into_values()
                } else {
                    (0..ns).map(|s| f.value(&grid.position(s), 0.0)).collect()
                }
            }
            FieldSpec::File(path) => {
                let path = self.resolve(path);
                let bytes = std::fs::read(&path)
                    .map_err(|e| Error::Config(format!("problem.{name}: cannot read {}: {e}", path.display())))?;
                if is_snapshot(&bytes) {
                    let f = decode_snapshot(&bytes)?;
                    if *f.grid() != grid {
                        return Err(Error::Config(format!("problem.{name}: snapshot grid does not match [grid]")));
                    }
                    f.into_values()
                } else {
                    parse_numbers(&String::from_utf8_lossy(&bytes), &format!("problem.{name}"))?
                }
            }
        };
        if values.len() == want {
            Ok(values)
        } else if spacetime && values.len() == ns {
            Ok((0..grid.levels()).flat_map(|_| values.iter().copied()).collect())
        } else {
            Err(Error::Config(format!(
                "problem.{name} has {} values, expected {want}",
                values.len()
            )))
        }
    }
}

fn trig_field(n: usize, terms: &[TrigSpec], name: &str) -> Result<TrigField> {
    let mut out = Vec::with_capacity(terms.len());
    for (i, t) in terms.iter().enumerate() {
        if t.freq.len() > n.min(MAX_DIM) {
            return Err(Error::Config(format!("{name}[{i}].freq has more than n = {n} entries")));
        }
        out.push(TrigTerm::wave(t.amp, &t.freq, t.sine, t.time));
    }
    Ok(TrigField { n, terms: out })
}

fn read_numbers(path: &Path, name: &str) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{name}: cannot read {}: {e}", path.display())))?;
    parse_numbers(&text, name)
}

fn parse_numbers(text: &str, name: &str) -> Result<Vec<f64>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace)
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| Error::Config(format!("{name}: {tok:?} is not a number")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[problem]
n = 2
k = 2
r = 1.0
a = { diagonal = 2.0 }
psi = { constant = 0.0 }
u0 = { constant = 0.5 }
u1 = { constant = 0.5 }

[grid]
nx = 4
nt = 3
"#;

    #[test]
    fn parses_and_builds() {
        let cfg = RunConfig::from_toml(BASE, Path::new(".")).unwrap();
        let p = cfg.build_problem().unwrap();
        assert_eq!(p.grid().spatial_len(), 16);
        assert_eq!(cfg.solver, SolverOptions::default());
        assert_eq!(cfg.run.degenerate, DegenerateMode::RhsEpsilon);
    }

    #[test]
    fn missing_u1_is_named() {
        let text = BASE.replace("u1 = { constant = 0.5 }\n", "");
        let cfg = RunConfig::from_toml(&text, Path::new(".")).unwrap();
        let err = cfg.build_problem().unwrap_err().to_string();
        assert!(err.contains("u1"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = BASE.replace("[grid]", "[grid]\nnz = 3");
        let err = RunConfig::from_toml(&text, Path::new(".")).unwrap_err().to_string();
        assert!(err.contains("nz"), "{err}");
    }

    #[test]
    fn preset_conflicts_are_reported() {
        let text = BASE.replace("n = 2", "n = 4").replace("r = 1.0", "r = 2.0\npreset = \"schouten\"");
        let cfg = RunConfig::from_toml(&text, Path::new(".")).unwrap();
        let err = cfg.coefficients().unwrap_err().to_string();
        assert!(err.contains("problem.r"), "{err}");
    }

    #[test]
    fn files_and_trig_specs() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.txt"), "# upper triangle\n2 0.1\n2\n").unwrap();
        let text = BASE
            .replace("{ diagonal = 2.0 }", "{ file = \"a.txt\" }")
            .replace(
                "psi = { constant = 0.0 }",
                "psi = { trig = [ { amp = 0.1 }, { amp = 0.05, freq = [1, 0], time = [1.0, 0.0, 0.0, 0.0] } ] }",
            );
        let cfg = RunConfig::from_toml(&text, dir.path()).unwrap();
        let p = cfg.build_problem().unwrap();
        assert_eq!(p.a_at(3).get(0, 1), 0.1);
        assert!((p.psi()[0] - 0.15).abs() < 1e-15);
    }
}
