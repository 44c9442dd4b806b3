//! Pointwise algebra of the equation on a flat torus.
//!
//! With the flat metric every covariant derivative is a partial derivative,
//! so a [`Jet`] of raw derivative values is all that is needed to assemble
//!
//! ```text
//! W[u] = ∇²u + s ∇u⊗∇u + (γ Δu − (r/2) |∇u|²) I + A
//! E_u  = u_tt W[u] − ∇u_t ⊗ ∇u_t
//! R    = [[u_tt, ∇u_tᵀ], [∇u_t, W[u]]]
//! ```
//!
//! and the operator `F_k(R) = r_00 σ_k(r) − σ_k^{ij}(r) r_0i r_0j`, which
//! equals `u_tt^{1−k} σ_k(E_u)` whenever `u_tt > 0`.

use crate::error::{Error, Result};
use crate::symfunc::{binomial, sigma_grad_unchecked, sigma_unchecked, SymMatrix, MAX_DIM};

/// Scalar parameters of the equation.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Coefficients {
    /// Spatial dimension.
    pub n: usize,
    /// Index of the elementary symmetric function.
    pub k: usize,
    pub gamma: f64,
    pub s: f64,
    pub r: f64,
}

impl Coefficients {
    pub fn new(n: usize, k: usize, gamma: f64, s: f64, r: f64) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::Parameter(format!(
                "dimension n = {n} outside 1..={MAX_DIM}"
            )));
        }
        if k == 0 || k > n {
            return Err(Error::Parameter(format!("index k = {k} outside 1..={n}")));
        }
        if !(gamma.is_finite() && s.is_finite() && r.is_finite()) {
            return Err(Error::Parameter("gamma, s, r must be finite".into()));
        }
        if gamma < 0.0 {
            return Err(Error::Parameter(format!("gamma = {gamma} must be >= 0")));
        }
        Ok(Self { n, k, gamma, s, r })
    }

    /// The same coefficients with `γ` replaced.
    pub fn with_gamma(self, gamma: f64) -> Self {
        Self { gamma, ..self }
    }
}

/// Derivative data of `u` at one point, together with the local tensor `A`
/// and right-hand side `ψ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub u: f64,
    pub ut: f64,
    pub utt: f64,
    pub grad_u: [f64; MAX_DIM],
    pub grad_ut: [f64; MAX_DIM],
    pub hess_u: SymMatrix,
    pub a_here: SymMatrix,
    pub psi_here: f64,
}

impl Jet {
    /// All derivatives zero, `A = 0`, `ψ = 0`.
    pub fn zero(n: usize) -> Self {
        Self {
            u: 0.0,
            ut: 0.0,
            utt: 0.0,
            grad_u: [0.0; MAX_DIM],
            grad_ut: [0.0; MAX_DIM],
            hess_u: SymMatrix::zeros(n),
            a_here: SymMatrix::zeros(n),
            psi_here: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.hess_u.dim()
    }

    pub fn grad(&self) -> &[f64] {
        &self.grad_u[..self.dim()]
    }

    pub fn grad_t(&self) -> &[f64] {
        &self.grad_ut[..self.dim()]
    }

    pub fn is_finite(&self) -> bool {
        let n = self.dim();
        self.u.is_finite()
            && self.ut.is_finite()
            && self.utt.is_finite()
            && self.grad_u[..n].iter().all(|x| x.is_finite())
            && self.grad_ut[..n].iter().all(|x| x.is_finite())
            && self.hess_u.is_finite()
            && self.a_here.is_finite()
            && self.psi_here.is_finite()
    }
}

/// The `(n+1) × (n+1)` symmetric matrix `R`, stored by blocks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AugmentedMatrix {
    pub r00: f64,
    pub r0: [f64; MAX_DIM],
    pub r: SymMatrix,
}

impl AugmentedMatrix {
    pub fn new(r00: f64, r0: &[f64], r: SymMatrix) -> Self {
        let mut row = [0.0; MAX_DIM];
        row[..r0.len()].copy_from_slice(r0);
        Self { r00, r0: row, r }
    }

    /// Size of the full matrix, `n + 1`.
    pub fn dim(&self) -> usize {
        self.r.dim() + 1
    }

    /// Entry `(I, J)` with index 0 the time row.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 0) => self.r00,
            (0, j) => self.r0[j - 1],
            (i, 0) => self.r0[i - 1],
            (i, j) => self.r.get(i - 1, j - 1),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        let m = self.dim();
        (0..m)
            .map(|i| (0..m).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = *self;
        out.r00 *= c;
        out.r0.iter_mut().for_each(|x| *x *= c);
        out.r = c * self.r;
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        out.r00 += other.r00;
        for (x, y) in out.r0.iter_mut().zip(other.r0.iter()) {
            *x += y;
        }
        out.r = self.r + other.r;
        out
    }

    pub fn midpoint(&self, other: &Self) -> Self {
        self.add(other).scale(0.5)
    }

    fn row0(&self) -> &[f64] {
        &self.r0[..self.r.dim()]
    }
}

pub fn assemble_w(jet: &Jet, c: &Coefficients) -> SymMatrix {
    let n = jet.dim();
    let g = jet.grad();
    let grad2: f64 = g.iter().map(|x| x * x).sum();
    let shift = c.gamma * jet.hess_u.trace() - 0.5 * c.r * grad2;
    let mut w = jet.hess_u + jet.a_here;
    for i in 0..n {
        for j in i..n {
            let mut v = w.get(i, j) + c.s * g[i] * g[j];
            if i == j {
                v += shift;
            }
            w.set(i, j, v);
        }
    }
    w
}

pub fn assemble_e(jet: &Jet, c: &Coefficients) -> SymMatrix {
    jet.utt * assemble_w(jet, c) - SymMatrix::outer(jet.grad_t())
}

pub fn assemble_r(jet: &Jet, c: &Coefficients) -> AugmentedMatrix {
    AugmentedMatrix::new(jet.utt, jet.grad_t(), assemble_w(jet, c))
}

/// `F_k(R) = r_00 σ_k(r) − σ_k^{ij}(r) r_0i r_0j`.
pub fn f_k_of(rm: &AugmentedMatrix, k: usize) -> f64 {
    let grad = sigma_grad_unchecked(&rm.r, k);
    rm.r00 * sigma_unchecked(&rm.r, k) - grad.quad(rm.row0())
}

/// The two evaluations of the operator at a jet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualPair {
    /// `u_tt σ_k(W) − σ_k^{ij}(W) u_ti u_tj`.
    pub direct: f64,
    /// `u_tt^{1−k} σ_k(E_u)`, available only when `u_tt > 0`.
    pub via_e: Option<f64>,
}

pub fn residual_pair(jet: &Jet, c: &Coefficients) -> ResidualPair {
    let direct = f_k_of(&assemble_r(jet, c), c.k);
    let via_e = (jet.utt > 0.0).then(|| via_e_branch(jet, c));
    ResidualPair { direct, via_e }
}

fn via_e_branch(jet: &Jet, c: &Coefficients) -> f64 {
    let e = assemble_e(jet, c);
    jet.utt.powi(1 - c.k as i32) * sigma_unchecked(&e, c.k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Admissibility {
    Strict,
    Degenerate,
    Violated,
}

/// Classification of a jet together with the quantities it was based on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdmissibilityVerdict {
    pub class: Admissibility,
    /// `min_{j≤k} σ_j(W) / C(n, j)`.
    pub cone_margin: f64,
    pub utt: f64,
    pub sigma_k_e: f64,
    /// `sign · (|σ_k(E)| / C(n, k))^{1/k}`, homogeneous of degree one in
    /// `u_tt` like the other margins.
    pub e_margin: f64,
}

impl AdmissibilityVerdict {
    /// The smallest of the three margins.
    pub fn worst(&self) -> f64 {
        self.cone_margin.min(self.utt).min(self.e_margin)
    }
}

pub fn classify_admissible(jet: &Jet, c: &Coefficients, margin: f64) -> AdmissibilityVerdict {
    let w = assemble_w(jet, c);
    let e = jet.utt * w - SymMatrix::outer(jet.grad_t());
    let cone_margin = w.gamma_margin(c.k);
    let sigma_k_e = sigma_unchecked(&e, c.k);
    let utt = jet.utt;
    let e_margin = sigma_k_e.signum() * (sigma_k_e.abs() / binomial(c.n, c.k)).powf(1.0 / c.k as f64);
    let class = if cone_margin > margin && utt > margin && e_margin > margin {
        Admissibility::Strict
    } else if cone_margin >= -margin && utt >= -margin && e_margin >= -margin {
        Admissibility::Degenerate
    } else {
        Admissibility::Violated
    };
    AdmissibilityVerdict {
        class,
        cone_margin,
        utt,
        sigma_k_e,
        e_margin,
    }
}

/// `ln F_k` at a strictly admissible jet, through `u_tt^{1−k} σ_k(E_u)`.
pub fn log_f(jet: &Jet, c: &Coefficients) -> Result<f64> {
    let verdict = classify_admissible(jet, c, 0.0);
    if verdict.class != Admissibility::Strict {
        return Err(Error::Domain {
            reason: "jet is not strictly admissible".into(),
            margin: verdict.worst(),
        });
    }
    Ok((1.0 - c.k as f64) * jet.utt.ln() + verdict.sigma_k_e.ln())
}

/// `G(R) − ln ψ = ln F_k(R) − ln ψ`.
pub fn log_residual(jet: &Jet, c: &Coefficients) -> Result<f64> {
    if !(jet.psi_here > 0.0) {
        return Err(Error::Domain {
            reason: "psi must be positive for the log residual".into(),
            margin: jet.psi_here,
        });
    }
    Ok(log_f(jet, c)? - jet.psi_here.ln())
}

/// Named coefficient patterns `(s, r, γ)` of the classical conformal tensors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Preset {
    Schouten,
    NegSchouten,
    NegRicci { n: usize },
    NegModifiedSchouten { n: usize, tau: f64 },
}

impl Preset {
    /// Parses `schouten`, `neg-schouten`, `neg-ricci` and
    /// `neg-modified-schouten`; the last two need `n`, the last also `τ`.
    pub fn from_name(name: &str, n: usize, tau: Option<f64>) -> Result<Self> {
        match name {
            "schouten" => Ok(Self::Schouten),
            "neg-schouten" => Ok(Self::NegSchouten),
            "neg-ricci" => Ok(Self::NegRicci { n }),
            "neg-modified-schouten" => {
                let tau = tau.ok_or_else(|| {
                    Error::Parameter("neg-modified-schouten needs tau".into())
                })?;
                Ok(Self::NegModifiedSchouten { n, tau })
            }
            other => Err(Error::Parameter(format!("unknown preset {other:?}"))),
        }
    }

    /// `(s, r, γ)`.
    pub fn params(&self) -> Result<(f64, f64, f64)> {
        let dim_factor = |n: usize| {
            if n <= 2 {
                Err(Error::Parameter(format!(
                    "preset needs n > 2 (got n = {n})"
                )))
            } else {
                Ok(1.0 / (n as f64 - 2.0))
            }
        };
        match *self {
            Self::Schouten => Ok((1.0, 1.0, 0.0)),
            Self::NegSchouten => Ok((-1.0, -1.0, 0.0)),
            Self::NegRicci { n } => Ok((-1.0, -2.0, dim_factor(n)?)),
            Self::NegModifiedSchouten { n, tau } => {
                if tau > 1.0 {
                    return Err(Error::Parameter(format!("tau = {tau} must be <= 1")));
                }
                Ok((-1.0, tau - 2.0, (1.0 - tau) * dim_factor(n)?))
            }
        }
    }
}

pub fn preset_params(preset: Preset) -> Result<(f64, f64, f64)> {
    preset.params()
}

/// Which of the structural hypotheses of the existence and uniqueness
/// theory the coefficients satisfy.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct RegimeReport {
    /// `γ > 0`.
    pub gamma_positive: bool,
    /// `r > 0` and `2sk ≤ rn`.
    pub gradient_pattern: bool,
    /// `r ≠ 0`, enough for Lipschitz viscosity limits.
    pub weak_limit: bool,
    /// `γ > 0, r ≥ 0, 2sk ≤ rn` or `r > 0, 2sk ≤ rn`.
    pub uniqueness: bool,
    /// `n ≥ 3`, the geometric setting; smaller `n` is computed but flagged.
    pub geometric_dimension: bool,
    pub warnings: Vec<String>,
}

impl RegimeReport {
    pub fn existence(&self) -> bool {
        self.gamma_positive || self.gradient_pattern
    }
}

pub fn validate_theorem_regime(c: &Coefficients) -> RegimeReport {
    let pattern = 2.0 * c.s * c.k as f64 <= c.r * c.n as f64;
    let gamma_positive = c.gamma > 0.0;
    let gradient_pattern = c.r > 0.0 && pattern;
    let uniqueness = (gamma_positive && c.r >= 0.0 && pattern) || gradient_pattern;
    let mut warnings = Vec::new();
    if !(gamma_positive || gradient_pattern) {
        warnings.push(format!(
            "neither gamma > 0 nor (r > 0 and 2sk <= rn) holds: 2sk = {}, rn = {}",
            2.0 * c.s * c.k as f64,
            c.r * c.n as f64
        ));
    }
    if c.n < 3 {
        warnings.push(format!("n = {} is below the geometric dimension 3", c.n));
    }
    RegimeReport {
        gamma_positive,
        gradient_pattern,
        weak_limit: c.r != 0.0,
        uniqueness,
        geometric_dimension: c.n >= 3,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs(n: usize, k: usize, gamma: f64, s: f64, r: f64) -> Coefficients {
        Coefficients::new(n, k, gamma, s, r).unwrap()
    }

    /// utt = 2, W = I₃ (A = I, zero spatial derivatives), ∇u_t = e₁.
    fn reference_jet() -> Jet {
        let mut j = Jet::zero(3);
        j.utt = 2.0;
        j.grad_ut[0] = 1.0;
        j.a_here = SymMatrix::identity(3);
        j.psi_here = 4.0;
        j
    }

    #[test]
    fn w_examples() {
        let c = coeffs(3, 2, 0.5, 1.0, 1.0);
        let a = SymMatrix::diag(&[1.0, 2.0, 3.0]);
        let mut j = Jet::zero(3);
        j.a_here = a;
        assert_eq!(assemble_w(&j, &c), a);

        j.hess_u = SymMatrix::identity(3);
        assert_eq!(assemble_w(&j, &c), SymMatrix::scaled_identity(3, 2.5) + a);

        let c = coeffs(3, 2, 0.0, 1.0, 1.0);
        let mut j = Jet::zero(3);
        j.a_here = a;
        j.grad_u[0] = 1.0;
        let expect = SymMatrix::outer(&[1.0, 0.0, 0.0]) - SymMatrix::scaled_identity(3, 0.5) + a;
        assert_eq!(assemble_w(&j, &c), expect);
    }

    #[test]
    fn e_and_r_examples() {
        let c = coeffs(3, 2, 0.0, 0.0, 0.0);
        assert_eq!(assemble_e(&Jet::zero(3), &c), SymMatrix::zeros(3));
        let j = reference_jet();
        assert_eq!(assemble_e(&j, &c), SymMatrix::diag(&[1.0, 2.0, 2.0]));

        let mut z = Jet::zero(3);
        z.a_here = SymMatrix::identity(3);
        let rm = assemble_r(&z, &c);
        assert_eq!(rm.r00, 0.0);
        assert_eq!(rm.r, SymMatrix::identity(3));

        let rm = assemble_r(&j, &c);
        assert_eq!(rm.to_rows()[0], vec![2.0, 1.0, 0.0, 0.0]);
        let rows = rm.to_rows();
        for i in 0..4 {
            for jj in 0..4 {
                assert_eq!(rows[i][jj], rows[jj][i]);
            }
        }
    }

    #[test]
    fn f_k_examples() {
        let rm = AugmentedMatrix::new(2.0, &[0.0; 3], SymMatrix::identity(3));
        assert_eq!(f_k_of(&rm, 2), 6.0);
        let rm = AugmentedMatrix::new(2.0, &[1.0, 0.0, 0.0], SymMatrix::identity(3));
        assert_eq!(f_k_of(&rm, 2), 4.0);
    }

    #[test]
    fn residual_pair_reference() {
        let c = coeffs(3, 2, 0.0, 0.0, 0.0);
        let p = residual_pair(&reference_jet(), &c);
        assert_eq!(p.direct, 4.0);
        assert_eq!(p.via_e, Some(4.0));

        let mut j = reference_jet();
        j.utt = 0.0;
        assert_eq!(residual_pair(&j, &c).via_e, None);

        let mut j = reference_jet();
        j.grad_ut = [0.0; MAX_DIM];
        let p = residual_pair(&j, &c);
        assert_eq!(p.direct, 2.0 * 3.0);
        assert_eq!(p.via_e, Some(p.direct));
    }

    #[test]
    fn classification_examples() {
        let c = coeffs(3, 2, 0.0, 0.0, 0.0);
        let mut z = Jet::zero(3);
        z.a_here = SymMatrix::identity(3);
        assert_eq!(classify_admissible(&z, &c, 0.0).class, Admissibility::Degenerate);

        let v = classify_admissible(&reference_jet(), &c, 0.0);
        assert_eq!(v.class, Admissibility::Strict);
        assert_eq!(v.sigma_k_e, 8.0);

        let mut j = reference_jet();
        j.utt = -1.0;
        assert_eq!(classify_admissible(&j, &c, 0.0).class, Admissibility::Violated);
    }

    #[test]
    fn log_residual_examples() {
        let c = coeffs(3, 2, 0.0, 0.0, 0.0);
        assert!(log_residual(&reference_jet(), &c).unwrap().abs() < 1e-15);

        let mut j = reference_jet();
        j.psi_here = 0.0;
        assert!(matches!(log_residual(&j, &c), Err(Error::Domain { .. })));
        j.psi_here = 1.0;
        j.utt = 0.0;
        match log_residual(&j, &c) {
            Err(Error::Domain { margin, .. }) => assert_eq!(margin, 0.0),
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn presets() {
        assert_eq!(Preset::Schouten.params().unwrap(), (1.0, 1.0, 0.0));
        assert_eq!(Preset::NegSchouten.params().unwrap(), (-1.0, -1.0, 0.0));
        assert_eq!(Preset::NegRicci { n: 4 }.params().unwrap(), (-1.0, -2.0, 0.5));
        let (s, r, g) = Preset::NegModifiedSchouten { n: 5, tau: 0.25 }.params().unwrap();
        assert_eq!((s, r), (-1.0, -1.75));
        assert!((g - 0.25).abs() < 1e-15);
        assert!(Preset::NegModifiedSchouten { n: 5, tau: 1.5 }.params().is_err());
        assert!(Preset::from_name("bach", 4, None).is_err());
        assert!(Preset::NegRicci { n: 2 }.params().is_err());
    }

    #[test]
    fn regimes() {
        let r = validate_theorem_regime(&coeffs(4, 2, 0.0, 1.0, 1.0));
        assert!(r.gradient_pattern && r.existence());
        let r = validate_theorem_regime(&coeffs(4, 2, 0.1, 5.0, -3.0));
        assert!(r.gamma_positive && r.existence());
        let r = validate_theorem_regime(&coeffs(3, 2, 0.0, 2.0, 1.0));
        assert!(!r.existence());
        assert!(!r.warnings.is_empty());
    }

    #[test]
    fn rejects_bad_coefficients() {
        assert!(Coefficients::new(3, 0, 0.0, 0.0, 0.0).is_err());
        assert!(Coefficients::new(3, 4, 0.0, 0.0, 0.0).is_err());
        assert!(Coefficients::new(3, 2, -0.1, 0.0, 0.0).is_err());
        assert!(Coefficients::new(9, 2, 0.0, 0.0, 0.0).is_err());
    }
}
