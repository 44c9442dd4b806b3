//! Random instances for the property checks.

use rand::Rng;

use crate::conformal::{assemble_r, classify_admissible, f_k_of, Admissibility, AugmentedMatrix, Coefficients, Jet};
use crate::symfunc::SymMatrix;

pub fn vector(rng: &mut impl Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..=scale)).collect()
}

/// Entries uniform in `[−scale, scale]`.
pub fn symmetric(rng: &mut impl Rng, n: usize, scale: f64) -> SymMatrix {
    SymMatrix::from_fn(n, |_, _| rng.random_range(-scale..=scale))
}

/// A symmetric matrix with spectrum in `Γ_k`, by shifting a random matrix
/// and rejecting until membership holds.
pub fn in_gamma_k(rng: &mut impl Rng, n: usize, k: usize) -> SymMatrix {
    loop {
        let shift = rng.random_range(-0.5..2.5);
        let m = symmetric(rng, n, 1.0) + SymMatrix::scaled_identity(n, shift);
        if m.gamma_margin(k) > 0.0 {
            return m;
        }
    }
}

/// Dimension in `1..=max_n` and index in `1..=n`.
pub fn dims(rng: &mut impl Rng, max_n: usize) -> (usize, usize) {
    let n = rng.random_range(1..=max_n);
    (n, rng.random_range(1..=n))
}

pub fn coefficients(rng: &mut impl Rng, n: usize, k: usize) -> Coefficients {
    Coefficients::new(
        n,
        k,
        rng.random_range(0.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
    )
    .expect("sampled coefficients are valid")
}

/// A jet with no admissibility guarantee. `utt` may be negative.
pub fn jet(rng: &mut impl Rng, n: usize) -> Jet {
    let mut j = Jet::zero(n);
    j.u = rng.random_range(-1.0..1.0);
    j.ut = rng.random_range(-1.0..1.0);
    j.utt = rng.random_range(-0.5..3.0);
    for i in 0..n {
        j.grad_u[i] = rng.random_range(-1.0..1.0);
        j.grad_ut[i] = rng.random_range(-1.5..1.5);
    }
    j.hess_u = symmetric(rng, n, 1.0);
    j.a_here = symmetric(rng, n, 0.5) + SymMatrix::scaled_identity(n, rng.random_range(0.0..2.0));
    j.psi_here = 1.0;
    j
}

/// A strictly admissible jet with `u_tt ≥ 0.05` (rejection sampling).
pub fn strict_jet(rng: &mut impl Rng, c: &Coefficients) -> Jet {
    loop {
        let mut j = jet(rng, c.n);
        j.utt = rng.random_range(0.05..3.0);
        if classify_admissible(&j, c, 0.0).class == Admissibility::Strict {
            j.psi_here = f_k_of(&assemble_r(&j, c), c.k);
            return j;
        }
    }
}

/// An augmented matrix in the cone `S`: `r ∈ Γ_k`, `r_00 > 0` and
/// `F_k(R) > 0`.
pub fn in_s(rng: &mut impl Rng, n: usize, k: usize) -> AugmentedMatrix {
    loop {
        let r = in_gamma_k(rng, n, k);
        let r00 = rng.random_range(0.01..3.0);
        let r0 = vector(rng, n, 1.0);
        let m = AugmentedMatrix::new(r00, &r0, r);
        if f_k_of(&m, k) > 0.0 {
            return m;
        }
    }
}

/// Random positive semidefinite `(n+1)×(n+1)` matrix with largest entry
/// at most `scale`: either `BᵀB` or a rank-one `ξξᵀ`, normalized.
pub fn psd(rng: &mut impl Rng, dim: usize, scale: f64) -> Vec<Vec<f64>> {
    let rank_one = rng.random_bool(0.3);
    let rows = if rank_one { 1 } else { dim };
    let b: Vec<Vec<f64>> = (0..rows).map(|_| vector(rng, dim, 1.0)).collect();
    let mut p = vec![vec![0.0; dim]; dim];
    for row in &b {
        for i in 0..dim {
            for j in 0..dim {
                p[i][j] += row[i] * row[j];
            }
        }
    }
    let max = p.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let target = scale * rng.random_range(0.0..1.0);
    if max > 0.0 {
        for v in p.iter_mut().flatten() {
            *v *= target / max;
        }
    }
    p
}
