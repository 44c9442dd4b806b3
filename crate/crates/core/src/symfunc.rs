//! Elementary symmetric functions of spectra and symmetric matrices.
//!
//! For a symmetric matrix `A` with eigenvalues `λ`, `σ_k(A) = σ_k(λ)` equals
//! the sum of all `k × k` principal minors of `A`. Everything in this module
//! works from that minor-sum form: first and second derivatives are sums of
//! signed cofactors of principal submatrices, so no eigen-decomposition ever
//! runs in production code.
//!
//! Matrices are capped at [`MAX_DIM`] rows, which keeps [`SymMatrix`] a plain
//! `Copy` value and bounds the dense fourth-order [`SigmaHessian`].

use std::fmt;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Largest supported matrix dimension.
pub const MAX_DIM: usize = 8;

/// Symmetry tolerance applied when building a [`SymMatrix`] from raw rows.
pub const SYMMETRY_TOL: f64 = 1e-14;

/// `C(n, j)`, exact for the small arguments used here.
pub fn binomial(n: usize, j: usize) -> f64 {
    if j > n {
        return 0.0;
    }
    let j = j.min(n - j);
    let mut acc = 1.0;
    for i in 0..j {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Eigenvalue vector `λ = (λ_1, …, λ_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSpectrum(Vec<f64>);

impl EigenSpectrum {
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::Input("spectrum must have at least one entry".into()));
        }
        if lambda.iter().any(|x| !x.is_finite()) {
            return Err(Error::Input("spectrum entries must be finite".into()));
        }
        Ok(Self(lambda))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// All of `σ_0, …, σ_n` by the product recursion
    /// `∏(1 + λ_i x) = Σ σ_j x^j`.
    pub fn sigma_all(&self) -> Vec<f64> {
        let n = self.0.len();
        let mut e = vec![0.0; n + 1];
        e[0] = 1.0;
        for (count, &l) in self.0.iter().enumerate() {
            for j in (1..=count + 1).rev() {
                e[j] += l * e[j - 1];
            }
        }
        e
    }
}

/// `σ_k(λ)`, the sum over all `k`-subsets of products of entries.
pub fn sigma_of_spectrum(lambda: &EigenSpectrum, k: usize) -> Result<f64> {
    check_index(lambda.len(), k)?;
    Ok(lambda.sigma_all()[k])
}

/// Membership of `λ` in Gårding's cone `Γ_k`, with the open-cone test
/// `σ_j(λ) > margin · C(n, j)` for every `j = 1..=k`.
pub fn in_gamma_k(lambda: &EigenSpectrum, k: usize, margin: f64) -> Result<bool> {
    check_index(lambda.len(), k)?;
    let n = lambda.len();
    let s = lambda.sigma_all();
    Ok((1..=k).all(|j| s[j] > margin * binomial(n, j)))
}

fn check_index(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::Parameter(format!("index k = {k} outside 1..={n}")));
    }
    Ok(())
}

/// Dense symmetric `n × n` matrix, `n ≤ MAX_DIM`.
///
/// Storage is row-major with a fixed stride of [`MAX_DIM`]; entries outside
/// the leading `n × n` block stay zero.
#[derive(Clone, Copy, PartialEq)]
pub struct SymMatrix {
    n: usize,
    a: [f64; MAX_DIM * MAX_DIM],
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<f64>> = (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect();
        f.debug_struct("SymMatrix").field("rows", &rows).finish()
    }
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&n),
            "matrix dimension {n} outside 1..={MAX_DIM}"
        );
        Self {
            n,
            a: [0.0; MAX_DIM * MAX_DIM],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, c: f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * MAX_DIM + i] = c;
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            m.a[i * MAX_DIM + i] = x;
        }
        m
    }

    /// `x ⊗ x`.
    pub fn outer(x: &[f64]) -> Self {
        Self::from_fn(x.len(), |i, j| x[i] * x[j])
    }

    /// Builds from the upper triangle `f(i, j)`, `i ≤ j`, mirrored.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Validating constructor from square rows: entries must be finite and
    /// symmetric to within [`SYMMETRY_TOL`].
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || n > MAX_DIM {
            return Err(Error::Input(format!(
                "matrix dimension {n} outside 1..={MAX_DIM}"
            )));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Input("matrix rows must be square".into()));
        }
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let x = rows[i][j];
                if !x.is_finite() {
                    return Err(Error::Input(format!("entry ({i},{j}) is not finite")));
                }
                if j > i && (x - rows[j][i]).abs() > SYMMETRY_TOL {
                    return Err(Error::Input(format!(
                        "matrix not symmetric at ({i},{j}): {x} vs {}",
                        rows[j][i]
                    )));
                }
                m.a[i * MAX_DIM + j] = if j >= i { x } else { rows[j][i] };
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * MAX_DIM + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * MAX_DIM + j] = v;
        self.a[j * MAX_DIM + i] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().all(|x| x.is_finite())
    }

    /// Frobenius pairing `Σ_ij A_ij B_ij`.
    pub fn contract(&self, other: &SymMatrix) -> f64 {
        debug_assert_eq!(self.n, other.n);
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                acc += self.get(i, j) * other.get(i, j);
            }
        }
        acc
    }

    /// `xᵀ A x`.
    pub fn quad(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                acc += self.get(i, j) * x[i] * x[j];
            }
        }
        acc
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `σ_0, …, σ_n` as sums of principal minors.
    pub fn sigma_all(&self) -> [f64; MAX_DIM + 1] {
        let n = self.n;
        let mut s = [0.0; MAX_DIM + 1];
        s[0] = 1.0;
        let mut idx = [0usize; MAX_DIM];
        for mask in 1u32..(1 << n) {
            let m = subset(mask, n, &mut idx);
            s[m] += minor_det(&self.a, &idx[..m], &idx[..m]);
        }
        s
    }

    /// Smallest per-degree cone margin `min_{j≤k} σ_j / C(n, j)`; positive
    /// exactly when the spectrum lies in `Γ_k`.
    pub fn gamma_margin(&self, k: usize) -> f64 {
        let s = self.sigma_all();
        (1..=k.min(self.n))
            .map(|j| s[j] / binomial(self.n, j))
            .fold(f64::INFINITY, f64::min)
    }

    /// Cholesky test for positive definiteness.
    pub fn is_positive_definite(&self) -> bool {
        let n = self.n;
        let mut l = [0.0; MAX_DIM * MAX_DIM];
        for j in 0..n {
            let mut d = self.get(j, j);
            for p in 0..j {
                d -= l[j * MAX_DIM + p] * l[j * MAX_DIM + p];
            }
            if !(d > 0.0) {
                return false;
            }
            let d = d.sqrt();
            l[j * MAX_DIM + j] = d;
            for i in j + 1..n {
                let mut v = self.get(i, j);
                for p in 0..j {
                    v -= l[i * MAX_DIM + p] * l[j * MAX_DIM + p];
                }
                l[i * MAX_DIM + j] = v / d;
            }
        }
        true
    }
}

impl Add for SymMatrix {
    type Output = SymMatrix;
    fn add(mut self, rhs: SymMatrix) -> SymMatrix {
        debug_assert_eq!(self.n, rhs.n);
        for (x, y) in self.a.iter_mut().zip(rhs.a.iter()) {
            *x += y;
        }
        self
    }
}

impl Sub for SymMatrix {
    type Output = SymMatrix;
    fn sub(mut self, rhs: SymMatrix) -> SymMatrix {
        debug_assert_eq!(self.n, rhs.n);
        for (x, y) in self.a.iter_mut().zip(rhs.a.iter()) {
            *x -= y;
        }
        self
    }
}

impl Mul<SymMatrix> for f64 {
    type Output = SymMatrix;
    fn mul(self, mut rhs: SymMatrix) -> SymMatrix {
        for x in rhs.a.iter_mut() {
            *x *= self;
        }
        rhs
    }
}

/// Fills `idx` with the members of `mask` and returns their count.
#[inline]
fn subset(mask: u32, n: usize, idx: &mut [usize; MAX_DIM]) -> usize {
    let mut m = 0;
    for (i, slot) in (0..n).filter(|i| mask & (1 << i) != 0).zip(0..) {
        idx[slot] = i;
        m += 1;
    }
    m
}

/// Determinant of the submatrix of `a` (stride `MAX_DIM`) on the given rows
/// and columns.
fn minor_det(a: &[f64; MAX_DIM * MAX_DIM], rows: &[usize], cols: &[usize]) -> f64 {
    let at = |i: usize, j: usize| a[rows[i] * MAX_DIM + cols[j]];
    match rows.len() {
        0 => 1.0,
        1 => at(0, 0),
        2 => at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0),
        3 => {
            at(0, 0) * (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1))
                - at(0, 1) * (at(1, 0) * at(2, 2) - at(1, 2) * at(2, 0))
                + at(0, 2) * (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0))
        }
        m => {
            let mut w = [0.0; MAX_DIM * MAX_DIM];
            for i in 0..m {
                for j in 0..m {
                    w[i * MAX_DIM + j] = at(i, j);
                }
            }
            lu_det(&mut w, m)
        }
    }
}

fn lu_det(w: &mut [f64; MAX_DIM * MAX_DIM], m: usize) -> f64 {
    let mut det = 1.0;
    for c in 0..m {
        let p = (c..m)
            .max_by(|&x, &y| {
                w[x * MAX_DIM + c]
                    .abs()
                    .total_cmp(&w[y * MAX_DIM + c].abs())
            })
            .unwrap();
        let pivot = w[p * MAX_DIM + c];
        if pivot == 0.0 {
            return 0.0;
        }
        if p != c {
            for j in 0..m {
                w.swap(p * MAX_DIM + j, c * MAX_DIM + j);
            }
            det = -det;
        }
        det *= pivot;
        for i in c + 1..m {
            let f = w[i * MAX_DIM + c] / pivot;
            if f != 0.0 {
                for j in c + 1..m {
                    w[i * MAX_DIM + j] -= f * w[c * MAX_DIM + j];
                }
            }
        }
    }
    det
}

/// `σ_k(A)` as the sum of its `k × k` principal minors.
pub fn sigma_of_matrix(a: &SymMatrix, k: usize) -> Result<f64> {
    check_index(a.n, k)?;
    Ok(sigma_unchecked(a, k))
}

/// `σ_k(A)` without range checking; `σ_0 = 1` and `σ_k = 0` for `k > n`.
pub(crate) fn sigma_unchecked(a: &SymMatrix, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > a.n {
        return 0.0;
    }
    let mut idx = [0usize; MAX_DIM];
    let mut acc = 0.0;
    for mask in 1u32..(1 << a.n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let m = subset(mask, a.n, &mut idx);
        acc += minor_det(&a.a, &idx[..m], &idx[..m]);
    }
    acc
}

/// `σ_k^{ij}(A) = ∂σ_k(A)/∂A_ij`, as sums of principal-submatrix cofactors.
pub fn sigma_grad(a: &SymMatrix, k: usize) -> Result<SymMatrix> {
    check_index(a.n, k)?;
    Ok(sigma_grad_unchecked(a, k))
}

pub(crate) fn sigma_grad_unchecked(a: &SymMatrix, k: usize) -> SymMatrix {
    let n = a.n;
    let mut g = SymMatrix::zeros(n);
    if k == 0 || k > n {
        return g;
    }
    let mut idx = [0usize; MAX_DIM];
    let mut rows = [0usize; MAX_DIM];
    let mut cols = [0usize; MAX_DIM];
    for mask in 1u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let m = subset(mask, n, &mut idx);
        for pa in 0..m {
            for pb in pa..m {
                fill_except(&idx[..m], &[pa], &mut rows);
                fill_except(&idx[..m], &[pb], &mut cols);
                let sign = if (pa + pb) % 2 == 0 { 1.0 } else { -1.0 };
                let c = sign * minor_det(&a.a, &rows[..m - 1], &cols[..m - 1]);
                let (i, j) = (idx[pa], idx[pb]);
                g.a[i * MAX_DIM + j] += c;
                if i != j {
                    g.a[j * MAX_DIM + i] += c;
                }
            }
        }
    }
    g
}

/// Copies `members` into `out`, skipping the listed local positions
/// (`skip` sorted ascending).
fn fill_except(members: &[usize], skip: &[usize], out: &mut [usize; MAX_DIM]) {
    let mut w = 0;
    for (pos, &v) in members.iter().enumerate() {
        if !skip.contains(&pos) {
            out[w] = v;
            w += 1;
        }
    }
}

/// Second derivatives `σ_k^{ij,pq}` of `σ_k` at a symmetric matrix.
///
/// Entries are the second derivative along symmetric directions, averaged
/// over the transpositions `(i,j)↔(j,i)` and `(p,q)↔(q,p)`, so the stored
/// array has all three pair symmetries. For symmetric `S`, `T` the bilinear
/// form `Σ H[ij,pq] S_ij T_pq` is the exact second directional derivative.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaHessian {
    n: usize,
    data: Vec<f64>,
}

impl SigmaHessian {
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, p: usize, q: usize) -> f64 {
        let n = self.n;
        self.data[((i * n + j) * n + p) * n + q]
    }

    /// `Σ H[ij,pq] S_ij T_pq`.
    pub fn bilinear(&self, s: &SymMatrix, t: &SymMatrix) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let sij = s.get(i, j);
                if sij == 0.0 {
                    continue;
                }
                for p in 0..n {
                    for q in 0..n {
                        acc += self.get(i, j, p, q) * sij * t.get(p, q);
                    }
                }
            }
        }
        acc
    }
}

/// `σ_k^{ij,pq}(A)`; identically zero for `k = 1`.
pub fn sigma_hess(a: &SymMatrix, k: usize) -> Result<SigmaHessian> {
    check_index(a.n, k)?;
    let n = a.n;
    let mut raw = vec![0.0; n * n * n * n];
    let at = |i: usize, j: usize, p: usize, q: usize| ((i * n + j) * n + p) * n + q;
    if k >= 2 {
        let mut idx = [0usize; MAX_DIM];
        let mut rows = [0usize; MAX_DIM];
        let mut cols = [0usize; MAX_DIM];
        for mask in 1u32..(1 << n) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let m = subset(mask, n, &mut idx);
            for pi in 0..m {
                for pp in 0..m {
                    if pi == pp {
                        continue;
                    }
                    let mut rs = [pi, pp];
                    rs.sort_unstable();
                    fill_except(&idx[..m], &rs, &mut rows);
                    for pj in 0..m {
                        for pq in 0..m {
                            if pj == pq {
                                continue;
                            }
                            let mut cs = [pj, pq];
                            cs.sort_unstable();
                            fill_except(&idx[..m], &cs, &mut cols);
                            let parity = if (pi + pj + pp + pq) % 2 == 0 { 1.0 } else { -1.0 };
                            let ord = sgn(pi, pp) * sgn(pj, pq);
                            let d = minor_det(&a.a, &rows[..m - 2], &cols[..m - 2]);
                            raw[at(idx[pi], idx[pj], idx[pp], idx[pq])] += parity * ord * d;
                        }
                    }
                }
            }
        }
    }
    let mut data = vec![0.0; raw.len()];
    for i in 0..n {
        for j in 0..n {
            for p in 0..n {
                for q in 0..n {
                    data[at(i, j, p, q)] = 0.25
                        * (raw[at(i, j, p, q)]
                            + raw[at(j, i, p, q)]
                            + raw[at(i, j, q, p)]
                            + raw[at(j, i, q, p)]);
                }
            }
        }
    }
    Ok(SigmaHessian { n, data })
}

fn sgn(a: usize, b: usize) -> f64 {
    if a < b {
        1.0
    } else {
        -1.0
    }
}

/// Both sides of the two rank-one identities
///
/// ```text
/// σ_k^{ij}(A − X⊗X) X_i X_j = σ_k^{ij}(A) X_i X_j
/// σ_k(A − X⊗X)              = σ_k(A) − σ_k^{ij}(A) X_i X_j
/// ```
///
/// returned as `(lhs1, rhs1, lhs2, rhs2)`.
pub fn rank_one_identities(a: &SymMatrix, x: &[f64], k: usize) -> Result<(f64, f64, f64, f64)> {
    check_index(a.n, k)?;
    if x.len() != a.n {
        return Err(Error::Input(format!(
            "vector length {} does not match matrix dimension {}",
            x.len(),
            a.n
        )));
    }
    let shifted = *a - SymMatrix::outer(x);
    let grad_a = sigma_grad_unchecked(a, k);
    let grad_shifted = sigma_grad_unchecked(&shifted, k);
    let lhs1 = grad_shifted.quad(x);
    let rhs1 = grad_a.quad(x);
    let lhs2 = sigma_unchecked(&shifted, k);
    let rhs2 = sigma_unchecked(a, k) - rhs1;
    Ok((lhs1, rhs1, lhs2, rhs2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(v: &[f64]) -> EigenSpectrum {
        EigenSpectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn spectrum_examples() {
        assert_eq!(sigma_of_spectrum(&spec(&[1.0, 2.0, 3.0]), 2).unwrap(), 11.0);
        assert_eq!(sigma_of_spectrum(&spec(&[1.0; 4]), 2).unwrap(), 6.0);
        assert!(sigma_of_spectrum(&spec(&[1.0; 3]), 0).is_err());
        assert!(sigma_of_spectrum(&spec(&[1.0; 3]), 4).is_err());
    }

    #[test]
    fn matrix_examples() {
        assert_eq!(sigma_of_matrix(&SymMatrix::identity(3), 2).unwrap(), 3.0);
        assert_eq!(
            sigma_of_matrix(&SymMatrix::diag(&[1.0, 2.0, 3.0]), 3).unwrap(),
            6.0
        );
        let g = sigma_grad(&SymMatrix::identity(3), 2).unwrap();
        assert_eq!(g, SymMatrix::scaled_identity(3, 2.0));
        let g = sigma_grad(&SymMatrix::diag(&[1.0, 2.0, 3.0]), 2).unwrap();
        assert_eq!(g, SymMatrix::diag(&[5.0, 4.0, 3.0]));
    }

    #[test]
    fn asymmetric_rows_rejected() {
        let err = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0 + 1e-10, 1.0]]);
        assert!(matches!(err, Err(Error::Input(_))));
        assert!(SymMatrix::from_rows(&[vec![1.0, f64::NAN], vec![f64::NAN, 1.0]]).is_err());
    }

    #[test]
    fn hessian_examples() {
        let a = SymMatrix::from_rows(&[
            vec![1.0, 0.3, -0.2],
            vec![0.3, 2.0, 0.5],
            vec![-0.2, 0.5, -1.0],
        ])
        .unwrap();
        let h = sigma_hess(&a, 1).unwrap();
        assert!((0..81).all(|i| h.data[i] == 0.0));

        let h = sigma_hess(&SymMatrix::identity(3), 2).unwrap();
        assert_eq!(h.get(0, 0, 1, 1), 1.0);
        assert_eq!(h.get(0, 0, 0, 0), 0.0);
    }

    #[test]
    fn cone_examples() {
        assert!(in_gamma_k(&spec(&[1.0, 1.0, 1.0]), 3, 0.0).unwrap());
        assert!(!in_gamma_k(&spec(&[3.0, 1.0, -1.0]), 2, 0.0).unwrap());
        assert!(!in_gamma_k(&spec(&[1.0, 1.0, 0.0]), 3, 0.0).unwrap());
    }

    #[test]
    fn rank_one_examples() {
        let (l1, r1, l2, r2) =
            rank_one_identities(&SymMatrix::identity(3), &[1.0, 0.0, 0.0], 2).unwrap();
        assert_eq!((l1, r1), (2.0, 2.0));
        assert_eq!((l2, r2), (1.0, 1.0));
        let (l1, r1, l2, r2) =
            rank_one_identities(&SymMatrix::diag(&[1.0, 2.0, 3.0]), &[0.0; 3], 2).unwrap();
        assert_eq!((l1, r1), (0.0, 0.0));
        assert_eq!(l2, r2);
    }

    #[test]
    fn large_minor_uses_lu() {
        // det of a 5×5 with known value: tridiagonal (2, -1) has det n+1.
        let a = SymMatrix::from_fn(5, |i, j| {
            if i == j {
                2.0
            } else if j == i + 1 {
                -1.0
            } else {
                0.0
            }
        });
        assert!((sigma_of_matrix(&a, 5).unwrap() - 6.0).abs() < 1e-12);
        assert!(a.is_positive_definite());
        assert!(!SymMatrix::diag(&[1.0, -1.0]).is_positive_definite());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(8, 4), 70.0);
        assert_eq!(binomial(3, 0), 1.0);
        assert_eq!(binomial(3, 4), 0.0);
    }
}
