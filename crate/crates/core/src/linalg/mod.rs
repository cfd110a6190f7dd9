//! Dense symmetric-matrix kernel.
//!
//! Everything downstream speaks [`SymMatrix`]: inner products,
//! eigendecompositions, PSD tests with tolerance, principal-submatrix
//! projections, congruence rotations and orthogonal completions. Storage is
//! dense; facial reduction destroys sparsity anyway and all target problems
//! are desk scale.
//!
//! A zero-dimensional matrix is a first-class value: truncating a problem by
//! its full dimension must produce a working "S^0" object whose inner product
//! with anything is 0.

mod basis;

pub use basis::{complete_orthobasis, lstsq_express, smat, svec, svec_dim, MatrixSubspace};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::ToleranceConfig;

/// Errors from the dense kernel.
#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("eigendecomposition failed to converge for a {n}x{n} matrix")]
    EigFailed { n: usize },
    #[error("kernel completion: stated rank {stated} != numeric rank {computed}")]
    RankMismatch { stated: usize, computed: usize },
    #[error("matrix of dimension {n} is not orthogonal (max deviation {dev:.3e})")]
    NotOrthogonal { n: usize, dev: f64 },
}

/// Dense real symmetric matrix. Symmetry is enforced by construction: every
/// constructor either writes both triangles from one value or symmetrizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// The zero matrix in S^n. `n = 0` gives the distinguished S^0 value.
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// The S^0 element.
    pub fn dim0() -> Self {
        SymMatrix::zeros(0)
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = SymMatrix::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = v;
        }
        m
    }

    /// Builds from `f(i, j)`; only `i <= j` is consulted and mirrored.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        m
    }

    /// Builds from a row-major dense buffer, averaging the two triangles.
    pub fn from_rows_symmetrize(n: usize, rows: &[f64]) -> Self {
        assert_eq!(rows.len(), n * n, "buffer length must be n^2");
        SymMatrix::from_fn(n, |i, j| 0.5 * (rows[i * n + j] + rows[j * n + i]))
    }

    pub(crate) fn from_na_symmetrize(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        SymMatrix::from_fn(m.nrows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    pub(crate) fn to_na(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.data[i * self.n + j])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Writes both `(i, j)` and `(j, i)`.
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    /// Row-major copy of the entries.
    pub fn entries_row_major(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    pub fn scale(&self, t: f64) -> SymMatrix {
        SymMatrix {
            n: self.n,
            data: self.data.iter().map(|v| v * t).collect(),
        }
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch in add");
        SymMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch in sub");
        SymMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// `self += t * other`.
    pub fn axpy(&mut self, t: f64, other: &SymMatrix) {
        assert_eq!(self.n, other.n, "dimension mismatch in axpy");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += t * b;
        }
    }

    pub fn is_zero_dim(&self) -> bool {
        self.n == 0
    }
}

/// trace inner product `<a, b> = tr(ab)` on S^n.
///
/// Panics on dimension mismatch. The S^0 value pairs to 0 with itself.
pub fn trace_inner(a: &SymMatrix, b: &SymMatrix) -> f64 {
    assert_eq!(a.n, b.n, "dimension mismatch in trace_inner");
    a.data.iter().zip(&b.data).map(|(x, y)| x * y).sum()
}

/// Upper-left `r x r` principal submatrix. `r = 0` yields the S^0 value.
pub fn pi_upper(x: &SymMatrix, r: usize) -> SymMatrix {
    assert!(r <= x.n, "pi_upper: r out of range");
    SymMatrix::from_fn(r, |i, j| x.get(i, j))
}

/// Lower-right `(n-r) x (n-r)` principal submatrix. `r = n` yields S^0.
pub fn pi_lower(x: &SymMatrix, r: usize) -> SymMatrix {
    assert!(r <= x.n, "pi_lower: r out of range");
    SymMatrix::from_fn(x.n - r, |i, j| x.get(r + i, r + j))
}

/// Congruence rotation `q^T x q`, re-symmetrized to kill roundoff asymmetry.
pub fn rotate(x: &SymMatrix, q: &OrthogonalMatrix) -> SymMatrix {
    assert_eq!(x.n, q.n, "dimension mismatch in rotate");
    let m = q.to_na().transpose() * x.to_na() * q.to_na();
    SymMatrix::from_na_symmetrize(&m)
}

/// Places an `r x r` matrix as the leading block of an `n x n` zero matrix.
pub fn embed_upper(block: &SymMatrix, n: usize) -> SymMatrix {
    assert!(block.n <= n, "embed_upper: block too large");
    SymMatrix::from_fn(n, |i, j| {
        if i < block.n && j < block.n {
            block.get(i, j)
        } else {
            0.0
        }
    })
}

/// Direct sum `diag(a, b)`.
pub fn block_diag(a: &SymMatrix, b: &SymMatrix) -> SymMatrix {
    let n = a.n + b.n;
    SymMatrix::from_fn(n, |i, j| {
        if i < a.n && j < a.n {
            a.get(i, j)
        } else if i >= a.n && j >= a.n {
            b.get(i - a.n, j - a.n)
        } else {
            0.0
        }
    })
}

/// Orthogonal matrix with verified columns: `q^T q` must sit within 1e-12 of
/// the identity entrywise at construction time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalMatrix {
    n: usize,
    data: Vec<f64>,
}

pub const ORTHOGONALITY_TOL: f64 = 1e-12;

impl OrthogonalMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        OrthogonalMatrix { n, data }
    }

    /// Checks orthogonality before accepting the columns.
    pub fn new_checked(n: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        assert_eq!(data.len(), n * n, "buffer length must be n^2");
        let q = OrthogonalMatrix { n, data };
        let dev = q.orthogonality_defect();
        if dev > ORTHOGONALITY_TOL {
            return Err(LinalgError::NotOrthogonal { n, dev });
        }
        Ok(q)
    }

    pub(crate) fn from_na_checked(m: &DMatrix<f64>) -> Result<Self, LinalgError> {
        assert_eq!(m.nrows(), m.ncols());
        let n = m.nrows();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = m[(i, j)];
            }
        }
        OrthogonalMatrix::new_checked(n, data)
    }

    /// Max entrywise deviation of `q^T q` from the identity.
    pub fn orthogonality_defect(&self) -> f64 {
        let mut dev = 0.0_f64;
        for i in 0..self.n {
            for j in 0..self.n {
                let mut dot = 0.0;
                for k in 0..self.n {
                    dot += self.data[k * self.n + i] * self.data[k * self.n + j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((dot - target).abs());
            }
        }
        dev
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn transpose(&self) -> OrthogonalMatrix {
        let mut data = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                data[j * self.n + i] = self.data[i * self.n + j];
            }
        }
        OrthogonalMatrix { n: self.n, data }
    }

    /// Product of two orthogonal matrices (re-checked).
    pub fn compose(&self, other: &OrthogonalMatrix) -> OrthogonalMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch in compose");
        let m = self.to_na() * other.to_na();
        OrthogonalMatrix::from_na_checked(&m)
            .expect("product of orthogonal matrices drifted; inputs were checked")
    }

    /// Extends `self` by the identity: `diag(self, I_k)`.
    pub fn extend_identity(&self, k: usize) -> OrthogonalMatrix {
        let n = self.n + k;
        let mut data = vec![0.0; n * n];
        for i in 0..self.n {
            for j in 0..self.n {
                data[i * n + j] = self.data[i * self.n + j];
            }
        }
        for i in self.n..n {
            data[i * n + i] = 1.0;
        }
        OrthogonalMatrix { n, data }
    }

    /// `diag(I_k, self)`.
    pub fn prepend_identity(&self, k: usize) -> OrthogonalMatrix {
        let n = self.n + k;
        let mut data = vec![0.0; n * n];
        for i in 0..k {
            data[i * n + i] = 1.0;
        }
        for i in 0..self.n {
            for j in 0..self.n {
                data[(k + i) * n + (k + j)] = self.data[i * self.n + j];
            }
        }
        OrthogonalMatrix { n, data }
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.data[i * self.n + j]).collect()
    }

    pub(crate) fn to_na(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.data[i * self.n + j])
    }

    /// Reorders columns by the given permutation (checked to stay orthogonal).
    pub fn permute_columns(&self, perm: &[usize]) -> OrthogonalMatrix {
        assert_eq!(perm.len(), self.n);
        let mut data = vec![0.0; self.n * self.n];
        for (new_j, &old_j) in perm.iter().enumerate() {
            for i in 0..self.n {
                data[i * self.n + new_j] = self.data[i * self.n + old_j];
            }
        }
        OrthogonalMatrix { n: self.n, data }
    }
}

/// Symmetric eigendecomposition `x = q diag(lam) q^T`, eigenvalues descending.
pub fn eig_sym(x: &SymMatrix) -> Result<(Vec<f64>, OrthogonalMatrix), LinalgError> {
    let n = x.n;
    if n == 0 {
        return Ok((vec![], OrthogonalMatrix::identity(0)));
    }
    let se = nalgebra::SymmetricEigen::new(x.to_na());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        se.eigenvalues[b]
            .partial_cmp(&se.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let lam: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    if lam.iter().any(|v| !v.is_finite()) {
        return Err(LinalgError::EigFailed { n });
    }
    let mut vecs = DMatrix::zeros(n, n);
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..n {
            vecs[(i, new_j)] = se.eigenvectors[(i, old_j)];
        }
    }
    let q = match OrthogonalMatrix::from_na_checked(&vecs) {
        Ok(q) => q,
        Err(_) => {
            // Polish drifted eigenvectors with a QR pass.
            let qr = vecs.clone().qr();
            OrthogonalMatrix::from_na_checked(&qr.q()).map_err(|_| LinalgError::EigFailed { n })?
        }
    };
    Ok((lam, q))
}

/// Smallest eigenvalue; `+inf` for the S^0 value (vacuously PSD).
pub fn min_eig(x: &SymMatrix) -> f64 {
    if x.n == 0 {
        return f64::INFINITY;
    }
    let (lam, _) = eig_sym(x).expect("eig failed in min_eig");
    *lam.last().unwrap()
}

/// Number of eigenvalues above the rank threshold
/// `tol.abs + tol.rel * max(|lam_1|, |lam_n|)`.
pub fn numeric_rank(x: &SymMatrix, tol: &ToleranceConfig) -> usize {
    if x.n == 0 {
        return 0;
    }
    let (lam, _) = eig_sym(x).expect("eig failed in numeric_rank");
    let lam_max = lam[0].abs().max(lam[lam.len() - 1].abs());
    let tau = tol.rank_threshold(lam_max);
    lam.iter().filter(|&&v| v > tau).count()
}

/// Frobenius distance from `x` to the PSD cone: norm of the negative
/// eigenvalue part.
pub fn dist_to_psd(x: &SymMatrix) -> f64 {
    if x.n == 0 {
        return 0.0;
    }
    let (lam, _) = eig_sym(x).expect("eig failed in dist_to_psd");
    lam.iter().map(|&v| v.min(0.0).powi(2)).sum::<f64>().sqrt()
}

/// PSD test against the rank threshold: true iff `min eig >= -tau_rank`.
pub fn is_psd(x: &SymMatrix, tol: &ToleranceConfig) -> bool {
    if x.n == 0 {
        return true;
    }
    let (lam, _) = eig_sym(x).expect("eig failed in is_psd");
    let lam_max = lam[0].abs().max(lam[lam.len() - 1].abs());
    *lam.last().unwrap() >= -tol.rank_threshold(lam_max)
}

/// Orthogonal `u` whose first `r` columns span the range of the PSD matrix
/// `x` and whose last `n - r` columns span its numeric kernel, so that
/// `pi_upper(u^T x u, r)` is positive definite and `pi_lower(u^T x u, r)`
/// vanishes.
pub fn kernel_completion(
    x: &SymMatrix,
    r: usize,
    tol: &ToleranceConfig,
) -> Result<OrthogonalMatrix, LinalgError> {
    let computed = numeric_rank(x, tol);
    if computed != r {
        return Err(LinalgError::RankMismatch {
            stated: r,
            computed,
        });
    }
    // Eigenvectors come back ordered by descending eigenvalue, which is
    // exactly range-first for a PSD matrix.
    let (_, q) = eig_sym(x)?;
    Ok(q)
}

/// Lower-triangular Cholesky factor, or `None` if not numerically PD.
pub fn cholesky(x: &SymMatrix) -> Option<DMatrix<f64>> {
    if x.n == 0 {
        return Some(DMatrix::zeros(0, 0));
    }
    nalgebra::Cholesky::new(x.to_na()).map(|c| c.l())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn trace_inner_identity_is_dimension() {
        let i3 = SymMatrix::identity(3);
        assert_eq!(trace_inner(&i3, &i3), 3.0);
    }

    #[test]
    fn trace_inner_zero() {
        let z = SymMatrix::zeros(4);
        let x = SymMatrix::from_fn(4, |i, j| (i + j) as f64);
        assert_eq!(trace_inner(&z, &x), 0.0);
    }

    #[test]
    fn trace_inner_orthogonal_directions() {
        // d1 = diag(1,0,0); d2 has ones at (1,3),(3,1),(2,2). Orthogonal pair.
        let d1 = SymMatrix::from_diag(&[1.0, 0.0, 0.0]);
        let mut d2 = SymMatrix::zeros(3);
        d2.set_sym(0, 2, 1.0);
        d2.set_sym(1, 1, 1.0);
        assert_eq!(trace_inner(&d1, &d2), 0.0);
    }

    #[test]
    fn pi_upper_zero_gives_dim0() {
        let x = SymMatrix::identity(3);
        let p = pi_upper(&x, 0);
        assert!(p.is_zero_dim());
        assert_eq!(trace_inner(&p, &SymMatrix::dim0()), 0.0);
    }

    #[test]
    fn pi_upper_full_is_identity_map() {
        let x = SymMatrix::from_fn(3, |i, j| (i * 3 + j) as f64);
        assert_eq!(pi_upper(&x, 3), x);
    }

    #[test]
    fn pi_upper_one() {
        let mut x = SymMatrix::zeros(3);
        x.set_sym(0, 0, 7.0);
        let p = pi_upper(&x, 1);
        assert_eq!(p.dim(), 1);
        assert_eq!(p.get(0, 0), 7.0);
    }

    #[test]
    fn pi_lower_cases() {
        let x = SymMatrix::from_diag(&[1.0, 2.0, 3.0]);
        assert_eq!(pi_lower(&x, 0), x);
        assert_eq!(pi_lower(&x, 1), SymMatrix::from_diag(&[2.0, 3.0]));
        assert!(pi_lower(&x, 3).is_zero_dim());
    }

    #[test]
    fn rotate_by_identity() {
        let x = SymMatrix::from_fn(3, |i, j| ((i + 1) * (j + 2)) as f64);
        let q = OrthogonalMatrix::identity(3);
        let r = rotate(&x, &q);
        for i in 0..3 {
            for j in 0..3 {
                assert!((r.get(i, j) - x.get(i, j)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn rotate_round_trip() {
        let x = SymMatrix::from_fn(4, |i, j| ((i * j) as f64).sin());
        let (_, q) = eig_sym(&SymMatrix::from_fn(4, |i, j| ((i + j) as f64).cos())).unwrap();
        let back = rotate(&rotate(&x, &q), &q.transpose());
        for i in 0..4 {
            for j in 0..4 {
                assert!((back.get(i, j) - x.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rotate_swap_permutation() {
        let x = SymMatrix::from_diag(&[0.0, 1.0]);
        let q = OrthogonalMatrix::new_checked(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let r = rotate(&x, &q);
        assert_eq!(r, SymMatrix::from_diag(&[1.0, 0.0]));
    }

    #[test]
    fn eig_diag() {
        let (lam, _) = eig_sym(&SymMatrix::from_diag(&[3.0, 1.0])).unwrap();
        assert!((lam[0] - 3.0).abs() < 1e-12 && (lam[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_antidiag() {
        let mut x = SymMatrix::zeros(2);
        x.set_sym(0, 1, 1.0);
        let (lam, q) = eig_sym(&x).unwrap();
        assert!((lam[0] - 1.0).abs() < 1e-12 && (lam[1] + 1.0).abs() < 1e-12);
        // Reconstruction check.
        let recon = rotate(&SymMatrix::from_diag(&lam), &q.transpose());
        for i in 0..2 {
            for j in 0..2 {
                assert!((recon.get(i, j) - x.get(i, j)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn eig_rank_one() {
        let x = SymMatrix::from_fn(2, |_, _| 1.0);
        let (lam, _) = eig_sym(&x).unwrap();
        assert!((lam[0] - 2.0).abs() < 1e-12 && lam[1].abs() < 1e-12);
    }

    #[test]
    fn dist_to_psd_analytic() {
        assert!((dist_to_psd(&SymMatrix::from_diag(&[1.0, -2.0])) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dist_to_psd_on_psd_is_zero() {
        let x = SymMatrix::from_diag(&[0.5, 2.0, 0.0]);
        assert_eq!(dist_to_psd(&x), 0.0);
    }

    #[test]
    fn numeric_rank_threshold_formula() {
        // tau = abs + rel * 1 = 2e-9 > 1e-14, so the tiny eigenvalue drops.
        let x = SymMatrix::from_diag(&[1.0, 1e-14]);
        assert_eq!(numeric_rank(&x, &tol()), 1);
    }

    #[test]
    fn kernel_completion_swap() {
        let x = SymMatrix::from_diag(&[0.0, 5.0]);
        let u = kernel_completion(&x, 1, &tol()).unwrap();
        let rot = rotate(&x, &u);
        assert!((pi_upper(&rot, 1).get(0, 0) - 5.0).abs() < 1e-12);
        assert!(pi_lower(&rot, 1).max_abs() < 1e-10);
    }

    #[test]
    fn kernel_completion_identity_input() {
        let u = kernel_completion(&SymMatrix::identity(3), 3, &tol()).unwrap();
        assert!(u.orthogonality_defect() < 1e-12);
        let rot = rotate(&SymMatrix::identity(3), &u);
        assert!(min_eig(&pi_upper(&rot, 3)) > 0.99);
    }

    #[test]
    fn kernel_completion_rank_mismatch_rejected() {
        let x = SymMatrix::from_diag(&[0.0, 5.0]);
        assert!(kernel_completion(&x, 2, &tol()).is_err());
    }

    #[test]
    fn kernel_completion_rank_one_outer_product() {
        let v = [0.6, 0.0, 0.8];
        let x = SymMatrix::from_fn(3, |i, j| v[i] * v[j]);
        let u = kernel_completion(&x, 1, &tol()).unwrap();
        let rot = rotate(&x, &u);
        assert!((pi_upper(&rot, 1).get(0, 0) - 1.0).abs() < 1e-10);
        assert!(pi_lower(&rot, 1).max_abs() < 1e-10);
        // first column is +-v
        let c = u.column(0);
        let dot: f64 = c.iter().zip(&v).map(|(a, b)| a * b).sum();
        assert!((dot.abs() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn block_diag_and_embed() {
        let a = SymMatrix::from_diag(&[1.0, 2.0]);
        let b = SymMatrix::from_diag(&[3.0]);
        let d = block_diag(&a, &b);
        assert_eq!(d.get(2, 2), 3.0);
        let e = embed_upper(&a, 3);
        assert_eq!(e.get(1, 1), 2.0);
        assert_eq!(e.get(2, 2), 0.0);
    }

    #[test]
    fn orthogonality_check_rejects_skew() {
        let r = OrthogonalMatrix::new_checked(2, vec![1.0, 0.1, 0.0, 1.0]);
        assert!(r.is_err());
    }

    #[test]
    fn s0_behaves() {
        let z = SymMatrix::dim0();
        assert_eq!(trace_inner(&z, &z), 0.0);
        assert_eq!(numeric_rank(&z, &tol()), 0);
        assert_eq!(dist_to_psd(&z), 0.0);
        assert!(is_psd(&z, &tol()));
    }
}
