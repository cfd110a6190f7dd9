//! Subspaces of S^n, the symmetric vectorization isometry and orthonormal
//! completions.

use nalgebra::DMatrix;

use super::{OrthogonalMatrix, SymMatrix};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Dimension of S^n as a vector space.
pub fn svec_dim(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Isometric vectorization: upper triangle row by row, off-diagonals scaled
/// by sqrt(2) so that `<a, b> = svec(a) . svec(b)`.
pub fn svec(x: &SymMatrix) -> Vec<f64> {
    let n = x.dim();
    let mut out = Vec::with_capacity(svec_dim(n));
    for i in 0..n {
        for j in i..n {
            let v = x.get(i, j);
            out.push(if i == j { v } else { SQRT2 * v });
        }
    }
    out
}

/// Inverse of [`svec`].
pub fn smat(n: usize, v: &[f64]) -> SymMatrix {
    assert_eq!(v.len(), svec_dim(n), "svec length mismatch");
    let mut x = SymMatrix::zeros(n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            let val = if i == j { v[k] } else { v[k] / SQRT2 };
            x.set_sym(i, j, val);
            k += 1;
        }
    }
    x
}

/// Completes `k` orthonormal columns of length `dim` to a full orthonormal
/// basis via Householder QR. The first `k` output columns span the input.
pub fn complete_orthobasis(cols: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let k = cols.len();
    assert!(k <= dim, "more columns than the ambient dimension");
    if k == 0 && dim == 0 {
        return vec![];
    }
    let mut a = DMatrix::zeros(dim, dim);
    for (j, c) in cols.iter().enumerate() {
        assert_eq!(c.len(), dim, "column length mismatch");
        for i in 0..dim {
            a[(i, j)] = c[i];
        }
    }
    // Zero trailing columns make the Householder sweep produce an arbitrary
    // orthonormal completion after the range of the leading block.
    let q = a.qr().q();
    (0..dim)
        .map(|j| (0..dim).map(|i| q[(i, j)]).collect())
        .collect()
}

/// A linear subspace of S^n held as an orthonormal basis (in the trace inner
/// product). Built from arbitrary generators by SVD rank filtering.
#[derive(Debug, Clone)]
pub struct MatrixSubspace {
    n: usize,
    basis: Vec<SymMatrix>,
}

impl MatrixSubspace {
    /// Orthonormalizes the span of `gens`. Singular values at or below
    /// `tol_sub * max(1, sigma_1)` are treated as zero.
    pub fn from_generators(n: usize, gens: &[SymMatrix], tol_sub: f64) -> Self {
        let d = svec_dim(n);
        if gens.is_empty() || d == 0 {
            return MatrixSubspace { n, basis: vec![] };
        }
        let mut m = DMatrix::zeros(d, gens.len());
        for (j, g) in gens.iter().enumerate() {
            assert_eq!(g.dim(), n, "generator dimension mismatch");
            for (i, v) in svec(g).into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        let svd = m.svd(true, false);
        let u = svd.u.as_ref().expect("svd requested u");
        let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
        let cut = tol_sub * smax.max(1.0);
        let mut basis = Vec::new();
        for (j, &sv) in svd.singular_values.iter().enumerate() {
            if sv > cut {
                let col: Vec<f64> = (0..d).map(|i| u[(i, j)]).collect();
                basis.push(smat(n, &col));
            }
        }
        MatrixSubspace { n, basis }
    }

    pub fn empty(n: usize) -> Self {
        MatrixSubspace { n, basis: vec![] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[SymMatrix] {
        &self.basis
    }

    /// Coordinates of the orthogonal projection of `x` onto the subspace.
    pub fn coordinates(&self, x: &SymMatrix) -> Vec<f64> {
        self.basis
            .iter()
            .map(|b| super::trace_inner(b, x))
            .collect()
    }

    pub fn combine(&self, coords: &[f64]) -> SymMatrix {
        assert_eq!(coords.len(), self.basis.len());
        let mut out = SymMatrix::zeros(self.n);
        for (b, &c) in self.basis.iter().zip(coords) {
            out.axpy(c, b);
        }
        out
    }

    pub fn project(&self, x: &SymMatrix) -> SymMatrix {
        self.combine(&self.coordinates(x))
    }

    /// Frobenius norm of `x - project(x)`.
    pub fn residual_norm(&self, x: &SymMatrix) -> f64 {
        self.project(x).sub(x).frob_norm()
    }

    pub fn contains(&self, x: &SymMatrix, tol: f64) -> bool {
        self.residual_norm(x) <= tol * (1.0 + x.frob_norm())
    }

    /// Orthonormal basis of the orthogonal complement within S^n.
    pub fn complement(&self) -> MatrixSubspace {
        let d = svec_dim(self.n);
        let cols: Vec<Vec<f64>> = self.basis.iter().map(svec).collect();
        let full = complete_orthobasis(&cols, d);
        let basis = full[self.basis.len()..]
            .iter()
            .map(|c| smat(self.n, c))
            .collect();
        MatrixSubspace { n: self.n, basis }
    }

    /// Rotates the whole subspace: span { p^T B p }.
    pub fn rotate(&self, p: &OrthogonalMatrix) -> MatrixSubspace {
        MatrixSubspace {
            n: self.n,
            basis: self.basis.iter().map(|b| super::rotate(b, p)).collect(),
        }
    }
}

/// Least-squares coefficients expressing `x` as a combination of `gens`;
/// `None` if the residual exceeds `tol * (1 + |x|)`.
pub fn lstsq_express(x: &SymMatrix, gens: &[SymMatrix], tol: f64) -> Option<Vec<f64>> {
    if gens.is_empty() {
        return if x.frob_norm() <= tol * (1.0 + x.frob_norm()) {
            Some(vec![])
        } else {
            None
        };
    }
    let n = x.dim();
    let d = svec_dim(n);
    let mut m = DMatrix::zeros(d, gens.len());
    for (j, g) in gens.iter().enumerate() {
        for (i, v) in svec(g).into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    let rhs = nalgebra::DVector::from_vec(svec(x));
    let svd = m.clone().svd(true, true);
    let sol = svd.solve(&rhs, 1e-13).ok()?;
    let resid = (&m * &sol - &rhs).norm();
    if resid <= tol * (1.0 + rhs.norm()) {
        Some(sol.iter().cloned().collect())
    } else {
        None
    }
}
