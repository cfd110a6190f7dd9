//! Primal-dual path-following interior point core.
//!
//! Solves
//!
//! ```text
//! min  <c_cone, u> + c_free . v      max  <b, y>
//! s.t. <A_i, u> + F_i . v = b_i      s.t. s = c_cone - sum_i A_i y_i  PSD blocks
//!      u in S^{d_1}_+ x ... x S^{d_k}_+,  v free  c_free - F^T y = 0
//! ```
//!
//! with Nesterov-Todd scaling and a Mehrotra predictor-corrector, from an
//! infeasible interior start. Free variables ride along in the KKT saddle
//! system with no barrier term. Both sides are assumed strongly feasible;
//! every call site in this crate cites the statement that guarantees it.

// Index loops over parallel per-block arrays read better than zipped
// iterator chains in the scaling algebra below.
#![allow(clippy::needless_range_loop)]

use nalgebra::DMatrix;

use crate::config::ToleranceConfig;
use crate::linalg::{self, SymMatrix};
use crate::model::{Result, SdpError};

/// One Newton direction: unscaled primal/dual pieces plus the scaled
/// forms the step-length computation needs.
struct Direction {
    dx: BlockSym,
    dv: Vec<f64>,
    dy: Vec<f64>,
    ds: BlockSym,
    dx_tilde: Vec<DMatrix<f64>>,
    ds_tilde: Vec<DMatrix<f64>>,
}

/// Element of a product of symmetric-matrix spaces.
#[derive(Debug, Clone)]
pub struct BlockSym {
    pub blocks: Vec<SymMatrix>,
}

impl BlockSym {
    pub fn zeros(dims: &[usize]) -> Self {
        BlockSym {
            blocks: dims.iter().map(|&d| SymMatrix::zeros(d)).collect(),
        }
    }

    pub fn identity_scaled(dims: &[usize], t: f64) -> Self {
        BlockSym {
            blocks: dims
                .iter()
                .map(|&d| SymMatrix::identity(d).scale(t))
                .collect(),
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.dim()).collect()
    }

    pub fn inner(&self, other: &BlockSym) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| linalg::trace_inner(a, b))
            .sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.frob_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn axpy(&mut self, t: f64, other: &BlockSym) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            a.axpy(t, b);
        }
    }

    pub fn sub(&self, other: &BlockSym) -> BlockSym {
        BlockSym {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn min_eig(&self) -> f64 {
        self.blocks
            .iter()
            .map(linalg::min_eig)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim()).sum()
    }
}

/// Conic problem with PSD blocks and an optional free variable block.
#[derive(Debug, Clone)]
pub struct CompositeProblem {
    pub dims: Vec<usize>,
    pub nfree: usize,
    pub a_cone: Vec<BlockSym>,
    /// `m x nfree` coefficients of the free variables.
    pub a_free: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c_cone: BlockSym,
    pub c_free: Vec<f64>,
}

impl CompositeProblem {
    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn nbar(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(SdpError::InvalidInput(
                "composite problem needs at least one nonempty cone block".into(),
            ));
        }
        let m = self.b.len();
        if self.a_cone.len() != m || self.a_free.len() != m {
            return Err(SdpError::DimensionMismatch(
                "constraint count mismatch".into(),
            ));
        }
        for row in &self.a_cone {
            if row.dims() != self.dims {
                return Err(SdpError::DimensionMismatch("cone block mismatch".into()));
            }
        }
        for row in &self.a_free {
            if row.len() != self.nfree {
                return Err(SdpError::DimensionMismatch("free block mismatch".into()));
            }
        }
        if self.c_cone.dims() != self.dims || self.c_free.len() != self.nfree {
            return Err(SdpError::DimensionMismatch(
                "objective block mismatch".into(),
            ));
        }
        Ok(())
    }

    fn data_scale(&self) -> f64 {
        let mut s: f64 = 1.0;
        s = s.max(self.c_cone.frob_norm());
        for v in &self.c_free {
            s = s.max(v.abs());
        }
        for a in &self.a_cone {
            s = s.max(a.frob_norm());
        }
        for r in &self.a_free {
            for v in r {
                s = s.max(v.abs());
            }
        }
        for v in &self.b {
            s = s.max(v.abs());
        }
        s
    }
}

/// Solution and convergence data for one interior point run.
#[derive(Debug, Clone)]
pub struct IpmOutcome {
    pub x: BlockSym,
    pub v: Vec<f64>,
    pub y: Vec<f64>,
    pub s: BlockSym,
    pub iterations: usize,
    pub primal_obj: f64,
    pub dual_obj: f64,
    /// `|primal_obj - dual_obj|`.
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

struct Preprocessed {
    prob: CompositeProblem,
    kept_rows: Vec<usize>,
    full_m: usize,
    kept_cols: Vec<usize>,
    full_nfree: usize,
}

/// Drops linearly dependent constraint rows (verifying right-hand-side
/// consistency) and free-variable columns that depend on the kept ones.
fn preprocess(p: &CompositeProblem, cfg: &ToleranceConfig) -> Result<Preprocessed> {
    let m = p.m();
    let scale = p.data_scale();
    // Row vectors: [svec of every cone block | free coefficients].
    let cone_len: usize = p.dims.iter().map(|&d| linalg::svec_dim(d)).sum();
    let row_vec = |i: usize| -> Vec<f64> {
        let mut v = Vec::with_capacity(cone_len + p.nfree);
        for blk in &p.a_cone[i].blocks {
            v.extend(linalg::svec(blk));
        }
        v.extend(p.a_free[i].iter().cloned());
        v
    };
    let rows: Vec<Vec<f64>> = (0..m).map(row_vec).collect();
    let kept_rows = independent_subset(&rows, 1e-12 * scale.max(1.0));
    // Dropped rows must be consistent combinations of the kept ones.
    if kept_rows.len() < m {
        let kept_set: std::collections::HashSet<usize> = kept_rows.iter().cloned().collect();
        for i in 0..m {
            if kept_set.contains(&i) {
                continue;
            }
            let coef = lstsq_rows(&rows, &kept_rows, &rows[i]);
            let b_pred: f64 = coef.iter().zip(&kept_rows).map(|(c, &k)| c * p.b[k]).sum();
            if (b_pred - p.b[i]).abs() > cfg.feas * 100.0 * (1.0 + scale) {
                return Err(SdpError::ContractViolation(format!(
                    "constraint {i} is inconsistent with the rest of the system"
                )));
            }
        }
    }
    // Free columns restricted to kept rows.
    let col_vecs: Vec<Vec<f64>> = (0..p.nfree)
        .map(|j| kept_rows.iter().map(|&i| p.a_free[i][j]).collect())
        .collect();
    let kept_cols = independent_subset(&col_vecs, 1e-12 * scale.max(1.0));
    if kept_cols.len() < p.nfree {
        let kept_set: std::collections::HashSet<usize> = kept_cols.iter().cloned().collect();
        for j in 0..p.nfree {
            if kept_set.contains(&j) {
                continue;
            }
            let coef = lstsq_rows(&col_vecs, &kept_cols, &col_vecs[j]);
            let c_pred: f64 = coef
                .iter()
                .zip(&kept_cols)
                .map(|(c, &k)| c * p.c_free[k])
                .sum();
            if (c_pred - p.c_free[j]).abs() > cfg.feas * 100.0 * (1.0 + scale) {
                return Err(SdpError::ContractViolation(format!(
                    "free variable {j} has an unbounded reduced cost direction"
                )));
            }
        }
    }
    let prob = CompositeProblem {
        dims: p.dims.clone(),
        nfree: kept_cols.len(),
        a_cone: kept_rows.iter().map(|&i| p.a_cone[i].clone()).collect(),
        a_free: kept_rows
            .iter()
            .map(|&i| kept_cols.iter().map(|&j| p.a_free[i][j]).collect())
            .collect(),
        b: kept_rows.iter().map(|&i| p.b[i]).collect(),
        c_cone: p.c_cone.clone(),
        c_free: kept_cols.iter().map(|&j| p.c_free[j]).collect(),
    };
    Ok(Preprocessed {
        prob,
        kept_rows,
        full_m: m,
        kept_cols,
        full_nfree: p.nfree,
    })
}

/// Indices of a maximal linearly independent subset of `vecs`, greedy in the
/// given order via modified Gram-Schmidt with re-orthogonalization.
fn independent_subset(vecs: &[Vec<f64>], tol: f64) -> Vec<usize> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut kept = Vec::new();
    for (i, v) in vecs.iter().enumerate() {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let dot: f64 = w.iter().zip(b).map(|(a, c)| a * c).sum();
                for (wk, bk) in w.iter_mut().zip(b) {
                    *wk -= dot * bk;
                }
            }
        }
        let norm: f64 = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        let orig: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > tol.max(1e-12 * orig).max(1e-300) && norm > 1e-10 * orig.max(1.0) {
            for wk in w.iter_mut() {
                *wk /= norm;
            }
            basis.push(w);
            kept.push(i);
        }
    }
    kept
}

/// Least-squares coefficients expressing `target` over `rows[kept]`.
fn lstsq_rows(rows: &[Vec<f64>], kept: &[usize], target: &[f64]) -> Vec<f64> {
    if kept.is_empty() {
        return vec![];
    }
    let dim = target.len();
    let mut m = DMatrix::zeros(dim, kept.len());
    for (j, &k) in kept.iter().enumerate() {
        for i in 0..dim {
            m[(i, j)] = rows[k][i];
        }
    }
    let rhs = nalgebra::DVector::from_column_slice(target);
    let svd = m.svd(true, true);
    match svd.solve(&rhs, 1e-13) {
        Ok(sol) => sol.iter().cloned().collect(),
        Err(_) => vec![0.0; kept.len()],
    }
}

/// Any factor `g` with `g g^T = x`, for numerically PD `x`.
fn factor_psd(x: &SymMatrix) -> Result<DMatrix<f64>> {
    if let Some(l) = linalg::cholesky(x) {
        return Ok(l);
    }
    let (lam, q) = linalg::eig_sym(x)?;
    let n = x.dim();
    let lam_max = lam.first().cloned().unwrap_or(0.0).abs().max(1.0);
    let mut g = DMatrix::zeros(n, n);
    for j in 0..n {
        if lam[j] < -1e-10 * lam_max {
            return Err(SdpError::IllConditioned(
                "iterate left the cone; scaling factor does not exist".into(),
            ));
        }
        let s = lam[j].max(lam_max * 1e-15).sqrt();
        for i in 0..n {
            g[(i, j)] = q.get(i, j) * s;
        }
    }
    Ok(g)
}

struct Scaling {
    /// Per block: `r` with `w = r r^T`, `r^T s r = r^{-1} x r^{-T} = diag(lam)`.
    r: Vec<DMatrix<f64>>,
    rinv: Vec<DMatrix<f64>>,
    lam: Vec<Vec<f64>>,
}

fn nt_scaling(x: &BlockSym, s: &BlockSym) -> Result<Scaling> {
    let mut r = Vec::new();
    let mut rinv = Vec::new();
    let mut lam = Vec::new();
    for (xb, sb) in x.blocks.iter().zip(&s.blocks) {
        let gx = factor_psd(xb)?;
        let gs = factor_psd(sb)?;
        let prod = gs.transpose() * &gx;
        let svd = prod.svd(true, true);
        let u = svd.u.as_ref().expect("svd u");
        let vt = svd.v_t.as_ref().expect("svd v_t");
        let sig = &svd.singular_values;
        let n = xb.dim();
        let mut rb = DMatrix::zeros(n, n);
        let mut rib = DMatrix::zeros(n, n);
        for j in 0..n {
            if !sig[j].is_finite() || sig[j] <= 0.0 {
                return Err(SdpError::IllConditioned(
                    "singular NT scaling; iterate degenerate".into(),
                ));
            }
        }
        // r = gx v sig^{-1/2}; r^{-1} = sig^{-1/2} u^T gs^T.
        let v = vt.transpose();
        for j in 0..n {
            let sc = sig[j].sqrt().recip();
            for i in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += gx[(i, k)] * v[(k, j)];
                }
                rb[(i, j)] = acc * sc;
            }
        }
        let gst = gs.transpose();
        for i in 0..n {
            let sc = sig[i].sqrt().recip();
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += u[(k, i)] * gst[(k, j)];
                }
                rib[(i, j)] = acc * sc;
            }
        }
        r.push(rb);
        rinv.push(rib);
        lam.push(sig.iter().cloned().collect());
    }
    Ok(Scaling { r, rinv, lam })
}

fn sym_of(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest step `alpha` keeping `diag(lam) + alpha d` PSD; `f64::INFINITY`
/// when unlimited.
fn max_step(lam: &[f64], d: &DMatrix<f64>) -> f64 {
    let n = lam.len();
    if n == 0 {
        return f64::INFINITY;
    }
    let mut scaled = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            scaled[(i, j)] = d[(i, j)] / (lam[i] * lam[j]).sqrt();
        }
    }
    let eig = nalgebra::SymmetricEigen::new(sym_of(&scaled));
    let min = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min >= -1e-300 {
        f64::INFINITY
    } else {
        -1.0 / min
    }
}

/// Runs the predictor-corrector loop. Both sides of `p` must be strongly
/// feasible; the iteration cap signals a violated contract otherwise.
pub fn solve_composite(p: &CompositeProblem, cfg: &ToleranceConfig) -> Result<IpmOutcome> {
    p.validate()?;
    let pre = preprocess(p, cfg)?;
    let prob = &pre.prob;
    let m = prob.m();
    let nf = prob.nfree;
    let nbar = prob.nbar() as f64;

    // Infeasible interior start.
    let mut amax: f64 = 1.0;
    for a in &prob.a_cone {
        amax = amax.max(a.frob_norm());
    }
    let bmax = prob.b.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let xi = nbar.sqrt().max(1.0).max(nbar * (1.0 + bmax) / (1.0 + amax));
    let eta = nbar
        .sqrt()
        .max(1.0)
        .max((1.0 + prob.c_cone.frob_norm().max(amax)) / nbar.sqrt().max(1.0));
    let mut x = BlockSym::identity_scaled(&prob.dims, xi);
    let mut s = BlockSym::identity_scaled(&prob.dims, eta);
    let mut y = vec![0.0_f64; m];
    let mut v = vec![0.0_f64; nf];

    let bnorm = prob.b.iter().map(|t| t * t).sum::<f64>().sqrt();
    let cnorm =
        (prob.c_cone.frob_norm().powi(2) + prob.c_free.iter().map(|t| t * t).sum::<f64>()).sqrt();

    let mut iterations = 0;

    for iter in 0..cfg.max_iter {
        iterations = iter;
        // Residuals.
        let rp: Vec<f64> = (0..m)
            .map(|i| {
                let af: f64 = prob.a_free[i].iter().zip(&v).map(|(a, b)| a * b).sum();
                prob.b[i] - prob.a_cone[i].inner(&x) - af
            })
            .collect();
        let mut rd = prob.c_cone.sub(&s);
        for (i, a) in prob.a_cone.iter().enumerate() {
            rd.axpy(-y[i], a);
        }
        let rf: Vec<f64> = (0..nf)
            .map(|j| prob.c_free[j] - (0..m).map(|i| prob.a_free[i][j] * y[i]).sum::<f64>())
            .collect();

        let mu = x.inner(&s) / nbar;
        let pobj =
            prob.c_cone.inner(&x) + prob.c_free.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
        let dobj: f64 = prob.b.iter().zip(&y).map(|(a, b)| a * b).sum();
        let pres = rp.iter().map(|t| t * t).sum::<f64>().sqrt() / (1.0 + bnorm);
        let dres =
            (rd.frob_norm().powi(2) + rf.iter().map(|t| t * t).sum::<f64>()).sqrt() / (1.0 + cnorm);
        let relgap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let mugap = mu * nbar / (1.0 + pobj.abs() + dobj.abs());

        let snapshot = |x: &BlockSym, v: &Vec<f64>, y: &Vec<f64>, s: &BlockSym| IpmOutcome {
            x: x.clone(),
            v: v.clone(),
            y: y.clone(),
            s: s.clone(),
            iterations: iter,
            primal_obj: pobj,
            dual_obj: dobj,
            gap: (pobj - dobj).abs(),
            primal_residual: pres,
            dual_residual: dres,
        };

        if pres <= cfg.feas && dres <= cfg.feas && (relgap <= cfg.gap || mugap <= cfg.gap) {
            let mut out = snapshot(&x, &v, &y, &s);
            restore_full(&mut out, &pre);
            return Ok(out);
        }

        // NT scaling and scaled constraint matrices.
        let sc = nt_scaling(&x, &s)?;
        let nblocks = prob.dims.len();
        let a_scaled: Vec<Vec<DMatrix<f64>>> = (0..m)
            .map(|i| {
                (0..nblocks)
                    .map(|bidx| {
                        let a = prob.a_cone[i].blocks[bidx].to_na();
                        sym_of(&(sc.r[bidx].transpose() * a * &sc.r[bidx]))
                    })
                    .collect()
            })
            .collect();

        // Schur complement + saddle system with the free block.
        let dim = m + nf;
        let mut kkt = DMatrix::zeros(dim, dim);
        for i in 0..m {
            for j in i..m {
                let mut acc = 0.0;
                for bidx in 0..nblocks {
                    acc += (&a_scaled[i][bidx] * &a_scaled[j][bidx]).trace();
                }
                kkt[(i, j)] = acc;
                kkt[(j, i)] = acc;
            }
            for j in 0..nf {
                kkt[(i, m + j)] = prob.a_free[i][j];
                kkt[(m + j, i)] = prob.a_free[i][j];
            }
        }
        let lu = kkt.clone().full_piv_lu();

        // w rd w per block, in scaled coordinates: rd_tilde = r^T rd r.
        let rd_tilde: Vec<DMatrix<f64>> = (0..nblocks)
            .map(|bidx| {
                let rdb = rd.blocks[bidx].to_na();
                sym_of(&(sc.r[bidx].transpose() * rdb * &sc.r[bidx]))
            })
            .collect();

        // Direction for a given scaled complementarity target.
        let solve_dir =
            |dc: &Vec<DMatrix<f64>>, rp: &Vec<f64>, rf: &Vec<f64>| -> Result<Direction> {
                // lop(dc): u_ij = 2 dc_ij / (lam_i + lam_j)
                let lop: Vec<DMatrix<f64>> = (0..nblocks)
                    .map(|bidx| {
                        let n = prob.dims[bidx];
                        DMatrix::from_fn(n, n, |i, j| {
                            2.0 * dc[bidx][(i, j)] / (sc.lam[bidx][i] + sc.lam[bidx][j])
                        })
                    })
                    .collect();
                let mut rhs = nalgebra::DVector::zeros(dim);
                for i in 0..m {
                    let mut acc = rp[i];
                    for bidx in 0..nblocks {
                        // - <A_i, r lop r^T> + <A_i, w rd w> = - <A~_i, lop> + <A~_i, rd~>
                        acc -= (&a_scaled[i][bidx] * &lop[bidx]).trace();
                        acc += (&a_scaled[i][bidx] * &rd_tilde[bidx]).trace();
                    }
                    rhs[i] = acc;
                }
                for j in 0..nf {
                    rhs[m + j] = rf[j];
                }
                let sol = lu.solve(&rhs).ok_or_else(|| {
                    SdpError::IllConditioned("saddle KKT system is singular".into())
                })?;
                let dy: Vec<f64> = (0..m).map(|i| sol[i]).collect();
                let dv: Vec<f64> = (0..nf).map(|j| sol[m + j]).collect();
                let mut ds = rd.clone();
                for (i, a) in prob.a_cone.iter().enumerate() {
                    ds.axpy(-dy[i], a);
                }
                // Scaled ds, dx; then dx in the original coordinates.
                let mut ds_tilde = Vec::new();
                let mut dx_tilde = Vec::new();
                let mut dx_blocks = Vec::new();
                for bidx in 0..nblocks {
                    let dsb = ds.blocks[bidx].to_na();
                    let dst = sym_of(&(sc.r[bidx].transpose() * dsb * &sc.r[bidx]));
                    let dxt = &lop[bidx] - &dst;
                    let dxb = sym_of(&(&sc.r[bidx] * &dxt * sc.r[bidx].transpose()));
                    dx_blocks.push(SymMatrix::from_na_symmetrize(&dxb));
                    ds_tilde.push(dst);
                    dx_tilde.push(dxt);
                }
                Ok(Direction {
                    dx: BlockSym { blocks: dx_blocks },
                    dv,
                    dy,
                    ds,
                    dx_tilde,
                    ds_tilde,
                })
            };

        // Predictor: drive complementarity toward zero.
        let dc_aff: Vec<DMatrix<f64>> = (0..nblocks)
            .map(|bidx| {
                let n = prob.dims[bidx];
                DMatrix::from_fn(n, n, |i, j| {
                    if i == j {
                        -sc.lam[bidx][i] * sc.lam[bidx][i]
                    } else {
                        0.0
                    }
                })
            })
            .collect();
        let aff = solve_dir(&dc_aff, &rp, &rf)?;
        let (dx_a, dxt_a, dst_a) = (aff.dx, aff.dx_tilde, aff.ds_tilde);

        let mut ap_aff = f64::INFINITY;
        let mut ad_aff = f64::INFINITY;
        for bidx in 0..nblocks {
            ap_aff = ap_aff.min(max_step(&sc.lam[bidx], &dxt_a[bidx]));
            ad_aff = ad_aff.min(max_step(&sc.lam[bidx], &dst_a[bidx]));
        }
        let ap_aff = (0.99 * ap_aff).min(1.0);
        let ad_aff = (0.99 * ad_aff).min(1.0);
        let mut xs = x.clone();
        xs.axpy(ap_aff, &dx_a);
        let mut ss = s.clone();
        {
            let mut ds_full = rd.clone();
            // ds_a was moved piecewise; recompute cheaply from scaled parts:
            // s_aff = s + ad * ds where ds = r^{-T} ds~ r^{-1}.
            for bidx in 0..nblocks {
                let dsb = sc.rinv[bidx].transpose() * &dst_a[bidx] * &sc.rinv[bidx];
                ds_full.blocks[bidx] = SymMatrix::from_na_symmetrize(&dsb);
            }
            ss.axpy(ad_aff, &ds_full);
        }
        let mu_aff = xs.inner(&ss) / nbar;
        let sigma = (mu_aff / mu).powi(3).clamp(1e-10, 1.0);

        // Corrector with the Mehrotra second-order term.
        let dc: Vec<DMatrix<f64>> = (0..nblocks)
            .map(|bidx| {
                let n = prob.dims[bidx];
                let second = sym_of(&(&dxt_a[bidx] * &dst_a[bidx]));
                DMatrix::from_fn(n, n, |i, j| {
                    let base = if i == j {
                        sigma * mu - sc.lam[bidx][i] * sc.lam[bidx][i]
                    } else {
                        0.0
                    };
                    base - second[(i, j)]
                })
            })
            .collect();
        let dir = solve_dir(&dc, &rp, &rf)?;
        let (dx, dv, dy, ds, dxt, dst) =
            (dir.dx, dir.dv, dir.dy, dir.ds, dir.dx_tilde, dir.ds_tilde);

        let mut ap = f64::INFINITY;
        let mut ad = f64::INFINITY;
        for bidx in 0..nblocks {
            ap = ap.min(max_step(&sc.lam[bidx], &dxt[bidx]));
            ad = ad.min(max_step(&sc.lam[bidx], &dst[bidx]));
        }
        let ap = (0.99 * ap).min(1.0);
        let ad = (0.99 * ad).min(1.0);

        x.axpy(ap, &dx);
        for (vj, dvj) in v.iter_mut().zip(&dv) {
            *vj += ap * dvj;
        }
        for (yi, dyi) in y.iter_mut().zip(&dy) {
            *yi += ad * dyi;
        }
        s.axpy(ad, &ds);

        // NaN guard.
        if !x.inner(&s).is_finite() {
            return Err(SdpError::IllConditioned(
                "iterates diverged to non-finite values".into(),
            ));
        }
    }

    Err(SdpError::MaxIterations(iterations + 1))
}

/// Pads the outcome of the compressed problem back to the caller's indexing:
/// dropped dual rows get multiplier 0, dropped free columns value 0.
fn restore_full(out: &mut IpmOutcome, pre: &Preprocessed) {
    if pre.kept_rows.len() != pre.full_m {
        let mut y = vec![0.0; pre.full_m];
        for (j, &i) in pre.kept_rows.iter().enumerate() {
            y[i] = out.y[j];
        }
        out.y = y;
    }
    if pre.kept_cols.len() != pre.full_nfree {
        let mut v = vec![0.0; pre.full_nfree];
        for (j, &i) in pre.kept_cols.iter().enumerate() {
            v[i] = out.v[j];
        }
        out.v = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    /// min <I, x> s.t. <I, x> = 1, x in S^2_+ : value 1.
    #[test]
    fn trace_one_problem() {
        let p = CompositeProblem {
            dims: vec![2],
            nfree: 0,
            a_cone: vec![BlockSym {
                blocks: vec![SymMatrix::identity(2)],
            }],
            a_free: vec![vec![]],
            b: vec![1.0],
            c_cone: BlockSym {
                blocks: vec![SymMatrix::identity(2)],
            },
            c_free: vec![],
        };
        let out = solve_composite(&p, &cfg()).unwrap();
        assert!((out.primal_obj - 1.0).abs() < 1e-6);
        assert!(out.gap < 1e-6);
    }

    /// Square-root gadget for beta = 9: max x s.t. [[1,x],[x,9]] psd.
    #[test]
    fn sqrt_of_nine() {
        let mut a1 = SymMatrix::zeros(2);
        a1.set_sym(0, 1, -1.0);
        let c = SymMatrix::from_diag(&[1.0, 9.0]);
        let p = CompositeProblem {
            dims: vec![2],
            nfree: 0,
            a_cone: vec![BlockSym { blocks: vec![a1] }],
            a_free: vec![vec![]],
            b: vec![1.0],
            c_cone: BlockSym { blocks: vec![c] },
            c_free: vec![],
        };
        let out = solve_composite(&p, &cfg()).unwrap();
        assert!(
            (out.dual_obj - 3.0).abs() < 1e-6,
            "dual obj {}",
            out.dual_obj
        );
    }

    /// Two scalar blocks: min x + 2w s.t. x + w = 1 over R_+^2: value 1.
    #[test]
    fn scalar_blocks_lp() {
        let one = SymMatrix::identity(1);
        let p = CompositeProblem {
            dims: vec![1, 1],
            nfree: 0,
            a_cone: vec![BlockSym {
                blocks: vec![one.clone(), one.clone()],
            }],
            a_free: vec![vec![]],
            b: vec![1.0],
            c_cone: BlockSym {
                blocks: vec![one.clone(), one.scale(2.0)],
            },
            c_free: vec![],
        };
        let out = solve_composite(&p, &cfg()).unwrap();
        assert!((out.primal_obj - 1.0).abs() < 1e-6);
        assert!(out.x.blocks[0].get(0, 0) > 0.99);
        assert!(out.x.blocks[1].get(0, 0) < 1e-6);
    }

    /// Free variable pinned by the constraints; optimum known analytically:
    /// min x11 s.t. x11 + v = 2, v = 1.
    #[test]
    fn free_variable_pinned() {
        let one = SymMatrix::identity(1);
        let p = CompositeProblem {
            dims: vec![1],
            nfree: 1,
            a_cone: vec![
                BlockSym {
                    blocks: vec![one.clone()],
                },
                BlockSym {
                    blocks: vec![SymMatrix::zeros(1)],
                },
            ],
            a_free: vec![vec![1.0], vec![1.0]],
            b: vec![2.0, 1.0],
            c_cone: BlockSym {
                blocks: vec![one.clone()],
            },
            c_free: vec![0.0],
        };
        let out = solve_composite(&p, &cfg()).unwrap();
        assert!((out.x.blocks[0].get(0, 0) - 1.0).abs() < 1e-6);
        assert!((out.v[0] - 1.0).abs() < 1e-6);
    }

    /// Redundant rows are dropped and the duals padded back.
    #[test]
    fn redundant_row_preprocessing() {
        let one = SymMatrix::identity(1);
        let p = CompositeProblem {
            dims: vec![1],
            nfree: 0,
            a_cone: vec![
                BlockSym {
                    blocks: vec![one.clone()],
                },
                BlockSym {
                    blocks: vec![one.scale(2.0)],
                },
            ],
            a_free: vec![vec![], vec![]],
            b: vec![1.0, 2.0],
            c_cone: BlockSym {
                blocks: vec![one.clone()],
            },
            c_free: vec![],
        };
        let out = solve_composite(&p, &cfg()).unwrap();
        assert_eq!(out.y.len(), 2);
        assert!((out.primal_obj - 1.0).abs() < 1e-6);
    }

    #[test]
    fn inconsistent_redundant_row_rejected() {
        let one = SymMatrix::identity(1);
        let p = CompositeProblem {
            dims: vec![1],
            nfree: 0,
            a_cone: vec![
                BlockSym {
                    blocks: vec![one.clone()],
                },
                BlockSym {
                    blocks: vec![one.scale(2.0)],
                },
            ],
            a_free: vec![vec![], vec![]],
            b: vec![1.0, 3.0],
            c_cone: BlockSym {
                blocks: vec![one.clone()],
            },
            c_free: vec![],
        };
        assert!(solve_composite(&p, &cfg()).is_err());
    }

    /// Larger random-but-fixed strongly feasible instance: the two objective
    /// values must agree at the reported gap.
    #[test]
    fn gap_closes_on_dense_instance() {
        let n = 4;
        let mats: Vec<SymMatrix> = (0..3)
            .map(|k| SymMatrix::from_fn(n, |i, j| ((i * 7 + j * 3 + k * 11) as f64 * 0.37).sin()))
            .collect();
        // x0 = I, s0 = I, y0 = ones: b = A(x0), c = s0 + A^T y0.
        let b: Vec<f64> = mats.iter().map(|a| a.trace()).collect();
        let mut c = SymMatrix::identity(n);
        for a in &mats {
            c.axpy(1.0, a);
        }
        let p = CompositeProblem {
            dims: vec![n],
            nfree: 0,
            a_cone: mats
                .iter()
                .map(|a| BlockSym {
                    blocks: vec![a.clone()],
                })
                .collect(),
            a_free: vec![vec![]; 3],
            b,
            c_cone: BlockSym { blocks: vec![c] },
            c_free: vec![],
        };
        let out = solve_composite(&p, &cfg()).unwrap();
        assert!(out.gap <= 1e-6 * (1.0 + out.primal_obj.abs()));
        assert!(out.primal_residual <= 1e-7);
        assert!(out.dual_residual <= 1e-7);
        assert!(out.x.min_eig() >= -1e-9);
        assert!(out.s.min_eig() >= -1e-9);
    }
}
