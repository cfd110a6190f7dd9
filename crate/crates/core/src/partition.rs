//! Maximal hyper feasible partitions of a subspace of S^n.
//!
//! A partition rotates the space so that a chain of directions from the
//! subspace becomes block-lower-triangular with positive definite leading
//! blocks. Truncating a feasibility problem past the partition's span
//! preserves its status class, and the directions allow PSD completion of
//! any point whose trailing block is definite. This is what lets the solver
//! move between a degenerate problem and a well-behaved truncation without
//! changing optimal values, and what generates points within any eps of the
//! cone for weakly infeasible problems.

use serde::{Deserialize, Serialize};

use crate::linalg::{
    self, pi_lower, pi_upper, rotate, MatrixSubspace, OrthogonalMatrix, SymMatrix,
};
use crate::model::{Result, SdpError};
use crate::oracle::{solve_labeled, solve_refined, BlockSym, CompositeProblem, SolveContext};

/// A maximal hyper feasible partition of a subspace `L`:
/// an accumulated rotation `P`, directions `dirs[i]` in `P^T L P` and block
/// sizes `blocks[i]` such that each direction's diagonal block is positive
/// definite and everything below-right of it vanishes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HyperFeasiblePartition {
    pub p: OrthogonalMatrix,
    pub dirs: Vec<SymMatrix>,
    /// `dirs[i] = sum_j dir_coeffs[i][j] * (P^T gens[j] P)` over the
    /// generators the partition was built from.
    pub dir_coeffs: Vec<Vec<f64>>,
    pub blocks: Vec<usize>,
}

impl HyperFeasiblePartition {
    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    /// Total partitioned size `s = k_1 + ... + k_l`.
    pub fn s(&self) -> usize {
        self.blocks.iter().sum()
    }

    /// Prefix sums `s_0 = 0, s_1 = k_1, ...`.
    pub fn prefixes(&self) -> Vec<usize> {
        let mut out = vec![0];
        for &k in &self.blocks {
            out.push(out.last().unwrap() + k);
        }
        out
    }
}

/// Searches for a nonzero PSD element of the subspace by minimizing `t`
/// subject to `s = l + t I`, `<I, s> = 1`, `(s, t)` in `S^n_+ x R_+`.
///
/// Both that problem and its dual have interior points for every subspace
/// (`(I/n, 1/n)` is primal interior), so the oracle applies. A zero optimal
/// value exhibits the element; otherwise none exists.
pub fn find_nonzero_psd(
    subspace: &MatrixSubspace,
    ctx: &mut SolveContext,
) -> Result<Option<SymMatrix>> {
    let n = subspace.n();
    if n == 0 {
        return Ok(None);
    }
    let complement = subspace.complement();
    let mut a_cone: Vec<BlockSym> = Vec::new();
    let mut b = Vec::new();
    // <H_k, s> - t <H_k, I> = 0 for every H_k spanning the complement.
    for h in complement.basis() {
        a_cone.push(BlockSym {
            blocks: vec![h.clone(), SymMatrix::from_diag(&[-h.trace()])],
        });
        b.push(0.0);
    }
    // <I, s> = 1.
    a_cone.push(BlockSym {
        blocks: vec![SymMatrix::identity(n), SymMatrix::zeros(1)],
    });
    b.push(1.0);
    let m = b.len();
    let prob = CompositeProblem {
        dims: vec![n, 1],
        nfree: 0,
        a_cone,
        a_free: vec![vec![]; m],
        b,
        c_cone: BlockSym {
            blocks: vec![SymMatrix::zeros(n), SymMatrix::identity(1)],
        },
        c_free: vec![],
    };
    let out = solve_refined(&prob, ctx, "nonzero-psd")?;
    let t_star = out.x.blocks[1].get(0, 0);
    if t_star > ctx.cfg.branch {
        return Ok(None);
    }
    // Purify: truncate the sub-threshold eigenvalues (path noise on
    // degenerate coordinates) and re-project onto the subspace, alternating
    // until the iteration is stationary. The contamination decays linearly,
    // so the stop test watches the step size, not the PSD defect (which is
    // quadratic in the contamination and goes quiet much too early).
    let mut elem = out.x.blocks[0].clone();
    for _ in 0..500 {
        let (lam, q) = linalg::eig_sym(&elem)?;
        let lam_max = lam.first().cloned().unwrap_or(0.0).max(0.0);
        let cut = 1e-4 * lam_max;
        let kept: Vec<f64> = lam.iter().map(|&v| if v > cut { v } else { 0.0 }).collect();
        let next = subspace.project(&linalg::rotate(
            &SymMatrix::from_diag(&kept),
            &q.transpose(),
        ));
        let step = next.sub(&elem).frob_norm();
        elem = next;
        if step <= 1e-14 * (1.0 + elem.frob_norm()) {
            break;
        }
    }
    let tr = elem.trace();
    if tr.abs() > 1e-8 {
        elem = elem.scale(1.0 / tr);
    }
    let min_eig = linalg::min_eig(&elem);
    if min_eig < -10.0 * ctx.cfg.branch * (1.0 + elem.frob_norm()) {
        ctx.flags.push(format!(
            "low-confidence: nonzero PSD search returned a boundary element \
             (min eig {min_eig:.3e}); treated as none"
        ));
        return Ok(None);
    }
    if elem.frob_norm() < 10.0 * ctx.cfg.branch {
        ctx.flags.push(
            "low-confidence: nonzero PSD search returned a near-zero element; treated as none"
                .into(),
        );
        return Ok(None);
    }
    Ok(Some(elem))
}

/// Builds a maximal hyper feasible partition of `span(gens)`, or returns
/// `None` when the subspace meets the PSD cone only at the origin.
///
/// Loop: find a nonzero PSD element of the current trailing subspace,
/// rotate so its range leads, record the block, recurse on the remainder.
/// The element search runs through the oracle; everything else is
/// bookkeeping and rotation.
pub fn build_partition(
    n: usize,
    gens: &[SymMatrix],
    ctx: &mut SolveContext,
) -> Result<Option<HyperFeasiblePartition>> {
    let mut p = OrthogonalMatrix::identity(n);
    let mut gens_rot: Vec<SymMatrix> = gens.to_vec();
    let mut dirs: Vec<SymMatrix> = Vec::new();
    let mut blocks: Vec<usize> = Vec::new();
    let mut s = 0usize;

    loop {
        let res_n = n - s;
        if res_n == 0 {
            break;
        }
        let res_gens: Vec<SymMatrix> = gens_rot.iter().map(|g| pi_lower(g, s)).collect();
        let res_space = MatrixSubspace::from_generators(res_n, &res_gens, ctx.cfg.sub);
        if res_space.dim() == 0 {
            break;
        }
        let found = match find_nonzero_psd(&res_space, ctx)? {
            None => break,
            Some(a) => a,
        };
        // Rank of the found element decides the block size; its range is
        // rotated to the front of the residual space.
        let (lam, u) = linalg::eig_sym(&found)?;
        let lam_max = lam.first().cloned().unwrap_or(0.0);
        let rank_tau = ctx
            .cfg
            .rank_threshold(lam_max.abs())
            .max(1e-4 * lam_max.abs())
            .max(10.0 * ctx.cfg.branch);
        let k = lam.iter().filter(|&&v| v > rank_tau).count();
        if k == 0 {
            break;
        }
        // Full-space preimage: any combination of the rotated generators
        // whose trailing block equals the found element.
        let eta = linalg::lstsq_express(&found, &res_gens, 1e-7).ok_or_else(|| {
            SdpError::ContractViolation(
                "nonzero PSD element does not project back onto the subspace".into(),
            )
        })?;
        let mut full_dir = SymMatrix::zeros(n);
        for (g, &e) in gens_rot.iter().zip(&eta) {
            full_dir.axpy(e, g);
        }
        // Extend the rotation: identity on the settled part, eigenvectors
        // (range first) on the residual.
        let u_ext = u.prepend_identity(s);
        p = p.compose(&u_ext);
        for g in gens_rot.iter_mut() {
            *g = rotate(g, &u_ext);
        }
        for d in dirs.iter_mut() {
            *d = rotate(d, &u_ext);
        }
        dirs.push(rotate(&full_dir, &u_ext));
        blocks.push(k);
        s += k;
    }

    if dirs.is_empty() {
        return Ok(None);
    }
    if dirs.len() > n.saturating_sub(1) {
        ctx.flags.push(format!(
            "contract-violation: partition used {} directions in S^{n}, exceeding n-1",
            dirs.len()
        ));
    }
    let dir_coeffs = dirs
        .iter()
        .map(|d| {
            linalg::lstsq_express(d, &gens_rot, 1e-6).ok_or_else(|| {
                SdpError::ContractViolation(
                    "partition direction left the subspace during rotation".into(),
                )
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Some(HyperFeasiblePartition {
        p,
        dirs,
        dir_coeffs,
        blocks,
    }))
}

/// Checks the four structural guarantees of a partition against the
/// subspace it was built from. Returns violated items.
pub fn check_partition_invariants(
    part: &HyperFeasiblePartition,
    n: usize,
    gens: &[SymMatrix],
    ctx: &mut SolveContext,
) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    let tol_zero = 1e-6;
    let tol_pd = 1e-7;
    if part.len() > n.saturating_sub(1) {
        bad.push(format!("more than n-1 directions: {}", part.len()));
    }
    let gens_rot: Vec<SymMatrix> = gens.iter().map(|g| rotate(g, &part.p)).collect();
    let rot_space = MatrixSubspace::from_generators(n, &gens_rot, ctx.cfg.sub);
    let prefixes = part.prefixes();
    for (i, dir) in part.dirs.iter().enumerate() {
        if !rot_space.contains(dir, 1e-7) {
            bad.push(format!("direction {i} not in the rotated subspace"));
        }
        let s_prev = prefixes[i];
        let s_cur = prefixes[i + 1];
        let k = part.blocks[i];
        let trailing = pi_lower(dir, s_prev);
        let lead = pi_upper(&trailing, k);
        if linalg::min_eig(&lead) <= tol_pd * lead.frob_norm().max(1e-12) {
            bad.push(format!(
                "direction {i}: leading block not positive definite"
            ));
        }
        if pi_lower(dir, s_cur).max_abs() > tol_zero * (1.0 + dir.max_abs()) {
            bad.push(format!("direction {i}: trailing block does not vanish"));
        }
        if i == 0 && linalg::min_eig(dir) < -tol_zero * (1.0 + dir.max_abs()) {
            bad.push("first direction is not PSD".into());
        }
    }
    // Maximality: no nonzero PSD element remains past the partition.
    let s = part.s();
    if n - s > 0 {
        let res_gens: Vec<SymMatrix> = gens_rot.iter().map(|g| pi_lower(g, s)).collect();
        let res_space = MatrixSubspace::from_generators(n - s, &res_gens, ctx.cfg.sub);
        if res_space.dim() > 0 {
            if let Some(extra) = find_nonzero_psd(&res_space, ctx)? {
                bad.push(format!(
                    "not maximal: residual subspace still contains a PSD element of norm {:.3e}",
                    extra.frob_norm()
                ));
            }
        }
    }
    Ok(bad)
}

/// Positive coefficients making `z + sum_i alpha_i dirs[i]` positive
/// definite, given that the trailing block of `z` past the partition is
/// positive definite. Built constructively back to front: each block's
/// coefficient is set from an explicit Schur-complement bound, then bumped
/// by doubling if roundoff left the intermediate matrix indefinite.
pub fn psd_complete(
    z: &SymMatrix,
    part: &HyperFeasiblePartition,
    cfg: &crate::config::ToleranceConfig,
) -> Result<Vec<f64>> {
    let n = z.dim();
    let s = part.s();
    let tail = pi_lower(z, s);
    if tail.dim() > 0 && linalg::min_eig(&tail) <= 0.0 {
        return Err(SdpError::ContractViolation(
            "psd_complete requires a positive definite trailing block".into(),
        ));
    }
    let delta = 1e-6;
    let prefixes = part.prefixes();
    let mut alphas = vec![0.0; part.len()];
    let mut working = z.clone();
    for i in (0..part.len()).rev() {
        let s_prev = prefixes[i];
        let k = part.blocks[i];
        let dir = &part.dirs[i];
        let w = pi_lower(&working, s_prev);
        let f = pi_upper(&pi_lower(dir, s_prev), k);
        // Schur bound: alpha * lam_min(F) must dominate the eigenvalues of
        // W11 - W12 W22^{-1} W21.
        let w11 = pi_upper(&w, k);
        let w22 = pi_lower(&w, k);
        let schur = if w22.dim() == 0 {
            w11.clone()
        } else {
            let w22_na = w22.to_na();
            let inv = w22_na
                .try_inverse()
                .ok_or_else(|| SdpError::IllConditioned("trailing block not invertible".into()))?;
            let m = w.dim();
            let mut w12 = nalgebra::DMatrix::zeros(k, m - k);
            for r in 0..k {
                for c in 0..(m - k) {
                    w12[(r, c)] = w.get(r, k + c);
                }
            }
            let corr = &w12 * inv * w12.transpose();
            SymMatrix::from_fn(k, |r, c| {
                w11.get(r, c) - 0.5 * (corr[(r, c)] + corr[(c, r)])
            })
        };
        let (schur_lam, _) = linalg::eig_sym(&schur)?;
        let (f_lam, _) = linalg::eig_sym(&f)?;
        let f_min = *f_lam.last().unwrap();
        if f_min <= 0.0 {
            return Err(SdpError::ContractViolation(
                "partition block lost positive definiteness".into(),
            ));
        }
        let need = -schur_lam.last().unwrap().min(0.0);
        let mut alpha = (1.2 * need / f_min).max(0.0) + delta;
        // Verified bump: the bound is exact in exact arithmetic; doubling
        // covers roundoff.
        for _ in 0..80 {
            let mut cand = working.clone();
            cand.axpy(alpha, dir);
            let tail_ok = {
                let t = pi_lower(&cand, s_prev);
                t.dim() == 0 || linalg::min_eig(&t) > 0.0
            };
            if tail_ok {
                break;
            }
            alpha *= 2.0;
        }
        alphas[i] = alpha;
        working.axpy(alpha, dir);
    }
    let final_min = linalg::min_eig(&working);
    if final_min <= -cfg.feas * (1.0 + working.frob_norm()) {
        return Err(SdpError::ContractViolation(format!(
            "psd completion failed: min eigenvalue {final_min:.3e}"
        )));
    }
    let _ = n;
    Ok(alphas)
}

/// Moves `z` (whose trailing block past the partition is PSD) to within
/// `eps` of the PSD cone without leaving `z + span(dirs)`, by solving
///
/// ```text
/// max  -sum alpha_i   s.t.  (z + (eps/n) I, 0) - sum alpha_i (-D_i, -e_i)
///                           in S^n_+ x R^l_+
/// ```
///
/// through the oracle; both sides have interior points (for `eps = 0` this
/// needs the trailing block positive definite). Returns the moved point and
/// the coefficients.
pub fn epsilon_near_feasible(
    z: &SymMatrix,
    part: &HyperFeasiblePartition,
    eps: f64,
    ctx: &mut SolveContext,
) -> Result<(SymMatrix, Vec<f64>)> {
    let n = z.dim();
    let s = part.s();
    let tail = pi_lower(z, s);
    let tail_min = linalg::min_eig(&tail);
    if eps < 0.0 {
        return Err(SdpError::InvalidInput("epsilon must be nonnegative".into()));
    }
    if eps == 0.0 {
        if tail.dim() > 0 && tail_min <= 0.0 {
            return Err(SdpError::ContractViolation(
                "eps = 0 requires a positive definite trailing block".into(),
            ));
        }
    } else if tail.dim() > 0 && tail_min < -ctx.cfg.branch * (1.0 + tail.frob_norm()) {
        return Err(SdpError::ContractViolation(
            "trailing block of z is not PSD".into(),
        ));
    }
    let l = part.len();
    let mut shifted = z.clone();
    shifted.axpy(eps / n as f64, &SymMatrix::identity(n));
    // Dual-orientation data for the oracle: slack = chat - sum alpha_i B_i.
    let mut dims = vec![n];
    dims.extend(std::iter::repeat_n(1, l));
    let mut c_blocks = vec![shifted];
    c_blocks.extend(std::iter::repeat_n(SymMatrix::zeros(1), l));
    let mut a_cone = Vec::with_capacity(l);
    for i in 0..l {
        let mut blocks = vec![part.dirs[i].scale(-1.0)];
        for j in 0..l {
            blocks.push(if i == j {
                SymMatrix::from_diag(&[-1.0])
            } else {
                SymMatrix::zeros(1)
            });
        }
        a_cone.push(BlockSym { blocks });
    }
    let prob = CompositeProblem {
        dims,
        nfree: 0,
        a_cone,
        a_free: vec![vec![]; l],
        b: vec![-1.0; l],
        c_cone: BlockSym { blocks: c_blocks },
        c_free: vec![],
    };
    let out = solve_labeled(&prob, ctx, "eps-near-feasible")?;
    let alphas = out.y.clone();
    let mut moved = z.clone();
    for (d, &a) in part.dirs.iter().zip(&alphas) {
        moved.axpy(a, d);
    }
    Ok((moved, alphas))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ToleranceConfig;

    fn ctx() -> SolveContext {
        SolveContext::new(ToleranceConfig::default())
    }

    fn space(n: usize, gens: &[SymMatrix]) -> MatrixSubspace {
        MatrixSubspace::from_generators(n, gens, 1e-9)
    }

    #[test]
    fn trace_zero_line_has_no_psd_element() {
        let l = space(2, &[SymMatrix::from_diag(&[1.0, -1.0])]);
        assert!(find_nonzero_psd(&l, &mut ctx()).unwrap().is_none());
    }

    #[test]
    fn zero_subspace_has_no_psd_element() {
        let l = space(2, &[]);
        assert!(find_nonzero_psd(&l, &mut ctx()).unwrap().is_none());
    }

    fn example_subspace() -> Vec<SymMatrix> {
        // { [[y1, 0, y2], [0, y2, 0], [y2, 0, 0]] } from the worked example.
        let g1 = SymMatrix::from_diag(&[1.0, 0.0, 0.0]);
        let mut g2 = SymMatrix::zeros(3);
        g2.set_sym(0, 2, 1.0);
        g2.set_sym(1, 1, 1.0);
        vec![g1, g2]
    }

    #[test]
    fn example_subspace_psd_element_is_e11() {
        // Any PSD member forces the coupling coordinate to zero, leaving
        // multiples of e1 e1^T; with trace normalized to 1 the answer is
        // exactly diag(1, 0, 0).
        let l = space(3, &example_subspace());
        let found = find_nonzero_psd(&l, &mut ctx()).unwrap().unwrap();
        assert!((found.get(0, 0) - 1.0).abs() < 1e-6);
        assert!(
            found
                .sub(&SymMatrix::from_diag(&[1.0, 0.0, 0.0]))
                .frob_norm()
                < 1e-6
        );
    }

    #[test]
    fn example_partition_has_two_singleton_blocks() {
        let gens = example_subspace();
        let part = build_partition(3, &gens, &mut ctx()).unwrap().unwrap();
        assert_eq!(part.blocks, vec![1, 1]);
        let mut c = ctx();
        let bad = check_partition_invariants(&part, 3, &gens, &mut c).unwrap();
        assert!(bad.is_empty(), "violations: {bad:?}");
    }

    #[test]
    fn identity_span_partitions_in_one_full_block() {
        let gens = vec![SymMatrix::identity(3)];
        let part = build_partition(3, &gens, &mut ctx()).unwrap().unwrap();
        assert_eq!(part.blocks, vec![3]);
        assert_eq!(part.s(), 3);
    }

    #[test]
    fn indefinite_line_has_no_partition() {
        let gens = vec![SymMatrix::from_diag(&[1.0, -1.0])];
        assert!(build_partition(2, &gens, &mut ctx()).unwrap().is_none());
    }

    #[test]
    fn psd_complete_two_by_two() {
        // z = diag(-3, 1), single direction diag(1, 0): alpha slightly
        // above 3 restores definiteness.
        let part = HyperFeasiblePartition {
            p: OrthogonalMatrix::identity(2),
            dirs: vec![SymMatrix::from_diag(&[1.0, 0.0])],
            dir_coeffs: vec![vec![1.0]],
            blocks: vec![1],
        };
        let z = SymMatrix::from_diag(&[-3.0, 1.0]);
        let alphas = psd_complete(&z, &part, &ToleranceConfig::default()).unwrap();
        assert!(alphas[0] > 3.0);
        let mut fixed = z.clone();
        fixed.axpy(alphas[0], &part.dirs[0]);
        assert!(linalg::min_eig(&fixed) > 0.0);
    }

    #[test]
    fn psd_complete_keeps_alphas_positive_when_z_definite() {
        let part = HyperFeasiblePartition {
            p: OrthogonalMatrix::identity(2),
            dirs: vec![SymMatrix::from_diag(&[1.0, 0.0])],
            dir_coeffs: vec![vec![1.0]],
            blocks: vec![1],
        };
        let z = SymMatrix::identity(2);
        let alphas = psd_complete(&z, &part, &ToleranceConfig::default()).unwrap();
        assert!(alphas[0] > 0.0 && alphas[0] < 1e-3);
    }

    #[test]
    fn near_feasible_leaves_psd_point_alone() {
        let part = HyperFeasiblePartition {
            p: OrthogonalMatrix::identity(2),
            dirs: vec![SymMatrix::from_diag(&[1.0, 0.0])],
            dir_coeffs: vec![vec![1.0]],
            blocks: vec![1],
        };
        let z = SymMatrix::identity(2);
        let (moved, alphas) = epsilon_near_feasible(&z, &part, 1e-3, &mut ctx()).unwrap();
        assert!(alphas[0].abs() < 1e-5);
        assert!(moved.sub(&z).frob_norm() < 1e-4);
        assert!(linalg::dist_to_psd(&moved) < 1e-9);
    }

    #[test]
    fn near_feasible_moves_weakly_infeasible_slack() {
        // Slack family [[y, 1], [1, 0]] at y = 1, partitioned along its
        // only PSD direction diag(1, 0); the moved point must come within
        // eps of the cone while staying in the affine line.
        let mut z = SymMatrix::zeros(2);
        z.set_sym(0, 1, 1.0);
        z.set_sym(0, 0, 1.0);
        let part = HyperFeasiblePartition {
            p: OrthogonalMatrix::identity(2),
            dirs: vec![SymMatrix::from_diag(&[1.0, 0.0])],
            dir_coeffs: vec![vec![1.0]],
            blocks: vec![1],
        };
        // pi past s=1 of z is [0], PSD, so eps > 0 applies.
        for eps in [1e-2, 1e-3] {
            let (moved, alphas) = epsilon_near_feasible(&z, &part, eps, &mut ctx()).unwrap();
            assert!(linalg::dist_to_psd(&moved) <= eps, "eps {eps}");
            let mut recon = z.clone();
            recon.axpy(alphas[0], &part.dirs[0]);
            assert!(recon.sub(&moved).frob_norm() < 1e-12);
        }
    }
}
