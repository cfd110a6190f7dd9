//! Facial reduction driven by the interior point oracle.
//!
//! Finds the minimal face of the PSD cone containing the dual feasible
//! slacks, or certifies infeasibility, by iterating one auxiliary SDP pair
//! per step. The auxiliary pair is strongly feasible on both sides by
//! construction regardless of the state of the input problem, which is what
//! makes the oracle applicable at every step.
//!
//! The search variable of the auxiliary problem lives in `F* x R+ x R+`,
//! where `F*` is the dual of the current face. In rotated coordinates that
//! is a PSD block of the face size plus unconstrained off-face entries; the
//! off-face entries ride through the oracle as free variables. Projecting
//! them away would be wrong: infeasibility of a problem confined to a face
//! is frequently witnessed only by directions with nonzero off-face parts.

use crate::config::ToleranceConfig;
use crate::linalg::{self, pi_upper, rotate, svec, trace_inner, MatrixSubspace, SymMatrix};
use crate::model::{
    ChainTerminal, Face, FeasStatus, LinearMapA, ReducingChain, ReductionStep, Result, SdpError,
    SdpProblem, StrongInfeasibilityWitness,
};
use crate::oracle::{solve_refined, BlockSym, CompositeProblem, SolveContext};

/// Outcome of one facial reduction step over the face `F`.
#[derive(Debug, Clone)]
pub enum StepOutcome {
    /// Auxiliary optimal value is positive: `F` is already minimal and
    /// `s_ri = c - A^T y_ri` is a relative-interior feasible slack.
    MinimalFaceFound {
        s_ri: SymMatrix,
        y_ri: Vec<f64>,
        t_star: f64,
    },
    /// Reducing direction with strictly negative objective inner product:
    /// the dual is infeasible.
    Infeasible { direction: SymMatrix, c_inner: f64 },
    /// Reducing direction orthogonal to the objective: the feasible slacks
    /// are confined to a strictly smaller face.
    SmallerFace {
        direction: SymMatrix,
        c_inner: f64,
        new_face: Face,
        low_confidence: bool,
    },
}

/// Result of the full reduction loop.
#[derive(Debug, Clone)]
pub struct FrOutcome {
    /// `None` means the minimal face is empty: the dual is infeasible.
    pub face: Option<Face>,
    pub s_ri: Option<SymMatrix>,
    pub y_ri: Option<Vec<f64>>,
    pub chain: ReducingChain,
    pub flags: Vec<String>,
}

impl FrOutcome {
    pub fn is_feasible(&self) -> bool {
        self.face.is_some()
    }
}

/// Off-face coordinate positions for a face of rank `r` in S^n: all `(i, j)`
/// with `i <= j` touching the trailing `n - r` rows/columns.
fn off_face_positions(n: usize, r: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            if j >= r {
                out.push((i, j));
            }
        }
    }
    out
}

/// Coordinates of `m` on the orthonormal off-face basis.
fn off_face_coords(m: &SymMatrix, positions: &[(usize, usize)]) -> Vec<f64> {
    positions
        .iter()
        .map(|&(i, j)| {
            if i == j {
                m.get(i, j)
            } else {
                std::f64::consts::SQRT_2 * m.get(i, j)
            }
        })
        .collect()
}

/// Rebuilds a symmetric matrix from a face block and off-face coordinates.
fn assemble_from_parts(
    n: usize,
    block: &SymMatrix,
    positions: &[(usize, usize)],
    coords: &[f64],
) -> SymMatrix {
    let mut out = linalg::embed_upper(block, n);
    for (&(i, j), &v) in positions.iter().zip(coords) {
        let val = if i == j {
            v
        } else {
            v / std::f64::consts::SQRT_2
        };
        out.set_sym(i, j, val);
    }
    out
}

/// One facial reduction step on `problem` over `face`.
///
/// Builds the auxiliary pair with variables `(x, t, w)` in `F* x R+ x R+`
/// and constraints
///
/// ```text
/// -<c, x - t I*> + t - w = 0
/// <I, x> + w = 1
/// A x - t A I* = 0
/// ```
///
/// solved through the oracle. Both sides of this pair have relative interior
/// points (`x = I*/(r+1), t = w = 1/(r+1)` on the primal side, `(0, -1, 0)`
/// on the dual side), so the oracle contract holds no matter how degenerate
/// the input problem is. The interior elements are `I = I* = q diag(I_r, 0)
/// q^T`.
pub fn fr_step(problem: &SdpProblem, face: &Face, ctx: &mut SolveContext) -> Result<StepOutcome> {
    let n = problem.n();
    let m = problem.m();
    let r = face.rank();
    assert!(r >= 1, "fr_step requires a face of rank >= 1");
    let q = face.q();
    let c_rot = rotate(&problem.c, q);
    let a_rot: Vec<SymMatrix> = problem.a.mats().iter().map(|a| rotate(a, q)).collect();
    let positions = off_face_positions(n, r);
    let nfree = positions.len();

    // <m, I*> with I* = diag(I_r, 0) in rotated coordinates.
    let ri_inner = |mat: &SymMatrix| pi_upper(mat, r).trace();
    let c_ri = ri_inner(&c_rot);

    let dims = vec![r, 1, 1];
    let mut a_cone = Vec::with_capacity(m + 2);
    let mut a_free = Vec::with_capacity(m + 2);
    let mut b = Vec::with_capacity(m + 2);
    // -<c, x> + t (1 + <c, I*>) - w = 0
    a_cone.push(BlockSym {
        blocks: vec![
            pi_upper(&c_rot, r).scale(-1.0),
            SymMatrix::from_diag(&[1.0 + c_ri]),
            SymMatrix::from_diag(&[-1.0]),
        ],
    });
    a_free.push(
        off_face_coords(&c_rot, &positions)
            .iter()
            .map(|v| -v)
            .collect(),
    );
    b.push(0.0);
    // <I, x> + w = 1
    a_cone.push(BlockSym {
        blocks: vec![
            SymMatrix::identity(r),
            SymMatrix::zeros(1),
            SymMatrix::from_diag(&[1.0]),
        ],
    });
    a_free.push(vec![0.0; nfree]);
    b.push(1.0);
    // <A_i, x> - t <A_i, I*> = 0
    for ai in &a_rot {
        a_cone.push(BlockSym {
            blocks: vec![
                pi_upper(ai, r),
                SymMatrix::from_diag(&[-ri_inner(ai)]),
                SymMatrix::zeros(1),
            ],
        });
        a_free.push(off_face_coords(ai, &positions));
        b.push(0.0);
    }
    let aux = CompositeProblem {
        dims,
        nfree,
        a_cone,
        a_free,
        b,
        c_cone: BlockSym {
            blocks: vec![
                SymMatrix::zeros(r),
                SymMatrix::identity(1),
                SymMatrix::zeros(1),
            ],
        },
        c_free: vec![0.0; nfree],
    };
    let out = solve_refined(&aux, ctx, "fr-step")?;

    let t_star = out.x.blocks[1].get(0, 0);
    let x_block = out.x.blocks[0].clone();
    let x_rot = assemble_from_parts(n, &x_block, &positions, &out.v);
    let direction = rotate(&x_rot, &q.transpose());
    let c_inner = trace_inner(&problem.c, &direction);

    let tau = ctx.cfg.branch;
    let near = |v: f64| v > tau / 10.0 && v < tau * 10.0;
    let low_confidence = near(t_star) || near(c_inner.abs());

    if t_star > tau {
        // Any dual optimum of the auxiliary pair has y1 >= y2 = t* > 0, and
        // c - A^T (y3/y1) is a relative-interior feasible slack.
        let y1 = out.y[0];
        if y1 <= tau {
            return Err(SdpError::ContractViolation(format!(
                "auxiliary dual multiplier y1 = {y1:.3e} not positive at t* = {t_star:.3e}"
            )));
        }
        let y_ri: Vec<f64> = out.y[2..2 + m].iter().map(|v| v / y1).collect();
        let s_ri = problem.slack(&y_ri);
        return Ok(StepOutcome::MinimalFaceFound { s_ri, y_ri, t_star });
    }
    if c_inner < -tau {
        return Ok(StepOutcome::Infeasible { direction, c_inner });
    }
    if c_inner > tau {
        return Err(SdpError::ContractViolation(format!(
            "auxiliary optimum has t* = {t_star:.3e} but <c, x*> = {c_inner:.3e} > 0"
        )));
    }

    // Confinement: descend to F cap {x*}^perp. Only the face block of x*
    // matters for the intersection, and it must be purified before its
    // eigenvectors define the new face: degenerate coordinates of the
    // auxiliary solution converge only like the square root of the gap, and
    // an eigenvector tilt of that size would skew every later step.
    //
    // Alternate between truncating sub-threshold eigenvalues of the face
    // block and re-projecting onto ker A until stationary. The true
    // direction is a fixed point. The <c, x> = 0 condition is deliberately
    // not projected on: it only holds to branch tolerance (c may carry the
    // error of an upstream optimal value), and enforcing a near-dependent
    // constraint would collapse the projection space.
    let kernel_space = MatrixSubspace::from_generators(n, &a_rot, ctx.cfg.sub).complement();
    let mut x_pure = x_rot.clone();
    for _ in 0..500 {
        let block = pi_upper(&x_pure, r);
        let (lam, u) = linalg::eig_sym(&block)?;
        let lam_max = lam.first().cloned().unwrap_or(0.0).max(0.0);
        let cut = 1e-4 * lam_max;
        let kept: Vec<f64> = lam.iter().map(|&v| if v > cut { v } else { 0.0 }).collect();
        let trunc_block = rotate(&SymMatrix::from_diag(&kept), &u.transpose());
        let reassembled = assemble_from_parts(
            n,
            &trunc_block,
            &positions,
            &off_face_coords(&x_pure, &positions),
        );
        let next = kernel_space.project(&reassembled);
        let step = next.sub(&x_pure).frob_norm();
        x_pure = next;
        if step <= 1e-14 * (1.0 + x_pure.frob_norm()) {
            break;
        }
    }
    let block_pure = pi_upper(&x_pure, r);
    let (lam, u) = linalg::eig_sym(&block_pure)?;
    let lam_max = lam.first().cloned().unwrap_or(0.0);
    let rank_tau = ctx
        .cfg
        .rank_threshold(lam_max.abs())
        .max(1e-4 * lam_max.abs())
        .max(10.0 * ctx.cfg.branch);
    let rho = lam.iter().filter(|&&v| v > rank_tau).count();
    if rho == 0 || block_pure.trace() < 0.25 {
        return Err(SdpError::ContractViolation(format!(
            "reducing direction degenerated during purification (trace {:.3e})",
            block_pure.trace()
        )));
    }
    // Exactly zero the kernel eigenvalues so the stored certificate is
    // orthogonal to the new face.
    let mut kept = vec![0.0; r];
    kept[..rho].copy_from_slice(&lam[..rho]);
    let purified_block = rotate(&SymMatrix::from_diag(&kept), &u.transpose());
    let x_rot_pure = assemble_from_parts(
        n,
        &purified_block,
        &positions,
        &off_face_coords(&x_pure, &positions),
    );
    let direction = rotate(&x_rot_pure, &q.transpose());
    let c_inner = trace_inner(&problem.c, &direction);

    // Kernel-first column order: the surviving part of the face leads.
    let perm: Vec<usize> = (rho..r).chain(0..rho).collect();
    let u_kernel_first = u.permute_columns(&perm);
    let q_next = q.compose(&u_kernel_first.extend_identity(n - r));
    let new_face = Face::new(q_next, r - rho);
    Ok(StepOutcome::SmallerFace {
        direction,
        c_inner,
        new_face,
        low_confidence,
    })
}

/// Full facial reduction: iterates [`fr_step`], shrinking the face after
/// every confinement step, until the minimal face is found or infeasibility
/// is certified. Terminates in at most `n` reduction steps because each one
/// strictly drops the face rank.
pub fn facial_reduce(problem: &SdpProblem, ctx: &mut SolveContext) -> Result<FrOutcome> {
    let mut face = problem.face.clone();
    let mut steps: Vec<ReductionStep> = Vec::new();
    let mut flags = Vec::new();
    let iter_cap = problem.n() + 2;
    for _ in 0..iter_cap {
        if face.rank() == 0 {
            return Ok(reduce_on_zero_face(problem, face, steps, flags));
        }
        match fr_step(problem, &face, ctx)? {
            StepOutcome::MinimalFaceFound { s_ri, y_ri, .. } => {
                return Ok(FrOutcome {
                    face: Some(face),
                    s_ri: Some(s_ri),
                    y_ri: Some(y_ri),
                    chain: ReducingChain {
                        steps,
                        terminal: ChainTerminal::MinimalFaceFound,
                    },
                    flags,
                });
            }
            StepOutcome::Infeasible { direction, c_inner } => {
                steps.push(ReductionStep {
                    direction,
                    face_before: face.clone(),
                    face_after: None,
                    c_inner,
                    low_confidence: false,
                });
                return Ok(FrOutcome {
                    face: None,
                    s_ri: None,
                    y_ri: None,
                    chain: ReducingChain {
                        steps,
                        terminal: ChainTerminal::InfeasibleDetected,
                    },
                    flags,
                });
            }
            StepOutcome::SmallerFace {
                direction,
                c_inner,
                new_face,
                low_confidence,
            } => {
                if low_confidence {
                    flags.push(format!(
                        "low-confidence: reduction step {} branched near the threshold",
                        steps.len()
                    ));
                }
                steps.push(ReductionStep {
                    direction,
                    face_before: face.clone(),
                    face_after: Some(new_face.clone()),
                    c_inner,
                    low_confidence,
                });
                face = new_face;
            }
        }
    }
    Err(SdpError::ContractViolation(
        "facial reduction did not terminate within the rank bound".into(),
    ))
}

/// Face `{0}`: the dual is feasible iff `A^T y = c` has a solution, in which
/// case the only feasible slack is 0. Pure linear algebra, no oracle.
fn reduce_on_zero_face(
    problem: &SdpProblem,
    face: Face,
    mut steps: Vec<ReductionStep>,
    flags: Vec<String>,
) -> FrOutcome {
    let n = problem.n();
    let (y, resid_mat, resid_norm) = solve_adjoint_ls(&problem.a, &problem.c);
    let tol = 1e-9 * (1.0 + problem.c.frob_norm());
    if resid_norm <= tol {
        FrOutcome {
            face: Some(face),
            s_ri: Some(SymMatrix::zeros(n)),
            y_ri: Some(y),
            chain: ReducingChain {
                steps,
                terminal: ChainTerminal::MinimalFaceFound,
            },
            flags,
        }
    } else {
        // The least-squares residual is orthogonal to range A^T, so after
        // scaling it is a reducing direction with <c, x> = -1 exactly. It
        // lies in the dual of the face {0}, which is all of S^n.
        let scale = -1.0 / (resid_norm * resid_norm);
        let direction = resid_mat.scale(scale);
        let c_inner = trace_inner(&problem.c, &direction);
        steps.push(ReductionStep {
            direction,
            face_before: face,
            face_after: None,
            c_inner,
            low_confidence: false,
        });
        FrOutcome {
            face: None,
            s_ri: None,
            y_ri: None,
            chain: ReducingChain {
                steps,
                terminal: ChainTerminal::InfeasibleDetected,
            },
            flags,
        }
    }
}

/// Least-squares solve of `A^T y = c`; returns `(y, c - A^T y, |c - A^T y|)`.
fn solve_adjoint_ls(a: &LinearMapA, c: &SymMatrix) -> (Vec<f64>, SymMatrix, f64) {
    let coef = linalg::lstsq_express(c, a.mats(), f64::INFINITY).unwrap_or_default();
    let y = if coef.len() == a.m() {
        coef
    } else {
        vec![0.0; a.m()]
    };
    let resid = c.sub(&a.adjoint(&y));
    let norm = resid.frob_norm();
    (y, resid, norm)
}

/// Least-squares feasibility of the linear system `<A_i, x> = b_i` alone
/// (no cone constraint); `None` when inconsistent.
pub fn check_linear_feasibility(
    a: &LinearMapA,
    b: &[f64],
    cfg: &ToleranceConfig,
) -> Option<SymMatrix> {
    assert_eq!(
        a.m(),
        b.len(),
        "dimension mismatch in check_linear_feasibility"
    );
    if a.m() == 0 {
        return Some(SymMatrix::zeros(a.n()));
    }
    let (x, resid) = solve_forward_ls(a, b);
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if resid <= cfg.sub.max(1e-9) * (1.0 + bnorm) {
        Some(x)
    } else {
        None
    }
}

/// Least squares on the forward map: minimizes `|A x - b|` over S^n.
fn solve_forward_ls(a: &LinearMapA, b: &[f64]) -> (SymMatrix, f64) {
    let n = a.n();
    let d = linalg::svec_dim(n);
    let m = a.m();
    let mut mat = nalgebra::DMatrix::zeros(m, d);
    for (i, ai) in a.mats().iter().enumerate() {
        for (j, v) in svec(ai).into_iter().enumerate() {
            mat[(i, j)] = v;
        }
    }
    let rhs = nalgebra::DVector::from_column_slice(b);
    let svd = mat.clone().svd(true, true);
    let sol = svd
        .solve(&rhs, 1e-13)
        .unwrap_or_else(|_| nalgebra::DVector::zeros(d));
    let resid = (&mat * &sol - &rhs).norm();
    let coords: Vec<f64> = sol.iter().cloned().collect();
    (linalg::smat(n, &coords), resid)
}

/// Distinguishes weak from strong infeasibility once [`facial_reduce`]
/// reported an empty minimal face: the dual is strongly infeasible iff the
/// witness system `<c, x> = -1, A x = 0, x PSD` is feasible, which is itself
/// decided by one more facial reduction run.
pub fn classify_infeasibility(
    problem: &SdpProblem,
    ctx: &mut SolveContext,
) -> Result<(FeasStatus, Option<StrongInfeasibilityWitness>)> {
    let n = problem.n();
    // Affine space {x : A x = 0, <c, x> = -1} in dual form.
    let mut rows: Vec<SymMatrix> = problem.a.mats().to_vec();
    rows.push(problem.c.clone());
    let mut rhs = vec![0.0; problem.m()];
    rhs.push(-1.0);
    let row_map = LinearMapA::new(n, rows.clone())?;
    let x0 = match check_linear_feasibility(&row_map, &rhs, &ctx.cfg) {
        Some(x0) => x0,
        // Not even the linear part is satisfiable: no witness exists.
        None => return Ok((FeasStatus::WeakInfeasible, None)),
    };
    let null = MatrixSubspace::from_generators(n, &rows, ctx.cfg.sub).complement();
    let gens: Vec<SymMatrix> = null.basis().iter().map(|b| b.scale(-1.0)).collect();
    let mfree = gens.len();
    let witness_problem = SdpProblem::dual_form(LinearMapA::new(n, gens)?, vec![0.0; mfree], x0)?;
    let fr = facial_reduce(&witness_problem, ctx)?;
    match fr.s_ri {
        Some(witness) => Ok((
            FeasStatus::StrongInfeasible,
            Some(StrongInfeasibilityWitness::Dual { x: witness }),
        )),
        None => Ok((FeasStatus::WeakInfeasible, None)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{verify_certificate, Certificate};

    fn ctx() -> SolveContext {
        SolveContext::new(ToleranceConfig::default())
    }

    /// n = 1, c = [-1], no constraints: the auxiliary problem is a one
    /// variable LP whose constraints force w = x and x + w = 1, so the
    /// optimum is t* = 0, x* = 1/2, <c, x*> = -1/2: infeasible.
    #[test]
    fn step_detects_scalar_infeasibility() {
        let p = SdpProblem::dual_form(
            LinearMapA::new(1, vec![]).unwrap(),
            vec![],
            SymMatrix::from_diag(&[-1.0]),
        )
        .unwrap();
        let out = fr_step(&p, &Face::full(1), &mut ctx()).unwrap();
        match out {
            StepOutcome::Infeasible { direction, c_inner } => {
                assert!((direction.get(0, 0) - 0.5).abs() < 1e-6);
                assert!((c_inner + 0.5).abs() < 1e-6);
            }
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    /// Slack set {diag(y, 0)}: one confinement step with direction
    /// proportional to diag(0, 1); the new face has rank 1.
    #[test]
    fn step_confines_to_smaller_face() {
        let p = SdpProblem::dual_form(
            LinearMapA::new(2, vec![SymMatrix::from_diag(&[-1.0, 0.0])]).unwrap(),
            vec![0.0],
            SymMatrix::zeros(2),
        )
        .unwrap();
        match fr_step(&p, &Face::full(2), &mut ctx()).unwrap() {
            StepOutcome::SmallerFace {
                direction,
                new_face,
                ..
            } => {
                assert_eq!(new_face.rank(), 1);
                assert!((direction.get(1, 1) - 1.0).abs() < 1e-6);
                assert!(direction.get(0, 0).abs() < 1e-6);
                assert!(new_face.contains(
                    &SymMatrix::from_diag(&[1.0, 0.0]),
                    &ToleranceConfig::default()
                ));
            }
            other => panic!("expected smaller face, got {other:?}"),
        }
    }

    fn dex_problem() -> SdpProblem {
        // maximize -y1 - y2 - y3 with slack
        // [[y1, 1, y2], [1, y2, 1], [y2, 1, y1+y2+y3]].
        let mut a1 = SymMatrix::zeros(3);
        a1.set_sym(0, 0, -1.0);
        a1.set_sym(2, 2, -1.0);
        let mut a2 = SymMatrix::zeros(3);
        a2.set_sym(1, 1, -1.0);
        a2.set_sym(0, 2, -1.0);
        a2.set_sym(2, 2, -1.0);
        let mut a3 = SymMatrix::zeros(3);
        a3.set_sym(2, 2, -1.0);
        let mut c = SymMatrix::zeros(3);
        c.set_sym(0, 1, 1.0);
        c.set_sym(1, 2, 1.0);
        SdpProblem::dual_form(
            LinearMapA::new(3, vec![a1, a2, a3]).unwrap(),
            vec![-1.0, -1.0, -1.0],
            c,
        )
        .unwrap()
    }

    /// The worked example is strongly feasible, so the very first step finds
    /// the minimal face (the whole cone) with a positive definite slack.
    #[test]
    fn step_on_strongly_feasible_example() {
        let p = dex_problem();
        match fr_step(&p, &Face::full(3), &mut ctx()).unwrap() {
            StepOutcome::MinimalFaceFound { s_ri, .. } => {
                assert!(linalg::min_eig(&s_ri) > 1e-6, "slack should be PD");
            }
            other => panic!("expected minimal face, got {other:?}"),
        }
    }

    #[test]
    fn reduce_on_strongly_feasible_takes_no_steps() {
        let p = dex_problem();
        let fr = facial_reduce(&p, &mut ctx()).unwrap();
        assert!(fr.is_feasible());
        assert_eq!(fr.face.as_ref().unwrap().rank(), 3);
        assert!(fr.chain.is_empty());
        let s = fr.s_ri.unwrap();
        let y = fr.y_ri.unwrap();
        assert!(p.slack(&y).sub(&s).frob_norm() < 1e-7);
    }

    /// Nested tower: slack(y1, y2) = [[y2, y1, 0], [y1, 0, 0], [0, 0, y1]].
    /// Feasibility forces y1 = 0 in two stages; the second reducing
    /// direction needs a nonzero off-face entry, exercising the free block.
    #[test]
    fn reduce_nested_tower_two_steps() {
        let mut a1 = SymMatrix::zeros(3);
        a1.set_sym(0, 1, -1.0);
        a1.set_sym(2, 2, -1.0);
        let a2 = SymMatrix::from_diag(&[-1.0, 0.0, 0.0]);
        let p = SdpProblem::dual_form(
            LinearMapA::new(3, vec![a1, a2]).unwrap(),
            vec![0.0, -1.0],
            SymMatrix::zeros(3),
        )
        .unwrap();
        let fr = facial_reduce(&p, &mut ctx()).unwrap();
        assert!(fr.is_feasible());
        assert_eq!(fr.face.as_ref().unwrap().rank(), 1);
        assert_eq!(fr.chain.len(), 2);
        // The minimal face is spanned by e1 e1^T.
        let e11 = SymMatrix::from_diag(&[1.0, 0.0, 0.0]);
        assert!(fr
            .face
            .as_ref()
            .unwrap()
            .contains(&e11, &ToleranceConfig::default()));
        // Chain verifies against the original data.
        let outcome = verify_certificate(
            &p,
            &Certificate::Chain(fr.chain),
            &ToleranceConfig::default(),
        );
        assert!(outcome.ok, "chain residuals: {:?}", outcome.residuals);
    }

    #[test]
    fn reduce_scalar_infeasible_chain_length_one() {
        let p = SdpProblem::dual_form(
            LinearMapA::new(1, vec![]).unwrap(),
            vec![],
            SymMatrix::from_diag(&[-1.0]),
        )
        .unwrap();
        let fr = facial_reduce(&p, &mut ctx()).unwrap();
        assert!(!fr.is_feasible());
        assert_eq!(fr.chain.len(), 1);
        assert_eq!(fr.chain.terminal, ChainTerminal::InfeasibleDetected);
    }

    #[test]
    fn classify_strong_infeasibility_with_witness() {
        // slack diag(-1, -y): never PSD, distance 1 from the cone.
        let p = SdpProblem::dual_form(
            LinearMapA::new(2, vec![SymMatrix::from_diag(&[0.0, 1.0])]).unwrap(),
            vec![0.0],
            SymMatrix::from_diag(&[-1.0, 0.0]),
        )
        .unwrap();
        let mut c = ctx();
        let fr = facial_reduce(&p, &mut c).unwrap();
        assert!(!fr.is_feasible());
        let (status, witness) = classify_infeasibility(&p, &mut c).unwrap();
        assert_eq!(status, FeasStatus::StrongInfeasible);
        let w = witness.unwrap();
        let outcome = verify_certificate(
            &p,
            &Certificate::Witness(w.clone()),
            &ToleranceConfig::default(),
        );
        assert!(outcome.ok, "witness residuals: {:?}", outcome.residuals);
        if let StrongInfeasibilityWitness::Dual { x } = &w {
            assert!(x.get(0, 0) > 0.5, "witness concentrates on e1");
        }
    }

    #[test]
    fn classify_weak_infeasibility() {
        // slack [[y, 1], [1, 0]]: never PSD but approaches the cone.
        let mut cmat = SymMatrix::zeros(2);
        cmat.set_sym(0, 1, 1.0);
        let p = SdpProblem::dual_form(
            LinearMapA::new(2, vec![SymMatrix::from_diag(&[-1.0, 0.0])]).unwrap(),
            vec![0.0],
            cmat,
        )
        .unwrap();
        let mut c = ctx();
        let fr = facial_reduce(&p, &mut c).unwrap();
        assert!(!fr.is_feasible(), "the 2x2 family is infeasible");
        let (status, witness) = classify_infeasibility(&p, &mut c).unwrap();
        assert_eq!(status, FeasStatus::WeakInfeasible);
        assert!(witness.is_none());
    }

    #[test]
    fn zero_face_feasible_when_c_in_range() {
        // c = A1 (indefinite), so the only feasible slack is 0 at y = 1;
        // the minimal face is {0}.
        let mut a1 = SymMatrix::zeros(2);
        a1.set_sym(0, 1, 1.0);
        let p = SdpProblem::dual_form(
            LinearMapA::new(2, vec![a1.clone()]).unwrap(),
            vec![1.0],
            a1.clone(),
        )
        .unwrap();
        let fr = facial_reduce(&p, &mut ctx()).unwrap();
        assert!(fr.is_feasible());
        assert_eq!(fr.face.as_ref().unwrap().rank(), 0);
        let y = fr.y_ri.unwrap();
        assert!(p.slack(&y).frob_norm() < 1e-7);
    }

    #[test]
    fn linear_feasibility_checks() {
        let a = LinearMapA::new(2, vec![]).unwrap();
        let x = check_linear_feasibility(&a, &[], &ToleranceConfig::default()).unwrap();
        assert_eq!(x.frob_norm(), 0.0);
        // <I, x> = 0 and <I, x> = 1 simultaneously: inconsistent.
        let a = LinearMapA::new(2, vec![SymMatrix::identity(2), SymMatrix::identity(2)]).unwrap();
        assert!(check_linear_feasibility(&a, &[0.0, 1.0], &ToleranceConfig::default()).is_none());
        // Constructed consistent system has a small residual.
        let mats = vec![
            SymMatrix::from_diag(&[1.0, 2.0]),
            SymMatrix::from_fn(2, |i, j| if i != j { 1.0 } else { 0.0 }),
        ];
        let a = LinearMapA::new(2, mats).unwrap();
        let x0 = SymMatrix::from_fn(2, |i, j| (i + j) as f64 * 0.5 + 0.25);
        let b = a.forward(&x0);
        let x = check_linear_feasibility(&a, &b, &ToleranceConfig::default()).unwrap();
        let resid: f64 = a
            .forward(&x)
            .iter()
            .zip(&b)
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt();
        assert!(resid <= 1e-9);
    }
}
