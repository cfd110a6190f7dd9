//! End-to-end orchestration: classify, value, decide attainment, recover.
//!
//! `complete_solve` runs the full sequence on a dual-form problem:
//!
//! 1. facial reduction finds the minimal face holding the feasible slacks,
//!    or certifies infeasibility (and then separates weak from strong,
//!    attaching eps-near-feasible generators to the weak case);
//! 2. the problem is rewritten over the minimal face, which restores dual
//!    strong feasibility without touching the optimal value;
//! 3. the value machinery decides +inf (with an improving ray) or produces
//!    the finite optimal value;
//! 4. a finite value is tested for attainment; attainment yields a
//!    maximal-rank solution, its absence an eps-optimal point generator.
//!
//! Every stage's certificates are carried into the final report, which is
//! checked against its own invariants before being returned.

use crate::config::ToleranceConfig;
use crate::facial_reduction::{check_linear_feasibility, classify_infeasibility, facial_reduce};
use crate::linalg::{self, pi_lower, rotate, svec, MatrixSubspace, OrthogonalMatrix, SymMatrix};
use crate::model::{
    AffineYMap, Attainment, Certificate, EpsOptimalHandle, EpsilonKind, EpsilonPoint, ExtReal,
    Face, FeasStatus, LinearMapA, NearFeasibleHandle, Orientation, RayScope, Result, SdpError,
    SdpProblem, Solution, SolveReport,
};
use crate::oracle::SolveContext;
use crate::partition::{build_partition, epsilon_near_feasible, HyperFeasiblePartition};
use crate::recovery::{attainment_check, epsilon_optimal, AttainOutcome};
use crate::valuation::{normalize_objective, reduce_and_value, ValueOutcome};

/// Per-call options for a complete solve.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub cfg: ToleranceConfig,
    /// Record every oracle subproblem in the report.
    pub trace: bool,
    /// Eps values to materialize into points (eps-optimal or
    /// eps-near-feasible depending on the outcome).
    pub eps_points: Vec<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        let cfg = ToleranceConfig::default();
        SolveOptions {
            eps_points: vec![cfg.epsilon_default],
            cfg,
            trace: false,
        }
    }
}

impl SolveOptions {
    pub fn with_cfg(cfg: ToleranceConfig) -> Self {
        SolveOptions {
            eps_points: vec![cfg.epsilon_default],
            cfg,
            trace: false,
        }
    }
}

fn at_step<T>(step: usize, label: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| SdpError::AtStep {
        step,
        label,
        source: Box::new(e),
    })
}

/// Completely solves a dual-form SDP: feasibility status, optimal value
/// (including the infinite cases), attainment, a maximal-rank solution or
/// eps-point generators, and verifiable certificates for every claim.
pub fn complete_solve(problem: &SdpProblem, opts: &SolveOptions) -> Result<SolveReport> {
    if problem.orientation != Orientation::DualForm {
        return Err(SdpError::InvalidInput(
            "complete_solve expects a dual-form problem; use solve_primal_form".into(),
        ));
    }
    opts.cfg.validate().map_err(SdpError::InvalidInput)?;
    let mut ctx = if opts.trace {
        SolveContext::with_trace(opts.cfg.clone())
    } else {
        SolveContext::new(opts.cfg.clone())
    };
    let report = complete_solve_inner(problem, opts, &mut ctx)?;
    Ok(report)
}

fn complete_solve_inner(
    problem: &SdpProblem,
    opts: &SolveOptions,
    ctx: &mut SolveContext,
) -> Result<SolveReport> {
    let n = problem.n();
    let mut certificates = Vec::new();
    let mut epsilon_points = Vec::new();
    let mut near_feasible_handle = None;
    let mut eps_optimal_handle = None;

    // Step 1: minimal face or infeasibility.
    let fr = at_step(1, "facial reduction", facial_reduce(problem, ctx))?;
    ctx.flags.extend(fr.flags.iter().cloned());
    if !fr.chain.is_empty() {
        certificates.push(Certificate::Chain(fr.chain.clone()));
    }

    let (status, value, attained, minimal_face_rank, solution) = if !fr.is_feasible() {
        // Step 1a: weak vs strong infeasibility.
        let (status, witness) = at_step(
            1,
            "infeasibility classification",
            classify_infeasibility(problem, ctx),
        )?;
        if let Some(w) = witness {
            certificates.push(Certificate::Witness(w));
        }
        // Step 1b: weak infeasibility comes with near-feasible generators.
        if status == FeasStatus::WeakInfeasible {
            match at_step(
                1,
                "near-feasible generator",
                build_near_feasible(problem, ctx),
            )? {
                Some(handle) => {
                    for &eps in &opts.eps_points {
                        match near_feasible_point(problem, &handle, eps, ctx) {
                            Ok(pt) => epsilon_points.push(pt),
                            Err(e) => ctx.flags.push(format!(
                                "contract-violation: near-feasible point at eps {eps} failed: {e}"
                            )),
                        }
                    }
                    near_feasible_handle = Some(handle);
                }
                None => ctx.flags.push(
                    "contract-violation: weakly infeasible problem without a partition".into(),
                ),
            }
        }
        (
            status,
            ExtReal::NegInf,
            Attainment::NotApplicable,
            None,
            None,
        )
    } else {
        let face = fr.face.clone().unwrap();
        let s_ri = fr.s_ri.clone().unwrap();
        let y_ri = fr.y_ri.clone().unwrap();
        let status = if face.is_full() {
            FeasStatus::StrongFeasible
        } else {
            FeasStatus::WeakFeasible
        };
        let rank = face.rank();

        if rank == 0 {
            // Over the face {0} the dual reduces to linear algebra on the
            // affine set {y : A^T y = c}.
            let (value, attained, sol, ray) =
                at_step(2, "zero-face value", value_on_zero_face(problem, &y_ri))?;
            if let Some(ray) = ray {
                certificates.push(Certificate::ImprovingRay {
                    y: ray,
                    scope: RayScope::Original,
                });
            }
            (status, value, attained, Some(0), sol)
        } else {
            // Step 2: rewrite over the minimal face. The feasible point from
            // the reduction doubles as the particular solution of the
            // off-face equality system.
            let reform = at_step(
                2,
                "face reformulation",
                reformulate_onto_face(problem, &face, &y_ri, &s_ri, ctx),
            )?;

            let bnorm = problem.b.iter().map(|v| v * v).sum::<f64>().sqrt();
            let b_red_norm = reform.b.iter().map(|v| v * v).sum::<f64>().sqrt();
            if b_red_norm <= 1e-10 * (1.0 + bnorm) {
                // Objective constant on the (nonempty) feasible set: the
                // value offset is the value, attained at the
                // relative-interior point, which has maximal rank among all
                // feasible (= optimal) slacks.
                let rank_s = linalg::numeric_rank(&s_ri, &ctx.cfg);
                let sol = Solution {
                    y: y_ri.clone(),
                    slack: s_ri.clone(),
                    objective: reform.offset,
                    rank: rank_s,
                };
                (
                    status,
                    ExtReal::finite(reform.offset),
                    Attainment::Yes,
                    Some(rank),
                    Some(sol),
                )
            } else {
                // Step 3: normalize and compute the value.
                let dref = at_step(
                    3,
                    "objective normalization",
                    normalize_objective(&reform.c, &reform.mats, &reform.b),
                )?;
                match at_step(3, "value computation", reduce_and_value(&dref, ctx))? {
                    ValueOutcome::Unbounded {
                        ray,
                        small_problem,
                        ray_is_exact_for_ref,
                    } => {
                        let cert = if ray_is_exact_for_ref {
                            let v_dir = apply_linear(&dref.back, &ray);
                            let y_dir = apply_linear(&reform.map, &v_dir);
                            Certificate::ImprovingRay {
                                y: y_dir,
                                scope: RayScope::Original,
                            }
                        } else {
                            Certificate::ImprovingRay {
                                y: ray,
                                scope: RayScope::Reduced {
                                    problem: Box::new(small_problem),
                                },
                            }
                        };
                        certificates.push(cert);
                        (
                            status,
                            ExtReal::PosInf,
                            Attainment::NotApplicable,
                            Some(rank),
                            None,
                        )
                    }
                    ValueOutcome::Finite(art) => {
                        let theta = reform.offset + art.theta;
                        // Step 4: attainment and recovery.
                        match at_step(
                            4,
                            "attainment check",
                            attainment_check(&dref, art.theta, ctx),
                        )? {
                            AttainOutcome::Attained {
                                y_local,
                                slack: slack_local,
                            } => {
                                let v = dref.back.apply(&y_local);
                                let y_orig = reform.map.apply(&v);
                                let slack_orig = problem.slack(&y_orig);
                                let lift_resid =
                                    face.restrict(&slack_orig).sub(&slack_local).frob_norm();
                                if lift_resid > 1e-6 * (1.0 + slack_local.frob_norm()) {
                                    ctx.flags.push(format!(
                                        "contract-violation: lifted solution mismatch {lift_resid:.3e}"
                                    ));
                                }
                                let sol = Solution {
                                    objective: dot(&problem.b, &y_orig),
                                    rank: linalg::numeric_rank(&slack_orig, &ctx.cfg),
                                    y: y_orig,
                                    slack: slack_orig,
                                };
                                (
                                    status,
                                    ExtReal::finite(theta),
                                    Attainment::Yes,
                                    Some(rank),
                                    Some(sol),
                                )
                            }
                            AttainOutcome::Unattained => {
                                let to_original = compose_maps(&reform.map, &dref.back);
                                let handle = EpsOptimalHandle {
                                    c: art.c_rot.clone(),
                                    mats: art.mats_rot.clone(),
                                    s_cut: art.s_cut,
                                    dirs: art
                                        .partition
                                        .as_ref()
                                        .map(|p| p.dirs.clone())
                                        .unwrap_or_default(),
                                    dir_coeffs: art
                                        .partition
                                        .as_ref()
                                        .map(|p| p.dir_coeffs.clone())
                                        .unwrap_or_default(),
                                    blocks: art
                                        .partition
                                        .as_ref()
                                        .map(|p| p.blocks.clone())
                                        .unwrap_or_default(),
                                    y_opt: art.y_opt.clone(),
                                    y_interior: art.y_interior.clone(),
                                    theta_local: art.theta,
                                    to_original,
                                    value_offset: reform.offset,
                                };
                                for &eps in &opts.eps_points {
                                    match eps_optimal_point(problem, &handle, eps, &ctx.cfg) {
                                        Ok(pt) => epsilon_points.push(pt),
                                        Err(e) => ctx.flags.push(format!(
                                            "contract-violation: eps-optimal point at eps {eps} failed: {e}"
                                        )),
                                    }
                                }
                                eps_optimal_handle = Some(handle);
                                (
                                    status,
                                    ExtReal::finite(theta),
                                    Attainment::No,
                                    Some(rank),
                                    None,
                                )
                            }
                        }
                    }
                }
            }
        }
    };

    let mut report = SolveReport {
        status,
        value,
        attained,
        minimal_face_rank,
        solution,
        certificates,
        epsilon_points,
        near_feasible_handle,
        eps_optimal_handle,
        flags: std::mem::take(&mut ctx.flags),
        trace: ctx.trace.clone(),
        config: opts.cfg.clone(),
    };
    let _ = n;
    for issue in report.check_consistency(Some(problem)) {
        report
            .flags
            .push(format!("contract-violation: report inconsistency: {issue}"));
    }
    Ok(report)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Applies only the linear part of an affine map (for rays/directions).
fn apply_linear(map: &AffineYMap, dir: &[f64]) -> Vec<f64> {
    map.mat
        .iter()
        .map(|row| row.iter().zip(dir).map(|(a, b)| a * b).sum())
        .collect()
}

fn compose_maps(outer: &AffineYMap, inner: &AffineYMap) -> AffineYMap {
    outer.compose(inner)
}

/// The data of a problem rewritten over a face: `y = map(v)` with the slack
/// over S^r given by `(c, mats)` and the objective `<b_red, v> + offset`.
struct FaceReform {
    c: SymMatrix,
    mats: Vec<SymMatrix>,
    b: Vec<f64>,
    offset: f64,
    map: AffineYMap,
}

/// Rewrites a dual-form problem onto a face of rank `r >= 1`: rotates, adds
/// the off-face vanishing equalities on `y`, eliminates them with a
/// null-space parameterization (the relative-interior point is the
/// particular solution) and projects the data onto the face block.
///
/// Plain projection without the equality step would enlarge the feasible
/// set: membership in the face constrains the off-face blocks to zero, and
/// ignoring that changes optimal values.
fn reformulate_onto_face(
    problem: &SdpProblem,
    face: &Face,
    y_particular: &[f64],
    s_ri: &SymMatrix,
    ctx: &mut SolveContext,
) -> Result<FaceReform> {
    let m = problem.m();
    let r = face.rank();
    let n = problem.n();
    assert!(r >= 1);
    let offset = dot(&problem.b, y_particular);
    if r == n {
        return Ok(FaceReform {
            c: problem.c.clone(),
            mats: problem.a.mats().to_vec(),
            b: problem.b.clone(),
            offset: 0.0,
            map: AffineYMap::identity(m),
        });
    }
    // Off-face equality rows E y = f, built from the rotated data.
    let q = face.q();
    let a_rot: Vec<SymMatrix> = problem.a.mats().iter().map(|a| rotate(a, q)).collect();
    let positions: Vec<(usize, usize)> = {
        let mut out = Vec::new();
        for i in 0..n {
            for j in i..n {
                if j >= r {
                    out.push((i, j));
                }
            }
        }
        out
    };
    let coords = |mat: &SymMatrix| -> Vec<f64> {
        positions
            .iter()
            .map(|&(i, j)| {
                if i == j {
                    mat.get(i, j)
                } else {
                    std::f64::consts::SQRT_2 * mat.get(i, j)
                }
            })
            .collect()
    };
    let e_rows: Vec<Vec<f64>> = (0..positions.len())
        .map(|k| (0..m).map(|i| coords(&a_rot[i])[k]).collect())
        .collect();
    // The relative-interior point satisfies the equalities; double check.
    let off_resid = face.off_face_norm(&problem.slack(y_particular));
    if off_resid > 1e-6 * (1.0 + s_ri.frob_norm()) {
        ctx.flags.push(format!(
            "low-confidence: face particular solution leaves residual {off_resid:.3e}"
        ));
    }
    // Null space of E via SVD.
    let z_cols = null_space(&e_rows, m);
    let mprime = z_cols.len();
    let mut mats_red = Vec::with_capacity(mprime);
    let mut b_red = Vec::with_capacity(mprime);
    for zc in &z_cols {
        let combo = problem.a.adjoint(zc);
        mats_red.push(face.restrict(&combo));
        b_red.push(dot(&problem.b, zc));
    }
    let c_red = face.restrict(&problem.slack(y_particular));
    let map = AffineYMap {
        mat: (0..m)
            .map(|i| z_cols.iter().map(|zc| zc[i]).collect())
            .collect(),
        off: y_particular.to_vec(),
    };
    Ok(FaceReform {
        c: c_red,
        mats: mats_red,
        b: b_red,
        offset,
        map,
    })
}

/// Orthonormal basis of the null space of the row system.
fn null_space(rows: &[Vec<f64>], width: usize) -> Vec<Vec<f64>> {
    if rows.is_empty() {
        return (0..width)
            .map(|i| (0..width).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
    }
    let mut mat = nalgebra::DMatrix::zeros(rows.len(), width);
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            mat[(i, j)] = v;
        }
    }
    let svd = mat.svd(false, true);
    let vt = svd.v_t.as_ref().expect("svd v_t");
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let cut = 1e-10 * smax.max(1.0);
    let rank = svd.singular_values.iter().filter(|&&s| s > cut).count();
    (rank..vt.nrows())
        .map(|row| (0..width).map(|j| vt[(row, j)]).collect())
        .collect()
}

/// Value of the dual over the face {0}: the feasible set is the affine
/// space `A^T y = c`, so the objective is unbounded along any kernel
/// direction it does not annihilate, and constant otherwise.
#[allow(clippy::type_complexity)]
fn value_on_zero_face(
    problem: &SdpProblem,
    y_particular: &[f64],
) -> Result<(ExtReal, Attainment, Option<Solution>, Option<Vec<f64>>)> {
    let m = problem.m();
    let n = problem.n();
    // Kernel of y -> A^T y.
    let rows: Vec<Vec<f64>> = {
        let d = linalg::svec_dim(n);
        (0..d)
            .map(|k| (0..m).map(|i| svec(problem.a.mat(i))[k]).collect())
            .collect()
    };
    let kernel = null_space(&rows, m);
    let g: Vec<f64> = kernel.iter().map(|k| dot(&problem.b, k)).collect();
    let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let bnorm = problem.b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if gnorm <= 1e-10 * (1.0 + bnorm) {
        let objective = dot(&problem.b, y_particular);
        let sol = Solution {
            y: y_particular.to_vec(),
            slack: SymMatrix::zeros(n),
            objective,
            rank: 0,
        };
        Ok((ExtReal::finite(objective), Attainment::Yes, Some(sol), None))
    } else {
        // Improving ray: combination of kernel directions with <b, ray> = 1
        // and A^T ray = 0 (so the slack never moves).
        let mut ray = vec![0.0; m];
        for (k, &gi) in kernel.iter().zip(&g) {
            for (r, &ki) in ray.iter_mut().zip(k) {
                *r += gi * ki;
            }
        }
        let scale = 1.0 / (gnorm * gnorm);
        let ray: Vec<f64> = ray.iter().map(|v| v * scale).collect();
        Ok((ExtReal::PosInf, Attainment::NotApplicable, None, Some(ray)))
    }
}

/// Builds the near-feasible generator for a weakly infeasible problem:
/// a partition of the span of all constraint directions plus a feasible
/// point of the truncated problem (obtained by one more facial reduction).
fn build_near_feasible(
    problem: &SdpProblem,
    ctx: &mut SolveContext,
) -> Result<Option<NearFeasibleHandle>> {
    let n = problem.n();
    let part = match build_partition(n, problem.a.mats(), ctx)? {
        Some(p) => p,
        None => return Ok(None),
    };
    let s = part.s();
    let c_rot = rotate(&problem.c, &part.p);
    let mats_rot: Vec<SymMatrix> = problem
        .a
        .mats()
        .iter()
        .map(|a| rotate(a, &part.p))
        .collect();
    let small = SdpProblem::dual_form(
        LinearMapA::new(n - s, mats_rot.iter().map(|a| pi_lower(a, s)).collect())?,
        vec![0.0; problem.m()],
        pi_lower(&c_rot, s),
    )?;
    let fr = facial_reduce(&small, ctx)?;
    let base_y = match fr.y_ri {
        Some(y) => y,
        None => {
            ctx.flags.push(
                "contract-violation: truncation of a weakly infeasible problem \
                 must be feasible"
                    .into(),
            );
            return Ok(None);
        }
    };
    Ok(Some(NearFeasibleHandle {
        rotation: part.p.clone(),
        dirs: part.dirs.clone(),
        dir_coeffs: part.dir_coeffs.clone(),
        blocks: part.blocks.clone(),
        base_y,
    }))
}

/// Materializes one eps-near-feasible point from a stored generator:
/// a point of the affine slack space within `eps` of the PSD cone.
pub fn near_feasible_point(
    problem: &SdpProblem,
    handle: &NearFeasibleHandle,
    eps: f64,
    ctx: &mut SolveContext,
) -> Result<EpsilonPoint> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(SdpError::InvalidInput("eps must be positive".into()));
    }
    let part = HyperFeasiblePartition {
        p: OrthogonalMatrix::identity(problem.n()),
        dirs: handle.dirs.clone(),
        dir_coeffs: handle.dir_coeffs.clone(),
        blocks: handle.blocks.clone(),
    };
    let c_rot = rotate(&problem.c, &handle.rotation);
    let mats_rot: Vec<SymMatrix> = problem
        .a
        .mats()
        .iter()
        .map(|a| rotate(a, &handle.rotation))
        .collect();
    let mut z = c_rot.clone();
    for (a, &yi) in mats_rot.iter().zip(&handle.base_y) {
        z.axpy(-yi, a);
    }
    let (moved, alphas) = epsilon_near_feasible(&z, &part, eps, ctx)?;
    // Shift y so the moved slack is exactly slack(y_eps) in rotated
    // coordinates: dirs[i] = sum_j coeffs[j] * mats_rot[j].
    let mut y_eps = handle.base_y.clone();
    for (i, &alpha) in alphas.iter().enumerate() {
        for (j, &coef) in handle.dir_coeffs[i].iter().enumerate() {
            y_eps[j] -= alpha * coef;
        }
    }
    let mut slack_check = c_rot.clone();
    for (a, &yi) in mats_rot.iter().zip(&y_eps) {
        slack_check.axpy(-yi, a);
    }
    let affine_residual = slack_check.sub(&moved).frob_norm();
    // Back to original coordinates for the reported point.
    let point = rotate(&moved, &handle.rotation.transpose());
    Ok(EpsilonPoint {
        kind: EpsilonKind::NearFeasible,
        eps,
        objective: dot(&problem.b, &y_eps),
        slack_min_eig: linalg::min_eig(&point),
        dist_to_psd: linalg::dist_to_psd(&point),
        affine_residual,
        y: y_eps,
        point,
    })
}

/// Materializes one eps-optimal feasible point from a stored generator.
pub fn eps_optimal_point(
    problem: &SdpProblem,
    handle: &EpsOptimalHandle,
    eps: f64,
    cfg: &ToleranceConfig,
) -> Result<EpsilonPoint> {
    let art = crate::valuation::ValuationArtifacts {
        theta: handle.theta_local,
        y_opt: handle.y_opt.clone(),
        y_interior: handle.y_interior.clone(),
        partition: if handle.dirs.is_empty() {
            None
        } else {
            Some(HyperFeasiblePartition {
                p: OrthogonalMatrix::identity(handle.c.dim()),
                dirs: handle.dirs.clone(),
                dir_coeffs: handle.dir_coeffs.clone(),
                blocks: handle.blocks.clone(),
            })
        },
        c_rot: handle.c.clone(),
        mats_rot: handle.mats.clone(),
        s_cut: handle.s_cut,
    };
    let pt = epsilon_optimal(&art, eps, cfg)?;
    let y_orig = handle.to_original.apply(&pt.y_local);
    let point = problem.slack(&y_orig);
    Ok(EpsilonPoint {
        kind: EpsilonKind::EpsOptimal,
        eps,
        objective: dot(&problem.b, &y_orig),
        slack_min_eig: linalg::min_eig(&point),
        dist_to_psd: linalg::dist_to_psd(&point),
        affine_residual: 0.0,
        y: y_orig,
        point,
    })
}

/// Solves a primal-form SDP `inf <c, x> : A x = b, x PSD` by treating it as
/// the dual form of its own data: the affine space `{x : A x = b}` is
/// parameterized and handed to [`complete_solve`], and the report fields
/// are relabeled with primal conventions (value +inf when infeasible; the
/// recovered matrix point rides in `solution.slack`).
pub fn solve_primal_form(problem: &SdpProblem, opts: &SolveOptions) -> Result<SolveReport> {
    if problem.orientation != Orientation::PrimalForm {
        return Err(SdpError::InvalidInput(
            "solve_primal_form expects a primal-form problem".into(),
        ));
    }
    let n = problem.n();
    // Inconsistent linear part means strong infeasibility by convention,
    // with a Farkas witness from the least-squares residual.
    let x0 = match check_linear_feasibility(&problem.a, &problem.b, &opts.cfg) {
        Some(x0) => x0,
        None => {
            let witness = linear_farkas_ray(problem);
            let mut report = SolveReport {
                status: FeasStatus::StrongInfeasible,
                value: ExtReal::PosInf,
                attained: Attainment::NotApplicable,
                minimal_face_rank: None,
                solution: None,
                certificates: witness
                    .map(|y| {
                        vec![Certificate::Witness(
                            crate::model::StrongInfeasibilityWitness::Primal { y },
                        )]
                    })
                    .unwrap_or_default(),
                epsilon_points: vec![],
                near_feasible_handle: None,
                eps_optimal_handle: None,
                flags: vec![],
                trace: None,
                config: opts.cfg.clone(),
            };
            if report.certificates.is_empty() {
                report
                    .flags
                    .push("contract-violation: inconsistent system without a Farkas ray".into());
            }
            return Ok(report);
        }
    };
    let nullbasis = MatrixSubspace::from_generators(n, problem.a.mats(), opts.cfg.sub).complement();
    let gens: Vec<SymMatrix> = nullbasis.basis().iter().map(|g| g.scale(-1.0)).collect();
    let b_dz: Vec<f64> = nullbasis
        .basis()
        .iter()
        .map(|g| -linalg::trace_inner(&problem.c, g))
        .collect();
    let mz = gens.len();
    let dualized = SdpProblem::dual_form(LinearMapA::new(n, gens)?, b_dz, x0.clone())?;
    let inner = complete_solve(&dualized, opts)?;

    // Relabel: theta_P = <c, x0> - theta_dz, statuses carried over (the
    // feasible sets are literally the same set of matrices).
    let cx0 = linalg::trace_inner(&problem.c, &x0);
    let value = match inner.value {
        ExtReal::PosInf => ExtReal::NegInf,
        ExtReal::NegInf => ExtReal::PosInf,
        f => ExtReal::finite(cx0 - f.as_finite().unwrap()),
    };
    let solution = inner.solution.as_ref().map(|s| Solution {
        y: s.y.clone(),
        slack: s.slack.clone(),
        objective: cx0 - s.objective,
        rank: s.rank,
    });
    let epsilon_points = inner
        .epsilon_points
        .iter()
        .map(|p| EpsilonPoint {
            kind: p.kind,
            eps: p.eps,
            y: p.y.clone(),
            objective: cx0 - p.objective,
            slack_min_eig: p.slack_min_eig,
            dist_to_psd: p.dist_to_psd,
            affine_residual: p.affine_residual,
            point: p.point.clone(),
        })
        .collect();
    let _ = mz;
    Ok(SolveReport {
        status: inner.status,
        value,
        attained: inner.attained,
        minimal_face_rank: inner.minimal_face_rank,
        solution,
        certificates: inner.certificates,
        epsilon_points,
        near_feasible_handle: inner.near_feasible_handle,
        eps_optimal_handle: inner.eps_optimal_handle,
        flags: inner.flags,
        trace: inner.trace,
        config: inner.config,
    })
}

/// Farkas ray for an inconsistent linear system `A x = b`: the normalized
/// least-squares residual `y` has `sum_i y_i A_i = 0` and `<b, y> = 1`.
fn linear_farkas_ray(problem: &SdpProblem) -> Option<Vec<f64>> {
    let m = problem.m();
    let n = problem.n();
    let d = linalg::svec_dim(n);
    let mut mat = nalgebra::DMatrix::zeros(m, d);
    for (i, ai) in problem.a.mats().iter().enumerate() {
        for (j, v) in svec(ai).into_iter().enumerate() {
            mat[(i, j)] = v;
        }
    }
    let rhs = nalgebra::DVector::from_column_slice(&problem.b);
    let svd = mat.clone().svd(true, true);
    let sol = svd.solve(&rhs, 1e-13).ok()?;
    let resid = &rhs - &mat * &sol;
    let norm2 = resid.norm_squared();
    if norm2 <= 1e-18 {
        return None;
    }
    Some(resid.iter().map(|v| v / norm2).collect())
}

/// Rebuilds the problem a dual-form report's certificates verify against
/// when the input was primal-form (deterministic redualization).
pub fn dualized_problem(problem: &SdpProblem, cfg: &ToleranceConfig) -> Result<Option<SdpProblem>> {
    let x0 = match check_linear_feasibility(&problem.a, &problem.b, cfg) {
        Some(x0) => x0,
        None => return Ok(None),
    };
    let n = problem.n();
    let nullbasis = MatrixSubspace::from_generators(n, problem.a.mats(), cfg.sub).complement();
    let gens: Vec<SymMatrix> = nullbasis.basis().iter().map(|g| g.scale(-1.0)).collect();
    let b_dz: Vec<f64> = nullbasis
        .basis()
        .iter()
        .map(|g| -linalg::trace_inner(&problem.c, g))
        .collect();
    Ok(Some(SdpProblem::dual_form(
        LinearMapA::new(n, gens)?,
        b_dz,
        x0,
    )?))
}
