//! Optimal value of a dual strongly feasible SDP.
//!
//! After the objective is normalized so that maximizing one coordinate `y0`
//! is the goal, the span of the remaining constraint directions is
//! partitioned and the problem truncated past the partition. The truncation
//! keeps the optimal value; its primal side is either strongly infeasible
//! (then the value is +inf, with an improving-ray witness) or has an
//! interior point (then one oracle call returns the value, attained in the
//! truncation even when the input attains nothing).

use crate::facial_reduction::{check_linear_feasibility, facial_reduce, fr_step, StepOutcome};
use crate::linalg::{self, pi_lower, rotate, svec, SymMatrix};
use crate::model::{AffineYMap, LinearMapA, Result, SdpError, SdpProblem};
use crate::oracle::SolveContext;
use crate::partition::{build_partition, HyperFeasiblePartition};

/// A problem in reference form: maximize the first local coordinate subject
/// to `c - sum_i mats[i] y_i` PSD. `back` maps local coordinates to the
/// problem the normalization started from.
#[derive(Debug, Clone)]
pub struct DualRef {
    pub c: SymMatrix,
    pub mats: Vec<SymMatrix>,
    pub back: AffineYMap,
}

impl DualRef {
    pub fn n(&self) -> usize {
        self.c.dim()
    }

    pub fn slack(&self, y: &[f64]) -> SymMatrix {
        let mut s = self.c.clone();
        for (a, &yi) in self.mats.iter().zip(y) {
            s.axpy(-yi, a);
        }
        s
    }
}

/// Rewrites `max <b, v> : c - sum_i mats[i] v_i PSD` (with `b != 0`) into
/// reference form: the pivot is the largest-magnitude entry of `b`, the
/// objective becomes the new first coordinate `y0 = <b, v>`, and the other
/// directions are shifted so the slack set is unchanged.
pub fn normalize_objective(c: &SymMatrix, mats: &[SymMatrix], b: &[f64]) -> Result<DualRef> {
    assert_eq!(
        mats.len(),
        b.len(),
        "dimension mismatch in normalize_objective"
    );
    let m = b.len();
    let pivot = (0..m)
        .max_by(|&i, &j| b[i].abs().partial_cmp(&b[j].abs()).unwrap())
        .ok_or_else(|| SdpError::InvalidInput("normalize_objective requires b != 0".into()))?;
    let bp = b[pivot];
    if bp == 0.0 {
        return Err(SdpError::InvalidInput(
            "normalize_objective requires b != 0".into(),
        ));
    }
    let others: Vec<usize> = (0..m).filter(|&i| i != pivot).collect();
    let mut new_mats = Vec::with_capacity(m);
    new_mats.push(mats[pivot].scale(1.0 / bp));
    for &i in &others {
        let mut a = mats[i].clone();
        a.axpy(-b[i] / bp, &mats[pivot]);
        new_mats.push(a);
    }
    // v_pivot = (y0 - sum_k b_{i_k} u_k) / b_p, v_{i_k} = u_k.
    let mut mat = vec![vec![0.0; m]; m];
    mat[pivot][0] = 1.0 / bp;
    for (k, &i) in others.iter().enumerate() {
        mat[pivot][1 + k] = -b[i] / bp;
        mat[i][1 + k] = 1.0;
    }
    Ok(DualRef {
        c: c.clone(),
        mats: new_mats,
        back: AffineYMap {
            mat,
            off: vec![0.0; m],
        },
    })
}

/// Everything the downstream recovery stage needs once the value is finite.
/// All matrix data is in the partition-rotated frame; the local dual
/// variable space is shared with [`DualRef`].
#[derive(Debug, Clone)]
pub struct ValuationArtifacts {
    pub theta: f64,
    /// Attained optimum of the truncated problem.
    pub y_opt: Vec<f64>,
    /// Interior point of the truncated problem (trailing slack block PD).
    pub y_interior: Vec<f64>,
    pub partition: Option<HyperFeasiblePartition>,
    pub c_rot: SymMatrix,
    pub mats_rot: Vec<SymMatrix>,
    pub s_cut: usize,
}

/// Value computation outcome.
#[derive(Debug, Clone)]
pub enum ValueOutcome {
    /// The truncated primal is strongly infeasible: the value is +inf and
    /// `ray` improves the truncated dual indefinitely. `small_problem`
    /// carries the truncation the ray certifies against; when the ray slack
    /// direction is PSD as a full matrix it also lifts to the input.
    Unbounded {
        ray: Vec<f64>,
        small_problem: SdpProblem,
        ray_is_exact_for_ref: bool,
    },
    Finite(ValuationArtifacts),
}

/// Computes the optimal value of a strongly feasible reference-form problem.
pub fn reduce_and_value(dref: &DualRef, ctx: &mut SolveContext) -> Result<ValueOutcome> {
    let r = dref.n();
    let mprime = dref.mats.len();
    assert!(
        mprime >= 1,
        "reference form has at least the objective direction"
    );

    // Partition the span of the non-objective directions.
    let gens: Vec<SymMatrix> = dref.mats[1..].to_vec();
    let partition = if gens.is_empty() {
        None
    } else {
        build_partition(r, &gens, ctx)?
    };
    let (c_rot, mats_rot, s_cut) = match &partition {
        Some(part) => {
            let p = &part.p;
            (
                rotate(&dref.c, p),
                dref.mats.iter().map(|a| rotate(a, p)).collect::<Vec<_>>(),
                part.s(),
            )
        }
        None => (dref.c.clone(), dref.mats.clone(), 0),
    };

    // Truncated pair: maximize y0 s.t. trailing block of the slack is PSD.
    let small_mats: Vec<SymMatrix> = mats_rot.iter().map(|a| pi_lower(a, s_cut)).collect();
    let small_c = pi_lower(&c_rot, s_cut);
    let res_n = r - s_cut;
    let mut b_small = vec![0.0; mprime];
    b_small[0] = 1.0;

    // Strong infeasibility of the truncated primal, in two stages.
    // Stage 1: the linear system <M_1, x> = 1, <M_j, x> = 0 alone.
    let small_map = LinearMapA::new(res_n, small_mats.clone())?;
    if check_linear_feasibility(&small_map, &b_small, &ctx.cfg).is_none() {
        // The objective row depends on the others: project it onto the
        // kernel of y -> sum_i y_i M_i to expose the improving ray.
        let ray = kernel_ray(&small_mats, res_n).ok_or_else(|| {
            SdpError::ContractViolation("inconsistent truncated system without a kernel ray".into())
        })?;
        return Ok(make_unbounded(dref, small_map, b_small, small_c, ray));
    }
    // Stage 2: an improving ray y with y_1 = 1 and -sum y_i M_i PSD. Its
    // existence is itself a feasibility problem handled by facial
    // reduction: parameterize y = e_1 + (0, z) and ask for a PSD slack.
    if res_n == 0 {
        // The linear stage is always inconsistent over S^0.
        unreachable!("trace over S^0 cannot equal 1");
    }
    let ray_c = small_mats[0].scale(-1.0);
    let ray_gens: Vec<SymMatrix> = small_mats[1..].to_vec();
    let ray_problem = SdpProblem::dual_form(
        LinearMapA::new(res_n, ray_gens)?,
        vec![0.0; mprime - 1],
        ray_c,
    )?;
    let fr = facial_reduce(&ray_problem, ctx)?;
    if let Some(z) = fr.y_ri {
        let mut ray = vec![1.0];
        ray.extend(z);
        return Ok(make_unbounded(dref, small_map, b_small, small_c, ray));
    }

    // Neither test fired: the truncated primal has an interior point, so
    // the pair is strongly feasible on both sides and the oracle applies.
    // The refined solve buys extra digits on theta; the attainment stage
    // pins an affine space at exactly this value and is sensitive to its
    // error.
    let small_problem = SdpProblem::dual_form(small_map, b_small, small_c)?;
    let comp = crate::oracle::CompositeProblem {
        dims: vec![res_n],
        nfree: 0,
        a_cone: small_problem
            .a
            .mats()
            .iter()
            .map(|a| crate::oracle::BlockSym {
                blocks: vec![a.clone()],
            })
            .collect(),
        a_free: vec![vec![]; mprime],
        b: small_problem.b.clone(),
        c_cone: crate::oracle::BlockSym {
            blocks: vec![small_problem.c.clone()],
        },
        c_free: vec![],
    };
    let sol = crate::oracle::solve_refined(&comp, ctx, "value-small")?;
    let theta = sol.dual_obj;
    let y_opt = sol.y.clone();

    // Interior point of the truncated dual via a single reduction step;
    // the truncation is strongly feasible so the step ends immediately.
    let y_interior = match fr_step(&small_problem, &crate::model::Face::full(res_n), ctx)? {
        StepOutcome::MinimalFaceFound { y_ri, .. } => y_ri,
        _ => {
            return Err(SdpError::ContractViolation(
                "truncated dual failed to produce an interior point".into(),
            ));
        }
    };

    Ok(ValueOutcome::Finite(ValuationArtifacts {
        theta,
        y_opt,
        y_interior,
        partition,
        c_rot,
        mats_rot,
        s_cut,
    }))
}

fn make_unbounded(
    dref: &DualRef,
    small_map: LinearMapA,
    b_small: Vec<f64>,
    small_c: SymMatrix,
    ray: Vec<f64>,
) -> ValueOutcome {
    // The ray certifies against the truncation; when its slack direction is
    // PSD as a full matrix it is also an exact improving ray of the
    // reference problem (always true when nothing was truncated).
    let mut full_dir = SymMatrix::zeros(dref.n());
    for (a, &yi) in dref.mats.iter().zip(&ray) {
        full_dir.axpy(-yi, a);
    }
    let exact = linalg::min_eig(&full_dir) >= -1e-9 * (1.0 + full_dir.frob_norm());
    let small_problem = SdpProblem::dual_form(small_map, b_small, small_c)
        .expect("truncated data is consistent by construction");
    ValueOutcome::Unbounded {
        ray,
        small_problem,
        ray_is_exact_for_ref: exact,
    }
}

/// Projection of `e_1` onto the kernel of `y -> sum_i y_i mats[i]`, scaled
/// so its first coordinate is 1; `None` if the projection vanishes.
fn kernel_ray(mats: &[SymMatrix], n: usize) -> Option<Vec<f64>> {
    let m = mats.len();
    let d = linalg::svec_dim(n);
    let mut t = nalgebra::DMatrix::zeros(d.max(1), m);
    for (j, a) in mats.iter().enumerate() {
        for (i, v) in svec(a).into_iter().enumerate() {
            t[(i, j)] = v;
        }
    }
    // Projector onto the kernel: I - V_r V_r^T over the row space.
    let svd = t.clone().svd(false, true);
    let vt = svd.v_t.as_ref()?;
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let cut = 1e-10 * smax.max(1.0);
    let rank = svd.singular_values.iter().filter(|&&sv| sv > cut).count();
    let mut ray = vec![0.0; m];
    ray[0] = 1.0;
    for row in 0..rank {
        let comp = vt[(row, 0)];
        for j in 0..m {
            ray[j] -= comp * vt[(row, j)];
        }
    }
    if ray[0].abs() < 1e-10 {
        return None;
    }
    let scale = 1.0 / ray[0];
    Some(ray.iter().map(|v| v * scale).collect())
}

/// Normalization identity diagnostics: slack and objective agreement
/// through `back` at a given local point.
pub fn normalization_consistent(
    dref: &DualRef,
    c: &SymMatrix,
    mats: &[SymMatrix],
    b: &[f64],
    y_local: &[f64],
) -> (f64, f64) {
    let v = dref.back.apply(y_local);
    let mut slack = c.clone();
    for (a, &vi) in mats.iter().zip(&v) {
        slack.axpy(-vi, a);
    }
    let slack_diff = dref.slack(y_local).sub(&slack).frob_norm();
    let obj_orig: f64 = b.iter().zip(&v).map(|(p, q)| p * q).sum();
    (slack_diff, (obj_orig - y_local[0]).abs())
}
