//! Problem and evidence data model: SDPs over faces of the PSD cone,
//! feasibility statuses, certificates and solve reports.
//!
//! Problems are stored in dual orientation internally
//!
//! ```text
//! sup  <b, y>   s.t.   c - sum_i A_i y_i  in  K
//! ```
//!
//! where `K` is a face of the PSD cone (the whole cone by default).
//! Primal-form inputs are handled by treating the primal as the dual of its
//! dual data; see `pipeline::solve_primal_form`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::ToleranceConfig;
use crate::linalg::{
    self, pi_upper, rotate, trace_inner, LinalgError, OrthogonalMatrix, SymMatrix,
};

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum SdpError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("interior point solver hit the iteration cap after {0} iterations")]
    MaxIterations(usize),
    #[error("Newton system unsolvable: {0}")]
    IllConditioned(String),
    #[error("empty face: {0}")]
    FaceEmpty(String),
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("pipeline step {step} ({label}): {source}")]
    AtStep {
        step: usize,
        label: &'static str,
        #[source]
        source: Box<SdpError>,
    },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SdpError>;

/// Extended real optimal value. An explicit three-case value, never a
/// floating sentinel, so report serialization is unambiguous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExtReal {
    #[serde(rename = "-inf")]
    NegInf,
    #[serde(rename = "+inf")]
    PosInf,
    #[serde(untagged)]
    Finite(FiniteValue),
}

/// Wrapper so `ExtReal` serializes as `{"finite": v}` or the strings
/// `"+inf"` / `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteValue {
    pub finite: f64,
}

impl ExtReal {
    pub fn finite(v: f64) -> Self {
        ExtReal::Finite(FiniteValue { finite: v })
    }

    pub fn as_finite(&self) -> Option<f64> {
        match self {
            ExtReal::Finite(FiniteValue { finite }) => Some(*finite),
            _ => None,
        }
    }
}

/// The four mutually exclusive feasibility categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeasStatus {
    #[serde(rename = "strong-feasible")]
    StrongFeasible,
    #[serde(rename = "weak-feasible")]
    WeakFeasible,
    #[serde(rename = "weak-infeasible")]
    WeakInfeasible,
    #[serde(rename = "strong-infeasible")]
    StrongInfeasible,
}

impl FeasStatus {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasStatus::StrongFeasible | FeasStatus::WeakFeasible)
    }
}

/// Attainment of the optimal value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Attainment {
    #[serde(rename = "yes")]
    Yes,
    #[serde(rename = "no")]
    No,
    #[serde(rename = "not-applicable")]
    NotApplicable,
}

/// The constraint map `A : S^n -> R^m`, `(A x)_i = <A_i, x>`, with adjoint
/// `A^T y = sum_i A_i y_i`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearMapA {
    n: usize,
    mats: Vec<SymMatrix>,
}

impl LinearMapA {
    pub fn new(n: usize, mats: Vec<SymMatrix>) -> Result<Self> {
        for (i, m) in mats.iter().enumerate() {
            if m.dim() != n {
                return Err(SdpError::DimensionMismatch(format!(
                    "constraint matrix {i} has dimension {}, expected {n}",
                    m.dim()
                )));
            }
        }
        Ok(LinearMapA { n, mats })
    }

    pub fn m(&self) -> usize {
        self.mats.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mats(&self) -> &[SymMatrix] {
        &self.mats
    }

    pub fn mat(&self, i: usize) -> &SymMatrix {
        &self.mats[i]
    }

    /// `(A x)_i = <A_i, x>`.
    pub fn forward(&self, x: &SymMatrix) -> Vec<f64> {
        self.mats.iter().map(|a| trace_inner(a, x)).collect()
    }

    /// `A^T y = sum_i A_i y_i`.
    pub fn adjoint(&self, y: &[f64]) -> SymMatrix {
        assert_eq!(y.len(), self.mats.len(), "adjoint length mismatch");
        let mut out = SymMatrix::zeros(self.n);
        for (a, &yi) in self.mats.iter().zip(y) {
            out.axpy(yi, a);
        }
        out
    }

    /// Rotates every constraint matrix by `q`.
    pub fn rotate(&self, q: &OrthogonalMatrix) -> LinearMapA {
        LinearMapA {
            n: self.n,
            mats: self.mats.iter().map(|a| rotate(a, q)).collect(),
        }
    }
}

/// A face of the PSD cone: `{ q diag(a, 0) q^T : a in S^r_+ }`.
///
/// `r = n` is the whole cone, `r = 0` the face `{0}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Face {
    q: OrthogonalMatrix,
    r: usize,
}

impl Face {
    pub fn full(n: usize) -> Self {
        Face {
            q: OrthogonalMatrix::identity(n),
            r: n,
        }
    }

    pub fn new(q: OrthogonalMatrix, r: usize) -> Self {
        assert!(r <= q.dim(), "face rank exceeds ambient dimension");
        Face { q, r }
    }

    pub fn n(&self) -> usize {
        self.q.dim()
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn q(&self) -> &OrthogonalMatrix {
        &self.q
    }

    pub fn is_full(&self) -> bool {
        self.r == self.q.dim()
    }

    pub fn is_zero(&self) -> bool {
        self.r == 0
    }

    /// `psi(x) = pi_r(q^T x q)`, the face coordinates of `x`.
    pub fn restrict(&self, x: &SymMatrix) -> SymMatrix {
        pi_upper(&rotate(x, &self.q), self.r)
    }

    /// Lifts `a` in S^r back to S^n: `q diag(a, 0) q^T`.
    pub fn lift(&self, a: &SymMatrix) -> SymMatrix {
        assert_eq!(a.dim(), self.r, "lift dimension mismatch");
        rotate(&linalg::embed_upper(a, self.n()), &self.q.transpose())
    }

    /// The canonical relative interior point `q diag(I_r, 0) q^T`.
    pub fn ri_point(&self) -> SymMatrix {
        self.lift(&SymMatrix::identity(self.r))
    }

    /// Face membership: the rotated matrix must vanish outside the leading
    /// `r x r` block and that block must be PSD.
    pub fn contains(&self, x: &SymMatrix, cfg: &ToleranceConfig) -> bool {
        self.off_face_norm(x) <= cfg.sub * (1.0 + x.frob_norm())
            && linalg::is_psd(&self.restrict(x), cfg)
    }

    /// Dual-face membership per the rotated block shape: only the leading
    /// block is constrained.
    pub fn dual_contains(&self, x: &SymMatrix, cfg: &ToleranceConfig) -> bool {
        linalg::is_psd(&self.restrict(x), cfg)
    }

    /// Frobenius norm of the part of `q^T x q` outside the leading block.
    pub fn off_face_norm(&self, x: &SymMatrix) -> f64 {
        let z = rotate(x, &self.q);
        let mut acc = 0.0;
        for i in 0..self.n() {
            for j in 0..self.n() {
                if i >= self.r || j >= self.r {
                    acc += z.get(i, j) * z.get(i, j);
                }
            }
        }
        acc.sqrt()
    }
}

/// Which of the two standard forms the stored data means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    /// `sup <b,y> : c - A^T y in K`, the native internal form.
    #[serde(rename = "dual")]
    DualForm,
    /// `inf <c,x> : A x = b, x in K`.
    #[serde(rename = "primal")]
    PrimalForm,
}

/// An SDP `(F, A, b, c)` over a face of the PSD cone.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdpProblem {
    pub a: LinearMapA,
    pub b: Vec<f64>,
    pub c: SymMatrix,
    pub face: Face,
    pub orientation: Orientation,
}

impl SdpProblem {
    /// Dual-form problem over the full cone.
    pub fn dual_form(a: LinearMapA, b: Vec<f64>, c: SymMatrix) -> Result<Self> {
        if b.len() != a.m() {
            return Err(SdpError::DimensionMismatch(format!(
                "b has length {}, expected {}",
                b.len(),
                a.m()
            )));
        }
        if c.dim() != a.n() {
            return Err(SdpError::DimensionMismatch(format!(
                "c has dimension {}, expected {}",
                c.dim(),
                a.n()
            )));
        }
        let n = a.n();
        Ok(SdpProblem {
            a,
            b,
            c,
            face: Face::full(n),
            orientation: Orientation::DualForm,
        })
    }

    /// Primal-form problem over the full cone (same data, different reading).
    pub fn primal_form(a: LinearMapA, b: Vec<f64>, c: SymMatrix) -> Result<Self> {
        let mut p = SdpProblem::dual_form(a, b, c)?;
        p.orientation = Orientation::PrimalForm;
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn m(&self) -> usize {
        self.a.m()
    }

    /// `c - A^T y`.
    pub fn slack(&self, y: &[f64]) -> SymMatrix {
        self.c.sub(&self.a.adjoint(y))
    }

    /// Largest data magnitude, used to scale residual tolerances.
    pub fn data_scale(&self) -> f64 {
        let mut s = self.c.max_abs();
        for a in self.a.mats() {
            s = s.max(a.max_abs());
        }
        for &v in &self.b {
            s = s.max(v.abs());
        }
        s.max(1.0)
    }
}

/// One facial reduction step: the reducing direction found and the face
/// before/after, all in the original n x n coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReductionStep {
    pub direction: SymMatrix,
    pub face_before: Face,
    /// Absent on the terminal infeasibility step.
    pub face_after: Option<Face>,
    /// `<c, direction>` at production time.
    pub c_inner: f64,
    /// Set when the branch decision was within 10x of the threshold.
    pub low_confidence: bool,
}

/// Why the reduction chain stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainTerminal {
    #[serde(rename = "minimal-face-found")]
    MinimalFaceFound,
    #[serde(rename = "infeasible-detected")]
    InfeasibleDetected,
}

/// Ordered reducing directions produced by facial reduction; a finite,
/// machine-checkable certificate of face confinement or infeasibility.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReducingChain {
    pub steps: Vec<ReductionStep>,
    pub terminal: ChainTerminal,
}

impl ReducingChain {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Strong-infeasibility witness per the Farkas-type characterization.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "side")]
pub enum StrongInfeasibilityWitness {
    /// Proves the dual form infeasible with positive distance:
    /// `<c, x> = -1`, `A x = 0`, `x` PSD.
    #[serde(rename = "dual")]
    Dual { x: SymMatrix },
    /// Proves the primal form strongly infeasible (equivalently, an
    /// improving ray for a feasible dual): `<b, y> = 1`, `-A^T y` PSD.
    #[serde(rename = "primal")]
    Primal { y: Vec<f64> },
}

/// Data the ray certifies against: the input problem itself, or a derived
/// truncation that is embedded so the certificate stays self-contained.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "scope")]
pub enum RayScope {
    #[serde(rename = "original")]
    Original,
    #[serde(rename = "reduced")]
    Reduced { problem: Box<SdpProblem> },
}

/// A certificate attached to a report.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Certificate {
    #[serde(rename = "reducing-chain")]
    Chain(ReducingChain),
    #[serde(rename = "infeasibility-witness")]
    Witness(StrongInfeasibilityWitness),
    #[serde(rename = "improving-ray")]
    ImprovingRay { y: Vec<f64>, scope: RayScope },
}

/// Attained optimal solution of the dual form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Solution {
    pub y: Vec<f64>,
    pub slack: SymMatrix,
    pub objective: f64,
    /// Numeric rank of the slack; maximal over the optimal set by
    /// construction.
    pub rank: usize,
}

/// A materialized eps point (eps-optimal feasible, or eps-near-feasible).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpsilonPoint {
    pub kind: EpsilonKind,
    pub eps: f64,
    pub y: Vec<f64>,
    /// The matrix point itself, in the input problem's coordinates.
    pub point: SymMatrix,
    pub objective: f64,
    pub slack_min_eig: f64,
    pub dist_to_psd: f64,
    /// `|slack(y) - point|`; 0 means the point sits exactly in the affine
    /// slack space.
    pub affine_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EpsilonKind {
    #[serde(rename = "eps-optimal")]
    EpsOptimal,
    #[serde(rename = "near-feasible")]
    NearFeasible,
}

/// Affine map between coordinate systems on the dual variable:
/// `y_original = mat * y_local + off`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AffineYMap {
    pub mat: Vec<Vec<f64>>,
    pub off: Vec<f64>,
}

impl AffineYMap {
    pub fn identity(m: usize) -> Self {
        AffineYMap {
            mat: (0..m)
                .map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
            off: vec![0.0; m],
        }
    }

    pub fn apply(&self, y_local: &[f64]) -> Vec<f64> {
        self.mat
            .iter()
            .zip(&self.off)
            .map(|(row, &o)| {
                assert_eq!(row.len(), y_local.len(), "affine map arity mismatch");
                o + row.iter().zip(y_local).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect()
    }

    /// `self` after `inner`: maps `inner`-local coordinates to `self`'s
    /// original coordinates.
    pub fn compose(&self, inner: &AffineYMap) -> AffineYMap {
        let off = self.apply(&inner.off);
        let cols = if inner.mat.is_empty() {
            0
        } else {
            inner.mat[0].len()
        };
        let mat = (0..self.mat.len())
            .map(|i| {
                (0..cols)
                    .map(|j| {
                        self.mat[i]
                            .iter()
                            .enumerate()
                            .map(|(k, &a)| a * inner.mat[k][j])
                            .sum()
                    })
                    .collect()
            })
            .collect();
        AffineYMap { mat, off }
    }
}

/// Generator data for eps-near-feasible points of a weakly infeasible
/// problem. Coordinates are those of the rotated input problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NearFeasibleHandle {
    /// Rotation applied to the problem before truncation.
    pub rotation: OrthogonalMatrix,
    /// Partition directions in rotated coordinates.
    pub dirs: Vec<SymMatrix>,
    /// `dirs[i] = sum_j dir_coeffs[i][j] * (rotated A_j)`.
    pub dir_coeffs: Vec<Vec<f64>>,
    pub blocks: Vec<usize>,
    /// Feasible point of the truncated problem (same y-space as the input).
    pub base_y: Vec<f64>,
}

/// Generator data for eps-optimal points of an unattained problem. All the
/// matrix data lives in the reduced, normalized, partition-rotated
/// coordinates; `to_original` maps local dual variables back.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpsOptimalHandle {
    pub c: SymMatrix,
    pub mats: Vec<SymMatrix>,
    pub s_cut: usize,
    pub dirs: Vec<SymMatrix>,
    pub dir_coeffs: Vec<Vec<f64>>,
    pub blocks: Vec<usize>,
    /// Attained optimum of the truncated problem.
    pub y_opt: Vec<f64>,
    /// Interior point of the truncated problem.
    pub y_interior: Vec<f64>,
    /// Optimal value in local coordinates (objective = first coordinate).
    pub theta_local: f64,
    pub to_original: AffineYMap,
    /// Original objective = local objective + offset.
    pub value_offset: f64,
}

/// One oracle invocation, recorded when tracing is on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceEntry {
    pub label: String,
    pub cone_blocks: Vec<usize>,
    pub free_dim: usize,
    pub m: usize,
    pub iterations: usize,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

/// Final output of a complete solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: FeasStatus,
    pub value: ExtReal,
    pub attained: Attainment,
    pub minimal_face_rank: Option<usize>,
    pub solution: Option<Solution>,
    pub certificates: Vec<Certificate>,
    pub epsilon_points: Vec<EpsilonPoint>,
    pub near_feasible_handle: Option<NearFeasibleHandle>,
    pub eps_optimal_handle: Option<EpsOptimalHandle>,
    /// Low-confidence and contract-violation diagnostics.
    pub flags: Vec<String>,
    pub trace: Option<Vec<TraceEntry>>,
    pub config: ToleranceConfig,
}

impl SolveReport {
    /// Internal-consistency checks on a finished report. Returns a list of
    /// violated invariants (empty = consistent).
    pub fn check_consistency(&self, problem: Option<&SdpProblem>) -> Vec<String> {
        let mut bad = Vec::new();
        let cfg = &self.config;
        if !self.status.is_feasible() && self.value != ExtReal::NegInf {
            bad.push("infeasible dual must report value -inf".into());
        }
        if self.attained == Attainment::Yes {
            match &self.solution {
                None => bad.push("attained=yes but no solution present".into()),
                Some(sol) => {
                    if let Some(v) = self.value.as_finite() {
                        if (sol.objective - v).abs() > 1e-6 * (1.0 + v.abs()) {
                            bad.push(format!(
                                "solution objective {} differs from value {}",
                                sol.objective, v
                            ));
                        }
                    } else {
                        bad.push("attained=yes with non-finite value".into());
                    }
                    if linalg::min_eig(&sol.slack) < -10.0 * cfg.feas {
                        bad.push("solution slack is not PSD".into());
                    }
                    if let Some(p) = problem {
                        let resid = p.slack(&sol.y).sub(&sol.slack).frob_norm();
                        if resid > 1e-6 * p.data_scale() {
                            bad.push(format!("solution slack mismatch: residual {resid:.3e}"));
                        }
                    }
                }
            }
        }
        if self.status == FeasStatus::StrongInfeasible
            && !self
                .certificates
                .iter()
                .any(|c| matches!(c, Certificate::Witness(_)))
        {
            bad.push("strong infeasibility reported without a witness".into());
        }
        if self.value == ExtReal::PosInf
            && !self
                .certificates
                .iter()
                .any(|c| matches!(c, Certificate::ImprovingRay { .. }))
        {
            bad.push("unboundedness reported without an improving ray".into());
        }
        for pt in &self.epsilon_points {
            if pt.kind == EpsilonKind::NearFeasible && pt.dist_to_psd > pt.eps * 1.01 {
                bad.push(format!(
                    "near-feasible point at eps {} has distance {:.3e}",
                    pt.eps, pt.dist_to_psd
                ));
            }
        }
        bad
    }
}

/// Outcome of verifying a certificate: every residual that was checked and
/// the bound it was held to.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyOutcome {
    pub ok: bool,
    pub residuals: Vec<ResidualItem>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualItem {
    pub name: String,
    pub value: f64,
    pub bound: f64,
}

impl VerifyOutcome {
    fn new() -> Self {
        VerifyOutcome {
            ok: true,
            residuals: Vec::new(),
        }
    }

    fn check(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        // NaN counts as a failure.
        if !value.is_finite() || value > bound {
            self.ok = false;
        }
        self.residuals.push(ResidualItem {
            name: name.into(),
            value,
            bound,
        });
    }
}

/// Verifies a certificate against a dual-form problem by recomputing every
/// defining residual.
pub fn verify_certificate(
    problem: &SdpProblem,
    cert: &Certificate,
    cfg: &ToleranceConfig,
) -> VerifyOutcome {
    let mut out = VerifyOutcome::new();
    let scale = problem.data_scale();
    let tol = cfg.branch * scale;
    match cert {
        Certificate::Witness(StrongInfeasibilityWitness::Dual { x }) => {
            if x.dim() != problem.n() {
                out.check("dimension", 1.0, 0.0);
                return out;
            }
            out.check("|<c,x> + 1|", (trace_inner(&problem.c, x) + 1.0).abs(), tol);
            let ax = problem.a.forward(x);
            let ax_norm = ax.iter().map(|v| v * v).sum::<f64>().sqrt();
            out.check("|A x|", ax_norm, tol);
            out.check("-min_eig(x)", -linalg::min_eig(x), tol);
        }
        Certificate::Witness(StrongInfeasibilityWitness::Primal { y }) => {
            verify_primal_ray(&mut out, problem, y, cfg);
        }
        Certificate::ImprovingRay { y, scope } => match scope {
            RayScope::Original => verify_primal_ray(&mut out, problem, y, cfg),
            RayScope::Reduced { problem: sub } => verify_primal_ray(&mut out, sub, y, cfg),
        },
        Certificate::Chain(chain) => {
            verify_chain(&mut out, problem, chain, cfg);
        }
    }
    out
}

fn verify_primal_ray(
    out: &mut VerifyOutcome,
    problem: &SdpProblem,
    y: &[f64],
    cfg: &ToleranceConfig,
) {
    if y.len() != problem.m() {
        out.check("dimension", 1.0, 0.0);
        return;
    }
    let tol = cfg.branch * problem.data_scale();
    let by: f64 = problem.b.iter().zip(y).map(|(a, b)| a * b).sum();
    out.check("|<b,y> - 1|", (by - 1.0).abs(), tol);
    let neg_aty = problem.a.adjoint(y).scale(-1.0);
    out.check("-min_eig(-A^T y)", -linalg::min_eig(&neg_aty), tol);
}

fn verify_chain(
    out: &mut VerifyOutcome,
    problem: &SdpProblem,
    chain: &ReducingChain,
    cfg: &ToleranceConfig,
) {
    let n = problem.n();
    let scale = problem.data_scale();
    let tol = cfg.branch * scale;
    out.check("chain length <= n", chain.len() as f64, n as f64);
    let mut prev_rank = problem.face.rank();
    for (idx, step) in chain.steps.iter().enumerate() {
        let tag = |s: &str| format!("step {idx}: {s}");
        let x = &step.direction;
        if x.dim() != n {
            out.check(tag("dimension"), 1.0, 0.0);
            return;
        }
        // x must lie in the dual of the face it was found over.
        let blk = step.face_before.restrict(x);
        out.check(
            tag("-min_eig(face block of x)"),
            -linalg::min_eig(&blk),
            tol,
        );
        out.check(
            tag("face rank matches descent"),
            (step.face_before.rank() as f64 - prev_rank as f64).abs(),
            0.0,
        );
        let ax = problem.a.forward(x);
        let ax_norm = ax.iter().map(|v| v * v).sum::<f64>().sqrt();
        out.check(tag("|A x|"), ax_norm, tol);
        let cx = trace_inner(&problem.c, x);
        out.check(tag("<c,x>"), cx, tol);
        let terminal_infeas =
            idx + 1 == chain.steps.len() && chain.terminal == ChainTerminal::InfeasibleDetected;
        if terminal_infeas {
            // Strict negativity, up to half the production threshold.
            out.check(tag("<c,x> strictly negative"), cx, -0.5 * cfg.branch);
            prev_rank = step.face_before.rank();
        } else {
            out.check(tag("|<c,x>|"), cx.abs(), tol);
            match &step.face_after {
                None => {
                    out.check(tag("face_after present"), 1.0, 0.0);
                    return;
                }
                Some(fa) => {
                    out.check(
                        tag("face rank strictly decreases"),
                        fa.rank() as f64,
                        step.face_before.rank() as f64 - 1.0,
                    );
                    // The new face must sit inside the old one and be
                    // orthogonal to the direction.
                    let ri = fa.ri_point();
                    out.check(
                        tag("new face inside old"),
                        step.face_before.off_face_norm(&ri),
                        cfg.sub * (1.0 + ri.frob_norm()) * 1e3,
                    );
                    out.check(tag("|<ri(new face), x>|"), trace_inner(&ri, x).abs(), tol);
                    prev_rank = fa.rank();
                }
            }
        }
    }
}
