//! Built-in instance catalog: every entry carries an analytically derived
//! status, value and attainment flag, with the derivation written next to
//! the data. Also home of the seeded instance generators used by the
//! acceptance suite (planted minimal faces, unbounded families, random
//! strongly feasible pairs).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, rotate, OrthogonalMatrix, SymMatrix};
use crate::model::{Attainment, ExtReal, FeasStatus, LinearMapA, SdpProblem};

/// A catalog instance with its ground truth.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub problem: SdpProblem,
    pub status: FeasStatus,
    pub value: ExtReal,
    pub attained: Attainment,
}

fn dual(n: usize, mats: Vec<SymMatrix>, b: Vec<f64>, c: SymMatrix) -> SdpProblem {
    SdpProblem::dual_form(LinearMapA::new(n, mats).expect("catalog data"), b, c)
        .expect("catalog data")
}

/// Deterministic dense rotation used to disguise structured instances.
fn fixed_rotation(n: usize, seed: u64) -> OrthogonalMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    linalg::eig_sym(&g).expect("rotation seed").1
}

fn rotated(problem: &SdpProblem, seed: u64) -> SdpProblem {
    let q = fixed_rotation(problem.n(), seed);
    dual(
        problem.n(),
        problem.a.mats().iter().map(|a| rotate(a, &q)).collect(),
        problem.b.clone(),
        rotate(&problem.c, &q),
    )
}

/// The worked three-variable example: maximize `-y1 - y2 - y3` with slack
/// `[[y1, 1, y2], [1, y2, 1], [y2, 1, y1+y2+y3]]`. Strongly feasible; the
/// value 0 is approached (let y2 grow) but never attained, since a
/// feasible zero-objective point would need a PSD slack with a zero
/// diagonal entry next to off-diagonal ones.
pub fn dex() -> SdpProblem {
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
    dual(3, vec![a1, a2, a3], vec![-1.0, -1.0, -1.0], c)
}

/// Nested two-stage tower: slack(y1, y2) = [[y2, y1, 0], [y1, 0, 0],
/// [0, 0, y1]]. PSD forces y1 = 0 in two reduction stages; the feasible
/// slacks are diag(y2, 0, 0).
fn tower(b: Vec<f64>) -> SdpProblem {
    let mut a1 = SymMatrix::zeros(3);
    a1.set_sym(0, 1, -1.0);
    a1.set_sym(2, 2, -1.0);
    let a2 = SymMatrix::from_diag(&[-1.0, 0.0, 0.0]);
    dual(3, vec![a1, a2], b, SymMatrix::zeros(3))
}

/// Classic weakly infeasible 2x2 family: slack `[[y, 1], [1, 0]]` is never
/// PSD (determinant -1) yet `[[y, 1], [1, d]]` is PSD for `y >= 1/d`, so
/// the affine line comes arbitrarily close to the cone.
pub fn weak_infeasible_2x2() -> SdpProblem {
    let mut c = SymMatrix::zeros(2);
    c.set_sym(0, 1, 1.0);
    dual(2, vec![SymMatrix::from_diag(&[-1.0, 0.0])], vec![0.0], c)
}

/// Nonzero-duality-gap instance. Primal: min x11 s.t. x22 = 0,
/// x11 + 2 x23 = 1, x PSD. Since x22 = 0 forces row 2 to vanish, x23 = 0
/// and x11 = 1: theta_P = 1 (attained at e1 e1^T).
/// Dual: max y2 s.t. diag block [[-y1, -y2], [-y2, 0]] of the slack stays
/// PSD, forcing y2 = 0: theta_D = 0, attained at (y1, y2) = (-1, 0) with a
/// rank-2 slack. The gap is 1; the dual is only weakly feasible (the slack
/// (3,3) entry is identically 0).
pub fn gap_instance(scale: f64) -> SdpProblem {
    let c = SymMatrix::from_diag(&[scale, 0.0, 0.0]);
    let a1 = SymMatrix::from_diag(&[0.0, 1.0, 0.0]);
    let mut a2 = SymMatrix::zeros(3);
    a2.set_sym(0, 0, 1.0);
    a2.set_sym(1, 2, 1.0);
    dual(3, vec![a1, a2], vec![0.0, 1.0], c)
}

/// The full catalog.
pub fn catalog() -> Vec<CatalogEntry> {
    let mut entries = Vec::new();

    // Strongly feasible.
    entries.push(CatalogEntry {
        name: "dex",
        description: "worked example: strongly feasible, value 0, unattained",
        problem: dex(),
        status: FeasStatus::StrongFeasible,
        value: ExtReal::finite(0.0),
        attained: Attainment::No,
    });
    entries.push(CatalogEntry {
        name: "dex-rot",
        description: "worked example under a dense congruence",
        problem: rotated(&dex(), 101),
        status: FeasStatus::StrongFeasible,
        value: ExtReal::finite(0.0),
        attained: Attainment::No,
    });
    // sup y1 + y2 over slack diag(2-y1, 3-y1-y2, 5-y2): a diagonal LP.
    // The middle entry caps y1 + y2 at 3, reached e.g. at (2, 1) where the
    // slack diag(0, 0, 4) is PSD: value 3, attained; y = 0 gives a PD slack
    // so the problem is strongly feasible.
    entries.push(CatalogEntry {
        name: "sf-lp",
        description: "diagonal instance with value 3 attained",
        problem: dual(
            3,
            vec![
                SymMatrix::from_diag(&[1.0, 1.0, 0.0]),
                SymMatrix::from_diag(&[0.0, 1.0, 1.0]),
            ],
            vec![1.0, 1.0],
            SymMatrix::from_diag(&[2.0, 3.0, 5.0]),
        ),
        status: FeasStatus::StrongFeasible,
        value: ExtReal::finite(3.0),
        attained: Attainment::Yes,
    });
    // Square-root gadget at beta = 2: sup x s.t. [[1, x], [x, 2]] PSD.
    entries.push(CatalogEntry {
        name: "sf-sqrt2",
        description: "square-root gadget: value sqrt(2) attained",
        problem: {
            let mut a1 = SymMatrix::zeros(2);
            a1.set_sym(0, 1, -1.0);
            dual(2, vec![a1], vec![1.0], SymMatrix::from_diag(&[1.0, 2.0]))
        },
        status: FeasStatus::StrongFeasible,
        value: ExtReal::finite(std::f64::consts::SQRT_2),
        attained: Attainment::Yes,
    });
    // The parabola spectrahedron {(a, b) : b >= a^2}: sup a is +inf but no
    // improving ray exists in the original coordinates.
    entries.push(CatalogEntry {
        name: "sf-parabola",
        description: "unbounded without an exact improving ray",
        problem: {
            let c = SymMatrix::from_diag(&[1.0, 0.0]);
            let mut a1 = SymMatrix::zeros(2);
            a1.set_sym(0, 1, -1.0);
            let a2 = SymMatrix::from_diag(&[0.0, -1.0]);
            dual(2, vec![a1, a2], vec![1.0, 0.0], c)
        },
        status: FeasStatus::StrongFeasible,
        value: ExtReal::PosInf,
        attained: Attainment::NotApplicable,
    });
    // b = 0: the objective is identically 0 over a nonempty set.
    entries.push(CatalogEntry {
        name: "sf-b0",
        description: "zero objective over a strongly feasible set",
        problem: {
            let mut a1 = SymMatrix::zeros(2);
            a1.set_sym(0, 1, 1.0);
            dual(2, vec![a1], vec![0.0], SymMatrix::identity(2))
        },
        status: FeasStatus::StrongFeasible,
        value: ExtReal::finite(0.0),
        attained: Attainment::Yes,
    });

    // Weakly feasible.
    // Slacks diag(y, 0); maximize -y over y >= 0: value 0 attained at 0.
    entries.push(CatalogEntry {
        name: "wf-diag",
        description: "rank-1 confined slack line, value 0 attained",
        problem: dual(
            2,
            vec![SymMatrix::from_diag(&[-1.0, 0.0])],
            vec![-1.0],
            SymMatrix::zeros(2),
        ),
        status: FeasStatus::WeakFeasible,
        value: ExtReal::finite(0.0),
        attained: Attainment::Yes,
    });
    entries.push(CatalogEntry {
        name: "wf-tower",
        description: "two-stage tower, value 0 attained",
        problem: tower(vec![0.0, -1.0]),
        status: FeasStatus::WeakFeasible,
        value: ExtReal::finite(0.0),
        attained: Attainment::Yes,
    });
    entries.push(CatalogEntry {
        name: "wf-tower-unbounded",
        description: "two-stage tower with an unbounded objective",
        problem: tower(vec![0.0, 1.0]),
        status: FeasStatus::WeakFeasible,
        value: ExtReal::PosInf,
        attained: Attainment::NotApplicable,
    });
    // c equals the indefinite A1, so the only feasible slack is 0 at y = 1:
    // the minimal face is {0} and the value <b, 1> = 1 is attained.
    entries.push(CatalogEntry {
        name: "wf-zero-face",
        description: "feasible only at a single point with zero slack",
        problem: {
            let mut a1 = SymMatrix::zeros(2);
            a1.set_sym(0, 1, 1.0);
            dual(2, vec![a1.clone()], vec![1.0], a1)
        },
        status: FeasStatus::WeakFeasible,
        value: ExtReal::finite(1.0),
        attained: Attainment::Yes,
    });
    entries.push(CatalogEntry {
        name: "wf-planted",
        description: "planted rank-2 minimal face in S^4, zero objective",
        problem: planted_face_instance(4, 2, 7).0,
        status: FeasStatus::WeakFeasible,
        value: ExtReal::finite(0.0),
        attained: Attainment::Yes,
    });
    entries.push(CatalogEntry {
        name: "gap-classic",
        description: "nonzero duality gap: dual value 0, primal value 1",
        problem: gap_instance(1.0),
        status: FeasStatus::WeakFeasible,
        value: ExtReal::finite(0.0),
        attained: Attainment::Yes,
    });
    entries.push(CatalogEntry {
        name: "gap-scaled",
        description: "nonzero duality gap, scaled data: dual value 0",
        problem: gap_instance(2.5),
        status: FeasStatus::WeakFeasible,
        value: ExtReal::finite(0.0),
        attained: Attainment::Yes,
    });

    // Weakly infeasible.
    entries.push(CatalogEntry {
        name: "wi-2x2",
        description: "classic [[y, 1], [1, 0]] family",
        problem: weak_infeasible_2x2(),
        status: FeasStatus::WeakInfeasible,
        value: ExtReal::NegInf,
        attained: Attainment::NotApplicable,
    });
    entries.push(CatalogEntry {
        name: "wi-2x2-rot",
        description: "classic family under a dense congruence",
        problem: rotated(&weak_infeasible_2x2(), 202),
        status: FeasStatus::WeakInfeasible,
        value: ExtReal::NegInf,
        attained: Attainment::NotApplicable,
    });
    // Padding with a harmless strongly feasible block does not change the
    // status: the first block still blocks feasibility with distance 0.
    entries.push(CatalogEntry {
        name: "wi-padded",
        description: "weakly infeasible block padded by a feasible one",
        problem: {
            let mut c = SymMatrix::zeros(3);
            c.set_sym(0, 1, 1.0);
            c.set_sym(2, 2, 1.0);
            let a1 = SymMatrix::from_diag(&[-1.0, 0.0, 0.0]);
            let a2 = SymMatrix::from_diag(&[0.0, 0.0, -1.0]);
            dual(3, vec![a1, a2], vec![0.0, 0.0], c)
        },
        status: FeasStatus::WeakInfeasible,
        value: ExtReal::NegInf,
        attained: Attainment::NotApplicable,
    });
    entries.push(CatalogEntry {
        name: "wi-double",
        description: "two independent weakly infeasible blocks",
        problem: {
            let mut c = SymMatrix::zeros(4);
            c.set_sym(0, 1, 1.0);
            c.set_sym(2, 3, 1.0);
            let a1 = SymMatrix::from_diag(&[-1.0, 0.0, 0.0, 0.0]);
            let a2 = SymMatrix::from_diag(&[0.0, 0.0, -1.0, 0.0]);
            dual(4, vec![a1, a2], vec![0.0, 0.0], c)
        },
        status: FeasStatus::WeakInfeasible,
        value: ExtReal::NegInf,
        attained: Attainment::NotApplicable,
    });
    // Two-stage detection: PSD forces the middle coordinate out first, and
    // only the reduced face reveals the classic pattern. slack =
    // [[y2, y1, 1], [y1, 0, 0], [1, 0, y1]]: infeasible (row 2 forces
    // y1 = 0, then the (1,3) entry 1 contradicts (3,3) = 0), yet with
    // y1 = eps the matrix is within O(eps) of PSD for large y2.
    entries.push(CatalogEntry {
        name: "wi-gated",
        description: "weak infeasibility visible only after one reduction",
        problem: {
            let mut a1 = SymMatrix::zeros(3);
            a1.set_sym(0, 1, -1.0);
            a1.set_sym(2, 2, -1.0);
            let a2 = SymMatrix::from_diag(&[-1.0, 0.0, 0.0]);
            let mut c = SymMatrix::zeros(3);
            c.set_sym(0, 2, 1.0);
            dual(3, vec![a1, a2], vec![0.0, 0.0], c)
        },
        status: FeasStatus::WeakInfeasible,
        value: ExtReal::NegInf,
        attained: Attainment::NotApplicable,
    });

    // Strongly infeasible.
    entries.push(CatalogEntry {
        name: "si-diag",
        description: "slack diag(-1, -y): distance 1 from the cone",
        problem: dual(
            2,
            vec![SymMatrix::from_diag(&[0.0, 1.0])],
            vec![0.0],
            SymMatrix::from_diag(&[-1.0, 0.0]),
        ),
        status: FeasStatus::StrongInfeasible,
        value: ExtReal::NegInf,
        attained: Attainment::NotApplicable,
    });
    entries.push(CatalogEntry {
        name: "si-rot",
        description: "strongly infeasible under a dense congruence",
        problem: rotated(
            &dual(
                2,
                vec![SymMatrix::from_diag(&[0.0, 1.0])],
                vec![0.0],
                SymMatrix::from_diag(&[-1.0, 0.0]),
            ),
            303,
        ),
        status: FeasStatus::StrongInfeasible,
        value: ExtReal::NegInf,
        attained: Attainment::NotApplicable,
    });
    entries.push(CatalogEntry {
        name: "si-padded",
        description: "fixed negative entry padded by free coordinates",
        problem: dual(
            3,
            vec![
                SymMatrix::from_diag(&[0.0, 1.0, 0.0]),
                SymMatrix::from_diag(&[0.0, 0.0, 1.0]),
            ],
            vec![0.0, 0.0],
            SymMatrix::from_diag(&[-1.0, 0.0, 2.0]),
        ),
        status: FeasStatus::StrongInfeasible,
        value: ExtReal::NegInf,
        attained: Attainment::NotApplicable,
    });
    entries.push(CatalogEntry {
        name: "si-m2",
        description: "fixed -2 diagonal entry, two constraints",
        problem: {
            let mut a1 = SymMatrix::zeros(2);
            a1.set_sym(0, 1, 1.0);
            let a2 = SymMatrix::from_diag(&[0.0, 1.0]);
            dual(
                2,
                vec![a1, a2],
                vec![0.0, 0.0],
                SymMatrix::from_diag(&[-2.0, 3.0]),
            )
        },
        status: FeasStatus::StrongInfeasible,
        value: ExtReal::NegInf,
        attained: Attainment::NotApplicable,
    });
    // A weakly-infeasible-looking block next to a hard -1 entry: the fixed
    // entry keeps the distance at 1, so the instance is strongly
    // infeasible with witness e3 e3^T.
    entries.push(CatalogEntry {
        name: "si-mixed",
        description: "strong infeasibility despite a weak-looking block",
        problem: {
            let mut c = SymMatrix::zeros(3);
            c.set_sym(0, 1, 1.0);
            c.set_sym(2, 2, -1.0);
            let a1 = SymMatrix::from_diag(&[-1.0, 0.0, 0.0]);
            dual(3, vec![a1], vec![0.0], c)
        },
        status: FeasStatus::StrongInfeasible,
        value: ExtReal::NegInf,
        attained: Attainment::NotApplicable,
    });

    // Unbounded with exact rays, from the seeded generator.
    entries.push(CatalogEntry {
        name: "unbounded-4",
        description: "constructed unbounded instance with an exact ray",
        problem: unbounded_instance(4, 11),
        status: FeasStatus::StrongFeasible,
        value: ExtReal::PosInf,
        attained: Attainment::NotApplicable,
    });
    entries.push(CatalogEntry {
        name: "unbounded-5",
        description: "constructed unbounded instance with an exact ray",
        problem: unbounded_instance(5, 13),
        status: FeasStatus::StrongFeasible,
        value: ExtReal::PosInf,
        attained: Attainment::NotApplicable,
    });

    entries
}

pub fn catalog_entry(name: &str) -> Option<CatalogEntry> {
    catalog().into_iter().find(|e| e.name == name)
}

/// Instance whose feasible slacks are confined to a face of known rank `k`
/// and fill its relative interior, with extra constraints that force some
/// coordinates to zero through the off-face coupling.
///
/// Returns the problem and the planted rank.
pub fn planted_face_instance(n: usize, k: usize, seed: u64) -> (SdpProblem, usize) {
    assert!(k <= n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e3779b9).wrapping_add(k as u64));
    let q = fixed_rotation(n, seed.wrapping_add(777));
    let qt = q.transpose();
    let mut mats = Vec::new();
    let mut c_rot = SymMatrix::zeros(n);
    if k > 0 {
        // PD center of the face block keeps a relative-interior point.
        let g = SymMatrix::from_fn(k, |_, _| rng.gen_range(-1.0..1.0));
        let gg = SymMatrix::from_na_symmetrize(&(g.to_na() * g.to_na().transpose()));
        let mut center = gg;
        for i in 0..k {
            let v = center.get(i, i);
            center.set_sym(i, i, v + 0.5);
        }
        c_rot = linalg::embed_upper(&center, n);
        // A couple of in-face directions span part of the face.
        let nf = (k * (k + 1) / 2).clamp(1, 3);
        for _ in 0..nf {
            let d = SymMatrix::from_fn(k, |_, _| rng.gen_range(-1.0..1.0));
            mats.push(linalg::embed_upper(&d, n));
        }
    }
    // Gadgets: each dead coordinate j >= k gets a constraint touching an
    // off-face position; positivity forces its multiplier to zero.
    for j in k..n {
        let mut g = SymMatrix::zeros(n);
        let anchor = if k > 0 { rng.gen_range(0..k) } else { 0 };
        if anchor != j {
            g.set_sym(anchor, j, 1.0);
            mats.push(g);
        }
    }
    let mats: Vec<SymMatrix> = mats.iter().map(|a| rotate(a, &qt)).collect();
    let c = rotate(&c_rot, &qt);
    let m = mats.len();
    (dual(n, mats, vec![0.0; m], c), k)
}

/// Strongly feasible unbounded family with `s = 0`: the non-objective
/// directions are orthogonal to a positive definite matrix (so their span
/// meets the cone only at 0), and the objective direction is their sum (so
/// the truncated linear system is inconsistent). The ray
/// `(1, -1, -1, 0, ...)` is exact: `<b, ray> = 1` and `-A^T ray = 0`.
pub fn unbounded_instance(n: usize, seed: u64) -> SdpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // PD matrix h; directions orthogonal to it.
    let g = SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let h = {
        let m = g.to_na() * g.to_na().transpose();
        let mut h = SymMatrix::from_na_symmetrize(&m);
        for i in 0..n {
            let v = h.get(i, i);
            h.set_sym(i, i, v + 0.4);
        }
        h
    };
    let hnorm2 = linalg::trace_inner(&h, &h);
    let mut dirs = Vec::new();
    for _ in 0..2 {
        let mut d = SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let t = linalg::trace_inner(&d, &h) / hnorm2;
        d.axpy(-t, &h);
        dirs.push(d);
    }
    let a1 = dirs[0].add(&dirs[1]);
    let mats = vec![a1, dirs[0].clone(), dirs[1].clone()];
    // Strong feasibility: slack PD at y0.
    let y0: Vec<f64> = (0..3).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let mut c = SymMatrix::identity(n);
    let map = LinearMapA::new(n, mats.clone()).unwrap();
    c.axpy(1.0, &map.adjoint(&y0));
    dual(n, mats, vec![1.0, 0.0, 0.0], c)
}

/// Random both-sided strongly feasible pair: `b = A x0`, `c = s0 + A^T y0`
/// with `x0, s0` positive definite.
pub fn random_strongly_feasible(n: usize, m: usize, seed: u64) -> SdpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pd = |rng: &mut ChaCha8Rng| {
        let g = SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let mm = g.to_na() * g.to_na().transpose();
        let mut p = SymMatrix::from_na_symmetrize(&mm);
        for i in 0..n {
            let v = p.get(i, i);
            p.set_sym(i, i, v + 0.3);
        }
        p
    };
    let mats: Vec<SymMatrix> = (0..m)
        .map(|_| SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)))
        .collect();
    let x0 = pd(&mut rng);
    let s0 = pd(&mut rng);
    let y0: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let a = LinearMapA::new(n, mats).unwrap();
    let b = a.forward(&x0);
    let c = s0.add(&a.adjoint(&y0));
    SdpProblem::dual_form(a, b, c).unwrap()
}

/// Random subspace of S^n with the given number of generators.
pub fn random_subspace_generators(n: usize, count: usize, seed: u64) -> Vec<SymMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_has_all_classes_and_enough_entries() {
        let cat = catalog();
        assert!(cat.len() >= 20, "catalog has {} entries", cat.len());
        for status in [
            FeasStatus::StrongFeasible,
            FeasStatus::WeakFeasible,
            FeasStatus::WeakInfeasible,
            FeasStatus::StrongInfeasible,
        ] {
            assert!(
                cat.iter().filter(|e| e.status == status).count() >= 4,
                "too few entries with status {status:?}"
            );
        }
        // Names are unique.
        let mut names: Vec<_> = cat.iter().map(|e| e.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), cat.len());
    }

    #[test]
    fn planted_instance_has_feasible_point_in_face() {
        let (p, k) = planted_face_instance(4, 2, 3);
        // y = 0 is feasible with a rank-k slack.
        let slack = p.slack(&vec![0.0; p.m()]);
        let cfg = crate::config::ToleranceConfig::default();
        assert!(linalg::is_psd(&slack, &cfg));
        assert_eq!(linalg::numeric_rank(&slack, &cfg), k);
    }

    #[test]
    fn unbounded_instance_has_exact_ray() {
        let p = unbounded_instance(4, 5);
        let ray = vec![1.0, -1.0, -1.0];
        let by: f64 = p.b.iter().zip(&ray).map(|(a, b)| a * b).sum();
        assert!((by - 1.0).abs() < 1e-12);
        assert!(p.a.adjoint(&ray).frob_norm() < 1e-12);
    }
}
