//! Report serialization and post-hoc verification.
//!
//! Reports round-trip losslessly through serde_json. Verification recomputes
//! every residual a report's claims rest on: certificate identities,
//! solution feasibility and objective, eps-point quality.

use std::path::Path;

use crate::config::ToleranceConfig;
use crate::linalg;
use crate::model::{
    verify_certificate, Attainment, Certificate, EpsilonKind, ExtReal, Result, SdpError,
    SdpProblem, SolveReport,
};

pub fn write_report(report: &SolveReport, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| SdpError::InvalidInput(format!("report serialization failed: {e}")))?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<SolveReport> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| SdpError::InvalidInput(format!("report deserialization failed: {e}")))
}

/// One verification line: what was checked, the number, whether it passed.
#[derive(Debug, Clone)]
pub struct VerifyLine {
    pub what: String,
    pub ok: bool,
    pub detail: String,
}

/// Re-checks a report against the problem it claims to describe. The
/// problem must be in the same orientation the report was produced for
/// (primal-form reports verify against the deterministic re-dualization).
pub fn verify_report(
    problem: &SdpProblem,
    report: &SolveReport,
    cfg: &ToleranceConfig,
) -> Vec<VerifyLine> {
    let mut lines = Vec::new();
    let mut push = |what: String, ok: bool, detail: String| {
        lines.push(VerifyLine { what, ok, detail });
    };

    // The problem certificates verify against: the input itself in dual
    // form, or its re-dualization for primal-form inputs.
    let cert_problem: Option<SdpProblem> =
        if problem.orientation == crate::model::Orientation::PrimalForm {
            crate::pipeline::dualized_problem(problem, cfg)
                .ok()
                .flatten()
        } else {
            Some(problem.clone())
        };

    for (i, cert) in report.certificates.iter().enumerate() {
        let name = match cert {
            Certificate::Chain(_) => "reducing-chain",
            Certificate::Witness(_) => "infeasibility-witness",
            Certificate::ImprovingRay { .. } => "improving-ray",
        };
        // Witnesses for inconsistent primal systems verify against the
        // primal data directly; everything else against the dual form.
        let target: &SdpProblem = match cert {
            Certificate::Witness(crate::model::StrongInfeasibilityWitness::Primal { .. }) => {
                problem
            }
            _ => match &cert_problem {
                Some(p) => p,
                None => {
                    push(
                        format!("certificate {i} ({name})"),
                        false,
                        "no dualization available".into(),
                    );
                    continue;
                }
            },
        };
        let outcome = verify_certificate(target, cert, cfg);
        let worst = outcome
            .residuals
            .iter()
            .filter(|r| r.value > r.bound)
            .map(|r| format!("{} = {:.3e} > {:.3e}", r.name, r.value, r.bound))
            .collect::<Vec<_>>()
            .join("; ");
        push(
            format!("certificate {i} ({name})"),
            outcome.ok,
            if outcome.ok {
                format!("{} residuals ok", outcome.residuals.len())
            } else {
                worst
            },
        );
    }

    if let Some(sol) = &report.solution {
        match problem.orientation {
            crate::model::Orientation::DualForm => {
                let slack = problem.slack(&sol.y);
                let resid = slack.sub(&sol.slack).frob_norm();
                let min_eig = linalg::min_eig(&sol.slack);
                let obj: f64 = problem.b.iter().zip(&sol.y).map(|(a, b)| a * b).sum();
                let ok = resid <= 1e-6 * problem.data_scale()
                    && min_eig >= -100.0 * cfg.feas
                    && (obj - sol.objective).abs() <= 1e-6 * (1.0 + sol.objective.abs());
                push(
                    "solution".into(),
                    ok,
                    format!("slack residual {resid:.3e}, min eig {min_eig:.3e}"),
                );
            }
            crate::model::Orientation::PrimalForm => {
                // The stored matrix is the primal point: check A x = b,
                // PSD, and the objective.
                let ax = problem.a.forward(&sol.slack);
                let resid: f64 = ax
                    .iter()
                    .zip(&problem.b)
                    .map(|(p, q)| (p - q) * (p - q))
                    .sum::<f64>()
                    .sqrt();
                let min_eig = linalg::min_eig(&sol.slack);
                let obj = linalg::trace_inner(&problem.c, &sol.slack);
                let ok = resid <= 1e-6 * problem.data_scale()
                    && min_eig >= -100.0 * cfg.feas
                    && (obj - sol.objective).abs() <= 1e-6 * (1.0 + sol.objective.abs());
                push(
                    "solution (primal point)".into(),
                    ok,
                    format!("A x residual {resid:.3e}, min eig {min_eig:.3e}"),
                );
            }
        }
        if report.attained == Attainment::Yes {
            if let Some(v) = report.value.as_finite() {
                let ok = (sol.objective - v).abs() <= 1e-6 * (1.0 + v.abs());
                push(
                    "solution objective equals value".into(),
                    ok,
                    format!("{}", sol.objective),
                );
            }
        }
    }

    // Points are re-derived from their y vectors, never trusted: the slack
    // membership of the stored matrix point, its distance to the cone and
    // the objective are all recomputed.
    for pt in &report.epsilon_points {
        let (affine_problem, objective) = match problem.orientation {
            crate::model::Orientation::DualForm => (
                problem,
                problem.b.iter().zip(&pt.y).map(|(a, b)| a * b).sum::<f64>(),
            ),
            crate::model::Orientation::PrimalForm => match &cert_problem {
                Some(p) => {
                    let obj = linalg::trace_inner(&problem.c, &pt.point);
                    (p as &SdpProblem, obj)
                }
                None => {
                    push("eps point".into(), false, "no dualization available".into());
                    continue;
                }
            },
        };
        let affine_resid = affine_problem.slack(&pt.y).sub(&pt.point).frob_norm();
        let dist = linalg::dist_to_psd(&pt.point);
        match pt.kind {
            EpsilonKind::NearFeasible => {
                let ok =
                    dist <= pt.eps * 1.0001 && affine_resid <= 1e-8 * (1.0 + pt.point.frob_norm());
                push(
                    format!("near-feasible point at eps {:.1e}", pt.eps),
                    ok,
                    format!("dist {dist:.3e}, affine residual {affine_resid:.3e}"),
                );
            }
            EpsilonKind::EpsOptimal => {
                let feas_ok = linalg::min_eig(&pt.point) >= -1e-7 * (1.0 + pt.point.frob_norm())
                    && affine_resid <= 1e-7 * (1.0 + pt.point.frob_norm());
                let obj_ok = match report.value.as_finite() {
                    Some(v) => match problem.orientation {
                        crate::model::Orientation::DualForm => {
                            objective >= v - pt.eps && objective <= v + 1e-6 * (1.0 + v.abs())
                        }
                        crate::model::Orientation::PrimalForm => {
                            objective <= v + pt.eps && objective >= v - 1e-6 * (1.0 + v.abs())
                        }
                    },
                    None => false,
                };
                push(
                    format!("eps-optimal point at eps {:.1e}", pt.eps),
                    feas_ok && obj_ok,
                    format!(
                        "recomputed objective {objective:.6}, affine residual {affine_resid:.3e}"
                    ),
                );
            }
        }
    }

    // Status and value conventions.
    if !report.status.is_feasible() {
        push(
            "infeasible value convention".into(),
            report.value == ExtReal::NegInf
                || (problem.orientation == crate::model::Orientation::PrimalForm
                    && report.value == ExtReal::PosInf),
            format!("{:?}", report.value),
        );
    }

    lines
}
