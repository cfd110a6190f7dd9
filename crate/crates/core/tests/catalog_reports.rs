//! Full-catalog pipeline checks: every instance solves to its ground
//! truth, every report is internally consistent, every certificate and
//! point passes the verifier, and the SDPA writer round-trips the data.

use sdpc::cli_io::catalog::{catalog, gap_instance};
use sdpc::cli_io::{read_sdpa_str, verify_report, write_sdpa};
use sdpc::config::ToleranceConfig;
use sdpc::model::{Attainment, ExtReal, FeasStatus, Orientation};
use sdpc::pipeline::{complete_solve, solve_primal_form, SolveOptions};

fn values_match(got: ExtReal, want: ExtReal) -> bool {
    match (got, want) {
        (ExtReal::PosInf, ExtReal::PosInf) | (ExtReal::NegInf, ExtReal::NegInf) => true,
        (a, b) => match (a.as_finite(), b.as_finite()) {
            (Some(x), Some(y)) => (x - y).abs() <= 1e-6 * (1.0 + y.abs()),
            _ => false,
        },
    }
}

#[test]
fn catalog_ground_truth_and_verification() {
    let opts = SolveOptions {
        eps_points: vec![1e-2],
        ..SolveOptions::default()
    };
    let cfg = ToleranceConfig::default();
    for entry in catalog() {
        let report = complete_solve(&entry.problem, &opts)
            .unwrap_or_else(|e| panic!("{} failed: {e}", entry.name));
        assert_eq!(report.status, entry.status, "{}: status", entry.name);
        assert!(
            values_match(report.value, entry.value),
            "{}: value {:?} want {:?}",
            entry.name,
            report.value,
            entry.value
        );
        assert_eq!(
            report.attained, entry.attained,
            "{}: attainment",
            entry.name
        );
        assert!(
            report
                .flags
                .iter()
                .all(|f| !f.contains("contract-violation")),
            "{}: flags {:?}",
            entry.name,
            report.flags
        );
        let issues = report.check_consistency(Some(&entry.problem));
        assert!(issues.is_empty(), "{}: {issues:?}", entry.name);
        // The report verifier accepts everything the solver emitted.
        for line in verify_report(&entry.problem, &report, &cfg) {
            assert!(
                line.ok,
                "{}: verify {} ({})",
                entry.name, line.what, line.detail
            );
        }
    }
}

#[test]
fn sdpa_round_trip_on_catalog() {
    for entry in catalog() {
        let text = write_sdpa(&entry.problem, entry.description);
        let back = read_sdpa_str(&text).unwrap();
        assert_eq!(back.n(), entry.problem.n(), "{}", entry.name);
        assert_eq!(back.m(), entry.problem.m(), "{}", entry.name);
        assert_eq!(back.b, entry.problem.b, "{}", entry.name);
        assert!(
            back.c.sub(&entry.problem.c).frob_norm() < 1e-14,
            "{}",
            entry.name
        );
        for (a, b) in back.a.mats().iter().zip(entry.problem.a.mats()) {
            assert!(a.sub(b).frob_norm() < 1e-14, "{}", entry.name);
        }
    }
}

#[test]
fn trace_records_oracle_calls() {
    let entry = catalog().into_iter().find(|e| e.name == "dex").unwrap();
    let opts = SolveOptions {
        trace: true,
        eps_points: vec![],
        ..SolveOptions::default()
    };
    let report = complete_solve(&entry.problem, &opts).unwrap();
    let trace = report.trace.expect("trace requested");
    assert!(!trace.is_empty());
    // Facial reduction, the nonzero-PSD searches and the value problem all
    // show up with their own labels.
    let labels: std::collections::HashSet<&str> = trace.iter().map(|t| t.label.as_str()).collect();
    assert!(labels.contains("fr-step"));
    assert!(labels.contains("nonzero-psd"));
    assert!(labels.contains("value-small"));
}

/// The gap family seen from the primal side: the primal value is the scale
/// parameter (attained), strictly above the dual value 0. The pipeline is
/// immune to the gap on both sides.
#[test]
fn gap_family_primal_side() {
    for scale in [1.0, 2.5] {
        let mut p = gap_instance(scale);
        p.orientation = Orientation::PrimalForm;
        let report = solve_primal_form(&p, &SolveOptions::default()).unwrap();
        let got = report.value.as_finite().expect("finite primal value");
        assert!(
            (got - scale).abs() <= 1e-6 * (1.0 + scale),
            "scale {scale}: theta_P = {got}"
        );
        assert_eq!(report.attained, Attainment::Yes);
        assert_eq!(report.status, FeasStatus::WeakFeasible);
        let sol = report.solution.expect("attained solution");
        // The recovered matrix is primal feasible with the right objective.
        let ax = p.a.forward(&sol.slack);
        for (got_b, want_b) in ax.iter().zip(&p.b) {
            assert!((got_b - want_b).abs() < 1e-6);
        }
        assert!(sdpc::linalg::min_eig(&sol.slack) >= -1e-7);
    }
}

/// Sampled optimality: no feasible point near the returned interior point
/// beats the reported optimal value.
#[test]
fn sampled_points_never_beat_reported_value() {
    use rand::{Rng, SeedableRng};
    let entry = catalog().into_iter().find(|e| e.name == "sf-lp").unwrap();
    let report = complete_solve(&entry.problem, &SolveOptions::default()).unwrap();
    let theta = report.value.as_finite().unwrap();
    let sol = report.solution.as_ref().unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let cfg = ToleranceConfig::default();
    let mut tried = 0;
    while tried < 200 {
        let y: Vec<f64> = sol.y.iter().map(|v| v + rng.gen_range(-0.5..0.5)).collect();
        let slack = entry.problem.slack(&y);
        if sdpc::linalg::is_psd(&slack, &cfg) {
            tried += 1;
            let obj: f64 = entry.problem.b.iter().zip(&y).map(|(a, b)| a * b).sum();
            assert!(
                obj <= theta + 1e-7,
                "sampled feasible point beats the optimum"
            );
        } else {
            tried += 1;
        }
    }
}
