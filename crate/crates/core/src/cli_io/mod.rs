//! Command line interface, SDPA ingestion, JSON reports and the built-in
//! instance catalog.
//!
//! Exit codes: 0 = solved and report written, 1 = I/O or parse error,
//! 2 = contract-violation diagnostics present (or verification failed).

pub mod catalog;
pub mod report;
pub mod sdpa;

pub use report::{read_report, verify_report, write_report};
pub use sdpa::{read_sdpa, read_sdpa_str, write_sdpa};

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::ToleranceConfig;
use crate::model::{ExtReal, Orientation, SdpError, SolveReport};
use crate::pipeline::{complete_solve, solve_primal_form, SolveOptions};

#[derive(Parser, Debug)]
#[command(
    name = "sdpc",
    about = "Completely solve semidefinite programs: status, value, attainment, certificates",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve an SDPA sparse file and emit a JSON report.
    Solve {
        /// Input problem in SDPA sparse format (.dat-s).
        file: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Solve a built-in catalog instance (use `list` to enumerate).
    Catalog {
        /// Instance name, or `list`.
        name: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Re-check every certificate and point in a report against a problem.
    Verify {
        /// Previously written JSON report.
        report: PathBuf,
        /// The problem file the report describes.
        file: PathBuf,
        /// Interpret the file in primal form.
        #[arg(long)]
        primal: bool,
    },
}

#[derive(Args, Debug)]
struct CommonOpts {
    /// Interpret the problem in primal form `inf <c,x> : Ax = b, x PSD`.
    #[arg(long)]
    primal: bool,
    /// Materialize points at these eps values (repeatable).
    #[arg(long = "eps", value_name = "V")]
    eps: Vec<f64>,
    /// Write the JSON report here (defaults to stdout).
    #[arg(short, long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Record every oracle subproblem in the report.
    #[arg(long)]
    trace: bool,
    #[arg(long, value_name = "V")]
    tol_gap: Option<f64>,
    #[arg(long, value_name = "V")]
    tol_feas: Option<f64>,
    #[arg(long, value_name = "V")]
    tol_branch: Option<f64>,
    #[arg(long, value_name = "V")]
    tol_abs: Option<f64>,
    #[arg(long, value_name = "V")]
    tol_rel: Option<f64>,
    #[arg(long, value_name = "V")]
    tol_sub: Option<f64>,
    #[arg(long, value_name = "N")]
    max_iter: Option<usize>,
}

fn env_f64(name: &str) -> Option<f64> {
    std::env::var(name).ok().and_then(|v| v.parse().ok())
}

impl CommonOpts {
    /// Flags win over `SDPC_*` environment variables, which win over the
    /// defaults.
    fn tolerance_config(&self) -> ToleranceConfig {
        let mut cfg = ToleranceConfig::default();
        if let Some(v) = env_f64("SDPC_TOL_GAP") {
            cfg.gap = v;
        }
        if let Some(v) = env_f64("SDPC_TOL_FEAS") {
            cfg.feas = v;
        }
        if let Some(v) = env_f64("SDPC_TOL_BRANCH") {
            cfg.branch = v;
        }
        if let Some(v) = env_f64("SDPC_TOL_ABS") {
            cfg.abs = v;
        }
        if let Some(v) = env_f64("SDPC_TOL_REL") {
            cfg.rel = v;
        }
        if let Some(v) = env_f64("SDPC_TOL_SUB") {
            cfg.sub = v;
        }
        if let Some(v) = std::env::var("SDPC_MAX_ITER")
            .ok()
            .and_then(|v| v.parse().ok())
        {
            cfg.max_iter = v;
        }
        if let Some(v) = self.tol_gap {
            cfg.gap = v;
        }
        if let Some(v) = self.tol_feas {
            cfg.feas = v;
        }
        if let Some(v) = self.tol_branch {
            cfg.branch = v;
        }
        if let Some(v) = self.tol_abs {
            cfg.abs = v;
        }
        if let Some(v) = self.tol_rel {
            cfg.rel = v;
        }
        if let Some(v) = self.tol_sub {
            cfg.sub = v;
        }
        if let Some(v) = self.max_iter {
            cfg.max_iter = v;
        }
        // Loosening the gap alone would violate the branch >= gap rule;
        // keep the branch threshold dominating unless it was pinned.
        if self.tol_branch.is_none() && env_f64("SDPC_TOL_BRANCH").is_none() && cfg.branch < cfg.gap
        {
            cfg.branch = 10.0 * cfg.gap;
        }
        cfg
    }

    fn solve_options(&self) -> SolveOptions {
        let cfg = self.tolerance_config();
        let eps_points = if self.eps.is_empty() {
            vec![cfg.epsilon_default]
        } else {
            self.eps.clone()
        };
        SolveOptions {
            cfg,
            trace: self.trace,
            eps_points,
        }
    }
}

fn value_str(v: &ExtReal) -> String {
    match v {
        ExtReal::PosInf => "+inf".into(),
        ExtReal::NegInf => "-inf".into(),
        f => {
            let x = f.as_finite().unwrap();
            if x == 0.0 || x.abs() >= 1e-4 {
                format!("{x}")
            } else {
                format!("{x:e}")
            }
        }
    }
}

fn print_summary(report: &SolveReport) {
    println!(
        "status:    {}",
        serde_json::to_string(&report.status)
            .unwrap()
            .trim_matches('"')
    );
    println!("value:     {}", value_str(&report.value));
    println!(
        "attained:  {}",
        serde_json::to_string(&report.attained)
            .unwrap()
            .trim_matches('"')
    );
    if let Some(r) = report.minimal_face_rank {
        println!("min face:  rank {r}");
    }
    if let Some(sol) = &report.solution {
        println!(
            "solution:  objective {} (slack rank {})",
            sol.objective, sol.rank
        );
    }
    for pt in &report.epsilon_points {
        println!(
            "eps point: eps {:.1e}  objective {:.6}  min eig {:.2e}  dist {:.2e}",
            pt.eps, pt.objective, pt.slack_min_eig, pt.dist_to_psd
        );
    }
    println!("certificates: {}", report.certificates.len());
    for f in &report.flags {
        println!("flag: {f}");
    }
}

fn emit_report(report: &SolveReport, output: &Option<PathBuf>) -> Result<(), SdpError> {
    match output {
        Some(path) => {
            write_report(report, path)?;
            print_summary(report);
            println!("report written to {}", path.display());
        }
        None => {
            print_summary(report);
            println!(
                "{}",
                serde_json::to_string_pretty(report)
                    .map_err(|e| SdpError::InvalidInput(e.to_string()))?
            );
        }
    }
    Ok(())
}

fn exit_code_for(report: &SolveReport) -> u8 {
    if report
        .flags
        .iter()
        .any(|f| f.contains("contract-violation"))
    {
        2
    } else {
        0
    }
}

fn run_solve(problem: &crate::model::SdpProblem, common: &CommonOpts) -> Result<u8, SdpError> {
    let opts = common.solve_options();
    let report = if common.primal {
        let mut p = problem.clone();
        p.orientation = Orientation::PrimalForm;
        solve_primal_form(&p, &opts)?
    } else {
        complete_solve(problem, &opts)?
    };
    emit_report(&report, &common.output)?;
    Ok(exit_code_for(&report))
}

/// Entry point used by the `sdpc` binary; returns the process exit code.
pub fn cli_main(args: &[String]) -> u8 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version as "errors" with exit code 0.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                SdpError::ContractViolation(_) => 2,
                _ => 1,
            }
        }
    }
}

fn run(cli: Cli) -> Result<u8, SdpError> {
    match cli.command {
        Command::Solve { file, common } => {
            let problem = read_sdpa(&file)?;
            run_solve(&problem, &common)
        }
        Command::Catalog { name, common } => {
            if name == "list" {
                for e in catalog::catalog() {
                    println!("{:18} {}", e.name, e.description);
                }
                return Ok(0);
            }
            let entry = catalog::catalog_entry(&name).ok_or_else(|| {
                SdpError::InvalidInput(format!(
                    "unknown catalog instance `{name}` (try `sdpc catalog list`)"
                ))
            })?;
            println!("instance: {} ({})", entry.name, entry.description);
            run_solve(&entry.problem, &common)
        }
        Command::Verify {
            report,
            file,
            primal,
        } => {
            let rep = read_report(&report)?;
            let mut problem = read_sdpa(&file)?;
            if primal {
                problem.orientation = Orientation::PrimalForm;
            }
            let lines = verify_report(&problem, &rep, &rep.config);
            let mut ok = true;
            for l in &lines {
                println!(
                    "{} {}  ({})",
                    if l.ok { "PASS" } else { "FAIL" },
                    l.what,
                    l.detail
                );
                ok &= l.ok;
            }
            Ok(if ok { 0 } else { 2 })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(list: &[&str]) -> Vec<String> {
        std::iter::once("sdpc".to_string())
            .chain(list.iter().map(|s| s.to_string()))
            .collect()
    }

    #[test]
    fn missing_file_exits_one() {
        assert_eq!(cli_main(&args(&["solve", "/nonexistent/file.dat-s"])), 1);
    }

    #[test]
    fn catalog_list_exits_zero() {
        assert_eq!(cli_main(&args(&["catalog", "list"])), 0);
    }

    #[test]
    fn unknown_catalog_name_exits_one() {
        assert_eq!(cli_main(&args(&["catalog", "no-such-instance"])), 1);
    }
}
