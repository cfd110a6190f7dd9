//! Complete solver for semidefinite programs.
//!
//! Given an SDP in dual form
//!
//! ```text
//! sup  <b, y>
//! s.t. c - sum_i A_i y_i  PSD
//! ```
//!
//! this library classifies its feasibility status (strongly/weakly feasible,
//! weakly/strongly infeasible), computes the optimal value including the
//! unbounded case, decides whether the value is attained, returns a
//! maximal-rank optimal solution when it is, and produces eps-optimal or
//! eps-near-feasible points when it is not. Every claim is backed by a
//! verifiable certificate: reducing chains for face confinement and
//! infeasibility, Farkas-style witnesses for strong infeasibility, improving
//! rays for unboundedness.
//!
//! The engine is a single interior point solver for problems that are
//! strongly feasible on both sides. All degenerate behaviour is handled by
//! reducing the input to a finite sequence of such well-behaved subproblems:
//! facial reduction steps, nonzero-PSD-direction searches, block-partition
//! truncations and completion problems.
//!
//! Entry points: [`pipeline::complete_solve`] for dual-form problems,
//! [`pipeline::solve_primal_form`] for primal-form ones, and the `sdpc`
//! binary for SDPA sparse files.

pub mod cli_io;
pub mod config;
pub mod facial_reduction;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod partition;
pub mod pipeline;
pub mod recovery;
pub mod valuation;

pub use config::ToleranceConfig;
pub use linalg::{OrthogonalMatrix, SymMatrix};
pub use model::{ExtReal, Face, FeasStatus, LinearMapA, SdpError, SdpProblem, SolveReport};
pub use pipeline::{complete_solve, solve_primal_form, SolveOptions};
