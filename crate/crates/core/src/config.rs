//! Central tolerance configuration threaded through every module.
//!
//! All rank, sign and branch decisions in the solver go through one knob set
//! so that loosening or tightening the arithmetic is a single-site change.

use serde::{Deserialize, Serialize};

/// Tolerances and iteration limits shared by all modules.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ToleranceConfig {
    /// Absolute floor for rank/zero decisions on eigenvalues.
    pub abs: f64,
    /// Relative factor for rank/zero decisions on eigenvalues.
    pub rel: f64,
    /// Interior point duality-gap target.
    pub gap: f64,
    /// Interior point feasibility-residual target.
    pub feas: f64,
    /// Facial-reduction branch threshold on the auxiliary optimal value.
    /// Kept looser than `gap` so solver noise cannot flip a branch.
    pub branch: f64,
    /// Subspace membership / projection-residual tolerance.
    pub sub: f64,
    /// Interior point iteration cap.
    pub max_iter: usize,
    /// Default eps for eps-optimal / eps-near-feasible point generation.
    pub epsilon_default: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            abs: 1e-9,
            rel: 1e-9,
            gap: 1e-8,
            feas: 1e-8,
            branch: 1e-7,
            sub: 1e-9,
            max_iter: 200,
            epsilon_default: 1e-3,
        }
    }
}

impl ToleranceConfig {
    /// Eigenvalue threshold for rank decisions on a matrix whose extreme
    /// eigenvalue magnitude is `lam_max`.
    pub fn rank_threshold(&self, lam_max: f64) -> f64 {
        self.abs + self.rel * lam_max
    }

    /// Validates the invariants all callers rely on.
    pub fn validate(&self) -> Result<(), String> {
        let fields = [
            ("abs", self.abs),
            ("rel", self.rel),
            ("gap", self.gap),
            ("feas", self.feas),
            ("branch", self.branch),
            ("sub", self.sub),
            ("epsilon_default", self.epsilon_default),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v <= 0.0 {
                return Err(format!("tolerance `{name}` must be positive and finite"));
            }
        }
        if self.max_iter == 0 {
            return Err("max_iter must be positive".into());
        }
        if self.branch < self.gap {
            return Err("branch tolerance must dominate the oracle gap tolerance".into());
        }
        Ok(())
    }
}
