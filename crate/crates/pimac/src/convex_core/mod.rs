//! Small dense convex kernel.
//!
//! Everything here is sized for desk-scale problems: a handful of PSD blocks
//! no larger than 16×16 and a few dozen scalar constraints. The pieces are
//!
//! - [`solve_lp`]: dense two-phase simplex with Bland's rule,
//! - [`solve_sdp`] / [`find_feasible_sdp`]: a log-barrier interior-point
//!   method over symmetric and Hermitian PSD blocks, optionally with concave
//!   log-determinant constraints,
//! - [`bisect`]: bisection driver for quasi-convex feasibility searches,
//! - [`dominant_rank1`]: best rank-1 approximation with a fixed sign convention,
//! - [`gaussian_randomize`]: rank-1 recovery from a lifted relaxation.

mod barrier;
mod bisect;
mod lp;
mod randomize;
mod rank1;
mod sdp;

pub use barrier::{BarrierProblem, BarrierSolution, LinearIneq, Lmi, LogDetIneq, PhaseOne};
pub use bisect::{bisect, Bisection};
pub use lp::{solve_lp, LinearProgram, LpSolution};
pub use randomize::{gaussian_randomize, Candidate, Randomized};
pub use rank1::{dominant_rank1, dominant_rank1_hermitian};
pub use sdp::{
    find_feasible_sdp, solve_sdp, BlockKind, BlockValue, Coeff, LogDetConstraint, SdpSolution,
    SemidefiniteProgram, Sense, TraceConstraint,
};

use thiserror::Error;

/// Largest PSD block dimension accepted by the SDP front end.
pub const MAX_BLOCK_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConvexError {
    #[error("problem is infeasible")]
    Infeasible,
    #[error("problem is unbounded")]
    Unbounded,
    #[error("numeric failure: {0}")]
    NumericFailure(String),
    #[error("malformed problem: {0}")]
    InvalidProblem(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("oracle is not monotone: infeasible at {infeasible} but feasible at {feasible}")]
    NonMonotone { feasible: f64, infeasible: f64 },
    #[error("no feasible candidate among {tried} randomizations")]
    RandomizationFailed { tried: usize },
}

/// Solver knobs shared by every optimizer in the crate.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Initial barrier weight.
    pub t0: f64,
    /// Barrier weight growth factor.
    pub mu: f64,
    /// Newton steps allowed per centering.
    pub max_newton: usize,
    /// Stop centering once half the squared Newton decrement is below this.
    pub newton_tol: f64,
    /// Constraint satisfaction and relative duality-gap tolerance.
    pub tol_feas: f64,
    /// Bisection resolution in nats.
    pub tol_bis: f64,
    /// Number of Gaussian randomizations.
    pub k_rand: usize,
    /// Base seed for every random choice.
    pub seed: u64,
    /// Noise down-scaling used by the rate-constrained power minimization.
    pub gamma_scale: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            t0: 1.0,
            mu: 10.0,
            max_newton: 100,
            newton_tol: 1e-9,
            tol_feas: 1e-7,
            tol_bis: 1e-4,
            k_rand: 200,
            seed: 0,
            gamma_scale: 100.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), ConvexError> {
        let positive = [
            ("t0", self.t0),
            ("newton_tol", self.newton_tol),
            ("tol_feas", self.tol_feas),
            ("tol_bis", self.tol_bis),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConvexError::InvalidConfig(format!("{name} must be > 0")));
            }
        }
        if !(self.mu > 1.0) {
            return Err(ConvexError::InvalidConfig("mu must be > 1".into()));
        }
        if self.k_rand < 1 {
            return Err(ConvexError::InvalidConfig("k_rand must be ≥ 1".into()));
        }
        if !(self.gamma_scale >= 1.0) {
            return Err(ConvexError::InvalidConfig("gamma_scale must be ≥ 1".into()));
        }
        if self.max_newton == 0 {
            return Err(ConvexError::InvalidConfig("max_newton must be ≥ 1".into()));
        }
        Ok(())
    }

    /// Seed for the `index`-th independent job.
    pub fn seed_for(&self, index: u64) -> u64 {
        self.seed ^ index
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = [
            SolverConfig { tol_bis: 0.0, ..SolverConfig::default() },
            SolverConfig { mu: 1.0, ..SolverConfig::default() },
            SolverConfig { k_rand: 0, ..SolverConfig::default() },
            SolverConfig { gamma_scale: 0.5, ..SolverConfig::default() },
            SolverConfig { max_newton: 0, ..SolverConfig::default() },
            SolverConfig { t0: f64::NAN, ..SolverConfig::default() },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(ConvexError::InvalidConfig(_))), "{c:?}");
        }
    }

    #[test]
    fn job_seeds_differ() {
        let c = SolverConfig { seed: 7, ..SolverConfig::default() };
        assert_eq!(c.seed_for(0), 7);
        assert_ne!(c.seed_for(1), c.seed_for(2));
    }
}
