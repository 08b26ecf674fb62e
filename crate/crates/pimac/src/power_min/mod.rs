//! Transmit power minimization under SINR or rate demands.
//!
//! SINR demands are handled on the two real streams each user sends in the
//! lifted domain, either with fixed beamformers and a power LP
//! ([`separate_min_power`]) or by alternating MMSE receivers with a relaxed
//! covariance program ([`joint_min_power`]). Rate demands under successive
//! decoding are met by a convex-concave procedure over full lifted
//! covariances ([`ccp_min_power_rates`]), optionally over symbol extensions.
//! Proper baselines reduce to power-control LPs over complex scalar powers.

mod rates;
mod sinr;
mod table;

pub use rates::{ccp_min_power_rates, fenchel_upper_bound, proper_min_power_rates};
pub use sinr::{
    algorithm1_beamformers, initial_layout, joint_min_power, mmse_receiver, power_lp, proper_min_power_sinr,
    separate_min_power,
};
pub use table::{successive_opt, SuccessiveOpt};

use thiserror::Error;

use crate::convex_core::{ConvexError, SolverConfig};
use crate::model::{Decoding, ModelError, StreamLayout, TransmitCovariance};
use crate::rate_region::RegionError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PowerError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Convex(#[from] ConvexError),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error("invalid demands: {0}")]
    InvalidDemands(String),
}

/// Quality-of-service targets.
#[derive(Debug, Clone, PartialEq)]
pub enum Demands {
    /// SINR target of every real stream, indexed `[user][stream]`.
    SinrPerStream(Vec<Vec<f64>>),
    /// SINR target of every complex user signal.
    SinrPerUser(Vec<f64>),
    /// Rate target of every user in bits per channel use.
    RatePerUser(Vec<f64>),
}

impl Demands {
    /// Two-stream SINR demands with the same target everywhere.
    pub fn uniform_sinr(users: usize, gamma: f64) -> Self {
        Demands::SinrPerStream(vec![vec![gamma; 2]; users])
    }

    pub fn uniform_rate(users: usize, beta: f64) -> Self {
        Demands::RatePerUser(vec![beta; users])
    }

    fn check(values: &[f64]) -> Result<(), PowerError> {
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(PowerError::InvalidDemands("demands must be finite and ≥ 0".into()));
        }
        Ok(())
    }

    /// Per-stream SINR targets for `users` users with two streams each. A
    /// complex SINR `γ` splits into two real streams that each need `γ`,
    /// since each carries half of `log2(1 + γ)`.
    pub fn per_stream(&self, users: usize) -> Result<Vec<Vec<f64>>, PowerError> {
        let out = match self {
            Demands::SinrPerStream(g) => g.clone(),
            Demands::SinrPerUser(g) => g.iter().map(|&v| vec![v, v]).collect(),
            Demands::RatePerUser(_) => {
                return Err(PowerError::InvalidDemands("expected SINR demands, got rates".into()))
            }
        };
        if out.len() != users {
            return Err(PowerError::InvalidDemands(format!("{} users in demands, {users} in channel", out.len())));
        }
        for s in &out {
            Self::check(s)?;
        }
        Ok(out)
    }

    /// Per-user complex SINR targets; per-stream demands take the larger of
    /// the two stream targets.
    pub fn per_user(&self, users: usize) -> Result<Vec<f64>, PowerError> {
        let out = match self {
            Demands::SinrPerStream(g) => g.iter().map(|s| s.iter().cloned().fold(0.0, f64::max)).collect(),
            Demands::SinrPerUser(g) => g.clone(),
            Demands::RatePerUser(_) => {
                return Err(PowerError::InvalidDemands("expected SINR demands, got rates".into()))
            }
        };
        if out.len() != users {
            return Err(PowerError::InvalidDemands(format!("{} users in demands, {users} in channel", out.len())));
        }
        Self::check(&out)?;
        Ok(out)
    }

    pub fn rates(&self, users: usize) -> Result<Vec<f64>, PowerError> {
        let Demands::RatePerUser(b) = self else {
            return Err(PowerError::InvalidDemands("expected rate demands".into()));
        };
        if b.len() != users {
            return Err(PowerError::InvalidDemands(format!("{} users in demands, {users} in channel", b.len())));
        }
        Self::check(b)?;
        Ok(b.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Converged,
    Infeasible,
    IterLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerResult {
    /// Total power per channel use.
    pub total: f64,
    pub per_user: Vec<f64>,
    /// Lifted transmit covariances; empty when infeasible.
    pub covariances: Vec<TransmitCovariance>,
    /// Beamformers and stream powers for the stream-based solvers.
    pub layout: Option<StreamLayout>,
    /// Rank of every stream covariance (joint solver only).
    pub ranks: Vec<Vec<usize>>,
    pub iterations: usize,
    pub status: Status,
    /// Smallest relative margin `(achieved − demand) / max(demand, 1)` over
    /// all constrained users or streams.
    pub audit_slack: f64,
    /// Total power after every outer iteration.
    pub history: Vec<f64>,
    /// Linearization gap after every outer iteration (CCP only).
    pub gaps: Vec<f64>,
}

impl PowerResult {
    pub fn infeasible(users: usize, iterations: usize) -> Self {
        Self {
            total: f64::INFINITY,
            per_user: vec![f64::INFINITY; users],
            covariances: Vec::new(),
            layout: None,
            ranks: Vec::new(),
            iterations,
            status: Status::Infeasible,
            audit_slack: f64::NAN,
            history: Vec::new(),
            gaps: Vec::new(),
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.status != Status::Infeasible
    }

    fn from_covariances(covariances: Vec<TransmitCovariance>, status: Status, iterations: usize) -> Self {
        let per_user: Vec<f64> = covariances.iter().map(|q| q.power()).collect();
        Self {
            total: per_user.iter().sum(),
            per_user,
            covariances,
            layout: None,
            ranks: Vec::new(),
            iterations,
            status,
            audit_slack: f64::INFINITY,
            history: Vec::new(),
            gaps: Vec::new(),
        }
    }
}

fn relative_slack(achieved: f64, demand: f64) -> f64 {
    (achieved - demand) / demand.max(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerOptions {
    pub solver: SolverConfig,
    /// Stream decoding rule for SINR demands.
    pub decoding: Decoding,
    /// Outer iterations of the alternating and CCP loops.
    pub max_iter: usize,
    /// Convergence tolerance of the alternating loops.
    pub tol: f64,
    /// CCP linearization-gap threshold.
    pub eps_star: f64,
    /// Random re-initializations of the CCP linearization points.
    pub r_reinit: usize,
    /// Random starts of the joint solver besides the separate solution.
    pub starts: usize,
    /// Per-user power, split evenly over the streams and clipped to the cap,
    /// at which the separate solver designs its beamformers.
    pub design_power: f64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            decoding: Decoding::Parallel,
            max_iter: 100,
            tol: 1e-6,
            eps_star: 1e-4,
            r_reinit: 10,
            starts: 4,
            design_power: 1.0,
        }
    }
}

impl PowerOptions {
    fn validate(&self) -> Result<(), PowerError> {
        self.solver.validate()?;
        if !(self.tol > 0.0 && self.eps_star > 0.0 && self.design_power > 0.0) {
            return Err(ConvexError::InvalidConfig("tol, eps_star and design_power must be > 0".into()).into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demand_shapes() {
        let d = Demands::SinrPerUser(vec![0.1, 0.2, 0.3]);
        assert_eq!(d.per_stream(3).unwrap()[1], vec![0.2, 0.2]);
        assert!(d.per_stream(2).is_err());
        assert!(d.rates(3).is_err());
        let s = Demands::SinrPerStream(vec![vec![0.1, 0.4], vec![0.2, 0.2]]);
        assert_eq!(s.per_user(2).unwrap(), vec![0.4, 0.2]);
        assert!(Demands::RatePerUser(vec![0.5, f64::NAN]).rates(2).is_err());
        assert!(Demands::RatePerUser(vec![0.5, -0.1]).rates(2).is_err());
        assert!(Demands::RatePerUser(vec![0.5]).per_user(1).is_err());
    }

    #[test]
    fn slack_is_relative_above_one() {
        assert_eq!(relative_slack(3.0, 2.0), 0.5);
        assert_eq!(relative_slack(0.3, 0.5), -0.2);
    }
}
