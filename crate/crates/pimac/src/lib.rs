//! Achievable-rate regions and minimum-power transceiver design for a
//! multiple access channel that shares its band with a point-to-point link,
//! under treating interference as noise, with proper and improper Gaussian
//! inputs.
//!
//! - [`model`]: channels, real lifting, symbol extension and the closed-form
//!   rate and SINR algebra.
//! - [`convex_core`]: the small dense LP/SDP kernel, bisection and rank-1
//!   recovery.
//! - [`rate_region`]: Pareto-boundary points through the rate-profile method
//!   and a semidefinite relaxation.
//! - [`power_min`]: SINR- and rate-constrained power minimization.

pub mod convex_core;
mod linalg;
pub mod model;
pub mod power_min;
pub mod rate_region;
