//! Mission planning for a rotary-wing UAV that wirelessly charges ground
//! users and collects their uplink data.
//!
//! The library is organized around the stages of the mission pipeline:
//!
//! - [`propulsion`]: rotary-wing power and energy models for straight and
//!   vertical flight.
//! - [`kinematics`]: feasible 1-D velocity profiles, trajectory
//!   discretization and constraint validation.
//! - [`sca`]: successive convex approximation refinement of straight and
//!   vertical trajectories, with an internal barrier solver for the
//!   convexified subproblems.
//! - [`order`]: energy-optimal user visiting order via a dual/subgradient
//!   method, with an exhaustive oracle and an assignment-based repair step.
//! - [`hover`]: channel model and hover-phase solvers for half-duplex
//!   (closed form via Lambert-W) and full-duplex (bisection) operation.
//! - [`scenario`] / [`planner`]: scenario ingestion, per-user hover-height
//!   optimization, full mission assembly and parameter sweeps.
//!
//! The numeric core ([`propulsion`], [`kinematics`], [`lambert`],
//! [`search`]) is generic over the scalar type through the [`real::Real`]
//! trait; concrete `f64` aliases are exported at the crate root. The
//! iterative solvers and the planner are `f64` only.

pub mod error;
pub mod hover;
pub mod kinematics;
pub mod lambert;
pub mod order;
pub mod planner;
pub mod propulsion;
pub mod real;
pub mod sca;
pub mod scenario;
pub mod search;

pub use error::Error;
pub use real::Real;

/// `f64` instantiations of the scalar-generic core types.
pub type AirframeParams = propulsion::AirframeParams<f64>;
pub type PowerConstants = propulsion::PowerConstants<f64>;
pub type KinematicLimits = kinematics::KinematicLimits<f64>;
pub type VelocityProfile = kinematics::VelocityProfile<f64>;
pub type DiscreteTrajectory = kinematics::DiscreteTrajectory<f64>;

/// Convenience result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
