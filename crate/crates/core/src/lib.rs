//! Reply-storm pacing for service discovery: a reply pacing planner and a
//! deterministic packet-level simulator to check it against.

pub mod harness;
pub mod planner;
pub mod protocol;
pub mod scalar;
pub mod sim;
pub mod time;
pub mod topology;

use num_rational::Ratio;

pub use harness::{compare, run_scenario, Scenario};
pub use planner::best_interval;
pub use scalar::Scalar;
pub use time::SimTime;
pub use topology::{reference_network, Layout, Network};

/// Exact rational scalar for hand-checkable planner arithmetic.
pub type Exact = Ratio<i64>;

/// Planner output in double precision, as used by the harness.
pub type Plan = planner::PacingPlan<f64>;
pub type PlanF32 = planner::PacingPlan<f32>;
pub type PlanExact = planner::PacingPlan<Exact>;

pub type Profile = planner::BurstProfile<f64>;
pub type ProfileExact = planner::BurstProfile<Exact>;
