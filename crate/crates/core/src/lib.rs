//! Joint trajectory planning and cell association for cellular-connected
//! cargo UAVs.
//!
//! The crate is organised bottom-up:
//!
//! * [`scenario`]: grid, base-station deployment and mission configuration
//! * [`radio`]: antenna, LoS and pathloss models and the ranked RSRP map
//! * [`energy`]: rotary-wing propulsion power and energy accounting
//! * [`planner`]: the MDP, reward and tabular Q-learning trainer
//! * [`baselines`]: shortest-path and RSRP-aware comparison planners
//! * [`eval`]: mission metrics, RSRP CDF and exact oracles (shortest-path and discounted)

// Checks like `!(x > 0.0)` are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod energy;
pub mod error;
pub mod eval;
pub mod planner;
pub mod radio;
pub mod scenario;
pub mod trajectory;

pub use error::{Error, Result};
pub use radio::RadioMap;
pub use scenario::{Cell, GridPoint, GridSpec, Scenario, Weights};
pub use trajectory::Trajectory;
