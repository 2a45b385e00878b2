//! Mission metrics, RSRP CDF and the exact oracles.

mod discounted;
mod metrics;
mod oracle;

pub use metrics::{
    count_handoffs, disconnectivity_distance, evaluate, normalized_objective, objective_value, rsrp_cdf, EmpiricalCdf,
    MissionMetrics,
};
pub use discounted::{discounted_optimal, DiscountedSolution};
pub use oracle::{oracle_optimal, oracle_optimal_with_limit, OracleSolution, DEFAULT_NODE_LIMIT};
