use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Invalid(String),

    #[error("grid index ({i}, {j}) outside a {points}x{points} grid")]
    OffGrid { i: i64, j: i64, points: usize },

    #[error("deployment has no cells")]
    NoCells,

    #[error("could not place {sites} sites with {min_distance} m separation after {attempts} attempts")]
    Placement {
        sites: usize,
        min_distance: f64,
        attempts: usize,
    },

    #[error("target coincides with the base station position")]
    CoincidentPositions,

    #[error("speed must be positive, got {0} m/s")]
    Speed(f64),

    #[error("mission infeasible: {0}")]
    Infeasible(String),

    #[error("move {direction} is illegal at ({i}, {j})")]
    IllegalMove {
        direction: &'static str,
        i: usize,
        j: usize,
    },

    #[error("no training episode reached the goal within budget: {0}")]
    NoFeasibleEpisode(String),

    #[error("greedy rollout looped at ({i}, {j}) after {steps} steps")]
    RolloutLoop { i: usize, j: usize, steps: usize },

    #[error("greedy rollout hit the {0}-step cap before reaching the goal")]
    RolloutTruncated(usize),

    #[error("instance too large for the exact oracle: {nodes} nodes (limit {limit})")]
    TooLarge { nodes: usize, limit: usize },

    #[error("map does not match scenario: {0}")]
    Mismatch(String),

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
