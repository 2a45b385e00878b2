//! Tabular Q-learning over the joint (motion, serving cell) action space.
//!
//! The agent moves on the flight grid one 8-neighbour step at a time and,
//! with every move, picks which of the `M'` strongest cells at the
//! destination serves it. Rewards penalise motion, coverage loss and
//! handoffs with the scenario weights; see [`reward`].

mod mdp;
mod qtable;
mod train;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use mdp::{legal_directions, reward, step, Action, Direction, State, StepKind};
pub use qtable::QTable;
pub use train::{q_update, rollout, select_action, train, EpisodeRecord, TrainOutcome, TrainingLog};

/// What the Q-table conditions on besides the position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum StateMode {
    /// `J x J x 8 x M'`: position only. The handoff term then depends on
    /// history the table cannot see.
    #[default]
    Compact,
    /// `J x J x M' x 8 x M'`: position and the rank of the serving cell
    /// there, which makes the process Markov.
    Extended,
}

/// Which candidate cells an action may select.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Association {
    /// Any of the `M'` strongest cells.
    #[default]
    Ranked,
    /// Always the strongest cell.
    Strongest,
}

/// Learning hyper-parameters and episode limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// `alpha`.
    pub learning_rate: f64,
    /// `beta`.
    pub discount: f64,
    pub epsilon_start: f64,
    pub epsilon_min: f64,
    /// Per-action decrement. `None` spreads the decay over the first 70% of
    /// the expected number of actions, see [`TrainConfig::epsilon_decay`].
    pub epsilon_decay: Option<f64>,
    pub max_episodes: usize,
    /// `None` means `25 J` for a `J x J` grid.
    pub max_steps_per_episode: Option<usize>,
    pub seed: u64,
    pub state_mode: StateMode,
    pub association: Association,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            discount: 0.9,
            epsilon_start: 0.99,
            epsilon_min: 0.01,
            epsilon_decay: None,
            max_episodes: 10_000,
            max_steps_per_episode: None,
            seed: 0,
            state_mode: StateMode::Compact,
            association: Association::Ranked,
        }
    }
}

/// Fraction of the episodes over which the default epsilon schedule decays.
pub const DEFAULT_DECAY_FRACTION: f64 = 0.7;

/// Default step cap per episode, in multiples of the grid side. Shorter caps
/// leave undirected early episodes almost no chance of hitting a far goal.
pub const DEFAULT_STEP_CAP_FACTOR: usize = 25;

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::invalid(format!("learning rate must be in (0, 1], got {}", self.learning_rate)));
        }
        if !(self.discount >= 0.0 && self.discount < 1.0) {
            return Err(Error::invalid(format!("discount must be in [0, 1), got {}", self.discount)));
        }
        if !(0.0 <= self.epsilon_min && self.epsilon_min <= self.epsilon_start && self.epsilon_start <= 1.0) {
            return Err(Error::invalid(format!(
                "need 0 <= epsilon_min ({}) <= epsilon_start ({}) <= 1",
                self.epsilon_min, self.epsilon_start
            )));
        }
        if let Some(d) = self.epsilon_decay {
            if !(d >= 0.0) || !d.is_finite() {
                return Err(Error::invalid(format!("epsilon decay must be non-negative, got {d}")));
            }
        }
        if self.max_episodes == 0 {
            return Err(Error::invalid("max_episodes must be positive"));
        }
        if self.max_steps_per_episode == Some(0) {
            return Err(Error::invalid("max_steps_per_episode must be positive"));
        }
        Ok(())
    }

    pub fn max_steps(&self, grid_points: usize) -> usize {
        self.max_steps_per_episode.unwrap_or(DEFAULT_STEP_CAP_FACTOR * grid_points)
    }

    /// The per-action epsilon decrement. Without an explicit value, epsilon
    /// reaches its floor after `0.7 * max_episodes` episodes of
    /// `expected_steps` actions each.
    pub fn epsilon_decay(&self, expected_steps: usize) -> f64 {
        self.epsilon_decay.unwrap_or_else(|| {
            let actions = DEFAULT_DECAY_FRACTION * self.max_episodes as f64 * expected_steps.max(1) as f64;
            (self.epsilon_start - self.epsilon_min) / actions
        })
    }
}
