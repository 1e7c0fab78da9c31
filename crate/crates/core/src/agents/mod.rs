//! Sample-based learners: tabular expectile Q-learning, a single-critic
//! TD3 variant trained with the expectile loss, domain-randomized training,
//! and bandit-tuned multi-level training.
//!
//! All critics minimize `L_α(y - Q)` for a bootstrap target `y`, which pulls
//! `Q` towards the α-expectile of `y`. At α = ½ this is half the squared TD
//! error.

mod actor_critic;
mod bandit;
mod log;
mod replay;
mod tabular;

pub use actor_critic::{
    auto_train, dr_train, td3_lite_train, ActorCriticAgent, ActorCriticRun, ActorPolicy, RandomBehavior,
    Td3LiteConfig,
};
pub use bandit::{BanditState, DEFAULT_ARMS, DEFAULT_BANDIT_LR, WEIGHT_CLAMP};
pub use log::{EpisodeRecord, TrainingLog};
pub use replay::{ReplayBuffer, Transition};
pub use tabular::{
    q_learning_auto, q_learning_dr, q_learning_expectile, EpsilonSchedule, QLearningConfig, TabularRun,
};

use crate::error::Result;
use crate::expectile::{expectile_loss, expectile_loss_grad};

/// Critic loss `L_α(y - q)` for a prediction `q` and target `y`.
pub fn critic_loss(q: f64, y: f64, alpha: f64) -> Result<f64> {
    expectile_loss(y - q, alpha)
}

/// Derivative of [`critic_loss`] with respect to `q`.
pub fn critic_loss_grad(q: f64, y: f64, alpha: f64) -> Result<f64> {
    Ok(-expectile_loss_grad(y - q, alpha)?)
}
