use rand::Rng;
use serde::{Deserialize, Serialize};

use super::bandit::{BanditState, DEFAULT_BANDIT_LR};
use super::log::{EpisodeRecord, TrainingLog};
use crate::envs::{dr_sample, Action, ActionSpace, EnvFamily, Environment, State};
use crate::error::{invalid, Error, Result};
use crate::expectile::{expectile_loss, expectile_loss_grad};
use crate::mdp::{argmax, Policy, QFunction};
use crate::rng::{derive_seed, rng_from, stream};

/// Linearly decaying exploration rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    /// Episodes over which ε moves from `start` to `end`.
    pub decay_episodes: usize,
}

impl EpsilonSchedule {
    pub fn constant(epsilon: f64) -> Self {
        Self {
            start: epsilon,
            end: epsilon,
            decay_episodes: 0,
        }
    }

    pub fn at(&self, episode: usize) -> f64 {
        if episode >= self.decay_episodes {
            return self.end;
        }
        let t = episode as f64 / self.decay_episodes as f64;
        self.start + (self.end - self.start) * t
    }

    fn check(&self) -> Result<()> {
        for e in [self.start, self.end] {
            if !(0.0..=1.0).contains(&e) {
                return invalid(format!("epsilon {e} outside [0, 1]"));
            }
        }
        Ok(())
    }
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self {
            start: 1.0,
            end: 0.1,
            decay_episodes: 1000,
        }
    }
}

/// Settings for tabular expectile Q-learning.
///
/// The step size for the `n`-th visit of a pair is `lr / n^lr_decay`;
/// `lr_decay = 0` keeps it constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QLearningConfig {
    pub alpha: f64,
    pub lr: f64,
    pub lr_decay: f64,
    pub episodes: usize,
    pub epsilon: EpsilonSchedule,
    pub seed: u64,
    /// Draw a fresh environment parameter from the family's box every episode.
    pub domain_randomization: bool,
    /// Candidate levels for the bandit-tuned variant.
    pub arms: Vec<f64>,
    pub bandit_lr: f64,
}

impl Default for QLearningConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            lr: 0.5,
            lr_decay: 0.6,
            episodes: 2000,
            epsilon: EpsilonSchedule::default(),
            seed: 0,
            domain_randomization: false,
            arms: super::bandit::DEFAULT_ARMS.to_vec(),
            bandit_lr: DEFAULT_BANDIT_LR,
        }
    }
}

impl QLearningConfig {
    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return invalid("lr must be positive");
        }
        if !(self.lr_decay >= 0.0 && self.lr_decay <= 1.0) {
            return invalid("lr_decay must lie in [0, 1]");
        }
        self.epsilon.check()
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("expectile level {alpha} outside (0, 1)"));
    }
    Ok(())
}

/// Outcome of a tabular run: one Q-table per expectile level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularRun {
    pub arms: Vec<f64>,
    pub heads: Vec<QFunction>,
    pub bandit: Option<BanditState>,
    pub log: TrainingLog,
}

impl TabularRun {
    /// Head used for deployment: the bandit's most likely arm, or the only one.
    pub fn best_head(&self) -> usize {
        self.bandit.as_ref().map_or(0, BanditState::best_arm)
    }

    pub fn q(&self) -> &QFunction {
        &self.heads[self.best_head()]
    }

    pub fn greedy_policy(&self) -> Policy {
        self.q().greedy_policy()
    }
}

/// Expectile Q-learning on a discrete family.
///
/// Each transition moves `q(s, a)` down the gradient of `L_α(y - q(s, a))`
/// with `y = r + γ max_a' q(s', a')` (no bootstrap past terminal states),
/// so `q` tracks the α-expectile of the target rather than its mean.
pub fn q_learning_expectile(family: &dyn EnvFamily, config: &QLearningConfig) -> Result<TabularRun> {
    config.validate()?;
    train_tables(family, config, &[config.alpha], false)
}

/// [`q_learning_expectile`] with domain randomization switched on.
pub fn q_learning_dr(family: &dyn EnvFamily, config: &QLearningConfig) -> Result<TabularRun> {
    let config = QLearningConfig {
        domain_randomization: true,
        ..config.clone()
    };
    q_learning_expectile(family, &config)
}

/// Bandit-tuned tabular variant: one independent Q-table per candidate level,
/// all updated on every transition with a shared visit counter. Each episode
/// acts greedily with respect to the table of a sampled arm.
pub fn q_learning_auto(family: &dyn EnvFamily, config: &QLearningConfig) -> Result<TabularRun> {
    config.validate()?;
    if config.domain_randomization {
        return Err(Error::Unsupported(
            "bandit tuning cannot be combined with domain randomization".into(),
        ));
    }
    if config.arms.is_empty() {
        return invalid("at least one arm is required");
    }
    for &a in &config.arms {
        check_alpha(a)?;
    }
    train_tables(family, config, &config.arms, true)
}

fn discrete_shape(env: &dyn Environment) -> Result<(usize, usize)> {
    let n_actions = match env.action_space() {
        ActionSpace::Discrete(n) => n,
        ActionSpace::Continuous { .. } => {
            return Err(Error::Unsupported("tabular learners need discrete actions".into()))
        }
    };
    let n_states = env
        .n_states()
        .ok_or_else(|| Error::Unsupported("tabular learners need discrete states".into()))?;
    Ok((n_states, n_actions))
}

fn state_index(state: &State) -> Result<usize> {
    state
        .index()
        .ok_or_else(|| Error::Unsupported("tabular learners need discrete states".into()))
}

fn train_tables(
    family: &dyn EnvFamily,
    config: &QLearningConfig,
    arms: &[f64],
    use_bandit: bool,
) -> Result<TabularRun> {
    let nominal = family.nominal_omega().to_vec();
    let mut env = family.make(&nominal)?;
    let (n_states, n_actions) = discrete_shape(env.as_ref())?;
    let gamma = family.gamma();

    let mut heads = vec![QFunction::zeros(n_states, n_actions); arms.len()];
    let mut visits = vec![0u64; n_states * n_actions];
    let mut bandit = if use_bandit {
        Some(BanditState::new(arms.to_vec(), config.bandit_lr)?)
    } else {
        None
    };
    let mut explore = rng_from(config.seed, &[stream::EXPLORATION]);
    let mut domain = rng_from(config.seed, &[stream::DOMAIN]);
    let mut bandit_rng = rng_from(config.seed, &[stream::BANDIT]);
    let mut log = TrainingLog::default();
    let mut total_steps = 0;

    for episode in 0..config.episodes {
        let omega = if config.domain_randomization {
            let omega = dr_sample(family, &mut domain);
            env = family.make(&omega)?;
            if discrete_shape(env.as_ref())? != (n_states, n_actions) {
                return invalid("family members disagree on the state or action count");
            }
            omega
        } else {
            nominal.clone()
        };
        let arm = match &bandit {
            Some(b) => b.sample(&mut bandit_rng),
            None => 0,
        };
        env.observe_arm(arm);
        let epsilon = config.epsilon.at(episode);
        let mut s = state_index(&env.reset(derive_seed(config.seed, &[stream::ENV, episode as u64])))?;
        let mut episode_return = 0.0;
        let mut loss_sum = 0.0;
        let mut updates = 0usize;
        for _ in 0..env.horizon() {
            let a = if explore.random::<f64>() < epsilon {
                explore.random_range(0..n_actions)
            } else {
                argmax(heads[arm].row(s))
            };
            let step = env.step(&Action::Discrete(a));
            let s2 = state_index(&step.state)?;
            total_steps += 1;
            episode_return += step.reward;

            let idx = s * n_actions + a;
            visits[idx] += 1;
            let lr = config.lr / (visits[idx] as f64).powf(config.lr_decay);
            for (q, &alpha) in heads.iter_mut().zip(arms) {
                let bootstrap = if step.done { 0.0 } else { gamma * q.max(s2) };
                let y = step.reward + bootstrap;
                let u = y - q.get(s, a);
                loss_sum += expectile_loss(u, alpha)?;
                // d/dq L(y - q) = -L'(u)
                *q.get_mut(s, a) += lr * expectile_loss_grad(u, alpha)?;
            }
            updates += arms.len();
            s = s2;
            if step.done {
                break;
            }
        }
        if let Some(b) = bandit.as_mut() {
            b.update(arm, episode_return)?;
        }
        log.push(EpisodeRecord {
            episode,
            step: total_steps,
            arm,
            alpha: arms[arm],
            episode_return,
            critic_loss: if updates > 0 { loss_sum / updates as f64 } else { 0.0 },
            omega,
            bandit_probs: bandit.as_ref().map_or_else(|| vec![1.0], |b| b.probs().to_vec()),
        });
    }
    Ok(TabularRun {
        arms: arms.to_vec(),
        heads,
        bandit,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bellman::{value_iteration, OperatorKind};
    use crate::envs::synthetic::{FixedFamily, SafeRiskyBandit, ZeroRewardEnv};
    use crate::envs::{TabularEnv, TabularFamily};
    use crate::expectile::{expectile_discrete, DiscreteDistribution, DEFAULT_TOL};
    use crate::mdp::TabularMdp;

    fn chain_family(mdp: TabularMdp, horizon: usize) -> FixedFamily<TabularEnv> {
        let n = mdp.n_states();
        let gamma = mdp.gamma();
        let env = TabularEnv::new(mdp, vec![false; n], horizon, 0.0).unwrap();
        FixedFamily::new("chain", env, gamma)
    }

    #[test]
    fn self_loop_converges_to_discounted_sum() {
        let mdp = TabularMdp::new(1, 1, vec![1.0], vec![1.0], 0.5, vec![1.0]).unwrap();
        let fam = chain_family(mdp, 50);
        let cfg = QLearningConfig {
            episodes: 200,
            ..Default::default()
        };
        let run = q_learning_expectile(&fam, &cfg).unwrap();
        assert!((run.q().get(0, 0) - 2.0).abs() < 0.01, "{}", run.q().get(0, 0));
    }

    #[test]
    fn neutral_level_matches_value_iteration_on_a_chain() {
        // 0 -> 1 -> 2 -> 2; action 1 stays put. Reward 1 for moving out of 1.
        let mut p = vec![0.0; 3 * 2 * 3];
        let mut r = vec![0.0; 6];
        for s in 0..3 {
            p[(s * 2) * 3 + (s + 1).min(2)] = 1.0;
            p[(s * 2 + 1) * 3 + s] = 1.0;
        }
        r[2] = 1.0;
        r[4] = 0.5;
        let mdp = TabularMdp::new(3, 2, p, r, 0.8, vec![1.0 / 3.0; 3]).unwrap();
        let vi = value_iteration(&mdp, OperatorKind::ClassicalOptimal, None, 1e-10, 10_000).unwrap();
        let run = q_learning_expectile(
            &chain_family(mdp.clone(), 40),
            &QLearningConfig {
                episodes: 3000,
                epsilon: EpsilonSchedule::constant(0.5),
                ..Default::default()
            },
        )
        .unwrap();
        for s in 0..3 {
            assert!((run.q().max(s) - vi.value.0[s]).abs() < 0.05, "state {s}: {} vs {}", run.q().max(s), vi.value.0[s]);
        }
    }

    #[test]
    fn pessimistic_level_prefers_the_safe_arm() {
        let fam = FixedFamily::new("safe_risky", SafeRiskyBandit::new(), 0.9);
        let cfg = QLearningConfig {
            alpha: 0.2,
            episodes: 4000,
            epsilon: EpsilonSchedule::constant(0.3),
            seed: 3,
            ..Default::default()
        };
        let run = q_learning_expectile(&fam, &cfg).unwrap();
        let dist = DiscreteDistribution::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let target = expectile_discrete(&dist, 0.2, DEFAULT_TOL).unwrap();
        assert!((run.q().get(0, 1) - target).abs() < 0.05, "{}", run.q().get(0, 1));
        assert_eq!(run.q().argmax(0), 0);
    }

    #[test]
    fn continuous_input_is_rejected() {
        let fam = FixedFamily::new("zero", ZeroRewardEnv::new(3), 0.9);
        assert!(matches!(
            q_learning_expectile(&fam, &QLearningConfig::default()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn degenerate_box_matches_nominal_training() {
        let fam = TabularFamily::slip_grid()
            .with_box_and_nominal(vec![[0.1, 0.1]], vec![0.1])
            .unwrap();
        let cfg = QLearningConfig {
            episodes: 30,
            seed: 9,
            ..Default::default()
        };
        let plain = q_learning_expectile(&fam, &cfg).unwrap();
        let dr = q_learning_dr(&fam, &cfg).unwrap();
        assert_eq!(plain.heads, dr.heads);
        assert_eq!(plain.log, dr.log);
    }

    #[test]
    fn training_is_deterministic() {
        let fam = TabularFamily::cliff_grid();
        let cfg = QLearningConfig {
            episodes: 20,
            seed: 4,
            ..Default::default()
        };
        let a = q_learning_auto(&fam, &cfg).unwrap();
        let b = q_learning_auto(&fam, &cfg).unwrap();
        assert_eq!(a.log.to_csv_string().unwrap(), b.log.to_csv_string().unwrap());
        assert_eq!(a.heads, b.heads);
        let dr = QLearningConfig {
            domain_randomization: true,
            ..cfg
        };
        assert!(matches!(q_learning_auto(&fam, &dr), Err(Error::Unsupported(_))));
    }
}
