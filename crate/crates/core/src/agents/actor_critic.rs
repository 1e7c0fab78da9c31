use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::bandit::{BanditState, DEFAULT_ARMS, DEFAULT_BANDIT_LR};
use super::log::{EpisodeRecord, TrainingLog};
use super::replay::{ReplayBuffer, Transition};
use super::{critic_loss, critic_loss_grad};
use crate::approx::{Activation, MultiHeadNet, Optimizer, OptimizerKind, TargetCopy};
use crate::envs::{dr_sample, Action, ActionSpace, Behavior, EnvFamily, Environment, State};
use crate::error::{invalid, Error, Result};
use crate::rng::{derive_seed, rng_from, stream, ChaCha8Rng};

/// Settings for the actor-critic learners.
///
/// Exploration noise is a standard deviation in units of the action
/// half-range. `gamma` defaults to the family's discount.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Td3LiteConfig {
    pub alpha: f64,
    pub lr_actor: f64,
    pub lr_critic: f64,
    pub batch: usize,
    pub gamma: Option<f64>,
    /// Weight kept on the target parameters at each Polyak update.
    pub tau: f64,
    pub actor_delay: usize,
    pub exploration_noise: f64,
    pub warmup_steps: usize,
    pub total_steps: usize,
    pub buffer_capacity: usize,
    pub hidden: Vec<usize>,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    pub domain_randomization: bool,
    /// Reference TD3 variant with two critics and a min over their targets.
    pub twin_critic: bool,
    pub arms: Vec<f64>,
    pub bandit_lr: f64,
}

impl Default for Td3LiteConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            lr_actor: 3e-4,
            lr_critic: 3e-3,
            batch: 100,
            gamma: None,
            tau: 0.995,
            actor_delay: 2,
            exploration_noise: 0.1,
            warmup_steps: 1000,
            total_steps: 20_000,
            buffer_capacity: 1_000_000,
            hidden: vec![64, 64],
            optimizer: OptimizerKind::Sgd,
            seed: 0,
            domain_randomization: false,
            twin_critic: false,
            arms: DEFAULT_ARMS.to_vec(),
            bandit_lr: DEFAULT_BANDIT_LR,
        }
    }
}

impl Td3LiteConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, x) in [("lr_actor", self.lr_actor), ("lr_critic", self.lr_critic)] {
            if !(x > 0.0 && x.is_finite()) {
                return invalid(format!("{name} must be positive"));
            }
        }
        if self.batch == 0 || self.actor_delay == 0 || self.buffer_capacity == 0 {
            return invalid("batch, actor_delay and buffer_capacity must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return invalid("tau must lie in [0, 1]");
        }
        if let Some(g) = self.gamma {
            if !(0.0..1.0).contains(&g) {
                return invalid("gamma must lie in [0, 1)");
            }
        }
        if !(self.exploration_noise >= 0.0) {
            return invalid("exploration noise must be nonnegative");
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return invalid("hidden layer sizes must be positive and nonempty");
        }
        check_alpha(self.alpha)?;
        if !(self.bandit_lr > 0.0) {
            return invalid("bandit_lr must be positive");
        }
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("expectile level {alpha} outside (0, 1)"));
    }
    Ok(())
}

/// Deterministic policy read from one actor head, rescaled from `tanh`
/// outputs onto the action box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorPolicy {
    pub actor: MultiHeadNet,
    pub head: usize,
    pub low: Vec<f64>,
    pub high: Vec<f64>,
}

impl ActorPolicy {
    pub fn action(&self, obs: &[f64]) -> Result<Vec<f64>> {
        let z = self.actor.predict_head(obs, self.head)?;
        Ok(scale_action(&z, &self.low, &self.high))
    }
}

impl Behavior for ActorPolicy {
    fn act(&self, state: &State, _rng: &mut ChaCha8Rng) -> Action {
        let obs = state.features().expect("actor policies act on continuous observations");
        Action::Continuous(self.action(obs).expect("observation matches the actor input"))
    }
}

fn scale_action(z: &[f64], low: &[f64], high: &[f64]) -> Vec<f64> {
    z.iter()
        .zip(low.iter().zip(high))
        .map(|(z, (l, h))| 0.5 * (l + h) + 0.5 * (h - l) * z)
        .collect()
}

fn concat(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(a.len() + b.len());
    v.extend_from_slice(a);
    v.extend_from_slice(b);
    v
}

/// Actor and critic networks with one head per expectile level, their
/// target copies and optimizers.
#[derive(Debug, Clone)]
pub struct ActorCriticAgent {
    arms: Vec<f64>,
    gamma: f64,
    low: Vec<f64>,
    high: Vec<f64>,
    obs_dim: usize,
    actor: MultiHeadNet,
    critic: MultiHeadNet,
    twin: Option<MultiHeadNet>,
    actor_target: TargetCopy<MultiHeadNet>,
    critic_target: TargetCopy<MultiHeadNet>,
    twin_target: Option<TargetCopy<MultiHeadNet>>,
    actor_opt: Optimizer,
    critic_opt: Optimizer,
    twin_opt: Option<Optimizer>,
    divergence_bound: f64,
    critic_updates: usize,
}

impl ActorCriticAgent {
    pub fn new(
        obs_dim: usize,
        low: Vec<f64>,
        high: Vec<f64>,
        arms: Vec<f64>,
        gamma: f64,
        r_max: f64,
        config: &Td3LiteConfig,
    ) -> Result<Self> {
        if arms.is_empty() {
            return invalid("at least one expectile level is required");
        }
        for &a in &arms {
            check_alpha(a)?;
        }
        if low.len() != high.len() || low.is_empty() || low.iter().zip(&high).any(|(l, h)| !(l <= h)) {
            return invalid("action bounds must be nonempty with low ≤ high");
        }
        if config.twin_critic && arms.len() != 1 {
            return Err(Error::Unsupported("the twin critic supports a single level only".into()));
        }
        let act_dim = low.len();
        let d = arms.len();
        let mut rng = rng_from(config.seed, &[stream::INIT]);
        let actor = MultiHeadNet::new(obs_dim, &config.hidden, act_dim, d, Activation::Tanh, &mut rng)?;
        let critic =
            MultiHeadNet::new(obs_dim + act_dim, &config.hidden, 1, d, Activation::Identity, &mut rng)?;
        let twin = if config.twin_critic {
            Some(MultiHeadNet::new(
                obs_dim + act_dim,
                &config.hidden,
                1,
                1,
                Activation::Identity,
                &mut rng,
            )?)
        } else {
            None
        };
        let twin_target = twin.as_ref().map(|t| TargetCopy::new(t, config.tau)).transpose()?;
        let twin_opt = twin
            .as_ref()
            .map(|t| Optimizer::new(config.optimizer, config.lr_critic, t))
            .transpose()?;
        Ok(Self {
            arms,
            gamma,
            obs_dim,
            actor_target: TargetCopy::new(&actor, config.tau)?,
            critic_target: TargetCopy::new(&critic, config.tau)?,
            twin_target,
            actor_opt: Optimizer::new(config.optimizer, config.lr_actor, &actor)?,
            critic_opt: Optimizer::new(config.optimizer, config.lr_critic, &critic)?,
            twin_opt,
            actor,
            critic,
            twin,
            low,
            high,
            divergence_bound: 10.0 * r_max.max(f64::MIN_POSITIVE) / (1.0 - gamma),
            critic_updates: 0,
        })
    }

    pub fn arms(&self) -> &[f64] {
        &self.arms
    }

    pub fn actor(&self) -> &MultiHeadNet {
        &self.actor
    }

    pub fn critic(&self) -> &MultiHeadNet {
        &self.critic
    }

    pub fn action_bounds(&self) -> (&[f64], &[f64]) {
        (&self.low, &self.high)
    }

    /// Magnitude above which critic values count as diverged.
    pub fn divergence_bound(&self) -> f64 {
        self.divergence_bound
    }

    pub fn policy(&self, head: usize) -> ActorPolicy {
        ActorPolicy {
            actor: self.actor.clone(),
            head,
            low: self.low.clone(),
            high: self.high.clone(),
        }
    }

    pub fn act(&self, obs: &[f64], head: usize) -> Result<Vec<f64>> {
        let z = self.actor.predict_head(obs, head)?;
        Ok(scale_action(&z, &self.low, &self.high))
    }

    pub fn q_value(&self, obs: &[f64], action: &[f64], head: usize) -> Result<f64> {
        Ok(self.critic.predict_head(&concat(obs, action), head)?[0])
    }

    fn target_action(&self, obs: &[f64], head: usize) -> Result<Vec<f64>> {
        let z = self.actor_target.net().predict_head(obs, head)?;
        Ok(scale_action(&z, &self.low, &self.high))
    }

    /// Per-head bootstrap targets `y_d = r + γ Q'_d(s', π'_d(s'))`, each from
    /// the head's own target actor and target critic.
    fn targets(&self, t: &Transition) -> Result<Vec<f64>> {
        (0..self.arms.len())
            .map(|d| {
                if t.done {
                    return Ok(t.reward);
                }
                let a2 = self.target_action(&t.next_state, d)?;
                let input = concat(&t.next_state, &a2);
                let mut q2 = self.critic_target.net().predict_head(&input, d)?[0];
                if let Some(twin) = &self.twin_target {
                    q2 = q2.min(twin.net().predict_head(&input, 0)?[0]);
                }
                Ok(t.reward + self.gamma * q2)
            })
            .collect()
    }

    /// Gradient of the summed, head-weighted critic loss
    /// `Σ_d w_d · mean_batch L_{α_d}(y_d - Q_d(s, a))` and its value.
    pub fn critic_gradients(&self, batch: &[&Transition], head_weights: &[f64]) -> Result<(MultiHeadNet, f64)> {
        let (grads, loss, _) = self.critic_pass(&self.critic, batch, head_weights, None)?;
        Ok((grads, loss))
    }

    fn critic_pass(
        &self,
        net: &MultiHeadNet,
        batch: &[&Transition],
        head_weights: &[f64],
        precomputed: Option<&[Vec<f64>]>,
    ) -> Result<(MultiHeadNet, f64, f64)> {
        if head_weights.len() != self.arms.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} head weights", self.arms.len()),
                got: format!("{}", head_weights.len()),
            });
        }
        let mut grads = net.zeros_like();
        let scale = 1.0 / batch.len() as f64;
        let mut loss = 0.0;
        let mut peak: f64 = 0.0;
        for (i, t) in batch.iter().enumerate() {
            let ys = match precomputed {
                Some(all) => all[i].clone(),
                None => self.targets(t)?,
            };
            let cache = net.forward_all(&concat(&t.state, &t.action))?;
            let mut head_grads = Vec::with_capacity(ys.len());
            for (d, (&y, &alpha)) in ys.iter().zip(&self.arms).enumerate() {
                let q = cache.head_output(d).expect("all heads evaluated")[0];
                peak = peak.max(q.abs()).max(y.abs());
                loss += head_weights[d] * scale * critic_loss(q, y, alpha)?;
                head_grads.push([head_weights[d] * scale * critic_loss_grad(q, y, alpha)?]);
            }
            let refs: Vec<Option<&[f64]>> = head_grads.iter().map(|g| Some(&g[..])).collect();
            net.backward(&cache, &refs, &mut grads)?;
        }
        Ok((grads, loss, peak))
    }

    /// One critic descent step with per-head loss weights. Returns the loss.
    pub fn critic_step(&mut self, batch: &[&Transition], head_weights: &[f64]) -> Result<f64> {
        let targets: Vec<Vec<f64>> = batch.iter().map(|t| self.targets(t)).collect::<Result<_>>()?;
        let (grads, loss, peak) = self.critic_pass(&self.critic, batch, head_weights, Some(&targets))?;
        self.critic_updates += 1;
        if !(peak <= self.divergence_bound) {
            return Err(Error::Diverged {
                step: self.critic_updates,
                magnitude: peak,
                bound: self.divergence_bound,
            });
        }
        self.critic_opt.step(&mut self.critic, &grads)?;
        if let Some(twin) = self.twin.take() {
            let (tg, _, _) = self.critic_pass(&twin, batch, head_weights, Some(&targets))?;
            let mut twin = twin;
            self.twin_opt
                .as_mut()
                .expect("twin optimizer exists with the twin")
                .step(&mut twin, &tg)?;
            self.twin = Some(twin);
        }
        Ok(loss)
    }

    /// Gradient of `-Σ_d mean_batch Q_d(s, π_d(s))` with respect to the actor.
    pub fn actor_gradients(&self, batch: &[&Transition]) -> Result<MultiHeadNet> {
        let d = self.arms.len();
        let act_dim = self.low.len();
        let mut grads = self.actor.zeros_like();
        let mut scratch = self.critic.zeros_like();
        let scale = 1.0 / batch.len() as f64;
        for t in batch {
            let cache = self.actor.forward_all(&t.state)?;
            let mut head_grads = Vec::with_capacity(d);
            for h in 0..d {
                let z = cache.head_output(h).expect("all heads evaluated");
                let a = scale_action(z, &self.low, &self.high);
                let critic_cache = self.critic.forward_heads(&concat(&t.state, &a), &[h])?;
                let mut out = vec![None; d];
                let seed = [-scale];
                out[h] = Some(&seed[..]);
                let input_grad = self.critic.backward(&critic_cache, &out, &mut scratch)?;
                let g: Vec<f64> = (0..act_dim)
                    .map(|j| input_grad[self.obs_dim + j] * 0.5 * (self.high[j] - self.low[j]))
                    .collect();
                head_grads.push(g);
            }
            let refs: Vec<Option<&[f64]>> = head_grads.iter().map(|g| Some(&g[..])).collect();
            self.actor.backward(&cache, &refs, &mut grads)?;
        }
        Ok(grads)
    }

    pub fn actor_step(&mut self, batch: &[&Transition]) -> Result<()> {
        let grads = self.actor_gradients(batch)?;
        self.actor_opt.step(&mut self.actor, &grads)
    }

    pub fn update_targets(&mut self) -> Result<()> {
        self.actor_target.polyak_update(&self.actor)?;
        self.critic_target.polyak_update(&self.critic)?;
        if let (Some(t), Some(src)) = (self.twin_target.as_mut(), self.twin.as_ref()) {
            t.polyak_update(src)?;
        }
        Ok(())
    }
}

/// Result of an actor-critic run.
#[derive(Debug, Clone)]
pub struct ActorCriticRun {
    pub agent: ActorCriticAgent,
    pub bandit: Option<BanditState>,
    pub log: TrainingLog,
}

impl ActorCriticRun {
    pub fn best_head(&self) -> usize {
        self.bandit.as_ref().map_or(0, BanditState::best_arm)
    }

    pub fn policy(&self) -> ActorPolicy {
        self.agent.policy(self.best_head())
    }
}

/// Single-critic TD3 with the expectile critic loss at level `config.alpha`.
pub fn td3_lite_train(family: &dyn EnvFamily, config: &Td3LiteConfig) -> Result<ActorCriticRun> {
    config.validate()?;
    run(family, config, &[config.alpha], false)
}

/// [`td3_lite_train`] with a fresh environment parameter drawn from the
/// family's box at the start of every episode.
pub fn dr_train(family: &dyn EnvFamily, config: &Td3LiteConfig) -> Result<ActorCriticRun> {
    let config = Td3LiteConfig {
        domain_randomization: true,
        ..config.clone()
    };
    td3_lite_train(family, &config)
}

/// Multi-head training with the bandit choosing the acting head per episode.
/// All heads learn from every batch.
pub fn auto_train(family: &dyn EnvFamily, config: &Td3LiteConfig) -> Result<ActorCriticRun> {
    config.validate()?;
    if config.domain_randomization {
        return Err(Error::Unsupported(
            "bandit tuning cannot be combined with domain randomization".into(),
        ));
    }
    if config.arms.is_empty() {
        return invalid("at least one arm is required");
    }
    run(family, config, &config.arms, true)
}

fn continuous_shape(env: &dyn Environment) -> Result<(usize, Vec<f64>, Vec<f64>)> {
    match env.action_space() {
        ActionSpace::Continuous { low, high } => Ok((env.observation_dim(), low, high)),
        ActionSpace::Discrete(_) => Err(Error::Unsupported(
            "actor-critic learners need continuous actions".into(),
        )),
    }
}

fn features(state: State) -> Result<Vec<f64>> {
    match state {
        State::Continuous(x) => Ok(x),
        State::Discrete(_) => Err(Error::Unsupported(
            "actor-critic learners need continuous observations".into(),
        )),
    }
}

fn run(family: &dyn EnvFamily, config: &Td3LiteConfig, arms: &[f64], use_bandit: bool) -> Result<ActorCriticRun> {
    let nominal = family.nominal_omega().to_vec();
    let mut env = family.make(&nominal)?;
    let (obs_dim, low, high) = continuous_shape(env.as_ref())?;
    let gamma = config.gamma.unwrap_or_else(|| family.gamma());
    let mut agent = ActorCriticAgent::new(
        obs_dim,
        low.clone(),
        high.clone(),
        arms.to_vec(),
        gamma,
        env.r_max(),
        config,
    )?;
    let mut bandit = if use_bandit {
        Some(BanditState::new(arms.to_vec(), config.bandit_lr)?)
    } else {
        None
    };
    let mut buffer = ReplayBuffer::new(config.buffer_capacity)?;
    let mut explore = rng_from(config.seed, &[stream::EXPLORATION]);
    let mut replay_rng = rng_from(config.seed, &[stream::REPLAY]);
    let mut domain = rng_from(config.seed, &[stream::DOMAIN]);
    let mut bandit_rng = rng_from(config.seed, &[stream::BANDIT]);
    let weights = vec![1.0; arms.len()];
    let half: Vec<f64> = low.iter().zip(&high).map(|(l, h)| 0.5 * (h - l)).collect();
    let mut log = TrainingLog::default();
    let mut total_steps = 0;
    let mut updates = 0usize;
    let mut episode = 0;

    while total_steps < config.total_steps {
        let omega = if config.domain_randomization {
            let omega = dr_sample(family, &mut domain);
            env = family.make(&omega)?;
            omega
        } else {
            nominal.clone()
        };
        let arm = match &bandit {
            Some(b) => b.sample(&mut bandit_rng),
            None => 0,
        };
        env.observe_arm(arm);
        let mut obs = features(env.reset(derive_seed(config.seed, &[stream::ENV, episode as u64])))?;
        let mut episode_return = 0.0;
        let mut loss_sum = 0.0;
        let mut loss_count = 0usize;
        for _ in 0..env.horizon() {
            if total_steps >= config.total_steps {
                break;
            }
            let action = if total_steps < config.warmup_steps {
                match env.action_space().sample(&mut explore) {
                    Action::Continuous(a) => a,
                    Action::Discrete(_) => unreachable!("continuous space checked above"),
                }
            } else {
                let mut a = agent.act(&obs, arm)?;
                for j in 0..a.len() {
                    let eps: f64 = StandardNormal.sample(&mut explore);
                    a[j] = (a[j] + config.exploration_noise * half[j] * eps).clamp(low[j], high[j]);
                }
                a
            };
            let step = env.step(&Action::Continuous(action.clone()));
            total_steps += 1;
            episode_return += step.reward;
            let next = features(step.state)?;
            buffer.push(Transition {
                state: obs,
                action,
                reward: step.reward,
                next_state: next.clone(),
                done: step.done,
            });
            obs = next;

            if total_steps >= config.warmup_steps && buffer.len() >= config.batch {
                let batch = buffer.sample(config.batch, &mut replay_rng);
                loss_sum += agent.critic_step(&batch, &weights)?;
                loss_count += 1;
                updates += 1;
                if updates.is_multiple_of(config.actor_delay) {
                    agent.actor_step(&batch)?;
                    agent.update_targets()?;
                }
            }
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
            critic_loss: if loss_count > 0 { loss_sum / loss_count as f64 } else { 0.0 },
            omega,
            bandit_probs: bandit.as_ref().map_or_else(|| vec![1.0], |b| b.probs().to_vec()),
        });
        episode += 1;
    }
    Ok(ActorCriticRun { agent, bandit, log })
}

/// Uniformly random behavior, for baselines and smoke tests.
#[derive(Debug, Clone)]
pub struct RandomBehavior {
    pub space: ActionSpace,
}

impl Behavior for RandomBehavior {
    fn act(&self, _state: &State, rng: &mut ChaCha8Rng) -> Action {
        self.space.sample(rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::synthetic::{FixedFamily, TwoPointContinuousBandit, ZeroRewardEnv};
    use crate::envs::TabularFamily;
    use crate::expectile::{expectile_discrete, DiscreteDistribution, DEFAULT_TOL};

    fn small(seed: u64) -> Td3LiteConfig {
        Td3LiteConfig {
            hidden: vec![16, 16],
            batch: 32,
            warmup_steps: 100,
            total_steps: 600,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn zero_reward_critic_stays_near_zero() {
        let fam = FixedFamily::new("zero", ZeroRewardEnv::new(20), 0.9);
        let run = td3_lite_train(&fam, &small(1)).unwrap();
        for x in [-1.0, 0.0, 1.0] {
            for a in [-1.0, 0.0, 1.0] {
                assert!(run.agent.q_value(&[x], &[a], 0).unwrap().abs() < 0.1);
            }
        }
    }

    #[test]
    fn one_step_bandit_critic_learns_the_expectile() {
        let fam = FixedFamily::new("two_point", TwoPointContinuousBandit::new(), 0.9);
        let alpha = 0.2;
        let cfg = Td3LiteConfig {
            alpha,
            hidden: vec![16, 16],
            warmup_steps: 200,
            total_steps: 8000,
            optimizer: OptimizerKind::Adam,
            lr_critic: 3e-4,
            lr_actor: 3e-4,
            seed: 0,
            ..Default::default()
        };
        let run = td3_lite_train(&fam, &cfg).unwrap();
        let dist = DiscreteDistribution::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let target = expectile_discrete(&dist, alpha, DEFAULT_TOL).unwrap();
        let q = run.agent.q_value(&[1.0], &[0.0], 0).unwrap();
        assert!((q - target).abs() < 0.05, "q = {q}, target = {target}");
    }

    #[test]
    fn single_arm_auto_matches_td3_lite() {
        let fam = FixedFamily::new("two_point", TwoPointContinuousBandit::new(), 0.9);
        let cfg = Td3LiteConfig {
            arms: vec![0.3],
            alpha: 0.3,
            total_steps: 300,
            ..small(4)
        };
        let a = td3_lite_train(&fam, &cfg).unwrap();
        let b = auto_train(&fam, &cfg).unwrap();
        assert_eq!(a.log, b.log);
        assert_eq!(a.agent.actor(), b.agent.actor());
        assert_eq!(a.agent.critic(), b.agent.critic());
    }

    #[test]
    fn zero_weight_head_is_untouched() {
        let fam = FixedFamily::new("two_point", TwoPointContinuousBandit::new(), 0.9);
        let cfg = Td3LiteConfig {
            total_steps: 150,
            ..small(5)
        };
        let mut run = auto_train(&fam, &cfg).unwrap();
        let t = Transition {
            state: vec![1.0],
            action: vec![0.3],
            reward: 1.0,
            next_state: vec![1.0],
            done: true,
        };
        let batch = vec![&t; 8];
        let before = run.agent.critic().clone();
        run.agent.critic_step(&batch, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        let after = run.agent.critic();
        assert_eq!(before.head(2), after.head(2));
        assert_ne!(before.head(1), after.head(1));
    }

    #[test]
    fn rejects_unsupported_inputs() {
        let grid = TabularFamily::slip_grid();
        assert!(matches!(td3_lite_train(&grid, &small(0)), Err(Error::Unsupported(_))));
        let fam = FixedFamily::new("zero", ZeroRewardEnv::new(5), 0.9);
        let dr = Td3LiteConfig {
            domain_randomization: true,
            ..small(0)
        };
        assert!(matches!(auto_train(&fam, &dr), Err(Error::Unsupported(_))));
        let bad = Td3LiteConfig {
            actor_delay: 0,
            ..small(0)
        };
        assert!(td3_lite_train(&fam, &bad).is_err());
    }

    #[test]
    fn divergence_guard_fires() {
        let fam = FixedFamily::new("zero", ZeroRewardEnv::new(5), 0.9);
        let mut run = td3_lite_train(&fam, &Td3LiteConfig { total_steps: 10, ..small(0) }).unwrap();
        let huge = Transition {
            state: vec![0.0],
            action: vec![0.0],
            reward: 1e6,
            next_state: vec![0.0],
            done: true,
        };
        assert!(matches!(
            run.agent.critic_step(&[&huge], &[1.0]),
            Err(Error::Diverged { .. })
        ));
    }

    #[test]
    fn twin_critic_trains() {
        let fam = FixedFamily::new("zero", ZeroRewardEnv::new(10), 0.9);
        let cfg = Td3LiteConfig {
            twin_critic: true,
            ..small(6)
        };
        let run = td3_lite_train(&fam, &cfg).unwrap();
        assert!(run.agent.q_value(&[0.0], &[0.0], 0).unwrap().abs() < 0.1);
        let auto = Td3LiteConfig {
            twin_critic: true,
            ..small(6)
        };
        assert!(auto_train(&fam, &auto).is_err());
    }
}
