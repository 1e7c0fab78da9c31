//! Small synthetic environments with known answers, used by tests, examples
//! and the acceptance suite.

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};

use super::{Action, ActionSpace, EnvFamily, Environment, State, Step};
use crate::error::Result;
use crate::rng::ChaCha8Rng;

/// One-state, one-step bandit: action 0 pays 0.5 for sure, action 1 pays
/// 0 or 1 with probability ½ each.
#[derive(Debug, Clone)]
pub struct SafeRiskyBandit {
    rng: ChaCha8Rng,
}

impl SafeRiskyBandit {
    pub fn new() -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(0),
        }
    }
}

impl Default for SafeRiskyBandit {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for SafeRiskyBandit {
    fn reset(&mut self, seed: u64) -> State {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        State::Discrete(0)
    }

    fn step(&mut self, action: &Action) -> Step {
        let reward = match action {
            Action::Discrete(0) => 0.5,
            Action::Discrete(1) => {
                if self.rng.random::<bool>() {
                    1.0
                } else {
                    0.0
                }
            }
            other => panic!("invalid action {other:?}"),
        };
        Step {
            state: State::Discrete(0),
            reward,
            done: true,
        }
    }

    fn action_space(&self) -> ActionSpace {
        ActionSpace::Discrete(2)
    }

    fn observation_dim(&self) -> usize {
        0
    }

    fn n_states(&self) -> Option<usize> {
        Some(1)
    }

    fn horizon(&self) -> usize {
        1
    }

    fn r_max(&self) -> f64 {
        1.0
    }
}

/// One-step continuous bandit on `a ∈ [-1, 1]` paying `c - a²` where `c` is
/// 0 or 1 with probability ½. The α-expectile of the payoff at `a` is
/// `α - a²`.
#[derive(Debug, Clone)]
pub struct TwoPointContinuousBandit {
    rng: ChaCha8Rng,
}

impl TwoPointContinuousBandit {
    pub fn new() -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(0),
        }
    }
}

impl Default for TwoPointContinuousBandit {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for TwoPointContinuousBandit {
    fn reset(&mut self, seed: u64) -> State {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        State::Continuous(vec![1.0])
    }

    fn step(&mut self, action: &Action) -> Step {
        let a = continuous_scalar(action);
        let coin = if self.rng.random::<bool>() { 1.0 } else { 0.0 };
        Step {
            state: State::Continuous(vec![1.0]),
            reward: coin - a * a,
            done: true,
        }
    }

    fn action_space(&self) -> ActionSpace {
        unit_box()
    }

    fn observation_dim(&self) -> usize {
        1
    }

    fn horizon(&self) -> usize {
        1
    }

    fn r_max(&self) -> f64 {
        2.0
    }
}

/// Continuous environment paying zero forever.
#[derive(Debug, Clone)]
pub struct ZeroRewardEnv {
    horizon: usize,
}

impl ZeroRewardEnv {
    pub fn new(horizon: usize) -> Self {
        Self { horizon }
    }
}

impl Environment for ZeroRewardEnv {
    fn reset(&mut self, _seed: u64) -> State {
        State::Continuous(vec![0.0])
    }

    fn step(&mut self, _action: &Action) -> Step {
        Step {
            state: State::Continuous(vec![0.0]),
            reward: 0.0,
            done: false,
        }
    }

    fn action_space(&self) -> ActionSpace {
        unit_box()
    }

    fn observation_dim(&self) -> usize {
        1
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn r_max(&self) -> f64 {
        1.0
    }
}

/// One-step environment whose payoff depends only on the bandit arm that
/// drives the episode: the arm `best` earns 1, every other arm 0, plus
/// Gaussian noise of standard deviation `noise`.
#[derive(Debug, Clone)]
pub struct ArmSeparationEnv {
    best: usize,
    noise: f64,
    arm: usize,
    rng: ChaCha8Rng,
}

impl ArmSeparationEnv {
    pub fn new(best: usize, noise: f64) -> Self {
        Self {
            best,
            noise,
            arm: 0,
            rng: ChaCha8Rng::seed_from_u64(0),
        }
    }
}

impl Environment for ArmSeparationEnv {
    fn reset(&mut self, seed: u64) -> State {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        State::Continuous(vec![1.0])
    }

    fn step(&mut self, _action: &Action) -> Step {
        let base = if self.arm == self.best { 1.0 } else { 0.0 };
        let noise = Normal::new(0.0, self.noise)
            .expect("noise scale is finite and nonnegative")
            .sample(&mut self.rng);
        Step {
            state: State::Continuous(vec![1.0]),
            reward: base + noise,
            done: true,
        }
    }

    fn action_space(&self) -> ActionSpace {
        unit_box()
    }

    fn observation_dim(&self) -> usize {
        1
    }

    fn horizon(&self) -> usize {
        1
    }

    fn r_max(&self) -> f64 {
        2.0
    }

    fn observe_arm(&mut self, arm: usize) {
        self.arm = arm;
    }
}

fn unit_box() -> ActionSpace {
    ActionSpace::Continuous {
        low: vec![-1.0],
        high: vec![1.0],
    }
}

fn continuous_scalar(action: &Action) -> f64 {
    match action {
        Action::Continuous(a) if a.len() == 1 => a[0].clamp(-1.0, 1.0),
        other => panic!("invalid action {other:?}"),
    }
}

/// Family with a single member: every ω in the degenerate box `[0, 0]`
/// yields a copy of the prototype.
#[derive(Debug, Clone)]
pub struct FixedFamily<E> {
    id: String,
    proto: E,
    gamma: f64,
    omega_box: Vec<[f64; 2]>,
    nominal: Vec<f64>,
}

impl<E: Environment + Clone + Sync + 'static> FixedFamily<E> {
    pub fn new(id: impl Into<String>, proto: E, gamma: f64) -> Self {
        Self {
            id: id.into(),
            proto,
            gamma,
            omega_box: vec![[0.0, 0.0]],
            nominal: vec![0.0],
        }
    }
}

impl<E: Environment + Clone + Sync + 'static> EnvFamily for FixedFamily<E> {
    fn id(&self) -> &str {
        &self.id
    }

    fn omega_box(&self) -> &[[f64; 2]] {
        &self.omega_box
    }

    fn nominal_omega(&self) -> &[f64] {
        &self.nominal
    }

    fn make(&self, omega: &[f64]) -> Result<Box<dyn Environment>> {
        self.check_omega(omega)?;
        Ok(Box::new(self.proto.clone()))
    }

    fn gamma(&self) -> f64 {
        self.gamma
    }
}
