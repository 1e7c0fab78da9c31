use std::f64::consts::PI;

use rand::{Rng, SeedableRng};

use super::{Action, ActionSpace, EnvFamily, Environment, State, Step};
use crate::error::Result;
use crate::rng::ChaCha8Rng;

pub const PENDULUM_DT: f64 = 0.05;
pub const PENDULUM_HORIZON: usize = 200;
const GRAVITY: f64 = 10.0;
const MAX_TORQUE: f64 = 2.0;
const MAX_SPEED: f64 = 8.0;

/// Torque-controlled pendulum with configurable mass and length.
///
/// The angle θ is measured from the upright position and the dynamics are
/// `θ̈ = (g/l)·sin θ + u/(m·l²)` with `g = 10`, integrated by semi-implicit
/// Euler at `dt = 0.05`: the velocity is updated first, clamped to ±8, and
/// the new velocity moves the angle. Torque is clamped to ±2. The reward is
/// `-(θ² + 0.1·θ̇² + 0.001·u²)` with θ wrapped into `[-π, π)`. Observations
/// are `(cos θ, sin θ, θ̇)`. Episodes last 200 steps and start from
/// `θ ~ U[-π, π]`, `θ̇ ~ U[-1, 1]`.
#[derive(Debug, Clone)]
pub struct PendulumLite {
    mass: f64,
    length: f64,
    theta: f64,
    velocity: f64,
    rng: ChaCha8Rng,
}

impl PendulumLite {
    pub fn new(mass: f64, length: f64) -> Self {
        Self {
            mass,
            length,
            theta: PI,
            velocity: 0.0,
            rng: ChaCha8Rng::seed_from_u64(0),
        }
    }

    pub fn set_state(&mut self, theta: f64, velocity: f64) -> State {
        self.theta = theta;
        self.velocity = velocity;
        self.observe()
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn velocity(&self) -> f64 {
        self.velocity
    }

    fn observe(&self) -> State {
        State::Continuous(vec![self.theta.cos(), self.theta.sin(), self.velocity])
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    (theta + PI).rem_euclid(2.0 * PI) - PI
}

impl Environment for PendulumLite {
    fn reset(&mut self, seed: u64) -> State {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.theta = self.rng.random_range(-PI..PI);
        self.velocity = self.rng.random_range(-1.0..1.0);
        self.observe()
    }

    fn step(&mut self, action: &Action) -> Step {
        let u = match action {
            Action::Continuous(u) if u.len() == 1 => u[0].clamp(-MAX_TORQUE, MAX_TORQUE),
            other => panic!("invalid action {other:?} for the pendulum"),
        };
        let angle = wrap_angle(self.theta);
        let reward = -(angle * angle + 0.1 * self.velocity * self.velocity + 0.001 * u * u);
        let accel = GRAVITY / self.length * self.theta.sin() + u / (self.mass * self.length * self.length);
        self.velocity = (self.velocity + PENDULUM_DT * accel).clamp(-MAX_SPEED, MAX_SPEED);
        self.theta += PENDULUM_DT * self.velocity;
        Step {
            state: self.observe(),
            reward,
            done: false,
        }
    }

    fn action_space(&self) -> ActionSpace {
        ActionSpace::Continuous {
            low: vec![-MAX_TORQUE],
            high: vec![MAX_TORQUE],
        }
    }

    fn observation_dim(&self) -> usize {
        3
    }

    fn horizon(&self) -> usize {
        PENDULUM_HORIZON
    }

    fn r_max(&self) -> f64 {
        PI * PI + 0.1 * MAX_SPEED * MAX_SPEED + 0.001 * MAX_TORQUE * MAX_TORQUE
    }
}

/// PendulumLite family: ω = (mass, length) ∈ [0.5, 2]², nominal (1, 1).
#[derive(Debug, Clone)]
pub struct PendulumFamily {
    omega_box: Vec<[f64; 2]>,
    nominal: Vec<f64>,
}

impl PendulumFamily {
    pub fn new() -> Self {
        Self {
            omega_box: vec![[0.5, 2.0], [0.5, 2.0]],
            nominal: vec![1.0, 1.0],
        }
    }
}

impl Default for PendulumFamily {
    fn default() -> Self {
        Self::new()
    }
}

impl EnvFamily for PendulumFamily {
    fn id(&self) -> &str {
        "pendulum_lite"
    }

    fn omega_box(&self) -> &[[f64; 2]] {
        &self.omega_box
    }

    fn nominal_omega(&self) -> &[f64] {
        &self.nominal
    }

    fn make(&self, omega: &[f64]) -> Result<Box<dyn Environment>> {
        self.check_omega(omega)?;
        Ok(Box::new(PendulumLite::new(omega[0], omega[1])))
    }

    fn gamma(&self) -> f64 {
        0.99
    }
}
