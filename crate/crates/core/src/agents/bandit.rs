use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Default candidate expectile levels.
pub const DEFAULT_ARMS: [f64; 4] = [0.2, 0.3, 0.4, 0.5];
pub const DEFAULT_BANDIT_LR: f64 = 0.2;
/// Weights are kept inside `[-WEIGHT_CLAMP, WEIGHT_CLAMP]`.
pub const WEIGHT_CLAMP: f64 = 50.0;

/// Exponentially weighted average forecaster over expectile arms.
///
/// Probabilities are the softmax of the weights. After each episode only the
/// pulled arm's weight moves, by `lr·f/p(d)` where `f` is the improvement of
/// the episode return over the previous episode's return. The first update
/// has no predecessor and uses `f = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditState {
    arms: Vec<f64>,
    weights: Vec<f64>,
    probs: Vec<f64>,
    lr: f64,
    last_return: Option<f64>,
}

impl BanditState {
    pub fn new(arms: Vec<f64>, lr: f64) -> Result<Self> {
        if arms.is_empty() {
            return invalid("the bandit needs at least one arm");
        }
        if !(lr > 0.0 && lr.is_finite()) {
            return invalid("bandit learning rate must be positive");
        }
        let weights = vec![0.0; arms.len()];
        let probs = softmax(&weights);
        Ok(Self {
            arms,
            weights,
            probs,
            lr,
            last_return: None,
        })
    }

    /// State with explicit weights, clamped into range.
    pub fn with_weights(arms: Vec<f64>, weights: Vec<f64>, lr: f64) -> Result<Self> {
        let mut state = Self::new(arms, lr)?;
        if weights.len() != state.arms.len() || weights.iter().any(|w| !w.is_finite()) {
            return invalid("weights must be finite and match the arm count");
        }
        state.weights = weights.iter().map(|w| w.clamp(-WEIGHT_CLAMP, WEIGHT_CLAMP)).collect();
        state.probs = softmax(&state.weights);
        Ok(state)
    }

    pub fn arms(&self) -> &[f64] {
        &self.arms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    pub fn last_return(&self) -> Option<f64> {
        self.last_return
    }

    /// Draws an arm index from the current probabilities.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (d, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return d;
            }
        }
        self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }

    /// Feeds back the return of an episode played with `arm`.
    pub fn update(&mut self, arm: usize, episode_return: f64) -> Result<()> {
        if arm >= self.arms.len() {
            return invalid(format!("arm {arm} out of range ({} arms)", self.arms.len()));
        }
        if !episode_return.is_finite() {
            return invalid("episode return must be finite");
        }
        let feedback = self.last_return.map_or(0.0, |prev| episode_return - prev);
        self.last_return = Some(episode_return);
        if feedback != 0.0 {
            let w = self.weights[arm] + self.lr * feedback / self.probs[arm];
            self.weights[arm] = w.clamp(-WEIGHT_CLAMP, WEIGHT_CLAMP);
            self.probs = softmax(&self.weights);
        }
        Ok(())
    }

    /// Arm with the highest probability, lowest index on ties.
    pub fn best_arm(&self) -> usize {
        crate::mdp::argmax(&self.probs)
    }
}

fn softmax(w: &[f64]) -> Vec<f64> {
    let top = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = w.iter().map(|x| (x - top).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|x| x / z).collect()
}
