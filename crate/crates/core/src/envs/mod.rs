//! Parameterized environment families and the grid evaluation protocol.
//!
//! A family exposes an uncertainty box Ω, a nominal parameter and a
//! constructor `make(ω)`. Policies are scored on an [`OmegaGrid`] of equally
//! spaced parameters: each grid point gets the mean undiscounted return over
//! `n_eval` episodes, and the report keeps the minimum (worst case) and the
//! mean over grid points.

mod eval;
mod pendulum;
pub mod synthetic;
mod tabular;

use rand::Rng;

pub use eval::{evaluate, run_episode, Behavior, EpisodeOutcome, EvalReport, OmegaGrid};
pub use pendulum::{PendulumFamily, PendulumLite, PENDULUM_DT, PENDULUM_HORIZON};
pub use tabular::{GridLayout, TabularEnv, TabularFamily, GRID_ACTIONS};

use crate::error::{Error, Result};
use crate::mdp::TabularMdp;
use crate::rng::ChaCha8Rng;

/// Environment state as seen by an agent.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Discrete(usize),
    Continuous(Vec<f64>),
}

impl State {
    pub fn index(&self) -> Option<usize> {
        match self {
            State::Discrete(i) => Some(*i),
            State::Continuous(_) => None,
        }
    }

    pub fn features(&self) -> Option<&[f64]> {
        match self {
            State::Discrete(_) => None,
            State::Continuous(x) => Some(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Discrete(usize),
    Continuous(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ActionSpace {
    Discrete(usize),
    Continuous { low: Vec<f64>, high: Vec<f64> },
}

impl ActionSpace {
    pub fn dim(&self) -> usize {
        match self {
            ActionSpace::Discrete(_) => 1,
            ActionSpace::Continuous { low, .. } => low.len(),
        }
    }

    /// Uniform random action.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Action {
        match self {
            ActionSpace::Discrete(n) => Action::Discrete(rng.random_range(0..*n)),
            ActionSpace::Continuous { low, high } => Action::Continuous(
                low.iter()
                    .zip(high)
                    .map(|(&l, &h)| if l == h { l } else { rng.random_range(l..h) })
                    .collect(),
            ),
        }
    }
}

/// Result of one environment transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub state: State,
    pub reward: f64,
    /// The episode reached a terminal state.
    pub done: bool,
}

/// A single episodic environment instance.
///
/// Transitions are driven by an internal generator reseeded on every
/// [`Environment::reset`], so an episode is a deterministic function of its
/// seed and the actions taken.
pub trait Environment: Send {
    fn reset(&mut self, seed: u64) -> State;

    fn step(&mut self, action: &Action) -> Step;

    fn action_space(&self) -> ActionSpace;

    /// Length of continuous observations; 0 for discrete-state environments.
    fn observation_dim(&self) -> usize;

    /// Number of states for discrete-state environments.
    fn n_states(&self) -> Option<usize> {
        None
    }

    /// Maximum number of steps per episode.
    fn horizon(&self) -> usize;

    /// Bound on the magnitude of the expected per-step reward.
    fn r_max(&self) -> f64;

    fn tabular(&self) -> Option<&TabularEnv> {
        None
    }

    /// Informs the environment which bandit arm drives the coming episode.
    ///
    /// Real environments ignore this. It exists so that synthetic instances
    /// can make returns depend on the arm directly.
    fn observe_arm(&mut self, _arm: usize) {}
}

/// A family of environments indexed by an uncertainty parameter ω ∈ Ω.
pub trait EnvFamily: Send + Sync {
    fn id(&self) -> &str;

    /// Per-dimension `[low, high]` bounds of Ω.
    fn omega_box(&self) -> &[[f64; 2]];

    fn nominal_omega(&self) -> &[f64];

    fn make(&self, omega: &[f64]) -> Result<Box<dyn Environment>>;

    fn as_tabular(&self) -> Option<&TabularFamily> {
        None
    }

    /// Discount used by learners trained on this family.
    fn gamma(&self) -> f64;

    fn omega_dim(&self) -> usize {
        self.omega_box().len()
    }

    fn check_omega(&self, omega: &[f64]) -> Result<()> {
        check_in_box(self.omega_box(), omega)
    }
}

pub(crate) fn check_in_box(bounds: &[[f64; 2]], omega: &[f64]) -> Result<()> {
    if omega.len() != bounds.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("omega of dimension {}", bounds.len()),
            got: format!("dimension {}", omega.len()),
        });
    }
    for (k, (w, [lo, hi])) in omega.iter().zip(bounds).enumerate() {
        if !(w >= lo && w <= hi) {
            return Err(Error::InvalidArgument(format!(
                "omega[{k}] = {w} outside [{lo}, {hi}]"
            )));
        }
    }
    Ok(())
}

/// Uniform draw from the family's box, one coordinate per dimension.
pub fn dr_sample(family: &dyn EnvFamily, rng: &mut ChaCha8Rng) -> Vec<f64> {
    family
        .omega_box()
        .iter()
        .map(|&[lo, hi]| {
            if lo == hi {
                lo
            } else {
                rng.random_range(lo..=hi)
            }
        })
        .collect()
}

/// The built-in toy families: SlipGrid, WindyChain, PendulumLite and CliffGrid.
pub fn builtin_families() -> Vec<Box<dyn EnvFamily>> {
    vec![
        Box::new(TabularFamily::slip_grid()),
        Box::new(TabularFamily::windy_chain()),
        Box::new(PendulumFamily::new()),
        Box::new(TabularFamily::cliff_grid()),
    ]
}

pub fn family_by_id(id: &str) -> Result<Box<dyn EnvFamily>> {
    builtin_families()
        .into_iter()
        .find(|f| f.id() == id)
        .ok_or_else(|| Error::UnknownFamily(id.to_string()))
}

/// Kernel of a tabular family at `omega`, for solvers that need the model.
pub fn tabular_mdp(family: &dyn EnvFamily, omega: &[f64]) -> Result<TabularMdp> {
    let tab = family
        .as_tabular()
        .ok_or_else(|| Error::Unsupported(format!("family `{}` is not tabular", family.id())))?;
    Ok(tab.env_at(omega)?.mdp().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;

    #[test]
    fn builtin_ids_and_nominals() {
        let ids: Vec<String> = builtin_families().iter().map(|f| f.id().to_string()).collect();
        assert_eq!(ids, ["slip_grid", "windy_chain", "pendulum_lite", "cliff_grid"]);
        for f in builtin_families() {
            f.check_omega(f.nominal_omega()).unwrap();
            assert!((1..=3).contains(&f.omega_dim()));
            f.make(f.nominal_omega()).unwrap();
        }
        assert!(family_by_id("nope").is_err());
    }

    #[test]
    fn dr_sample_degenerate_box() {
        let fam = TabularFamily::slip_grid().with_omega_box(vec![[0.2, 0.2]]).unwrap();
        let mut rng = rng_from(1, &[0]);
        for _ in 0..100 {
            assert_eq!(dr_sample(&fam, &mut rng), vec![0.2]);
        }
    }

    #[test]
    fn dr_sample_uniform_mean() {
        let fam = TabularFamily::slip_grid().with_omega_box(vec![[0.0, 1.0]]).unwrap();
        let mut rng = rng_from(2, &[0]);
        let n = 100_000;
        let mut total = 0.0;
        for _ in 0..n {
            let w = dr_sample(&fam, &mut rng)[0];
            assert!((0.0..=1.0).contains(&w));
            total += w;
        }
        assert!((total / n as f64 - 0.5).abs() < 0.01);
    }
}
