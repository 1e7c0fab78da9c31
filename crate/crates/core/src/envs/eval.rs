use std::io::Write;

use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_in_box, Action, EnvFamily, Environment, State};
use crate::error::{invalid, Error, Result};
use crate::mdp::Policy;
use crate::rng::{derive_seed, stream, ChaCha8Rng};

/// Anything that picks actions: tabular policies, actor networks, closures.
pub trait Behavior: Sync {
    fn act(&self, state: &State, rng: &mut ChaCha8Rng) -> Action;
}

impl Behavior for Policy {
    fn act(&self, state: &State, rng: &mut ChaCha8Rng) -> Action {
        let s = state
            .index()
            .expect("tabular policies act on discrete states");
        Action::Discrete(self.sample(s, rng))
    }
}

impl<F> Behavior for F
where
    F: Fn(&State) -> Action + Sync,
{
    fn act(&self, state: &State, _rng: &mut ChaCha8Rng) -> Action {
        self(state)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeOutcome {
    /// Undiscounted sum of rewards.
    pub total_reward: f64,
    pub steps: usize,
    /// The horizon ended the episode before a terminal state.
    pub truncated: bool,
}

/// Plays one episode. The environment and the behavior draw from separate
/// streams derived from `seed`.
pub fn run_episode(env: &mut dyn Environment, behavior: &dyn Behavior, seed: u64) -> EpisodeOutcome {
    let mut state = env.reset(derive_seed(seed, &[stream::ENV]));
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[stream::EXPLORATION]));
    let mut total_reward = 0.0;
    for t in 0..env.horizon() {
        let action = behavior.act(&state, &mut rng);
        let step = env.step(&action);
        total_reward += step.reward;
        if step.done {
            return EpisodeOutcome {
                total_reward,
                steps: t + 1,
                truncated: false,
            };
        }
        state = step.state;
    }
    EpisodeOutcome {
        total_reward,
        steps: env.horizon(),
        truncated: true,
    }
}

/// Evaluation parameters: a list of ω vectors inside a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaGrid {
    points: Vec<Vec<f64>>,
}

impl OmegaGrid {
    /// `per_dim` equally spaced points per dimension, endpoints included,
    /// combined as a Cartesian product with the first dimension varying
    /// slowest. Degenerate dimensions contribute a single value.
    pub fn uniform(omega_box: &[[f64; 2]], per_dim: usize) -> Result<Self> {
        if per_dim < 2 {
            return invalid("a uniform grid needs at least two points per dimension");
        }
        let axes: Vec<Vec<f64>> = omega_box
            .iter()
            .map(|&[lo, hi]| {
                if lo == hi {
                    vec![lo]
                } else {
                    let step = (hi - lo) / (per_dim - 1) as f64;
                    (0..per_dim)
                        .map(|i| if i + 1 == per_dim { hi } else { lo + step * i as f64 })
                        .collect()
                }
            })
            .collect();
        let mut points = vec![Vec::new()];
        for axis in &axes {
            points = points
                .into_iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |&w| {
                        let mut p = prefix.clone();
                        p.push(w);
                        p
                    })
                })
                .collect();
        }
        Ok(Self { points })
    }

    /// Explicit points, each checked against the box.
    pub fn from_points(omega_box: &[[f64; 2]], points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return invalid("a grid needs at least one point");
        }
        for p in &points {
            check_in_box(omega_box, p)?;
        }
        Ok(Self { points })
    }

    pub fn single(omega: Vec<f64>) -> Self {
        Self {
            points: vec![omega],
        }
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Per-grid-point mean returns and their worst-case and average aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub family: String,
    pub grid: OmegaGrid,
    pub per_point_return: Vec<f64>,
    pub worst: f64,
    pub average: f64,
    pub n_eval: usize,
    pub seed: u64,
    /// Episodes stopped by the horizon rather than a terminal state.
    pub truncated_episodes: usize,
}

impl EvalReport {
    pub fn from_returns(
        family: &str,
        grid: OmegaGrid,
        per_point_return: Vec<f64>,
        n_eval: usize,
        seed: u64,
        truncated_episodes: usize,
    ) -> Self {
        let worst = per_point_return.iter().copied().fold(f64::INFINITY, f64::min);
        let average = per_point_return.iter().sum::<f64>() / per_point_return.len() as f64;
        // Rounding can push the mean a hair below the minimum for constant returns.
        let average = average.max(worst);
        Self {
            family: family.to_string(),
            grid,
            per_point_return,
            worst,
            average,
            n_eval,
            seed,
            truncated_episodes,
        }
    }

    /// Flat CSV with columns `family, omega_0, …, R_k`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let dim = self.grid.points().first().map_or(0, Vec::len);
        let mut header = vec!["family".to_string()];
        header.extend((0..dim).map(|i| format!("omega_{i}")));
        header.push("R_k".into());
        w.write_record(&header)?;
        for (point, r) in self.grid.points().iter().zip(&self.per_point_return) {
            let mut row = vec![self.family.clone()];
            row.extend(point.iter().map(|x| x.to_string()));
            row.push(r.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Scores `behavior` on every grid point with `n_eval` episodes each.
///
/// Episode `e` at grid index `k` uses the seed `hash(seed, k, e)`, so cells
/// can run in any order or in parallel and produce the same report.
pub fn evaluate(
    behavior: &dyn Behavior,
    family: &dyn EnvFamily,
    grid: &OmegaGrid,
    n_eval: usize,
    seed: u64,
) -> Result<EvalReport> {
    if n_eval == 0 {
        return invalid("n_eval must be at least 1");
    }
    for p in grid.points() {
        family.check_omega(p)?;
    }
    let cells: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|k| (0..n_eval).map(move |e| (k, e)))
        .collect();
    let outcomes: Vec<EpisodeOutcome> = cells
        .par_iter()
        .map(|&(k, e)| {
            let mut env = family.make(&grid.points()[k])?;
            let episode_seed = derive_seed(seed, &[stream::EVAL, k as u64, e as u64]);
            Ok(run_episode(env.as_mut(), behavior, episode_seed))
        })
        .collect::<Result<_>>()?;
    let per_point_return = outcomes
        .chunks(n_eval)
        .map(|chunk| chunk.iter().map(|o| o.total_reward).sum::<f64>() / n_eval as f64)
        .collect();
    let truncated = outcomes.iter().filter(|o| o.truncated).count();
    Ok(EvalReport::from_returns(
        family.id(),
        grid.clone(),
        per_point_return,
        n_eval,
        seed,
        truncated,
    ))
}
