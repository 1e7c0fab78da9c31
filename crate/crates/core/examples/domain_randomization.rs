//! Nominal-only versus domain-randomized Q-learning on the slippery grid,
//! scored by the worst case over ten slip probabilities.

use expectrl::agents::{q_learning_dr, q_learning_expectile, EpsilonSchedule, QLearningConfig};
use expectrl::envs::{evaluate, EnvFamily, OmegaGrid, TabularFamily};

fn main() -> expectrl::Result<()> {
    let family = TabularFamily::slip_grid();
    let grid = OmegaGrid::uniform(family.omega_box(), 10)?;
    for alpha in [0.5, 0.3] {
        let config = QLearningConfig {
            alpha,
            episodes: 5000,
            epsilon: EpsilonSchedule {
                start: 1.0,
                end: 0.1,
                decay_episodes: 2500,
            },
            seed: 2,
            ..Default::default()
        };
        let nominal = q_learning_expectile(&family, &config)?;
        let randomized = q_learning_dr(&family, &config)?;
        for (name, run) in [("nominal", &nominal), ("randomized", &randomized)] {
            let report = evaluate(&run.greedy_policy(), &family, &grid, 20, 5)?;
            println!(
                "alpha {alpha} {name:>10}: R_worst {:+.3}  R_average {:+.3}",
                report.worst, report.average
            );
        }
    }
    Ok(())
}
