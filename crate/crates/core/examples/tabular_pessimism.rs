//! Expectile Q-learning on a two-armed problem: a safe arm paying 0.5 and a
//! risky arm paying 0 or 1. At alpha 0.2 the risky arm is valued at its
//! 0.2-expectile (0.2), so the learner prefers the safe arm.

use expectrl::agents::{q_learning_expectile, EpsilonSchedule, QLearningConfig};
use expectrl::harness::resolve_family;

fn main() -> expectrl::Result<()> {
    let family = resolve_family("safe_risky")?;
    for alpha in [0.2, 0.5] {
        let config = QLearningConfig {
            alpha,
            episodes: 4000,
            epsilon: EpsilonSchedule::constant(0.3),
            seed: 3,
            ..Default::default()
        };
        let run = q_learning_expectile(family.as_ref(), &config)?;
        let q = run.q();
        println!(
            "alpha {alpha}: q(safe) = {:.3}, q(risky) = {:.3}, greedy arm = {}",
            q.get(0, 0),
            q.get(0, 1),
            if q.argmax(0) == 0 { "safe" } else { "risky" }
        );
    }
    Ok(())
}
