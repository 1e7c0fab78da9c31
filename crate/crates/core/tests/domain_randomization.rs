//! Domain randomization: sampled parameters and the robustness it buys.

use expectrl::agents::{q_learning_dr, q_learning_expectile, EpsilonSchedule, QLearningConfig};
use expectrl::envs::{evaluate, EnvFamily, OmegaGrid, TabularFamily};

#[test]
fn logged_parameters_are_uniform_over_the_box() {
    let fam = TabularFamily::slip_grid();
    let config = QLearningConfig {
        episodes: 1000,
        seed: 8,
        ..Default::default()
    };
    let run = q_learning_dr(&fam, &config).unwrap();
    let [lo, hi] = fam.omega_box()[0];
    let mut u: Vec<f64> = run.log.records.iter().map(|r| (r.omega[0] - lo) / (hi - lo)).collect();
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    let d = u
        .iter()
        .enumerate()
        .map(|(i, x)| ((i as f64 + 1.0) / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max);
    // Kolmogorov-Smirnov critical value at the 1% level.
    assert!(d < 1.63 / n.sqrt(), "KS statistic {d}");
}

#[test]
fn randomized_training_is_no_less_robust_on_slip_grid() {
    let fam = TabularFamily::slip_grid();
    let grid = OmegaGrid::uniform(fam.omega_box(), 10).unwrap();
    let mut wins = 0;
    for seed in 0..10 {
        let config = QLearningConfig {
            episodes: 10_000,
            epsilon: EpsilonSchedule {
                start: 1.0,
                end: 0.1,
                decay_episodes: 5000,
            },
            seed,
            ..Default::default()
        };
        let nominal = q_learning_expectile(&fam, &config).unwrap();
        let randomized = q_learning_dr(&fam, &config).unwrap();
        let score = |policy| evaluate(&policy, &fam, &grid, 30, 500 + seed).unwrap().worst;
        if score(randomized.greedy_policy()) >= score(nominal.greedy_policy()) {
            wins += 1;
        }
    }
    assert!(wins >= 7, "randomized at least as robust in {wins}/10 seeds");
}
