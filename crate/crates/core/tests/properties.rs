//! Randomized invariants across the statistics, models and learners.

use proptest::prelude::*;
use rand::SeedableRng;

use expectrl::agents::{BanditState, ReplayBuffer, DEFAULT_ARMS};
use expectrl::bellman::{robust_inner_min, value_iteration, OperatorKind};
use expectrl::expectile::{
    expectile_discrete, expectile_variational, DiscreteDistribution, ExpectileSpec, DEFAULT_ETA_GRID,
};
use expectrl::mdp::{garnet, Policy, ValueFunction};
use expectrl::rng::ChaCha8Rng;

fn distribution() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..=10).prop_flat_map(|n| {
        (
            prop::collection::vec(-20.0f64..20.0, n),
            prop::collection::vec(0.01f64..1.0, n),
        )
            .prop_map(|(values, raw)| {
                let total: f64 = raw.iter().sum();
                (values, raw.into_iter().map(|p| p / total).collect())
            })
    })
}

fn m(values: &[f64], probs: &[f64], alpha: f64) -> f64 {
    expectile_discrete(&DiscreteDistribution::new(values.to_vec(), probs.to_vec()).unwrap(), alpha, 1e-12).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bisection_agrees_with_variational_form((values, probs) in distribution(), alpha in 0.05f64..=0.5) {
        let dist = DiscreteDistribution::new(values, probs).unwrap();
        let a = expectile_discrete(&dist, alpha, 1e-12).unwrap();
        let b = expectile_variational(&dist, &ExpectileSpec::new(alpha).unwrap(), DEFAULT_ETA_GRID).unwrap();
        prop_assert!((a - b).abs() < 1e-5, "{} vs {}", a, b);
    }

    #[test]
    fn expectile_lies_between_extremes((values, probs) in distribution(), alpha in 0.01f64..0.99) {
        let e = m(&values, &probs, alpha);
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(e >= lo - 1e-9 && e <= hi + 1e-9);
    }

    #[test]
    fn translation_and_scaling((values, probs) in distribution(), alpha in 0.01f64..0.99,
                               c in -10.0f64..10.0, lambda in 0.1f64..10.0) {
        let base = m(&values, &probs, alpha);
        let shifted: Vec<f64> = values.iter().map(|v| v + c).collect();
        let scaled: Vec<f64> = values.iter().map(|v| v * lambda).collect();
        prop_assert!((m(&shifted, &probs, alpha) - base - c).abs() < 1e-8);
        prop_assert!((m(&scaled, &probs, alpha) - lambda * base).abs() < 1e-8 * lambda.max(1.0) * 10.0);
    }

    #[test]
    fn monotone_in_outcomes((values, probs) in distribution(), alpha in 0.01f64..0.99,
                            bumps in prop::collection::vec(0.0f64..5.0, 10)) {
        let bigger: Vec<f64> = values.iter().zip(&bumps).map(|(v, b)| v + b).collect();
        prop_assert!(m(&values, &probs, alpha) <= m(&bigger, &probs, alpha) + 1e-8);
    }

    #[test]
    fn superadditive_below_half((x, probs) in distribution(), alpha in 0.01f64..=0.5,
                                y_raw in prop::collection::vec(-20.0f64..20.0, 10)) {
        let y = &y_raw[..x.len()];
        let sum: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
        prop_assert!(m(&sum, &probs, alpha) >= m(&x, &probs, alpha) + m(y, &probs, alpha) - 1e-8);
    }

    #[test]
    fn robust_inner_min_is_the_expectile((values, probs) in distribution(), alpha in 0.05f64..=0.5) {
        let spec = ExpectileSpec::new(alpha).unwrap();
        let v = ValueFunction(values.clone());
        let inner = robust_inner_min(&v, &probs, &spec).unwrap();
        prop_assert!((inner - m(&values, &probs, alpha)).abs() < 1e-7);
    }

    #[test]
    fn garnet_instances_are_valid(s in 1usize..12, a in 1usize..5, b in 1usize..12,
                                  sparsity in 0.0f64..1.0, seed in any::<u64>()) {
        let b = b.min(s);
        let mdp = garnet(s, a, b, sparsity, seed).unwrap();
        prop_assert!(mdp.validate().is_ok());
        for st in 0..s {
            for ac in 0..a {
                let row = mdp.row(st, ac);
                prop_assert_eq!(row.iter().filter(|p| **p > 0.0).count(), b);
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                prop_assert!((0.0..=1.0).contains(&mdp.reward(st, ac)));
            }
        }
        prop_assert_eq!(garnet(s, a, b, sparsity, seed).unwrap(), mdp);
    }

    #[test]
    fn value_is_nondecreasing_in_alpha(seed in any::<u64>(), lo in 0.05f64..0.5, gap in 0.0f64..0.45) {
        let hi = (lo + gap).min(0.5);
        let mdp = garnet(6, 3, 3, 0.3, seed).unwrap();
        let pi = Policy::uniform(6, 3);
        let v = |alpha: f64| {
            let kind = OperatorKind::ExpectilePolicy(ExpectileSpec::new(alpha).unwrap());
            value_iteration(&mdp, kind, Some(&pi), 1e-11, 100_000).unwrap().value
        };
        let (a, b) = (v(lo), v(hi));
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            prop_assert!(*x <= y + 1e-8);
        }
    }

    #[test]
    fn bandit_probabilities_stay_normalized(weights in prop::collection::vec(-60.0f64..60.0, 4),
                                            returns in prop::collection::vec(-100.0f64..100.0, 1..40),
                                            seed in any::<u64>()) {
        let mut bandit = BanditState::with_weights(DEFAULT_ARMS.to_vec(), weights, 0.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for r in returns {
            let arm = bandit.sample(&mut rng);
            bandit.update(arm, r).unwrap();
            let total: f64 = bandit.probs().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(bandit.probs().iter().all(|p| *p >= 0.0));
            prop_assert!(bandit.weights().iter().all(|w| w.abs() <= 50.0));
        }
    }

    #[test]
    fn constant_feedback_leaves_the_bandit_uniform(r in -10.0f64..10.0, n in 1usize..200, seed in any::<u64>()) {
        let mut bandit = BanditState::new(DEFAULT_ARMS.to_vec(), 0.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..n {
            let arm = bandit.sample(&mut rng);
            bandit.update(arm, r).unwrap();
        }
        for p in bandit.probs() {
            prop_assert!((p - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn replay_keeps_the_newest_items(capacity in 1usize..50, pushes in 0usize..200) {
        let mut buf = ReplayBuffer::new(capacity).unwrap();
        for i in 0..pushes {
            buf.push(i);
        }
        prop_assert_eq!(buf.len(), pushes.min(capacity));
        prop_assert_eq!(buf.inserted(), pushes as u64);
        let mut stored: Vec<usize> = (0..buf.len()).map(|i| *buf.get(i).unwrap()).collect();
        stored.sort();
        let expected: Vec<usize> = (pushes.saturating_sub(capacity)..pushes).collect();
        prop_assert_eq!(stored, expected);
    }
}

#[test]
fn replay_sampling_is_uniform() {
    let capacity = 20;
    let mut buf = ReplayBuffer::new(capacity).unwrap();
    for i in 0..45 {
        buf.push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let draws = 100_000;
    let mut counts = vec![0usize; capacity];
    for i in buf.sample_indices(draws, &mut rng) {
        counts[i] += 1;
    }
    let p = 1.0 / capacity as f64;
    let expected = draws as f64 * p;
    let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
    for (slot, c) in counts.iter().enumerate() {
        assert!((*c as f64 - expected).abs() < 3.0 * sigma, "slot {slot}: {c} draws, expected {expected:.0} ± {sigma:.0}");
    }
}
