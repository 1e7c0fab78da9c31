use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::solve::equivalence_check;
use crate::bellman::{contraction_probe, OperatorKind};
use crate::error::Result;
use crate::expectile::{
    expectile_discrete, expectile_variational, DiscreteDistribution, ExpectileSpec, DEFAULT_ETA_GRID, DEFAULT_TOL,
};
use crate::mdp::{garnet, Policy};
use crate::rng::{derive_seed, rng_from, stream};

pub const ORACLE_LEVELS: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];
pub const EQUIVALENCE_LEVELS: [f64; 3] = [0.2, 0.3, 0.4];

#[derive(Debug, Clone, Serialize)]
pub struct OracleOptions {
    pub distributions: usize,
    pub mdps: usize,
    pub probe_pairs: usize,
    pub seed: u64,
    pub gap_tol: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            distributions: 1000,
            mdps: 50,
            probe_pairs: 200,
            seed: 0,
            gap_tol: 1e-5,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    /// Largest |bisection - variational| over distributions and levels.
    pub expectile_gap: f64,
    /// Largest expectile-vs-robust fixed point gap over MDPs and levels.
    pub equivalence_gap: f64,
    /// Largest observed contraction ratio minus γ.
    pub contraction_excess: f64,
    pub passed: bool,
}

/// Random support of at most 10 atoms with strictly positive masses.
pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R) -> DiscreteDistribution {
    let n = rng.random_range(1..=10);
    let values: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    DiscreteDistribution::new(values, raw.iter().map(|p| p / total).collect())
        .expect("positive normalized masses")
}

/// Runs the expectile, expectile-vs-robust and contraction oracles.
pub fn oracle_check(options: &OracleOptions) -> Result<OracleReport> {
    let expectile_gap = (0..options.distributions)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = rng_from(options.seed, &[stream::PROBE, i as u64]);
            let dist = random_distribution(&mut rng);
            let mut worst: f64 = 0.0;
            for alpha in ORACLE_LEVELS {
                let a = expectile_discrete(&dist, alpha, DEFAULT_TOL)?;
                let b = expectile_variational(&dist, &ExpectileSpec::new(alpha)?, DEFAULT_ETA_GRID)?;
                worst = worst.max((a - b).abs());
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let per_mdp = (0..options.mdps)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64)> {
            let mut rng = rng_from(options.seed, &[stream::INSTANCE, i as u64]);
            let n_states = rng.random_range(2..=10);
            let n_actions = rng.random_range(1..=4);
            let branching = rng.random_range(1..=n_states);
            let mdp = garnet(n_states, n_actions, branching, 0.3, derive_seed(options.seed, &[i as u64]))?;
            let mut gap: f64 = 0.0;
            for alpha in EQUIVALENCE_LEVELS {
                gap = gap.max(equivalence_check(&mdp, alpha, 1e-10, 100_000)?.gap());
            }
            let uniform = Policy::uniform(n_states, n_actions);
            let mut excess = f64::NEG_INFINITY;
            for alpha in ORACLE_LEVELS {
                let spec = ExpectileSpec::new(alpha)?;
                for (kind, policy) in [
                    (OperatorKind::ExpectileOptimal(spec), None),
                    (OperatorKind::ExpectilePolicy(spec), Some(&uniform)),
                ] {
                    let r = contraction_probe(&mdp, kind, policy, options.probe_pairs, derive_seed(options.seed, &[i as u64, 1]))?;
                    excess = excess.max(r - mdp.gamma());
                }
            }
            Ok((gap, excess))
        })
        .collect::<Result<Vec<_>>>()?;
    let equivalence_gap = per_mdp.iter().map(|p| p.0).fold(0.0, f64::max);
    let contraction_excess = per_mdp.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let passed = expectile_gap < options.gap_tol
        && equivalence_gap < options.gap_tol
        && contraction_excess <= 1e-9;
    Ok(OracleReport {
        expectile_gap,
        equivalence_gap,
        contraction_excess,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_oracle_run_passes() {
        let rep = oracle_check(&OracleOptions {
            distributions: 50,
            mdps: 3,
            probe_pairs: 20,
            ..Default::default()
        })
        .unwrap();
        assert!(rep.passed, "{rep:?}");
    }
}
