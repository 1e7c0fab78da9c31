//! Classical, expectile and robust Bellman operators with fixed-point solvers.
//!
//! The expectile backup replaces the next-state mean `⟨P_sa, v⟩` with the
//! α-expectile of `v(s')` under `P_sa`. The robust backup instead minimizes
//! `⟨Q, v⟩` over the likelihood-ratio set around `P_sa`, solved per row by an
//! explicit linear program. The two are computed by unrelated code paths so
//! that each can serve as an oracle for the other. Uncertainty is
//! `(s, a)`-rectangular: each row is perturbed independently.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::expectile::{
    expectile_unchecked, minimize_over_eta, ExpectileSpec, SortedAtoms, DEFAULT_ETA_GRID,
};
use crate::mdp::{argmax, Policy, TabularMdp, ValueFunction};
use crate::rng::{rng_from, stream};

/// Bisection tolerance used inside expectile backups.
const BACKUP_TOL: f64 = 1e-13;

/// How the next-state values of one row are summarized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "statistic", content = "alpha")]
pub enum Statistic {
    Mean,
    Expectile(ExpectileSpec),
    Robust(ExpectileSpec),
}

/// Which Bellman operator to iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorKind {
    ClassicalPolicy,
    ClassicalOptimal,
    ExpectilePolicy(ExpectileSpec),
    ExpectileOptimal(ExpectileSpec),
    RobustPolicy(ExpectileSpec),
    RobustOptimal(ExpectileSpec),
}

impl OperatorKind {
    pub fn statistic(&self) -> Statistic {
        match *self {
            OperatorKind::ClassicalPolicy | OperatorKind::ClassicalOptimal => Statistic::Mean,
            OperatorKind::ExpectilePolicy(s) | OperatorKind::ExpectileOptimal(s) => {
                Statistic::Expectile(s)
            }
            OperatorKind::RobustPolicy(s) | OperatorKind::RobustOptimal(s) => Statistic::Robust(s),
        }
    }

    pub fn is_optimal(&self) -> bool {
        matches!(
            self,
            OperatorKind::ClassicalOptimal
                | OperatorKind::ExpectileOptimal(_)
                | OperatorKind::RobustOptimal(_)
        )
    }

    /// Builds a kind from a statistic and the control mode.
    pub fn from_parts(statistic: Statistic, optimal: bool) -> Self {
        match (statistic, optimal) {
            (Statistic::Mean, false) => OperatorKind::ClassicalPolicy,
            (Statistic::Mean, true) => OperatorKind::ClassicalOptimal,
            (Statistic::Expectile(s), false) => OperatorKind::ExpectilePolicy(s),
            (Statistic::Expectile(s), true) => OperatorKind::ExpectileOptimal(s),
            (Statistic::Robust(s), false) => OperatorKind::RobustPolicy(s),
            (Statistic::Robust(s), true) => OperatorKind::RobustOptimal(s),
        }
    }
}

/// Outcome of a fixed-point iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointResult {
    pub value: ValueFunction,
    pub policy: Policy,
    pub iterations: usize,
    /// Sup-norm distance between the last two iterates.
    pub final_residual: f64,
}

/// Support of one kernel row: next-state indices with positive mass.
#[derive(Debug, Clone)]
struct RowSupport {
    states: Vec<usize>,
    probs: Vec<f64>,
}

/// A Bellman operator bound to an MDP, with per-row supports extracted once.
#[derive(Debug, Clone)]
pub struct BellmanOperator<'a> {
    mdp: &'a TabularMdp,
    kind: OperatorKind,
    policy: Option<&'a Policy>,
    supports: Vec<RowSupport>,
    parallel: bool,
}

impl<'a> BellmanOperator<'a> {
    /// `policy` is required for the policy-evaluation kinds and ignored otherwise.
    pub fn new(mdp: &'a TabularMdp, kind: OperatorKind, policy: Option<&'a Policy>) -> Result<Self> {
        let policy = if kind.is_optimal() {
            None
        } else {
            let p = policy.ok_or_else(|| {
                Error::InvalidArgument("policy-evaluation operator needs a policy".into())
            })?;
            p.check(mdp.n_states(), mdp.n_actions())?;
            Some(p)
        };
        let supports = (0..mdp.n_states())
            .flat_map(|s| (0..mdp.n_actions()).map(move |a| (s, a)))
            .map(|(s, a)| {
                let (states, probs) = mdp
                    .row(s, a)
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(i, &p)| (i, p))
                    .unzip();
                RowSupport { states, probs }
            })
            .collect();
        Ok(Self {
            mdp,
            kind,
            policy,
            supports,
            parallel: false,
        })
    }

    /// Computes per-state backups on the rayon pool. Results are identical to
    /// the sequential sweep.
    pub fn parallel(mut self, yes: bool) -> Self {
        self.parallel = yes;
        self
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    /// Summary statistic of `v(s')` under row `(s, a)`.
    fn row_statistic(&self, s: usize, a: usize, v: &[f64]) -> f64 {
        let support = &self.supports[s * self.mdp.n_actions() + a];
        let values: Vec<f64> = support.states.iter().map(|&i| v[i]).collect();
        match self.kind.statistic() {
            Statistic::Mean => values.iter().zip(&support.probs).map(|(x, p)| x * p).sum(),
            Statistic::Expectile(spec) => {
                if spec.is_neutral() {
                    values.iter().zip(&support.probs).map(|(x, p)| x * p).sum()
                } else {
                    expectile_unchecked(&values, &support.probs, spec.alpha(), BACKUP_TOL)
                }
            }
            Statistic::Robust(spec) => robust_row_min(&values, &support.probs, &spec),
        }
    }

    /// `r(s, a) + γ·stat(P_sa, v)` for every action.
    pub fn q_row(&self, s: usize, v: &[f64]) -> Vec<f64> {
        (0..self.mdp.n_actions())
            .map(|a| self.mdp.reward(s, a) + self.mdp.gamma() * self.row_statistic(s, a, v))
            .collect()
    }

    fn backup_state(&self, s: usize, v: &[f64]) -> f64 {
        let q = self.q_row(s, v);
        match self.policy {
            None => q.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Some(pi) => q.iter().enumerate().map(|(a, qa)| pi.prob(s, a) * qa).sum(),
        }
    }

    pub fn apply(&self, v: &ValueFunction) -> ValueFunction {
        let v = v.as_slice();
        let out = if self.parallel {
            (0..self.mdp.n_states())
                .into_par_iter()
                .map(|s| self.backup_state(s, v))
                .collect()
        } else {
            (0..self.mdp.n_states())
                .map(|s| self.backup_state(s, v))
                .collect()
        };
        ValueFunction(out)
    }

    /// Greedy policy with respect to this operator's action values at `v`.
    pub fn greedy(&self, v: &ValueFunction) -> Policy {
        Policy::Deterministic(
            (0..self.mdp.n_states())
                .map(|s| argmax(&self.q_row(s, v.as_slice())))
                .collect(),
        )
    }

    /// Iterates from `v₀ = 0` until the contraction bound guarantees
    /// `‖v - v*‖∞ < tol`.
    pub fn fixed_point(&self, tol: f64, max_iter: usize) -> Result<FixedPointResult> {
        if !(tol > 0.0) {
            return invalid(format!("tol must be positive, got {tol}"));
        }
        let gamma = self.mdp.gamma();
        let threshold = tol * (1.0 - gamma) / gamma;
        let mut v = ValueFunction::zeros(self.mdp.n_states());
        let mut residual = f64::INFINITY;
        for it in 1..=max_iter {
            let next = self.apply(&v);
            residual = next.sup_distance(&v);
            v = next;
            if residual < threshold {
                let policy = match self.policy {
                    Some(p) => p.clone(),
                    None => self.greedy(&v),
                };
                return Ok(FixedPointResult {
                    value: v,
                    policy,
                    iterations: it,
                    final_residual: residual,
                });
            }
        }
        Err(Error::NotConverged {
            iterations: max_iter,
            residual,
        })
    }
}

fn robust_row_min(values: &[f64], probs: &[f64], spec: &ExpectileSpec) -> f64 {
    if spec.is_neutral() {
        return values.iter().zip(probs).map(|(x, p)| x * p).sum();
    }
    let atoms = SortedAtoms::new(values, probs);
    minimize_over_eta(&atoms, spec, DEFAULT_ETA_GRID)
}

/// `(T^π_α v)(s) = Σ_a π(a|s)·(r(s,a) + γ·m_α(P_sa, v))`. α = 1/2 gives the
/// classical policy backup.
pub fn apply_policy_operator(
    v: &ValueFunction,
    mdp: &TabularMdp,
    policy: &Policy,
    spec: ExpectileSpec,
) -> Result<ValueFunction> {
    check_len(v, mdp)?;
    Ok(BellmanOperator::new(mdp, OperatorKind::ExpectilePolicy(spec), Some(policy))?.apply(v))
}

/// `(T*_α v)(s) = max_a (r(s,a) + γ·m_α(P_sa, v))`.
pub fn apply_optimal_operator(
    v: &ValueFunction,
    mdp: &TabularMdp,
    spec: ExpectileSpec,
) -> Result<ValueFunction> {
    check_len(v, mdp)?;
    Ok(BellmanOperator::new(mdp, OperatorKind::ExpectileOptimal(spec), None)?.apply(v))
}

fn check_len(v: &ValueFunction, mdp: &TabularMdp) -> Result<()> {
    if v.len() != mdp.n_states() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} values", mdp.n_states()),
            got: format!("{}", v.len()),
        });
    }
    Ok(())
}

/// Fixed point of the operator `kind`; `policy` is needed for policy kinds.
pub fn value_iteration(
    mdp: &TabularMdp,
    kind: OperatorKind,
    policy: Option<&Policy>,
    tol: f64,
    max_iter: usize,
) -> Result<FixedPointResult> {
    BellmanOperator::new(mdp, kind, policy)?.fixed_point(tol, max_iter)
}

/// `min_{Q ∈ E} ⟨Q, v⟩` over the likelihood-ratio set around the kernel row
/// `row` (a probability vector over states).
pub fn robust_inner_min(v: &ValueFunction, row: &[f64], spec: &ExpectileSpec) -> Result<f64> {
    if row.len() != v.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("row over {} states", v.len()),
            got: format!("{}", row.len()),
        });
    }
    let total: f64 = row.iter().sum();
    if row.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidDistribution("kernel row is not a distribution".into()));
    }
    let (values, probs): (Vec<f64>, Vec<f64>) = row
        .iter()
        .zip(v.as_slice())
        .filter(|(&p, _)| p > 0.0)
        .map(|(&p, &x)| (x, p))
        .unzip();
    Ok(robust_row_min(&values, &probs, spec))
}

/// Fixed point of the robust operator, evaluating `policy` if given and
/// otherwise maximizing over actions of per-action inner minima.
pub fn robust_value_iteration(
    mdp: &TabularMdp,
    spec: ExpectileSpec,
    tol: f64,
    max_iter: usize,
    policy: Option<&Policy>,
) -> Result<FixedPointResult> {
    let kind = if policy.is_some() {
        OperatorKind::RobustPolicy(spec)
    } else {
        OperatorKind::RobustOptimal(spec)
    };
    value_iteration(mdp, kind, policy, tol, max_iter)
}

/// Largest observed `‖Tv₁ - Tv₂‖∞ / ‖v₁ - v₂‖∞` over random pairs with
/// entries uniform in `[-10, 10]`. Identical pairs are skipped.
pub fn contraction_probe(
    mdp: &TabularMdp,
    kind: OperatorKind,
    policy: Option<&Policy>,
    n_trials: usize,
    seed: u64,
) -> Result<f64> {
    if n_trials == 0 {
        return invalid("n_trials must be at least 1");
    }
    let op = BellmanOperator::new(mdp, kind, policy)?;
    let mut rng = rng_from(seed, &[stream::PROBE]);
    let n = mdp.n_states();
    let mut worst = 0.0f64;
    for _ in 0..n_trials {
        let v1 = ValueFunction((0..n).map(|_| rng.random_range(-10.0..10.0)).collect());
        let v2 = ValueFunction((0..n).map(|_| rng.random_range(-10.0..10.0)).collect());
        worst = worst.max(pair_ratio(&op, &v1, &v2));
    }
    Ok(worst)
}

/// Contraction ratio for one pair, 0 when the pair coincides.
pub fn pair_ratio(op: &BellmanOperator<'_>, v1: &ValueFunction, v2: &ValueFunction) -> f64 {
    let d = v1.sup_distance(v2);
    if d == 0.0 {
        return 0.0;
    }
    op.apply(v1).sup_distance(&op.apply(v2)) / d
}
