//! Tabular MDPs, value tables, policies and parameterized kernel families.

use std::fmt;
use std::path::Path;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::{rng_from, stream};

const ROW_SUM_TOL: f64 = 1e-10;

/// Current version of the MDP JSON document.
pub const MDP_SCHEMA_VERSION: u32 = 1;

/// Finite MDP with dense transition tensor `P[s][a][s']` and reward table `r[s][a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    n_states: usize,
    n_actions: usize,
    transitions: Vec<f64>,
    rewards: Vec<f64>,
    gamma: f64,
    initial_dist: Vec<f64>,
    r_max: f64,
}

/// First invariant violated by an MDP instance.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Shape(String),
    NegativeProbability {
        state: usize,
        action: usize,
        next: usize,
        value: f64,
    },
    RowSum {
        state: usize,
        action: usize,
        sum: f64,
    },
    NonFiniteReward {
        state: usize,
        action: usize,
    },
    Gamma(f64),
    InitialDist(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape(msg) => write!(f, "shape: {msg}"),
            Violation::NegativeProbability {
                state,
                action,
                next,
                value,
            } => write!(
                f,
                "negative or non-finite probability {value} at (s={state}, a={action}, s'={next})"
            ),
            Violation::RowSum { state, action, sum } => {
                write!(f, "row (s={state}, a={action}) sums to {sum}")
            }
            Violation::NonFiniteReward { state, action } => {
                write!(f, "reward at (s={state}, a={action}) is not finite")
            }
            Violation::Gamma(g) => write!(f, "discount {g} outside (0, 1)"),
            Violation::InitialDist(msg) => write!(f, "initial distribution: {msg}"),
        }
    }
}

impl TabularMdp {
    /// Builds and validates an instance. `transitions` is row-major `[s][a][s']`.
    pub fn new(
        n_states: usize,
        n_actions: usize,
        transitions: Vec<f64>,
        rewards: Vec<f64>,
        gamma: f64,
        initial_dist: Vec<f64>,
    ) -> Result<Self> {
        let mdp = Self::new_unchecked(n_states, n_actions, transitions, rewards, gamma, initial_dist);
        mdp.validate()
            .map_err(|v| Error::InvalidArgument(format!("invalid MDP: {v}")))?;
        Ok(mdp)
    }

    /// Builds an instance without validating it; see [`TabularMdp::validate`].
    pub fn new_unchecked(
        n_states: usize,
        n_actions: usize,
        transitions: Vec<f64>,
        rewards: Vec<f64>,
        gamma: f64,
        initial_dist: Vec<f64>,
    ) -> Self {
        let r_max = rewards.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        Self {
            n_states,
            n_actions,
            transitions,
            rewards,
            gamma,
            initial_dist,
            r_max,
        }
    }

    /// Reports the first violated invariant, scanning rows in `(s, a)` order.
    pub fn validate(&self) -> std::result::Result<(), Violation> {
        let (s_n, a_n) = (self.n_states, self.n_actions);
        if s_n == 0 || a_n == 0 {
            return Err(Violation::Shape("empty state or action set".into()));
        }
        if self.transitions.len() != s_n * a_n * s_n {
            return Err(Violation::Shape(format!(
                "transition tensor has {} entries, expected {}",
                self.transitions.len(),
                s_n * a_n * s_n
            )));
        }
        if self.rewards.len() != s_n * a_n {
            return Err(Violation::Shape(format!(
                "reward table has {} entries, expected {}",
                self.rewards.len(),
                s_n * a_n
            )));
        }
        if self.initial_dist.len() != s_n {
            return Err(Violation::Shape(format!(
                "initial distribution has {} entries, expected {s_n}",
                self.initial_dist.len()
            )));
        }
        for s in 0..s_n {
            for a in 0..a_n {
                let row = self.row(s, a);
                if let Some((next, &value)) =
                    row.iter().enumerate().find(|(_, p)| !(p.is_finite() && **p >= 0.0))
                {
                    return Err(Violation::NegativeProbability {
                        state: s,
                        action: a,
                        next,
                        value,
                    });
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > ROW_SUM_TOL {
                    return Err(Violation::RowSum {
                        state: s,
                        action: a,
                        sum,
                    });
                }
                if !self.reward(s, a).is_finite() {
                    return Err(Violation::NonFiniteReward { state: s, action: a });
                }
            }
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Violation::Gamma(self.gamma));
        }
        if self.initial_dist.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Violation::InitialDist("negative or non-finite entry".into()));
        }
        let total: f64 = self.initial_dist.iter().sum();
        if (total - 1.0).abs() > ROW_SUM_TOL {
            return Err(Violation::InitialDist(format!("sums to {total}")));
        }
        Ok(())
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Largest absolute reward.
    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn initial_dist(&self) -> &[f64] {
        &self.initial_dist
    }

    /// Next-state distribution `P(·|s, a)`.
    pub fn row(&self, s: usize, a: usize) -> &[f64] {
        let start = (s * self.n_actions + a) * self.n_states;
        &self.transitions[start..start + self.n_states]
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.rewards[s * self.n_actions + a]
    }

    pub fn transitions(&self) -> &[f64] {
        &self.transitions
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    /// Same instance with a different discount.
    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return invalid(format!("gamma must lie in (0, 1), got {gamma}"));
        }
        self.gamma = gamma;
        Ok(self)
    }

    /// Same instance with every reward shifted by `delta`.
    pub fn with_reward_shift(&self, delta: f64) -> Self {
        let rewards = self.rewards.iter().map(|r| r + delta).collect();
        Self::new_unchecked(
            self.n_states,
            self.n_actions,
            self.transitions.clone(),
            rewards,
            self.gamma,
            self.initial_dist.clone(),
        )
    }

    /// Same rewards, discount and start distribution with a new kernel.
    pub fn with_transitions(&self, transitions: Vec<f64>) -> Self {
        Self {
            transitions,
            ..self.clone()
        }
    }

    pub fn to_document(&self) -> MdpDocument {
        let (s_n, a_n) = (self.n_states, self.n_actions);
        MdpDocument {
            version: MDP_SCHEMA_VERSION,
            n_states: s_n,
            n_actions: a_n,
            gamma: self.gamma,
            transitions: (0..s_n)
                .map(|s| (0..a_n).map(|a| self.row(s, a).to_vec()).collect())
                .collect(),
            rewards: (0..s_n)
                .map(|s| (0..a_n).map(|a| self.reward(s, a)).collect())
                .collect(),
            initial_dist: self.initial_dist.clone(),
        }
    }

    pub fn from_document(doc: MdpDocument) -> Result<Self> {
        if doc.version != MDP_SCHEMA_VERSION {
            return Err(Error::Version {
                expected: MDP_SCHEMA_VERSION,
                found: doc.version,
            });
        }
        let transitions: Vec<f64> = doc.transitions.into_iter().flatten().flatten().collect();
        let rewards: Vec<f64> = doc.rewards.into_iter().flatten().collect();
        Self::new(
            doc.n_states,
            doc.n_actions,
            transitions,
            rewards,
            doc.gamma,
            doc.initial_dist,
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_document(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Versioned JSON form of a [`TabularMdp`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdpDocument {
    pub version: u32,
    pub n_states: usize,
    pub n_actions: usize,
    pub gamma: f64,
    pub transitions: Vec<Vec<Vec<f64>>>,
    pub rewards: Vec<Vec<f64>>,
    pub initial_dist: Vec<f64>,
}

/// State values `v(s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValueFunction(pub Vec<f64>);

impl ValueFunction {
    pub fn zeros(n_states: usize) -> Self {
        Self(vec![0.0; n_states])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Sup-norm distance.
    pub fn sup_distance(&self, other: &ValueFunction) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Action values `q(s, a)`, stored row-major by state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QFunction {
    pub n_states: usize,
    pub n_actions: usize,
    pub q: Vec<f64>,
}

impl QFunction {
    pub fn zeros(n_states: usize, n_actions: usize) -> Self {
        Self {
            n_states,
            n_actions,
            q: vec![0.0; n_states * n_actions],
        }
    }

    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.q[s * self.n_actions + a]
    }

    pub fn get_mut(&mut self, s: usize, a: usize) -> &mut f64 {
        &mut self.q[s * self.n_actions + a]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.q[s * self.n_actions..(s + 1) * self.n_actions]
    }

    pub fn max(&self, s: usize) -> f64 {
        self.row(s).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Greedy action with lowest-index tie-breaking.
    pub fn argmax(&self, s: usize) -> usize {
        argmax(self.row(s))
    }

    pub fn greedy_policy(&self) -> Policy {
        Policy::Deterministic((0..self.n_states).map(|s| self.argmax(s)).collect())
    }
}

/// Index of the first maximal entry.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Tabular policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// One action index per state.
    Deterministic(Vec<usize>),
    /// One action distribution per state.
    Stochastic(Vec<Vec<f64>>),
}

impl Policy {
    /// Uniform random policy.
    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        Policy::Stochastic(vec![vec![1.0 / n_actions as f64; n_actions]; n_states])
    }

    pub fn n_states(&self) -> usize {
        match self {
            Policy::Deterministic(a) => a.len(),
            Policy::Stochastic(rows) => rows.len(),
        }
    }

    /// `π(a|s)`.
    pub fn prob(&self, s: usize, a: usize) -> f64 {
        match self {
            Policy::Deterministic(actions) => {
                if actions[s] == a {
                    1.0
                } else {
                    0.0
                }
            }
            Policy::Stochastic(rows) => rows[s][a],
        }
    }

    pub fn check(&self, n_states: usize, n_actions: usize) -> Result<()> {
        if self.n_states() != n_states {
            return Err(Error::ShapeMismatch {
                expected: format!("{n_states} states"),
                got: format!("{} states", self.n_states()),
            });
        }
        match self {
            Policy::Deterministic(actions) => {
                if let Some(s) = actions.iter().position(|&a| a >= n_actions) {
                    return invalid(format!("policy action out of range at state {s}"));
                }
            }
            Policy::Stochastic(rows) => {
                for (s, row) in rows.iter().enumerate() {
                    let sum: f64 = row.iter().sum();
                    if row.len() != n_actions
                        || row.iter().any(|p| !(*p >= 0.0))
                        || (sum - 1.0).abs() > 1e-10
                    {
                        return invalid(format!("policy row {s} is not a distribution"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Samples an action at state `s`.
    pub fn sample<R: Rng + ?Sized>(&self, s: usize, rng: &mut R) -> usize {
        match self {
            Policy::Deterministic(actions) => actions[s],
            Policy::Stochastic(rows) => sample_index(&rows[s], rng),
        }
    }
}

/// Inverse-CDF draw from a probability vector.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Random Garnet instance.
///
/// Each `(s, a)` row has exactly `branching` nonzero entries on distinct next
/// states, weighted by a symmetric Dirichlet(1) draw. Each reward is zero with
/// probability `reward_sparsity` and uniform on `[0, 1]` otherwise. The start
/// distribution is uniform and the discount is 0.9.
pub fn garnet(
    n_states: usize,
    n_actions: usize,
    branching: usize,
    reward_sparsity: f64,
    seed: u64,
) -> Result<TabularMdp> {
    if n_states == 0 || n_actions == 0 {
        return invalid("garnet needs at least one state and one action");
    }
    if branching == 0 || branching > n_states {
        return invalid(format!(
            "branching must lie in [1, {n_states}], got {branching}"
        ));
    }
    if !(0.0..=1.0).contains(&reward_sparsity) {
        return invalid(format!("reward_sparsity must lie in [0, 1], got {reward_sparsity}"));
    }
    let mut rng = rng_from(seed, &[stream::INSTANCE]);
    let mut transitions = vec![0.0; n_states * n_actions * n_states];
    for row in transitions.chunks_mut(n_states) {
        let targets = index::sample(&mut rng, n_states, branching);
        let weights: Vec<f64> = (0..branching)
            .map(|_| {
                let w: f64 = Exp1.sample(&mut rng);
                w.max(f64::MIN_POSITIVE)
            })
            .collect();
        let total: f64 = weights.iter().sum();
        for (t, w) in targets.iter().zip(&weights) {
            row[t] = w / total;
        }
    }
    let rewards = (0..n_states * n_actions)
        .map(|_| {
            let keep = rng.random::<f64>() >= reward_sparsity;
            let r: f64 = rng.random();
            if keep {
                r
            } else {
                0.0
            }
        })
        .collect();
    TabularMdp::new(
        n_states,
        n_actions,
        transitions,
        rewards,
        0.9,
        vec![1.0 / n_states as f64; n_states],
    )
}

/// How a kernel family deforms its base kernel as ω moves.
#[derive(Debug, Clone, PartialEq)]
pub enum Perturbation {
    /// With probability ω the executed action is replaced by a uniformly
    /// chosen different action: `P_ω(·|s,a) = (1-ω)·P(·|s,a) + ω/(A-1)·Σ_{a'≠a} P(·|s,a')`.
    ActionSlip,
    /// Convex mixture with an alternative kernel: `(1-ω)·P + ω·P_alt`.
    Mixture { alternative: Vec<f64> },
}

/// A base MDP together with a one-parameter kernel deformation driven by
/// component `component` of the uncertainty vector ω.
#[derive(Debug, Clone)]
pub struct KernelFamily {
    base: TabularMdp,
    perturbation: Perturbation,
    component: usize,
    omega_box: Vec<[f64; 2]>,
    nominal: Vec<f64>,
}

impl KernelFamily {
    pub fn new(
        base: TabularMdp,
        perturbation: Perturbation,
        component: usize,
        omega_box: Vec<[f64; 2]>,
        nominal: Vec<f64>,
    ) -> Result<Self> {
        if component >= omega_box.len() || nominal.len() != omega_box.len() {
            return invalid("kernel family parameter dimensions disagree");
        }
        if let Perturbation::Mixture { alternative } = &perturbation {
            let alt = base.with_transitions(alternative.clone());
            alt.validate()
                .map_err(|v| Error::InvalidArgument(format!("alternative kernel: {v}")))?;
        }
        let [lo, hi] = omega_box[component];
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return invalid("kernel parameter box must lie inside [0, 1]");
        }
        let family = Self {
            base,
            perturbation,
            component,
            omega_box,
            nominal,
        };
        family.check_omega(&family.nominal)?;
        Ok(family)
    }

    pub fn base(&self) -> &TabularMdp {
        &self.base
    }

    pub fn perturbation(&self) -> &Perturbation {
        &self.perturbation
    }

    /// Index of the ω component driving the kernel.
    pub fn component(&self) -> usize {
        self.component
    }

    pub fn omega_box(&self) -> &[[f64; 2]] {
        &self.omega_box
    }

    pub fn nominal_omega(&self) -> &[f64] {
        &self.nominal
    }

    pub fn check_omega(&self, omega: &[f64]) -> Result<()> {
        if omega.len() != self.omega_box.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("omega of dimension {}", self.omega_box.len()),
                got: format!("dimension {}", omega.len()),
            });
        }
        for (k, (w, [lo, hi])) in omega.iter().zip(&self.omega_box).enumerate() {
            if !(w >= lo && w <= hi) {
                return invalid(format!("omega[{k}] = {w} outside [{lo}, {hi}]"));
            }
        }
        Ok(())
    }

    /// The MDP at parameter ω. Rewards, discount and start distribution are
    /// those of the base instance; only the kernel changes.
    pub fn perturb_kernel(&self, omega: &[f64]) -> Result<TabularMdp> {
        self.check_omega(omega)?;
        let w = omega[self.component];
        let (s_n, a_n) = (self.base.n_states(), self.base.n_actions());
        let mut kernel = vec![0.0; s_n * a_n * s_n];
        match &self.perturbation {
            Perturbation::ActionSlip => {
                for s in 0..s_n {
                    for a in 0..a_n {
                        let out = &mut kernel[(s * a_n + a) * s_n..(s * a_n + a + 1) * s_n];
                        if a_n == 1 {
                            out.copy_from_slice(self.base.row(s, a));
                            continue;
                        }
                        let share = w / (a_n - 1) as f64;
                        for (next, slot) in out.iter_mut().enumerate() {
                            let mut p = (1.0 - w) * self.base.row(s, a)[next];
                            for other in (0..a_n).filter(|&o| o != a) {
                                p += share * self.base.row(s, other)[next];
                            }
                            *slot = p;
                        }
                    }
                }
            }
            Perturbation::Mixture { alternative } => {
                for (slot, (p, q)) in kernel
                    .iter_mut()
                    .zip(self.base.transitions().iter().zip(alternative))
                {
                    *slot = (1.0 - w) * p + w * q;
                }
            }
        }
        Ok(self.base.with_transitions(kernel))
    }

    pub fn nominal_mdp(&self) -> TabularMdp {
        self.perturb_kernel(&self.nominal)
            .expect("nominal parameter lies in the box")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_state() -> TabularMdp {
        TabularMdp::new(1, 1, vec![1.0], vec![1.0], 0.5, vec![1.0]).unwrap()
    }

    #[test]
    fn identity_kernel_is_valid() {
        assert_eq!(one_state().validate(), Ok(()));
    }

    #[test]
    fn short_row_is_reported() {
        let mdp = TabularMdp::new_unchecked(
            2,
            1,
            vec![1.0, 0.0, 0.6, 0.3],
            vec![0.0, 0.0],
            0.9,
            vec![0.5, 0.5],
        );
        match mdp.validate() {
            Err(Violation::RowSum { state: 1, action: 0, sum }) => {
                assert!((sum - 0.9).abs() < 1e-12)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_probability_is_reported() {
        let mdp = TabularMdp::new_unchecked(
            2,
            1,
            vec![1.2, -0.2, 0.0, 1.0],
            vec![0.0, 0.0],
            0.9,
            vec![1.0, 0.0],
        );
        assert!(matches!(
            mdp.validate(),
            Err(Violation::NegativeProbability { state: 0, action: 0, next: 1, .. })
        ));
    }

    #[test]
    fn other_violations() {
        let bad_gamma = TabularMdp::new_unchecked(1, 1, vec![1.0], vec![0.0], 1.0, vec![1.0]);
        assert_eq!(bad_gamma.validate(), Err(Violation::Gamma(1.0)));
        let bad_reward =
            TabularMdp::new_unchecked(1, 1, vec![1.0], vec![f64::INFINITY], 0.5, vec![1.0]);
        assert!(matches!(
            bad_reward.validate(),
            Err(Violation::NonFiniteReward { .. })
        ));
        let bad_init = TabularMdp::new_unchecked(1, 1, vec![1.0], vec![0.0], 0.5, vec![0.5]);
        assert!(matches!(bad_init.validate(), Err(Violation::InitialDist(_))));
        let bad_shape = TabularMdp::new_unchecked(2, 1, vec![1.0], vec![0.0], 0.5, vec![1.0]);
        assert!(matches!(bad_shape.validate(), Err(Violation::Shape(_))));
    }

    #[test]
    fn garnet_examples() {
        let mdp = garnet(5, 2, 3, 0.5, 7).unwrap();
        assert_eq!(mdp.validate(), Ok(()));
        for s in 0..5 {
            for a in 0..2 {
                assert_eq!(mdp.row(s, a).iter().filter(|&&p| p > 0.0).count(), 3);
            }
        }
        assert_eq!(mdp, garnet(5, 2, 3, 0.5, 7).unwrap());
        assert_ne!(mdp, garnet(5, 2, 3, 0.5, 8).unwrap());

        let single = garnet(1, 1, 1, 0.0, 0).unwrap();
        assert_eq!(single.row(0, 0), &[1.0]);
        assert!(garnet(3, 2, 4, 0.5, 1).is_err());
    }

    #[test]
    fn json_round_trip_and_version_check() {
        let mdp = garnet(4, 3, 2, 0.3, 11).unwrap();
        let text = mdp.to_json().unwrap();
        assert_eq!(TabularMdp::from_json(&text).unwrap(), mdp);
        let mut doc = mdp.to_document();
        doc.version = 99;
        assert!(matches!(
            TabularMdp::from_document(doc),
            Err(Error::Version { found: 99, .. })
        ));
        let unknown = text.replacen('{', "{\"extra\": 1,", 1);
        assert!(TabularMdp::from_json(&unknown).is_err());
    }

    #[test]
    fn slip_family_rows() {
        // Two-state line: action 0 stays, action 1 moves to the other state.
        let base = TabularMdp::new(
            2,
            2,
            vec![1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.5, 0.0],
            0.9,
            vec![1.0, 0.0],
        )
        .unwrap();
        let fam =
            KernelFamily::new(base.clone(), Perturbation::ActionSlip, 0, vec![[0.0, 0.5]], vec![0.0])
                .unwrap();
        assert_eq!(fam.nominal_mdp().transitions(), base.transitions());
        let m = fam.perturb_kernel(&[0.3]).unwrap();
        assert!((m.row(0, 1)[1] - 0.7).abs() < 1e-15);
        assert!((m.row(0, 1)[0] - 0.3).abs() < 1e-15);
        assert_eq!(m.rewards(), base.rewards());
        assert_eq!(m.gamma(), base.gamma());
        assert!(fam.perturb_kernel(&[0.6]).is_err());
        assert!(fam.perturb_kernel(&[0.1, 0.1]).is_err());
    }

    #[test]
    fn mixture_family_at_zero_is_exact() {
        let base = garnet(4, 2, 2, 0.0, 3).unwrap();
        let alt = garnet(4, 2, 4, 0.0, 4).unwrap();
        let fam = KernelFamily::new(
            base.clone(),
            Perturbation::Mixture {
                alternative: alt.transitions().to_vec(),
            },
            0,
            vec![[0.0, 1.0]],
            vec![0.0],
        )
        .unwrap();
        assert_eq!(fam.nominal_mdp(), base);
        assert_eq!(fam.perturb_kernel(&[0.5]).unwrap().validate(), Ok(()));
    }

    #[test]
    fn greedy_ties_pick_lowest_index() {
        let q = QFunction {
            n_states: 1,
            n_actions: 3,
            q: vec![1.0, 2.0, 2.0],
        };
        assert_eq!(q.argmax(0), 1);
        assert_eq!(argmax(&[0.0, 0.0]), 0);
    }

    #[test]
    fn policy_checks() {
        assert!(Policy::Deterministic(vec![0, 2]).check(2, 2).is_err());
        assert!(Policy::Stochastic(vec![vec![0.5, 0.6]]).check(1, 2).is_err());
        assert!(Policy::uniform(3, 4).check(3, 4).is_ok());
    }
}
