//! Scalar expectile statistics.
//!
//! The α-expectile of a random variable `X` is the minimizer over `m` of
//! `E[L(X - m)]` with the asymmetric squared loss
//! `L(u) = α·max(u,0)² + (1-α)·max(-u,0)²`. Note that at α = 1/2 this loss is
//! `u²/2`, half the usual squared error; minimizers are unaffected.
//!
//! Two independent routes are provided for discrete distributions:
//!
//! * [`expectile_discrete`] solves the first-order condition
//!   `α·E[(X-m)₊] = (1-α)·E[(m-X)₊]` by bisection.
//! * [`expectile_variational`] computes the minimum of `E_Q[X]` over the
//!   likelihood-ratio set `η·√(α/(1-α)) ≤ dQ/dP ≤ η·√((1-α)/α)`, which for
//!   α ≤ 1/2 coincides with the expectile.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Residual tolerance used by [`expectile_discrete`] when callers have no
/// reason to pick another.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Number of η grid points scanned by [`expectile_variational`].
pub const DEFAULT_ETA_GRID: usize = 64;
/// Golden-section iterations applied inside the best η grid cell.
pub const GOLDEN_ITERS: usize = 30;

const PROB_SUM_TOL: f64 = 1e-12;

/// Pessimism level α ∈ (0, 1/2] with the likelihood-ratio bounds it induces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ExpectileSpec {
    alpha: f64,
    lower_ratio: f64,
    upper_ratio: f64,
}

impl ExpectileSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 0.5) {
            return invalid(format!("alpha must lie in (0, 0.5], got {alpha}"));
        }
        Ok(Self {
            alpha,
            lower_ratio: (alpha / (1.0 - alpha)).sqrt(),
            upper_ratio: ((1.0 - alpha) / alpha).sqrt(),
        })
    }

    /// The risk-neutral level α = 1/2.
    pub fn neutral() -> Self {
        Self::new(0.5).expect("0.5 is a valid level")
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `√(α/(1-α))`, at most 1.
    pub fn lower_ratio(&self) -> f64 {
        self.lower_ratio
    }

    /// `√((1-α)/α)`, at least 1.
    pub fn upper_ratio(&self) -> f64 {
        self.upper_ratio
    }

    /// Feasible range of the free scale η, `[lower_ratio, upper_ratio]`.
    ///
    /// Outside this range no probability vector satisfies both the ratio
    /// bounds and normalization.
    pub fn eta_range(&self) -> (f64, f64) {
        (self.lower_ratio, self.upper_ratio)
    }

    pub fn is_neutral(&self) -> bool {
        self.lower_ratio == self.upper_ratio
    }
}

impl TryFrom<f64> for ExpectileSpec {
    type Error = Error;

    fn try_from(alpha: f64) -> Result<Self> {
        Self::new(alpha)
    }
}

impl From<ExpectileSpec> for f64 {
    fn from(spec: ExpectileSpec) -> f64 {
        spec.alpha
    }
}

/// Finite discrete distribution over real outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if values.len() != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} values but {} probabilities",
                values.len(),
                probs.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDistribution(format!(
                "value {i} is not finite"
            )));
        }
        if let Some(i) = probs.iter().position(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidDistribution(format!(
                "probability {i} is negative or not finite"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self { values, probs })
    }

    /// Point mass at `value`.
    pub fn degenerate(value: f64) -> Result<Self> {
        Self::new(vec![value], vec![1.0])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.probs)
            .map(|(v, p)| v * p)
            .sum()
    }

    /// Copy without zero-probability atoms.
    pub fn support(&self) -> Self {
        let (values, probs) = self
            .values
            .iter()
            .zip(&self.probs)
            .filter(|(_, &p)| p > 0.0)
            .map(|(&v, &p)| (v, p))
            .unzip();
        Self { values, probs }
    }

    /// Same probabilities with each value mapped through `f`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.values.iter().map(|&v| f(v)).collect(), self.probs.clone())
    }
}

fn check_open_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        invalid(format!("alpha must lie in (0, 1), got {alpha}"))
    }
}

/// Asymmetric squared loss `α·u₊² + (1-α)·u₋²`.
pub fn expectile_loss(u: f64, alpha: f64) -> Result<f64> {
    check_open_alpha(alpha)?;
    Ok(if u >= 0.0 {
        alpha * u * u
    } else {
        (1.0 - alpha) * u * u
    })
}

/// Derivative of [`expectile_loss`] in `u`; the subgradient 0 is used at the kink.
pub fn expectile_loss_grad(u: f64, alpha: f64) -> Result<f64> {
    check_open_alpha(alpha)?;
    Ok(if u > 0.0 {
        2.0 * alpha * u
    } else if u < 0.0 {
        2.0 * (1.0 - alpha) * u
    } else {
        0.0
    })
}

/// First-order-condition residual `α·E[(X-m)₊] - (1-α)·E[(m-X)₊]`.
///
/// Continuous and strictly decreasing in `m`.
pub fn foc_residual(values: &[f64], probs: &[f64], alpha: f64, m: f64) -> f64 {
    let mut above = 0.0;
    let mut below = 0.0;
    for (&x, &p) in values.iter().zip(probs) {
        if x > m {
            above += p * (x - m);
        } else {
            below += p * (m - x);
        }
    }
    alpha * above - (1.0 - alpha) * below
}

/// Expectile of a discrete distribution by bisection on the first-order condition.
pub fn expectile_discrete(dist: &DiscreteDistribution, alpha: f64, tol: f64) -> Result<f64> {
    check_open_alpha(alpha)?;
    if !(tol > 0.0) {
        return invalid(format!("tol must be positive, got {tol}"));
    }
    Ok(expectile_unchecked(dist.values(), dist.probs(), alpha, tol))
}

/// Bisection core shared with the Bellman operators, which pass kernel rows
/// directly without building a [`DiscreteDistribution`].
pub(crate) fn expectile_unchecked(values: &[f64], probs: &[f64], alpha: f64, tol: f64) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (&x, &p) in values.iter().zip(probs) {
        if p > 0.0 {
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    if lo == hi {
        return lo;
    }
    let mut best = lo;
    let mut best_res = f64::INFINITY;
    loop {
        let mid = 0.5 * (lo + hi);
        let res = foc_residual(values, probs, alpha, mid);
        if res.abs() < best_res {
            best = mid;
            best_res = res.abs();
        }
        if res.abs() < tol || mid <= lo || mid >= hi {
            return best;
        }
        if res > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Atoms of a distribution sorted ascending by value, ties broken by index.
#[derive(Debug, Clone)]
pub struct SortedAtoms {
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl SortedAtoms {
    pub fn new(values: &[f64], probs: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
        Self {
            values: order.iter().map(|&i| values[i]).collect(),
            probs: order.iter().map(|&i| probs[i]).collect(),
        }
    }

    /// Solves `min Σ Qᵢxᵢ` subject to `η·lo·Pᵢ ≤ Qᵢ ≤ η·hi·Pᵢ`, `Σ Qᵢ = 1`.
    ///
    /// Fractional knapsack: every atom starts at its lower bound and the
    /// remaining mass is poured into the smallest values first, up to each
    /// upper bound. At most one atom ends strictly between its bounds.
    pub fn ratio_constrained_min(&self, spec: &ExpectileSpec, eta: f64) -> Result<f64> {
        let (low, high) = spec.eta_range();
        let slack = 1e-12 * high;
        if !(eta >= low - slack && eta <= high + slack) {
            return Err(Error::InfeasibleEta { eta, low, high });
        }
        Ok(self.knapsack(spec, eta))
    }

    fn knapsack(&self, spec: &ExpectileSpec, eta: f64) -> f64 {
        let floor = eta * spec.lower_ratio();
        let room = eta * (spec.upper_ratio() - spec.lower_ratio());
        let mut remaining = 1.0 - floor * self.probs.iter().sum::<f64>();
        let mut total = 0.0;
        for (&x, &p) in self.values.iter().zip(&self.probs) {
            let extra = (room * p).min(remaining.max(0.0));
            remaining -= extra;
            total += (floor * p + extra) * x;
        }
        total
    }
}

/// Variational expectile: minimum of `E_Q[X]` over the likelihood-ratio set.
///
/// The outer minimization over η scans `eta_grid` equally spaced points of the
/// feasible range and refines the best cell by golden-section search, then
/// checks the profile's kink points inside that cell. Every
/// atom must carry positive probability; use [`DiscreteDistribution::support`]
/// first when that is not guaranteed.
pub fn expectile_variational(
    dist: &DiscreteDistribution,
    spec: &ExpectileSpec,
    eta_grid: usize,
) -> Result<f64> {
    if eta_grid < 16 {
        return invalid(format!("eta_grid must be at least 16, got {eta_grid}"));
    }
    if let Some(i) = dist.probs().iter().position(|&p| p <= 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "atom {i} has zero probability"
        )));
    }
    if spec.is_neutral() {
        return Ok(dist.mean());
    }
    let atoms = SortedAtoms::new(dist.values(), dist.probs());
    Ok(minimize_over_eta(&atoms, spec, eta_grid))
}

pub(crate) fn minimize_over_eta(atoms: &SortedAtoms, spec: &ExpectileSpec, eta_grid: usize) -> f64 {
    let (low, high) = spec.eta_range();
    let step = (high - low) / (eta_grid - 1) as f64;
    let eta_at = |k: usize| {
        if k + 1 == eta_grid {
            high
        } else {
            low + step * k as f64
        }
    };
    let g = |eta: f64| atoms.knapsack(spec, eta);

    let (best_k, best_val) = (0..eta_grid)
        .map(|k| (k, g(eta_at(k))))
        .fold((0, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });

    // The profile in η is convex, so the minimizer lies in a neighbouring cell.
    let cell_lo = eta_at(best_k.saturating_sub(1));
    let cell_hi = eta_at((best_k + 1).min(eta_grid - 1));
    let mut a = cell_lo;
    let mut b = cell_hi;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut gc = g(c);
    let mut gd = g(d);
    let mut best = best_val.min(gc).min(gd);
    for _ in 0..GOLDEN_ITERS {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
            best = best.min(gc);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
            best = best.min(gd);
        }
    }
    // The profile is piecewise linear with kinks where the knapsack pivot
    // moves to the next atom, at η = 1 / (lo + (hi - lo)·C_k) with C_k the
    // mass of the k smallest atoms. Its minimum sits on one of them.
    let (lo, hi) = (spec.lower_ratio(), spec.upper_ratio());
    let mut cumulative = 0.0;
    for k in 0..=atoms.probs.len() {
        if k > 0 {
            cumulative += atoms.probs[k - 1];
        }
        let eta = (1.0 / (lo + (hi - lo) * cumulative)).clamp(low, high);
        if eta >= cell_lo && eta <= cell_hi {
            best = best.min(g(eta));
        }
    }
    best
}
