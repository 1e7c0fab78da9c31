use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::families::resolve_family;
use crate::bellman::{robust_value_iteration, value_iteration, FixedPointResult, OperatorKind};
use crate::envs::tabular_mdp;
use crate::error::{Error, Result};
use crate::expectile::ExpectileSpec;
use crate::mdp::{garnet, Policy, TabularMdp};

/// Where the model comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSource {
    /// Nominal kernel of a tabular family.
    Family(String),
    /// MDP JSON document.
    File(PathBuf),
    Garnet {
        seed: u64,
        n_states: usize,
        n_actions: usize,
        branching: usize,
    },
}

impl ModelSource {
    pub fn load(&self) -> Result<TabularMdp> {
        match self {
            ModelSource::Family(id) => {
                let fam = resolve_family(id)?;
                tabular_mdp(fam.as_ref(), fam.nominal_omega())
            }
            ModelSource::File(path) => TabularMdp::load(path),
            ModelSource::Garnet {
                seed,
                n_states,
                n_actions,
                branching,
            } => garnet(*n_states, *n_actions, *branching, 0.0, *seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SolveOperator {
    Classical,
    Expectile,
    Robust,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub source: ModelSource,
    pub alpha: f64,
    pub operator: SolveOperator,
    pub tol: f64,
    pub max_iter: usize,
    pub check_theorem2: bool,
}

/// Expectile and robust fixed points of the same model, for the optimal
/// and the uniform-policy evaluation variants.
#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceCheck {
    pub alpha: f64,
    pub optimal_gap: f64,
    pub evaluation_gap: f64,
    pub expectile_optimal: FixedPointResult,
    pub robust_optimal: FixedPointResult,
}

impl EquivalenceCheck {
    pub fn gap(&self) -> f64 {
        self.optimal_gap.max(self.evaluation_gap)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveOutcome {
    pub result: FixedPointResult,
    pub check: Option<EquivalenceCheck>,
}

pub fn solve(options: &SolveOptions) -> Result<SolveOutcome> {
    let mdp = options.source.load()?;
    let kind = match options.operator {
        SolveOperator::Classical => OperatorKind::ClassicalOptimal,
        SolveOperator::Expectile => OperatorKind::ExpectileOptimal(ExpectileSpec::new(options.alpha)?),
        SolveOperator::Robust => OperatorKind::RobustOptimal(ExpectileSpec::new(options.alpha)?),
    };
    let result = value_iteration(&mdp, kind, None, options.tol, options.max_iter)?;
    let check = if options.check_theorem2 {
        Some(equivalence_check(&mdp, options.alpha, options.tol, options.max_iter)?)
    } else {
        None
    };
    Ok(SolveOutcome { result, check })
}

/// Solves the expectile and robust problems side by side.
pub fn equivalence_check(mdp: &TabularMdp, alpha: f64, tol: f64, max_iter: usize) -> Result<EquivalenceCheck> {
    let spec = ExpectileSpec::new(alpha)?;
    let expectile_optimal = value_iteration(mdp, OperatorKind::ExpectileOptimal(spec), None, tol, max_iter)?;
    let robust_optimal = robust_value_iteration(mdp, spec, tol, max_iter, None)?;
    let uniform = Policy::uniform(mdp.n_states(), mdp.n_actions());
    let e_eval = value_iteration(mdp, OperatorKind::ExpectilePolicy(spec), Some(&uniform), tol, max_iter)?;
    let r_eval = robust_value_iteration(mdp, spec, tol, max_iter, Some(&uniform))?;
    Ok(EquivalenceCheck {
        alpha,
        optimal_gap: expectile_optimal.value.sup_distance(&robust_optimal.value),
        evaluation_gap: e_eval.value.sup_distance(&r_eval.value),
        expectile_optimal,
        robust_optimal,
    })
}

pub fn summary(outcome: &SolveOutcome) -> String {
    let mut s = String::new();
    let r = &outcome.result;
    let _ = writeln!(s, "iterations: {}", r.iterations);
    let _ = writeln!(s, "final residual: {:e}", r.final_residual);
    let _ = writeln!(s, "value: {:?}", r.value.as_slice());
    if let Policy::Deterministic(actions) = &r.policy {
        let _ = writeln!(s, "greedy policy: {actions:?}");
    }
    if let Some(c) = &outcome.check {
        let _ = writeln!(s, "expectile vs robust (alpha {}):", c.alpha);
        let _ = writeln!(s, "  optimal fixed points gap: {:e}", c.optimal_gap);
        let _ = writeln!(s, "  uniform-policy evaluation gap: {:e}", c.evaluation_gap);
        let _ = writeln!(s, "  expectile optimal value: {:?}", c.expectile_optimal.value.as_slice());
        let _ = writeln!(s, "  robust optimal value: {:?}", c.robust_optimal.value.as_slice());
    }
    s
}

/// Writes `value.json`, `summary.txt` and, with the cross-check,
/// `equivalence.json`.
pub fn write_solve(outcome: &SolveOutcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("value.json"), serde_json::to_string_pretty(&outcome.result)? + "\n")?;
    fs::write(dir.join("summary.txt"), summary(outcome))?;
    if let Some(c) = &outcome.check {
        fs::write(dir.join("equivalence.json"), serde_json::to_string_pretty(c)? + "\n")?;
    }
    Ok(())
}

pub fn check_gap(outcome: &SolveOutcome, gap_tol: f64) -> Result<()> {
    if let Some(c) = &outcome.check {
        if !(c.gap() < gap_tol) {
            return Err(Error::Config(format!(
                "expectile and robust fixed points differ by {:e} (tolerance {gap_tol:e})",
                c.gap()
            )));
        }
    }
    Ok(())
}
