use std::fs;
use std::path::Path;

use super::train::{Checkpoint, EVAL_CSV_FILE, EVAL_FILE};
use crate::agents::RandomBehavior;
use crate::envs::{evaluate, EnvFamily, EvalReport, OmegaGrid};
use crate::error::Result;

/// Scores a checkpoint's deployed policy on `grid`.
pub fn evaluate_checkpoint(
    checkpoint: &Checkpoint,
    family: &dyn EnvFamily,
    grid: &OmegaGrid,
    n_eval: usize,
    seed: u64,
) -> Result<EvalReport> {
    let behavior = checkpoint.behavior()?;
    evaluate(behavior.as_ref(), family, grid, n_eval, seed)
}

/// Scores the uniformly random policy on `grid`.
pub fn evaluate_random(family: &dyn EnvFamily, grid: &OmegaGrid, n_eval: usize, seed: u64) -> Result<EvalReport> {
    let space = family.make(family.nominal_omega())?.action_space();
    evaluate(&RandomBehavior { space }, family, grid, n_eval, seed)
}

/// Writes `eval.json` and `eval.csv` into `dir`.
pub fn write_eval(report: &EvalReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(EVAL_FILE), serde_json::to_string_pretty(report)? + "\n")?;
    fs::write(dir.join(EVAL_CSV_FILE), report.to_csv_string()?)?;
    Ok(())
}

pub fn read_eval(path: &Path) -> Result<EvalReport> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::families::resolve_family;

    #[test]
    fn random_policy_on_zero_reward_scores_zero() {
        let fam = resolve_family("zero_reward").unwrap();
        let grid = OmegaGrid::uniform(fam.omega_box(), 10).unwrap();
        let rep = evaluate_random(fam.as_ref(), &grid, 5, 1).unwrap();
        assert_eq!(rep.worst, 0.0);
        assert_eq!(rep.average, 0.0);
    }

    #[test]
    fn single_point_grid_has_equal_metrics() {
        let fam = resolve_family("slip_grid").unwrap();
        let grid = OmegaGrid::single(vec![0.2]);
        let rep = evaluate_random(fam.as_ref(), &grid, 4, 2).unwrap();
        assert_eq!(rep.worst, rep.average);
        let dir = tempfile::tempdir().unwrap();
        write_eval(&rep, dir.path()).unwrap();
        assert_eq!(read_eval(&dir.path().join(EVAL_FILE)).unwrap(), rep);
    }
}
