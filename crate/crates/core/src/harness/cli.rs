//! Command-line front end: `solve`, `train`, `eval`, `report` and
//! `oracle-check`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use super::config::{output_root, Algorithm, RunConfig};
use super::eval::{evaluate_checkpoint, evaluate_random, write_eval};
use super::families::{family_ids, resolve_family};
use super::oracle::{oracle_check, OracleOptions};
use super::report::{build_report, default_report_dir};
use super::solve::{check_gap, solve, summary, write_solve, ModelSource, SolveOperator, SolveOptions};
use super::train::{train, Checkpoint};
use crate::envs::{EnvFamily, OmegaGrid};
use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "expectrl", version, about = "Expectile bootstrapping for pessimistic and robust RL")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a tabular MDP with classical, expectile or robust value iteration.
    Solve(SolveArgs),
    /// Train an agent over several seeds and evaluate each on the ω-grid.
    Train(TrainArgs),
    /// Evaluate a checkpoint (or the random policy) on an ω-grid.
    Eval(EvalArgs),
    /// Summarize run directories into tables and charts.
    Report(ReportArgs),
    /// Run the expectile, equivalence and contraction oracles.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Nominal kernel of a tabular family.
    #[arg(long, conflicts_with_all = ["mdp", "garnet"])]
    pub family: Option<String>,
    /// MDP JSON document.
    #[arg(long, conflicts_with = "garnet")]
    pub mdp: Option<PathBuf>,
    /// Random Garnet MDP with this seed.
    #[arg(long)]
    pub garnet: Option<u64>,
    #[arg(long, default_value_t = 10)]
    pub states: usize,
    #[arg(long, default_value_t = 4)]
    pub actions: usize,
    #[arg(long, default_value_t = 3)]
    pub branching: usize,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = SolveOperator::Expectile)]
    pub operator: SolveOperator,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    /// Also solve the robust problem and compare the fixed points.
    #[arg(long)]
    pub check_theorem2: bool,
    #[arg(long, default_value_t = 1e-5)]
    pub gap_tol: f64,
    /// Directory for value.json and summary.txt.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Run config JSON; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Field override `path=value`, e.g. `tabular.episodes=500`. Repeatable.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long, value_enum)]
    pub algorithm: Option<Algorithm>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Comma-separated α arms for `auto`.
    #[arg(long, value_delimiter = ',')]
    pub arms: Option<Vec<f64>>,
    /// Number of seeds.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// First seed; seed k is `seed + k`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_eval: Option<usize>,
    #[arg(long)]
    pub run_id: Option<String>,
    /// Output root (default: config `outdir`, then $EXPECTRL_OUT, then `runs`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, required_unless_present = "random", conflicts_with = "random")]
    pub checkpoint: Option<PathBuf>,
    /// Evaluate the uniformly random policy instead of a checkpoint.
    #[arg(long)]
    pub random: bool,
    /// Defaults to the checkpoint's family.
    #[arg(long)]
    pub family: Option<String>,
    /// Points per Ω dimension of the uniform grid.
    #[arg(long, default_value_t = 10)]
    pub grid: usize,
    /// Evaluate at the single point ω (comma-separated) instead of a grid.
    #[arg(long, value_delimiter = ',', conflicts_with = "grid")]
    pub omega: Option<Vec<f64>>,
    #[arg(long, default_value_t = 30)]
    pub n_eval: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for eval.json and eval.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Run directories to compare.
    #[arg(required = true)]
    pub runs: Vec<PathBuf>,
    /// Output directory (default: `report/` next to the first run).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 1000)]
    pub distributions: usize,
    #[arg(long, default_value_t = 50)]
    pub mdps: usize,
    #[arg(long, default_value_t = 200)]
    pub probe_pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-5)]
    pub gap_tol: f64,
}

/// Parses `args` (program name first), runs the command and maps the
/// outcome to an exit code.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

/// Runs a parsed command. `Ok(false)` means it completed but a check failed.
pub fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Solve(a) => run_solve(a),
        Command::Train(a) => run_train(a),
        Command::Eval(a) => run_eval(a),
        Command::Report(a) => run_report(a),
        Command::OracleCheck(a) => run_oracle(a),
    }
}

fn run_solve(a: SolveArgs) -> Result<bool> {
    let source = match (a.family, a.mdp, a.garnet) {
        (Some(f), _, _) => ModelSource::Family(f),
        (_, Some(p), _) => ModelSource::File(p),
        (_, _, Some(seed)) => ModelSource::Garnet {
            seed,
            n_states: a.states,
            n_actions: a.actions,
            branching: a.branching,
        },
        _ => return Err(Error::InvalidArgument("give one of --family, --mdp or --garnet".into())),
    };
    let outcome = solve(&SolveOptions {
        source,
        alpha: a.alpha,
        operator: a.operator,
        tol: a.tol,
        max_iter: a.max_iter,
        check_theorem2: a.check_theorem2,
    })?;
    print!("{}", summary(&outcome));
    if let Some(dir) = &a.out {
        write_solve(&outcome, dir)?;
    }
    match check_gap(&outcome, a.gap_tol) {
        Ok(()) => Ok(true),
        Err(e) => {
            eprintln!("{e}");
            Ok(false)
        }
    }
}

/// Merges the config document, `--set` overrides and flags, in that order.
pub fn train_config(a: &TrainArgs) -> Result<RunConfig> {
    let base = match &a.config {
        Some(path) => RunConfig::load(path)?,
        None => {
            let family = a
                .family
                .clone()
                .ok_or_else(|| Error::InvalidArgument("give --config or --family".into()))?;
            let algorithm = a
                .algorithm
                .ok_or_else(|| Error::InvalidArgument("give --config or --algorithm".into()))?;
            RunConfig::new(family, algorithm)
        }
    };
    let mut cfg = base.with_overrides(&a.set)?;
    if let Some(f) = &a.family {
        cfg.family = f.clone();
    }
    if let Some(alg) = a.algorithm {
        cfg.algorithm = alg;
    }
    if let Some(x) = a.alpha {
        cfg.alpha = x;
    }
    if let Some(arms) = &a.arms {
        cfg.arms = arms.clone();
    }
    if let Some(n) = a.seeds {
        cfg.n_seeds = n;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(n) = a.n_eval {
        cfg.n_eval = n;
    }
    if let Some(id) = &a.run_id {
        cfg.run_id = Some(id.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_train(a: TrainArgs) -> Result<bool> {
    let cfg = train_config(&a)?;
    let root = output_root(a.out.as_deref().or(cfg.outdir.as_deref()));
    let (dir, record) = train(&cfg, &root, a.jobs)?;
    println!("run directory: {}", dir.display());
    for s in &record.seeds {
        match (&s.error, s.worst, s.average) {
            (None, Some(w), Some(m)) => println!("seed {} ({}): R_worst {w:.4}  R_average {m:.4}", s.index, s.seed),
            (err, _, _) => println!("seed {} ({}): FAILED {}", s.index, s.seed, err.as_deref().unwrap_or("")),
        }
    }
    Ok(record.failed() == 0)
}

fn run_eval(a: EvalArgs) -> Result<bool> {
    let checkpoint = a.checkpoint.as_ref().map(Checkpoint::load).transpose()?;
    let family_id = match (&a.family, &checkpoint) {
        (Some(f), _) => f.clone(),
        (None, Some(c)) => c.family.clone(),
        (None, None) => {
            return Err(Error::InvalidArgument(format!(
                "--random needs --family (one of {})",
                family_ids().join(", ")
            )))
        }
    };
    let family = resolve_family(&family_id)?;
    let grid = eval_grid(family.as_ref(), a.grid, a.omega.clone())?;
    let report = match &checkpoint {
        Some(c) => evaluate_checkpoint(c, family.as_ref(), &grid, a.n_eval, a.seed)?,
        None => evaluate_random(family.as_ref(), &grid, a.n_eval, a.seed)?,
    };
    println!("R_worst {}", report.worst);
    println!("R_average {}", report.average);
    if let Some(dir) = &a.out {
        write_eval(&report, dir)?;
    }
    Ok(true)
}

fn eval_grid(family: &dyn EnvFamily, per_dim: usize, omega: Option<Vec<f64>>) -> Result<OmegaGrid> {
    match omega {
        Some(p) => OmegaGrid::from_points(family.omega_box(), vec![p]),
        None => OmegaGrid::uniform(family.omega_box(), per_dim),
    }
}

fn run_report(a: ReportArgs) -> Result<bool> {
    let report = build_report(&a.runs)?;
    let out = a.out.clone().unwrap_or_else(|| default_report_dir(&a.runs));
    let files = report.write(&out)?;
    println!("family,algorithm,run_id,n_seeds,R_worst,R_average");
    for r in &report.rows {
        println!(
            "{},{},{},{},{:.4} ± {:.4},{:.4} ± {:.4}",
            r.family, r.algorithm, r.run_id, r.n_seeds, r.worst_mean, r.worst_stderr, r.average_mean, r.average_stderr
        );
    }
    println!("wrote {} files to {}", files.len(), out.display());
    Ok(true)
}

fn run_oracle(a: OracleArgs) -> Result<bool> {
    let report = oracle_check(&OracleOptions {
        distributions: a.distributions,
        mdps: a.mdps,
        probe_pairs: a.probe_pairs,
        seed: a.seed,
        gap_tol: a.gap_tol,
    })?;
    println!("expectile bisection vs variational: max gap {:e}", report.expectile_gap);
    println!("expectile vs robust fixed points: max gap {:e}", report.equivalence_gap);
    println!("contraction ratio minus gamma: max {:e}", report.contraction_excess);
    println!("{}", if report.passed { "PASS" } else { "FAIL" });
    Ok(report.passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("expectrl").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_config_fields() {
        let Command::Train(a) = parse(&[
            "train", "--family", "cliff_grid", "--algorithm", "auto", "--arms", "0.1,0.5", "--seeds", "3",
            "--set", "tabular.episodes=50", "--set", "n_eval=4", "--n-eval", "7",
        ])
        .command
        else {
            panic!("expected train");
        };
        let cfg = train_config(&a).unwrap();
        assert_eq!(cfg.arms, vec![0.1, 0.5]);
        assert_eq!(cfg.n_seeds, 3);
        assert_eq!(cfg.tabular.episodes, 50);
        assert_eq!(cfg.n_eval, 7);
        assert_eq!(cfg.algorithm, Algorithm::Auto);
    }

    #[test]
    fn every_subcommand_parses() {
        parse(&["solve", "--garnet", "3", "--check-theorem2", "--alpha", "0.2"]);
        parse(&["eval", "--random", "--family", "zero_reward", "--omega", "0"]);
        parse(&["report", "a", "b"]);
        parse(&["oracle-check", "--mdps", "2"]);
        assert!(Cli::try_parse_from(["expectrl", "eval"]).is_err());
        assert!(Cli::try_parse_from(["expectrl", "bogus"]).is_err());
    }

    #[test]
    fn missing_family_is_an_error() {
        let Command::Train(a) = parse(&["train", "--algorithm", "vi"]).command else {
            panic!("expected train");
        };
        assert!(train_config(&a).is_err());
    }
}
