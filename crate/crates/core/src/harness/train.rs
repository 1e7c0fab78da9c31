use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Algorithm, RunConfig};
use super::families::resolve_family;
use crate::agents::{
    auto_train, dr_train, q_learning_auto, q_learning_dr, q_learning_expectile, td3_lite_train,
    ActorCriticRun, ActorPolicy, TabularRun, TrainingLog,
};
use crate::approx::{MultiHeadNet, ParamsDocument};
use crate::bellman::{value_iteration, OperatorKind};
use crate::envs::{evaluate, tabular_mdp, Behavior, EnvFamily, EvalReport};
use crate::error::{Error, Result};
use crate::expectile::ExpectileSpec;
use crate::mdp::{Policy, QFunction};
use crate::rng::{derive_seed, stream};

pub const CHECKPOINT_VERSION: u32 = 1;
pub const RECORD_VERSION: u32 = 1;
pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Learned parameters of a deployable policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicyParams {
    Tabular {
        policy: Policy,
        q: Vec<QFunction>,
    },
    Actor {
        actor: ParamsDocument,
        critic: ParamsDocument,
        low: Vec<f64>,
        high: Vec<f64>,
    },
}

/// Trained agent plus the configuration that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub version: u32,
    pub family: String,
    pub algorithm: Algorithm,
    pub seed: u64,
    /// Head used for deployment; the bandit's best arm for auto runs.
    pub head: usize,
    pub alpha: f64,
    pub params: PolicyParams,
    pub config: RunConfig,
}

impl Checkpoint {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text)?;
        let found = raw.get("version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
        if found != CHECKPOINT_VERSION {
            return Err(Error::Version {
                expected: CHECKPOINT_VERSION,
                found,
            });
        }
        Ok(serde_json::from_value(raw)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn behavior(&self) -> Result<Box<dyn Behavior>> {
        Ok(match &self.params {
            PolicyParams::Tabular { policy, .. } => Box::new(policy.clone()),
            PolicyParams::Actor { actor, low, high, .. } => Box::new(ActorPolicy {
                actor: actor.clone().into_net()?,
                head: self.head,
                low: low.clone(),
                high: high.clone(),
            }),
        })
    }
}

fn params_document(net: &MultiHeadNet) -> ParamsDocument {
    ParamsDocument {
        version: crate::approx::PARAMS_SCHEMA_VERSION,
        net: net.clone(),
    }
}

/// Everything one seed produces, before it is written anywhere.
#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub index: usize,
    pub seed: u64,
    pub log: TrainingLog,
    pub checkpoint: Checkpoint,
    pub eval: EvalReport,
}

/// Trains and evaluates seed `k` of `config` in memory.
pub fn train_seed(config: &RunConfig, family: &dyn EnvFamily, k: usize) -> Result<SeedOutcome> {
    let seed = config.seed_for(k);
    let effective = config.effective();
    let tabular = family.as_tabular().is_some();
    let (log, head, alpha, params) = match config.algorithm {
        Algorithm::Vi | Algorithm::RobustVi => {
            let mdp = tabular_mdp(family, family.nominal_omega())?;
            let spec = ExpectileSpec::new(config.alpha)?;
            let kind = if config.algorithm == Algorithm::Vi {
                OperatorKind::ExpectileOptimal(spec)
            } else {
                OperatorKind::RobustOptimal(spec)
            };
            let fp = value_iteration(&mdp, kind, None, config.solver.tol, config.solver.max_iter)?;
            let policy = fp.policy.clone();
            (TrainingLog::default(), 0, config.alpha, PolicyParams::Tabular { policy, q: Vec::new() })
        }
        Algorithm::QExpectile | Algorithm::Dr | Algorithm::Auto if tabular => {
            let cfg = config.tabular_config(k);
            let run = match config.algorithm {
                Algorithm::QExpectile => q_learning_expectile(family, &cfg)?,
                Algorithm::Dr => q_learning_dr(family, &cfg)?,
                _ => q_learning_auto(family, &cfg)?,
            };
            tabular_parts(run)
        }
        Algorithm::QExpectile => {
            return Err(Error::Unsupported(format!(
                "q_expectile needs a tabular family, `{}` is not",
                family.id()
            )))
        }
        Algorithm::Td3lite | Algorithm::Dr | Algorithm::Auto => {
            let cfg = config.actor_critic_config(k);
            let run = match config.algorithm {
                Algorithm::Td3lite => td3_lite_train(family, &cfg)?,
                Algorithm::Dr => dr_train(family, &cfg)?,
                _ => auto_train(family, &cfg)?,
            };
            actor_parts(run)
        }
    };
    let checkpoint = Checkpoint {
        version: CHECKPOINT_VERSION,
        family: family.id().to_string(),
        algorithm: config.algorithm,
        seed,
        head,
        alpha,
        params,
        config: effective,
    };
    let grid = config.grid_for(family)?;
    let behavior = checkpoint.behavior()?;
    let eval = evaluate(
        behavior.as_ref(),
        family,
        &grid,
        config.n_eval,
        derive_seed(seed, &[stream::EVAL]),
    )?;
    Ok(SeedOutcome {
        index: k,
        seed,
        log,
        checkpoint,
        eval,
    })
}

fn tabular_parts(run: TabularRun) -> (TrainingLog, usize, f64, PolicyParams) {
    let head = run.best_head();
    let params = PolicyParams::Tabular {
        policy: run.greedy_policy(),
        q: run.heads,
    };
    (run.log, head, run.arms[head], params)
}

fn actor_parts(run: ActorCriticRun) -> (TrainingLog, usize, f64, PolicyParams) {
    let head = run.best_head();
    let (low, high) = run.agent.action_bounds();
    let params = PolicyParams::Actor {
        actor: params_document(run.agent.actor()),
        critic: params_document(run.agent.critic()),
        low: low.to_vec(),
        high: high.to_vec(),
    };
    (run.log, head, run.agent.arms()[head], params)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub index: usize,
    pub seed: u64,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worst: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub average: Option<f64>,
}

/// Index of a finished run directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub version: u32,
    pub toolkit_version: String,
    pub run_id: String,
    pub family: String,
    pub algorithm: Algorithm,
    pub seeds: Vec<SeedSummary>,
    /// Informational only; never part of logs or evaluation files.
    pub wall_clock_seconds: f64,
}

impl RunRecord {
    pub fn failed(&self) -> usize {
        self.seeds.iter().filter(|s| !s.ok).count()
    }

    pub fn load(run_dir: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(run_dir.as_ref().join(RECORD_FILE))?)?)
    }
}

pub const CONFIG_FILE: &str = "config.json";
pub const RECORD_FILE: &str = "run.json";
pub const LOG_FILE: &str = "log.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const EVAL_FILE: &str = "eval.json";
pub const EVAL_CSV_FILE: &str = "eval.csv";

pub fn seed_dir(run_dir: &Path, k: usize) -> PathBuf {
    run_dir.join(format!("seed-{k}"))
}

/// Runs every seed of `config` and writes the run directory
/// `<root>/<run-id>/`. `jobs` bounds the worker threads; results do not
/// depend on it. Seeds that fail are recorded in the returned record.
pub fn train(config: &RunConfig, root: &Path, jobs: Option<usize>) -> Result<(PathBuf, RunRecord)> {
    config.validate()?;
    let family = resolve_family(&config.family)?;
    config.grid_for(family.as_ref())?;
    let effective = config.effective();
    let run_dir = root.join(effective.run_id());
    fs::create_dir_all(&run_dir)?;
    fs::write(run_dir.join(CONFIG_FILE), effective.to_json_pretty()? + "\n")?;

    let started = Instant::now();
    let work = || -> Vec<SeedSummary> {
        (0..config.n_seeds)
            .into_par_iter()
            .map(|k| {
                let seed = config.seed_for(k);
                match train_seed(config, family.as_ref(), k).and_then(|o| write_seed(&run_dir, &o).map(|_| o)) {
                    Ok(o) => SeedSummary {
                        index: k,
                        seed,
                        ok: true,
                        error: None,
                        worst: Some(o.eval.worst),
                        average: Some(o.eval.average),
                    },
                    Err(e) => SeedSummary {
                        index: k,
                        seed,
                        ok: false,
                        error: Some(e.to_string()),
                        worst: None,
                        average: None,
                    },
                }
            })
            .collect()
    };
    let seeds = with_jobs(jobs, work)?;
    let record = RunRecord {
        version: RECORD_VERSION,
        toolkit_version: TOOLKIT_VERSION.to_string(),
        run_id: effective.run_id(),
        family: config.family.clone(),
        algorithm: config.algorithm,
        seeds,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    fs::write(run_dir.join(RECORD_FILE), serde_json::to_string_pretty(&record)? + "\n")?;
    Ok((run_dir, record))
}

/// Runs `f` on a pool of `jobs` threads, or on the global pool.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn write_seed(run_dir: &Path, o: &SeedOutcome) -> Result<()> {
    let dir = seed_dir(run_dir, o.index);
    fs::create_dir_all(&dir)?;
    fs::write(dir.join(LOG_FILE), o.log.to_csv_string()?)?;
    fs::write(dir.join(CHECKPOINT_FILE), o.checkpoint.to_json()?)?;
    fs::write(dir.join(EVAL_FILE), serde_json::to_string_pretty(&o.eval)? + "\n")?;
    fs::write(dir.join(EVAL_CSV_FILE), o.eval.to_csv_string()?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::EpsilonSchedule;

    fn tiny(family: &str, algorithm: Algorithm) -> RunConfig {
        let mut cfg = RunConfig::new(family, algorithm);
        cfg.n_seeds = 2;
        cfg.n_eval = 2;
        cfg.tabular.episodes = 20;
        cfg.tabular.epsilon = EpsilonSchedule::constant(0.2);
        cfg.actor_critic.total_steps = 60;
        cfg.actor_critic.warmup_steps = 20;
        cfg.actor_critic.batch = 8;
        cfg.actor_critic.hidden = vec![8, 8];
        cfg
    }

    #[test]
    fn structural_outputs_for_two_seeds() {
        let dir = tempfile::tempdir().unwrap();
        let (run_dir, record) = train(&tiny("slip_grid", Algorithm::QExpectile), dir.path(), Some(2)).unwrap();
        assert_eq!(record.failed(), 0);
        for k in 0..2 {
            let sd = seed_dir(&run_dir, k);
            for f in [LOG_FILE, CHECKPOINT_FILE, EVAL_FILE, EVAL_CSV_FILE] {
                assert!(sd.join(f).is_file(), "{f}");
            }
        }
        let snapshot = RunConfig::load(run_dir.join(CONFIG_FILE)).unwrap();
        assert_eq!(snapshot.run_id(), record.run_id);
    }

    #[test]
    fn identical_invocations_write_identical_files() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let cfg = tiny("cliff_grid", Algorithm::Dr);
        let (ra, _) = train(&cfg, a.path(), Some(1)).unwrap();
        let (rb, _) = train(&cfg, b.path(), Some(3)).unwrap();
        for k in 0..2 {
            for f in [LOG_FILE, CHECKPOINT_FILE, EVAL_FILE, EVAL_CSV_FILE] {
                let x = fs::read(seed_dir(&ra, k).join(f)).unwrap();
                let y = fs::read(seed_dir(&rb, k).join(f)).unwrap();
                assert_eq!(x, y, "{f}");
            }
        }
    }

    #[test]
    fn auto_on_pendulum_logs_bandit_probabilities() {
        let cfg = tiny("pendulum_lite", Algorithm::Auto);
        let fam = resolve_family("pendulum_lite").unwrap();
        let out = train_seed(&cfg, fam.as_ref(), 0).unwrap();
        let csv = out.log.to_csv_string().unwrap();
        let header = csv.lines().next().unwrap();
        assert!(header.ends_with("p_0,p_1,p_2,p_3"));
        for r in &out.log.records {
            assert!((r.bandit_probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn checkpoint_round_trip_and_version_check() {
        let fam = resolve_family("slip_grid").unwrap();
        let out = train_seed(&tiny("slip_grid", Algorithm::Vi), fam.as_ref(), 0).unwrap();
        let text = out.checkpoint.to_json().unwrap();
        let back = Checkpoint::from_json(&text).unwrap();
        assert_eq!(back.params, out.checkpoint.params);
        let bumped = text.replacen("\"version\":1", "\"version\":9", 1);
        assert!(matches!(Checkpoint::from_json(&bumped), Err(Error::Version { found: 9, .. })));
    }

    #[test]
    fn mismatched_algorithm_fails_the_seed() {
        let dir = tempfile::tempdir().unwrap();
        let (_, record) = train(&tiny("pendulum_lite", Algorithm::QExpectile), dir.path(), None).unwrap();
        assert_eq!(record.failed(), 2);
    }
}
