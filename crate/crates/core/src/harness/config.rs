use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::agents::{QLearningConfig, Td3LiteConfig, DEFAULT_ARMS};
use crate::envs::EnvFamily;
use crate::error::{Error, Result};

pub const CONFIG_VERSION: u32 = 1;
/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "EXPECTRL_OUT";
pub const DEFAULT_OUT: &str = "runs";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Algorithm {
    /// Expectile value iteration on the nominal model.
    Vi,
    /// Robust value iteration on the nominal model.
    RobustVi,
    /// Tabular expectile Q-learning.
    QExpectile,
    /// Single-critic actor-critic with the expectile loss.
    Td3lite,
    /// Domain randomization with the family's matching learner.
    Dr,
    /// Bandit-tuned expectile level with the family's matching learner.
    Auto,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Vi => "vi",
            Algorithm::RobustVi => "robust_vi",
            Algorithm::QExpectile => "q_expectile",
            Algorithm::Td3lite => "td3lite",
            Algorithm::Dr => "dr",
            Algorithm::Auto => "auto",
        }
    }

    pub fn uses_arms(self) -> bool {
        self == Algorithm::Auto
    }
}

/// Evaluation grid: `per_dim` equally spaced points per Ω dimension, or an
/// explicit list of points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub per_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            per_dim: 10,
            points: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 100_000,
        }
    }
}

/// One training run over several seeds.
///
/// `alpha`, `arms` and `seed` are authoritative: the learner sections'
/// fields of the same name are overwritten before training, seed `k` trains
/// with `seed + k`, and the domain-randomization switch follows `algorithm`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default)]
    pub run_id: Option<String>,
    pub family: String,
    pub algorithm: Algorithm,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_arms")]
    pub arms: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_seeds")]
    pub n_seeds: usize,
    #[serde(default = "default_n_eval")]
    pub n_eval: usize,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub tabular: QLearningConfig,
    #[serde(default)]
    pub actor_critic: Td3LiteConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub outdir: Option<PathBuf>,
}

fn default_alpha() -> f64 {
    0.5
}

fn default_arms() -> Vec<f64> {
    DEFAULT_ARMS.to_vec()
}

fn default_seeds() -> usize {
    10
}

fn default_n_eval() -> usize {
    30
}

impl RunConfig {
    pub fn new(family: impl Into<String>, algorithm: Algorithm) -> Self {
        Self {
            version: CONFIG_VERSION,
            run_id: None,
            family: family.into(),
            algorithm,
            alpha: default_alpha(),
            arms: default_arms(),
            seed: 0,
            n_seeds: default_seeds(),
            n_eval: default_n_eval(),
            grid: GridSpec::default(),
            tabular: QLearningConfig::default(),
            actor_critic: Td3LiteConfig::default(),
            solver: SolverConfig::default(),
            outdir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_value(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let config: RunConfig = serde_json::from_value(value)?;
        config.validate()?;
        Ok(config)
    }

    /// Applies `path=value` overrides, where `path` is a dotted field path and
    /// `value` is JSON (bare words are taken as strings). The result is
    /// validated again.
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self> {
        let mut doc = serde_json::to_value(self)?;
        for item in overrides {
            let (path, raw) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{item}` is not of the form path=value")))?;
            let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
            set_path(&mut doc, path, value)?;
        }
        Self::from_value(doc)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Version {
                expected: CONFIG_VERSION,
                found: self.version,
            });
        }
        if self.n_seeds == 0 || self.n_eval == 0 {
            return Err(Error::Config("n_seeds and n_eval must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        if self.algorithm.uses_arms() && self.arms.is_empty() {
            return Err(Error::Config("auto needs at least one arm".into()));
        }
        if self.grid.points.is_none() && self.grid.per_dim < 2 {
            return Err(Error::Config("grid.per_dim must be at least 2".into()));
        }
        if let Some(id) = &self.run_id {
            if id.is_empty() || id.contains(['/', '\\']) || id == "." || id == ".." {
                return Err(Error::Config(format!("run_id `{id}` is not a plain directory name")));
            }
        }
        self.tabular_config(0).validate()?;
        self.actor_critic_config(0).validate()?;
        if !(self.solver.tol > 0.0) || self.solver.max_iter == 0 {
            return Err(Error::Config("solver tol and max_iter must be positive".into()));
        }
        Ok(())
    }

    /// The config with the learner sections aligned to the top-level fields,
    /// as written to the run directory.
    pub fn effective(&self) -> Self {
        let mut out = self.clone();
        out.tabular = self.tabular_config(0);
        out.actor_critic = self.actor_critic_config(0);
        out.run_id = Some(self.run_id());
        out
    }

    pub fn run_id(&self) -> String {
        self.run_id.clone().unwrap_or_else(|| {
            if self.algorithm.uses_arms() {
                format!("{}-{}", self.family, self.algorithm.name())
            } else {
                format!("{}-{}-a{}", self.family, self.algorithm.name(), self.alpha)
            }
        })
    }

    pub fn seed_for(&self, k: usize) -> u64 {
        self.seed.wrapping_add(k as u64)
    }

    pub fn tabular_config(&self, k: usize) -> QLearningConfig {
        QLearningConfig {
            alpha: self.alpha,
            arms: self.arms.clone(),
            seed: self.seed_for(k),
            domain_randomization: self.algorithm == Algorithm::Dr,
            ..self.tabular.clone()
        }
    }

    pub fn actor_critic_config(&self, k: usize) -> Td3LiteConfig {
        Td3LiteConfig {
            alpha: self.alpha,
            arms: self.arms.clone(),
            seed: self.seed_for(k),
            domain_randomization: self.algorithm == Algorithm::Dr,
            ..self.actor_critic.clone()
        }
    }

    pub fn grid_for(&self, family: &dyn EnvFamily) -> Result<crate::envs::OmegaGrid> {
        match &self.grid.points {
            Some(points) => crate::envs::OmegaGrid::from_points(family.omega_box(), points.clone()),
            None => crate::envs::OmegaGrid::uniform(family.omega_box(), self.grid.per_dim),
        }
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn set_path(doc: &mut Value, path: &str, value: Value) -> Result<()> {
    let mut cur = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("`{path}` does not name a field")))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        cur = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Err(Error::Config("empty override path".into()))
}

/// Output root: the explicit directory, else `$EXPECTRL_OUT`, else `runs`.
pub fn output_root(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_gets_defaults() {
        let cfg = RunConfig::from_json(r#"{"version":1,"family":"slip_grid","algorithm":"q_expectile"}"#).unwrap();
        assert_eq!(cfg.n_seeds, 10);
        assert_eq!(cfg.n_eval, 30);
        assert_eq!(cfg.grid.per_dim, 10);
        assert_eq!(cfg.run_id(), "slip_grid-q_expectile-a0.5");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_json(r#"{"version":1,"family":"x","algorithm":"vi","bogus":1}"#);
        assert!(err.is_err());
        let nested = RunConfig::from_json(
            r#"{"version":1,"family":"x","algorithm":"vi","tabular":{"episodez":3}}"#,
        );
        assert!(nested.is_err());
        let version = RunConfig::from_json(r#"{"version":2,"family":"x","algorithm":"vi"}"#);
        assert!(matches!(version, Err(Error::Version { .. })));
    }

    #[test]
    fn overrides_apply_and_revalidate() {
        let cfg = RunConfig::new("cliff_grid", Algorithm::QExpectile);
        let over = cfg
            .with_overrides(&["alpha=0.2".into(), "tabular.episodes=7".into(), "family=slip_grid".into()])
            .unwrap();
        assert_eq!(over.alpha, 0.2);
        assert_eq!(over.tabular.episodes, 7);
        assert_eq!(over.family, "slip_grid");
        assert!(cfg.with_overrides(&["alpha=2".into()]).is_err());
        assert!(cfg.with_overrides(&["nope=1".into()]).is_err());
        assert!(cfg.with_overrides(&["alpha".into()]).is_err());
    }

    #[test]
    fn effective_config_aligns_sections() {
        let mut cfg = RunConfig::new("slip_grid", Algorithm::Dr);
        cfg.alpha = 0.3;
        cfg.seed = 40;
        let eff = cfg.effective();
        assert_eq!(eff.tabular.alpha, 0.3);
        assert!(eff.tabular.domain_randomization);
        assert_eq!(eff.actor_critic.seed, 40);
        assert_eq!(cfg.tabular_config(3).seed, 43);
        let round = RunConfig::from_json(&eff.to_json_pretty().unwrap()).unwrap();
        assert_eq!(round, eff);
    }
}
