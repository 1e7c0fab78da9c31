//! Experiment plumbing: run configs, multi-seed training with evaluation,
//! checkpoints, solver and oracle entry points, reports and the CLI.

pub mod cli;
pub mod config;
pub mod eval;
pub mod families;
pub mod oracle;
pub mod report;
pub mod solve;
mod svg;
pub mod train;

pub use config::{output_root, Algorithm, GridSpec, RunConfig, SolverConfig, CONFIG_VERSION, OUT_ENV};
pub use eval::{evaluate_checkpoint, evaluate_random, read_eval, write_eval};
pub use families::{family_ids, resolve_family, SEPARATION_BEST_ARM, SEPARATION_NOISE};
pub use oracle::{oracle_check, OracleOptions, OracleReport};
pub use report::{build_report, default_report_dir, mean_and_stderr, read_log, Report, ReportRow, RunData};
pub use solve::{equivalence_check, solve, EquivalenceCheck, ModelSource, SolveOperator, SolveOptions, SolveOutcome};
pub use train::{seed_dir, train, train_seed, with_jobs, Checkpoint, PolicyParams, RunRecord, SeedOutcome, SeedSummary};
