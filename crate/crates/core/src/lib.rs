//! Expectile bootstrapping for pessimistic and robust reinforcement learning.
//!
//! The crate is organized bottom-up:
//!
//! * [`expectile`]: the asymmetric squared loss and two independent ways of
//!   computing the expectile of a discrete distribution.
//! * [`mdp`]: tabular MDPs, Garnet instances and parameterized kernel families.
//! * [`bellman`]: classical, expectile and robust Bellman operators and their
//!   fixed points.
//! * [`envs`]: toy environment families with uncertainty boxes and the
//!   worst-case / average evaluation protocol over parameter grids.
//! * [`approx`]: small MLPs with manual backpropagation, multi-head networks
//!   and Polyak-averaged target copies.
//! * [`agents`]: expectile Q-learning, a single-critic TD3 variant trained with
//!   the expectile loss, domain randomization and the bandit-tuned multi-head
//!   learner.
//! * [`harness`]: run configuration, multi-seed orchestration, reports and the
//!   command-line front end.

// Validation uses `!(x >= 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod agents;
pub mod approx;
pub mod bellman;
pub mod envs;
pub mod error;
pub mod expectile;
pub mod harness;
pub mod mdp;
pub mod rng;

pub use error::{Error, Result};
