use serde::{Deserialize, Serialize};

use super::Parameterized;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    /// Plain stochastic gradient descent.
    #[default]
    Sgd,
    /// First/second-moment adaptive steps with β₁ = 0.9, β₂ = 0.999, ε = 1e-8.
    Adam,
}

/// Gradient-descent optimizer; state is aligned to the parameter order of
/// the network it was created for.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
    steps: u64,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

impl Optimizer {
    pub fn new<N: Parameterized>(kind: OptimizerKind, lr: f64, net: &N) -> Result<Self> {
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(Error::InvalidArgument(format!("learning rate must be positive, got {lr}")));
        }
        let zeros: Vec<Vec<f64>> = net.param_slices().iter().map(|s| vec![0.0; s.len()]).collect();
        Ok(Self {
            kind,
            lr,
            first: zeros.clone(),
            second: zeros,
            steps: 0,
        })
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    /// One descent step `params ← params - lr·update(grads)`.
    pub fn step<N: Parameterized>(&mut self, params: &mut N, grads: &N) -> Result<()> {
        let g = grads.param_slices();
        let mut p = params.param_slices_mut();
        if g.len() != p.len() || g.len() != self.first.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} parameter buffers", self.first.len()),
                got: format!("{}", g.len()),
            });
        }
        self.steps += 1;
        match self.kind {
            OptimizerKind::Sgd => {
                for (dst, src) in p.iter_mut().zip(&g) {
                    for (x, gx) in dst.iter_mut().zip(src.iter()) {
                        *x -= self.lr * gx;
                    }
                }
            }
            OptimizerKind::Adam => {
                let t = self.steps as i32;
                let c1 = 1.0 - BETA1.powi(t);
                let c2 = 1.0 - BETA2.powi(t);
                for (((dst, src), m), v) in p
                    .iter_mut()
                    .zip(&g)
                    .zip(self.first.iter_mut())
                    .zip(self.second.iter_mut())
                {
                    for i in 0..dst.len() {
                        let gx = src[i];
                        m[i] = BETA1 * m[i] + (1.0 - BETA1) * gx;
                        v[i] = BETA2 * v[i] + (1.0 - BETA2) * gx * gx;
                        let mh = m[i] / c1;
                        let vh = v[i] / c2;
                        dst[i] -= self.lr * mh / (vh.sqrt() + EPS);
                    }
                }
            }
        }
        Ok(())
    }
}
