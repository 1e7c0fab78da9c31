//! Finite-difference verification of backpropagated gradients.
//!
//! The expectile loss is C¹ but its curvature jumps where a residual changes
//! sign. A central difference whose stencil straddles that point is biased,
//! so such parameters are checked with a third-order one-sided difference
//! on the side where every residual keeps its sign.

use super::{Mlp, MultiHeadNet, Parameterized};
use crate::error::Result;
use crate::expectile::{expectile_loss, expectile_loss_grad};

/// Gradients smaller than this in magnitude are compared absolutely.
pub const GRAD_FLOOR: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    /// Largest `|analytic - numeric| / max(|analytic|, |numeric|, GRAD_FLOOR)`.
    pub max_rel_error: f64,
    pub params: usize,
    /// Parameters checked with one-sided differences.
    pub one_sided: usize,
    /// Parameters whose stencil crossed a kink on both sides.
    pub skipped: usize,
}

fn offset_param<N: Parameterized>(net: &mut N, idx: usize, delta: f64) {
    let mut seen = 0;
    for slice in net.param_slices_mut() {
        if idx < seen + slice.len() {
            slice[idx - seen] += delta;
            return;
        }
        seen += slice.len();
    }
    panic!("parameter index {idx} out of range");
}

/// Compares `analytic` (a gradient shaped like `net`) with finite
/// differences of `loss`, which returns the loss and the residuals whose
/// signs locate the kinks.
pub fn finite_difference_check<N, F>(net: &N, analytic: &N, h: f64, loss: F) -> GradCheckReport
where
    N: Parameterized + Clone,
    F: Fn(&N) -> (f64, Vec<f64>),
{
    let signs = |r: &[f64]| r.iter().map(|x| *x >= 0.0).collect::<Vec<bool>>();
    let (f0, r0) = loss(net);
    let base = signs(&r0);
    let grads = analytic.flat_params();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        params: grads.len(),
        one_sided: 0,
        skipped: 0,
    };
    for (idx, &g) in grads.iter().enumerate() {
        let eval = |delta: f64| {
            let mut probe = net.clone();
            offset_param(&mut probe, idx, delta);
            let (f, r) = loss(&probe);
            (f, signs(&r) == base)
        };
        let (fp, sp) = eval(h);
        let (fm, sm) = eval(-h);
        let numeric = if sp && sm {
            (fp - fm) / (2.0 * h)
        } else {
            // Third-order one-sided stencil over 0, h, 2h, 3h on a clean side.
            let side = |dir: f64, f1: f64| {
                let (f2, s2) = eval(dir * 2.0 * h);
                let (f3, s3) = eval(dir * 3.0 * h);
                (s2 && s3).then(|| dir * (-11.0 * f0 + 18.0 * f1 - 9.0 * f2 + 2.0 * f3) / (6.0 * h))
            };
            let forward = if sp { side(1.0, fp) } else { None };
            match forward.or_else(|| if sm { side(-1.0, fm) } else { None }) {
                Some(n) => {
                    report.one_sided += 1;
                    n
                }
                None => {
                    report.skipped += 1;
                    continue;
                }
            }
        };
        let rel = (g - numeric).abs() / g.abs().max(numeric.abs()).max(GRAD_FLOOR);
        report.max_rel_error = report.max_rel_error.max(rel);
    }
    report
}

/// `Σ_j L_α(y_j - f(x)_j)` for an [`Mlp`], checked against backpropagation.
pub fn check_mlp_expectile(net: &Mlp, input: &[f64], targets: &[f64], alpha: f64, h: f64) -> Result<GradCheckReport> {
    let cache = net.forward(input)?;
    let out = cache.output().to_vec();
    let output_grad = out
        .iter()
        .zip(targets)
        .map(|(q, y)| expectile_loss_grad(y - q, alpha).map(|g| -g))
        .collect::<Result<Vec<f64>>>()?;
    let mut grads = net.zeros_like();
    net.backward(&cache, &output_grad, &mut grads)?;
    let loss = |n: &Mlp| {
        let out = n.predict(input).expect("shapes fixed");
        let residuals: Vec<f64> = targets.iter().zip(&out).map(|(y, q)| y - q).collect();
        let total = residuals.iter().map(|u| expectile_loss(*u, alpha).expect("valid alpha")).sum();
        (total, residuals)
    };
    Ok(finite_difference_check(net, &grads, h, loss))
}

/// `Σ_d w_d L_α(y_d - head_d(x))` for a [`MultiHeadNet`] with one output
/// per head, checked against backpropagation through heads and trunk.
pub fn check_multi_head_expectile(
    net: &MultiHeadNet,
    input: &[f64],
    targets: &[f64],
    weights: &[f64],
    alpha: f64,
    h: f64,
) -> Result<GradCheckReport> {
    let cache = net.forward_all(input)?;
    let head_grads = (0..net.n_heads())
        .map(|d| {
            let q = cache.head_output(d).expect("all heads evaluated")[0];
            expectile_loss_grad(targets[d] - q, alpha).map(|g| vec![-weights[d] * g])
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let refs: Vec<Option<&[f64]>> = head_grads.iter().map(|g| Some(g.as_slice())).collect();
    let mut grads = net.zeros_like();
    net.backward(&cache, &refs, &mut grads)?;
    let loss = |n: &MultiHeadNet| {
        let residuals: Vec<f64> = (0..n.n_heads())
            .map(|d| targets[d] - n.predict_head(input, d).expect("shapes fixed")[0])
            .collect();
        let total = residuals
            .iter()
            .zip(weights)
            .map(|(u, w)| w * expectile_loss(*u, alpha).expect("valid alpha"))
            .sum();
        (total, residuals)
    };
    Ok(finite_difference_check(net, &grads, h, loss))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::{Activation, Dense};
    use crate::rng::rng_from;

    #[test]
    fn random_mlp_passes() {
        let mut rng = rng_from(5, &[0]);
        let net = Mlp::new(&[3, 8, 8, 1], Activation::Identity, &mut rng).unwrap();
        let rep = check_mlp_expectile(&net, &[0.3, -0.2, 0.9], &[0.4], 0.2, 1e-5).unwrap();
        assert!(rep.max_rel_error < 1e-4, "{rep:?}");
        assert_eq!(rep.params, net.param_count());
    }

    #[test]
    fn kink_switches_to_one_sided() {
        // Output exactly at the target: every stencil straddles the kink.
        let net = Mlp::from_layers(
            vec![Dense {
                inputs: 1,
                outputs: 1,
                weights: vec![1.0],
                bias: vec![0.0],
            }],
            Activation::Identity,
        )
        .unwrap();
        let rep = check_mlp_expectile(&net, &[0.5], &[0.5], 0.2, 1e-5).unwrap();
        assert_eq!(rep.one_sided, 2);
        assert!(rep.max_rel_error < 1e-4, "{rep:?}");
    }

    #[test]
    fn wrong_gradient_is_caught() {
        let mut rng = rng_from(6, &[0]);
        let net = Mlp::new(&[2, 4, 1], Activation::Identity, &mut rng).unwrap();
        let mut bogus = net.zeros_like();
        bogus.scale(0.0);
        let loss = |n: &Mlp| {
            let q = n.predict(&[0.1, 0.7]).unwrap()[0];
            ((q - 3.0).powi(2), vec![3.0 - q])
        };
        let rep = finite_difference_check(&net, &bogus, 1e-5, loss);
        assert!(rep.max_rel_error > 0.5);
    }
}
