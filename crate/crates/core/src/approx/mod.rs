//! Small differentiable approximators with hand-written backpropagation.
//!
//! [`Mlp`] is a stack of dense layers with `tanh` hidden activations and a
//! configurable output activation. [`MultiHeadNet`] shares one trunk between
//! several single-layer heads. Gradients are represented by a zeroed copy of
//! the network they belong to, which lets optimizers and Polyak averaging walk
//! parameters and gradients in lockstep through [`Parameterized`].

pub mod gradcheck;
mod optim;

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use gradcheck::{check_mlp_expectile, check_multi_head_expectile, finite_difference_check, GradCheckReport};
pub use optim::{Optimizer, OptimizerKind};

use crate::error::{Error, Result};

/// Version of the JSON parameter document.
pub const PARAMS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation output `y`.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }
}

/// Walks parameter buffers in a fixed order.
pub trait Parameterized {
    fn param_slices(&self) -> Vec<&[f64]>;
    fn param_slices_mut(&mut self) -> Vec<&mut [f64]>;

    fn param_count(&self) -> usize {
        self.param_slices().iter().map(|s| s.len()).sum()
    }

    fn flat_params(&self) -> Vec<f64> {
        self.param_slices().concat()
    }

    /// `self += scale · other`.
    fn add_scaled(&mut self, other: &Self, scale: f64)
    where
        Self: Sized,
    {
        for (dst, src) in self.param_slices_mut().into_iter().zip(other.param_slices()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += scale * s;
            }
        }
    }

    fn scale(&mut self, factor: f64) {
        for slice in self.param_slices_mut() {
            for x in slice {
                *x *= factor;
            }
        }
    }

    fn same_shape(&self, other: &Self) -> bool
    where
        Self: Sized,
    {
        let a = self.param_slices();
        let b = other.param_slices();
        a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.len() == y.len())
    }
}

/// Fully connected layer `y = act(W x + b)`, `W` stored row-major (outputs × inputs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    /// Uniform initialization in `±√(6/(fan_in + fan_out))`, zero bias.
    pub fn glorot<R: Rng + ?Sized>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        Self {
            inputs,
            outputs,
            weights: (0..inputs * outputs)
                .map(|_| rng.random_range(-limit..=limit))
                .collect(),
            bias: vec![0.0; outputs],
        }
    }

    fn affine(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks(self.inputs)
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + b)
            .collect()
    }

    /// Accumulates `dW += δ xᵀ`, `db += δ` and returns `Wᵀ δ`.
    fn backprop(&self, x: &[f64], delta: &[f64], grad: &mut Dense) -> Vec<f64> {
        let mut input_grad = vec![0.0; self.inputs];
        for (o, &d) in delta.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            let row = o * self.inputs;
            grad.bias[o] += d;
            for i in 0..self.inputs {
                grad.weights[row + i] += d * x[i];
                input_grad[i] += d * self.weights[row + i];
            }
        }
        input_grad
    }

    fn check(&self) -> Result<()> {
        if self.weights.len() != self.inputs * self.outputs || self.bias.len() != self.outputs {
            return Err(Error::ShapeMismatch {
                expected: format!("{}x{} layer", self.outputs, self.inputs),
                got: format!("{} weights, {} biases", self.weights.len(), self.bias.len()),
            });
        }
        if self.weights.iter().chain(&self.bias).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite parameter".into()));
        }
        Ok(())
    }
}

/// Multilayer perceptron with `tanh` hidden layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    layers: Vec<Dense>,
    output_activation: Activation,
}

/// Layer outputs recorded by a forward pass; `outputs[0]` is the input.
#[derive(Debug, Clone)]
pub struct MlpCache {
    outputs: Vec<Vec<f64>>,
}

impl MlpCache {
    pub fn output(&self) -> &[f64] {
        self.outputs.last().expect("cache holds at least the input")
    }
}

impl Mlp {
    /// `sizes = [inputs, hidden…, outputs]`.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], output_activation: Activation, rng: &mut R) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidArgument(format!("bad layer sizes {sizes:?}")));
        }
        Ok(Self {
            layers: sizes.windows(2).map(|w| Dense::glorot(w[0], w[1], rng)).collect(),
            output_activation,
        })
    }

    pub fn from_layers(layers: Vec<Dense>, output_activation: Activation) -> Result<Self> {
        let net = Self {
            layers,
            output_activation,
        };
        net.check()?;
        Ok(net)
    }

    pub fn check(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::InvalidArgument("network has no layers".into()));
        }
        for layer in &self.layers {
            layer.check()?;
        }
        for w in self.layers.windows(2) {
            if w[0].outputs != w[1].inputs {
                return Err(Error::ShapeMismatch {
                    expected: format!("{} inputs", w[0].outputs),
                    got: format!("{}", w[1].inputs),
                });
            }
        }
        Ok(())
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.outputs)
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self.layers.iter().map(|l| Dense::zeros(l.inputs, l.outputs)).collect(),
            output_activation: self.output_activation,
        }
    }

    fn activation(&self, layer: usize) -> Activation {
        if layer + 1 == self.layers.len() {
            self.output_activation
        } else {
            Activation::Tanh
        }
    }

    pub fn forward(&self, input: &[f64]) -> Result<MlpCache> {
        if input.len() != self.input_dim() {
            return Err(Error::ShapeMismatch {
                expected: format!("input of length {}", self.input_dim()),
                got: format!("{}", input.len()),
            });
        }
        let mut outputs = Vec::with_capacity(self.layers.len() + 1);
        outputs.push(input.to_vec());
        for (k, layer) in self.layers.iter().enumerate() {
            let act = self.activation(k);
            let z = layer.affine(outputs.last().expect("nonempty"));
            outputs.push(z.into_iter().map(|v| act.apply(v)).collect());
        }
        Ok(MlpCache { outputs })
    }

    /// Output only.
    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(input)?.outputs.pop().expect("nonempty"))
    }

    /// Accumulates parameter gradients of a scalar loss with output gradient
    /// `output_grad` into `grads` and returns the gradient with respect to
    /// the input.
    pub fn backward(&self, cache: &MlpCache, output_grad: &[f64], grads: &mut Mlp) -> Result<Vec<f64>> {
        let shapes_match = cache.outputs.len() == self.layers.len() + 1
            && cache.outputs[0].len() == self.input_dim()
            && self
                .layers
                .iter()
                .zip(&cache.outputs[1..])
                .all(|(l, o)| l.outputs == o.len());
        if !shapes_match {
            return Err(Error::InvalidArgument(
                "forward cache does not belong to this network".into(),
            ));
        }
        if output_grad.len() != self.output_dim() {
            return Err(Error::ShapeMismatch {
                expected: format!("output gradient of length {}", self.output_dim()),
                got: format!("{}", output_grad.len()),
            });
        }
        if !grads.same_shape(self) {
            return Err(Error::ShapeMismatch {
                expected: "gradient buffer shaped like the network".into(),
                got: "different shape".into(),
            });
        }
        let mut upstream = output_grad.to_vec();
        for k in (0..self.layers.len()).rev() {
            let act = self.activation(k);
            let y = &cache.outputs[k + 1];
            let delta: Vec<f64> = upstream
                .iter()
                .zip(y)
                .map(|(g, &yk)| g * act.derivative_from_output(yk))
                .collect();
            upstream = self.layers[k].backprop(&cache.outputs[k], &delta, &mut grads.layers[k]);
        }
        Ok(upstream)
    }
}

impl Parameterized for Mlp {
    fn param_slices(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()])
            .collect()
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weights.as_mut_slice(), l.bias.as_mut_slice()])
            .collect()
    }
}

/// Shared trunk feeding `D` independent single-layer heads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiHeadNet {
    trunk: Mlp,
    heads: Vec<Mlp>,
}

/// Forward record for a [`MultiHeadNet`] evaluation.
#[derive(Debug, Clone)]
pub struct MultiHeadCache {
    trunk: MlpCache,
    heads: Vec<Option<MlpCache>>,
}

impl MultiHeadCache {
    /// Output of head `d`, if it was evaluated.
    pub fn head_output(&self, d: usize) -> Option<&[f64]> {
        self.heads.get(d)?.as_ref().map(|c| c.output())
    }
}

impl MultiHeadNet {
    /// Trunk `[inputs, hidden…]` with `tanh` everywhere, then `n_heads` heads
    /// mapping the last hidden layer to `outputs` values.
    pub fn new<R: Rng + ?Sized>(
        inputs: usize,
        hidden: &[usize],
        outputs: usize,
        n_heads: usize,
        head_activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        if hidden.is_empty() || n_heads == 0 {
            return Err(Error::InvalidArgument(
                "multi-head nets need a hidden layer and at least one head".into(),
            ));
        }
        let mut sizes = vec![inputs];
        sizes.extend_from_slice(hidden);
        let trunk = Mlp::new(&sizes, Activation::Tanh, rng)?;
        let last = *hidden.last().expect("nonempty");
        let heads = (0..n_heads)
            .map(|_| Mlp::new(&[last, outputs], head_activation, rng))
            .collect::<Result<_>>()?;
        Ok(Self { trunk, heads })
    }

    pub fn from_parts(trunk: Mlp, heads: Vec<Mlp>) -> Result<Self> {
        let net = Self { trunk, heads };
        net.check()?;
        Ok(net)
    }

    pub fn check(&self) -> Result<()> {
        self.trunk.check()?;
        if self.heads.is_empty() {
            return Err(Error::InvalidArgument("no heads".into()));
        }
        for head in &self.heads {
            head.check()?;
            if head.input_dim() != self.trunk.output_dim() {
                return Err(Error::ShapeMismatch {
                    expected: format!("head input {}", self.trunk.output_dim()),
                    got: format!("{}", head.input_dim()),
                });
            }
        }
        Ok(())
    }

    pub fn n_heads(&self) -> usize {
        self.heads.len()
    }

    pub fn trunk(&self) -> &Mlp {
        &self.trunk
    }

    pub fn head(&self, d: usize) -> &Mlp {
        &self.heads[d]
    }

    pub fn input_dim(&self) -> usize {
        self.trunk.input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.heads[0].output_dim()
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            trunk: self.trunk.zeros_like(),
            heads: self.heads.iter().map(Mlp::zeros_like).collect(),
        }
    }

    /// Evaluates the trunk and the heads listed in `heads`.
    pub fn forward_heads(&self, input: &[f64], heads: &[usize]) -> Result<MultiHeadCache> {
        let trunk = self.trunk.forward(input)?;
        let mut caches = vec![None; self.heads.len()];
        for &d in heads {
            let head = self.heads.get(d).ok_or_else(|| {
                Error::InvalidArgument(format!("head {d} out of range ({} heads)", self.heads.len()))
            })?;
            caches[d] = Some(head.forward(trunk.output())?);
        }
        Ok(MultiHeadCache {
            trunk,
            heads: caches,
        })
    }

    pub fn forward_all(&self, input: &[f64]) -> Result<MultiHeadCache> {
        let all: Vec<usize> = (0..self.heads.len()).collect();
        self.forward_heads(input, &all)
    }

    /// Output of head `d` only.
    pub fn predict_head(&self, input: &[f64], d: usize) -> Result<Vec<f64>> {
        let cache = self.forward_heads(input, &[d])?;
        Ok(cache.head_output(d).expect("evaluated").to_vec())
    }

    /// Backpropagates per-head output gradients (`None` for heads that do
    /// not contribute) through the heads and the shared trunk. Returns the
    /// input gradient.
    pub fn backward(
        &self,
        cache: &MultiHeadCache,
        head_grads: &[Option<&[f64]>],
        grads: &mut MultiHeadNet,
    ) -> Result<Vec<f64>> {
        if head_grads.len() != self.heads.len() || grads.heads.len() != self.heads.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} heads", self.heads.len()),
                got: format!("{}", head_grads.len()),
            });
        }
        let mut trunk_grad = vec![0.0; self.trunk.output_dim()];
        for (d, g) in head_grads.iter().enumerate() {
            let Some(g) = g else { continue };
            let head_cache = cache.heads[d].as_ref().ok_or_else(|| {
                Error::InvalidArgument(format!("head {d} missing from the forward cache"))
            })?;
            let up = self.heads[d].backward(head_cache, g, &mut grads.heads[d])?;
            for (t, u) in trunk_grad.iter_mut().zip(up) {
                *t += u;
            }
        }
        self.trunk.backward(&cache.trunk, &trunk_grad, &mut grads.trunk)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ParamsDocument {
            version: PARAMS_SCHEMA_VERSION,
            net: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ParamsDocument = serde_json::from_str(text)?;
        doc.into_net()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl Parameterized for MultiHeadNet {
    fn param_slices(&self) -> Vec<&[f64]> {
        let mut out = self.trunk.param_slices();
        for h in &self.heads {
            out.extend(h.param_slices());
        }
        out
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = self.trunk.param_slices_mut();
        for h in &mut self.heads {
            out.extend(h.param_slices_mut());
        }
        out
    }
}

/// Versioned JSON wrapper around network parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDocument {
    pub version: u32,
    pub net: MultiHeadNet,
}

impl ParamsDocument {
    pub fn into_net(self) -> Result<MultiHeadNet> {
        if self.version != PARAMS_SCHEMA_VERSION {
            return Err(Error::Version {
                expected: PARAMS_SCHEMA_VERSION,
                found: self.version,
            });
        }
        self.net.check()?;
        Ok(self.net)
    }
}

/// Slowly tracking copy of a network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetCopy<N> {
    net: N,
    tau: f64,
}

impl<N: Parameterized + Clone> TargetCopy<N> {
    /// `tau` ∈ [0, 1] is the weight kept on the target's own parameters.
    pub fn new(source: &N, tau: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::InvalidArgument(format!("tau must lie in [0, 1], got {tau}")));
        }
        Ok(Self {
            net: source.clone(),
            tau,
        })
    }

    pub fn net(&self) -> &N {
        &self.net
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `target ← τ·target + (1-τ)·source`.
    pub fn polyak_update(&mut self, source: &N) -> Result<()> {
        if !self.net.same_shape(source) {
            return Err(Error::ShapeMismatch {
                expected: "source shaped like the target".into(),
                got: "different shape".into(),
            });
        }
        let tau = self.tau;
        for (dst, src) in self.net.param_slices_mut().into_iter().zip(source.param_slices()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d = tau * *d + (1.0 - tau) * s;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;

    fn dense_eval(net: &Mlp, x: &[f64]) -> Vec<f64> {
        // Straightforward re-evaluation with explicit index loops.
        let mut h = x.to_vec();
        let n = net.layers().len();
        for (k, l) in net.layers().iter().enumerate() {
            let mut out = vec![0.0; l.outputs];
            for o in 0..l.outputs {
                let mut z = l.bias[o];
                for i in 0..l.inputs {
                    z += l.weights[o * l.inputs + i] * h[i];
                }
                out[o] = if k + 1 < n { z.tanh() } else { z };
            }
            h = out;
        }
        h
    }

    #[test]
    fn zero_weights_output_bias() {
        let mut rng = rng_from(0, &[0]);
        let mut net = Mlp::new(&[3, 5, 2], Activation::Identity, &mut rng).unwrap();
        for l in net.layers_mut() {
            l.weights.iter_mut().for_each(|w| *w = 0.0);
        }
        net.layers_mut()[1].bias = vec![0.25, -1.0];
        assert_eq!(net.predict(&[1.0, 2.0, 3.0]).unwrap(), vec![0.25, -1.0]);
    }

    #[test]
    fn identity_linear_layer() {
        let layer = Dense {
            inputs: 3,
            outputs: 3,
            weights: vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            bias: vec![0.0; 3],
        };
        let net = Mlp::from_layers(vec![layer], Activation::Identity).unwrap();
        assert_eq!(net.predict(&[0.5, -2.0, 7.0]).unwrap(), vec![0.5, -2.0, 7.0]);
    }

    #[test]
    fn forward_matches_dense_evaluator() {
        let mut rng = rng_from(1, &[0]);
        let mut net = Mlp::new(&[4, 6, 5, 2], Activation::Identity, &mut rng).unwrap();
        for l in net.layers_mut() {
            for (i, b) in l.bias.iter_mut().enumerate() {
                *b = 0.1 * i as f64 - 0.2;
            }
        }
        let x = [0.3, -0.7, 1.1, 0.05];
        let got = net.predict(&x).unwrap();
        let want = dense_eval(&net, &x);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-14);
        }
        assert_eq!(got, net.predict(&x).unwrap());
    }

    #[test]
    fn shape_errors() {
        let mut rng = rng_from(2, &[0]);
        let net = Mlp::new(&[2, 3, 1], Activation::Identity, &mut rng).unwrap();
        assert!(net.forward(&[1.0]).is_err());
        let cache = net.forward(&[1.0, 2.0]).unwrap();
        let mut g = net.zeros_like();
        assert!(net.backward(&cache, &[1.0, 1.0], &mut g).is_err());
        let other = Mlp::new(&[2, 4, 1], Activation::Identity, &mut rng).unwrap();
        let foreign = other.forward(&[1.0, 2.0]).unwrap();
        let mut g2 = net.zeros_like();
        assert!(net.backward(&foreign, &[1.0], &mut g2).is_err());
        let short = Mlp::new(&[2, 1], Activation::Identity, &mut rng).unwrap();
        let short_cache = short.forward(&[1.0, 2.0]).unwrap();
        assert!(net.backward(&short_cache, &[1.0], &mut g).is_err());
        assert!(Mlp::new(&[2], Activation::Identity, &mut rng).is_err());
    }

    #[test]
    fn zero_output_grad_gives_zero_gradients() {
        let mut rng = rng_from(3, &[0]);
        let net = Mlp::new(&[3, 4, 2], Activation::Identity, &mut rng).unwrap();
        let cache = net.forward(&[0.1, 0.2, 0.3]).unwrap();
        let mut g = net.zeros_like();
        let input_grad = net.backward(&cache, &[0.0, 0.0], &mut g).unwrap();
        assert!(g.flat_params().iter().all(|&x| x == 0.0));
        assert!(input_grad.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn linear_squared_loss_gradient_is_residual_times_input() {
        // L = ½ (wᵀx + b - y)² has ∂L/∂w = (wᵀx + b - y)·x and ∂L/∂b = residual.
        let layer = Dense {
            inputs: 3,
            outputs: 1,
            weights: vec![0.5, -1.0, 2.0],
            bias: vec![0.3],
        };
        let net = Mlp::from_layers(vec![layer], Activation::Identity).unwrap();
        let x = [1.0, 2.0, -0.5];
        let y = 0.7;
        let cache = net.forward(&x).unwrap();
        let residual = cache.output()[0] - y;
        let mut g = net.zeros_like();
        net.backward(&cache, &[residual], &mut g).unwrap();
        let expect_residual = 0.5 - 2.0 - 1.0 + 0.3 - 0.7;
        assert!((residual - expect_residual).abs() < 1e-15);
        for i in 0..3 {
            assert!((g.layers()[0].weights[i] - expect_residual * x[i]).abs() < 1e-15);
        }
        assert!((g.layers()[0].bias[0] - expect_residual).abs() < 1e-15);
    }

    #[test]
    fn polyak_examples() {
        let scalar = |v: f64| {
            Mlp::from_layers(
                vec![Dense {
                    inputs: 1,
                    outputs: 1,
                    weights: vec![v],
                    bias: vec![v],
                }],
                Activation::Identity,
            )
            .unwrap()
        };
        let source = scalar(1.0);
        let mut t = TargetCopy::new(&scalar(0.0), 0.995).unwrap();
        t.polyak_update(&source).unwrap();
        assert!((t.net().layers()[0].weights[0] - 0.005).abs() < 1e-15);

        let mut t0 = TargetCopy::new(&scalar(0.0), 0.0).unwrap();
        t0.polyak_update(&source).unwrap();
        assert_eq!(t0.net(), &source);

        let mut t1 = TargetCopy::new(&scalar(0.3), 1.0).unwrap();
        t1.polyak_update(&source).unwrap();
        assert_eq!(t1.net(), &scalar(0.3));

        let mut rng = rng_from(4, &[0]);
        let big = Mlp::new(&[1, 2, 1], Activation::Identity, &mut rng).unwrap();
        assert!(t1.polyak_update(&big).is_err());
        assert!(TargetCopy::new(&source, 1.5).is_err());
    }

    #[test]
    fn multi_head_params_round_trip() {
        let mut rng = rng_from(5, &[0]);
        let net = MultiHeadNet::new(3, &[8, 8], 1, 4, Activation::Identity, &mut rng).unwrap();
        let text = net.to_json().unwrap();
        assert_eq!(MultiHeadNet::from_json(&text).unwrap(), net);
        let bumped = text.replacen("\"version\":1", "\"version\":2", 1);
        assert!(matches!(
            MultiHeadNet::from_json(&bumped),
            Err(Error::Version { found: 2, .. })
        ));
    }

    #[test]
    fn heads_share_the_trunk_output() {
        let mut rng = rng_from(6, &[0]);
        let net = MultiHeadNet::new(2, &[5], 1, 3, Activation::Identity, &mut rng).unwrap();
        let cache = net.forward_all(&[0.4, -0.1]).unwrap();
        for d in 0..3 {
            let direct = net.head(d).predict(cache.trunk.output()).unwrap();
            assert_eq!(cache.head_output(d).unwrap(), direct.as_slice());
        }
        assert!(net.forward_heads(&[0.4, -0.1], &[3]).is_err());
    }
}
