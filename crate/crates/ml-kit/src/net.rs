//! Dense feed-forward networks with analytic backpropagation.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::MlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Tanh,
    Relu,
    Linear,
    Softmax,
}

/// One affine layer plus its activation.
#[derive(Debug, Clone)]
pub struct Layer {
    /// Weight matrix, `out_dim x in_dim`.
    pub weights: Array2<f64>,
    pub biases: Array1<f64>,
    pub activation: Activation,
}

impl Layer {
    fn apply(&self, x: &Array1<f64>) -> (Array1<f64>, Array1<f64>) {
        let z = self.weights.dot(x) + &self.biases;
        let a = activate(self.activation, &z);
        (z, a)
    }
}

fn activate(act: Activation, z: &Array1<f64>) -> Array1<f64> {
    match act {
        Activation::Tanh => z.mapv(f64::tanh),
        Activation::Relu => z.mapv(|v| v.max(0.0)),
        Activation::Linear => z.clone(),
        Activation::Softmax => softmax(z),
    }
}

/// Numerically stable softmax.
pub fn softmax(z: &Array1<f64>) -> Array1<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp = z.mapv(|v| (v - max).exp());
    let sum = exp.sum();
    exp / sum
}

/// Cached activations from a forward pass, consumed by backprop.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// `acts[0]` is the input, `acts[i+1]` the output of layer `i`.
    acts: Vec<Array1<f64>>,
    /// Pre-activations per layer.
    zs: Vec<Array1<f64>>,
}

impl ForwardTrace {
    pub fn output(&self) -> &Array1<f64> {
        self.acts.last().expect("non-empty trace")
    }

    pub fn pre_activations(&self) -> &[Array1<f64>] {
        &self.zs
    }
}

/// Parameter gradients, shaped like the network.
#[derive(Debug, Clone)]
pub struct NetGrads {
    pub dw: Vec<Array2<f64>>,
    pub db: Vec<Array1<f64>>,
}

impl NetGrads {
    pub fn zeros_like(net: &DenseNet) -> Self {
        Self {
            dw: net
                .layers
                .iter()
                .map(|l| Array2::zeros(l.weights.raw_dim()))
                .collect(),
            db: net
                .layers
                .iter()
                .map(|l| Array1::zeros(l.biases.raw_dim()))
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &NetGrads) {
        for (a, b) in self.dw.iter_mut().zip(&other.dw) {
            *a += b;
        }
        for (a, b) in self.db.iter_mut().zip(&other.db) {
            *a += b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for a in self.dw.iter_mut() {
            *a *= s;
        }
        for a in self.db.iter_mut() {
            *a *= s;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.dw.iter().all(|m| m.iter().all(|v| v.is_finite()))
            && self.db.iter().all(|v| v.iter().all(|x| x.is_finite()))
    }
}

/// A stack of dense layers.
#[derive(Debug, Clone)]
pub struct DenseNet {
    pub layers: Vec<Layer>,
}

impl DenseNet {
    /// Builds a network with the given layer dimensions, `hidden` activation
    /// on all but the last layer and `output` on the last. Weights use
    /// Xavier-uniform initialization drawn from `rng`.
    pub fn new(
        dims: &[usize],
        hidden: Activation,
        output: Activation,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        assert!(dims.len() >= 2, "need at least input and output dims");
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for i in 0..dims.len() - 1 {
            let (fan_in, fan_out) = (dims[i], dims[i + 1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let weights =
                Array2::from_shape_fn((fan_out, fan_in), |_| rng.random_range(-limit..limit));
            let activation = if i == dims.len() - 2 { output } else { hidden };
            layers.push(Layer {
                weights,
                biases: Array1::zeros(fan_out),
                activation,
            });
        }
        Self { layers }
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut out = vec![self.layers[0].weights.ncols()];
        out.extend(self.layers.iter().map(|l| l.weights.nrows()));
        out
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weights.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().weights.nrows()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    pub fn forward(&self, x: &Array1<f64>) -> Result<Array1<f64>, MlError> {
        self.check_input(x)?;
        let mut a = x.clone();
        for layer in &self.layers {
            a = layer.apply(&a).1;
        }
        Ok(a)
    }

    pub fn forward_trace(&self, x: &Array1<f64>) -> Result<ForwardTrace, MlError> {
        self.check_input(x)?;
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        let mut zs = Vec::with_capacity(self.layers.len());
        acts.push(x.clone());
        for layer in &self.layers {
            let (z, a) = layer.apply(acts.last().unwrap());
            zs.push(z);
            acts.push(a);
        }
        Ok(ForwardTrace { acts, zs })
    }

    fn check_input(&self, x: &Array1<f64>) -> Result<(), MlError> {
        if x.len() != self.input_dim() {
            return Err(MlError::Shape(format!(
                "input dim {} does not match network input {}",
                x.len(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    /// Backprop from a gradient on the network OUTPUT (post-activation).
    /// Returns parameter gradients; pair with [`Self::backward_with_input_grad`]
    /// when the gradient must continue into an upstream network.
    pub fn backward(&self, trace: &ForwardTrace, upstream: &Array1<f64>) -> NetGrads {
        self.backward_with_input_grad(trace, upstream).0
    }

    pub fn backward_with_input_grad(
        &self,
        trace: &ForwardTrace,
        upstream: &Array1<f64>,
    ) -> (NetGrads, Array1<f64>) {
        let top = self.layers.len() - 1;
        let dz = activation_backward(
            self.layers[top].activation,
            upstream,
            &trace.zs[top],
            &trace.acts[top + 1],
        );
        self.backprop_from(trace, dz)
    }

    /// Backprop from a gradient on the last layer's PRE-activation. Losses
    /// formulated on logits (the PPO surrogate, entropy terms) enter here,
    /// which sidesteps singular softmax Jacobian corner cases.
    pub fn backward_pre_activation(
        &self,
        trace: &ForwardTrace,
        dz_last: Array1<f64>,
    ) -> NetGrads {
        self.backprop_from(trace, dz_last).0
    }

    fn backprop_from(&self, trace: &ForwardTrace, dz_top: Array1<f64>) -> (NetGrads, Array1<f64>) {
        let mut dw = Vec::with_capacity(self.layers.len());
        let mut db = Vec::with_capacity(self.layers.len());
        let mut dz = dz_top;
        for l in (0..self.layers.len()).rev() {
            let a_prev = &trace.acts[l];
            dw.push(outer(&dz, a_prev));
            db.push(dz.clone());
            let g_prev = self.layers[l].weights.t().dot(&dz);
            if l > 0 {
                dz = activation_backward(
                    self.layers[l - 1].activation,
                    &g_prev,
                    &trace.zs[l - 1],
                    &trace.acts[l],
                );
            } else {
                dz = g_prev;
            }
        }
        dw.reverse();
        db.reverse();
        (NetGrads { dw, db }, dz)
    }
}

fn outer(col: &Array1<f64>, row: &Array1<f64>) -> Array2<f64> {
    let c = col.view().insert_axis(Axis(1));
    let r = row.view().insert_axis(Axis(0));
    c.dot(&r)
}

/// Chain rule through an activation: turns a gradient on the activation's
/// output into one on its pre-activation input.
fn activation_backward(
    act: Activation,
    grad_out: &Array1<f64>,
    z: &Array1<f64>,
    a: &Array1<f64>,
) -> Array1<f64> {
    match act {
        Activation::Linear => grad_out.clone(),
        Activation::Tanh => grad_out * &a.mapv(|v| 1.0 - v * v),
        Activation::Relu => {
            let mask = z.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
            grad_out * &mask
        }
        Activation::Softmax => {
            // dz = p .* (g - <p, g>)
            let dot = a.dot(grad_out);
            grad_out.mapv(|g| g - dot) * a
        }
    }
}
