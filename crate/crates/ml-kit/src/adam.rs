//! Adam optimizer with bias correction.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::net::{DenseNet, NetGrads};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        Self {
            lr,
            ..Default::default()
        }
    }
}

/// Whether a step was applied or skipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Applied,
    /// The gradient contained a non-finite entry; parameters and moments
    /// were left untouched.
    SkippedNonFinite,
}

/// Optimizer state for one network: first/second moments per layer plus the
/// step counter.
#[derive(Debug, Clone)]
pub struct Adam {
    pub cfg: AdamConfig,
    pub m: Vec<(Array2<f64>, Array1<f64>)>,
    pub v: Vec<(Array2<f64>, Array1<f64>)>,
    pub t: u64,
}

impl Adam {
    pub fn new(cfg: AdamConfig, net: &DenseNet) -> Self {
        let zeros = |n: &DenseNet| -> Vec<(Array2<f64>, Array1<f64>)> {
            n.layers
                .iter()
                .map(|l| {
                    (
                        Array2::zeros(l.weights.raw_dim()),
                        Array1::zeros(l.biases.raw_dim()),
                    )
                })
                .collect()
        };
        Self {
            cfg,
            m: zeros(net),
            v: zeros(net),
            t: 0,
        }
    }

    /// One Adam update. Non-finite gradients skip the step entirely so a
    /// single bad batch cannot poison the moments.
    pub fn step(&mut self, net: &mut DenseNet, grads: &NetGrads) -> StepOutcome {
        if !grads.is_finite() {
            return StepOutcome::SkippedNonFinite;
        }
        self.t += 1;
        let t = self.t as i32;
        let b1 = self.cfg.beta1;
        let b2 = self.cfg.beta2;
        let corr1 = 1.0 - b1.powi(t);
        let corr2 = 1.0 - b2.powi(t);
        for (i, layer) in net.layers.iter_mut().enumerate() {
            let gw = &grads.dw[i];
            let gb = &grads.db[i];
            let (mw, mb) = &mut self.m[i];
            let (vw, vb) = &mut self.v[i];
            mw.zip_mut_with(gw, |m, &g| *m = b1 * *m + (1.0 - b1) * g);
            mb.zip_mut_with(gb, |m, &g| *m = b1 * *m + (1.0 - b1) * g);
            vw.zip_mut_with(gw, |v, &g| *v = b2 * *v + (1.0 - b2) * g * g);
            vb.zip_mut_with(gb, |v, &g| *v = b2 * *v + (1.0 - b2) * g * g);
            let lr = self.cfg.lr;
            let eps = self.cfg.eps;
            ndarray::Zip::from(&mut layer.weights)
                .and(&*mw)
                .and(&*vw)
                .for_each(|w, &m, &v| {
                    *w -= lr * (m / corr1) / ((v / corr2).sqrt() + eps);
                });
            ndarray::Zip::from(&mut layer.biases)
                .and(&*mb)
                .and(&*vb)
                .for_each(|b, &m, &v| {
                    *b -= lr * (m / corr1) / ((v / corr2).sqrt() + eps);
                });
        }
        StepOutcome::Applied
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::Activation;
    use ndarray::Array1;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tiny_net(rng: &mut ChaCha8Rng) -> DenseNet {
        DenseNet::new(&[2, 2], Activation::Linear, Activation::Linear, rng)
    }

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut net = tiny_net(&mut rng);
        let before = net.layers[0].weights.clone();
        let mut opt = Adam::new(AdamConfig::default(), &net);
        let grads = NetGrads::zeros_like(&net);
        assert_eq!(opt.step(&mut net, &grads), StepOutcome::Applied);
        assert_eq!(net.layers[0].weights, before);
    }

    #[test]
    fn first_step_magnitude_is_about_lr() {
        // Closed form: with constant gradient g, the bias-corrected first
        // step is lr * g / (|g| + eps) ~= lr * sign(g).
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut net = tiny_net(&mut rng);
        let before = net.layers[0].weights.clone();
        let mut opt = Adam::new(AdamConfig::default(), &net);
        let mut grads = NetGrads::zeros_like(&net);
        grads.dw[0].fill(3.7);
        opt.step(&mut net, &grads);
        for (w, b) in net.layers[0].weights.iter().zip(before.iter()) {
            let delta = (w - b).abs();
            assert!((delta - 0.001).abs() < 1e-9, "step {delta}");
        }
    }

    #[test]
    fn non_finite_gradient_skips_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut net = tiny_net(&mut rng);
        let before = net.layers[0].weights.clone();
        let mut opt = Adam::new(AdamConfig::default(), &net);
        let mut grads = NetGrads::zeros_like(&net);
        grads.dw[0][[0, 0]] = f64::NAN;
        assert_eq!(opt.step(&mut net, &grads), StepOutcome::SkippedNonFinite);
        assert_eq!(net.layers[0].weights, before);
        assert_eq!(opt.t, 0);
    }

    #[test]
    fn converges_on_quadratic_bowl() {
        // Minimize 0.5 * ||W x - y||^2 for fixed x, y: convex with a known
        // minimizer along the gradient flow.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut net = DenseNet::new(&[1, 1], Activation::Linear, Activation::Linear, &mut rng);
        let mut opt = Adam::new(AdamConfig::with_lr(0.01), &net);
        let x = Array1::from(vec![1.0]);
        let target = 3.25;
        for _ in 0..500 {
            let trace = net.forward_trace(&x).unwrap();
            let err = trace.output()[0] - target;
            let grads = net.backward(&trace, &Array1::from(vec![err]));
            opt.step(&mut net, &grads);
        }
        let w = net.layers[0].weights[[0, 0]];
        let b = net.layers[0].biases[0];
        assert!(
            (w + b - target).abs() < 1e-3,
            "w + b = {} vs {target}",
            w + b
        );
    }
}
