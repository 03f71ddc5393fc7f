//! Denoising autoencoder for KPM window compression.
//!
//! Hourglass 30 -> 256 -> 128 -> 32 -> 3 -> 32 -> 128 -> 256 -> 30, ReLU
//! everywhere except a linear reconstruction layer. Training corrupts each
//! input entry to zero with probability `mask_prob` and regresses the
//! reconstruction against the unmasked input, so the encoder learns to
//! tolerate missing telemetry entries.

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adam::{Adam, AdamConfig};
use crate::net::{Activation, DenseNet, NetGrads};
use crate::obs::{LatentState, Observation, LATENT_DIM, OBS_DIM};
use crate::MlError;

/// Encoder layer widths, input first.
pub const ENCODER_DIMS: [usize; 5] = [OBS_DIM, 256, 128, 32, LATENT_DIM];

#[derive(Debug, Clone, Copy)]
pub struct AeTrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub mask_prob: f64,
    pub lr: f64,
}

impl Default for AeTrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            batch_size: 32,
            mask_prob: 0.3,
            lr: 0.001,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Autoencoder {
    pub encoder: DenseNet,
    pub decoder: DenseNet,
    pub opt_encoder: Adam,
    pub opt_decoder: Adam,
    pub rng: ChaCha8Rng,
    pub global_step: u64,
}

impl Autoencoder {
    pub fn new(seed: u64) -> Self {
        Self::with_lr(seed, 0.001)
    }

    pub fn with_lr(seed: u64, lr: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let encoder = DenseNet::new(&ENCODER_DIMS, Activation::Relu, Activation::Relu, &mut rng);
        let decoder_dims: Vec<usize> = ENCODER_DIMS.iter().rev().copied().collect();
        let decoder = DenseNet::new(&decoder_dims, Activation::Relu, Activation::Linear, &mut rng);
        let opt_encoder = Adam::new(AdamConfig::with_lr(lr), &encoder);
        let opt_decoder = Adam::new(AdamConfig::with_lr(lr), &decoder);
        Self {
            encoder,
            decoder,
            opt_encoder,
            opt_decoder,
            rng,
            global_step: 0,
        }
    }

    /// Denoising training pass. Returns the mean reconstruction MSE per
    /// epoch (computed on the corrupted inputs seen during training).
    pub fn train(
        &mut self,
        data: &[Array1<f64>],
        cfg: &AeTrainConfig,
    ) -> Result<Vec<f64>, MlError> {
        if data.is_empty() {
            return Err(MlError::EmptyDataset);
        }
        for x in data {
            if x.len() != OBS_DIM {
                return Err(MlError::Shape(format!(
                    "sample dim {} != {OBS_DIM}",
                    x.len()
                )));
            }
        }
        self.opt_encoder.cfg.lr = cfg.lr;
        self.opt_decoder.cfg.lr = cfg.lr;
        let mut epoch_losses = Vec::with_capacity(cfg.epochs);
        let mut order: Vec<usize> = (0..data.len()).collect();
        for _ in 0..cfg.epochs {
            // Fisher-Yates from the agent RNG keeps runs reproducible.
            for i in (1..order.len()).rev() {
                let j = self.rng.random_range(0..=i);
                order.swap(i, j);
            }
            let mut loss_sum = 0.0;
            let mut seen = 0usize;
            for batch in order.chunks(cfg.batch_size) {
                let mut grads_enc = NetGrads::zeros_like(&self.encoder);
                let mut grads_dec = NetGrads::zeros_like(&self.decoder);
                for &idx in batch {
                    let clean = &data[idx];
                    let corrupted = if cfg.mask_prob > 0.0 {
                        clean.mapv(|v| {
                            if self.rng.random::<f64>() < cfg.mask_prob {
                                0.0
                            } else {
                                v
                            }
                        })
                    } else {
                        clean.clone()
                    };
                    let enc_trace = self.encoder.forward_trace(&corrupted)?;
                    let dec_trace = self.decoder.forward_trace(enc_trace.output())?;
                    let recon = dec_trace.output();
                    let err = recon - clean;
                    loss_sum += err.dot(&err) / OBS_DIM as f64;
                    seen += 1;
                    // d(MSE)/d(recon)
                    let upstream = err.mapv(|e| 2.0 * e / OBS_DIM as f64);
                    let (g_dec, g_latent) =
                        self.decoder.backward_with_input_grad(&dec_trace, &upstream);
                    let g_enc = self.encoder.backward(&enc_trace, &g_latent);
                    grads_dec.add_assign(&g_dec);
                    grads_enc.add_assign(&g_enc);
                }
                let scale = 1.0 / batch.len() as f64;
                grads_enc.scale(scale);
                grads_dec.scale(scale);
                self.opt_encoder.step(&mut self.encoder, &grads_enc);
                self.opt_decoder.step(&mut self.decoder, &grads_dec);
                self.global_step += 1;
            }
            epoch_losses.push(loss_sum / seen as f64);
        }
        Ok(epoch_losses)
    }

    /// Deterministic encoding of a normalized observation window.
    pub fn encode(&self, obs: &Observation) -> LatentState {
        let latent = self
            .encoder
            .forward(&obs.flatten())
            .expect("observation dims are fixed");
        LatentState(latent)
    }

    pub fn reconstruct(&self, obs: &Observation) -> Array1<f64> {
        let latent = self.encode(obs);
        self.decoder
            .forward(&latent.0)
            .expect("latent dims are fixed")
    }

    /// Mean reconstruction MSE over a held-out set, without corruption.
    pub fn evaluate(&self, data: &[Array1<f64>]) -> f64 {
        let mut sum = 0.0;
        for x in data {
            let latent = self.encoder.forward(x).expect("dims");
            let recon = self.decoder.forward(&latent).expect("dims");
            let err = &recon - x;
            sum += err.dot(&err) / OBS_DIM as f64;
        }
        sum / data.len() as f64
    }
}
