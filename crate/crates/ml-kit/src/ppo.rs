//! Proximal policy optimization, actor-critic, discrete actions.
//!
//! The actor is a softmax policy over the action catalogue, the critic a
//! scalar value head. Updates use the clipped surrogate objective with
//! generalized advantage estimation; the entropy regularization term is
//! reported per update as the convergence signal. Gradients of the policy
//! and entropy terms are taken with respect to the logits and enter the
//! network through [`DenseNet::backward_pre_activation`].

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adam::{Adam, AdamConfig, StepOutcome};
use crate::net::{Activation, DenseNet, NetGrads};
use crate::MlError;

/// Width and depth of the actor/critic hidden stack.
pub const HIDDEN_WIDTH: usize = 30;
pub const HIDDEN_LAYERS: usize = 5;

/// Probability floor inside logarithms.
const MIN_PROB: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpoConfig {
    pub clip_eps: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub epochs: usize,
    pub minibatch: usize,
    pub lr: f64,
    pub normalize_advantages: bool,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            clip_eps: 0.2,
            gamma: 0.99,
            gae_lambda: 0.95,
            entropy_coef: 0.01,
            value_coef: 0.5,
            epochs: 4,
            minibatch: 64,
            lr: 0.001,
            normalize_advantages: true,
        }
    }
}

/// Action selection mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionMode {
    /// Sample from the softmax policy.
    Explore,
    /// Argmax, ties broken by the lowest action index.
    Greedy,
}

/// One step of experience.
#[derive(Debug, Clone)]
pub struct Transition {
    pub state: Array1<f64>,
    pub action: usize,
    pub log_prob: f64,
    pub reward: f64,
    pub value: f64,
    pub done: bool,
}

/// On-policy experience buffer, tagged with the policy version it was
/// collected under. Updates drain it; stale buffers are rejected.
#[derive(Debug, Clone, Default)]
pub struct TrajectoryBuffer {
    transitions: Vec<Transition>,
    policy_version: u64,
}

impl TrajectoryBuffer {
    pub fn new(policy_version: u64) -> Self {
        Self {
            transitions: Vec::new(),
            policy_version,
        }
    }

    pub fn push(&mut self, t: Transition) {
        self.transitions.push(t);
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn policy_version(&self) -> u64 {
        self.policy_version
    }

    pub fn mean_reward(&self) -> f64 {
        if self.transitions.is_empty() {
            return 0.0;
        }
        self.transitions.iter().map(|t| t.reward).sum::<f64>() / self.transitions.len() as f64
    }

    /// Merges worker-collected segments in order; all segments must share
    /// the policy version.
    pub fn merge(segments: Vec<TrajectoryBuffer>) -> Result<TrajectoryBuffer, MlError> {
        let mut it = segments.into_iter();
        let mut out = it.next().ok_or(MlError::EmptyDataset)?;
        for seg in it {
            if seg.policy_version != out.policy_version {
                return Err(MlError::StalePolicy {
                    buffer: seg.policy_version,
                    current: out.policy_version,
                });
            }
            out.transitions.extend(seg.transitions);
        }
        Ok(out)
    }
}

/// Losses reported by one update. `entropy` is the entropy regularization
/// loss `-entropy_coef * H(pi)` averaged over the batch; its magnitude
/// shrinking toward zero signals convergence to a peaked policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpoLosses {
    pub policy: f64,
    pub value: f64,
    pub entropy: f64,
}

#[derive(Debug, Clone)]
pub struct PpoAgent {
    pub actor: DenseNet,
    pub critic: DenseNet,
    pub opt_actor: Adam,
    pub opt_critic: Adam,
    pub cfg: PpoConfig,
    pub rng: ChaCha8Rng,
    pub global_step: u64,
    pub policy_version: u64,
    /// Updates skipped because a gradient went non-finite.
    pub skipped_steps: u64,
}

impl PpoAgent {
    /// Actor: obs -> 5x30 tanh -> softmax over `n_actions`.
    /// Critic: obs -> 5x30 tanh -> linear scalar.
    pub fn new(obs_dim: usize, n_actions: usize, cfg: PpoConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut actor_dims = vec![obs_dim];
        actor_dims.extend(std::iter::repeat_n(HIDDEN_WIDTH, HIDDEN_LAYERS));
        actor_dims.push(n_actions);
        let mut critic_dims = vec![obs_dim];
        critic_dims.extend(std::iter::repeat_n(HIDDEN_WIDTH, HIDDEN_LAYERS));
        critic_dims.push(1);
        let actor = DenseNet::new(&actor_dims, Activation::Tanh, Activation::Softmax, &mut rng);
        let critic = DenseNet::new(&critic_dims, Activation::Tanh, Activation::Linear, &mut rng);
        let opt_actor = Adam::new(AdamConfig::with_lr(cfg.lr), &actor);
        let opt_critic = Adam::new(AdamConfig::with_lr(cfg.lr), &critic);
        Self {
            actor,
            critic,
            opt_actor,
            opt_critic,
            cfg,
            rng,
            global_step: 0,
            policy_version: 0,
            skipped_steps: 0,
        }
    }

    pub fn n_actions(&self) -> usize {
        self.actor.output_dim()
    }

    pub fn obs_dim(&self) -> usize {
        self.actor.input_dim()
    }

    /// Softmax policy at a state.
    pub fn policy(&self, state: &Array1<f64>) -> Result<Array1<f64>, MlError> {
        self.actor.forward(state)
    }

    pub fn value(&self, state: &Array1<f64>) -> Result<f64, MlError> {
        Ok(self.critic.forward(state)?[0])
    }

    /// Picks an action and returns its log-probability under the current
    /// policy.
    pub fn select_action(
        &mut self,
        state: &Array1<f64>,
        mode: ActionMode,
    ) -> Result<(usize, f64), MlError> {
        let probs = self.actor.forward(state)?;
        let idx = match mode {
            ActionMode::Greedy => argmax(&probs),
            ActionMode::Explore => {
                let u: f64 = self.rng.random();
                let mut acc = 0.0;
                let mut chosen = probs.len() - 1;
                for (i, &p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        chosen = i;
                        break;
                    }
                }
                chosen
            }
        };
        Ok((idx, probs[idx].max(MIN_PROB).ln()))
    }

    pub fn new_buffer(&self) -> TrajectoryBuffer {
        TrajectoryBuffer::new(self.policy_version)
    }

    /// Clipped-surrogate PPO update over the buffer. `bootstrap_value` is
    /// V(s_next) for the final transition when the trajectory was truncated
    /// rather than terminated. The buffer is drained on success.
    pub fn update(
        &mut self,
        buffer: &mut TrajectoryBuffer,
        bootstrap_value: f64,
    ) -> Result<PpoLosses, MlError> {
        if buffer.is_empty() {
            return Err(MlError::EmptyDataset);
        }
        if buffer.policy_version != self.policy_version {
            return Err(MlError::StalePolicy {
                buffer: buffer.policy_version,
                current: self.policy_version,
            });
        }
        let transitions = std::mem::take(&mut buffer.transitions);
        let n = transitions.len();

        // Generalized advantage estimation, backward over the trajectory.
        let mut advantages = vec![0.0f64; n];
        let mut gae = 0.0;
        for t in (0..n).rev() {
            let nonterminal = if transitions[t].done { 0.0 } else { 1.0 };
            let next_value = if t + 1 < n {
                transitions[t + 1].value
            } else {
                bootstrap_value
            };
            let delta = transitions[t].reward + self.cfg.gamma * next_value * nonterminal
                - transitions[t].value;
            gae = delta + self.cfg.gamma * self.cfg.gae_lambda * nonterminal * gae;
            advantages[t] = gae;
        }
        let returns: Vec<f64> = advantages
            .iter()
            .zip(&transitions)
            .map(|(a, t)| a + t.value)
            .collect();
        if self.cfg.normalize_advantages {
            let mean = advantages.iter().sum::<f64>() / n as f64;
            let var = advantages.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n as f64;
            let std = var.sqrt();
            for a in advantages.iter_mut() {
                *a = (*a - mean) / (std + 1e-8);
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        let mut loss_policy = 0.0;
        let mut loss_value = 0.0;
        let mut loss_entropy = 0.0;
        let mut batches = 0usize;
        for _ in 0..self.cfg.epochs {
            for i in (1..order.len()).rev() {
                let j = self.rng.random_range(0..=i);
                order.swap(i, j);
            }
            for batch in order.chunks(self.cfg.minibatch) {
                let mut actor_grads = NetGrads::zeros_like(&self.actor);
                let mut critic_grads = NetGrads::zeros_like(&self.critic);
                let mut batch_policy = 0.0;
                let mut batch_value = 0.0;
                let mut batch_entropy = 0.0;
                for &idx in batch {
                    let t = &transitions[idx];
                    let adv = advantages[idx];
                    let ret = returns[idx];

                    let trace = self.actor.forward_trace(&t.state)?;
                    let probs = trace.output().clone();
                    let p_a = probs[t.action].max(MIN_PROB);
                    let ratio = (p_a.ln() - t.log_prob).exp();
                    let clipped =
                        ratio.clamp(1.0 - self.cfg.clip_eps, 1.0 + self.cfg.clip_eps);
                    batch_policy += -(ratio * adv).min(clipped * adv);
                    let entropy = entropy_of(&probs);
                    batch_entropy += -self.cfg.entropy_coef * entropy;

                    // Gradient on the logits: surrogate term plus entropy
                    // regularization.
                    let surrogate_active = ratio * adv <= clipped * adv;
                    let coeff = if surrogate_active { -ratio * adv } else { 0.0 };
                    let mut dz = Array1::zeros(probs.len());
                    for j in 0..probs.len() {
                        let onehot = if j == t.action { 1.0 } else { 0.0 };
                        let mut g = coeff * (onehot - probs[j]);
                        if probs[j] > 0.0 {
                            g += self.cfg.entropy_coef
                                * probs[j]
                                * (probs[j].max(MIN_PROB).ln() + entropy);
                        }
                        dz[j] = g;
                    }
                    actor_grads.add_assign(&self.actor.backward_pre_activation(&trace, dz));

                    let vtrace = self.critic.forward_trace(&t.state)?;
                    let v = vtrace.output()[0];
                    batch_value += (v - ret) * (v - ret);
                    let dv = Array1::from(vec![self.cfg.value_coef * 2.0 * (v - ret)]);
                    critic_grads.add_assign(&self.critic.backward(&vtrace, &dv));
                }
                let scale = 1.0 / batch.len() as f64;
                actor_grads.scale(scale);
                critic_grads.scale(scale);
                if self.opt_actor.step(&mut self.actor, &actor_grads)
                    == StepOutcome::SkippedNonFinite
                {
                    self.skipped_steps += 1;
                }
                if self.opt_critic.step(&mut self.critic, &critic_grads)
                    == StepOutcome::SkippedNonFinite
                {
                    self.skipped_steps += 1;
                }
                loss_policy += batch_policy / batch.len() as f64;
                loss_value += batch_value / batch.len() as f64;
                loss_entropy += batch_entropy / batch.len() as f64;
                batches += 1;
            }
        }

        self.global_step += n as u64;
        self.policy_version += 1;
        Ok(PpoLosses {
            policy: loss_policy / batches as f64,
            value: loss_value / batches as f64,
            entropy: loss_entropy / batches as f64,
        })
    }
}

/// Shannon entropy of a distribution, zero-probability entries excluded.
pub fn entropy_of(p: &Array1<f64>) -> f64 {
    -p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.ln())
        .sum::<f64>()
}

fn argmax(p: &Array1<f64>) -> usize {
    let mut best = 0;
    for i in 1..p.len() {
        if p[i] > p[best] {
            best = i;
        }
    }
    best
}
