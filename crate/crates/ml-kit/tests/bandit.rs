//! PPO sanity on a two-armed bandit with deterministic rewards 1 and 0.
//!
//! The optimum is known analytically (always pull arm 0), so convergence of
//! P(best) and the decay of the entropy regularization loss are hard
//! oracles for the whole PPO path.

use ml_kit::{ActionMode, PpoAgent, PpoConfig, Transition};
use ndarray::Array1;

pub const ROLLOUT: usize = 64;

/// One PPO update worth of bandit pulls; returns the entropy loss.
fn bandit_update(agent: &mut PpoAgent) -> ml_kit::PpoLosses {
    let state = Array1::from(vec![1.0]);
    let mut buf = agent.new_buffer();
    for _ in 0..ROLLOUT {
        let (action, log_prob) = agent.select_action(&state, ActionMode::Explore).unwrap();
        let value = agent.value(&state).unwrap();
        let reward = if action == 0 { 1.0 } else { 0.0 };
        buf.push(Transition {
            state: state.clone(),
            action,
            log_prob,
            reward,
            value,
            done: true,
        });
    }
    agent.update(&mut buf, 0.0).unwrap()
}

pub fn bandit_config() -> PpoConfig {
    PpoConfig {
        minibatch: 32,
        ..Default::default()
    }
}

/// Runs `updates` rounds; returns (P(best action), entropy-loss series).
pub fn train_bandit(seed: u64, updates: usize) -> (f64, Vec<f64>) {
    let mut agent = PpoAgent::new(1, 2, bandit_config(), seed);
    let mut entropy_losses = Vec::with_capacity(updates);
    for _ in 0..updates {
        let losses = bandit_update(&mut agent);
        entropy_losses.push(losses.entropy);
    }
    let p = agent.policy(&Array1::from(vec![1.0])).unwrap();
    (p[0], entropy_losses)
}

#[test]
fn bandit_converges_to_best_arm_on_five_seeds() {
    for seed in 0..5u64 {
        let (p_best, _) = train_bandit(seed, 200);
        assert!(p_best > 0.99, "seed {seed}: P(best) = {p_best}");
    }
}

#[test]
fn entropy_loss_magnitude_decays_over_smoothed_windows() {
    for seed in 0..5u64 {
        let (_, entropy_losses) = train_bandit(seed, 200);
        // Magnitude of the entropy regularization loss, smoothed over
        // 10 windows of 20 updates each.
        let mags: Vec<f64> = entropy_losses.iter().map(|v| v.abs()).collect();
        let window_means: Vec<f64> = mags
            .chunks(20)
            .map(|c| c.iter().sum::<f64>() / c.len() as f64)
            .collect();
        // Monotone up to a 10% per-window wobble: micro-oscillation at the
        // converged floor is tolerated, a genuine re-exploration bump (a
        // 10-100x jump) is not.
        for w in 1..window_means.len() {
            assert!(
                window_means[w] <= window_means[w - 1] * 1.10 + 1e-12,
                "seed {seed}: window {w} rose: {window_means:?}"
            );
        }
        assert!(
            *window_means.last().unwrap() < 0.5 * window_means[0],
            "seed {seed}: no overall decay: {window_means:?}"
        );
    }
}

#[test]
#[ignore = "hyperparameter probe, run by hand"]
fn probe_convergence_speeds() {
    for lr in [0.001, 0.002, 0.003, 0.005] {
        for epochs in [4usize, 8] {
            let mut worst = f64::INFINITY;
            for seed in 0..8u64 {
                let mut agent = PpoAgent::new(
                    1,
                    2,
                    PpoConfig {
                        minibatch: 32,
                        epochs,
                        lr,
                        ..Default::default()
                    },
                    seed,
                );
                for _ in 0..200 {
                    bandit_update(&mut agent);
                }
                let p = agent.policy(&Array1::from(vec![1.0])).unwrap()[0];
                worst = worst.min(p);
            }
            println!("lr={lr} epochs={epochs}: worst P(best) over 8 seeds = {worst:.5}");
        }
    }
}
