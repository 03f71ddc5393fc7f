//! Self-contained numeric kernel: dense networks with analytic backprop,
//! Adam, a denoising autoencoder for KPM windows, and PPO actor-critic
//! training with bit-exact checkpoint/resume.

pub mod adam;
pub mod autoencoder;
pub mod checkpoint;
pub mod net;
pub mod obs;
pub mod plateau;
pub mod ppo;

pub use adam::{Adam, AdamConfig, StepOutcome};
pub use autoencoder::{AeTrainConfig, Autoencoder, ENCODER_DIMS};
pub use checkpoint::{Container, ModelBundle, RngSnapshot};
pub use net::{softmax, Activation, DenseNet, ForwardTrace, NetGrads};
pub use obs::{LatentState, Observation, LATENT_DIM, N_METRICS, OBS_DIM, T_WINDOW};
pub use plateau::PlateauDetector;
pub use ppo::{
    entropy_of, ActionMode, PpoAgent, PpoConfig, PpoLosses, TrajectoryBuffer, Transition,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MlError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("buffer collected under policy version {buffer}, agent is at {current}")]
    StalePolicy { buffer: u64, current: u64 },
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error("io error: {0}")]
    Io(String),
}
