//! xApp configuration file schema (TOML on disk; parsing lives with the
//! CLI). Everything is optional: the variant picks defaults, the catalogue
//! and reward references can be overridden per deployment.

use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use crate::catalogue::{ActionCatalogue, ActionSpec};
use crate::reward::RewardSpec;
use crate::XappError;

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct XappFileConfig {
    /// drl-base | drl-reduced-actions | drl-no-autoencoder | sched
    pub variant: Option<String>,
    pub checkpoint: Option<PathBuf>,
    /// Full catalogue override.
    pub catalogue: Option<Vec<ActionSpec>>,
    pub reward: Option<RewardOverride>,
    pub online: Option<OnlineFileConfig>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct RewardOverride {
    pub rate_ref: Option<f64>,
    pub tbs_ref: Option<f64>,
    pub buf_ref: Option<f64>,
    pub weights: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct OnlineFileConfig {
    pub rollout_len: Option<usize>,
    pub checkpoint_every_updates: Option<u64>,
    pub plateau_window: Option<usize>,
    pub plateau_slope: Option<f64>,
    pub min_updates: Option<u64>,
}

impl XappFileConfig {
    pub fn catalogue(&self, total_prbs: u16) -> Result<ActionCatalogue, XappError> {
        match &self.catalogue {
            Some(specs) => ActionCatalogue::from_specs(specs, total_prbs),
            None => Ok(ActionCatalogue::default_50()),
        }
    }

    pub fn reward_spec(&self, base: RewardSpec) -> RewardSpec {
        let mut spec = base;
        if let Some(o) = &self.reward {
            if let Some(v) = o.rate_ref {
                spec.rate_ref = v;
            }
            if let Some(v) = o.tbs_ref {
                spec.tbs_ref = v;
            }
            if let Some(v) = o.buf_ref {
                spec.buf_ref = v;
            }
            if let Some(w) = o.weights {
                spec.weights = w;
            }
        }
        spec
    }

    pub fn online_config(&self, base: crate::online::OnlineConfig) -> crate::online::OnlineConfig {
        let mut cfg = base;
        if let Some(o) = &self.online {
            if let Some(v) = o.rollout_len {
                cfg.rollout_len = v;
            }
            if let Some(v) = o.checkpoint_every_updates {
                cfg.checkpoint_every_updates = v;
            }
            if let Some(v) = o.plateau_window {
                cfg.plateau_window = v;
            }
            if let Some(v) = o.plateau_slope {
                cfg.plateau_slope = v;
            }
            if let Some(v) = o.min_updates {
                cfg.min_updates = v;
            }
        }
        if let Some(path) = &self.checkpoint {
            cfg.checkpoint_path = Some(path.clone());
        }
        cfg
    }
}
