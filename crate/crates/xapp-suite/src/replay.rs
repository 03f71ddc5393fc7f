//! Offline training environment: replays collected windows indexed by the
//! control profile that produced them. Exploring action `a` jumps to a
//! randomly selected window recorded under `a` on the episode's base
//! station, mirroring training on dataset instances where the network
//! reached the state resulting from the explored action.

use std::collections::HashMap;
use std::sync::Arc;

use data_factory::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalogue::ActionCatalogue;
use crate::reward::{aggregate as aggregate_records, WindowAggregate};
use crate::XappError;

#[derive(Debug, Clone, Copy)]
pub struct ReplayConfig {
    /// Steps per episode; a fresh base station is drawn per episode.
    pub episode_len: usize,
    /// Minimum windows a catalogue action needs across the dataset.
    pub min_windows_per_action: usize,
}

impl Default for ReplayConfig {
    fn default() -> Self {
        Self {
            episode_len: 32,
            min_windows_per_action: 4,
        }
    }
}

/// Profile-indexed window store plus episode state. The trace store is
/// shared, so forking workers is cheap.
#[derive(Clone)]
pub struct ReplayEnv {
    cfg: ReplayConfig,
    /// (bs index, action index) -> windows observed under that action.
    traces: Arc<HashMap<(usize, usize), Vec<WindowAggregate>>>,
    bs_ids: Vec<u32>,
    n_actions: usize,
    rng: ChaCha8Rng,
    episode_bs: usize,
    steps_in_episode: usize,
}

/// Rebuilds reporting windows from dataset rows and groups them by
/// (bs_id, catalogue action), time-ordered within each group. Rows of one
/// report share (bs, timestamp, context); the context is part of the key
/// because paired collection runs restart the clock per action. Windows
/// under profiles outside the catalogue are skipped.
pub fn dataset_windows(
    ds: &Dataset,
    catalogue: &ActionCatalogue,
) -> HashMap<(u32, usize), Vec<WindowAggregate>> {
    let mut groups: HashMap<(u32, usize, u64), Vec<usize>> = HashMap::new();
    for (i, row) in ds.rows().iter().enumerate() {
        let Some(action) = catalogue.index_of(&row.ctx.slicing, &row.ctx.scheduling) else {
            continue;
        };
        groups
            .entry((row.record.bs_id, action, row.record.timestamp_ms))
            .or_default()
            .push(i);
    }
    let mut keys: Vec<(u32, usize, u64)> = groups.keys().copied().collect();
    keys.sort_unstable();
    let mut out: HashMap<(u32, usize), Vec<WindowAggregate>> = HashMap::new();
    for key in keys {
        let rows: Vec<sim_core::KpmRecord> = groups[&key]
            .iter()
            .map(|&i| ds.rows()[i].record.clone())
            .collect();
        out.entry((key.0, key.1))
            .or_default()
            .push(aggregate_records(&rows));
    }
    out
}

impl ReplayEnv {
    /// Groups the dataset into per-(bs, action) window lists and verifies
    /// coverage of the whole catalogue; the error lists every gap.
    pub fn from_dataset(
        ds: &Dataset,
        catalogue: &ActionCatalogue,
        cfg: ReplayConfig,
        seed: u64,
    ) -> Result<Self, XappError> {
        let grouped = dataset_windows(ds, catalogue);
        let mut bs_ids: Vec<u32> = grouped.keys().map(|&(bs, _)| bs).collect();
        bs_ids.sort_unstable();
        bs_ids.dedup();
        let mut traces: HashMap<(usize, usize), Vec<WindowAggregate>> = HashMap::new();
        for ((bs, action), windows) in grouped {
            let bs_idx = bs_ids.iter().position(|&b| b == bs).unwrap();
            traces.insert((bs_idx, action), windows);
        }

        let mut gaps = Vec::new();
        for action in 0..catalogue.len() {
            let total: usize = (0..bs_ids.len())
                .map(|b| traces.get(&(b, action)).map(Vec::len).unwrap_or(0))
                .sum();
            if total < cfg.min_windows_per_action {
                let (s, p) = catalogue.get(action).unwrap();
                gaps.push(format!("action {action} = {s}x{p}: {total} windows"));
            }
        }
        if !gaps.is_empty() {
            return Err(XappError::Coverage(gaps.join("; ")));
        }
        Ok(Self {
            cfg,
            traces: Arc::new(traces),
            bs_ids,
            n_actions: catalogue.len(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            episode_bs: 0,
            steps_in_episode: 0,
        })
    }

    /// An independent copy sharing the trace store, reseeded for a worker.
    pub fn fork(&self, seed: u64) -> Self {
        let mut env = self.clone();
        env.rng = ChaCha8Rng::seed_from_u64(seed);
        env.episode_bs = 0;
        env.steps_in_episode = 0;
        env
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn bs_count(&self) -> usize {
        self.bs_ids.len()
    }

    /// Starts a new episode on a randomly drawn base station.
    pub fn reset(&mut self) {
        self.episode_bs = self.rng.random_range(0..self.bs_ids.len());
        self.steps_in_episode = 0;
    }

    /// Applies an action: returns a window recorded under that action on
    /// the episode's base station (falling back to any base station when
    /// the pair is missing), plus the episode-done flag.
    pub fn step(&mut self, action: usize) -> (WindowAggregate, bool) {
        let list = self
            .traces
            .get(&(self.episode_bs, action))
            .filter(|l| !l.is_empty())
            .or_else(|| {
                (0..self.bs_ids.len()).find_map(|b| {
                    self.traces.get(&(b, action)).filter(|l| !l.is_empty())
                })
            })
            .expect("coverage validated at construction");
        let window = list[self.rng.random_range(0..list.len())];
        self.steps_in_episode += 1;
        let done = self.steps_in_episode >= self.cfg.episode_len;
        (window, done)
    }
}
