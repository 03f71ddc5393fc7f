use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use colctl::{
    load_scenario, run_analyze, run_collect, run_evaluate, run_train_offline, run_train_online,
    AnalyzeSpec, CollectSpec, EvaluateSpec, ExperimentError, TrainOfflineSpec, TrainOnlineSpec,
};
use sim_core::TrafficProfile;
use xapp_suite::{ActionCatalogue, AgentVariant};

/// Closed-loop RAN control experiments: dataset collection, offline and
/// online agent training, evaluation against static baselines, and KPM
/// correlation analysis.
#[derive(Parser)]
#[command(name = "colctl", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sweep the action catalogue over the scenario and record KPMs.
    Collect {
        /// Scenario TOML; omitted means the built-in default scenario.
        #[arg(long, env = "COLCTL_SCENARIO")]
        scenario: Option<PathBuf>,
        #[arg(long, env = "COLCTL_OUT")]
        out: PathBuf,
        /// Total simulated seconds across the sweep.
        #[arg(long, default_value_t = 300)]
        duration: u64,
        #[arg(long, env = "COLCTL_SEED", default_value_t = 1)]
        seed: u64,
        /// Windows discarded after each profile switch.
        #[arg(long, default_value_t = 4)]
        warmup_windows: u64,
    },
    /// Train an agent offline on a collected dataset.
    TrainOffline {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, env = "COLCTL_SCENARIO")]
        scenario: Option<PathBuf>,
        /// drl-base | drl-reduced-actions | drl-no-autoencoder
        #[arg(long, default_value = "drl-base")]
        agent: String,
        #[arg(long, env = "COLCTL_OUT")]
        out: PathBuf,
        #[arg(long, env = "COLCTL_SEED", default_value_t = 1)]
        seed: u64,
        #[arg(long, env = "COLCTL_WORKERS", default_value_t = 2)]
        workers: usize,
        #[arg(long)]
        max_updates: Option<u64>,
    },
    /// Run the adaptive agent against every static baseline.
    Evaluate {
        #[arg(long, env = "COLCTL_SCENARIO")]
        scenario: Option<PathBuf>,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value = "drl-base")]
        agent: String,
        #[arg(long, env = "COLCTL_OUT")]
        out: PathBuf,
        #[arg(long, env = "COLCTL_SEED", default_value_t = 1)]
        seed: u64,
        /// Simulated seconds per arm.
        #[arg(long, default_value_t = 300)]
        duration: u64,
    },
    /// Resume a checkpoint and keep training against a live cell.
    TrainOnline {
        #[arg(long, env = "COLCTL_SCENARIO")]
        scenario: Option<PathBuf>,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, env = "COLCTL_OUT")]
        out: PathBuf,
        #[arg(long, env = "COLCTL_SEED", default_value_t = 1)]
        seed: u64,
        /// Exploration budget in simulated seconds.
        #[arg(long, default_value_t = 600)]
        duration: u64,
        /// Traffic profile override; online training defaults to uniform.
        #[arg(long, default_value = "uniform")]
        traffic: String,
        #[arg(long, default_value_t = 128)]
        rollout: usize,
    },
    /// Correlation and feature-selection reports from a dataset.
    Analyze {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, env = "COLCTL_OUT")]
        out: PathBuf,
        /// Redundancy threshold for feature selection.
        #[arg(long, default_value_t = 0.9)]
        rho: f64,
    },
}

fn run(cli: Cli) -> Result<(), ExperimentError> {
    match cli.cmd {
        Cmd::Collect {
            scenario,
            out,
            duration,
            seed,
            warmup_windows,
        } => {
            let scenario = load_scenario(scenario.as_deref())?;
            let summary = run_collect(&CollectSpec {
                scenario,
                catalogue: ActionCatalogue::default_50(),
                out_dir: out,
                duration_s: duration,
                seed,
                warmup_windows,
            })?;
            println!(
                "collected {} rows over {} windows into {}",
                summary.rows,
                summary.windows,
                summary.dataset_path.display()
            );
        }
        Cmd::TrainOffline {
            dataset,
            scenario,
            agent,
            out,
            seed,
            workers,
            max_updates,
        } => {
            let scenario = load_scenario(scenario.as_deref())?;
            let variant = AgentVariant::from_str(&agent)
                .map_err(|e| ExperimentError::Config(e.to_string()))?;
            let summary = run_train_offline(&TrainOfflineSpec {
                dataset,
                scenario,
                variant,
                out_dir: out,
                seed,
                workers,
                max_updates,
            })?;
            println!(
                "trained {} updates (plateau: {}) -> {}",
                summary.updates,
                summary.stopped_on_plateau,
                summary.checkpoint.display()
            );
        }
        Cmd::Evaluate {
            scenario,
            checkpoint,
            agent,
            out,
            seed,
            duration,
        } => {
            let scenario = load_scenario(scenario.as_deref())?;
            let variant = AgentVariant::from_str(&agent)
                .map_err(|e| ExperimentError::Config(e.to_string()))?;
            let summary = run_evaluate(&EvaluateSpec {
                scenario,
                checkpoint,
                variant,
                out_dir: out,
                seed,
                duration_s: duration,
            })?;
            let adaptive = &summary.arms[summary.adaptive_index];
            let best_static = summary.arms[1..]
                .iter()
                .map(|a| a.mean_reward)
                .fold(f64::NEG_INFINITY, f64::max);
            println!(
                "adaptive mean reward {:.4} vs best static {:.4} over {} arms -> {}",
                adaptive.mean_reward,
                best_static,
                summary.arms.len(),
                summary.comparison_csv.display()
            );
        }
        Cmd::TrainOnline {
            scenario,
            checkpoint,
            out,
            seed,
            duration,
            traffic,
            rollout,
        } => {
            let mut scenario = load_scenario(scenario.as_deref())?;
            scenario.traffic_profile = match traffic.as_str() {
                "uniform" => TrafficProfile::Uniform,
                "slice-based" | "slice_based" => TrafficProfile::SliceBased,
                other => {
                    return Err(ExperimentError::Config(format!(
                        "unknown traffic profile '{other}'"
                    )))
                }
            };
            let summary = run_train_online(&TrainOnlineSpec {
                scenario,
                checkpoint_in: checkpoint,
                out_dir: out,
                seed,
                duration_s: duration,
                rollout_len: rollout,
                histogram_block: 200,
                post_eval_s: 300,
            })?;
            println!(
                "online training: {} updates over {} windows (plateau: {}) -> {}",
                summary.updates,
                summary.explore_windows,
                summary.stopped_on_plateau,
                summary.checkpoint_out.display()
            );
        }
        Cmd::Analyze { dataset, out, rho } => {
            if !(rho > 0.0 && rho <= 1.0) {
                return Err(ExperimentError::Config(format!(
                    "rho {rho} outside (0, 1]"
                )));
            }
            let summary = run_analyze(&AnalyzeSpec {
                dataset,
                out_dir: out,
                rho,
                slicing_filter: None,
            })?;
            for (slice, path) in summary.reports {
                println!("{slice}: {}", path.display());
            }
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("colctl: {e}");
        std::process::exit(e.exit_code());
    }
}
