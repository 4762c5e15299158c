//! Random instances, erasure-channel episodes and parameter sweeps.

pub mod config;
pub mod episode;
pub mod fixture;
pub mod sweep;
pub mod topology;

pub use config::{ExperimentConfig, SweepParam, SweepSpec};
pub use episode::{run_episode, run_episode_with_hook, run_round, EpisodeOptions, EpisodeResult};
pub use sweep::{run_sweep, write_csv, PointResult, SweepResult, SweepRow};
pub use topology::{generate_erasures, generate_instance, generate_topology, initialize_holdings};
