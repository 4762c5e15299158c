//! Parameter sweeps: many seeded episodes per sweep point and scheduler.
//!
//! Every (sweep point, iteration) pair gets its own instance, shared by all
//! schedulers so their completion times can be compared pairwise, and its
//! own channel randomness. Both streams derive from the master seed alone,
//! so results do not depend on the thread count.

use std::io::Write;
use std::thread;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::Metrics;
use crate::net::{NetworkState, TransmissionPlan};
use crate::scheduler::SchedulerKind;
use crate::sim::config::{ExperimentConfig, SweepParam};
use crate::sim::episode::{run_episode_with_hook, EpisodeOptions, EpisodeResult};
use crate::sim::topology::generate_instance;

/// Instance and channel generators for one episode.
pub fn episode_rngs(seed: u64, sweep_index: usize, iteration: usize) -> (ChaCha8Rng, ChaCha8Rng) {
    let key = ((sweep_index as u64) << 32 | iteration as u64) << 1;
    let mut instance = ChaCha8Rng::seed_from_u64(seed);
    instance.set_stream(key);
    let mut channel = ChaCha8Rng::seed_from_u64(seed);
    channel.set_stream(key | 1);
    (instance, channel)
}

/// The instance every scheduler sees at `(sweep_index, iteration)`.
pub fn instance(cfg: &ExperimentConfig, sweep_index: usize, iteration: usize) -> Result<NetworkState> {
    let (mut rng, _) = episode_rngs(cfg.seed, sweep_index, iteration);
    generate_instance(cfg.num_devices, cfg.num_files, cfg.connectivity, cfg.mean_erasure, cfg.erasure_jitter, &mut rng)
}

/// Runs one episode of a sweep point. `cfg` is the point's configuration
/// (see [`ExperimentConfig::at`]).
pub fn run_point_episode(
    cfg: &ExperimentConfig,
    sweep_index: usize,
    iteration: usize,
    kind: SchedulerKind,
    hook: impl FnMut(&NetworkState, &Metrics, &TransmissionPlan) -> Result<()>,
) -> Result<EpisodeResult> {
    let mut state = instance(cfg, sweep_index, iteration)?;
    if cfg.baseline_complete_overlay && kind == SchedulerKind::SingleTransmitter {
        state = state.with_complete_topology();
    }
    let (_, mut channel) = episode_rngs(cfg.seed, sweep_index, iteration);
    run_episode_with_hook(state, kind, &cfg.scheduler_options(), &EpisodeOptions::default(), &mut channel, hook)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointResult {
    pub value: f64,
    /// Completion time per iteration, for each scheduler of the config.
    pub completions: Vec<(SchedulerKind, Vec<u64>)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub param: SweepParam,
    pub seed: u64,
    pub points: Vec<PointResult>,
}

/// One aggregated CSV row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub sweep_param: String,
    pub sweep_value: f64,
    pub scheduler: String,
    pub mean_completion: f64,
    pub stderr: f64,
    pub iterations: usize,
    pub seed: u64,
}

/// One per-episode CSV row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpisodeRow {
    pub sweep_param: String,
    pub sweep_value: f64,
    pub scheduler: String,
    pub iteration: usize,
    pub completion_time: u64,
    pub seed: u64,
}

/// Mean and standard error of the mean.
pub fn mean_stderr(xs: &[u64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().map(|&x| x as f64).sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

impl SweepResult {
    pub fn rows(&self) -> Vec<SweepRow> {
        let mut rows = Vec::new();
        for p in &self.points {
            for (kind, times) in &p.completions {
                let (mean, stderr) = mean_stderr(times);
                rows.push(SweepRow {
                    sweep_param: self.param.to_string(),
                    sweep_value: p.value,
                    scheduler: kind.to_string(),
                    mean_completion: mean,
                    stderr,
                    iterations: times.len(),
                    seed: self.seed,
                });
            }
        }
        rows
    }

    pub fn episode_rows(&self) -> Vec<EpisodeRow> {
        let mut rows = Vec::new();
        for p in &self.points {
            for (kind, times) in &p.completions {
                for (iteration, &t) in times.iter().enumerate() {
                    rows.push(EpisodeRow {
                        sweep_param: self.param.to_string(),
                        sweep_value: p.value,
                        scheduler: kind.to_string(),
                        iteration,
                        completion_time: t,
                        seed: self.seed,
                    });
                }
            }
        }
        rows
    }
}

/// `f` over every job on `threads` workers (0 uses every core), results in
/// job order.
pub fn map_jobs<J: Sync, T: Send>(threads: usize, jobs: &[J], f: impl Fn(&J) -> T + Sync) -> Vec<T> {
    let threads = match threads {
        0 => thread::available_parallelism().map_or(1, |n| n.get()),
        n => n,
    }
    .min(jobs.len().max(1));
    if threads <= 1 {
        return jobs.iter().map(f).collect();
    }
    let mut slots: Vec<Option<T>> = (0..jobs.len()).map(|_| None).collect();
    thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let f = &f;
                scope.spawn(move || (t..jobs.len()).step_by(threads).map(|j| (j, f(&jobs[j]))).collect::<Vec<_>>())
            })
            .collect();
        for h in handles {
            for (j, r) in h.join().expect("worker panicked") {
                slots[j] = Some(r);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("every job ran")).collect()
}

/// Runs every (point, scheduler, iteration) episode of `cfg`.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let (param, values) = cfg.points();
    let points: Vec<ExperimentConfig> = values.iter().map(|&v| cfg.at(param, v)).collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize, SchedulerKind)> = (0..points.len())
        .flat_map(|p| cfg.schedulers.iter().flat_map(move |&k| (0..cfg.iterations).map(move |i| (p, i, k))))
        .collect();
    let run = |&(p, i, k): &(usize, usize, SchedulerKind)| {
        run_point_episode(&points[p], p, i, k, |_, _, _| Ok(())).map(|r| r.completion_time)
    };
    let times = map_jobs(cfg.threads, &jobs, run);
    let mut results = times.into_iter();
    let mut out = Vec::with_capacity(points.len());
    for &value in &values {
        let mut completions = Vec::new();
        for &k in &cfg.schedulers {
            let ts = results.by_ref().take(cfg.iterations).collect::<Result<Vec<u64>>>()?;
            completions.push((k, ts));
        }
        out.push(PointResult { value, completions });
    }
    Ok(SweepResult { param, seed: cfg.seed, points: out })
}

fn write_rows<T: Serialize>(rows: &[T], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(Error::from)
}

/// Aggregated rows as CSV with a header line.
pub fn write_csv(rows: &[SweepRow], out: impl Write) -> Result<()> {
    write_rows(rows, out)
}

/// Per-episode rows as CSV with a header line.
pub fn write_episode_csv(rows: &[EpisodeRow], out: impl Write) -> Result<()> {
    write_rows(rows, out)
}
