//! Running schedulers over an erasure channel until every device completes.

use rand::Rng;

use crate::error::{Error, Result};
use crate::metrics::{DeviceMetrics, Metrics, Reception, RoundEvent};
use crate::net::{NetworkState, TransmissionPlan};
use crate::scheduler::{self, SchedulerKind, SchedulerOptions};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EpisodeOptions {
    /// Round cap; `None` means `100 * (F + U)`.
    pub round_cap: Option<u64>,
    /// Keep every round's plan in the result.
    pub log_plans: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeResult {
    /// Rounds until the last device completed.
    pub completion_time: u64,
    pub devices: Vec<DeviceMetrics>,
    /// Plans in round order (empty unless logging was requested).
    pub plans: Vec<TransmissionPlan>,
}

/// Transmits `plan` once. Each device hearing exactly one transmitter loses
/// it independently with that link's erasure probability; delivered
/// decodable combinations are applied. Returns the per-device events.
pub fn run_round<R: Rng>(
    state: &mut NetworkState,
    metrics: &mut Metrics,
    plan: &TransmissionPlan,
    rng: &mut R,
) -> Result<Vec<Option<RoundEvent>>> {
    plan.validate(state)?;
    let hearing = state.hearing_sets(plan);
    let wanting = state.wanting_devices();
    let mut outcomes = vec![None; state.num_devices()];
    for u in wanting.iter() {
        if let Some(i) = hearing.heard_from[u] {
            let eps = state.entry_erasure(&plan.entries[i], u);
            outcomes[u] = Some(if rng.gen::<f64>() < eps { Reception::Erased } else { Reception::Delivered });
        }
    }
    let events = metrics.record_round(state, plan, &hearing, &outcomes)?;
    for (u, e) in events.iter().enumerate() {
        if *e == Some(RoundEvent::Decoded) {
            let i = hearing.heard_from[u].expect("decoders hear one transmitter");
            state.apply_reception(u, &plan.entries[i].combination)?;
        }
    }
    state.advance_round();
    if !state.is_complete() && !state.progress_possible() {
        return Err(Error::Invariant("no link can make progress".into()));
    }
    Ok(events)
}

pub fn run_episode<R: Rng>(
    state: NetworkState,
    kind: SchedulerKind,
    sched: &SchedulerOptions,
    opts: &EpisodeOptions,
    rng: &mut R,
) -> Result<EpisodeResult> {
    run_episode_with_hook(state, kind, sched, opts, rng, |_, _, _| Ok(()))
}

/// Like [`run_episode`], calling `hook` with the state, metrics and chosen
/// plan before every round is transmitted.
pub fn run_episode_with_hook<R: Rng>(
    mut state: NetworkState,
    kind: SchedulerKind,
    sched: &SchedulerOptions,
    opts: &EpisodeOptions,
    rng: &mut R,
    mut hook: impl FnMut(&NetworkState, &Metrics, &TransmissionPlan) -> Result<()>,
) -> Result<EpisodeResult> {
    let cap = opts.round_cap.unwrap_or(100 * (state.num_files() + state.num_devices()) as u64);
    let mut metrics = Metrics::new(&state)?;
    let mut plans = Vec::new();
    while !state.is_complete() {
        if state.round() >= cap {
            return Err(Error::RoundCapExceeded { cap });
        }
        let plan = scheduler::plan(kind, &state, &metrics, sched)?;
        if plan.all_targets().is_empty() {
            return Err(Error::Invariant(format!("{kind} scheduler served nobody in round {}", state.round())));
        }
        hook(&state, &metrics, &plan)?;
        run_round(&mut state, &mut metrics, &plan, rng)?;
        if opts.log_plans {
            plans.push(plan);
        }
    }
    let devices = metrics.devices().to_vec();
    if let Some(u) = devices.iter().position(|d| !d.completion_identity_holds()) {
        return Err(Error::Invariant(format!("device {u} breaks demand + delay + erasures = completion")));
    }
    let completion_time = devices.iter().filter_map(|d| d.completion_round).max().unwrap_or(0);
    Ok(EpisodeResult { completion_time, devices, plans })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::IdSet;
    use crate::sim::fixture;
    use crate::sim::topology::generate_instance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixture_walkthrough_delays() {
        let mut s = fixture::figure_one();
        let mut m = Metrics::new(&s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        run_round(&mut s, &mut m, &fixture::figure_one_slot_one(), &mut rng).unwrap();
        run_round(&mut s, &mut m, &fixture::figure_one_slot_two(), &mut rng).unwrap();
        assert!(s.is_complete());
        let delays: Vec<u64> = m.devices().iter().map(|d| d.decoding_delay).collect();
        assert_eq!(delays, vec![1, 1, 0, 0, 1, 0, 0]);
        assert!(m.devices().iter().all(|d| d.completion_identity_holds()));
        assert_eq!(m.device(0).completion_round, Some(2));
        assert_eq!(m.device(5).completion_round, Some(1));
    }

    #[test]
    fn complete_start_takes_no_rounds() {
        let conn = vec![vec![true; 2]; 2];
        let s = NetworkState::new(&conn, vec![vec![0.0, 0.1], vec![0.1, 0.0]], vec![IdSet::full(1); 2], 1).unwrap();
        let r = run_episode(s, SchedulerKind::General, &SchedulerOptions::default(), &EpisodeOptions::default(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(r.completion_time, 0);
    }

    #[test]
    fn one_lossless_file_takes_one_round() {
        let conn = vec![vec![true; 2]; 2];
        let s = NetworkState::new(&conn, vec![vec![0.0; 2]; 2], vec![IdSet::full(1), IdSet::new()], 1).unwrap();
        for k in SchedulerKind::ALL {
            let r = run_episode(s.clone(), k, &SchedulerOptions::default(), &EpisodeOptions::default(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
            assert_eq!(r.completion_time, 1, "{k}");
        }
    }

    #[test]
    fn episodes_are_reproducible_and_bounded_below() {
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = generate_instance(12, 6, 0.4, 0.2, 0.05, &mut rng).unwrap();
            let demand = (0..12).map(|u| s.wants(u).len() as u64).max().unwrap();
            for k in SchedulerKind::ALL {
                let opts = EpisodeOptions { log_plans: true, ..Default::default() };
                let a = run_episode(s.clone(), k, &SchedulerOptions::default(), &opts, &mut ChaCha8Rng::seed_from_u64(seed + 100)).unwrap();
                let b = run_episode(s.clone(), k, &SchedulerOptions::default(), &opts, &mut ChaCha8Rng::seed_from_u64(seed + 100)).unwrap();
                assert_eq!(a, b);
                assert!(a.completion_time >= demand);
                assert_eq!(a.plans.len() as u64, a.completion_time);
            }
        }
    }

    #[test]
    fn round_cap_is_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = generate_instance(8, 6, 0.5, 0.3, 0.0, &mut rng).unwrap();
        let opts = EpisodeOptions { round_cap: Some(1), log_plans: false };
        let r = run_episode(s, SchedulerKind::CollisionFree, &SchedulerOptions::default(), &opts, &mut rng);
        assert!(matches!(r, Err(Error::RoundCapExceeded { cap: 1 })));
    }
}
