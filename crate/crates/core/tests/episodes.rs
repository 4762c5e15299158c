use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use idnc_core::scheduler::{decide, SchedulerKind, SchedulerOptions};
use idnc_core::sim::topology::min_connectivity;
use idnc_core::sim::{generate_instance, run_episode_with_hook, run_sweep, write_csv, EpisodeOptions, ExperimentConfig};
use idnc_core::verify::plan_objective;
use idnc_core::Metrics;

fn network(u: usize, f: usize, c: f64, e: f64, seed: u64) -> idnc_core::NetworkState {
    let c = c.max(min_connectivity(u));
    generate_instance(u, f, c, e, 0.05, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_round_is_valid_and_every_device_finishes(
        u in 3usize..14,
        f in 1usize..8,
        c in 0.2f64..1.0,
        e in 0.05f64..0.4,
        seed in any::<u64>(),
        k in 0usize..4,
    ) {
        let kind = SchedulerKind::ALL[k];
        let state = network(u, f, c, e, seed);
        let opts = SchedulerOptions::default();
        let mut rounds = 0u64;
        let r = run_episode_with_hook(
            state,
            kind,
            &opts,
            &EpisodeOptions::default(),
            &mut ChaCha8Rng::seed_from_u64(seed ^ 1),
            |s, _, plan| {
                rounds += 1;
                plan.validate(s)?;
                assert!(!plan.all_targets().is_empty());
                Ok(())
            },
        )
        .unwrap();
        prop_assert_eq!(r.completion_time, rounds);
        for d in &r.devices {
            let done = d.completion_round.expect("device finished");
            prop_assert_eq!(done, d.initial_demand as u64 + d.decoding_delay + d.erasure_count);
            prop_assert!(done <= r.completion_time);
        }
    }

    #[test]
    fn richer_schedulers_never_score_worse(
        u in 3usize..12,
        f in 1usize..6,
        c in 0.2f64..0.8,
        seed in any::<u64>(),
    ) {
        let state = network(u, f, c, 0.2, seed);
        let metrics = Metrics::new(&state).unwrap();
        let critical = metrics.critical_set(&state);
        let opts = SchedulerOptions::default();
        let score = |k| plan_objective(&state, &critical, &decide(k, &state, &metrics, &opts).unwrap().plan);
        let (g, c, s) = (score(SchedulerKind::General), score(SchedulerKind::CollisionFree), score(SchedulerKind::SingleTransmitter));
        prop_assert!(g >= c - 1e-9 && c >= s - 1e-9, "{} {} {}", g, c, s);
    }
}

#[test]
fn sweeps_are_reproducible_and_thread_independent() {
    let cfg: ExperimentConfig = ExperimentConfig::from_toml_str(
        r#"
num_devices = 14
num_files = 6
connectivity = 0.3
iterations = 4
seed = 8
schedulers = ["general", "collision_free", "single_transmitter", "pmp"]

[sweep]
param = "files"
values = [3, 6]
"#,
    )
    .unwrap();
    let csv = |threads| {
        let mut out = Vec::new();
        write_csv(&run_sweep(&ExperimentConfig { threads, ..cfg.clone() }).unwrap().rows(), &mut out).unwrap();
        out
    };
    let one = csv(1);
    assert_eq!(one, csv(1));
    assert_eq!(one, csv(4));
    assert_eq!(String::from_utf8(one).unwrap().lines().count(), 1 + 2 * 4);
}

#[test]
fn a_complete_lossless_network_finishes_in_two_rounds() {
    // Device u misses only file u. One transmitter can serve the other three
    // with a single XOR, but it cannot receive in the same round.
    let conn = vec![vec![true; 4]; 4];
    let erasures = vec![vec![0.0; 4]; 4];
    let has: Vec<idnc_core::IdSet> = (0..4).map(|u| (0..4).filter(|&f| f != u).collect()).collect();
    let state = idnc_core::NetworkState::new(&conn, erasures, has, 4).unwrap();
    let r = idnc_core::sim::run_episode(
        state,
        SchedulerKind::CollisionFree,
        &SchedulerOptions::default(),
        &EpisodeOptions::default(),
        &mut ChaCha8Rng::seed_from_u64(0),
    )
    .unwrap();
    assert_eq!(r.completion_time, 2);
}
