//! Exhaustive oracles for small instances.
//!
//! Nothing here shares code with the schedulers beyond the network model:
//! plans are enumerated directly and scored from the per-device decoding
//! delay distribution.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::IdSet;
use crate::clique::{brute_force_clique, max_weight_clique, WeightedGraph};
use crate::coop::{build_extended_graph, enumerate_clusters, CoopContext, Mode};
use crate::error::{Error, Result};
use crate::idnc_graph::link_weight;
use crate::metrics::{Layering, Metrics};
use crate::net::{DeviceId, FileCombination, NetworkState, PlanEntry, TransmissionPlan, Transmitter};
use crate::scheduler::{self, SchedulerKind, SchedulerOptions};
use crate::sim::episode::run_round;
use crate::sim::fixture;
use crate::sim::topology::{generate_erasures, generate_topology, initialize_holdings, min_connectivity};

/// Largest network the plan oracles accept.
pub const ORACLE_MAX_DEVICES: usize = 8;

/// Which transmitter sets an oracle may choose from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanClass {
    /// Every pair of transmitters has disjoint coverage on wanting devices.
    CollisionFree,
    /// Any set of transmitters.
    General,
}

/// `log` of the probability that no critical device suffers a decoding
/// delay under `plan`; `-inf` when some critical device transmits, collides
/// or hears nobody. A critical device hearing exactly one transmission
/// escapes delay surely if it can decode, and otherwise only when the
/// transmission is erased.
pub fn plan_objective(state: &NetworkState, critical: &IdSet, plan: &TransmissionPlan) -> f64 {
    let hearing = state.hearing_sets(plan);
    let mut total = 0.0;
    for u in critical.intersection(&state.wanting_devices()).iter() {
        let Some(i) = hearing.heard_from[u] else {
            return f64::NEG_INFINITY;
        };
        if hearing.transmitters.contains(u) {
            return f64::NEG_INFINITY;
        }
        let e = &plan.entries[i];
        if !state.is_instantly_decodable(&e.combination, u) {
            let eps = match e.transmitter {
                Transmitter::Device(a) => state.erasure(a, u),
                Transmitter::BaseStation { erasure } => erasure,
            };
            total -= link_weight(eps);
        }
    }
    total
}

fn subsets(set: IdSet) -> impl Iterator<Item = IdSet> {
    let items: Vec<usize> = set.iter().collect();
    (0u64..1 << items.len())
        .map(move |mask| (0..items.len()).filter(|&i| mask >> i & 1 == 1).map(|i| items[i]).collect())
}

fn collision_free(state: &NetworkState, set: &IdSet) -> bool {
    let wanting = state.wanting_devices();
    let members: Vec<usize> = set.iter().collect();
    members.iter().enumerate().all(|(i, &a)| {
        members[i + 1..]
            .iter()
            .all(|&b| !state.coverage(a).intersection(&state.coverage(b)).intersects(&wanting))
    })
}

/// Some wanting device hears exactly one transmission and can decode it.
pub fn serves_someone(state: &NetworkState, plan: &TransmissionPlan) -> bool {
    let hearing = state.hearing_sets(plan);
    state.wanting_devices().difference(&hearing.transmitters).iter().any(|u| {
        hearing.heard_from[u].is_some_and(|i| state.is_instantly_decodable(&plan.entries[i].combination, u))
    })
}

/// Exhaustive maxima of [`plan_objective`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Optimum {
    /// Over every plan.
    pub any: f64,
    /// Over plans that serve at least one device, the only ones a
    /// scheduler may return.
    pub serving: f64,
}

/// Maximum of [`plan_objective`] over every transmitter set of `class` and
/// every nonempty combination each transmitter can form.
pub fn best_objective(state: &NetworkState, critical: &IdSet, class: PlanClass) -> Result<Optimum> {
    let n = state.num_devices();
    if n > ORACLE_MAX_DEVICES {
        return Err(Error::OracleTooLarge { n, max: ORACLE_MAX_DEVICES });
    }
    let holders: IdSet = (0..n).filter(|&u| !state.has(u).is_empty()).collect();
    let mut best = Optimum { any: f64::NEG_INFINITY, serving: f64::NEG_INFINITY };
    for set in subsets(holders) {
        if class == PlanClass::CollisionFree && !collision_free(state, &set) {
            continue;
        }
        let members: Vec<usize> = set.iter().collect();
        let choices: Vec<Vec<IdSet>> = members
            .iter()
            .map(|&a| subsets(state.has(a)).filter(|s| !s.is_empty()).collect())
            .collect();
        let mut index = vec![0usize; members.len()];
        loop {
            let plan = TransmissionPlan::new(
                members
                    .iter()
                    .zip(&index)
                    .enumerate()
                    .map(|(k, (&a, &i))| PlanEntry {
                        transmitter: Transmitter::Device(a),
                        combination: FileCombination::new(choices[k][i]).expect("nonempty"),
                        targets: IdSet::new(),
                    })
                    .collect(),
            );
            let value = plan_objective(state, critical, &plan);
            best.any = best.any.max(value);
            if value > best.serving && serves_someone(state, &plan) {
                best.serving = value;
            }
            // odometer over the per-member choices
            let mut k = 0;
            while k < index.len() {
                index[k] += 1;
                if index[k] < choices[k].len() {
                    break;
                }
                index[k] = 0;
                k += 1;
            }
            if k == index.len() {
                break;
            }
        }
    }
    Ok(best)
}

/// Best critical weight device `a` can reach over every subset of its Has
/// set, ignoring the devices in `excluded`.
pub fn brute_force_critical_weight(
    state: &NetworkState,
    layering: &Layering,
    a: DeviceId,
    excluded: &IdSet,
) -> f64 {
    let mut reach = state.coverage(a).difference(excluded);
    reach.remove(a);
    let mut best = 0.0f64;
    for files in subsets(state.has(a)) {
        let y: f64 = reach
            .intersection(&layering.critical)
            .iter()
            .filter(|&u| files.intersection(&state.wants(u)).len() == 1)
            .map(|u| link_weight(state.erasure(a, u)))
            .sum();
        best = best.max(y);
    }
    best
}

/// Devices that may transmit without breaking a critical-set constraint on
/// their own: non-critical, holding a file, and either able to serve some
/// neighbour or covering a critical device.
pub fn oracle_candidates(state: &NetworkState, critical: &IdSet) -> IdSet {
    let wanting = state.wanting_devices();
    (0..state.num_devices())
        .filter(|&a| {
            let mut zone = state.coverage(a).intersection(&wanting);
            zone.remove(a);
            !critical.contains(a)
                && !state.has(a).is_empty()
                && (zone.iter().any(|u| state.wants(u).intersects(&state.has(a)))
                    || zone.intersects(critical))
        })
        .collect()
}

/// Transmitter sets drawn from `candidates` in which no critical device
/// transmits or collides; with `require_cover`, no critical device may be
/// left out of range either.
pub fn feasible_transmitter_sets(
    state: &NetworkState,
    critical: &IdSet,
    candidates: IdSet,
    require_cover: bool,
) -> Result<BTreeSet<IdSet>> {
    let n = state.num_devices();
    if n > ORACLE_MAX_DEVICES {
        return Err(Error::OracleTooLarge { n, max: ORACLE_MAX_DEVICES });
    }
    let critical = critical.intersection(&state.wanting_devices());
    let mut out = BTreeSet::new();
    for set in subsets(candidates) {
        let plan = TransmissionPlan::new(
            set.iter()
                .map(|a| PlanEntry {
                    transmitter: Transmitter::Device(a),
                    combination: FileCombination::new(state.has(a)).expect("candidates hold files"),
                    targets: IdSet::new(),
                })
                .collect(),
        );
        let h = state.hearing_sets(&plan);
        if critical.intersects(&set) || critical.intersects(&h.interference) {
            continue;
        }
        if require_cover && critical.intersects(&h.out_of_range) {
            continue;
        }
        out.insert(set);
    }
    Ok(out)
}

/// Every clique (including the empty one) of a graph given by an adjacency
/// predicate over `0..n`.
pub fn all_cliques(n: usize, adjacent: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    fn grow(
        clique: &mut Vec<usize>,
        start: usize,
        n: usize,
        adjacent: &dyn Fn(usize, usize) -> bool,
        out: &mut Vec<Vec<usize>>,
    ) {
        out.push(clique.clone());
        for v in start..n {
            if clique.iter().all(|&c| adjacent(c, v)) {
                clique.push(v);
                grow(clique, v + 1, n, adjacent, out);
                clique.pop();
            }
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), 0, n, &adjacent, &mut out);
    out
}

/// Outcome of one verification suite.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checked: usize,
    pub failures: Vec<String>,
    /// Observations that are not failures.
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn new(name: &'static str) -> Self {
        SuiteReport { name, checked: 0, failures: Vec::new(), notes: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.checked > 0
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

/// One-sided sign test: the probability of at least `wins` successes in
/// `wins + losses` fair coin flips. Ties are left out by the caller.
pub fn sign_test_p(wins: usize, losses: usize) -> f64 {
    let n = wins + losses;
    // log C(n, k) built up term by term
    let mut log_c = 0.0;
    let mut tail = 0.0;
    for k in 0..=n {
        if k > 0 {
            log_c += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        if k >= wins {
            tail += (log_c - n as f64 * std::f64::consts::LN_2).exp();
        }
    }
    tail.min(1.0)
}

/// Random small network that still has something to deliver. Metrics are
/// advanced through a few rounds of the general scheduler so that delays,
/// erasures and critical sets vary between instances.
pub fn random_small_instance(
    rng: &mut ChaCha8Rng,
    max_devices: usize,
    max_files: usize,
) -> Result<(NetworkState, Metrics)> {
    loop {
        let u = rng.gen_range(2..=max_devices);
        let f = rng.gen_range(1..=max_files);
        let c = rng.gen_range(min_connectivity(u)..=1.0);
        let conn = generate_topology(u, c, rng)?;
        let mean = rng.gen_range(0.05..0.6);
        let erasures = generate_erasures(u, mean, 0.05, rng);
        let has = initialize_holdings(&conn, &erasures, f, rng);
        let mut state = NetworkState::new(&conn, erasures, has, f)?;
        let mut metrics = Metrics::new(&state)?;
        for _ in 0..rng.gen_range(0..4) {
            if state.is_complete() {
                break;
            }
            let plan = scheduler::plan(SchedulerKind::General, &state, &metrics, &SchedulerOptions::default())?;
            run_round(&mut state, &mut metrics, &plan, rng)?;
        }
        if !state.is_complete() {
            return Ok((state, metrics));
        }
    }
}

/// Branch-and-bound against subset enumeration on random graphs of up to
/// 12 vertices; half of them have small integer weights to force ties.
pub fn clique_suite(graphs: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport::new("clique oracle");
    for k in 0..graphs {
        let n = rng.gen_range(0..=12);
        let weights: Vec<f64> = if k % 2 == 0 {
            (0..n).map(|_| rng.gen_range(0.0..10.0)).collect()
        } else {
            (0..n).map(|_| rng.gen_range(0..4) as f64).collect()
        };
        let density = rng.gen_range(0.0..1.0);
        let mut g = WeightedGraph::new(weights);
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(density) {
                    g.add_edge(a, b);
                }
            }
        }
        let fast = max_weight_clique(&g)?;
        let slow = brute_force_clique(&g)?;
        report.check(fast == slow && g.is_clique(&fast), || format!("graph {k}: {fast:?} vs {slow:?}"));
    }
    Ok(report)
}

fn same_value(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-9
}

/// General (cluster size = U) and collision-free plans against the
/// exhaustive optimum of the delay-probability objective on networks of at
/// most five devices and three files.
pub fn objective_suite(instances: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport::new("objective oracle");
    for k in 0..instances {
        let (state, metrics) = random_small_instance(&mut rng, 5, 3)?;
        let critical = metrics.critical_set(&state);
        let general = scheduler::plan_general(&state, &metrics, state.num_devices())?;
        let free = scheduler::plan_collision_free(&state, &metrics)?;
        let (og, oc) = (plan_objective(&state, &critical, &general), plan_objective(&state, &critical, &free));
        let bg = best_objective(&state, &critical, PlanClass::General)?;
        let bc = best_objective(&state, &critical, PlanClass::CollisionFree)?;
        report.check(same_value(og, bg.serving), || format!("instance {k}: general {og} vs optimum {}", bg.serving));
        report.check(same_value(oc, bc.serving), || format!("instance {k}: collision-free {oc} vs optimum {}", bc.serving));
        if !same_value(bg.any, bg.serving) {
            report.notes.push(format!("instance {k}: only a plan serving nobody reaches {}", bg.any));
        }
    }
    Ok(report)
}

/// Cliques of the full extended cooperation graph against transmitter sets,
/// in both directions, on networks of at most six devices.
pub fn bijection_suite(instances: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport::new("cluster bijection");
    for k in 0..instances {
        let (state, metrics) = random_small_instance(&mut rng, 6, 3)?;
        let layering = metrics.layering(&state);
        let ctx = CoopContext::new(&state, &layering, Mode::Constrained)?;
        let graph = build_extended_graph(&ctx, enumerate_clusters(&ctx, state.num_devices())?);
        let cliques = all_cliques(graph.len(), |a, b| graph.adjacent(a, b));
        let candidates = oracle_candidates(&state, &layering.critical);
        report.check(ctx.candidates() == candidates, || format!("instance {k}: candidate sets differ"));
        let needed = ctx.critical().len() as u32;
        for require_cover in [false, true] {
            let kept: Vec<&Vec<usize>> = cliques
                .iter()
                .filter(|c| !require_cover || graph.score_of(c).covered == needed)
                .collect();
            let images: BTreeSet<IdSet> = kept.iter().map(|c| graph.transmitters(c)).collect();
            let expected = feasible_transmitter_sets(&state, &layering.critical, candidates, require_cover)?;
            report.check(images.len() == kept.len(), || format!("instance {k}: two cliques share a transmitter set"));
            report.check(images.is_subset(&expected), || {
                format!("instance {k}: a clique maps outside the feasible sets (cover: {require_cover})")
            });
            report.check(expected.is_subset(&images), || {
                format!("instance {k}: a feasible set has no clique (cover: {require_cover})")
            });
        }
    }
    Ok(report)
}

/// The seven-device walkthrough: collisions, delays and completion rounds.
pub fn fixture_suite() -> Result<SuiteReport> {
    let mut report = SuiteReport::new("fixture walkthrough");
    let mut state = fixture::figure_one();
    let mut metrics = Metrics::new(&state)?;
    let first = fixture::figure_one_slot_one();
    let h = state.hearing_sets(&first);
    report.check(h.interference == IdSet::single(1), || format!("interference {:?}", h.interference));
    report.check(h.out_of_range == IdSet::single(4), || format!("out of range {:?}", h.out_of_range));
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    run_round(&mut state, &mut metrics, &first, &mut rng)?;
    run_round(&mut state, &mut metrics, &fixture::figure_one_slot_two(), &mut rng)?;
    let delays: Vec<u64> = metrics.devices().iter().map(|d| d.decoding_delay).collect();
    report.check(delays == [1, 1, 0, 0, 1, 0, 0], || format!("delays {delays:?}"));
    let done: Vec<Option<u64>> = metrics.devices().iter().map(|d| d.completion_round).collect();
    let expected = [Some(2), Some(2), Some(0), Some(0), Some(2), Some(1), Some(1)];
    report.check(done == expected, || format!("completion rounds {done:?}"));
    report.check(state.is_complete(), || "files still missing after two slots".into());
    Ok(report)
}
