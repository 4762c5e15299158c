//! Per-round transmission plans.
//!
//! The collision-free and general schedulers pick the best clique of the
//! (extended) cooperation graph under [`PlanScore`]: among plans in which
//! every critical device hears exactly one transmission, the one maximising
//! the probability that no critical device suffers a decoding delay.
//!
//! A plan must serve somebody. If the best clique serves nobody, the best
//! clique containing a serving vertex is used instead; if no serving plan
//! keeps every critical device covered, the round falls back to the relaxed
//! graph, where any holder may transmit and only service weights count.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bits::IdSet;
use crate::clique::CliqueWeight;
use crate::coop::{
    build_cooperation_graph, build_extended_graph, enumerate_clusters, prune_dominated, CoopContext,
    CooperationGraph, Mode, PlanScore,
};
use crate::error::{Error, Result};
use crate::idnc_graph::build_base_station_graph;
use crate::metrics::Metrics;
use crate::net::{NetworkState, PlanEntry, TransmissionPlan, Transmitter};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulerKind {
    CollisionFree,
    General,
    Pmp,
    SingleTransmitter,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 4] = [
        SchedulerKind::CollisionFree,
        SchedulerKind::General,
        SchedulerKind::Pmp,
        SchedulerKind::SingleTransmitter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchedulerKind::CollisionFree => "collision_free",
            SchedulerKind::General => "general",
            SchedulerKind::Pmp => "pmp",
            SchedulerKind::SingleTransmitter => "single_transmitter",
        }
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for SchedulerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SchedulerKind::ALL
            .into_iter()
            .find(|k| k.name() == s.replace('-', "_"))
            .ok_or_else(|| Error::Config(format!("unknown scheduler `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchedulerOptions {
    /// Largest cluster the general scheduler considers.
    pub max_cluster_size: usize,
    /// Erasure probability of the point-to-multipoint base station.
    pub pmp_erasure: f64,
}

impl Default for SchedulerOptions {
    fn default() -> Self {
        SchedulerOptions { max_cluster_size: 3, pmp_erasure: 0.2 }
    }
}

/// A chosen plan and how it was found.
#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    pub plan: TransmissionPlan,
    /// Score in the graph the plan came from.
    pub score: PlanScore,
    /// True when the critical-set constraints had to be dropped.
    pub relaxed: bool,
}

impl Decision {
    fn empty() -> Self {
        Decision { plan: TransmissionPlan::default(), score: PlanScore::default(), relaxed: false }
    }
}

pub fn plan(
    kind: SchedulerKind,
    state: &NetworkState,
    metrics: &Metrics,
    opts: &SchedulerOptions,
) -> Result<TransmissionPlan> {
    decide(kind, state, metrics, opts).map(|d| d.plan)
}

pub fn decide(
    kind: SchedulerKind,
    state: &NetworkState,
    metrics: &Metrics,
    opts: &SchedulerOptions,
) -> Result<Decision> {
    match kind {
        SchedulerKind::CollisionFree => solve(state, metrics, build_cooperation_graph),
        SchedulerKind::General => general(state, metrics, opts.max_cluster_size),
        SchedulerKind::Pmp => pmp(state, metrics, opts.pmp_erasure),
        SchedulerKind::SingleTransmitter => solve(state, metrics, |ctx| {
            enumerate_clusters(ctx, 1).map(CooperationGraph::without_edges)
        }),
    }
}

pub fn plan_collision_free(state: &NetworkState, metrics: &Metrics) -> Result<TransmissionPlan> {
    solve(state, metrics, build_cooperation_graph).map(|d| d.plan)
}

pub fn plan_general(
    state: &NetworkState,
    metrics: &Metrics,
    max_cluster_size: usize,
) -> Result<TransmissionPlan> {
    general(state, metrics, max_cluster_size).map(|d| d.plan)
}

pub fn plan_single_transmitter(state: &NetworkState, metrics: &Metrics) -> Result<TransmissionPlan> {
    decide(SchedulerKind::SingleTransmitter, state, metrics, &SchedulerOptions::default()).map(|d| d.plan)
}

pub fn plan_pmp(state: &NetworkState, metrics: &Metrics, p_bs: f64) -> Result<TransmissionPlan> {
    pmp(state, metrics, p_bs).map(|d| d.plan)
}

/// The extended-graph search settles the non-critical weight only
/// approximately, and every collision-free plan is also a general plan, so
/// the collision-free decision serves as a floor. On equal scores the plan
/// with fewer wanting transmitters wins, since a transmitter cannot receive,
/// then the one with fewer transmitters, since it collides less.
fn general(state: &NetworkState, metrics: &Metrics, max_cluster_size: usize) -> Result<Decision> {
    let g = solve(state, metrics, |ctx| general_graph(ctx, max_cluster_size))?;
    let c = solve(state, metrics, build_cooperation_graph)?;
    let take_c = if g.relaxed != c.relaxed {
        g.relaxed
    } else if !score_at_least(g.score, c.score) {
        true
    } else if !score_at_least(c.score, g.score) {
        false
    } else {
        busy(state, &c.plan) < busy(state, &g.plan)
    };
    Ok(if take_c { c } else { g })
}

/// Transmitters that still want files, then all transmitters.
fn busy(state: &NetworkState, plan: &TransmissionPlan) -> (usize, usize) {
    let tx = plan.device_transmitters();
    (tx.intersection(&state.wanting_devices()).len(), tx.len())
}

fn general_graph(ctx: &CoopContext, max_cluster_size: usize) -> Result<CooperationGraph> {
    let clusters = enumerate_clusters(ctx, max_cluster_size.max(1))?;
    Ok(build_extended_graph(ctx, prune_dominated(ctx, clusters)))
}

fn pmp(state: &NetworkState, metrics: &Metrics, p_bs: f64) -> Result<Decision> {
    if !(p_bs > 0.0 && p_bs < 1.0) {
        return Err(Error::Config(format!("base-station erasure {p_bs} outside (0, 1)")));
    }
    let layering = metrics.layering(state);
    let best = build_base_station_graph(state, &layering, p_bs).best_combination()?;
    let Some(combination) = best.combination else {
        return Ok(Decision::empty());
    };
    let plan = TransmissionPlan::new(vec![PlanEntry {
        transmitter: Transmitter::BaseStation { erasure: p_bs },
        combination,
        targets: best.targets,
    }]);
    let score = PlanScore {
        covered: layering.critical.len() as u32,
        critical: best.critical_weight,
        noncritical: best.noncritical_weight,
        ..PlanScore::default()
    };
    Ok(Decision { plan, score, relaxed: false })
}

fn solve(
    state: &NetworkState,
    metrics: &Metrics,
    build: impl Fn(&CoopContext) -> Result<CooperationGraph>,
) -> Result<Decision> {
    let layering = metrics.layering(state);
    let ctx = CoopContext::new(state, &layering, Mode::Constrained)?;
    let graph = build(&ctx)?;
    let needed = ctx.critical().len() as u32;
    if let Some((clique, score)) = best_serving(&graph)? {
        if score.covered == needed {
            return Ok(Decision { plan: graph.plan_of(&clique), score, relaxed: false });
        }
    }
    let ctx = CoopContext::new(state, &layering, Mode::Relaxed)?;
    let graph = build(&ctx)?;
    match best_serving(&graph)? {
        Some((clique, score)) => Ok(Decision { plan: graph.plan_of(&clique), score, relaxed: true }),
        None => Ok(Decision::empty()),
    }
}

/// `log` of the probability that no critical device is delayed under the
/// plan `kind` would choose, without building that plan when the round
/// falls back: a relaxed plan leaves some critical device uncovered, so its
/// value is `-inf` (or `0` with no critical device at all).
pub fn objective_weight(
    kind: SchedulerKind,
    state: &NetworkState,
    metrics: &Metrics,
    opts: &SchedulerOptions,
) -> Result<f64> {
    let layering = metrics.layering(state);
    let ctx = CoopContext::new(state, &layering, Mode::Constrained)?;
    let needed = ctx.critical().len() as u32;
    if needed == 0 {
        return Ok(0.0);
    }
    let graph = match kind {
        SchedulerKind::CollisionFree => build_cooperation_graph(&ctx)?,
        SchedulerKind::General => general_graph(&ctx, opts.max_cluster_size)?,
        SchedulerKind::SingleTransmitter => CooperationGraph::without_edges(enumerate_clusters(&ctx, 1)?),
        SchedulerKind::Pmp => {
            let plan = pmp(state, metrics, opts.pmp_erasure)?.plan;
            return Ok(crate::verify::plan_objective(state, &layering.critical, &plan));
        }
    };
    Ok(match best_serving(&graph)? {
        Some((_, score)) if score.covered == needed => score.log_product,
        _ => f64::NEG_INFINITY,
    })
}

/// Best clique that serves at least one device.
fn best_serving(graph: &CooperationGraph) -> Result<Option<(Vec<usize>, PlanScore)>> {
    let best = graph.best_clique()?;
    if graph.serves(&best) {
        let score = graph.score_of(&best);
        return Ok(Some((best, score)));
    }
    let mut found: Option<(Vec<usize>, PlanScore)> = None;
    for v in (0..graph.len()).filter(|&v| graph.clusters()[v].serves()) {
        let clique = graph.best_clique_with(v)?;
        let score = graph.score_of(&clique);
        let better = match &found {
            None => true,
            Some((c, s)) => score > *s || (score == *s && clique < *c),
        };
        if better {
            found = Some((clique, score));
        }
    }
    Ok(found)
}

/// True when `a` is at least `b` up to rounding.
pub fn score_at_least(a: PlanScore, b: PlanScore) -> bool {
    !PlanScore::definitely_below(a, b)
}

/// Devices the plan serves.
pub fn served(plan: &TransmissionPlan) -> IdSet {
    plan.all_targets()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::fixture;
    use crate::verify::{best_objective, plan_objective, PlanClass};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn network(n: usize, edges: &[(usize, usize)], eps: f64, has: Vec<IdSet>, files: usize) -> NetworkState {
        let mut conn = vec![vec![false; n]; n];
        for (i, row) in conn.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b) in edges {
            conn[a][b] = true;
            conn[b][a] = true;
        }
        let e = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { eps }).collect()).collect();
        NetworkState::new(&conn, e, has, files).unwrap()
    }

    #[test]
    fn kind_names_round_trip() {
        for k in SchedulerKind::ALL {
            assert_eq!(k.name().parse::<SchedulerKind>().unwrap(), k);
        }
        assert!("nope".parse::<SchedulerKind>().is_err());
    }

    #[test]
    fn lone_wanting_device_is_served_by_its_neighbour() {
        let has = vec![IdSet::new(), IdSet::full(1), IdSet::full(1)];
        let s = network(3, &[(0, 1), (1, 2)], 0.1, has, 1);
        let m = Metrics::new(&s).unwrap();
        let p = plan_collision_free(&s, &m).unwrap();
        assert_eq!(p.entries.len(), 1);
        assert_eq!(p.entries[0].transmitter, Transmitter::Device(1));
        assert_eq!(p.entries[0].targets, IdSet::single(0));
    }

    #[test]
    fn star_with_wanting_hub_has_one_transmitter() {
        let n = 5;
        let edges: Vec<(usize, usize)> = (1..n).map(|l| (0, l)).collect();
        let mut has = vec![IdSet::full(2); n];
        has[0] = IdSet::new();
        has[1] = IdSet::single(0);
        has[2] = IdSet::single(1);
        let s = network(n, &edges, 0.1, has, 2);
        let m = Metrics::new(&s).unwrap();
        for p in [plan_collision_free(&s, &m).unwrap(), plan_general(&s, &m, 1).unwrap()] {
            assert_eq!(p.entries.len(), 1);
            p.validate(&s).unwrap();
        }
    }

    #[test]
    fn pmp_broadcasts_a_common_file() {
        let has = vec![IdSet::full(2), IdSet::single(1), IdSet::single(1), IdSet::single(1)];
        let s = network(4, &[(0, 1), (0, 2), (0, 3)], 0.1, has, 2);
        let m = Metrics::new(&s).unwrap();
        let p = plan_pmp(&s, &m, 0.2).unwrap();
        assert_eq!(p.entries.len(), 1);
        assert_eq!(p.entries[0].combination.files(), IdSet::single(0));
        assert_eq!(p.entries[0].targets, [1, 2, 3].into_iter().collect());
    }

    #[test]
    fn pmp_cannot_combine_conflicting_demands() {
        let has = vec![IdSet::new(), IdSet::new()];
        let has = vec![has[0], IdSet::full(2)];
        // device 0 wants both files, so only one file reaches it per round
        let s = network(2, &[(0, 1)], 0.1, vec![has[0], has[1]], 2);
        let m = Metrics::new(&s).unwrap();
        let p = plan_pmp(&s, &m, 0.2).unwrap();
        assert_eq!(p.entries[0].combination.files().len(), 1);
        assert!(plan_pmp(&s, &m, 1.0).is_err());
    }

    #[test]
    fn single_transmitter_picks_the_only_holder() {
        let has = vec![IdSet::new(), IdSet::new(), IdSet::full(1), IdSet::new()];
        let s = network(4, &[(0, 1), (1, 2), (2, 3)], 0.1, has, 1);
        let m = Metrics::new(&s).unwrap();
        let p = plan_single_transmitter(&s, &m).unwrap();
        assert_eq!(p.device_transmitters(), IdSet::single(2));
    }

    #[test]
    fn cluster_size_one_matches_collision_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let s = { let (n, f) = (rng.gen_range(2..=8), rng.gen_range(1..=4)); random_state(&mut rng, n, f) };
            let m = Metrics::new(&s).unwrap();
            assert_eq!(plan_general(&s, &m, 1).unwrap(), plan_collision_free(&s, &m).unwrap());
        }
    }

    #[test]
    fn fixture_first_round_plans_are_valid() {
        let s = fixture::figure_one();
        let m = Metrics::new(&s).unwrap();
        for k in SchedulerKind::ALL {
            let p = plan(k, &s, &m, &SchedulerOptions::default()).unwrap();
            p.validate(&s).unwrap();
            assert!(!p.all_targets().is_empty());
        }
    }

    fn random_state(rng: &mut ChaCha8Rng, n: usize, files: usize) -> NetworkState {
        loop {
            let mut conn = vec![vec![false; n]; n];
            let p = rng.gen_range(0.3..1.0);
            for i in 0..n {
                conn[i][i] = true;
                for j in i + 1..n {
                    let c = rng.gen_bool(p);
                    conn[i][j] = c;
                    conn[j][i] = c;
                }
            }
            let e = (0..n)
                .map(|i| (0..n).map(|j| if i == j { 0.0 } else { rng.gen_range(0.05..0.6) }).collect())
                .collect();
            let has = (0..n).map(|_| (0..files).filter(|_| rng.gen_bool(0.5)).collect()).collect();
            if let Ok(s) = NetworkState::new(&conn, e, has, files) {
                if !s.is_complete() {
                    return s;
                }
            }
        }
    }

    #[test]
    fn plans_serve_and_respect_ordering() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let s = { let (n, f) = (rng.gen_range(2..=8), rng.gen_range(1..=4)); random_state(&mut rng, n, f) };
            let m = Metrics::new(&s).unwrap();
            let critical = m.critical_set(&s);
            let g = plan_general(&s, &m, 3).unwrap();
            let c = plan_collision_free(&s, &m).unwrap();
            let t = plan_single_transmitter(&s, &m).unwrap();
            for p in [&g, &c, &t] {
                p.validate(&s).unwrap();
                assert!(!p.all_targets().is_empty());
            }
            assert!(s.hearing_sets(&c).interference.is_empty());
            let (og, oc, ot) =
                (plan_objective(&s, &critical, &g), plan_objective(&s, &critical, &c), plan_objective(&s, &critical, &t));
            assert!(og >= oc - 1e-9 || (og == oc));
            assert!(oc >= ot - 1e-9 || (oc == ot));
        }
    }

    #[test]
    fn objective_weight_matches_the_chosen_plan() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let opts = SchedulerOptions::default();
        let mut fallbacks = 0;
        for _ in 0..300 {
            let s = { let (n, f) = (rng.gen_range(2..=9), rng.gen_range(1..=4)); random_state(&mut rng, n, f) };
            let m = Metrics::new(&s).unwrap();
            let critical = m.critical_set(&s);
            for k in SchedulerKind::ALL {
                let d = decide(k, &s, &m, &opts).unwrap();
                fallbacks += d.relaxed as usize;
                let direct = plan_objective(&s, &critical, &d.plan);
                let w = objective_weight(k, &s, &m, &opts).unwrap();
                assert!(w == direct || (w - direct).abs() < 1e-9, "{k}: {w} vs {direct}");
            }
        }
        assert!(fallbacks > 0);
    }

    #[test]
    fn small_instances_reach_the_exhaustive_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut misses = 0;
        for _ in 0..100 {
            let s = { let (n, f) = (rng.gen_range(2..=5), rng.gen_range(1..=3)); random_state(&mut rng, n, f) };
            let m = Metrics::new(&s).unwrap();
            let critical = m.critical_set(&s);
            let g = plan_general(&s, &m, s.num_devices()).unwrap();
            let c = plan_collision_free(&s, &m).unwrap();
            let bg = best_objective(&s, &critical, PlanClass::General).unwrap().serving;
            let bc = best_objective(&s, &critical, PlanClass::CollisionFree).unwrap().serving;
            let og = plan_objective(&s, &critical, &g);
            let oc = plan_objective(&s, &critical, &c);
            if !(og == bg || (og - bg).abs() < 1e-9) || !(oc == bc || (oc - bc).abs() < 1e-9) {
                misses += 1;
            }
        }
        assert_eq!(misses, 0);
    }
}
