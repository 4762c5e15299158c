//! Cooperation graphs over transmitters and transmitter clusters.
//!
//! A cluster is a connected set of candidate transmitters in the *overlap
//! graph*, where two devices overlap when some wanting device lies in both
//! coverage zones. Inside a cluster, wanting non-members heard by two or more
//! members collide and are left out of every member's local IDNC graph.
//! Two clusters are adjacent in the cooperation graph when their combined
//! coverage zones share no wanting device, so a clique is a set of clusters
//! that can transmit together without cross-cluster collisions. Singleton
//! clusters alone give the collision-free cooperation graph.
//!
//! Vertices are scored with a [`PlanScore`]: the number of critical devices
//! covered, then the log-probability that none of them is delayed, then the
//! critical and non-critical service weights as tie-breaks.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::ops::Add;

use crate::bits::IdSet;
use crate::clique::{max_weight_clique, max_weight_clique_bounded, CliqueWeight, WeightedGraph, DEFAULT_NODE_BUDGET};
use crate::error::{Error, Result};
use crate::idnc_graph::{build_local_graph, link_weight, BestCombination, LocalIdncGraph};
use crate::metrics::Layering;
use crate::net::{DeviceId, FileCombination, NetworkState, PlanEntry, TransmissionPlan, Transmitter};

/// Lexicographic plan score. Every field adds up over the vertices of a
/// clique, and every vertex score is lexicographically nonnegative.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct PlanScore {
    /// Critical devices that hear exactly one transmission.
    pub covered: u32,
    /// `log` of the probability that no covered critical device is delayed (`<= 0`).
    pub log_product: f64,
    /// `log(1/eps)` summed over served critical devices.
    pub critical: f64,
    /// `log(1/eps)` summed over served non-critical devices.
    pub noncritical: f64,
}

impl Add for PlanScore {
    type Output = PlanScore;
    fn add(self, o: PlanScore) -> PlanScore {
        PlanScore {
            covered: self.covered + o.covered,
            log_product: self.log_product + o.log_product,
            critical: self.critical + o.critical,
            noncritical: self.noncritical + o.noncritical,
        }
    }
}

impl CliqueWeight for PlanScore {
    fn zero() -> Self {
        PlanScore::default()
    }

    fn definitely_below(bound: Self, best: Self) -> bool {
        if bound.covered != best.covered {
            return bound.covered < best.covered;
        }
        for (x, y) in [
            (bound.log_product, best.log_product),
            (bound.critical, best.critical),
            (bound.noncritical, best.noncritical),
        ] {
            let tol = 1e-9 * y.abs().max(1.0);
            if x < y - tol {
                return true;
            }
            if x > y + tol {
                return false;
            }
        }
        false
    }
}

/// Search nodes allowed for the non-critical part of a clique before the
/// greedy fallback takes over.
pub const EXTENSION_BUDGET: u64 = 20_000;

/// The score without its non-critical term.
pub fn critical_part(s: PlanScore) -> PlanScore {
    PlanScore { noncritical: 0.0, ..s }
}

/// Whether the critical-set constraints are enforced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Critical devices may not transmit or collide; coverage of critical
    /// devices and their delay probability lead the score.
    Constrained,
    /// Any holder may transmit and only service weights count.
    Relaxed,
}

/// One member's transmission inside a cluster.
#[derive(Clone, Debug, PartialEq)]
pub struct MemberPlan {
    pub transmitter: DeviceId,
    pub combination: FileCombination,
    pub targets: IdSet,
    pub critical_weight: f64,
    pub noncritical_weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cluster {
    pub members: IdSet,
    /// Union of the members' coverage zones.
    pub coverage: IdSet,
    /// Wanting non-members inside two or more members' zones.
    pub interference: IdSet,
    pub parts: Vec<MemberPlan>,
    pub score: PlanScore,
    /// `score` split over the devices it comes from, ascending by device.
    pub shares: Vec<(DeviceId, PlanScore)>,
}

impl Cluster {
    pub fn serves(&self) -> bool {
        self.parts.iter().any(|p| !p.targets.is_empty())
    }

    pub fn targets(&self) -> IdSet {
        self.parts.iter().fold(IdSet::new(), |acc, p| acc.union(&p.targets))
    }
}

/// Per-round data shared by the cooperation-graph builders: candidates and
/// their unrestricted local graphs.
pub struct CoopContext<'a> {
    state: &'a NetworkState,
    mode: Mode,
    wanting: IdSet,
    critical: IdSet,
    candidates: IdSet,
    local: Vec<Option<LocalIdncGraph>>,
    single: Vec<Option<BestCombination>>,
}

impl<'a> CoopContext<'a> {
    pub fn new(state: &'a NetworkState, layering: &'a Layering, mode: Mode) -> Result<Self> {
        let wanting = state.wanting_devices();
        let critical = layering.critical.intersection(&wanting);
        let n = state.num_devices();
        let mut local = vec![None; n];
        let mut single = vec![None; n];
        let mut candidates = IdSet::new();
        for a in 0..n {
            if state.has(a).is_empty() || (mode == Mode::Constrained && critical.contains(a)) {
                continue;
            }
            let g = build_local_graph(state, layering, a, &IdSet::new());
            let mut zone = state.coverage(a).intersection(&wanting);
            zone.remove(a);
            let useful = !g.is_empty() || (mode == Mode::Constrained && zone.intersects(&critical));
            if !useful {
                continue;
            }
            candidates.insert(a);
            single[a] = Some(g.best_combination()?);
            local[a] = Some(g);
        }
        Ok(CoopContext { state, mode, wanting, critical, candidates, local, single })
    }

    pub fn state(&self) -> &NetworkState {
        self.state
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Wanting critical devices.
    pub fn critical(&self) -> IdSet {
        self.critical
    }

    pub fn candidates(&self) -> IdSet {
        self.candidates
    }

    /// Some wanting device lies in both coverage zones.
    pub fn overlap(&self, a: DeviceId, b: DeviceId) -> bool {
        self.state.coverage(a).intersection(&self.state.coverage(b)).intersects(&self.wanting)
    }

    /// Scores the cluster `members`, or `None` when it would make a critical
    /// device collide (constrained mode only). Members must be candidates.
    pub fn evaluate(&self, members: IdSet) -> Result<Option<Cluster>> {
        let s = self.state;
        let coverage = s.combined_coverage(&members);
        let mut seen = IdSet::new();
        let mut twice = IdSet::new();
        for a in members.iter() {
            let zone = s.coverage(a);
            twice = twice.union(&seen.intersection(&zone));
            seen = seen.union(&zone);
        }
        let interference = twice.intersection(&self.wanting).difference(&members);
        if self.mode == Mode::Constrained && interference.intersects(&self.critical) {
            return Ok(None);
        }
        let excluded = members.union(&interference);
        let mut parts = Vec::with_capacity(members.len());
        let mut score = PlanScore::default();
        let mut shares = Vec::new();
        for a in members.iter() {
            let single = self.single[a].as_ref().expect("members are candidates");
            let best = if single.targets.intersects(&excluded) {
                self.local[a].as_ref().expect("members are candidates").best_combination_excluding(&excluded)?
            } else {
                single.clone()
            };
            let combination = best.combination.unwrap_or_else(|| {
                FileCombination::single(s.has(a).first().expect("candidates hold a file"))
            });
            let mut part = PlanScore {
                critical: best.critical_weight,
                noncritical: best.noncritical_weight,
                ..PlanScore::default()
            };
            let mut heard = IdSet::new();
            if self.mode == Mode::Constrained {
                heard = s.coverage(a).intersection(&self.critical).difference(&excluded);
                part.covered = heard.len() as u32;
                for u in heard.difference(&best.targets).iter() {
                    part.log_product -= link_weight(s.erasure(a, u));
                }
            }
            for u in heard.union(&best.targets).iter() {
                let w = link_weight(s.erasure(a, u));
                let mut share = PlanScore { covered: heard.contains(u) as u32, ..PlanScore::default() };
                match (best.targets.contains(u), self.critical.contains(u)) {
                    (false, _) => share.log_product = -w,
                    (true, true) => share.critical = w,
                    (true, false) => share.noncritical = w,
                }
                shares.push((u, share));
            }
            score = score + part;
            parts.push(MemberPlan {
                transmitter: a,
                combination,
                targets: best.targets,
                critical_weight: best.critical_weight,
                noncritical_weight: best.noncritical_weight,
            });
        }
        shares.sort_by_key(|&(u, _)| u);
        Ok(Some(Cluster { members, coverage, interference, parts, score, shares }))
    }

    /// Some critical device sits in two members' zones (constrained mode).
    /// Supersets inherit the collision since critical devices never join.
    fn hits_critical(&self, members: &IdSet) -> bool {
        if self.mode != Mode::Constrained {
            return false;
        }
        let mut seen = IdSet::new();
        for a in members.iter() {
            let zone = self.state.coverage(a).intersection(&self.critical);
            if seen.intersects(&zone) {
                return true;
            }
            seen = seen.union(&zone);
        }
        false
    }

    fn overlap_neighbors(&self) -> Vec<IdSet> {
        let n = self.state.num_devices();
        (0..n)
            .map(|a| {
                if !self.candidates.contains(a) {
                    return IdSet::new();
                }
                self.candidates.iter().filter(|&b| b != a && self.overlap(a, b)).collect()
            })
            .collect()
    }
}

/// Candidates that may transmit alone without a critical device transmitting.
pub fn feasible_singletons(state: &NetworkState, layering: &Layering) -> Result<IdSet> {
    Ok(CoopContext::new(state, layering, Mode::Constrained)?.candidates())
}

/// Every feasible cluster of at most `max_size` members (singletons
/// included), sorted by size and then by member list.
pub fn enumerate_clusters(ctx: &CoopContext, max_size: usize) -> Result<Vec<Cluster>> {
    let mut sets = connected_sets(ctx, max_size);
    sets.sort_by_cached_key(|s| (s.len(), s.iter().collect::<Vec<_>>()));
    let mut clusters = Vec::with_capacity(sets.len());
    for members in sets {
        if let Some(c) = ctx.evaluate(members)? {
            clusters.push(c);
        }
    }
    Ok(clusters)
}

/// Connected vertex sets of the overlap graph with at most `max_size`
/// members, each produced once (ESU enumeration).
fn connected_sets(ctx: &CoopContext, max_size: usize) -> Vec<IdSet> {
    let nbr = ctx.overlap_neighbors();
    let n = ctx.state.num_devices();
    let mut out = Vec::new();
    if max_size == 0 {
        return out;
    }
    for v in ctx.candidates.iter() {
        let above = IdSet::full(n).difference(&IdSet::full(v + 1));
        let closed = nbr[v].union(&IdSet::single(v));
        extend(ctx, &nbr, above, IdSet::single(v), nbr[v].intersection(&above), closed, max_size, &mut out);
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn extend(
    ctx: &CoopContext,
    nbr: &[IdSet],
    above: IdSet,
    sub: IdSet,
    mut ext: IdSet,
    closed: IdSet,
    max_size: usize,
    out: &mut Vec<IdSet>,
) {
    if ctx.hits_critical(&sub) {
        return;
    }
    out.push(sub);
    if sub.len() == max_size {
        return;
    }
    while let Some(w) = ext.first() {
        ext.remove(w);
        let fresh = nbr[w].difference(&closed).intersection(&above);
        let mut next = sub;
        next.insert(w);
        extend(ctx, nbr, above, next, ext.union(&fresh), closed.union(&nbr[w]), max_size, out);
    }
}

/// Drops clusters that cannot improve any clique: zero-score clusters, and
/// clusters whose score is matched by what remains after removing one
/// member (the remainder splits into clusters that fit wherever the
/// original did).
pub fn prune_dominated(ctx: &CoopContext, clusters: Vec<Cluster>) -> Vec<Cluster> {
    let scores: HashMap<IdSet, PlanScore> = clusters.iter().map(|c| (c.members, c.score)).collect();
    let keep: Vec<bool> = clusters
        .iter()
        .map(|c| {
            if c.score == PlanScore::default() {
                return false;
            }
            if c.members.len() == 1 {
                return true;
            }
            !c.members.iter().any(|a| {
                let mut rest = c.members;
                rest.remove(a);
                let parts = components(ctx, rest);
                let mut total = PlanScore::default();
                for p in &parts {
                    match scores.get(p) {
                        Some(s) => total = total + *s,
                        None => return false,
                    }
                }
                total >= c.score
            })
        })
        .collect();
    clusters.into_iter().zip(keep).filter_map(|(c, k)| k.then_some(c)).collect()
}

/// Connected components of `set` in the overlap graph, ordered by smallest member.
fn components(ctx: &CoopContext, set: IdSet) -> Vec<IdSet> {
    let mut left = set;
    let mut out = Vec::new();
    while let Some(start) = left.first() {
        let mut comp = IdSet::single(start);
        let mut frontier = vec![start];
        left.remove(start);
        while let Some(a) = frontier.pop() {
            for b in left.iter() {
                if ctx.overlap(a, b) {
                    left.remove(b);
                    comp.insert(b);
                    frontier.push(b);
                }
            }
        }
        out.push(comp);
    }
    out
}

/// Clusters as vertices, adjacent when their combined coverage zones share
/// no wanting device.
#[derive(Clone, Debug)]
pub struct CooperationGraph {
    clusters: Vec<Cluster>,
    graph: WeightedGraph<PlanScore>,
    /// Device count when clusters reaching a common device are never
    /// adjacent, which makes the share bound valid.
    share_devices: Option<usize>,
    wanting: IdSet,
}

impl CooperationGraph {
    pub fn new(state: &NetworkState, clusters: Vec<Cluster>) -> Self {
        let wanting = state.wanting_devices();
        let m = clusters.len();
        let words = m.div_ceil(64);
        // Clusters reaching each wanting device; a cluster's row is every
        // cluster outside the lists of its own devices.
        let mut reaching = vec![vec![0u64; words]; state.num_devices()];
        for (i, c) in clusters.iter().enumerate() {
            for u in c.coverage.intersection(&wanting).iter() {
                reaching[u][i / 64] |= 1 << (i % 64);
            }
        }
        let mut adjacency = vec![0u64; words * m];
        for (i, c) in clusters.iter().enumerate() {
            let row = &mut adjacency[i * words..(i + 1) * words];
            for (k, w) in row.iter_mut().enumerate() {
                let bits = m - k * 64;
                *w = if bits >= 64 { !0 } else { (1 << bits) - 1 };
            }
            for u in c.coverage.intersection(&wanting).iter() {
                for (w, r) in row.iter_mut().zip(&reaching[u]) {
                    *w &= !r;
                }
            }
            row[i / 64] &= !(1 << (i % 64));
        }
        let graph = WeightedGraph::from_rows(clusters.iter().map(|c| c.score).collect(), adjacency);
        CooperationGraph { clusters, graph, share_devices: Some(state.num_devices()), wanting }
    }

    /// Vertices with no edges: only single-cluster plans.
    pub fn without_edges(clusters: Vec<Cluster>) -> Self {
        let graph = WeightedGraph::new(clusters.iter().map(|c| c.score).collect());
        CooperationGraph { clusters, graph, share_devices: None, wanting: IdSet::new() }
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn graph(&self) -> &WeightedGraph<PlanScore> {
        &self.graph
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.graph.has_edge(a, b)
    }

    pub fn score_of(&self, clique: &[usize]) -> PlanScore {
        self.graph.clique_weight(clique)
    }

    /// Clique whose critical part of the score (covered, delay
    /// log-probability, critical weight) is maximal. The clusters with a
    /// critical part are searched exactly on their full scores; the
    /// remaining clusters then extend the clique (see `extend`).
    pub fn best_clique(&self) -> Result<Vec<usize>> {
        if self.share_devices.is_none() {
            return max_weight_clique(&self.graph);
        }
        let all: Vec<usize> = (0..self.len()).collect();
        let core = self.critical_clique(&all)?;
        self.extend(core, &all)
    }

    /// Best clique that contains `v`.
    pub fn best_clique_with(&self, v: usize) -> Result<Vec<usize>> {
        let nbrs: Vec<usize> = self.graph.neighbors(v).collect();
        let mut core = if self.share_devices.is_none() {
            max_weight_clique(&self.graph.induced(&nbrs))?.into_iter().map(|i| nbrs[i]).collect()
        } else {
            self.critical_clique(&nbrs)?
        };
        core.push(v);
        self.extend(core, &nbrs)
    }

    /// Exact search over the clusters of `ids` with a nonzero critical part.
    fn critical_clique(&self, ids: &[usize]) -> Result<Vec<usize>> {
        let keep: Vec<usize> =
            ids.iter().copied().filter(|&c| critical_part(self.clusters[c].score) != PlanScore::default()).collect();
        let whole = keep.len() == self.len();
        let induced;
        let g = if whole {
            &self.graph
        } else {
            induced = self.graph.induced(&keep);
            &induced
        };
        let devices = self.share_devices.unwrap_or(0);
        let found = max_weight_clique_bounded(g, DEFAULT_NODE_BUDGET, &mut |c| self.share_bound(devices, &keep, c))?;
        Ok(found.into_iter().map(|i| keep[i]).collect())
    }

    /// Adds the clusters from `pool` with no critical part that serve the
    /// most non-critical weight while staying adjacent to the clique:
    /// exactly when the search fits in [`EXTENSION_BUDGET`] nodes, otherwise
    /// greedily by weight per reached wanting device.
    fn extend(&self, mut clique: Vec<usize>, pool: &[usize]) -> Result<Vec<usize>> {
        let extra: Vec<usize> = pool
            .iter()
            .copied()
            .filter(|&c| {
                let s = self.clusters[c].score;
                critical_part(s) == PlanScore::default() && s.noncritical > 0.0
            })
            .filter(|&c| clique.iter().all(|&d| self.graph.has_edge(c, d)))
            .collect();
        let g = self.graph.induced(&extra);
        let devices = self.share_devices.unwrap_or(0);
        match max_weight_clique_bounded(&g, EXTENSION_BUDGET, &mut |c| self.share_bound(devices, &extra, c)) {
            Ok(found) => clique.extend(found.into_iter().map(|i| extra[i])),
            Err(Error::CliqueBudgetExceeded { .. }) => {
                let density = |c: usize| {
                    let k = self.clusters[c].coverage.intersection(&self.wanting).len().max(1);
                    self.clusters[c].score.noncritical / k as f64
                };
                let mut order = extra;
                order.sort_by(|&a, &b| density(b).partial_cmp(&density(a)).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
                let start = clique.len();
                for c in order {
                    if clique[start..].iter().all(|&d| self.graph.has_edge(c, d)) {
                        clique.push(c);
                    }
                }
            }
            Err(e) => return Err(e),
        }
        clique.sort_unstable();
        Ok(clique)
    }

    /// Clusters sharing a wanting device are never adjacent, so a clique
    /// draws each device's share from at most one cluster. The per-device
    /// maximum share, summed over devices, bounds every clique among
    /// `candidates` (indices into `ids`).
    fn share_bound(&self, devices: usize, ids: &[usize], candidates: &[usize]) -> PlanScore {
        let mut best = vec![PlanScore::default(); devices];
        for &i in candidates {
            for &(u, sh) in &self.clusters[ids[i]].shares {
                let m = &mut best[u];
                m.covered = m.covered.max(sh.covered);
                m.critical = m.critical.max(sh.critical);
                m.noncritical = m.noncritical.max(sh.noncritical);
            }
        }
        let total = best.into_iter().fold(PlanScore::default(), |a, b| a + b);
        PlanScore { critical: total.critical * (1.0 + 1e-9), noncritical: total.noncritical * (1.0 + 1e-9), ..total }
    }

    pub fn serves(&self, clique: &[usize]) -> bool {
        clique.iter().any(|&i| self.clusters[i].serves())
    }

    /// Union of the clusters' members.
    pub fn transmitters(&self, clique: &[usize]) -> IdSet {
        clique.iter().fold(IdSet::new(), |acc, &i| acc.union(&self.clusters[i].members))
    }

    pub fn plan_of(&self, clique: &[usize]) -> TransmissionPlan {
        let mut entries: Vec<PlanEntry> = clique
            .iter()
            .flat_map(|&i| self.clusters[i].parts.iter())
            .map(|p| PlanEntry {
                transmitter: Transmitter::Device(p.transmitter),
                combination: p.combination,
                targets: p.targets,
            })
            .collect();
        entries.sort_by_key(|e| match e.transmitter {
            Transmitter::Device(a) => a,
            Transmitter::BaseStation { .. } => usize::MAX,
        });
        TransmissionPlan::new(entries)
    }
}

/// Collision-free cooperation graph: one vertex per candidate.
pub fn build_cooperation_graph(ctx: &CoopContext) -> Result<CooperationGraph> {
    enumerate_clusters(ctx, 1).map(|c| CooperationGraph::new(ctx.state, c))
}

/// Extended cooperation graph over the given clusters.
pub fn build_extended_graph(ctx: &CoopContext, clusters: Vec<Cluster>) -> CooperationGraph {
    CooperationGraph::new(ctx.state, clusters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::Metrics;
    use crate::sim::fixture;
    use crate::verify::{all_cliques, feasible_transmitter_sets, oracle_candidates};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

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

    fn layering(state: &NetworkState, critical: &[usize]) -> Layering {
        let wanting = state.wanting_devices();
        let critical: IdSet = critical.iter().copied().filter(|&u| wanting.contains(u)).collect();
        let layers = (0..state.num_devices())
            .map(|u| if !wanting.contains(u) { 0 } else if critical.contains(u) { 1 } else { 2 })
            .collect();
        Layering { critical, layers, global_max: 0.0 }
    }

    #[test]
    fn singletons_follow_the_critical_rules() {
        // 0 - 1 - 2 - 3 path; 0 and 3 hold the file
        let has = vec![IdSet::full(1), IdSet::new(), IdSet::new(), IdSet::full(1)];
        let s = network(4, &[(0, 1), (1, 2), (2, 3)], 0.1, has, 1);
        let l = layering(&s, &[]);
        assert_eq!(feasible_singletons(&s, &l).unwrap(), [0, 3].into_iter().collect());
        // a critical wanting device never transmits, a device holding nothing is dropped
        let has = vec![IdSet::full(2), IdSet::single(0), IdSet::new(), IdSet::single(1)];
        let s = network(4, &[(0, 1), (1, 2), (2, 3)], 0.1, has, 2);
        let l = layering(&s, &[1]);
        let f = feasible_singletons(&s, &l).unwrap();
        assert!(!f.contains(1) && !f.contains(2));
        assert!(f.contains(0) && f.contains(3));
    }

    #[test]
    fn disjoint_neighbourhoods_are_adjacent() {
        let has = vec![IdSet::full(1), IdSet::new(), IdSet::new(), IdSet::full(1)];
        let s = network(4, &[(0, 1), (1, 2), (2, 3)], 0.1, has, 1);
        let l = layering(&s, &[1, 2]);
        let ctx = CoopContext::new(&s, &l, Mode::Constrained).unwrap();
        let g = build_cooperation_graph(&ctx).unwrap();
        assert_eq!(g.len(), 2);
        assert!(g.adjacent(0, 1));
        let c = g.best_clique().unwrap();
        assert_eq!(g.transmitters(&c), [0, 3].into_iter().collect());
    }

    #[test]
    fn shared_wanting_neighbour_blocks_adjacency() {
        let has = vec![IdSet::full(1), IdSet::new(), IdSet::full(1)];
        let s = network(3, &[(0, 1), (1, 2)], 0.1, has, 1);
        let l = layering(&s, &[]);
        let ctx = CoopContext::new(&s, &l, Mode::Constrained).unwrap();
        let g = build_cooperation_graph(&ctx).unwrap();
        assert_eq!(g.len(), 2);
        assert!(!g.adjacent(0, 1));
        // as a cluster the shared neighbour collides and nobody is served
        let clusters = enumerate_clusters(&ctx, 2).unwrap();
        let pair = clusters.iter().find(|c| c.members.len() == 2).unwrap();
        assert_eq!(pair.interference, IdSet::single(1));
        assert!(!pair.serves());
    }

    #[test]
    fn fixture_slot_one_transmitters_are_adjacent() {
        let s = fixture::figure_one();
        // U1's zone {U1,U2,U4,U6} and U3's zone {U2,U3,U7} share U2, which wants a file
        let l = layering(&s, &[]);
        let ctx = CoopContext::new(&s, &l, Mode::Constrained).unwrap();
        assert!(ctx.overlap(0, 2));
        // once U2 is served the two zones no longer share a wanting device
        let mut s2 = s.clone();
        s2.apply_reception(1, &FileCombination::single(0)).unwrap();
        let l2 = layering(&s2, &[]);
        let ctx2 = CoopContext::new(&s2, &l2, Mode::Constrained).unwrap();
        let g = build_cooperation_graph(&ctx2).unwrap();
        let i = g.clusters().iter().position(|c| c.members == IdSet::single(0)).unwrap();
        let j = g.clusters().iter().position(|c| c.members == IdSet::single(2)).unwrap();
        assert!(g.adjacent(i, j));
    }

    #[test]
    fn separable_pairs_are_not_clusters() {
        let has = vec![IdSet::full(1), IdSet::new(), IdSet::new(), IdSet::full(1)];
        let s = network(4, &[(0, 1), (1, 2), (2, 3)], 0.1, has, 1);
        let l = layering(&s, &[]);
        let ctx = CoopContext::new(&s, &l, Mode::Constrained).unwrap();
        let clusters = enumerate_clusters(&ctx, 4).unwrap();
        assert!(clusters.iter().all(|c| c.members.len() == 1));
    }

    #[test]
    fn size_one_clusters_match_the_collision_free_graph() {
        let s = fixture::figure_one();
        let m = Metrics::new(&s).unwrap();
        let l = m.layering(&s);
        let ctx = CoopContext::new(&s, &l, Mode::Constrained).unwrap();
        let a = build_cooperation_graph(&ctx).unwrap();
        let b = build_extended_graph(&ctx, enumerate_clusters(&ctx, 1).unwrap());
        assert_eq!(a.clusters(), b.clusters());
        assert_eq!(a.graph(), b.graph());
    }

    fn random_state(rng: &mut ChaCha8Rng, n: usize, files: usize) -> NetworkState {
        loop {
            let mut conn = vec![vec![false; n]; n];
            let p = rng.gen_range(0.3..0.9);
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
                return s;
            }
        }
    }

    fn random_critical(rng: &mut ChaCha8Rng, s: &NetworkState) -> Layering {
        let crit: Vec<usize> = s.wanting_devices().iter().filter(|_| rng.gen_bool(0.4)).collect();
        layering(s, &crit)
    }

    #[test]
    fn clusters_are_inseparable_and_unique() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let s = { let (n, f) = (rng.gen_range(2..=7), rng.gen_range(1..=3)); random_state(&mut rng, n, f) };
            let l = random_critical(&mut rng, &s);
            let ctx = CoopContext::new(&s, &l, Mode::Constrained).unwrap();
            let sets = connected_sets(&ctx, s.num_devices());
            let unique: BTreeSet<IdSet> = sets.iter().copied().collect();
            assert_eq!(unique.len(), sets.len());
            for z in &sets {
                let members: Vec<usize> = z.iter().collect();
                for mask in 1u32..(1 << members.len()) - 1 {
                    let part: IdSet = (0..members.len()).filter(|&i| mask >> i & 1 == 1).map(|i| members[i]).collect();
                    let rest = z.difference(&part);
                    let wanting = s.wanting_devices();
                    assert!(s.combined_coverage(&part).intersection(&s.combined_coverage(&rest)).intersects(&wanting));
                }
            }
        }
    }

    #[test]
    fn cliques_biject_with_feasible_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..60 {
            let s = { let (n, f) = (rng.gen_range(2..=6), rng.gen_range(1..=3)); random_state(&mut rng, n, f) };
            let l = random_critical(&mut rng, &s);
            let ctx = CoopContext::new(&s, &l, Mode::Constrained).unwrap();
            assert_eq!(ctx.candidates(), oracle_candidates(&s, &l.critical));
            let g = build_extended_graph(&ctx, enumerate_clusters(&ctx, s.num_devices()).unwrap());
            let cliques = all_cliques(g.len(), |a, b| g.adjacent(a, b));
            let images: BTreeSet<IdSet> = cliques.iter().map(|c| g.transmitters(c)).collect();
            assert_eq!(images.len(), cliques.len(), "clique map is not injective");
            let expected = feasible_transmitter_sets(&s, &l.critical, ctx.candidates(), false).unwrap();
            assert_eq!(images, expected);
        }
    }

    #[test]
    fn clique_plans_never_collide_across_clusters() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..100 {
            let s = { let (n, f) = (rng.gen_range(2..=7), rng.gen_range(1..=3)); random_state(&mut rng, n, f) };
            let l = random_critical(&mut rng, &s);
            let ctx = CoopContext::new(&s, &l, Mode::Constrained).unwrap();
            let g = build_cooperation_graph(&ctx).unwrap();
            for c in all_cliques(g.len(), |a, b| g.adjacent(a, b)) {
                let plan = g.plan_of(&c);
                plan.validate(&s).unwrap();
                let h = s.hearing_sets(&plan);
                assert!(h.interference.is_empty());
            }
        }
    }

    #[test]
    fn pruning_keeps_the_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..150 {
            let s = { let (n, f) = (rng.gen_range(2..=7), rng.gen_range(1..=3)); random_state(&mut rng, n, f) };
            let l = random_critical(&mut rng, &s);
            let ctx = CoopContext::new(&s, &l, Mode::Constrained).unwrap();
            let all = enumerate_clusters(&ctx, s.num_devices()).unwrap();
            let full = build_extended_graph(&ctx, all.clone());
            let pruned = build_extended_graph(&ctx, prune_dominated(&ctx, all));
            let a = full.score_of(&full.best_clique().unwrap());
            let b = pruned.score_of(&pruned.best_clique().unwrap());
            assert!(!PlanScore::definitely_below(b, a) && !PlanScore::definitely_below(a, b), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn extended_graph_dominates_singletons() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..100 {
            let s = { let (n, f) = (rng.gen_range(2..=7), rng.gen_range(1..=3)); random_state(&mut rng, n, f) };
            let l = random_critical(&mut rng, &s);
            let ctx = CoopContext::new(&s, &l, Mode::Constrained).unwrap();
            let single = build_cooperation_graph(&ctx).unwrap();
            let ext = build_extended_graph(&ctx, enumerate_clusters(&ctx, 3).unwrap());
            let a = single.score_of(&single.best_clique().unwrap());
            let b = ext.score_of(&ext.best_clique().unwrap());
            assert!(b >= a);
        }
    }
}
