//! Exact maximum-weight clique search.
//!
//! Branch and bound in the style of MCQ/MCS: candidates are greedily colored,
//! and the sum of the heaviest vertex of each color class bounds every clique
//! that can still be formed. Weights only need to form an ordered monoid with
//! nonnegative elements, so the same solver handles plain `f64` weights and
//! the lexicographic scores of the cooperation graphs.
//!
//! Among cliques of equal weight the lexicographically smallest sorted vertex
//! list wins. Weights are always summed in ascending vertex order so that the
//! solver and [`brute_force_clique`] see bit-identical totals.

use std::cmp::Ordering;
use std::fmt::Debug;
use std::ops::Add;

use crate::error::{Error, Result};

/// Largest graph [`brute_force_clique`] accepts.
pub const BRUTE_FORCE_MAX: usize = 20;

/// Default number of search nodes before [`max_weight_clique`] gives up.
pub const DEFAULT_NODE_BUDGET: u64 = 50_000_000;

pub trait CliqueWeight: Copy + Debug + PartialOrd + Add<Output = Self> {
    fn zero() -> Self;

    /// True when `bound` is below `best` by more than accumulated rounding.
    fn definitely_below(bound: Self, best: Self) -> bool;

    fn is_nonnegative(self) -> bool {
        self.partial_cmp(&Self::zero()).is_some_and(|o| o != Ordering::Less)
    }

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl CliqueWeight for f64 {
    fn zero() -> Self {
        0.0
    }

    fn definitely_below(bound: Self, best: Self) -> bool {
        bound < best - 1e-9 * best.abs().max(1.0)
    }
}

/// Undirected vertex-weighted graph with a bit-matrix adjacency.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph<W = f64> {
    weights: Vec<W>,
    words: usize,
    /// Row-major bit matrix, `words` words per vertex.
    adjacency: Vec<u64>,
}

impl<W: CliqueWeight> WeightedGraph<W> {
    /// Edgeless graph; panics on a negative or incomparable weight.
    pub fn new(weights: Vec<W>) -> Self {
        assert!(
            weights.iter().all(|w| w.is_nonnegative()),
            "clique weights must be nonnegative"
        );
        let n = weights.len();
        let words = n.div_ceil(64);
        WeightedGraph { weights, words, adjacency: vec![0; words * n] }
    }

    pub fn from_edges(weights: Vec<W>, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Self::new(weights);
        for (a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, v: usize) -> W {
        self.weights[v]
    }

    pub fn weights(&self) -> &[W] {
        &self.weights
    }

    /// Adds the edge `a - b`; self-loops are ignored.
    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        self.adjacency[a * self.words + b / 64] |= 1 << (b % 64);
        self.adjacency[b * self.words + a / 64] |= 1 << (a % 64);
    }

    #[inline]
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a * self.words + b / 64] >> (b % 64) & 1 == 1
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.neighbors_of(v)
    }

    /// Neighbours of `v` as a bit set (bit `u % 64` of word `u / 64`).
    pub fn row(&self, v: usize) -> &[u64] {
        &self.adjacency[v * self.words..(v + 1) * self.words]
    }

    fn neighbors_of(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(v).iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                (w != 0).then(|| {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    i * 64 + b
                })
            })
        })
    }

    pub fn is_clique(&self, vertices: &[usize]) -> bool {
        vertices.iter().enumerate().all(|(i, &a)| {
            a < self.len() && vertices[i + 1..].iter().all(|&b| a != b && self.has_edge(a, b))
        })
    }

    /// Total weight, summed in ascending vertex order.
    pub fn clique_weight(&self, vertices: &[usize]) -> W {
        let mut sorted = vertices.to_vec();
        sorted.sort_unstable();
        sorted.iter().fold(W::zero(), |acc, &v| acc + self.weights[v])
    }

    /// Subgraph induced by `keep` (in the given order), with the old index of
    /// every new vertex.
    pub fn induced(&self, keep: &[usize]) -> WeightedGraph<W> {
        let mut g = WeightedGraph::new(keep.iter().map(|&v| self.weights[v]).collect());
        let mut pos = vec![usize::MAX; self.len()];
        for (i, &a) in keep.iter().enumerate() {
            pos[a] = i;
        }
        for (i, &a) in keep.iter().enumerate() {
            for b in self.neighbors_of(a) {
                let j = pos[b];
                if j != usize::MAX && j > i {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    /// Graph from a row-major adjacency bit matrix of `weights.len().div_ceil(64)`
    /// words per row. Panics on a self-loop; symmetry is checked in debug builds.
    pub fn from_rows(weights: Vec<W>, adjacency: Vec<u64>) -> Self {
        let mut g = Self::new(weights);
        assert_eq!(adjacency.len(), g.adjacency.len(), "adjacency has the wrong size");
        g.adjacency = adjacency;
        for a in 0..g.len() {
            assert!(!g.has_edge(a, a), "self-loop at {a}");
            debug_assert!(g.neighbors_of(a).all(|b| g.has_edge(b, a)), "adjacency is not symmetric at {a}");
        }
        g
    }
}

/// `a` beats `b`: strictly heavier, or equally heavy and lexicographically smaller.
fn better<W: CliqueWeight>(wa: W, a: &[usize], wb: W, b: &[usize]) -> bool {
    match wa.partial_cmp(&wb) {
        Some(Ordering::Greater) => true,
        Some(Ordering::Equal) => a < b,
        _ => false,
    }
}

/// Maximum-weight clique with the default node budget.
pub fn max_weight_clique<W: CliqueWeight>(g: &WeightedGraph<W>) -> Result<Vec<usize>> {
    max_weight_clique_with_budget(g, DEFAULT_NODE_BUDGET)
}

/// Maximum-weight clique, failing with [`Error::CliqueBudgetExceeded`] rather
/// than returning a possibly suboptimal clique when the search grows past
/// `budget` nodes. The result is sorted ascending.
pub fn max_weight_clique_with_budget<W: CliqueWeight>(
    g: &WeightedGraph<W>,
    budget: u64,
) -> Result<Vec<usize>> {
    search(g, budget, None)
}

/// Like [`max_weight_clique_with_budget`], with an extra problem-specific
/// bound: `bound(candidates)` must be at least the weight of every clique
/// drawn from `candidates` (original vertex ids, ascending).
pub fn max_weight_clique_bounded<W: CliqueWeight>(
    g: &WeightedGraph<W>,
    budget: u64,
    bound: &mut dyn FnMut(&[usize]) -> W,
) -> Result<Vec<usize>> {
    search(g, budget, Some(bound))
}

fn search<W: CliqueWeight>(
    g: &WeightedGraph<W>,
    budget: u64,
    bound: Option<&mut dyn FnMut(&[usize]) -> W>,
) -> Result<Vec<usize>> {
    match bound {
        None if g.len() <= 64 => search_small(g, budget),
        bound => search_wide(g, budget, bound),
    }
}

/// Search indices run heaviest first, so greedy coloring puts heavy
/// vertices in the early classes and keeps the bounds tight.
fn heaviest_first<W: CliqueWeight>(g: &WeightedGraph<W>) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..g.len()).collect();
    perm.sort_by(|&a, &b| g.weights[b].partial_cmp(&g.weights[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    perm
}

fn search_wide<W: CliqueWeight>(
    g: &WeightedGraph<W>,
    budget: u64,
    bound: Option<&mut dyn FnMut(&[usize]) -> W>,
) -> Result<Vec<usize>> {
    let n = g.len();
    let perm = heaviest_first(g);
    let mut pos = vec![0; n];
    for (i, &v) in perm.iter().enumerate() {
        pos[v] = i;
    }
    let words = g.words;
    let mut adjacency = vec![0u64; words * n];
    for (i, &v) in perm.iter().enumerate() {
        for u in g.neighbors_of(v) {
            let j = pos[u];
            adjacency[i * words + j / 64] |= 1 << (j % 64);
        }
    }
    let mut search = Search {
        weights: perm.iter().map(|&v| g.weights[v]).collect(),
        adjacency,
        words,
        original: perm,
        original_weights: &g.weights,
        bound,
        members: Vec::new(),
        best: Vec::new(),
        best_weight: W::zero(),
        nodes: 0,
        budget,
        clique: Vec::new(),
        scratch: Vec::new(),
    };
    let mut all = vec![0u64; words];
    for i in 0..n {
        all[i / 64] |= 1 << (i % 64);
    }
    search.expand(all, W::zero())?;
    Ok(search.best)
}

struct Search<'a, 'b, W> {
    weights: Vec<W>,
    adjacency: Vec<u64>,
    words: usize,
    original: Vec<usize>,
    original_weights: &'a [W],
    bound: Option<&'b mut dyn FnMut(&[usize]) -> W>,
    members: Vec<usize>,
    best: Vec<usize>,
    best_weight: W,
    nodes: u64,
    budget: u64,
    clique: Vec<usize>,
    scratch: Vec<usize>,
}

fn first_bit(bits: &[u64]) -> Option<usize> {
    bits.iter().enumerate().find(|(_, &w)| w != 0).map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

impl<W: CliqueWeight> Search<'_, '_, W> {
    fn row(&self, v: usize) -> &[u64] {
        &self.adjacency[v * self.words..(v + 1) * self.words]
    }

    fn offer_current(&mut self) {
        self.scratch.clear();
        self.scratch.extend(self.clique.iter().map(|&i| self.original[i]));
        self.scratch.sort_unstable();
        let w = self.scratch.iter().fold(W::zero(), |acc, &v| acc + self.original_weights[v]);
        if better(w, &self.scratch, self.best_weight, &self.best) {
            self.best_weight = w;
            self.best.clone_from(&self.scratch);
        }
    }

    fn expand(&mut self, mut candidates: Vec<u64>, weight: W) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::CliqueBudgetExceeded { budget: self.budget });
        }
        self.offer_current();
        if let Some(bound) = self.bound.as_mut() {
            self.members.clear();
            for (i, &w) in candidates.iter().enumerate() {
                let mut w = w;
                while w != 0 {
                    self.members.push(self.original[i * 64 + w.trailing_zeros() as usize]);
                    w &= w - 1;
                }
            }
            if self.members.is_empty() {
                return Ok(());
            }
            self.members.sort_unstable();
            if W::definitely_below(weight + bound(&self.members), self.best_weight) {
                return Ok(());
            }
        }
        let (order, bounds) = self.color(&candidates);
        for i in (0..order.len()).rev() {
            if W::definitely_below(weight + bounds[i], self.best_weight) {
                return Ok(());
            }
            let v = order[i];
            let next: Vec<u64> = candidates.iter().zip(self.row(v)).map(|(a, b)| a & b).collect();
            self.clique.push(v);
            self.expand(next, weight + self.weights[v])?;
            self.clique.pop();
            candidates[v / 64] &= !(1 << (v % 64));
        }
        Ok(())
    }

    /// Greedy sequential coloring in index order. Returns the candidates
    /// sorted by color and, for each position, the sum of per-class maxima
    /// up to its class.
    fn color(&self, candidates: &[u64]) -> (Vec<usize>, Vec<W>) {
        let mut uncolored = candidates.to_vec();
        let mut order = Vec::new();
        let mut bounds = Vec::new();
        let mut acc = W::zero();
        let mut class = uncolored.clone();
        while first_bit(&uncolored).is_some() {
            class.copy_from_slice(&uncolored);
            let mut top = W::zero();
            let mut from = 0;
            while let Some(off) = first_bit(&class[from..]) {
                let v = from * 64 + off;
                from = v / 64;
                uncolored[from] &= !(1 << (v % 64));
                class[from] &= !(1 << (v % 64));
                for (c, a) in class[from..].iter_mut().zip(&self.row(v)[from..]) {
                    *c &= !a;
                }
                top = top.max(self.weights[v]);
                order.push(v);
            }
            acc = acc + top;
            bounds.resize(order.len(), acc);
        }
        (order, bounds)
    }
}

/// The same search on graphs of at most 64 vertices, with single-word sets.
fn search_small<W: CliqueWeight>(g: &WeightedGraph<W>, budget: u64) -> Result<Vec<usize>> {
    small(&g.weights, |v| g.row(v)[0], budget)
}

/// Single-word search over `weights`; `mask(v)` is the neighbour set of `v`.
fn small<W: CliqueWeight>(weights: &[W], mask: impl Fn(usize) -> u64, budget: u64) -> Result<Vec<usize>> {
    let n = weights.len();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.sort_by(|&a, &b| weights[b].partial_cmp(&weights[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    let mut pos = [0u8; 64];
    for (i, &v) in perm.iter().enumerate() {
        pos[v] = i as u8;
    }
    let adjacency: Vec<u64> = perm
        .iter()
        .map(|&v| {
            let mut bits = mask(v);
            let mut m = 0u64;
            while bits != 0 {
                m |= 1 << pos[bits.trailing_zeros() as usize];
                bits &= bits - 1;
            }
            m
        })
        .collect();
    let mut s = SmallSearch {
        weights: perm.iter().map(|&v| weights[v]).collect(),
        adjacency,
        original: perm,
        original_weights: weights,
        best: Vec::new(),
        best_weight: W::zero(),
        nodes: 0,
        budget,
        clique: Vec::new(),
        scratch: Vec::new(),
    };
    let all = if n == 64 { !0 } else { (1u64 << n) - 1 };
    s.expand(all, W::zero())?;
    Ok(s.best)
}

/// [`max_weight_clique`] of the subgraph induced by `keep` (ascending),
/// returned as vertex ids of `g`.
pub fn max_weight_clique_among<W: CliqueWeight>(g: &WeightedGraph<W>, keep: &[usize]) -> Result<Vec<usize>> {
    debug_assert!(keep.windows(2).all(|w| w[0] < w[1]));
    if keep.len() > 64 {
        let found = max_weight_clique(&g.induced(keep))?;
        return Ok(found.into_iter().map(|i| keep[i]).collect());
    }
    let weights: Vec<W> = keep.iter().map(|&v| g.weights[v]).collect();
    let mask = |i: usize| {
        let row = g.row(keep[i]);
        keep.iter().enumerate().fold(0u64, |m, (j, &u)| m | (((row[u / 64] >> (u % 64)) & 1) << j))
    };
    let found = small(&weights, mask, DEFAULT_NODE_BUDGET)?;
    Ok(found.into_iter().map(|i| keep[i]).collect())
}

struct SmallSearch<'a, W> {
    weights: Vec<W>,
    adjacency: Vec<u64>,
    original: Vec<usize>,
    original_weights: &'a [W],
    best: Vec<usize>,
    best_weight: W,
    nodes: u64,
    budget: u64,
    clique: Vec<usize>,
    scratch: Vec<usize>,
}

impl<W: CliqueWeight> SmallSearch<'_, W> {
    fn expand(&mut self, mut candidates: u64, weight: W) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::CliqueBudgetExceeded { budget: self.budget });
        }
        self.scratch.clear();
        self.scratch.extend(self.clique.iter().map(|&i| self.original[i]));
        self.scratch.sort_unstable();
        let w = self.scratch.iter().fold(W::zero(), |acc, &v| acc + self.original_weights[v]);
        if better(w, &self.scratch, self.best_weight, &self.best) {
            self.best_weight = w;
            self.best.clone_from(&self.scratch);
        }

        let mut order = [0usize; 64];
        let mut bounds = [W::zero(); 64];
        let mut len = 0;
        let mut uncolored = candidates;
        let mut acc = W::zero();
        while uncolored != 0 {
            let mut class = uncolored;
            let mut top = W::zero();
            let start = len;
            while class != 0 {
                let v = class.trailing_zeros() as usize;
                class &= !(1 << v) & !self.adjacency[v];
                uncolored &= !(1 << v);
                order[len] = v;
                len += 1;
                top = top.max(self.weights[v]);
            }
            acc = acc + top;
            bounds[start..len].fill(acc);
        }
        for i in (0..len).rev() {
            if W::definitely_below(weight + bounds[i], self.best_weight) {
                return Ok(());
            }
            let v = order[i];
            self.clique.push(v);
            self.expand(candidates & self.adjacency[v], weight + self.weights[v])?;
            self.clique.pop();
            candidates &= !(1 << v);
        }
        Ok(())
    }
}

/// Exhaustive subset scan with the same tie-break as [`max_weight_clique`].
pub fn brute_force_clique<W: CliqueWeight>(g: &WeightedGraph<W>) -> Result<Vec<usize>> {
    let n = g.len();
    if n > BRUTE_FORCE_MAX {
        return Err(Error::OracleTooLarge { n, max: BRUTE_FORCE_MAX });
    }
    let masks: Vec<u32> = (0..n)
        .map(|v| (0..n).filter(|&u| g.has_edge(v, u)).fold(0u32, |m, u| m | 1 << u))
        .collect();
    let mut best = Vec::new();
    let mut best_weight = W::zero();
    for subset in 1u32..(1u32 << n) {
        let members: Vec<usize> = (0..n).filter(|&v| subset >> v & 1 == 1).collect();
        if !members.iter().all(|&v| subset & !masks[v] & !(1 << v) == 0) {
            continue;
        }
        let w = members.iter().fold(W::zero(), |acc, &v| acc + g.weights[v]);
        if better(w, &members, best_weight, &best) {
            best_weight = w;
            best = members;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_word_search_matches_the_wide_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for k in 0..300 {
            let n = rng.gen_range(1..=64);
            let weights: Vec<f64> =
                (0..n).map(|_| if k % 2 == 0 { rng.gen_range(0.0..5.0) } else { rng.gen_range(0..3) as f64 }).collect();
            let density = rng.gen_range(0.1..0.9);
            let mut g = WeightedGraph::new(weights);
            for a in 0..n {
                for b in a + 1..n {
                    if rng.gen_bool(density) {
                        g.add_edge(a, b);
                    }
                }
            }
            assert_eq!(search_small(&g, DEFAULT_NODE_BUDGET).unwrap(), search_wide(&g, DEFAULT_NODE_BUDGET, None).unwrap());
        }
    }

    #[test]
    fn subset_search_matches_the_induced_graph() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..200 {
            let n = rng.gen_range(1..=150);
            let density = rng.gen_range(0.1..0.9);
            let g = random_graph(&mut rng, n, density);
            let keep: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
            let expected: Vec<usize> =
                max_weight_clique(&g.induced(&keep)).unwrap().into_iter().map(|i| keep[i]).collect();
            assert_eq!(max_weight_clique_among(&g, &keep).unwrap(), expected);
        }
    }

    fn random_graph(rng: &mut ChaCha8Rng, n: usize, density: f64) -> WeightedGraph {
        let weights = (0..n).map(|_| rng.gen_range(0.0..10.0)).collect();
        let mut g = WeightedGraph::new(weights);
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(density) {
                    g.add_edge(a, b);
                }
            }
        }
        g
    }

    #[test]
    fn triangle_takes_everything() {
        let g = WeightedGraph::from_edges(vec![1.0; 3], [(0, 1), (1, 2), (0, 2)]);
        let c = max_weight_clique(&g).unwrap();
        assert_eq!(c, vec![0, 1, 2]);
        assert_eq!(g.clique_weight(&c), 3.0);
    }

    #[test]
    fn path_tie_breaks_lexicographically() {
        let g = WeightedGraph::from_edges(vec![2.0, 3.0, 2.0], [(0, 1), (1, 2)]);
        assert_eq!(max_weight_clique(&g).unwrap(), vec![0, 1]);
        assert_eq!(brute_force_clique(&g).unwrap(), vec![0, 1]);
    }

    #[test]
    fn empty_single_and_edgeless() {
        let g: WeightedGraph = WeightedGraph::new(vec![]);
        assert!(max_weight_clique(&g).unwrap().is_empty());
        let g = WeightedGraph::new(vec![4.0]);
        assert_eq!(brute_force_clique(&g).unwrap(), vec![0]);
        let g = WeightedGraph::new(vec![1.0, 5.0, 3.0]);
        assert_eq!(brute_force_clique(&g).unwrap(), vec![1]);
        assert_eq!(max_weight_clique(&g).unwrap(), vec![1]);
    }

    #[test]
    fn zero_weight_members_follow_the_tie_break() {
        // {1} and {0,1} weigh the same; [0, 1] < [1]
        let g = WeightedGraph::from_edges(vec![0.0, 5.0], [(0, 1)]);
        assert_eq!(max_weight_clique(&g).unwrap(), vec![0, 1]);
        assert_eq!(brute_force_clique(&g).unwrap(), vec![0, 1]);
        // {0} and {0,1} weigh the same; [0] < [0, 1]
        let g = WeightedGraph::from_edges(vec![5.0, 0.0], [(0, 1)]);
        assert_eq!(max_weight_clique(&g).unwrap(), vec![0]);
    }

    #[test]
    fn oracle_rejects_large_graphs() {
        let g = WeightedGraph::new(vec![1.0; 21]);
        assert!(matches!(brute_force_clique(&g), Err(Error::OracleTooLarge { n: 21, .. })));
    }

    #[test]
    fn budget_is_enforced() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_graph(&mut rng, 60, 0.7);
        assert!(matches!(
            max_weight_clique_with_budget(&g, 5),
            Err(Error::CliqueBudgetExceeded { budget: 5 })
        ));
    }

    #[test]
    fn matches_brute_force_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let n = rng.gen_range(0..=12);
            let density = rng.gen_range(0.0..1.0);
            let g = random_graph(&mut rng, n, density);
            let fast = max_weight_clique(&g).unwrap();
            assert!(g.is_clique(&fast));
            assert_eq!(fast, brute_force_clique(&g).unwrap());
        }
    }

    #[test]
    fn larger_graphs_beat_every_vertex_neighborhood_greedy() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let g = random_graph(&mut rng, 120, 0.5);
            let c = max_weight_clique(&g).unwrap();
            assert!(g.is_clique(&c));
            let best = g.clique_weight(&c);
            for v in 0..g.len() {
                // greedy clique grown from v is never heavier than the optimum
                let mut greedy = vec![v];
                let mut nb: Vec<usize> = g.neighbors(v).collect();
                nb.sort_by(|&a, &b| g.weight(b).total_cmp(&g.weight(a)));
                for u in nb {
                    if greedy.iter().all(|&x| g.has_edge(x, u)) {
                        greedy.push(u);
                    }
                }
                assert!(g.clique_weight(&greedy) <= best + 1e-9);
            }
        }
    }

    proptest! {
        #[test]
        fn isolated_zero_vertex_and_scaling_do_not_change_answer(
            seed in 0u64..10_000, n in 1usize..10, scale in 0.1f64..50.0
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_graph(&mut rng, n, 0.5);
            let base = max_weight_clique(&g).unwrap();

            let mut weights = g.weights().to_vec();
            weights.push(0.0);
            let mut padded = WeightedGraph::new(weights);
            for a in 0..n { for b in a + 1..n { if g.has_edge(a, b) { padded.add_edge(a, b); } } }
            prop_assert_eq!(&max_weight_clique(&padded).unwrap(), &base);

            // Scaling by a power of two keeps sums exact, so ties are preserved.
            let k = 2f64.powi(scale.log2().round() as i32);
            let scaled = WeightedGraph::from_edges(
                g.weights().iter().map(|w| w * k).collect(),
                (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|&(a, b)| g.has_edge(a, b)),
            );
            prop_assert_eq!(max_weight_clique(&scaled).unwrap(), base);
        }
    }
}
