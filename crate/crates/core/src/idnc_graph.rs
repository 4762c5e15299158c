//! Local multi-layer IDNC graphs.
//!
//! For one transmitter, every vertex is a pair `(device, file)` of a wanting
//! device in range and a file it misses that the transmitter holds. Two
//! vertices are adjacent when a single XOR of their files is instantly
//! decodable at both devices, so cliques are exactly the decodable
//! combinations together with the devices they serve.
//!
//! Critical devices sit in layer 1. [`LocalIdncGraph::best_combination`]
//! maximises the layer-1 weight exactly and then extends the clique greedily
//! through the higher layers.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt::Write as _;

use crate::bits::IdSet;
use crate::clique::{max_weight_clique_among, WeightedGraph};
use crate::error::{Error, Result};
use crate::metrics::Layering;
use crate::net::{DeviceId, FileCombination, FileId, NetworkState, Transmitter};

/// Erasure probabilities are floored here before taking logarithms, so a
/// lossless link gets a large finite weight instead of infinity.
pub const ERASURE_FLOOR: f64 = 1e-12;

/// `log(1 / eps)` with the floor applied.
#[inline]
pub fn link_weight(eps: f64) -> f64 {
    -eps.max(ERASURE_FLOOR).ln()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdncVertex {
    pub device: DeviceId,
    pub file: FileId,
    pub layer: u32,
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct LocalIdncGraph {
    transmitter: Transmitter,
    vertices: Vec<IdncVertex>,
    graph: WeightedGraph<f64>,
    /// Each device's vertices form one run: `(device, start, end)`.
    runs: Vec<(DeviceId, usize, usize)>,
    /// Vertices by layer, then by weight (heaviest first), then by index.
    priority: Vec<usize>,
    /// Layer-1 cliques already found, by the layer-1 devices left in.
    layer_one: RefCell<HashMap<IdSet, Vec<usize>>>,
}

/// Result of [`LocalIdncGraph::best_combination`].
#[derive(Clone, Debug, PartialEq)]
pub struct BestCombination {
    /// Chosen vertices, ascending.
    pub clique: Vec<usize>,
    /// `None` when nothing can be served.
    pub combination: Option<FileCombination>,
    pub targets: IdSet,
    /// Sum of `log(1/eps)` over critical targets.
    pub critical_weight: f64,
    /// Sum of `log(1/eps)` over the other targets.
    pub noncritical_weight: f64,
}


/// Local graph of device `transmitter`, leaving out every device in `excluded`.
pub fn build_local_graph(
    state: &NetworkState,
    layering: &Layering,
    transmitter: DeviceId,
    excluded: &IdSet,
) -> LocalIdncGraph {
    let reach = state.coverage(transmitter).difference(excluded);
    let mut reach = reach;
    reach.remove(transmitter);
    build(
        state,
        layering,
        Transmitter::Device(transmitter),
        state.has(transmitter),
        reach,
        |u| state.erasure(transmitter, u),
    )
}

/// Local graph of an infrastructure node that holds every file and reaches
/// every device with erasure probability `erasure`.
pub fn build_base_station_graph(
    state: &NetworkState,
    layering: &Layering,
    erasure: f64,
) -> LocalIdncGraph {
    build(
        state,
        layering,
        Transmitter::BaseStation { erasure },
        state.all_files(),
        state.all_devices(),
        |_| erasure,
    )
}

fn build(
    state: &NetworkState,
    layering: &Layering,
    transmitter: Transmitter,
    source: IdSet,
    reach: IdSet,
    erasure: impl Fn(DeviceId) -> f64,
) -> LocalIdncGraph {
    let mut vertices = Vec::new();
    for u in reach.iter() {
        let eligible = state.wants(u).intersection(&source);
        let weight = link_weight(erasure(u));
        for f in eligible.iter() {
            vertices.push(IdncVertex { device: u, file: f, layer: layering.layer(u), weight });
        }
    }
    let mut graph = WeightedGraph::new(vertices.iter().map(|v| v.weight).collect());
    for (i, a) in vertices.iter().enumerate() {
        let has_a = state.has(a.device);
        for (j, b) in vertices.iter().enumerate().skip(i + 1) {
            if a.file == b.file || (has_a.contains(b.file) && state.has(b.device).contains(a.file)) {
                graph.add_edge(i, j);
            }
        }
    }
    LocalIdncGraph::assemble(transmitter, vertices, graph)
}

impl LocalIdncGraph {
    fn assemble(transmitter: Transmitter, vertices: Vec<IdncVertex>, graph: WeightedGraph<f64>) -> Self {
        let mut runs: Vec<(DeviceId, usize, usize)> = Vec::new();
        for (i, v) in vertices.iter().enumerate() {
            match runs.last_mut() {
                Some(r) if r.0 == v.device => r.2 = i + 1,
                _ => runs.push((v.device, i, i + 1)),
            }
        }
        let mut priority: Vec<usize> = (0..vertices.len()).collect();
        priority.sort_by(|&a, &b| {
            let (x, y) = (&vertices[a], &vertices[b]);
            x.layer.cmp(&y.layer).then(y.weight.total_cmp(&x.weight)).then(a.cmp(&b))
        });
        LocalIdncGraph { transmitter, vertices, graph, runs, priority, layer_one: RefCell::default() }
    }

    pub fn transmitter(&self) -> Transmitter {
        self.transmitter
    }

    pub fn vertices(&self) -> &[IdncVertex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.graph.has_edge(a, b)
    }

    pub fn graph(&self) -> &WeightedGraph<f64> {
        &self.graph
    }

    /// Devices owning at least one vertex.
    pub fn devices(&self) -> IdSet {
        self.vertices.iter().map(|v| v.device).collect()
    }

    /// The same graph without the vertices of `excluded` devices. Vertex
    /// order is preserved, so ties resolve the same way as in `self`.
    pub fn without_devices(&self, excluded: &IdSet) -> LocalIdncGraph {
        let keep: Vec<usize> =
            (0..self.len()).filter(|&i| !excluded.contains(self.vertices[i].device)).collect();
        LocalIdncGraph::assemble(
            self.transmitter,
            keep.iter().map(|&i| self.vertices[i]).collect(),
            self.graph.induced(&keep),
        )
    }

    /// XOR of the clique's files and the devices it serves.
    pub fn combination_of(&self, clique: &[usize]) -> Result<(Option<FileCombination>, IdSet)> {
        if !self.graph.is_clique(clique) {
            return Err(Error::InvalidPlan("vertex set is not a clique".into()));
        }
        let files: IdSet = clique.iter().map(|&i| self.vertices[i].file).collect();
        let targets: IdSet = clique.iter().map(|&i| self.vertices[i].device).collect();
        let combination = if files.is_empty() { None } else { Some(FileCombination::new(files)?) };
        Ok((combination, targets))
    }

    /// Exact maximum-weight clique over layer 1, then greedy extension one
    /// layer at a time: within a layer the heaviest vertex adjacent to every
    /// chosen vertex is added until none is left, ties going to the smaller
    /// device and then the smaller file.
    pub fn best_combination(&self) -> Result<BestCombination> {
        self.best_combination_excluding(&IdSet::new())
    }

    /// [`best_combination`](Self::best_combination) of
    /// [`without_devices(excluded)`](Self::without_devices), with clique
    /// indices into `self`.
    pub fn best_combination_excluding(&self, excluded: &IdSet) -> Result<BestCombination> {
        let n = self.len();
        let mut first = Vec::new();
        let mut first_devices = IdSet::new();
        let mut open = vec![0u64; n.div_ceil(64)];
        for &(u, start, end) in self.runs.iter().filter(|r| !excluded.contains(r.0)) {
            if self.vertices[start].layer == 1 {
                first.extend(start..end);
                first_devices.insert(u);
            } else {
                for i in start..end {
                    open[i / 64] |= 1 << (i % 64);
                }
            }
        }
        let mut chosen: Vec<usize> = match first[..] {
            [] => Vec::new(),
            [v] if self.vertices[v].weight > 0.0 => vec![v],
            _ => {
                let cached = self.layer_one.borrow().get(&first_devices).cloned();
                match cached {
                    Some(c) => c,
                    None => {
                        let c = max_weight_clique_among(&self.graph, &first)?;
                        self.layer_one.borrow_mut().insert(first_devices, c.clone());
                        c
                    }
                }
            }
        };
        let critical_weight = self.graph.clique_weight(&chosen);

        // Layers are filled in order, so the next pick is always the open
        // vertex with the lowest layer, then the highest weight.
        for &c in &chosen {
            for (o, r) in open.iter_mut().zip(self.graph.row(c)) {
                *o &= r;
            }
        }
        let mut noncritical_weight = 0.0;
        let mut extension = Vec::new();
        for &v in &self.priority {
            if open[v / 64] >> (v % 64) & 1 == 1 {
                extension.push(v);
                for (o, r) in open.iter_mut().zip(self.graph.row(v)) {
                    *o &= r;
                }
            }
        }
        extension.sort_unstable();
        for &v in &extension {
            noncritical_weight += self.vertices[v].weight;
        }
        chosen.extend(extension);
        chosen.sort_unstable();
        debug_assert!(self.graph.is_clique(&chosen));
        let files: IdSet = chosen.iter().map(|&i| self.vertices[i].file).collect();
        let targets: IdSet = chosen.iter().map(|&i| self.vertices[i].device).collect();
        let combination = if files.is_empty() { None } else { Some(FileCombination::new(files)?) };
        Ok(BestCombination { clique: chosen, combination, targets, critical_weight, noncritical_weight })
    }

    /// Adjacency-list dump, one line per vertex:
    /// `u:f:layer:weight -> u:f:layer:weight, ...`.
    pub fn debug_dump(&self) -> String {
        let label = |v: &IdncVertex| format!("{}:{}:{}:{:.6}", v.device, v.file, v.layer, v.weight);
        let mut out = String::new();
        for (i, v) in self.vertices.iter().enumerate() {
            let nbrs: Vec<String> =
                self.graph.neighbors(i).map(|j| label(&self.vertices[j])).collect();
            let _ = writeln!(out, "{} -> {}", label(v), nbrs.join(", "));
        }
        out
    }
}
