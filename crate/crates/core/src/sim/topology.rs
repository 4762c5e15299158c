//! Random topologies, erasure matrices and initial file holdings.

use rand::seq::index::sample;
use rand::Rng;

use crate::bits::IdSet;
use crate::error::{Error, Result};
use crate::net::{connectivity_index_of, NetworkState};

/// Rejection-sampling attempts before a spanning tree is forced in.
const CONNECT_ATTEMPTS: usize = 200;

/// Erasure probabilities drawn by the harness stay inside this range.
pub const ERASURE_RANGE: (f64, f64) = (0.01, 0.99);

/// Smallest connectivity index a connected graph on `u` devices can have:
/// the diagonal plus both directions of a spanning tree.
pub fn min_connectivity(u: usize) -> f64 {
    if u <= 1 {
        return 1.0;
    }
    (3 * u - 2) as f64 / (u * u) as f64
}

/// Connected random graph whose connectivity index is as close to `c` as
/// the edge granularity allows. Edges are placed uniformly; disconnected
/// draws are rejected, and after [`CONNECT_ATTEMPTS`] failures a random
/// spanning tree is laid down first and the rest filled uniformly.
pub fn generate_topology<R: Rng>(u: usize, c: f64, rng: &mut R) -> Result<Vec<Vec<bool>>> {
    if u == 0 {
        return Err(Error::Config("need at least one device".into()));
    }
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::Config(format!("connectivity index {c} outside (0, 1]")));
    }
    let pairs = u * (u - 1) / 2;
    let edges = (((c * (u * u) as f64) - u as f64) / 2.0).round().max(0.0) as usize;
    let edges = edges.min(pairs);
    if u > 1 && edges < u - 1 {
        return Err(Error::Config(format!(
            "connectivity index {c} too small for a connected graph on {u} devices (minimum {:.4})",
            min_connectivity(u)
        )));
    }
    let pair_of = |k: usize| {
        // row-major upper triangle
        let mut a = 0;
        let mut k = k;
        while k >= u - 1 - a {
            k -= u - 1 - a;
            a += 1;
        }
        (a, a + 1 + k)
    };
    let empty = || {
        let mut m = vec![vec![false; u]; u];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = true;
        }
        m
    };
    for _ in 0..CONNECT_ATTEMPTS {
        let mut m = empty();
        for k in sample(rng, pairs, edges).iter() {
            let (a, b) = pair_of(k);
            m[a][b] = true;
            m[b][a] = true;
        }
        if connected(&m) {
            return Ok(m);
        }
    }
    let mut m = empty();
    let mut order: Vec<usize> = (0..u).collect();
    for i in (1..u).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    for i in 1..u {
        let (a, b) = (order[i], order[rng.gen_range(0..i)]);
        m[a][b] = true;
        m[b][a] = true;
    }
    let free: Vec<(usize, usize)> =
        (0..pairs).map(pair_of).filter(|&(a, b)| !m[a][b]).collect();
    for k in sample(rng, free.len(), edges - (u - 1)).iter() {
        let (a, b) = free[k];
        m[a][b] = true;
        m[b][a] = true;
    }
    debug_assert!((connectivity_index_of(&m) - (u + 2 * edges) as f64 / (u * u) as f64).abs() < 1e-12);
    Ok(m)
}

fn connected(m: &[Vec<bool>]) -> bool {
    let n = m.len();
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(a) = stack.pop() {
        for b in 0..n {
            if m[a][b] && !seen[b] {
                seen[b] = true;
                count += 1;
                stack.push(b);
            }
        }
    }
    count == n
}

/// Per-link erasures drawn uniformly from `[mean - jitter, mean + jitter]`
/// and clipped to [`ERASURE_RANGE`]; zero on the diagonal.
pub fn generate_erasures<R: Rng>(u: usize, mean: f64, jitter: f64, rng: &mut R) -> Vec<Vec<f64>> {
    let (lo, hi) = ((mean - jitter).max(ERASURE_RANGE.0), (mean + jitter).min(ERASURE_RANGE.1));
    (0..u)
        .map(|a| {
            (0..u)
                .map(|b| {
                    if a == b {
                        0.0
                    } else if hi > lo {
                        rng.gen_range(lo..=hi)
                    } else {
                        lo
                    }
                })
                .collect()
        })
        .collect()
}

/// Each device holds each file with probability one minus its expected
/// erasure; files nobody drew go to one uniformly chosen device.
pub fn initialize_holdings<R: Rng>(
    connectivity: &[Vec<bool>],
    erasures: &[Vec<f64>],
    num_files: usize,
    rng: &mut R,
) -> Vec<IdSet> {
    let u = connectivity.len();
    let mut has = vec![IdSet::new(); u];
    for (d, h) in has.iter_mut().enumerate() {
        let zone: Vec<usize> = (0..u).filter(|&v| connectivity[d][v]).collect();
        let eps = if zone.len() < 2 {
            0.0
        } else {
            zone.iter().map(|&v| erasures[v][d]).sum::<f64>() / zone.len() as f64
        };
        for f in 0..num_files {
            if rng.gen::<f64>() >= eps {
                h.insert(f);
            }
        }
    }
    for f in 0..num_files {
        if !has.iter().any(|h| h.contains(f)) {
            has[rng.gen_range(0..u)].insert(f);
        }
    }
    has
}

/// Topology, erasures and holdings in one go.
pub fn generate_instance<R: Rng>(
    num_devices: usize,
    num_files: usize,
    connectivity: f64,
    mean_erasure: f64,
    jitter: f64,
    rng: &mut R,
) -> Result<NetworkState> {
    let conn = generate_topology(num_devices, connectivity, rng)?;
    let erasures = generate_erasures(num_devices, mean_erasure, jitter, rng);
    let has = initialize_holdings(&conn, &erasures, num_files, rng);
    NetworkState::new(&conn, erasures, has, num_files)
}
