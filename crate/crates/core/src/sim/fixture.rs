//! A hand-built seven-device network with a two-slot schedule.
//!
//! Devices `U1..U7` are indices `0..6` and files `f1..f3` are `0..2`. `U3` and
//! `U4` hold everything; `U1`, `U2` and `U5` miss `f1`, `U6` misses `f2` and
//! `U7` misses `f3`. In the first slot `U1` and `U3` transmit together, which
//! leaves `U2` in collision and `U5` out of range; in the second slot `U4`
//! serves `f1` to `U1`, `U2` and `U5`. All links are lossless.

use crate::bits::IdSet;
use crate::net::{FileCombination, NetworkState, PlanEntry, TransmissionPlan, Transmitter};

pub const EDGES: [(usize, usize); 7] = [(0, 1), (2, 1), (0, 5), (2, 6), (3, 0), (3, 1), (3, 4)];

pub fn figure_one() -> NetworkState {
    let n = 7;
    let mut conn = vec![vec![false; n]; n];
    for (i, row) in conn.iter_mut().enumerate() {
        row[i] = true;
    }
    for (a, b) in EDGES {
        conn[a][b] = true;
        conn[b][a] = true;
    }
    let all = IdSet::full(3);
    let missing = |f: usize| all.difference(&IdSet::single(f));
    let has = vec![missing(0), missing(0), all, all, missing(0), missing(1), missing(2)];
    NetworkState::new(&conn, vec![vec![0.0; n]; n], has, 3).expect("fixture is valid")
}

fn entry(a: usize, file: usize, targets: &[usize]) -> PlanEntry {
    PlanEntry {
        transmitter: Transmitter::Device(a),
        combination: FileCombination::single(file),
        targets: targets.iter().copied().collect(),
    }
}

/// `U1` sends `f2` to `U6`; `U3` sends `f3` to `U7`.
pub fn figure_one_slot_one() -> TransmissionPlan {
    TransmissionPlan::new(vec![entry(0, 1, &[5]), entry(2, 2, &[6])])
}

/// `U4` sends `f1` to `U1`, `U2` and `U5`.
pub fn figure_one_slot_two() -> TransmissionPlan {
    TransmissionPlan::new(vec![entry(3, 0, &[0, 1, 4])])
}
