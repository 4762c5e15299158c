//! Network model: topology, erasure channels, and per-device file holdings.
//!
//! A [`NetworkState`] is a plain value. Schedulers read it, the episode runner
//! mutates it through [`NetworkState::apply_reception`] and
//! [`NetworkState::advance_round`].

use std::collections::VecDeque;

use crate::bits::{IdSet, MAX_IDS};
use crate::error::{Error, Result};

pub type DeviceId = usize;
pub type FileId = usize;

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkState {
    num_devices: usize,
    num_files: usize,
    /// Row `u` is the coverage zone of `u` (always contains `u`).
    coverage: Vec<IdSet>,
    /// `erasures[u][v]`: probability a transmission from `u` is lost at `v`.
    erasures: Vec<Vec<f64>>,
    has: Vec<IdSet>,
    all_files: IdSet,
    round: u64,
}

impl NetworkState {
    /// Builds a network and checks every structural invariant: symmetric
    /// unit-diagonal connectivity, connectedness, zero-diagonal erasures in
    /// `[0, 1)`, and every file held somewhere.
    pub fn new(
        connectivity: &[Vec<bool>],
        erasures: Vec<Vec<f64>>,
        has: Vec<IdSet>,
        num_files: usize,
    ) -> Result<Self> {
        let u = connectivity.len();
        if u == 0 {
            return Err(Error::InvalidNetwork("no devices".into()));
        }
        if num_files == 0 {
            return Err(Error::InvalidNetwork("no files".into()));
        }
        if u > MAX_IDS || num_files > MAX_IDS {
            return Err(Error::InvalidNetwork(format!(
                "at most {MAX_IDS} devices and files are supported"
            )));
        }
        if erasures.len() != u || has.len() != u {
            return Err(Error::InvalidNetwork("matrix dimensions disagree".into()));
        }
        let mut coverage = Vec::with_capacity(u);
        for (i, row) in connectivity.iter().enumerate() {
            if row.len() != u {
                return Err(Error::InvalidNetwork(format!("connectivity row {i} has wrong length")));
            }
            if !row[i] {
                return Err(Error::InvalidNetwork(format!("connectivity diagonal false at {i}")));
            }
            for (j, &c) in row.iter().enumerate() {
                if c != connectivity[j][i] {
                    return Err(Error::InvalidNetwork(format!("connectivity not symmetric at ({i},{j})")));
                }
            }
            coverage.push(row.iter().enumerate().filter(|(_, &c)| c).map(|(j, _)| j).collect());
        }
        for (i, row) in erasures.iter().enumerate() {
            if row.len() != u {
                return Err(Error::InvalidNetwork(format!("erasure row {i} has wrong length")));
            }
            if row[i] != 0.0 {
                return Err(Error::InvalidNetwork(format!("erasure diagonal nonzero at {i}")));
            }
            if let Some(e) = row.iter().find(|e| !(0.0..1.0).contains(*e)) {
                return Err(Error::InvalidNetwork(format!("erasure probability {e} outside [0,1)")));
            }
        }
        let all_files = IdSet::full(num_files);
        let mut held = IdSet::new();
        for (i, h) in has.iter().enumerate() {
            if !h.is_subset(&all_files) {
                return Err(Error::InvalidNetwork(format!("device {i} holds an unknown file")));
            }
            held = held.union(h);
        }
        if held != all_files {
            let missing = all_files.difference(&held).first().unwrap_or_default();
            return Err(Error::InvalidNetwork(format!("file {missing} is held by no device")));
        }
        let state = NetworkState {
            num_devices: u,
            num_files,
            coverage,
            erasures,
            has,
            all_files,
            round: 0,
        };
        if u > 1 {
            if let Some(d) = (0..u).find(|&d| state.coverage[d].len() == 1) {
                return Err(Error::InvalidNetwork(format!("device {d} is isolated")));
            }
            if !state.is_connected() {
                return Err(Error::InvalidNetwork("topology is not connected".into()));
            }
        }
        Ok(state)
    }

    pub fn num_devices(&self) -> usize {
        self.num_devices
    }

    pub fn num_files(&self) -> usize {
        self.num_files
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn advance_round(&mut self) {
        self.round += 1;
    }

    pub fn all_devices(&self) -> IdSet {
        IdSet::full(self.num_devices)
    }

    pub fn all_files(&self) -> IdSet {
        self.all_files
    }

    fn check_device(&self, u: DeviceId) -> Result<()> {
        if u < self.num_devices {
            Ok(())
        } else {
            Err(Error::DeviceOutOfRange { device: u, num_devices: self.num_devices })
        }
    }

    /// Devices within transmission range of `u`, including `u` itself.
    pub fn coverage_zone(&self, u: DeviceId) -> Result<IdSet> {
        self.check_device(u)?;
        Ok(self.coverage[u])
    }

    /// Unchecked variant of [`coverage_zone`](Self::coverage_zone).
    #[inline]
    pub fn coverage(&self, u: DeviceId) -> IdSet {
        self.coverage[u]
    }

    /// Union of the members' coverage zones.
    pub fn combined_coverage(&self, members: &IdSet) -> IdSet {
        members.iter().fold(IdSet::new(), |acc, m| acc.union(&self.coverage[m]))
    }

    #[inline]
    pub fn connected(&self, u: DeviceId, v: DeviceId) -> bool {
        self.coverage[u].contains(v)
    }

    #[inline]
    pub fn erasure(&self, from: DeviceId, to: DeviceId) -> f64 {
        self.erasures[from][to]
    }

    pub fn erasure_matrix(&self) -> &[Vec<f64>] {
        &self.erasures
    }

    #[inline]
    pub fn has(&self, u: DeviceId) -> IdSet {
        self.has[u]
    }

    /// Files `u` is still missing; always the complement of [`has`](Self::has).
    #[inline]
    pub fn wants(&self, u: DeviceId) -> IdSet {
        self.all_files.difference(&self.has[u])
    }

    /// Devices with a nonempty Wants set.
    pub fn wanting_devices(&self) -> IdSet {
        (0..self.num_devices).filter(|&u| self.has[u] != self.all_files).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.has.iter().all(|h| *h == self.all_files)
    }

    pub fn total_wants(&self) -> usize {
        (0..self.num_devices).map(|u| self.wants(u).len()).sum()
    }

    /// Replaces the topology with a complete graph, keeping erasures and holdings.
    pub fn with_complete_topology(&self) -> NetworkState {
        let mut s = self.clone();
        let all = self.all_devices();
        s.coverage = vec![all; self.num_devices];
        s
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = IdSet::single(0);
        let mut queue = VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for v in self.coverage[u].difference(&seen).iter() {
                seen.insert(v);
                queue.push_back(v);
            }
        }
        seen.len() == self.num_devices
    }

    /// True when `combo` contains exactly one file `u` is missing.
    pub fn is_instantly_decodable(&self, combo: &FileCombination, u: DeviceId) -> bool {
        combo.files.intersection(&self.wants(u)).len() == 1
    }

    /// Delivers `combo` to `u`, moving the single decodable file into its Has set.
    pub fn apply_reception(&mut self, u: DeviceId, combo: &FileCombination) -> Result<FileId> {
        self.check_device(u)?;
        let wanted = combo.files.intersection(&self.wants(u));
        if wanted.len() != 1 {
            return Err(Error::NotDecodable { device: u });
        }
        let f = wanted.first().expect("one wanted file");
        self.has[u].insert(f);
        Ok(f)
    }

    /// Fraction of true entries (diagonal included) in the connectivity matrix.
    pub fn connectivity_index(&self) -> f64 {
        let entries: usize = self.coverage.iter().map(|c| c.len()).sum();
        entries as f64 / (self.num_devices * self.num_devices) as f64
    }

    pub fn connectivity_matrix(&self) -> Vec<Vec<bool>> {
        self.coverage
            .iter()
            .map(|c| (0..self.num_devices).map(|v| c.contains(v)).collect())
            .collect()
    }

    /// Mean erasure seen by `u` when every device in its coverage zone is
    /// equally likely to be the one it hears: `sum(erasure[v][u]) / |C_u|`
    /// over `v` in the zone (the zero self-term included).
    pub fn expected_erasure(&self, u: DeviceId) -> Result<f64> {
        self.check_device(u)?;
        let zone = self.coverage[u];
        if zone.len() < 2 {
            return Err(Error::IsolatedDevice { device: u });
        }
        let sum: f64 = zone.iter().map(|v| self.erasures[v][u]).sum();
        Ok(sum / zone.len() as f64)
    }

    /// Some link `(x, y)` carries a file `x` has and `y` wants.
    pub fn progress_possible(&self) -> bool {
        (0..self.num_devices).any(|y| {
            let w = self.wants(y);
            !w.is_empty() && self.coverage[y].iter().any(|x| self.has[x].intersects(&w))
        })
    }

    /// Who hears what when `plan` is transmitted.
    pub fn hearing_sets(&self, plan: &TransmissionPlan) -> HearingSets {
        let transmitters = plan.device_transmitters();
        let wanting = self.wanting_devices();
        let mut interference = IdSet::new();
        let mut out_of_range = IdSet::new();
        let mut heard_from = vec![None; self.num_devices];
        for u in 0..self.num_devices {
            if transmitters.contains(u) {
                continue;
            }
            let mut count = 0;
            let mut last = 0;
            for (i, e) in plan.entries.iter().enumerate() {
                if self.entry_reaches(e, u) {
                    count += 1;
                    last = i;
                }
            }
            match count {
                0 if wanting.contains(u) => {
                    out_of_range.insert(u);
                }
                0 => {}
                1 => heard_from[u] = Some(last),
                _ if wanting.contains(u) => {
                    interference.insert(u);
                }
                _ => {}
            }
        }
        HearingSets { transmitters, interference, out_of_range, heard_from }
    }

    #[inline]
    pub(crate) fn entry_reaches(&self, e: &PlanEntry, u: DeviceId) -> bool {
        match e.transmitter {
            Transmitter::Device(a) => self.coverage[a].contains(u),
            Transmitter::BaseStation { .. } => true,
        }
    }

    #[inline]
    pub(crate) fn entry_erasure(&self, e: &PlanEntry, u: DeviceId) -> f64 {
        match e.transmitter {
            Transmitter::Device(a) => self.erasures[a][u],
            Transmitter::BaseStation { erasure } => erasure,
        }
    }
}

/// Connectivity index of a raw matrix, for matrices that may not form a valid network.
pub fn connectivity_index_of(connectivity: &[Vec<bool>]) -> f64 {
    let n = connectivity.len();
    let entries = connectivity.iter().flatten().filter(|&&c| c).count();
    entries as f64 / (n * n) as f64
}

/// A set of files XORed together; nonempty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FileCombination {
    files: IdSet,
}

impl FileCombination {
    pub fn new(files: IdSet) -> Result<Self> {
        if files.is_empty() {
            return Err(Error::InvalidPlan("empty file combination".into()));
        }
        Ok(FileCombination { files })
    }

    pub fn single(f: FileId) -> Self {
        FileCombination { files: IdSet::single(f) }
    }

    pub fn files(&self) -> IdSet {
        self.files
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Transmitter {
    Device(DeviceId),
    /// Infrastructure node holding every file and reaching every device.
    BaseStation { erasure: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanEntry {
    pub transmitter: Transmitter,
    pub combination: FileCombination,
    /// Devices the scheduler expects to decode `combination`.
    pub targets: IdSet,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TransmissionPlan {
    pub entries: Vec<PlanEntry>,
}

impl TransmissionPlan {
    pub fn new(entries: Vec<PlanEntry>) -> Self {
        TransmissionPlan { entries }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn device_transmitters(&self) -> IdSet {
        self.entries
            .iter()
            .filter_map(|e| match e.transmitter {
                Transmitter::Device(a) => Some(a),
                Transmitter::BaseStation { .. } => None,
            })
            .collect()
    }

    pub fn all_targets(&self) -> IdSet {
        self.entries.iter().fold(IdSet::new(), |acc, e| acc.union(&e.targets))
    }

    /// Checks the plan against `state`: distinct transmitters, combinations
    /// drawn from the transmitter's Has set, and every target a wanting
    /// non-transmitter in range that can decode its combination.
    pub fn validate(&self, state: &NetworkState) -> Result<()> {
        let mut seen = IdSet::new();
        let transmitters = self.device_transmitters();
        for e in &self.entries {
            match e.transmitter {
                Transmitter::Device(a) => {
                    state.check_device(a)?;
                    if !seen.insert(a) {
                        return Err(Error::InvalidPlan(format!("device {a} transmits twice")));
                    }
                    if !e.combination.files.is_subset(&state.has(a)) {
                        return Err(Error::InvalidPlan(format!(
                            "device {a} sends a file it does not hold"
                        )));
                    }
                }
                Transmitter::BaseStation { erasure } => {
                    if !(0.0..1.0).contains(&erasure) {
                        return Err(Error::InvalidPlan(format!("base-station erasure {erasure}")));
                    }
                }
            }
            for t in e.targets.iter() {
                state.check_device(t)?;
                if transmitters.contains(t) {
                    return Err(Error::InvalidPlan(format!("target {t} is transmitting")));
                }
                if !state.entry_reaches(e, t) {
                    return Err(Error::InvalidPlan(format!("target {t} out of range")));
                }
                if !state.is_instantly_decodable(&e.combination, t) {
                    return Err(Error::InvalidPlan(format!("target {t} cannot decode")));
                }
            }
        }
        Ok(())
    }
}

/// Classification of devices for one transmission round.
#[derive(Clone, Debug, PartialEq)]
pub struct HearingSets {
    /// Device transmitters; they hear nothing.
    pub transmitters: IdSet,
    /// Wanting non-transmitters inside two or more transmitters' zones.
    pub interference: IdSet,
    /// Wanting non-transmitters inside no transmitter's zone.
    pub out_of_range: IdSet,
    /// For each device hearing exactly one transmission, the plan entry index.
    pub heard_from: Vec<Option<usize>>,
}
