//! Decoding-delay bookkeeping, anticipated completion times, and the
//! critical set / layer assignment that drives the schedulers.
//!
//! Every round a wanting device experiences exactly one of three events:
//! a decoding delay (it transmits, collides, is out of range, or hears a
//! combination it cannot decode), an erasure, or a successful decode. Its
//! completion round therefore always equals
//! `initial_demand + decoding_delay + erasure_count`.

use crate::bits::IdSet;
use crate::error::{Error, Result};
use crate::net::{DeviceId, HearingSets, NetworkState, TransmissionPlan};

/// Relative slack used when comparing anticipated completion times, so that
/// devices sitting on the critical boundary are not lost to rounding.
const BOUNDARY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DeviceMetrics {
    pub initial_demand: usize,
    pub decoding_delay: u64,
    pub erasure_count: u64,
    pub completion_round: Option<u64>,
}

impl DeviceMetrics {
    pub fn new(initial_demand: usize) -> Self {
        DeviceMetrics {
            initial_demand,
            completion_round: (initial_demand == 0).then_some(0),
            ..Default::default()
        }
    }

    /// `(demand + delay - eps) / (1 - eps)`.
    pub fn anticipated_completion(&self, eps: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&eps) {
            return Err(Error::ErasureOutOfRange(eps));
        }
        Ok(anticipated(self.initial_demand, self.decoding_delay, eps))
    }

    /// Completion round equals demand plus delay plus erasures.
    pub fn completion_identity_holds(&self) -> bool {
        match self.completion_round {
            Some(t) => t == self.initial_demand as u64 + self.decoding_delay + self.erasure_count,
            None => false,
        }
    }
}

#[inline]
fn anticipated(demand: usize, delay: u64, eps: f64) -> f64 {
    (demand as f64 + delay as f64 - eps) / (1.0 - eps)
}

/// What happened to a transmission at a device hearing exactly one transmitter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reception {
    Erased,
    Delivered,
}

/// Per-device classification of a round, as seen by the metrics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoundEvent {
    Delay,
    Erasure,
    Decoded,
}

/// Critical set plus the layer of every wanting device (0 for devices with
/// nothing left to receive, 1 for critical devices).
#[derive(Clone, Debug, PartialEq)]
pub struct Layering {
    pub critical: IdSet,
    pub layers: Vec<u32>,
    pub global_max: f64,
}

impl Layering {
    #[inline]
    pub fn layer(&self, u: DeviceId) -> u32 {
        self.layers[u]
    }
}

/// Metrics of every device in an episode, plus the static expected erasure
/// each device uses in its anticipated completion time.
#[derive(Clone, Debug, PartialEq)]
pub struct Metrics {
    devices: Vec<DeviceMetrics>,
    expected_erasure: Vec<f64>,
}

impl Metrics {
    pub fn new(state: &NetworkState) -> Result<Self> {
        let n = state.num_devices();
        let devices = (0..n).map(|u| DeviceMetrics::new(state.wants(u).len())).collect();
        let expected_erasure = (0..n)
            .map(|u| if n == 1 { Ok(0.0) } else { state.expected_erasure(u) })
            .collect::<Result<_>>()?;
        Ok(Metrics { devices, expected_erasure })
    }

    pub fn device(&self, u: DeviceId) -> &DeviceMetrics {
        &self.devices[u]
    }

    pub fn devices(&self) -> &[DeviceMetrics] {
        &self.devices
    }

    pub fn expected_erasure(&self, u: DeviceId) -> f64 {
        self.expected_erasure[u]
    }

    pub fn anticipated_completion(&self, u: DeviceId) -> f64 {
        let d = &self.devices[u];
        anticipated(d.initial_demand, d.decoding_delay, self.expected_erasure[u])
    }

    /// Growth of the anticipated completion time per unit of delay.
    #[inline]
    fn step(&self, u: DeviceId) -> f64 {
        1.0 / (1.0 - self.expected_erasure[u])
    }

    fn max_anticipated(&self, wanting: &IdSet) -> Option<f64> {
        wanting.iter().map(|u| self.anticipated_completion(u)).reduce(f64::max)
    }

    /// Wanting devices whose next delay would reach the current maximum
    /// anticipated completion time.
    pub fn critical_set(&self, state: &NetworkState) -> IdSet {
        let wanting = state.wanting_devices();
        let Some(max) = self.max_anticipated(&wanting) else {
            return IdSet::new();
        };
        let slack = BOUNDARY_TOLERANCE * max.abs().max(1.0);
        wanting
            .iter()
            .filter(|&u| self.anticipated_completion(u) + self.step(u) >= max - slack)
            .collect()
    }

    /// Smallest `n >= 1` with `T_u + n * step_u > global_max` (and hence
    /// `T_u + (n - 1) * step_u <= global_max` for `n > 1`).
    pub fn layer_index(&self, u: DeviceId, global_max: f64) -> u32 {
        let t = self.anticipated_completion(u);
        let step = self.step(u);
        let mut n = (((global_max - t) / step).floor() + 1.0).max(1.0) as u32;
        while n > 1 && t + (n - 1) as f64 * step > global_max {
            n -= 1;
        }
        while t + n as f64 * step <= global_max {
            n += 1;
        }
        n
    }

    /// Critical set and layers for the current round; critical devices are
    /// placed in layer 1 even when they sit exactly on the boundary.
    pub fn layering(&self, state: &NetworkState) -> Layering {
        let wanting = state.wanting_devices();
        let critical = self.critical_set(state);
        let global_max = self.max_anticipated(&wanting).unwrap_or(0.0);
        let layers = (0..state.num_devices())
            .map(|u| {
                if !wanting.contains(u) {
                    0
                } else if critical.contains(u) {
                    1
                } else {
                    self.layer_index(u, global_max).max(2)
                }
            })
            .collect();
        Layering { critical, layers, global_max }
    }

    /// Updates the counters for one round. `state` is the state at the start
    /// of the round; `outcomes[u]` must be set for every wanting device that
    /// hears exactly one transmission. Returns the event per wanting device.
    pub fn record_round(
        &mut self,
        state: &NetworkState,
        plan: &TransmissionPlan,
        hearing: &HearingSets,
        outcomes: &[Option<Reception>],
    ) -> Result<Vec<Option<RoundEvent>>> {
        let round = state.round() + 1;
        let mut events = vec![None; state.num_devices()];
        for u in state.wanting_devices().iter() {
            let event = match hearing.heard_from[u] {
                None => RoundEvent::Delay,
                Some(entry) => match outcomes.get(u).copied().flatten() {
                    None => return Err(Error::MissingOutcome { device: u }),
                    Some(Reception::Erased) => RoundEvent::Erasure,
                    Some(Reception::Delivered) => {
                        if state.is_instantly_decodable(&plan.entries[entry].combination, u) {
                            RoundEvent::Decoded
                        } else {
                            RoundEvent::Delay
                        }
                    }
                },
            };
            let d = &mut self.devices[u];
            match event {
                RoundEvent::Delay => d.decoding_delay += 1,
                RoundEvent::Erasure => d.erasure_count += 1,
                RoundEvent::Decoded => {
                    if state.wants(u).len() == 1 {
                        d.completion_round = Some(round);
                    }
                }
            }
            events[u] = Some(event);
        }
        Ok(events)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{FileCombination, PlanEntry, Transmitter};
    use crate::sim::fixture;

    fn complete(u: usize, eps: f64, has: Vec<IdSet>, files: usize) -> NetworkState {
        let c = vec![vec![true; u]; u];
        let e = (0..u)
            .map(|i| (0..u).map(|j| if i == j { 0.0 } else { eps }).collect())
            .collect();
        NetworkState::new(&c, e, has, files).unwrap()
    }

    fn with_delays(state: &NetworkState, delays: &[u64]) -> Metrics {
        let mut m = Metrics::new(state).unwrap();
        for (d, &x) in m.devices.iter_mut().zip(delays) {
            d.decoding_delay = x;
        }
        m
    }

    #[test]
    fn anticipated_completion_values() {
        let mut d = DeviceMetrics::new(5);
        assert_eq!(d.anticipated_completion(0.0).unwrap(), 5.0);
        d.decoding_delay = 2;
        assert_eq!(d.anticipated_completion(0.0).unwrap(), 7.0);
        let v = d.anticipated_completion(0.08).unwrap();
        assert!((v - 6.92 / 0.92).abs() < 1e-12);
        assert!((v - 7.5217).abs() < 1e-4);
        assert!(matches!(d.anticipated_completion(1.0), Err(Error::ErasureOutOfRange(_))));
    }

    #[test]
    fn critical_set_symmetric_devices() {
        // three devices each missing file 1, one holder of everything
        let s = complete(4, 0.1, vec![IdSet::full(2), IdSet::single(0), IdSet::single(0), IdSet::single(0)], 2);
        let m = Metrics::new(&s).unwrap();
        assert_eq!(m.critical_set(&s), s.wanting_devices());
    }

    #[test]
    fn critical_set_drops_small_demand() {
        // u0 misses 5 files, u1 misses 1, u2 holds everything; zero erasures
        let c = vec![vec![true; 3]; 3];
        let e = vec![vec![0.0; 3]; 3];
        let has = vec![IdSet::new(), (0..4).collect(), IdSet::full(5)];
        let s = NetworkState::new(&c, e, has, 5).unwrap();
        let m = Metrics::new(&s).unwrap();
        assert_eq!(m.critical_set(&s), IdSet::single(0));
        // small device: 1 + n > 5 first at n = 5
        assert_eq!(m.layer_index(1, 5.0), 5);
        assert_eq!(m.layer_index(0, 5.0), 1);
    }

    #[test]
    fn critical_set_empty_when_done() {
        let s = complete(2, 0.1, vec![IdSet::full(1); 2], 1);
        assert!(Metrics::new(&s).unwrap().critical_set(&s).is_empty());
    }

    #[test]
    fn layer_index_fractional_gap() {
        // gap of 2.5 steps below the max lands in layer 3
        let c = vec![vec![true; 2]; 2];
        let e = vec![vec![0.0, 0.2], vec![0.2, 0.0]];
        let s = NetworkState::new(&c, e, vec![IdSet::new(), IdSet::full(4)], 4).unwrap();
        let m = Metrics::new(&s).unwrap();
        let step = 1.0 / (1.0 - m.expected_erasure(0));
        let t = m.anticipated_completion(0);
        assert_eq!(m.layer_index(0, t + 2.5 * step), 3);
        assert_eq!(m.layer_index(0, t), 1);
        assert_eq!(m.layer_index(0, t + 1.0 * step), 2);
    }

    #[test]
    fn layers_are_monotone_in_anticipated_time() {
        let has = vec![IdSet::new(), IdSet::single(0), (0..2).collect(), (0..3).collect(), IdSet::full(4)];
        let s = complete(5, 0.1, has, 4);
        let m = with_delays(&s, &[0, 3, 0, 1, 0]);
        let l = m.layering(&s);
        let wanting = s.wanting_devices();
        for a in wanting.iter() {
            for b in wanting.iter() {
                if m.anticipated_completion(a) > m.anticipated_completion(b) {
                    assert!(l.layer(a) <= l.layer(b));
                }
            }
        }
        let top = wanting.iter().max_by(|&a, &b| {
            m.anticipated_completion(a).total_cmp(&m.anticipated_completion(b))
        });
        assert!(l.critical.contains(top.unwrap()));
    }

    #[test]
    fn figure_one_first_slot_delays() {
        let s = fixture::figure_one();
        let plan = fixture::figure_one_slot_one();
        let mut m = Metrics::new(&s).unwrap();
        let h = s.hearing_sets(&plan);
        let outcomes: Vec<_> = (0..7)
            .map(|u| h.heard_from[u].map(|_| Reception::Delivered))
            .collect();
        m.record_round(&s, &plan, &h, &outcomes).unwrap();
        let delays: Vec<u64> = m.devices().iter().map(|d| d.decoding_delay).collect();
        // U1 transmits while wanting, U2 collides, U5 is out of range.
        assert_eq!(delays, vec![1, 1, 0, 0, 1, 0, 0]);
    }

    #[test]
    fn non_innovative_delivery_is_a_delay() {
        let s = complete(2, 0.1, vec![IdSet::full(2), IdSet::single(0)], 2);
        let plan = TransmissionPlan::new(vec![PlanEntry {
            transmitter: Transmitter::Device(0),
            combination: FileCombination::single(0),
            targets: IdSet::new(),
        }]);
        let h = s.hearing_sets(&plan);
        let mut m = Metrics::new(&s).unwrap();
        let ev = m.record_round(&s, &plan, &h, &[None, Some(Reception::Delivered)]).unwrap();
        assert_eq!(ev[1], Some(RoundEvent::Delay));
        assert_eq!(m.device(1).decoding_delay, 1);
    }

    #[test]
    fn decodable_delivery_changes_no_counter() {
        let s = complete(2, 0.1, vec![IdSet::full(2), IdSet::new()], 2);
        let plan = TransmissionPlan::new(vec![PlanEntry {
            transmitter: Transmitter::Device(0),
            combination: FileCombination::single(0),
            targets: IdSet::single(1),
        }]);
        let h = s.hearing_sets(&plan);
        let mut m = Metrics::new(&s).unwrap();
        m.record_round(&s, &plan, &h, &[None, Some(Reception::Delivered)]).unwrap();
        assert_eq!(m.device(1), &DeviceMetrics::new(2));
        // erased delivery counts as an erasure
        m.record_round(&s, &plan, &h, &[None, Some(Reception::Erased)]).unwrap();
        assert_eq!(m.device(1).erasure_count, 1);
        assert!(matches!(
            m.record_round(&s, &plan, &h, &[None, None]),
            Err(Error::MissingOutcome { device: 1 })
        ));
    }
}
