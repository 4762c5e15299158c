//! Completion-time reduction for file dissemination over partially connected
//! device-to-device networks using instantly decodable network coding (IDNC).
//!
//! The crate is organised bottom-up:
//!
//! * [`net`] holds the network model (topology, erasures, Has/Wants sets);
//! * [`metrics`] tracks decoding delays and derives critical devices;
//! * [`clique`] is an exact maximum-weight clique solver;
//! * [`idnc_graph`] builds the per-transmitter IDNC graphs;
//! * [`coop`] builds cooperation graphs over transmitters and clusters;
//! * [`scheduler`] turns all of the above into per-round transmission plans;
//! * [`sim`] runs episodes and parameter sweeps;
//! * [`verify`] has exhaustive oracles for small instances.

pub mod bits;
pub mod clique;
pub mod coop;
pub mod error;
pub mod idnc_graph;
pub mod metrics;
pub mod net;
pub mod scheduler;
pub mod sim;
pub mod verify;

pub use bits::IdSet;
pub use error::{Error, Result};
pub use metrics::{DeviceMetrics, Metrics};
pub use net::{DeviceId, FileCombination, FileId, NetworkState, PlanEntry, TransmissionPlan, Transmitter};
pub use scheduler::{SchedulerKind, SchedulerOptions};
