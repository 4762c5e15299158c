use thiserror::Error;

use crate::net::DeviceId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("device {device} out of range (network has {num_devices} devices)")]
    DeviceOutOfRange { device: DeviceId, num_devices: usize },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid transmission plan: {0}")]
    InvalidPlan(String),

    #[error("combination is not instantly decodable at device {device}")]
    NotDecodable { device: DeviceId },

    #[error("device {device} has no neighbor; expected erasure is undefined")]
    IsolatedDevice { device: DeviceId },

    #[error("expected erasure {0} outside [0, 1)")]
    ErasureOutOfRange(f64),

    #[error("clique search exceeded its budget of {budget} nodes")]
    CliqueBudgetExceeded { budget: u64 },

    #[error("brute-force clique oracle supports at most {max} vertices, got {n}")]
    OracleTooLarge { n: usize, max: usize },

    #[error("reception outcome missing for device {device}")]
    MissingOutcome { device: DeviceId },

    #[error("episode exceeded the round cap of {cap}")]
    RoundCapExceeded { cap: u64 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
