//! Experiment configuration, loadable from TOML.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scheduler::{SchedulerKind, SchedulerOptions};
use crate::sim::topology::min_connectivity;

/// Parameter varied by a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Devices,
    Files,
    Connectivity,
    Erasure,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Devices => "devices",
            SweepParam::Files => "files",
            SweepParam::Connectivity => "connectivity",
            SweepParam::Erasure => "erasure",
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [SweepParam::Devices, SweepParam::Files, SweepParam::Connectivity, SweepParam::Erasure]
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown sweep parameter `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub num_devices: usize,
    pub num_files: usize,
    /// Target connectivity index.
    pub connectivity: f64,
    /// Mean device-to-device erasure probability.
    pub mean_erasure: f64,
    /// Half-width of the uniform per-link erasure draw.
    pub erasure_jitter: f64,
    /// Base-station erasure as a multiple of `mean_erasure`.
    pub pmp_factor: f64,
    pub schedulers: Vec<SchedulerKind>,
    pub max_cluster_size: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Run the single-transmitter baseline on a complete graph instead of
    /// the generated topology.
    pub baseline_complete_overlay: bool,
    /// Worker threads; 0 uses every available core.
    pub threads: usize,
    pub sweep: Option<SweepSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            num_devices: 60,
            num_files: 30,
            connectivity: 0.1,
            mean_erasure: 0.1,
            erasure_jitter: 0.05,
            pmp_factor: 2.0,
            schedulers: vec![
                SchedulerKind::General,
                SchedulerKind::CollisionFree,
                SchedulerKind::SingleTransmitter,
                SchedulerKind::Pmp,
            ],
            max_cluster_size: 3,
            iterations: 200,
            seed: 1,
            baseline_complete_overlay: false,
            threads: 0,
            sweep: None,
        }
    }
}

/// Named sweeps over the standard experiment grid.
pub const PRESETS: [&str; 7] = [
    "connectivity",
    "devices-sparse",
    "devices-moderate",
    "files-sparse",
    "files-moderate",
    "erasure-sparse",
    "erasure-moderate",
];

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// One of [`PRESETS`]: U = 60, F = 30, E = 0.1 unless swept, at a
    /// sparse (C = 0.1) or moderate (C = 0.4) connectivity.
    pub fn preset(name: &str) -> Result<Self> {
        let sweep = |param, values: &[f64]| Some(SweepSpec { param, values: values.to_vec() });
        let (connectivity, spec) = match name {
            "connectivity" => (0.1, sweep(SweepParam::Connectivity, &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])),
            "devices-sparse" => (0.1, sweep(SweepParam::Devices, &[30.0, 40.0, 50.0, 60.0, 70.0, 80.0])),
            "devices-moderate" => (0.4, sweep(SweepParam::Devices, &[20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0])),
            "files-sparse" => (0.1, sweep(SweepParam::Files, &[10.0, 20.0, 30.0, 40.0, 50.0])),
            "files-moderate" => (0.4, sweep(SweepParam::Files, &[10.0, 20.0, 30.0, 40.0, 50.0])),
            "erasure-sparse" => (0.1, sweep(SweepParam::Erasure, &[0.05, 0.1, 0.15, 0.2, 0.25, 0.3])),
            "erasure-moderate" => (0.4, sweep(SweepParam::Erasure, &[0.05, 0.1, 0.15, 0.2, 0.25, 0.3])),
            _ => return Err(Error::Config(format!("unknown preset `{name}`"))),
        };
        Ok(ExperimentConfig { connectivity, sweep: spec, ..Default::default() })
    }

    /// The configuration at one sweep value.
    pub fn at(&self, param: SweepParam, value: f64) -> Result<Self> {
        let mut c = self.clone();
        let count = || {
            if value >= 1.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(Error::Config(format!("{param} must be a positive integer, got {value}")))
            }
        };
        match param {
            SweepParam::Devices => c.num_devices = count()?,
            SweepParam::Files => c.num_files = count()?,
            SweepParam::Connectivity => c.connectivity = value,
            SweepParam::Erasure => c.mean_erasure = value,
        }
        c.sweep = None;
        c.validate()?;
        Ok(c)
    }

    /// Sweep points; a config without a sweep is a single connectivity point.
    pub fn points(&self) -> (SweepParam, Vec<f64>) {
        match &self.sweep {
            Some(s) => (s.param, s.values.clone()),
            None => (SweepParam::Connectivity, vec![self.connectivity]),
        }
    }

    pub fn scheduler_options(&self) -> SchedulerOptions {
        SchedulerOptions { max_cluster_size: self.max_cluster_size, pmp_erasure: self.pmp_factor * self.mean_erasure }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.num_devices < 2 {
            return bad(format!("need at least 2 devices, got {}", self.num_devices));
        }
        if self.num_devices > crate::bits::MAX_IDS || self.num_files > crate::bits::MAX_IDS {
            return bad(format!("at most {} devices and files", crate::bits::MAX_IDS));
        }
        if self.num_files < 1 {
            return bad("need at least one file".into());
        }
        if !(self.connectivity > 0.0 && self.connectivity <= 1.0) {
            return bad(format!("connectivity {} outside (0, 1]", self.connectivity));
        }
        let min = min_connectivity(self.num_devices);
        if self.connectivity < min - 1.0 / (self.num_devices * self.num_devices) as f64 {
            return bad(format!(
                "connectivity {} below {:.4}, the minimum for a connected graph on {} devices",
                self.connectivity, min, self.num_devices
            ));
        }
        if !(self.mean_erasure > 0.0 && self.mean_erasure < 1.0) {
            return bad(format!("mean erasure {} outside (0, 1)", self.mean_erasure));
        }
        if self.erasure_jitter < 0.0 {
            return bad("erasure jitter must be nonnegative".into());
        }
        if !(self.pmp_factor > 0.0 && self.pmp_factor * self.mean_erasure < 1.0) {
            return bad(format!("base-station erasure {} outside (0, 1)", self.pmp_factor * self.mean_erasure));
        }
        if self.iterations < 1 {
            return bad("need at least one iteration".into());
        }
        if self.max_cluster_size < 1 {
            return bad("max cluster size must be at least 1".into());
        }
        if self.schedulers.is_empty() {
            return bad("no scheduler selected".into());
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return bad("sweep has no values".into());
            }
            for &v in &s.values {
                self.at(s.param, v)?;
            }
        }
        Ok(())
    }
}
