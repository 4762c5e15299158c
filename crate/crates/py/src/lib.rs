//! Python bindings: networks, per-round plans, episodes and sweeps.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use idnc_core::sim::{self, EpisodeOptions, ExperimentConfig};
use idnc_core::{scheduler, IdSet, Metrics, SchedulerKind, SchedulerOptions, Transmitter};

fn err(e: idnc_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn kind(name: &str) -> PyResult<SchedulerKind> {
    name.parse().map_err(err)
}

/// A device-to-device network: topology, link erasures and file holdings.
#[pyclass(name = "Network", module = "idnc", skip_from_py_object)]
#[derive(Clone)]
struct PyNetwork {
    inner: idnc_core::NetworkState,
}

#[pymethods]
impl PyNetwork {
    #[new]
    fn new(connectivity: Vec<Vec<bool>>, erasures: Vec<Vec<f64>>, has: Vec<Vec<usize>>, num_files: usize) -> PyResult<Self> {
        let has = has.into_iter().map(IdSet::from_iter).collect();
        idnc_core::NetworkState::new(&connectivity, erasures, has, num_files)
            .map(|inner| PyNetwork { inner })
            .map_err(err)
    }

    /// Random instance with the given size, connectivity index and erasures.
    #[staticmethod]
    #[pyo3(signature = (num_devices, num_files, connectivity, mean_erasure, jitter = 0.0, seed = 0))]
    fn generate(
        num_devices: usize,
        num_files: usize,
        connectivity: f64,
        mean_erasure: f64,
        jitter: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sim::generate_instance(num_devices, num_files, connectivity, mean_erasure, jitter, &mut rng)
            .map(|inner| PyNetwork { inner })
            .map_err(err)
    }

    #[getter]
    fn num_devices(&self) -> usize {
        self.inner.num_devices()
    }

    #[getter]
    fn num_files(&self) -> usize {
        self.inner.num_files()
    }

    #[getter]
    fn connectivity_index(&self) -> f64 {
        self.inner.connectivity_index()
    }

    fn has(&self, device: usize) -> PyResult<Vec<usize>> {
        self.check(device)?;
        Ok(self.inner.has(device).iter().collect())
    }

    fn wants(&self, device: usize) -> PyResult<Vec<usize>> {
        self.check(device)?;
        Ok(self.inner.wants(device).iter().collect())
    }

    fn neighbours(&self, device: usize) -> PyResult<Vec<usize>> {
        self.check(device)?;
        Ok(self.inner.coverage(device).iter().filter(|&v| v != device).collect())
    }

    fn is_complete(&self) -> bool {
        self.inner.is_complete()
    }

    /// First-round plan of `scheduler` as a list of
    /// `{"transmitter", "files", "targets"}` dicts. The base station shows up
    /// as transmitter `None`.
    #[pyo3(signature = (scheduler, max_cluster_size = 3, pmp_erasure = 0.2))]
    fn plan<'py>(
        &self,
        py: Python<'py>,
        scheduler: &str,
        max_cluster_size: usize,
        pmp_erasure: f64,
    ) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let metrics = Metrics::new(&self.inner).map_err(err)?;
        let opts = SchedulerOptions { max_cluster_size, pmp_erasure };
        let plan = scheduler::plan(kind(scheduler)?, &self.inner, &metrics, &opts).map_err(err)?;
        plan.entries
            .iter()
            .map(|e| {
                let d = PyDict::new(py);
                let who = match e.transmitter {
                    Transmitter::Device(u) => Some(u),
                    Transmitter::BaseStation { .. } => None,
                };
                d.set_item("transmitter", who)?;
                d.set_item("files", e.combination.files().iter().collect::<Vec<_>>())?;
                d.set_item("targets", e.targets.iter().collect::<Vec<_>>())?;
                Ok(d)
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Network(devices={}, files={}, connectivity_index={:.3})",
            self.inner.num_devices(),
            self.inner.num_files(),
            self.inner.connectivity_index()
        )
    }
}

impl PyNetwork {
    fn check(&self, device: usize) -> PyResult<()> {
        if device < self.inner.num_devices() {
            Ok(())
        } else {
            Err(PyValueError::new_err(format!("no device {device}")))
        }
    }
}

/// Outcome of one episode.
#[pyclass(name = "Episode", module = "idnc", get_all)]
struct PyEpisode {
    completion_time: u64,
    /// Per device: `(initial_demand, decoding_delay, erasure_count, completion_round)`.
    devices: Vec<(usize, u64, u64, Option<u64>)>,
}

#[pymethods]
impl PyEpisode {
    fn __repr__(&self) -> String {
        format!("Episode(completion_time={})", self.completion_time)
    }
}

/// Runs `network` to completion under `scheduler`, drawing erasures from `seed`.
#[pyfunction]
#[pyo3(signature = (network, scheduler, seed = 0, max_cluster_size = 3, pmp_erasure = 0.2))]
fn run_episode(
    network: &PyNetwork,
    scheduler: &str,
    seed: u64,
    max_cluster_size: usize,
    pmp_erasure: f64,
) -> PyResult<PyEpisode> {
    let opts = SchedulerOptions { max_cluster_size, pmp_erasure };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = sim::run_episode(network.inner.clone(), kind(scheduler)?, &opts, &EpisodeOptions::default(), &mut rng)
        .map_err(err)?;
    Ok(PyEpisode {
        completion_time: r.completion_time,
        devices: r
            .devices
            .iter()
            .map(|d| (d.initial_demand, d.decoding_delay, d.erasure_count, d.completion_round))
            .collect(),
    })
}

/// Runs the sweep described by a TOML config and returns the CSV text.
#[pyfunction]
fn run_sweep(py: Python<'_>, config: &str) -> PyResult<String> {
    let cfg = ExperimentConfig::from_toml_str(config).map_err(err)?;
    let result = py.detach(|| sim::run_sweep(&cfg)).map_err(err)?;
    let mut out = Vec::new();
    sim::write_csv(&result.rows(), &mut out).map_err(err)?;
    String::from_utf8(out).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// TOML text of a named sweep preset.
#[pyfunction]
fn preset(name: &str) -> PyResult<String> {
    ExperimentConfig::preset(name).and_then(|c| c.to_toml_string()).map_err(err)
}

#[pymodule]
pub fn idnc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNetwork>()?;
    m.add_class::<PyEpisode>()?;
    m.add_function(wrap_pyfunction!(run_episode, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(preset, m)?)?;
    m.add("SCHEDULERS", SchedulerKind::ALL.map(|k| k.name()).to_vec())?;
    Ok(())
}
