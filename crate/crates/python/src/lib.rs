//! Python module `pyrcv`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use rcv_outcomes::bench::Algorithm;
use rcv_outcomes::dagviz::{build_tree, compress, EmitFormat};
use rcv_outcomes::ingest::{self, Format, ProfileJson};
use rcv_outcomes::minbound::min_bound_ballots;
use rcv_outcomes::oracle::{self, RandomProfileParams, DEFAULT_COMPLETION_CAP};
use rcv_outcomes::{count_ranked_votes, ElectionProfile, RcvError, SearchOptions, SearchReport, TiePolicy};

fn to_py(e: RcvError) -> PyErr {
    match e {
        RcvError::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

#[pyclass(name = "Profile", module = "pyrcv", frozen)]
pub struct PyProfile {
    inner: ElectionProfile,
}

#[pymethods]
impl PyProfile {
    /// Ballots are lists of candidate names, most preferred first.
    #[new]
    #[pyo3(signature = (candidates, max_rankings, ballots, unbound_count = 0))]
    fn new(candidates: Vec<String>, max_rankings: usize, ballots: Vec<Vec<String>>, unbound_count: usize) -> PyResult<Self> {
        let inner = ingest::from_json(ProfileJson { candidates, max_rankings, ballots, unbound_count }).map_err(to_py)?;
        Ok(PyProfile { inner })
    }

    /// Reads `.json`, or `.csv` with its `.meta.json` sidecar.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let format = Format::from_path(&path).ok_or_else(|| PyValueError::new_err("expected a .json or .csv path"))?;
        let inner = ingest::read_profile(&path, format).map_err(to_py)?;
        Ok(PyProfile { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (n, ballots, unbound, max_rankings, seed = 0))]
    fn random(n: usize, ballots: usize, unbound: usize, max_rankings: usize, seed: u64) -> Self {
        PyProfile { inner: oracle::random_profile(RandomProfileParams { n, ballots, unbound, max_rankings, seed }) }
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        let format = Format::from_path(&path).ok_or_else(|| PyValueError::new_err("expected a .json or .csv path"))?;
        ingest::write_profile(&self.inner, &path, format).map_err(to_py)
    }

    #[getter]
    fn candidates(&self) -> Vec<String> {
        self.inner.candidates.clone()
    }

    #[getter]
    fn unbound_count(&self) -> usize {
        self.inner.unbound_count
    }

    #[getter]
    fn max_rankings(&self) -> usize {
        self.inner.max_rankings
    }

    fn ballots(&self) -> Vec<Vec<String>> {
        ingest::to_json(&self.inner).ballots
    }

    fn __len__(&self) -> usize {
        self.inner.total_ballots()
    }

    fn __repr__(&self) -> String {
        format!(
            "Profile(candidates={}, bound={}, unbound={})",
            self.inner.num_candidates(),
            self.inner.bound_ballots.len(),
            self.inner.unbound_count
        )
    }
}

#[pyclass(name = "Report", module = "pyrcv", frozen)]
pub struct PyReport {
    inner: SearchReport,
}

#[pymethods]
impl PyReport {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(PyReport { inner: SearchReport::read_json(&path).map_err(to_py)? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.write_json(&path).map_err(to_py)
    }

    #[getter]
    fn possible_winners(&self) -> Vec<String> {
        self.inner.winner_names()
    }

    #[getter]
    fn orders(&self) -> Vec<Vec<String>> {
        self.inner.to_json().orders
    }

    #[getter]
    fn nodes_expanded(&self) -> u64 {
        self.inner.nodes_expanded
    }

    #[getter]
    fn verify_calls(&self) -> u64 {
        self.inner.verify_calls
    }

    #[getter]
    fn timed_out(&self) -> bool {
        self.inner.timed_out
    }

    fn to_json(&self) -> String {
        serde_json_string(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("Report(winners={:?}, orders={})", self.inner.winner_names(), self.inner.orders.len())
    }
}

fn serde_json_string(report: &SearchReport) -> String {
    let mut buf = Vec::new();
    report.write_json_to(&mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("utf-8 json")
}

fn options(timeout_secs: f64, prune_threshold: f64, memoize: bool, parallel: bool) -> SearchOptions {
    SearchOptions { timeout_secs, prune_threshold, memoize, parallel, ..SearchOptions::default() }
}

/// Elimination order of a complete profile, first eliminated first.
#[pyfunction]
fn count(profile: &PyProfile) -> PyResult<Vec<String>> {
    let result = count_ranked_votes(&profile.inner, TiePolicy::default()).map_err(to_py)?;
    Ok(result.order.as_slice().iter().map(|c| profile.inner.candidates[c.index()].clone()).collect())
}

#[pyfunction]
#[pyo3(signature = (profile, timeout_secs = 7200.0, prune_threshold = 0.0, memoize = true, parallel = false))]
fn outcomes(
    py: Python<'_>,
    profile: &PyProfile,
    timeout_secs: f64,
    prune_threshold: f64,
    memoize: bool,
    parallel: bool,
) -> PyResult<PyReport> {
    let opts = options(timeout_secs, prune_threshold, memoize, parallel);
    let algorithm = if memoize { Algorithm::Memoized } else { Algorithm::Unmemoized };
    let inner = py.detach(|| algorithm.run(&profile.inner, &opts)).map_err(to_py)?;
    Ok(PyReport { inner })
}

#[pyfunction]
#[pyo3(signature = (profile, timeout_secs = 7200.0))]
fn brute_force(py: Python<'_>, profile: &PyProfile, timeout_secs: f64) -> PyResult<PyReport> {
    let opts = options(timeout_secs, 0.0, true, false);
    let inner = py.detach(|| Algorithm::BruteForce.run(&profile.inner, &opts)).map_err(to_py)?;
    Ok(PyReport { inner })
}

/// Winner name -> (min_ballots, fraction_of_unbound).
#[pyfunction]
fn min_bound(profile: &PyProfile, report: &PyReport) -> PyResult<BTreeMap<String, (u64, f64)>> {
    let bounds = min_bound_ballots(&profile.inner, &report.inner).map_err(to_py)?;
    Ok(bounds.to_json().into_iter().map(|(k, v)| (k, (v.min_ballots, v.fraction_of_unbound))).collect())
}

/// Winners over every strict completion of the outstanding ballots.
#[pyfunction]
#[pyo3(signature = (profile, cap = DEFAULT_COMPLETION_CAP))]
fn exhaustive_winners(profile: &PyProfile, cap: u128) -> PyResult<Vec<String>> {
    let out = oracle::exhaustive_winner_set(&profile.inner, cap).map_err(to_py)?;
    Ok(out.winners.iter().map(|c| profile.inner.candidates[c.index()].clone()).collect())
}

/// Renders the report's orders as Graphviz DOT or JSON.
#[pyfunction]
#[pyo3(signature = (report, format = "dot", compressed = true))]
fn emit(report: &PyReport, format: &str, compressed: bool) -> PyResult<String> {
    let format = match format {
        "dot" => EmitFormat::Dot,
        "json" => EmitFormat::Json,
        other => return Err(PyValueError::new_err(format!("unknown format {other:?}"))),
    };
    let tree = build_tree(&report.inner).map_err(to_py)?;
    let graph = if compressed { compress(&tree).to_graph() } else { tree.to_graph() };
    Ok(String::from_utf8(graph.emit(format)).expect("utf-8 output"))
}

#[pymodule]
fn pyrcv(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProfile>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(count, m)?)?;
    m.add_function(wrap_pyfunction!(outcomes, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force, m)?)?;
    m.add_function(wrap_pyfunction!(min_bound, m)?)?;
    m.add_function(wrap_pyfunction!(exhaustive_winners, m)?)?;
    m.add_function(wrap_pyfunction!(emit, m)?)?;
    Ok(())
}
