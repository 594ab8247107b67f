//! Python bindings: load or synthesize networks, evaluate seed sets, run
//! policies and whole experiment grids from Python.

use std::path::{Path, PathBuf};

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use mfpm_core::diffusion::{monte_carlo_profit, KeyedWorld};
use mfpm_core::experiment;
use mfpm_core::net::{self, MultiLevelGraph, SocialNetwork};
use mfpm_core::oracle::{self, EnumerationBudget};
use mfpm_core::policies::{run_policy, CoinOutcome, PolicyKind, PolicyParams};

fn err(e: mfpm_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A loaded network together with its stacked per-feature copy.
#[pyclass(frozen)]
struct Network {
    net: SocialNetwork,
    mlg: MultiLevelGraph,
}

impl Network {
    fn resolve(&self, labels: &[String]) -> PyResult<Vec<usize>> {
        labels
            .iter()
            .map(|l| {
                self.net
                    .node_by_label(l)
                    .ok_or_else(|| PyValueError::new_err(format!("node {l:?} is not in the graph")))
            })
            .collect()
    }
}

#[pymethods]
impl Network {
    #[getter]
    fn n(&self) -> usize {
        self.net.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.net.m()
    }

    #[getter]
    fn q(&self) -> usize {
        self.net.q()
    }

    fn labels(&self) -> Vec<String> {
        (0..self.net.n()).map(|u| self.net.label(u).to_string()).collect()
    }

    fn cost(&self, label: String) -> PyResult<f64> {
        Ok(self.net.cost(self.resolve(&[label])?[0]))
    }

    fn profit(&self, label: String) -> PyResult<f64> {
        Ok(self.net.profit(self.resolve(&[label])?[0]))
    }

    fn weights(&self, label: String) -> PyResult<Vec<f64>> {
        let u = self.resolve(&[label])?[0];
        Ok((0..self.net.q()).map(|i| self.net.weight(u, i)).collect())
    }

    fn total_profit(&self) -> f64 {
        self.net.total_profit()
    }

    fn total_cost(&self) -> f64 {
        self.net.total_cost()
    }

    /// Monte-Carlo estimate of the profit expectation of a seed set:
    /// (mean, standard error).
    fn monte_carlo_profit(&self, seeds: Vec<String>, sims: usize, seed: u64) -> PyResult<(f64, f64)> {
        let ids = self.resolve(&seeds)?;
        monte_carlo_profit(&self.net, &self.mlg, &ids, sims, seed).map_err(err)
    }

    /// Exact profit expectation by enumerating edge realizations.
    #[pyo3(signature = (seeds, max_edges = 20))]
    fn exact_profit(&self, seeds: Vec<String>, max_edges: usize) -> PyResult<f64> {
        let ids = self.resolve(&seeds)?;
        oracle::exact_profit(&self.net, &self.mlg, &ids, &EnumerationBudget { max_edges }).map_err(err)
    }

    /// Exact best budget-feasible seed set: (labels, profit).
    #[pyo3(signature = (budget, max_edges = 20))]
    fn exact_optimum(&self, budget: f64, max_edges: usize) -> PyResult<(Vec<String>, f64)> {
        let (set, value) = oracle::exact_optimum(&self.net, &self.mlg, budget, &EnumerationBudget { max_edges })
            .map_err(err)?;
        Ok((set.into_iter().map(|u| self.net.label(u).to_string()).collect(), value))
    }

    /// Run one policy against the environment world `env_seed` describes.
    #[pyo3(signature = (
        policy, budget, policy_seed = 0, env_seed = 0, epsilon = 0.5, eta = 0.1,
        delta_prime = 0.1, epsilon_hat = 0.1, mc_sims = 500, rr_cap = 10_000_000,
        deterministic_knapsack = false,
    ))]
    #[allow(clippy::too_many_arguments)]
    fn run_policy(
        &self,
        py: Python<'_>,
        policy: &str,
        budget: f64,
        policy_seed: u64,
        env_seed: u64,
        epsilon: f64,
        eta: f64,
        delta_prime: f64,
        epsilon_hat: f64,
        mc_sims: usize,
        rr_cap: u64,
        deterministic_knapsack: bool,
    ) -> PyResult<Py<PyDict>> {
        let kind: PolicyKind = policy.parse().map_err(err)?;
        let params = PolicyParams {
            budget,
            epsilon,
            eta,
            delta_prime,
            epsilon_hat,
            mc_sims,
            rr_cap,
            deterministic_knapsack,
        };
        let mut env = KeyedWorld::new(env_seed);
        let res = run_policy(kind, &self.net, &self.mlg, &params, policy_seed, &mut env).map_err(err)?;
        let out = PyDict::new(py);
        out.set_item("policy", res.policy.name())?;
        out.set_item(
            "seeds",
            res.seeds.iter().map(|&u| self.net.label(u).to_string()).collect::<Vec<_>>(),
        )?;
        out.set_item("total_cost", res.total_cost)?;
        out.set_item("realized_profit", res.realized_profit)?;
        out.set_item("estimated_profit", res.estimated_profit)?;
        out.set_item("samples_used", res.samples_used)?;
        out.set_item("cap_hits", res.cap_hits)?;
        out.set_item("wallclock_ms", res.wallclock_ms)?;
        let trace: Vec<Py<PyDict>> = res
            .trace
            .iter()
            .map(|t| {
                let row = PyDict::new(py);
                row.set_item("node", self.net.label(t.node))?;
                row.set_item("estimate", t.estimate)?;
                row.set_item("cumulative_cost", t.cumulative_cost)?;
                row.set_item(
                    "coin",
                    t.coin.map(|c| match c {
                        CoinOutcome::IncludedOverflow => "included",
                        CoinOutcome::RejectedOverflow => "rejected",
                    }),
                )?;
                Ok(row.unbind())
            })
            .collect::<PyResult<_>>()?;
        out.set_item("trace", trace)?;
        Ok(out.unbind())
    }
}

/// Load an edge-list file and synthesize parameters for it.
#[pyfunction]
#[pyo3(signature = (
    path, q = 3, directed = false, rng_seed = 0,
    cost_range = (0.0, 1.0), profit_range = (0.0, 1.0),
))]
fn load_network(
    path: PathBuf,
    q: usize,
    directed: bool,
    rng_seed: u64,
    cost_range: (f64, f64),
    profit_range: (f64, f64),
) -> PyResult<Network> {
    let config = net::ParamConfig { q, directed, rng_seed, cost_range, profit_range };
    let network = net::load_network(&path, &config).map_err(err)?;
    let mlg = net::build_multi_level(&network);
    Ok(Network { net: network, mlg })
}

/// Random edge list: a covering cycle plus extra distinct edges.
#[pyfunction]
#[pyo3(signature = (nodes, edges, seed = 0))]
fn synth_edge_list(nodes: usize, edges: usize, seed: u64) -> PyResult<String> {
    net::synthesize_edge_list(nodes, edges, seed).map_err(err)
}

/// Run a whole experiment grid from a TOML config; returns a small report.
#[pyfunction]
fn run_experiment(py: Python<'_>, config_path: PathBuf) -> PyResult<Py<PyDict>> {
    let config = experiment::load_config(&config_path).map_err(err)?;
    let report = experiment::run_experiment(&config).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("rows", report.rows)?;
    out.set_item("output", report.output)?;
    out.set_item("cap_hits", report.cap_hits)?;
    Ok(out.unbind())
}

/// Aggregate an experiment CSV into per-(policy, budget) means.
#[pyfunction]
fn summarize(py: Python<'_>, csv_path: PathBuf) -> PyResult<Vec<Py<PyDict>>> {
    let lines = experiment::summarize(Path::new(&csv_path)).map_err(err)?;
    lines
        .into_iter()
        .map(|l| {
            let row = PyDict::new(py);
            row.set_item("policy", l.policy)?;
            row.set_item("budget", l.budget)?;
            row.set_item("runs", l.runs)?;
            row.set_item("mean_profit", l.mean_profit)?;
            row.set_item("mean_cost", l.mean_cost)?;
            row.set_item("mean_wallclock_ms", l.mean_wallclock_ms)?;
            Ok(row.unbind())
        })
        .collect()
}

#[pymodule]
fn mfpm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Network>()?;
    m.add_function(wrap_pyfunction!(load_network, m)?)?;
    m.add_function(wrap_pyfunction!(synth_edge_list, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(summarize, m)?)?;
    Ok(())
}
