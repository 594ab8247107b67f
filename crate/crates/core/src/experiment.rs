//! Batch experiment runner and CSV reporting.
//!
//! An experiment is a grid over policies, budgets and repetitions on one
//! dataset. Within a repetition every policy and budget plays against the
//! same lazily materialized environment world, so their results are paired;
//! each cell's own sampling noise comes from a seed derived from (policy,
//! budget, repetition), making every row reproducible in isolation.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::diffusion::KeyedWorld;
use crate::error::{Error, Result};
use crate::net::{build_multi_level, load_network, MultiLevelGraph, ParamConfig, SocialNetwork};
use crate::policies::{run_policy, PolicyKind, PolicyParams};
use crate::seeds;

pub const CSV_HEADER: &str = "dataset,policy,q,budget,rep,seeds,total_cost,realized_profit,estimated_profit,rr_sets_or_sims_used,wallclock_ms";

fn default_q() -> usize {
    3
}
fn default_unit_range() -> (f64, f64) {
    (0.0, 1.0)
}
fn default_repetitions() -> usize {
    1
}
fn default_epsilon() -> f64 {
    0.5
}
fn default_eta() -> f64 {
    0.1
}
fn default_delta_prime() -> f64 {
    0.1
}
fn default_epsilon_hat() -> f64 {
    0.1
}
fn default_mc_sims() -> usize {
    500
}
fn default_rr_cap() -> u64 {
    10_000_000
}
fn default_timing() -> bool {
    false
}

/// Everything one experiment run needs, read from a TOML file. The dataset
/// synthesis keys (`q`, `directed`, `rng_seed`, `cost_range`,
/// `profit_range`) carry the same meaning as in [`ParamConfig`].
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Edge-list file to load.
    pub dataset: PathBuf,
    #[serde(default)]
    pub directed: bool,
    #[serde(default = "default_q")]
    pub q: usize,
    /// Seed of the parameter synthesis (costs, profits, weights, not the
    /// experiment randomness).
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default = "default_unit_range")]
    pub cost_range: (f64, f64),
    #[serde(default = "default_unit_range")]
    pub profit_range: (f64, f64),
    pub budgets: Vec<f64>,
    /// Policy names; see [`PolicyKind`].
    pub policies: Vec<String>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_delta_prime")]
    pub delta_prime: f64,
    #[serde(default = "default_epsilon_hat")]
    pub epsilon_hat: f64,
    #[serde(default = "default_mc_sims")]
    pub mc_sims: usize,
    #[serde(default = "default_rr_cap")]
    pub rr_cap: u64,
    /// Root seed of the experiment randomness: environment worlds and every
    /// policy's own sampling derive from it.
    #[serde(default)]
    pub seed: u64,
    /// CSV file to write.
    pub output: PathBuf,
    /// Worker threads; 0 means one per core.
    #[serde(default)]
    pub workers: usize,
    /// Off by default so reruns of the same config are byte-identical; when
    /// on, the wallclock column carries real measurements.
    #[serde(default = "default_timing")]
    pub timing: bool,
    #[serde(default)]
    pub deterministic_knapsack: bool,
}

impl ExperimentConfig {
    pub fn param_config(&self) -> ParamConfig {
        ParamConfig {
            q: self.q,
            directed: self.directed,
            rng_seed: self.rng_seed,
            cost_range: self.cost_range,
            profit_range: self.profit_range,
        }
    }

    pub fn parsed_policies(&self) -> Result<Vec<PolicyKind>> {
        self.policies.iter().map(|s| s.parse()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.param_config().validate()?;
        if self.budgets.is_empty() {
            return Err(Error::Config("budgets must not be empty".into()));
        }
        if self.budgets.iter().any(|b| !(*b >= 0.0) || !b.is_finite()) {
            return Err(Error::Config("budgets must be finite and nonnegative".into()));
        }
        if self.policies.is_empty() {
            return Err(Error::Config("policies must not be empty".into()));
        }
        self.parsed_policies()?;
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be positive".into()));
        }
        let probe = PolicyParams { budget: 1.0, ..self.policy_params(1.0) };
        probe.validate()?;
        Ok(())
    }

    fn policy_params(&self, budget: f64) -> PolicyParams {
        PolicyParams {
            budget,
            epsilon: self.epsilon,
            eta: self.eta,
            delta_prime: self.delta_prime,
            epsilon_hat: self.epsilon_hat,
            mc_sims: self.mc_sims,
            rr_cap: self.rr_cap,
            deterministic_knapsack: self.deterministic_knapsack,
        }
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let config: ExperimentConfig = toml::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}

#[derive(Clone, Debug)]
struct Row {
    policy: &'static str,
    budget: f64,
    rep: usize,
    seeds: String,
    total_cost: f64,
    realized_profit: f64,
    estimated_profit: f64,
    samples: u64,
    wallclock_ms: f64,
    cap_hits: u64,
}

/// What a finished run reports back to the caller.
#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub rows: usize,
    pub output: PathBuf,
    /// Times any cell truncated a sample-size formula at the RR cap.
    pub cap_hits: u64,
    /// Parallel edges dropped while loading the dataset.
    pub dropped_duplicates: usize,
    /// Self-loops dropped while loading the dataset.
    pub dropped_self_loops: usize,
}

/// Run the whole grid and write the CSV. Rows appear in config order
/// (policy, then budget, then repetition), followed by per-(policy, budget)
/// mean and standard-deviation rows.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let net = load_network(&config.dataset, &config.param_config())?;
    let mlg = build_multi_level(&net);
    let policies = config.parsed_policies()?;
    let mut cells = Vec::new();
    for (pi, &kind) in policies.iter().enumerate() {
        for &budget in &config.budgets {
            for rep in 0..config.repetitions {
                cells.push((pi, kind, budget, rep));
            }
        }
    }
    let run_cell = |&(pi, kind, budget, rep): &(usize, PolicyKind, f64, usize)| -> Result<Row> {
        run_one(config, &net, &mlg, pi, kind, budget, rep)
    };
    let rows: Vec<Row> = if config.workers == 1 {
        cells.iter().map(run_cell).collect::<Result<_>>()?
    } else {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if config.workers > 0 {
            builder = builder.num_threads(config.workers);
        }
        let pool = builder
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        pool.install(|| {
            use rayon::prelude::*;
            cells.par_iter().map(run_cell).collect::<Result<_>>()
        })?
    };
    let cap_hits = rows.iter().map(|r| r.cap_hits).sum();
    let dataset = dataset_name(&config.dataset);
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in &rows {
        write_row(&mut out, &dataset, config.q, row, &row.rep.to_string());
    }
    for (pi, &kind) in policies.iter().enumerate() {
        for &budget in &config.budgets {
            let group: Vec<&Row> = rows
                .iter()
                .filter(|r| r.policy == kind.name() && r.budget == budget)
                .collect();
            debug_assert_eq!(group.len(), config.repetitions);
            let _ = pi;
            let (mean, std) = summarize_group(&group);
            write_row(&mut out, &dataset, config.q, &mean, "mean");
            write_row(&mut out, &dataset, config.q, &std, "std");
        }
    }
    std::fs::write(&config.output, out)
        .map_err(|source| Error::Io { path: config.output.clone(), source })?;
    let (dropped_duplicates, dropped_self_loops) = net.dropped_counts();
    Ok(ExperimentReport {
        rows: rows.len(),
        output: config.output.clone(),
        cap_hits,
        dropped_duplicates,
        dropped_self_loops,
    })
}

fn run_one(
    config: &ExperimentConfig,
    net: &SocialNetwork,
    mlg: &MultiLevelGraph,
    pi: usize,
    kind: PolicyKind,
    budget: f64,
    rep: usize,
) -> Result<Row> {
    if budget == 0.0 {
        // nothing is affordable; record the empty selection without running
        return Ok(Row {
            policy: kind.name(),
            budget,
            rep,
            seeds: String::new(),
            total_cost: 0.0,
            realized_profit: 0.0,
            estimated_profit: 0.0,
            samples: 0,
            wallclock_ms: 0.0,
            cap_hits: 0,
        });
    }
    let env_seed = seeds::derive(config.seed, &[0xE, rep as u64]);
    let policy_seed =
        seeds::derive(config.seed, &[0x9, pi as u64, budget.to_bits(), rep as u64]);
    let mut env = KeyedWorld::new(env_seed);
    let res = run_policy(kind, net, mlg, &config.policy_params(budget), policy_seed, &mut env)?;
    let seeds_joined = res
        .seeds
        .iter()
        .map(|&u| net.label(u))
        .collect::<Vec<_>>()
        .join(";");
    Ok(Row {
        policy: kind.name(),
        budget,
        rep,
        seeds: seeds_joined,
        total_cost: res.total_cost,
        realized_profit: res.realized_profit,
        estimated_profit: res.estimated_profit,
        samples: res.samples_used,
        wallclock_ms: if config.timing { res.wallclock_ms } else { 0.0 },
        cap_hits: res.cap_hits,
    })
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn summarize_group(group: &[&Row]) -> (Row, Row) {
    let n = group.len() as f64;
    let mean_of = |f: &dyn Fn(&Row) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / n;
    let std_of = |f: &dyn Fn(&Row) -> f64, m: f64| {
        if group.len() < 2 {
            return 0.0;
        }
        let ss = group.iter().map(|r| (f(r) - m).powi(2)).sum::<f64>();
        (ss / (n - 1.0)).sqrt()
    };
    let cost = mean_of(&|r| r.total_cost);
    let realized = mean_of(&|r| r.realized_profit);
    let estimated = mean_of(&|r| r.estimated_profit);
    let samples = mean_of(&|r| r.samples as f64);
    let wallclock = mean_of(&|r| r.wallclock_ms);
    let proto = group[0];
    let mean = Row {
        policy: proto.policy,
        budget: proto.budget,
        rep: 0,
        seeds: String::new(),
        total_cost: cost,
        realized_profit: realized,
        estimated_profit: estimated,
        samples: samples.round() as u64,
        wallclock_ms: wallclock,
        cap_hits: 0,
    };
    let std = Row {
        policy: proto.policy,
        budget: proto.budget,
        rep: 0,
        seeds: String::new(),
        total_cost: std_of(&|r| r.total_cost, cost),
        realized_profit: std_of(&|r| r.realized_profit, realized),
        estimated_profit: std_of(&|r| r.estimated_profit, estimated),
        samples: std_of(&|r| r.samples as f64, samples).round() as u64,
        wallclock_ms: std_of(&|r| r.wallclock_ms, wallclock),
        cap_hits: 0,
    };
    (mean, std)
}

fn write_row(out: &mut String, dataset: &str, q: usize, row: &Row, rep: &str) {
    let fields = [
        dataset.to_string(),
        row.policy.to_string(),
        q.to_string(),
        row.budget.to_string(),
        rep.to_string(),
        row.seeds.clone(),
        row.total_cost.to_string(),
        row.realized_profit.to_string(),
        row.estimated_profit.to_string(),
        row.samples.to_string(),
        row.wallclock_ms.to_string(),
    ];
    for (i, field) in fields.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_csv_field(out, field);
    }
    out.push('\n');
}

fn push_csv_field(out: &mut String, field: &str) {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        out.push('"');
        for ch in field.chars() {
            if ch == '"' {
                out.push('"');
            }
            out.push(ch);
        }
        out.push('"');
    } else {
        out.push_str(field);
    }
}

fn split_csv_line(path: &Path, lineno: usize, line: &str) -> Result<Vec<String>> {
    let mut fields = Vec::new();
    let mut field = String::new();
    let mut chars = line.chars().peekable();
    let mut quoted = false;
    loop {
        match chars.next() {
            None => {
                if quoted {
                    return Err(Error::Csv {
                        path: path.to_path_buf(),
                        line: lineno,
                        msg: "unterminated quoted field".into(),
                    });
                }
                fields.push(field);
                return Ok(fields);
            }
            Some('"') if quoted => {
                if chars.peek() == Some(&'"') {
                    chars.next();
                    field.push('"');
                } else {
                    quoted = false;
                }
            }
            Some('"') if field.is_empty() => quoted = true,
            Some(',') if !quoted => {
                fields.push(std::mem::take(&mut field));
            }
            Some(ch) => field.push(ch),
        }
    }
}

/// Per-(policy, budget) aggregates of an experiment CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryLine {
    pub policy: String,
    pub budget: f64,
    pub runs: usize,
    pub mean_profit: f64,
    pub mean_cost: f64,
    pub mean_wallclock_ms: f64,
}

/// Read an experiment CSV back and aggregate the repetition rows. The
/// mean/std rows the writer appends are ignored; any structural defect is an
/// error carrying the offending line number.
pub fn summarize(path: &Path) -> Result<Vec<SummaryLine>> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(Error::Csv { path: path.to_path_buf(), line: 1, msg: "empty file".into() });
    };
    if header != CSV_HEADER {
        return Err(Error::Csv {
            path: path.to_path_buf(),
            line: 1,
            msg: format!("unexpected header {header:?}"),
        });
    }
    let mut groups: Vec<SummaryLine> = Vec::new();
    let mut data_rows = 0usize;
    for (i, line) in lines {
        let lineno = i + 1;
        if line.is_empty() {
            continue;
        }
        let fields = split_csv_line(path, lineno, line)?;
        if fields.len() != 11 {
            return Err(Error::Csv {
                path: path.to_path_buf(),
                line: lineno,
                msg: format!("expected 11 fields, found {}", fields.len()),
            });
        }
        let numeric = |idx: usize, name: &str| -> Result<f64> {
            fields[idx].parse::<f64>().map_err(|_| Error::Csv {
                path: path.to_path_buf(),
                line: lineno,
                msg: format!("bad {name} value {:?}", fields[idx]),
            })
        };
        let budget = numeric(3, "budget")?;
        let cost = numeric(6, "total_cost")?;
        let profit = numeric(7, "realized_profit")?;
        numeric(8, "estimated_profit")?;
        numeric(9, "rr_sets_or_sims_used")?;
        let wallclock = numeric(10, "wallclock_ms")?;
        if fields[4].parse::<usize>().is_err() {
            // a mean/std summary row
            continue;
        }
        data_rows += 1;
        let policy = &fields[1];
        match groups
            .iter_mut()
            .find(|g| g.policy == *policy && g.budget == budget)
        {
            Some(g) => {
                g.runs += 1;
                g.mean_profit += profit;
                g.mean_cost += cost;
                g.mean_wallclock_ms += wallclock;
            }
            None => groups.push(SummaryLine {
                policy: policy.clone(),
                budget,
                runs: 1,
                mean_profit: profit,
                mean_cost: cost,
                mean_wallclock_ms: wallclock,
            }),
        }
    }
    if data_rows == 0 {
        return Err(Error::Csv {
            path: path.to_path_buf(),
            line: 1,
            msg: "no repetition rows".into(),
        });
    }
    for g in &mut groups {
        let n = g.runs as f64;
        g.mean_profit /= n;
        g.mean_cost /= n;
        g.mean_wallclock_ms /= n;
    }
    Ok(groups)
}

/// Render [`summarize`] output as an aligned text table.
pub fn format_summary(lines: &[SummaryLine]) -> String {
    let mut out = String::new();
    let policy_w = lines
        .iter()
        .map(|l| l.policy.len())
        .chain(std::iter::once("policy".len()))
        .max()
        .unwrap_or(6);
    let _ = writeln!(
        out,
        "{:<policy_w$}  {:>10}  {:>5}  {:>14}  {:>12}  {:>14}",
        "policy", "budget", "runs", "mean_profit", "mean_cost", "mean_wall_ms"
    );
    for l in lines {
        let _ = writeln!(
            out,
            "{:<policy_w$}  {:>10}  {:>5}  {:>14.6}  {:>12.6}  {:>14.3}",
            l.policy, l.budget, l.runs, l.mean_profit, l.mean_cost, l.mean_wallclock_ms
        );
    }
    out
}
