use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use mfpm_core::experiment::{format_summary, load_config, run_experiment, summarize};
use mfpm_core::net::{build_multi_level, load_network, synthesize_edge_list, ParamConfig};
use mfpm_core::oracle::{exact_optimum, exact_profit, EnumerationBudget};

#[derive(Parser)]
#[command(
    name = "mfpm",
    version,
    about = "Budgeted profit maximization on multi-feature social networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment grid described by a TOML config and write a CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Drop budget-overflowing candidates instead of flipping the
        /// admission coin, keeping every realized cost within the budget.
        #[arg(long)]
        deterministic_knapsack: bool,
    },
    /// Aggregate an experiment CSV into per-(policy, budget) means.
    Summarize { csv: PathBuf },
    /// Evaluate the exact profit expectation of a seed set, or the exact
    /// optimum, by enumerating edge realizations. Small graphs only.
    Oracle {
        /// Edge-list file; parameters are synthesized from the options below.
        #[arg(long)]
        graph: PathBuf,
        /// Number of product features.
        #[arg(long, default_value_t = 3)]
        q: usize,
        /// Treat edges as directed instead of expanding both directions.
        #[arg(long)]
        directed: bool,
        /// Seed for parameter synthesis.
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
        /// Cost interval as "lo,hi"; draws cover (lo, hi].
        #[arg(long, value_parser = parse_range, default_value = "0,1")]
        cost_range: (f64, f64),
        /// Profit interval as "lo,hi"; draws cover (lo, hi].
        #[arg(long, value_parser = parse_range, default_value = "0,1")]
        profit_range: (f64, f64),
        /// Refuse to enumerate more multi-level edges than this.
        #[arg(long, default_value_t = 20)]
        max_edges: usize,
        /// Seed node labels; evaluates their exact profit expectation.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<String>>,
        /// Search all budget-feasible seed sets for the exact optimum.
        #[arg(long)]
        optimum: bool,
        /// Budget for --optimum.
        #[arg(long)]
        budget: Option<f64>,
    },
    /// Generate a random edge list (a covering cycle plus extra edges).
    Synth {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        edges: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| format!("expected \"lo,hi\", got {s:?}"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
    Ok((lo, hi))
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run { config, deterministic_knapsack } => {
            let mut config = load_config(&config)?;
            if deterministic_knapsack {
                config.deterministic_knapsack = true;
            }
            let report = run_experiment(&config)?;
            if report.dropped_duplicates > 0 || report.dropped_self_loops > 0 {
                eprintln!(
                    "note: dropped {} duplicate edges and {} self-loops while loading",
                    report.dropped_duplicates, report.dropped_self_loops
                );
            }
            if report.cap_hits > 0 {
                eprintln!(
                    "warning: {} sample batches were truncated at rr_cap; accuracy guarantees do not hold for them",
                    report.cap_hits
                );
            }
            println!("wrote {} rows to {}", report.rows, report.output.display());
        }
        Command::Summarize { csv } => {
            let lines = summarize(&csv)?;
            print!("{}", format_summary(&lines));
        }
        Command::Oracle {
            graph,
            q,
            directed,
            rng_seed,
            cost_range,
            profit_range,
            max_edges,
            seeds,
            optimum,
            budget,
        } => {
            let config = ParamConfig { q, directed, rng_seed, cost_range, profit_range };
            let net = load_network(&graph, &config)?;
            let (dups, loops) = net.dropped_counts();
            if dups > 0 || loops > 0 {
                eprintln!("note: dropped {dups} duplicate edges and {loops} self-loops while loading");
            }
            let mlg = build_multi_level(&net);
            let limit = EnumerationBudget { max_edges };
            match (seeds, optimum) {
                (Some(labels), false) => {
                    let mut ids = Vec::with_capacity(labels.len());
                    for label in &labels {
                        let id = net
                            .node_by_label(label)
                            .with_context(|| format!("node {label:?} is not in the graph"))?;
                        ids.push(id);
                    }
                    let value = exact_profit(&net, &mlg, &ids, &limit)?;
                    println!("exact profit expectation of {{{}}}: {value}", labels.join(", "));
                }
                (None, true) => {
                    let Some(b) = budget else {
                        bail!("--optimum needs --budget");
                    };
                    let (set, value) = exact_optimum(&net, &mlg, b, &limit)?;
                    let labels: Vec<&str> = set.iter().map(|&u| net.label(u)).collect();
                    println!("optimum for budget {b}: {{{}}} with profit {value}", labels.join(", "));
                }
                (Some(_), true) => bail!("--seeds and --optimum are mutually exclusive"),
                (None, false) => bail!("pass --seeds to evaluate a set or --optimum to search"),
            }
        }
        Command::Synth { nodes, edges, seed, out } => {
            let text = synthesize_edge_list(nodes, edges, seed)?;
            std::fs::write(&out, &text)
                .with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {edges} edges over {nodes} nodes to {}", out.display());
        }
    }
    Ok(())
}
