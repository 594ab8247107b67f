//! Graph representation and dataset ingestion.
//!
//! A [`SocialNetwork`] is a directed graph whose nodes carry a cost, a profit,
//! and a length-q weight vector over product features, and whose edges carry a
//! length-q vector of influence probabilities (one per feature). The
//! [`MultiLevelGraph`] stacks q copies of the graph, one per feature; all
//! diffusion and sampling happens on that stacked graph.
//!
//! Purchase thresholds are uniform on [0,1] and are never stored: the expected
//! profit of a user is its profit times the weight mass of its accepted
//! feature copies, so the threshold integrates out analytically.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds;

pub type NodeId = usize;
pub type EdgeId = usize;

/// One feature copy of a user: node `user` on level `feature` of the
/// multi-level graph. Orders lexicographically, which coincides with the
/// packed index order used internally.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct FeatureNode {
    pub user: NodeId,
    pub feature: usize,
}

/// Ingestion and parameter-synthesis settings.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamConfig {
    /// Feature count q >= 1.
    pub q: usize,
    /// When false, each input edge is expanded into two reversed directed edges.
    pub directed: bool,
    /// Seed for cost/profit/weight synthesis.
    pub rng_seed: u64,
    /// Half-open-from-the-left range (lo, hi] for node costs.
    pub cost_range: (f64, f64),
    /// Same for node profits.
    pub profit_range: (f64, f64),
}

impl Default for ParamConfig {
    fn default() -> Self {
        ParamConfig {
            q: 3,
            directed: false,
            rng_seed: 0,
            cost_range: (0.0, 1.0),
            profit_range: (0.0, 1.0),
        }
    }
}

impl ParamConfig {
    pub fn validate(&self) -> Result<()> {
        if self.q == 0 {
            return Err(Error::InvalidParam("q must be at least 1".into()));
        }
        for (name, (lo, hi)) in [("cost_range", self.cost_range), ("profit_range", self.profit_range)] {
            if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
                return Err(Error::InvalidParam(format!(
                    "{name} must satisfy 0 <= lo < hi, got ({lo}, {hi})"
                )));
            }
        }
        Ok(())
    }
}

/// Directed graph with per-node cost/profit/weights and per-edge per-feature
/// probabilities. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SocialNetwork {
    q: usize,
    labels: Vec<String>,
    edge_src: Vec<NodeId>,
    edge_dst: Vec<NodeId>,
    // CSR adjacency over edge ids, bucketed in edge-id order.
    out_start: Vec<usize>,
    out_list: Vec<EdgeId>,
    in_start: Vec<usize>,
    in_list: Vec<EdgeId>,
    cost: Vec<f64>,
    profit: Vec<f64>,
    /// Flat n*q, entry u*q+i is w_u^i.
    weight: Vec<f64>,
    /// Flat m*q, entry e*q+i is the feature-i probability of edge e.
    prob: Vec<f64>,
    dropped_duplicates: usize,
    dropped_self_loops: usize,
}

const WEIGHT_SUM_TOL: f64 = 1e-9;
/// Lower clamp for synthesized costs and profits: both are divided by or
/// minimized over downstream, so exact zeros are not representable.
pub const PARAM_CLAMP: f64 = 1e-12;

impl SocialNetwork {
    /// Build from explicit parts, validating every structural invariant.
    ///
    /// `prob` is flat m*q (edge-major), `weight` flat n*q (node-major).
    /// `labels` defaults to the decimal node index.
    pub fn from_parts(
        q: usize,
        labels: Option<Vec<String>>,
        edges: &[(NodeId, NodeId)],
        prob: Vec<f64>,
        cost: Vec<f64>,
        profit: Vec<f64>,
        weight: Vec<f64>,
    ) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidParam("q must be at least 1".into()));
        }
        let n = cost.len();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let m = edges.len();
        if profit.len() != n || weight.len() != n * q {
            return Err(Error::InvalidNetwork(format!(
                "parameter lengths inconsistent: n={n}, profit={}, weight={} (want {})",
                profit.len(),
                weight.len(),
                n * q
            )));
        }
        if prob.len() != m * q {
            return Err(Error::InvalidNetwork(format!(
                "probability vector length {} does not match m*q = {}",
                prob.len(),
                m * q
            )));
        }
        let labels = match labels {
            Some(l) => {
                if l.len() != n {
                    return Err(Error::InvalidNetwork("label count mismatch".into()));
                }
                l
            }
            None => (0..n).map(|u| u.to_string()).collect(),
        };
        let mut seen = std::collections::HashSet::with_capacity(m);
        for (e, &(s, d)) in edges.iter().enumerate() {
            if s >= n || d >= n {
                return Err(Error::InvalidNetwork(format!("edge {e} endpoint out of range")));
            }
            if s == d {
                return Err(Error::InvalidNetwork(format!("edge {e} is a self-loop on node {s}")));
            }
            if !seen.insert((s, d)) {
                return Err(Error::InvalidNetwork(format!("duplicate edge ({s}, {d})")));
            }
        }
        for (e, p) in prob.iter().enumerate() {
            if !(*p > 0.0 && *p <= 1.0) {
                return Err(Error::InvalidNetwork(format!(
                    "probability {p} on edge {} feature {} outside (0,1]",
                    e / q,
                    e % q
                )));
            }
        }
        for (u, c) in cost.iter().enumerate() {
            if !(*c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidNetwork(format!("cost {c} of node {u} not positive")));
            }
        }
        for (u, b) in profit.iter().enumerate() {
            if !(*b >= 0.0 && b.is_finite()) {
                return Err(Error::InvalidNetwork(format!("profit {b} of node {u} negative")));
            }
        }
        for u in 0..n {
            let row = &weight[u * q..(u + 1) * q];
            if row.iter().any(|w| !(*w > 0.0 && *w <= 1.0)) {
                return Err(Error::InvalidNetwork(format!("weight of node {u} outside (0,1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
                return Err(Error::InvalidNetwork(format!(
                    "weights of node {u} sum to {sum}, not 1"
                )));
            }
        }

        let edge_src: Vec<NodeId> = edges.iter().map(|e| e.0).collect();
        let edge_dst: Vec<NodeId> = edges.iter().map(|e| e.1).collect();
        let (out_start, out_list) = bucket_csr(n, &edge_src);
        let (in_start, in_list) = bucket_csr(n, &edge_dst);
        Ok(SocialNetwork {
            q,
            labels,
            edge_src,
            edge_dst,
            out_start,
            out_list,
            in_start,
            in_list,
            cost,
            profit,
            weight,
            prob,
            dropped_duplicates: 0,
            dropped_self_loops: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.cost.len()
    }

    pub fn m(&self) -> usize {
        self.edge_src.len()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn label(&self, u: NodeId) -> &str {
        &self.labels[u]
    }

    pub fn node_by_label(&self, label: &str) -> Option<NodeId> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn cost(&self, u: NodeId) -> f64 {
        self.cost[u]
    }

    pub fn profit(&self, u: NodeId) -> f64 {
        self.profit[u]
    }

    /// w_u^i.
    pub fn weight(&self, u: NodeId, i: usize) -> f64 {
        self.weight[u * self.q + i]
    }

    /// Profit-weight mass of one feature copy, b(u) * w_u^i, indexed by the
    /// packed feature-node id u*q+i.
    pub fn mass_of(&self, fid: usize) -> f64 {
        self.profit[fid / self.q] * self.weight[fid]
    }

    pub fn edge(&self, e: EdgeId) -> (NodeId, NodeId) {
        (self.edge_src[e], self.edge_dst[e])
    }

    /// p_{u,v}^i for edge e = (u,v).
    pub fn prob(&self, e: EdgeId, i: usize) -> f64 {
        self.prob[e * self.q + i]
    }

    pub fn out_edges(&self, u: NodeId) -> &[EdgeId] {
        &self.out_list[self.out_start[u]..self.out_start[u + 1]]
    }

    pub fn in_edges(&self, u: NodeId) -> &[EdgeId] {
        &self.in_list[self.in_start[u]..self.in_start[u + 1]]
    }

    pub fn out_degree(&self, u: NodeId) -> usize {
        self.out_start[u + 1] - self.out_start[u]
    }

    pub fn in_degree(&self, u: NodeId) -> usize {
        self.in_start[u + 1] - self.in_start[u]
    }

    /// Sum of all node profits. The total profit-weight mass of the full
    /// multi-level graph equals this, since every weight vector sums to 1.
    pub fn total_profit(&self) -> f64 {
        self.profit.iter().sum()
    }

    pub fn max_cost(&self) -> f64 {
        self.cost.iter().cloned().fold(0.0, f64::max)
    }

    pub fn total_cost(&self) -> f64 {
        self.cost.iter().sum()
    }

    /// Input lines discarded during ingestion (duplicate edges, self-loops).
    pub fn dropped_counts(&self) -> (usize, usize) {
        (self.dropped_duplicates, self.dropped_self_loops)
    }
}

fn bucket_csr(n: usize, keys: &[NodeId]) -> (Vec<usize>, Vec<EdgeId>) {
    let mut start = vec![0usize; n + 1];
    for &k in keys {
        start[k + 1] += 1;
    }
    for i in 0..n {
        start[i + 1] += start[i];
    }
    let mut list = vec![0usize; keys.len()];
    let mut cursor = start.clone();
    // edges visited in id order, so each bucket stays sorted by edge id
    for (e, &k) in keys.iter().enumerate() {
        list[cursor[k]] = e;
        cursor[k] += 1;
    }
    (start, list)
}

/// Load a whitespace-separated edge list and synthesize node/edge parameters.
///
/// Lines starting with '#' or '%' are comments. Undirected inputs expand each
/// line into two reversed directed edges. Node ids are re-indexed densely in
/// first-appearance order; original labels are retained for output. Duplicate
/// edges and self-loops are dropped and counted.
///
/// Parameters follow the standard protocol: edge probability 1/indeg(dst) on
/// every feature, weights uniform on the simplex (q exponentials normalized),
/// costs and profits uniform on the configured half-open ranges. Draw order
/// is fixed (all costs, then all profits, then all weight vectors) so a seed
/// pins every parameter.
pub fn load_network(path: &Path, config: &ParamConfig) -> Result<SocialNetwork> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_network_from_str(&text, config, path)
}

/// In-memory variant of [`load_network`]; `origin` only labels parse errors.
pub fn load_network_from_str(
    text: &str,
    config: &ParamConfig,
    origin: &Path,
) -> Result<SocialNetwork> {
    config.validate()?;
    let mut ids: HashMap<String, NodeId> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let intern = |tok: &str, labels: &mut Vec<String>, ids: &mut HashMap<String, NodeId>| {
        if let Some(&id) = ids.get(tok) {
            return id;
        }
        let id = labels.len();
        labels.push(tok.to_string());
        ids.insert(tok.to_string(), id);
        id
    };

    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    let mut seen: std::collections::HashSet<(NodeId, NodeId)> = std::collections::HashSet::new();
    let mut dropped_duplicates = 0usize;
    let mut dropped_self_loops = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
            continue;
        }
        let mut toks = line.split_whitespace();
        let (src, dst) = match (toks.next(), toks.next(), toks.next()) {
            (Some(s), Some(d), None) => (s, d),
            _ => {
                return Err(Error::ParseLine {
                    path: origin.to_path_buf(),
                    line: lineno + 1,
                    msg: format!("expected exactly two tokens, got '{line}'"),
                })
            }
        };
        let s = intern(src, &mut labels, &mut ids);
        let d = intern(dst, &mut labels, &mut ids);
        if s == d {
            dropped_self_loops += 1;
            continue;
        }
        let mut push = |a: NodeId, b: NodeId| {
            if seen.insert((a, b)) {
                edges.push((a, b));
            } else {
                dropped_duplicates += 1;
            }
        };
        push(s, d);
        if !config.directed {
            push(d, s);
        }
    }
    drop(ids);
    if labels.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let mut net = synthesize_network(config, labels, edges)?;
    net.dropped_duplicates = dropped_duplicates;
    net.dropped_self_loops = dropped_self_loops;
    Ok(net)
}

/// Attach protocol parameters to a bare labeled edge list.
pub fn synthesize_network(
    config: &ParamConfig,
    labels: Vec<String>,
    edges: Vec<(NodeId, NodeId)>,
) -> Result<SocialNetwork> {
    config.validate()?;
    let n = labels.len();
    let q = config.q;
    let mut indeg = vec![0usize; n];
    for &(_, d) in &edges {
        indeg[d] += 1;
    }
    let mut prob = Vec::with_capacity(edges.len() * q);
    for &(_, d) in &edges {
        let p = 1.0 / indeg[d] as f64;
        for _ in 0..q {
            prob.push(p);
        }
    }

    let mut rng = seeds::rng(config.rng_seed, &[]);
    let draw_range = |rng: &mut rand_chacha::ChaCha8Rng, (lo, hi): (f64, f64)| -> f64 {
        // 1 - U maps [0,1) onto (0,1], keeping the lower bound exclusive
        let v = lo + (1.0 - rng.random::<f64>()) * (hi - lo);
        v.max(PARAM_CLAMP)
    };
    let cost: Vec<f64> = (0..n).map(|_| draw_range(&mut rng, config.cost_range)).collect();
    let profit: Vec<f64> = (0..n).map(|_| draw_range(&mut rng, config.profit_range)).collect();
    let mut weight = Vec::with_capacity(n * q);
    for _ in 0..n {
        let mut row = [0.0f64; 64];
        assert!(q <= 64, "feature count above 64 is not supported");
        let mut sum = 0.0;
        for w in row.iter_mut().take(q) {
            // exponential via inverse CDF; normalizing exponentials is
            // uniform on the simplex
            *w = -(1.0 - rng.random::<f64>()).ln();
            sum += *w;
        }
        if sum <= 0.0 {
            // all draws underflowed to zero; fall back to the barycenter
            for w in row.iter_mut().take(q) {
                *w = 1.0 / q as f64;
            }
            sum = 1.0;
        }
        for w in row.iter().take(q) {
            weight.push((w / sum).max(PARAM_CLAMP));
        }
    }
    SocialNetwork::from_parts(q, Some(labels), &edges, prob, cost, profit, weight)
}

/// q stacked copies of the base graph. Feature node u_i has packed id u*q+i,
/// the level-i copy of base edge e has packed id e*q+i. There are no edges
/// between levels.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiLevelGraph {
    n: usize,
    m: usize,
    q: usize,
    edge_src: Vec<NodeId>,
    edge_dst: Vec<NodeId>,
    out_start: Vec<usize>,
    out_list: Vec<EdgeId>,
    in_start: Vec<usize>,
    in_list: Vec<EdgeId>,
    prob: Vec<f64>,
}

pub fn build_multi_level(net: &SocialNetwork) -> MultiLevelGraph {
    MultiLevelGraph {
        n: net.n(),
        m: net.m(),
        q: net.q,
        edge_src: net.edge_src.clone(),
        edge_dst: net.edge_dst.clone(),
        out_start: net.out_start.clone(),
        out_list: net.out_list.clone(),
        in_start: net.in_start.clone(),
        in_list: net.in_list.clone(),
        prob: net.prob.clone(),
    }
}

impl MultiLevelGraph {
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn base_nodes(&self) -> usize {
        self.n
    }

    pub fn num_feature_nodes(&self) -> usize {
        self.n * self.q
    }

    pub fn num_edges(&self) -> usize {
        self.m * self.q
    }

    pub fn fid(&self, user: NodeId, feature: usize) -> usize {
        debug_assert!(feature < self.q);
        user * self.q + feature
    }

    pub fn user_of(&self, fid: usize) -> NodeId {
        fid / self.q
    }

    pub fn feature_of(&self, fid: usize) -> usize {
        fid % self.q
    }

    pub fn feature_node(&self, fid: usize) -> FeatureNode {
        FeatureNode {
            user: fid / self.q,
            feature: fid % self.q,
        }
    }

    /// Probability of the packed multi-level edge e*q+i.
    pub fn edge_prob(&self, mle: usize) -> f64 {
        self.prob[mle]
    }

    pub fn edge_endpoints(&self, mle: usize) -> (usize, usize) {
        let (e, i) = (mle / self.q, mle % self.q);
        (
            self.edge_src[e] * self.q + i,
            self.edge_dst[e] * self.q + i,
        )
    }

    /// Outgoing multi-level edges of a feature node as (edge id, head fid).
    pub fn out_of(&self, fid: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (u, i) = (fid / self.q, fid % self.q);
        self.out_list[self.out_start[u]..self.out_start[u + 1]]
            .iter()
            .map(move |&e| (e * self.q + i, self.edge_dst[e] * self.q + i))
    }

    /// Incoming multi-level edges of a feature node as (edge id, tail fid).
    pub fn in_of(&self, fid: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (u, i) = (fid / self.q, fid % self.q);
        self.in_list[self.in_start[u]..self.in_start[u + 1]]
            .iter()
            .map(move |&e| (e * self.q + i, self.edge_src[e] * self.q + i))
    }
}

/// Random directed graph for experiments: a covering cycle (so every node
/// appears and is reachable) plus uniformly random extra edges, no duplicates
/// or self-loops. Returns edge-list text compatible with [`load_network`].
pub fn synthesize_edge_list(nodes: usize, edges: usize, seed: u64) -> Result<String> {
    if nodes < 2 {
        return Err(Error::InvalidParam("need at least 2 nodes".into()));
    }
    if edges < nodes || edges > nodes * (nodes - 1) {
        return Err(Error::InvalidParam(format!(
            "edge count must lie in [{}, {}]",
            nodes,
            nodes * (nodes - 1)
        )));
    }
    let mut rng = seeds::rng(seed, &[0x5EED]);
    let mut seen = std::collections::HashSet::with_capacity(edges);
    let mut out = String::new();
    for u in 0..nodes {
        let v = (u + 1) % nodes;
        seen.insert((u, v));
        let _ = writeln!(out, "{u} {v}");
    }
    let mut remaining = edges - nodes;
    while remaining > 0 {
        let u = rng.random_range(0..nodes);
        let v = rng.random_range(0..nodes);
        if u == v || !seen.insert((u, v)) {
            continue;
        }
        let _ = writeln!(out, "{u} {v}");
        remaining -= 1;
    }
    Ok(out)
}

/// Convenience for tests and the oracle CLI: equal profits/costs of 1, a
/// given q and explicit per-edge probability vectors and weight rows.
pub fn unit_network(
    q: usize,
    n: usize,
    edges: &[(NodeId, NodeId)],
    edge_probs: &[Vec<f64>],
    weights: &[Vec<f64>],
) -> Result<SocialNetwork> {
    let prob: Vec<f64> = edge_probs.iter().flat_map(|v| v.iter().copied()).collect();
    let weight: Vec<f64> = weights.iter().flat_map(|v| v.iter().copied()).collect();
    SocialNetwork::from_parts(
        q,
        None,
        edges,
        prob,
        vec![1.0; n],
        vec![1.0; n],
        weight,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(q: usize, directed: bool) -> ParamConfig {
        ParamConfig {
            q,
            directed,
            rng_seed: 7,
            ..ParamConfig::default()
        }
    }

    #[test]
    fn directed_two_edge_chain() {
        let net = load_network_from_str("0 1\n1 2", &cfg(1, true), Path::new("t")).unwrap();
        assert_eq!(net.n(), 3);
        assert_eq!(net.m(), 2);
        // both heads have in-degree 1, so probability 1.0
        assert_eq!(net.prob(0, 0), 1.0);
        assert_eq!(net.prob(1, 0), 1.0);
        assert_eq!(net.edge(0), (0, 1));
        assert_eq!(net.edge(1), (1, 2));
    }

    #[test]
    fn undirected_expansion() {
        let net = load_network_from_str("0 1", &cfg(2, false), Path::new("t")).unwrap();
        assert_eq!(net.n(), 2);
        assert_eq!(net.m(), 2);
        for e in 0..2 {
            for i in 0..2 {
                assert_eq!(net.prob(e, i), 1.0);
            }
        }
    }

    #[test]
    fn weights_sum_to_one() {
        let net = load_network_from_str("0 1\n1 2\n2 0", &cfg(3, true), Path::new("t")).unwrap();
        for u in 0..net.n() {
            let sum: f64 = (0..3).map(|i| net.weight(u, i)).sum();
            assert!((sum - 1.0).abs() <= 1e-9, "node {u} weight sum {sum}");
        }
    }

    #[test]
    fn prob_sum_matches_indegree_protocol() {
        let text = "0 1\n2 1\n0 2\n1 2";
        let net = load_network_from_str(text, &cfg(3, true), Path::new("t")).unwrap();
        // for each dst, per-feature probabilities over one edge sum to q/indeg
        for e in 0..net.m() {
            let (_, d) = net.edge(e);
            let sum: f64 = (0..3).map(|i| net.prob(e, i)).sum();
            assert!((sum - 3.0 / net.in_degree(d) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn first_appearance_indexing_keeps_labels() {
        let net =
            load_network_from_str("n9 n2\nn2 n5", &cfg(1, true), Path::new("t")).unwrap();
        assert_eq!(net.label(0), "n9");
        assert_eq!(net.label(1), "n2");
        assert_eq!(net.label(2), "n5");
    }

    #[test]
    fn duplicates_and_self_loops_dropped_with_counts() {
        let text = "0 1\n0 1\n2 2\n1 0";
        let net = load_network_from_str(text, &cfg(1, false), Path::new("t")).unwrap();
        // undirected: first line gives (0,1) and (1,0); second line duplicates
        // both; "1 0" duplicates both again
        assert_eq!(net.m(), 2);
        let (dups, loops) = net.dropped_counts();
        assert_eq!(dups, 4);
        assert_eq!(loops, 1);
        assert_eq!(net.n(), 3, "self-loop node still interned");
    }

    #[test]
    fn malformed_line_reports_number() {
        let err = load_network_from_str("0 1\nbogus", &cfg(1, true), Path::new("t"))
            .unwrap_err();
        match err {
            Error::ParseLine { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn empty_input_is_an_error() {
        let err =
            load_network_from_str("# nothing\n", &cfg(1, true), Path::new("t")).unwrap_err();
        assert!(matches!(err, Error::EmptyGraph));
    }

    #[test]
    fn ingestion_is_deterministic() {
        let a = load_network_from_str("0 1\n1 2\n2 0", &cfg(2, false), Path::new("t")).unwrap();
        let b = load_network_from_str("0 1\n1 2\n2 0", &cfg(2, false), Path::new("t")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn multi_level_counts() {
        // 4 nodes, 3 edges, q=3 gives 12 feature nodes and 9 layered edges
        let net = load_network_from_str("0 1\n0 2\n2 3", &cfg(3, true), Path::new("t")).unwrap();
        let mlg = build_multi_level(&net);
        assert_eq!(mlg.num_feature_nodes(), 12);
        assert_eq!(mlg.num_edges(), 9);
        assert_eq!(mlg.q(), 3);
    }

    #[test]
    fn multi_level_is_pure() {
        let net = load_network_from_str("0 1\n1 2", &cfg(2, true), Path::new("t")).unwrap();
        assert_eq!(build_multi_level(&net), build_multi_level(&net));
    }

    #[test]
    fn multi_level_layer_probabilities() {
        let net = unit_network(2, 2, &[(0, 1)], &[vec![0.5, 1.0]], &vec![vec![0.5, 0.5]; 2]).unwrap();
        let mlg = build_multi_level(&net);
        assert_eq!(mlg.edge_prob(0), 0.5);
        assert_eq!(mlg.edge_prob(1), 1.0);
        let (s0, d0) = mlg.edge_endpoints(0);
        let (s1, d1) = mlg.edge_endpoints(1);
        // level 0 connects a_0 -> b_0, level 1 connects a_1 -> b_1
        assert_eq!((s0, d0), (mlg.fid(0, 0), mlg.fid(1, 0)));
        assert_eq!((s1, d1), (mlg.fid(0, 1), mlg.fid(1, 1)));
        // no cross-level edges by construction
        for mle in 0..mlg.num_edges() {
            let (s, d) = mlg.edge_endpoints(mle);
            assert_eq!(mlg.feature_of(s), mlg.feature_of(d));
        }
    }

    #[test]
    fn q1_multi_level_mirrors_base() {
        let net = load_network_from_str("0 1\n1 2", &cfg(1, true), Path::new("t")).unwrap();
        let mlg = build_multi_level(&net);
        assert_eq!(mlg.num_feature_nodes(), net.n());
        assert_eq!(mlg.num_edges(), net.m());
        for e in 0..net.m() {
            assert_eq!(mlg.edge_endpoints(e), net.edge(e));
            assert_eq!(mlg.edge_prob(e), net.prob(e, 0));
        }
    }

    #[test]
    fn synthesized_edge_list_loads() {
        let text = synthesize_edge_list(30, 90, 3).unwrap();
        let net = load_network_from_str(&text, &cfg(3, true), Path::new("synth")).unwrap();
        assert_eq!(net.n(), 30);
        assert_eq!(net.m(), 90);
        let (dups, loops) = net.dropped_counts();
        assert_eq!((dups, loops), (0, 0));
    }

    #[test]
    fn from_parts_rejects_bad_inputs() {
        let w = vec![1.0, 1.0];
        assert!(matches!(
            SocialNetwork::from_parts(1, None, &[(0, 0)], vec![1.0], vec![1.0; 2], vec![1.0; 2], w.clone()),
            Err(Error::InvalidNetwork(_))
        ));
        assert!(matches!(
            SocialNetwork::from_parts(1, None, &[(0, 1), (0, 1)], vec![1.0; 2], vec![1.0; 2], vec![1.0; 2], w.clone()),
            Err(Error::InvalidNetwork(_))
        ));
        assert!(matches!(
            SocialNetwork::from_parts(1, None, &[(0, 1)], vec![1.5], vec![1.0; 2], vec![1.0; 2], w),
            Err(Error::InvalidNetwork(_))
        ));
    }
}
