//! Realization sampling, forward diffusion, profit evaluation, and the
//! observation step used by adaptive policies.
//!
//! A full realization fixes every multi-level edge live or blocked. Diffusion
//! is plain reachability per level: a feature node is accepted when some seed
//! copy reaches it through live edges of its own level. Profit of an accepted
//! configuration is sum over users of b(u) times the accepted weight mass of
//! u, which is the purchase probability once the uniform threshold is
//! integrated out.
//!
//! Adaptive policies never see a full realization. They grow a
//! [`PartialRealization`] through [`observe`]: seeding a node reveals the
//! states of all out-edges of every feature node the new cascade reaches
//! (full-adoption feedback) and nothing else.

use rand::Rng;

use crate::error::{Error, Result};
use crate::net::{MultiLevelGraph, NodeId, SocialNetwork};
use crate::seeds;

/// Live/blocked assignment to every multi-level edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FullRealization {
    pub live: Vec<bool>,
}

/// Each edge independently live with its own probability.
pub fn sample_realization(mlg: &MultiLevelGraph, rng: &mut impl Rng) -> FullRealization {
    let live = (0..mlg.num_edges())
        .map(|mle| rng.random::<f64>() < mlg.edge_prob(mle))
        .collect();
    FullRealization { live }
}

/// Probability mass of one realization under the product form.
pub fn realization_probability(mlg: &MultiLevelGraph, real: &FullRealization) -> f64 {
    let mut pr = 1.0;
    for mle in 0..mlg.num_edges() {
        let p = mlg.edge_prob(mle);
        pr *= if real.live[mle] { p } else { 1.0 - p };
    }
    pr
}

/// Source of edge states for a lazily revealed world.
///
/// Implementations must be memoryless in the sense that the answer for an
/// edge depends only on the world's identity, never on query order; callers
/// are free to query an edge zero or more times.
pub trait WorldSource {
    fn edge_state(&mut self, mle: usize, p: f64) -> bool;
}

/// World keyed by a seed: edge states are derived per edge id, so any two
/// traversals of the same seed see the same world regardless of order. This
/// is what lets paired policy runs share an environment.
#[derive(Clone, Copy, Debug)]
pub struct KeyedWorld {
    seed: u64,
}

impl KeyedWorld {
    pub fn new(seed: u64) -> Self {
        KeyedWorld { seed }
    }
}

impl WorldSource for KeyedWorld {
    fn edge_state(&mut self, mle: usize, p: f64) -> bool {
        seeds::keyed_unit(self.seed, mle as u64) < p
    }
}

/// World backed by an explicit realization.
pub struct FixedWorld<'a> {
    pub real: &'a FullRealization,
}

impl WorldSource for FixedWorld<'_> {
    fn edge_state(&mut self, mle: usize, _p: f64) -> bool {
        self.real.live[mle]
    }
}

/// Set of accepted feature nodes, dense over the multi-level graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AcceptedSet {
    bits: Vec<bool>,
    count: usize,
}

impl AcceptedSet {
    pub fn empty(mlg: &MultiLevelGraph) -> Self {
        AcceptedSet {
            bits: vec![false; mlg.num_feature_nodes()],
            count: 0,
        }
    }

    pub fn contains(&self, fid: usize) -> bool {
        self.bits[fid]
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn insert(&mut self, fid: usize) -> bool {
        if self.bits[fid] {
            return false;
        }
        self.bits[fid] = true;
        self.count += 1;
        true
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(fid, &b)| b.then_some(fid))
    }
}

fn check_seeds(n: usize, seeds: &[NodeId]) -> Result<()> {
    match seeds.iter().find(|&&u| u >= n) {
        Some(&u) => Err(Error::UnknownNode(u)),
        None => Ok(()),
    }
}

/// Feature nodes reachable from the seeds' copies through live edges.
/// Duplicate seeds are harmless (reachability is idempotent).
pub fn diffuse(
    mlg: &MultiLevelGraph,
    real: &FullRealization,
    seed_nodes: &[NodeId],
) -> Result<AcceptedSet> {
    let mut world = FixedWorld { real };
    cascade(mlg, seed_nodes, &mut world)
}

/// Reachability under any world source, revealing edges on first touch.
/// Each queried edge has an accepted tail and each accepted feature node is
/// expanded exactly once, so every edge is queried at most once.
pub fn cascade(
    mlg: &MultiLevelGraph,
    seed_nodes: &[NodeId],
    world: &mut dyn WorldSource,
) -> Result<AcceptedSet> {
    check_seeds(mlg.base_nodes(), seed_nodes)?;
    let mut acc = AcceptedSet::empty(mlg);
    let mut queue = std::collections::VecDeque::new();
    for &u in seed_nodes {
        for i in 0..mlg.q() {
            let fid = mlg.fid(u, i);
            if acc.insert(fid) {
                queue.push_back(fid);
            }
        }
    }
    while let Some(fid) = queue.pop_front() {
        for (mle, head) in mlg.out_of(fid) {
            if !acc.contains(head) && world.edge_state(mle, mlg.edge_prob(mle)) && acc.insert(head)
            {
                queue.push_back(head);
            }
        }
    }
    Ok(acc)
}

/// Expected profit of an accepted configuration: for each user, profit times
/// the weight mass of its accepted copies.
pub fn profit(net: &SocialNetwork, accepted: &AcceptedSet) -> f64 {
    accepted.iter().map(|fid| net.mass_of(fid)).sum()
}

/// Mean and standard error of profit over `sims` independent worlds.
///
/// Worlds are keyed by (`seed`, simulation index); edges are revealed only as
/// cascades touch them, which is distribution-equivalent to materializing the
/// full realization up front.
pub fn monte_carlo_profit(
    net: &SocialNetwork,
    mlg: &MultiLevelGraph,
    seed_nodes: &[NodeId],
    sims: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if sims == 0 {
        return Err(Error::ZeroSimulations);
    }
    check_seeds(mlg.base_nodes(), seed_nodes)?;
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for k in 0..sims {
        let mut world = KeyedWorld::new(seeds::derive(seed, &[k as u64]));
        let acc = cascade(mlg, seed_nodes, &mut world)?;
        let f = profit(net, &acc);
        sum += f;
        sumsq += f * f;
    }
    let mean = sum / sims as f64;
    let se = if sims > 1 {
        let var = ((sumsq - sum * sum / sims as f64) / (sims as f64 - 1.0)).max(0.0);
        (var / sims as f64).sqrt()
    } else {
        0.0
    };
    Ok((mean, se))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EdgeState {
    Unknown,
    Live,
    Blocked,
}

/// Edge states observed so far plus the seeds chosen so far and the feature
/// nodes they accepted.
///
/// Invariants maintained by [`observe`]:
/// - an edge is non-unknown iff its tail feature node is accepted;
/// - accepted is closed under live observed edges;
/// - every feature copy of every seed is accepted.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialRealization {
    state: Vec<EdgeState>,
    dom: Vec<NodeId>,
    is_seed: Vec<bool>,
    accepted: Vec<bool>,
    accepted_count: usize,
}

impl PartialRealization {
    pub fn new(mlg: &MultiLevelGraph) -> Self {
        PartialRealization {
            state: vec![EdgeState::Unknown; mlg.num_edges()],
            dom: Vec::new(),
            is_seed: vec![false; mlg.base_nodes()],
            accepted: vec![false; mlg.num_feature_nodes()],
            accepted_count: 0,
        }
    }

    pub fn state(&self, mle: usize) -> EdgeState {
        self.state[mle]
    }

    /// Seeds in selection order.
    pub fn dom(&self) -> &[NodeId] {
        &self.dom
    }

    pub fn is_seed(&self, u: NodeId) -> bool {
        self.is_seed[u]
    }

    pub fn is_accepted(&self, fid: usize) -> bool {
        self.accepted[fid]
    }

    pub fn accepted_count(&self) -> usize {
        self.accepted_count
    }

    pub fn iter_accepted(&self) -> impl Iterator<Item = usize> + '_ {
        self.accepted
            .iter()
            .enumerate()
            .filter_map(|(fid, &b)| b.then_some(fid))
    }

    /// Profit realized so far: mass of every accepted feature node.
    pub fn realized_profit(&self, net: &SocialNetwork) -> f64 {
        self.iter_accepted().map(|fid| net.mass_of(fid)).sum()
    }

    /// Count of unknown edges.
    pub fn unknown_edges(&self) -> usize {
        self.state.iter().filter(|s| **s == EdgeState::Unknown).count()
    }

    /// Check the full-adoption feedback invariants. Test support.
    pub fn validate(&self, mlg: &MultiLevelGraph) -> Result<()> {
        for mle in 0..mlg.num_edges() {
            let (tail, head) = mlg.edge_endpoints(mle);
            let observed = self.state[mle] != EdgeState::Unknown;
            if observed != self.accepted[tail] {
                return Err(Error::InvalidNetwork(format!(
                    "edge {mle} observation inconsistent with tail acceptance"
                )));
            }
            if self.state[mle] == EdgeState::Live && !self.accepted[head] {
                return Err(Error::InvalidNetwork(format!(
                    "live edge {mle} with unaccepted head"
                )));
            }
        }
        for &u in &self.dom {
            for i in 0..mlg.q() {
                if !self.accepted[mlg.fid(u, i)] {
                    return Err(Error::InvalidNetwork(format!(
                        "seed {u} has an unaccepted copy"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Scalar summary of the residual graph: the still-unaccepted feature nodes,
/// their total profit-weight mass W, and the smallest positive node mass W*.
/// The subgraph itself is implicit in (multi-level graph, partial
/// realization); this struct only carries the bookkeeping scalars.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualGraph {
    /// W: sum of b(u) * w_u^i over unaccepted feature nodes.
    pub mass: f64,
    /// W*: minimum positive mass among unaccepted feature nodes, 0 when none.
    pub min_mass: f64,
    /// Number of unaccepted feature nodes.
    pub alive: usize,
}

impl ResidualGraph {
    /// Residual of the untouched graph: everything alive.
    /// W equals total profit because weight vectors sum to 1.
    pub fn full(net: &SocialNetwork, mlg: &MultiLevelGraph) -> Self {
        Self::compute(net, mlg, None)
    }

    /// Rescan from scratch. With `partial` absent, all nodes are alive.
    pub fn compute(
        net: &SocialNetwork,
        mlg: &MultiLevelGraph,
        partial: Option<&PartialRealization>,
    ) -> Self {
        let mut mass = 0.0;
        let mut min_mass = f64::INFINITY;
        let mut alive = 0;
        for fid in 0..mlg.num_feature_nodes() {
            if partial.is_some_and(|p| p.is_accepted(fid)) {
                continue;
            }
            alive += 1;
            let w = net.mass_of(fid);
            mass += w;
            if w > 0.0 && w < min_mass {
                min_mass = w;
            }
        }
        ResidualGraph {
            mass,
            min_mass: if min_mass.is_finite() { min_mass } else { 0.0 },
            alive,
        }
    }

    /// Refresh W* after nodes were removed; W is maintained incrementally by
    /// [`observe`] and stays untouched here.
    pub fn recompute_min_mass(
        &mut self,
        net: &SocialNetwork,
        mlg: &MultiLevelGraph,
        partial: &PartialRealization,
    ) {
        let mut min_mass = f64::INFINITY;
        for fid in 0..mlg.num_feature_nodes() {
            if partial.is_accepted(fid) {
                continue;
            }
            let w = net.mass_of(fid);
            if w > 0.0 && w < min_mass {
                min_mass = w;
            }
        }
        self.min_mass = if min_mass.is_finite() { min_mass } else { 0.0 };
    }
}

/// Outcome of one observation step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observation {
    /// Copies of the new seed that were still unaccepted when it was chosen.
    pub seed_copies: Vec<usize>,
    /// Feature nodes newly infected through live edges, seed copies excluded.
    pub activated: Vec<usize>,
}

/// Seed `new_seed` and reveal the resulting cascade under full-adoption
/// feedback: every out-edge of every newly reached feature node is observed
/// exactly once (edges observed earlier keep their state), live edges extend
/// the cascade into still-unaccepted nodes.
///
/// Updates `partial` (dom, accepted, edge states) and subtracts the mass of
/// every newly accepted feature node from `residual`; W* in `residual` is
/// left stale, callers that need it run `recompute_min_mass` afterwards.
/// The frontier is processed in ascending feature-node id for reproducible
/// traces.
pub fn observe(
    partial: &mut PartialRealization,
    residual: &mut ResidualGraph,
    net: &SocialNetwork,
    mlg: &MultiLevelGraph,
    new_seed: NodeId,
    world: &mut dyn WorldSource,
) -> Result<Observation> {
    if new_seed >= mlg.base_nodes() {
        return Err(Error::UnknownNode(new_seed));
    }
    if partial.is_seed[new_seed] {
        return Err(Error::DuplicateSeed(new_seed));
    }
    partial.is_seed[new_seed] = true;
    partial.dom.push(new_seed);

    let mut heap = std::collections::BinaryHeap::new();
    let mut seed_copies = Vec::new();
    for i in 0..mlg.q() {
        let fid = mlg.fid(new_seed, i);
        if !partial.accepted[fid] {
            partial.accepted[fid] = true;
            partial.accepted_count += 1;
            seed_copies.push(fid);
            heap.push(std::cmp::Reverse(fid));
        }
    }
    let mut activated = Vec::new();
    while let Some(std::cmp::Reverse(fid)) = heap.pop() {
        for (mle, head) in mlg.out_of(fid) {
            debug_assert_eq!(partial.state[mle], EdgeState::Unknown);
            let live = world.edge_state(mle, mlg.edge_prob(mle));
            partial.state[mle] = if live { EdgeState::Live } else { EdgeState::Blocked };
            if live && !partial.accepted[head] {
                partial.accepted[head] = true;
                partial.accepted_count += 1;
                activated.push(head);
                heap.push(std::cmp::Reverse(head));
            }
        }
    }
    for &fid in seed_copies.iter().chain(activated.iter()) {
        residual.mass -= net.mass_of(fid);
        residual.alive -= 1;
    }
    // clamp accumulated float error so downstream W > 0 checks stay honest
    if residual.alive == 0 || residual.mass < 0.0 {
        residual.mass = residual.mass.max(0.0);
    }
    Ok(Observation {
        seed_copies,
        activated,
    })
}
