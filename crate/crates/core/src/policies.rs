//! Seed-selection policies under an expected-cost budget.
//!
//! All policies share one stopping rule: while the running cost stays within
//! the budget, chosen nodes are added outright; the first candidate that
//! would push the total past the budget B is admitted with probability
//! (B - spent) / cost and selection ends either way. This keeps the expected
//! total cost at most B and the realized total strictly below B plus the
//! largest single cost. With `deterministic_knapsack` the overflowing
//! candidate is always dropped instead, so the realized cost never exceeds B.
//!
//! Non-adaptive policies (MGMC, MGRIS, AR, AMD) pick the whole seed set
//! first and touch the environment world only to realize the final cascade.
//! Adaptive policies (AG, SAG, AMP) observe the cascade of each accepted
//! seed before choosing the next one, and re-estimate gains on the residual
//! graph that conditioning leaves behind.

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::diffusion::{
    cascade, observe, profit, AcceptedSet, PartialRealization, ResidualGraph, WorldSource,
    KeyedWorld,
};
use crate::error::{Error, Result};
use crate::estimation::{
    budget_tail_mass, chernoff_alpha, chernoff_lambda, RrCollection,
};
use crate::net::{MultiLevelGraph, NodeId, SocialNetwork};
use crate::seeds;

/// The seven selection policies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    /// Modified greedy, Monte-Carlo gain estimates.
    MgMc,
    /// Modified greedy, one shared batch of reverse-reachable sets.
    MgRis,
    /// Adaptive greedy, Monte-Carlo gain estimates on the residual graph.
    Ag,
    /// Sampled adaptive greedy: per-step sampled argmax with a doubling
    /// schedule and an empirical lower-bound stopping test.
    Sag,
    /// Uniformly random order.
    Ar,
    /// Static out-degree order.
    Amd,
    /// Adaptive max-profit: per-step RR estimates, not divided by cost.
    Amp,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 7] = [
        PolicyKind::MgMc,
        PolicyKind::MgRis,
        PolicyKind::Ag,
        PolicyKind::Sag,
        PolicyKind::Ar,
        PolicyKind::Amd,
        PolicyKind::Amp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::MgMc => "MGMC",
            PolicyKind::MgRis => "MGRIS",
            PolicyKind::Ag => "AG",
            PolicyKind::Sag => "SAG",
            PolicyKind::Ar => "AR",
            PolicyKind::Amd => "AMD",
            PolicyKind::Amp => "AMP",
        }
    }
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "MGMC" => Ok(PolicyKind::MgMc),
            "MGRIS" => Ok(PolicyKind::MgRis),
            "AG" => Ok(PolicyKind::Ag),
            "SAG" => Ok(PolicyKind::Sag),
            "AR" => Ok(PolicyKind::Ar),
            "AMD" => Ok(PolicyKind::Amd),
            "AMP" => Ok(PolicyKind::Amp),
            _ => Err(Error::UnknownPolicy(s.to_string())),
        }
    }
}

/// Tuning knobs shared by every policy. Only the fields a policy consumes
/// matter to it; the rest are ignored.
#[derive(Clone, Debug)]
pub struct PolicyParams {
    pub budget: f64,
    /// Accuracy of the per-step sampled argmax (SAG).
    pub epsilon: f64,
    /// Accuracy of the one-shot RR batch size (MGRIS).
    pub eta: f64,
    /// Confidence parameter for both RR batch sizes.
    pub delta_prime: f64,
    /// Accuracy of the per-step RR batch size (AMP).
    pub epsilon_hat: f64,
    /// Cascade simulations per gain estimate (MGMC, AG).
    pub mc_sims: usize,
    /// Hard ceiling on RR sets per batch; hitting it is reported, not fatal.
    pub rr_cap: u64,
    /// Drop overflowing candidates instead of flipping the admission coin.
    pub deterministic_knapsack: bool,
}

impl PolicyParams {
    pub fn new(budget: f64) -> Self {
        PolicyParams {
            budget,
            epsilon: 0.5,
            eta: 0.1,
            delta_prime: 0.1,
            epsilon_hat: 0.1,
            mc_sims: 500,
            rr_cap: 10_000_000,
            deterministic_knapsack: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.budget > 0.0) {
            return Err(Error::NonpositiveBudget);
        }
        for (name, v) in [("epsilon", self.epsilon), ("eta", self.eta), ("epsilon_hat", self.epsilon_hat)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParam(format!("{name} = {v} outside (0,1)")));
            }
        }
        if !(self.delta_prime > 0.0 && self.delta_prime <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "delta_prime = {} outside (0,1]",
                self.delta_prime
            )));
        }
        if self.mc_sims == 0 {
            return Err(Error::ZeroSimulations);
        }
        if self.rr_cap == 0 {
            return Err(Error::InvalidParam("rr_cap must be positive".into()));
        }
        Ok(())
    }
}

/// What the admission coin decided for a candidate that did not fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoinOutcome {
    IncludedOverflow,
    RejectedOverflow,
}

/// One selection step. A rejected final candidate still gets a trace entry;
/// its cumulative cost repeats the previous total.
#[derive(Clone, Debug, PartialEq)]
pub struct StepTrace {
    pub node: NodeId,
    pub estimate: f64,
    pub cumulative_cost: f64,
    pub coin: Option<CoinOutcome>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyResult {
    pub policy: PolicyKind,
    /// Selected nodes in selection order; distinct.
    pub seeds: Vec<NodeId>,
    pub total_cost: f64,
    pub realized_profit: f64,
    /// Sum of the per-step gain estimates of the admitted nodes. Policies
    /// with no estimator (AR, AMD) report the realized profit here.
    pub estimated_profit: f64,
    pub trace: Vec<StepTrace>,
    pub wallclock_ms: f64,
    /// RR sets drawn or cascades simulated while selecting.
    pub samples_used: u64,
    /// Times a sample-size formula was truncated at `rr_cap`.
    pub cap_hits: u64,
}

/// Budget bookkeeping shared by all policies.
struct Selection {
    budget: f64,
    deterministic: bool,
    coin_rng: ChaCha8Rng,
    seeds: Vec<NodeId>,
    total_cost: f64,
    trace: Vec<StepTrace>,
    estimated: f64,
    terminated: bool,
}

impl Selection {
    fn new(params: &PolicyParams, policy_seed: u64) -> Self {
        Selection {
            budget: params.budget,
            deterministic: params.deterministic_knapsack,
            coin_rng: seeds::rng(policy_seed, &[0xC0]),
            seeds: Vec::new(),
            total_cost: 0.0,
            trace: Vec::new(),
            estimated: 0.0,
            terminated: false,
        }
    }

    /// Admit `node` if it fits; otherwise flip the overflow coin and end the
    /// selection. Returns whether the node was admitted.
    fn try_include(&mut self, net: &SocialNetwork, node: NodeId, estimate: f64) -> bool {
        debug_assert!(!self.terminated);
        debug_assert!(!self.seeds.contains(&node));
        let c = net.cost(node);
        if self.total_cost + c <= self.budget {
            self.seeds.push(node);
            self.total_cost += c;
            self.estimated += estimate;
            self.trace.push(StepTrace { node, estimate, cumulative_cost: self.total_cost, coin: None });
            return true;
        }
        self.terminated = true;
        let admit = if self.deterministic {
            false
        } else {
            let p = (self.budget - self.total_cost) / c;
            debug_assert!((0.0..1.0).contains(&p));
            self.coin_rng.random::<f64>() < p
        };
        if admit {
            self.seeds.push(node);
            self.total_cost += c;
            self.estimated += estimate;
            self.trace.push(StepTrace {
                node,
                estimate,
                cumulative_cost: self.total_cost,
                coin: Some(CoinOutcome::IncludedOverflow),
            });
            true
        } else {
            self.trace.push(StepTrace {
                node,
                estimate,
                cumulative_cost: self.total_cost,
                coin: Some(CoinOutcome::RejectedOverflow),
            });
            false
        }
    }
}

struct Tally {
    samples: u64,
    cap_hits: u64,
}

fn finish(
    kind: PolicyKind,
    sel: Selection,
    realized: f64,
    tally: Tally,
    started: Instant,
    estimated_override: Option<f64>,
) -> PolicyResult {
    PolicyResult {
        policy: kind,
        total_cost: sel.total_cost,
        realized_profit: realized,
        estimated_profit: estimated_override.unwrap_or(sel.estimated),
        seeds: sel.seeds,
        trace: sel.trace,
        wallclock_ms: started.elapsed().as_secs_f64() * 1e3,
        samples_used: tally.samples,
        cap_hits: tally.cap_hits,
    }
}

/// Run one policy against one environment world. `policy_seed` drives every
/// random choice the policy itself makes; `env` answers which edges are live
/// in the world being played out, so passing the same world to different
/// policies compares them on the same realization.
pub fn run_policy(
    kind: PolicyKind,
    net: &SocialNetwork,
    mlg: &MultiLevelGraph,
    params: &PolicyParams,
    policy_seed: u64,
    env: &mut dyn WorldSource,
) -> Result<PolicyResult> {
    params.validate()?;
    match kind {
        PolicyKind::MgMc => modified_greedy(net, mlg, GreedyEstimator::MonteCarlo, params, policy_seed, env),
        PolicyKind::MgRis => modified_greedy(net, mlg, GreedyEstimator::RrSets, params, policy_seed, env),
        PolicyKind::Ag => adaptive_greedy(net, mlg, params, policy_seed, env),
        PolicyKind::Sag => sampled_adaptive_greedy(net, mlg, params, policy_seed, env),
        PolicyKind::Ar => heuristic_random(net, mlg, params, policy_seed, env),
        PolicyKind::Amd => heuristic_max_degree(net, mlg, params, policy_seed, env),
        PolicyKind::Amp => heuristic_max_profit(net, mlg, params, policy_seed, env),
    }
}

/// Gain estimator backing the non-adaptive greedy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GreedyEstimator {
    /// `mc_sims` lazily sampled worlds, shared across candidates and steps.
    MonteCarlo,
    /// One RR batch sized by [`chernoff_lambda`], consumed greedily.
    RrSets,
}

/// Non-adaptive greedy: repeatedly admit the candidate with the best
/// estimated gain per cost until nothing helps or the budget coin ends it.
pub fn modified_greedy(
    net: &SocialNetwork,
    mlg: &MultiLevelGraph,
    estimator: GreedyEstimator,
    params: &PolicyParams,
    policy_seed: u64,
    env: &mut dyn WorldSource,
) -> Result<PolicyResult> {
    params.validate()?;
    let started = Instant::now();
    let kind = match estimator {
        GreedyEstimator::MonteCarlo => PolicyKind::MgMc,
        GreedyEstimator::RrSets => PolicyKind::MgRis,
    };
    let mut sel = Selection::new(params, policy_seed);
    let mut tally = Tally { samples: 0, cap_hits: 0 };
    match estimator {
        GreedyEstimator::MonteCarlo => greedy_mc(net, mlg, params, policy_seed, &mut sel, &mut tally),
        GreedyEstimator::RrSets => greedy_ris(net, mlg, params, policy_seed, &mut sel, &mut tally)?,
    }
    let realized = profit(net, &cascade(mlg, &sel.seeds, env)?);
    Ok(finish(kind, sel, realized, tally, started, None))
}

/// Max-heap entry for lazy greedy: best gain-per-cost first, ties to the
/// smallest node id. `round` records when the score was computed; a score
/// can only shrink as the selection grows (diminishing returns), so a stale
/// entry is an upper bound and only the top needs re-scoring.
struct Scored {
    ratio: f64,
    delta: f64,
    node: NodeId,
    round: u64,
}

impl PartialEq for Scored {
    fn eq(&self, other: &Self) -> bool {
        self.ratio == other.ratio && self.node == other.node
    }
}
impl Eq for Scored {}
impl PartialOrd for Scored {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Scored {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.ratio
            .partial_cmp(&other.ratio)
            .expect("scores are finite")
            .then(other.node.cmp(&self.node))
    }
}

fn greedy_mc(
    net: &SocialNetwork,
    mlg: &MultiLevelGraph,
    params: &PolicyParams,
    policy_seed: u64,
    sel: &mut Selection,
    tally: &mut Tally,
) {
    let sims = params.mc_sims;
    let mut worlds: Vec<KeyedWorld> = (0..sims)
        .map(|k| KeyedWorld::new(seeds::derive(policy_seed, &[0x3C, k as u64])))
        .collect();
    let mut bases: Vec<AcceptedSet> = (0..sims).map(|_| AcceptedSet::empty(mlg)).collect();
    let mut visited = vec![0u32; mlg.num_feature_nodes()];
    let mut stamp = 0u32;
    let mut queue: Vec<usize> = Vec::new();
    let mut score = |u: NodeId,
                     round: u64,
                     bases: &[AcceptedSet],
                     worlds: &mut [KeyedWorld],
                     visited: &mut Vec<u32>,
                     stamp: &mut u32,
                     tally: &mut Tally|
     -> Scored {
        let mut acc = 0.0;
        for k in 0..sims {
            *stamp += 1;
            acc += marginal_mass(net, mlg, u, &bases[k], &mut worlds[k], visited, *stamp, &mut queue);
        }
        tally.samples += sims as u64;
        let delta = acc / sims as f64;
        Scored { ratio: delta / net.cost(u), delta, node: u, round }
    };
    let mut round: u64 = 0;
    let mut heap: std::collections::BinaryHeap<Scored> = (0..net.n())
        .map(|u| score(u, round, &bases, &mut worlds, &mut visited, &mut stamp, tally))
        .collect();
    while !sel.terminated {
        let Some(top) = heap.pop() else { break };
        if top.round < round {
            let fresh = score(top.node, round, &bases, &mut worlds, &mut visited, &mut stamp, tally);
            heap.push(fresh);
            continue;
        }
        if top.delta <= 0.0 {
            break;
        }
        let admitted = sel.try_include(net, top.node, top.delta);
        if admitted && !sel.terminated {
            let mut absorb_queue = Vec::new();
            for k in 0..sims {
                stamp += 1;
                absorb(net, mlg, top.node, &mut bases[k], &mut worlds[k], &mut visited, stamp, &mut absorb_queue);
            }
        }
        round += 1;
    }
}

/// Mass of the feature nodes a cascade from `u`'s unaccepted copies would add
/// on top of `accepted`, in the world `world` describes.
fn marginal_mass(
    net: &SocialNetwork,
    mlg: &MultiLevelGraph,
    u: NodeId,
    accepted: &AcceptedSet,
    world: &mut impl WorldSource,
    visited: &mut [u32],
    stamp: u32,
    queue: &mut Vec<usize>,
) -> f64 {
    queue.clear();
    let mut gain = 0.0;
    for i in 0..mlg.q() {
        let fid = mlg.fid(u, i);
        if !accepted.contains(fid) {
            visited[fid] = stamp;
            gain += net.mass_of(fid);
            queue.push(fid);
        }
    }
    let mut head = 0;
    while head < queue.len() {
        let fid = queue[head];
        head += 1;
        for (mle, h) in mlg.out_of(fid) {
            if visited[h] == stamp || accepted.contains(h) {
                continue;
            }
            if world.edge_state(mle, mlg.edge_prob(mle)) {
                visited[h] = stamp;
                gain += net.mass_of(h);
                queue.push(h);
            }
        }
    }
    gain
}

/// Like [`marginal_mass`] but commits the reached copies into `accepted`.
fn absorb(
    net: &SocialNetwork,
    mlg: &MultiLevelGraph,
    u: NodeId,
    accepted: &mut AcceptedSet,
    world: &mut impl WorldSource,
    visited: &mut [u32],
    stamp: u32,
    queue: &mut Vec<usize>,
) {
    let _ = net;
    queue.clear();
    for i in 0..mlg.q() {
        let fid = mlg.fid(u, i);
        if accepted.insert(fid) {
            visited[fid] = stamp;
            queue.push(fid);
        }
    }
    let mut head = 0;
    while head < queue.len() {
        let fid = queue[head];
        head += 1;
        for (mle, h) in mlg.out_of(fid) {
            if visited[h] == stamp || accepted.contains(h) {
                continue;
            }
            if world.edge_state(mle, mlg.edge_prob(mle)) {
                visited[h] = stamp;
                accepted.insert(h);
                queue.push(h);
            }
        }
    }
}

fn greedy_ris(
    net: &SocialNetwork,
    mlg: &MultiLevelGraph,
    params: &PolicyParams,
    policy_seed: u64,
    sel: &mut Selection,
    tally: &mut Tally,
) -> Result<()> {
    let q_total = net.total_profit();
    let q_star = budget_tail_mass(net, params.budget);
    let lambda = if q_star > 0.0 {
        match chernoff_lambda(q_total, q_star, params.eta, params.delta_prime)? {
            l if l > params.rr_cap => {
                eprintln!(
                    "warning: RR batch size {l} exceeds cap {}, truncating; the accuracy guarantee no longer holds",
                    params.rr_cap
                );
                tally.cap_hits += 1;
                params.rr_cap
            }
            l => l,
        }
    } else {
        // no suffix of the cost order fits the budget, so the batch-size
        // formula has no positive floor; fall back to the cap
        eprintln!(
            "warning: no budget-feasible cost suffix, using the RR cap {} directly",
            params.rr_cap
        );
        tally.cap_hits += 1;
        params.rr_cap
    };
    let coll = RrCollection::generate(
        net,
        mlg,
        None,
        q_total,
        lambda as usize,
        seeds::derive(policy_seed, &[0x215]),
    )?;
    tally.samples += lambda;
    if coll.is_empty() {
        return Ok(());
    }
    let n = net.n();
    let q = net.q();
    let total = coll.len() as f64;
    let mut counts = coll.coverage_counts(n);
    let mut covered = vec![false; coll.len()];
    let mut chosen = vec![false; n];
    let mut scratch: Vec<NodeId> = Vec::new();
    while !sel.terminated {
        let mut best: Option<(f64, NodeId)> = None;
        for u in 0..n {
            if chosen[u] {
                continue;
            }
            let ratio = counts[u] as f64 / net.cost(u);
            if best.as_ref().is_none_or(|&(r, b)| ratio > r || (ratio == r && u < b)) {
                best = Some((ratio, u));
            }
        }
        let Some((_, u)) = best else { break };
        if counts[u] == 0 {
            break;
        }
        let estimate = q_total * counts[u] as f64 / total;
        let admitted = sel.try_include(net, u, estimate);
        chosen[u] = true;
        if admitted && !sel.terminated {
            for i in 0..q {
                for &j in coll.sets_containing(u * q + i) {
                    let j = j as usize;
                    if covered[j] {
                        continue;
                    }
                    covered[j] = true;
                    scratch.clear();
                    scratch.extend(coll.sets()[j].members.iter().map(|&fid| fid / q));
                    scratch.sort_unstable();
                    scratch.dedup();
                    for &v in &scratch {
                        counts[v] -= 1;
                    }
                }
            }
            debug_assert_eq!(counts[u], 0);
        }
    }
    Ok(())
}

/// Adaptive greedy: after each admitted seed, observe its cascade, then
/// re-estimate every candidate's conditional gain on the residual graph with
/// `mc_sims` simulations. Simulation worlds are shared across the candidates
/// of one step, so comparisons within a step are paired.
pub fn adaptive_greedy(
    net: &SocialNetwork,
    mlg: &MultiLevelGraph,
    params: &PolicyParams,
    policy_seed: u64,
    env: &mut dyn WorldSource,
) -> Result<PolicyResult> {
    params.validate()?;
    let started = Instant::now();
    let sims = params.mc_sims;
    let n = net.n();
    let q = net.q();
    let mut sel = Selection::new(params, policy_seed);
    let mut tally = Tally { samples: 0, cap_hits: 0 };
    let mut partial = PartialRealization::new(mlg);
    let mut residual = ResidualGraph::full(net, mlg);
    let mut visited = vec![0u32; mlg.num_feature_nodes()];
    let mut stamp = 0u32;
    let mut queue: Vec<usize> = Vec::new();
    let mut score = |u: NodeId,
                     round: u64,
                     partial: &PartialRealization,
                     visited: &mut Vec<u32>,
                     stamp: &mut u32,
                     tally: &mut Tally|
     -> Scored {
        let alive = (0..q).any(|i| !partial.is_accepted(u * q + i));
        let delta = if alive {
            tally.samples += sims as u64;
            let mut acc = 0.0;
            for k in 0..sims {
                let mut world = KeyedWorld::new(seeds::derive(policy_seed, &[0x6A, round, k as u64]));
                *stamp += 1;
                acc += residual_mass(net, mlg, u, partial, &mut world, visited, *stamp, &mut queue);
            }
            acc / sims as f64
        } else {
            0.0
        };
        Scored { ratio: delta / net.cost(u), delta, node: u, round }
    };
    let mut round: u64 = 0;
    // conditional gains only shrink as observations accumulate, so stale
    // heap entries are upper bounds and lazy re-scoring is sound
    let mut heap: std::collections::BinaryHeap<Scored> = (0..n)
        .map(|u| score(u, round, &partial, &mut visited, &mut stamp, &mut tally))
        .collect();
    while !sel.terminated {
        let Some(top) = heap.pop() else { break };
        if top.round < round {
            let fresh = score(top.node, round, &partial, &mut visited, &mut stamp, &mut tally);
            heap.push(fresh);
            continue;
        }
        if top.delta <= 0.0 {
            break;
        }
        let admitted = sel.try_include(net, top.node, top.delta);
        if admitted {
            observe(&mut partial, &mut residual, net, mlg, top.node, env)?;
        }
        round += 1;
    }
    let realized = partial.realized_profit(net);
    Ok(finish(PolicyKind::Ag, sel, realized, tally, started, None))
}

/// Mass a cascade from `u`'s alive copies adds to the already-accepted set,
/// with unknown edges drawn from `world`. Edges out of alive nodes are always
/// unobserved, so only `world` is consulted.
fn residual_mass(
    net: &SocialNetwork,
    mlg: &MultiLevelGraph,
    u: NodeId,
    partial: &PartialRealization,
    world: &mut impl WorldSource,
    visited: &mut [u32],
    stamp: u32,
    queue: &mut Vec<usize>,
) -> f64 {
    queue.clear();
    let mut gain = 0.0;
    for i in 0..mlg.q() {
        let fid = mlg.fid(u, i);
        if !partial.is_accepted(fid) {
            visited[fid] = stamp;
            gain += net.mass_of(fid);
            queue.push(fid);
        }
    }
    let mut head = 0;
    while head < queue.len() {
        let fid = queue[head];
        head += 1;
        for (mle, h) in mlg.out_of(fid) {
            if visited[h] == stamp || partial.is_accepted(h) {
                continue;
            }
            debug_assert_eq!(partial.state(mle), crate::diffusion::EdgeState::Unknown);
            if world.edge_state(mle, mlg.edge_prob(mle)) {
                visited[h] = stamp;
                gain += net.mass_of(h);
                queue.push(h);
            }
        }
    }
    gain
}

/// Everything the per-step sampled argmax reports back.
#[derive(Clone, Debug)]
pub struct MepicOutcome {
    pub node: NodeId,
    /// Estimated conditional gain W * F(node) from the argmax batch.
    pub marginal: f64,
    /// Estimated gain per cost from the argmax batch.
    pub ratio: f64,
    pub rounds: u32,
    pub sets_used: u64,
    /// The doubling schedule hit the RR cap before the stopping test passed.
    pub capped: bool,
    /// The lower-bound test passed (as opposed to running out of rounds).
    pub converged: bool,
}

/// Derived constants of the sampled argmax: failure budget, adjusted
/// accuracy, round count, concentration constant, initial batch size.
pub(crate) fn mepic_schedule(
    eps: f64,
    w: f64,
    w_star: f64,
    n_phi: usize,
) -> (f64, f64, f64, u32, f64, u64) {
    let delta = 0.01 * eps / w;
    let dw = delta * w;
    let eps_p = (eps - dw) / (1.0 - dw);
    let eps_b = eps_p / (1.0 - eps_p);
    let i_max = ((((2.0 + 2.0 * eps_b / 3.0) * w / (eps_b * eps_b)).log2().ceil() as i64) + 1).max(1) as u32;
    let a = (2.0 * i_max as f64 / delta).ln();
    let theta0 = (((2.0 / delta).ln() + (n_phi as f64).ln()) / w_star).ceil().max(1.0) as u64;
    (delta, eps_p, eps_b, i_max, a, theta0)
}

/// Pick an approximate best-ratio candidate on the residual graph by drawing
/// two independent RR batches and doubling them until an empirical lower
/// bound certifies the current argmax, the round limit is reached, or the
/// next doubling would pass `rr_cap`. `w` and `w_star` are the residual mass
/// and its smallest positive per-copy term; `n_phi` weights the failure
/// budget by how many candidates remain.
pub fn mepic(
    net: &SocialNetwork,
    mlg: &MultiLevelGraph,
    partial: Option<&PartialRealization>,
    candidates: &[NodeId],
    w: f64,
    w_star: f64,
    n_phi: usize,
    eps: f64,
    rr_cap: u64,
    seed: u64,
) -> Result<MepicOutcome> {
    if candidates.is_empty() {
        return Err(Error::InvalidParam("sampled argmax needs at least one candidate".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParam(format!("epsilon = {eps} outside (0,1)")));
    }
    if !(w > 0.0) {
        return Err(Error::InvalidParam(format!("residual mass {w} must be positive")));
    }
    if !(w_star > 0.0) {
        return Err(Error::NonpositiveTailMass);
    }
    if n_phi == 0 {
        return Err(Error::InvalidParam("candidate count for the failure budget must be positive".into()));
    }
    let (_, eps_p, _, i_max, a, theta0) = mepic_schedule(eps, w, w_star, n_phi);
    let cap = rr_cap.max(1);
    let capped = theta0 > cap;
    let mut size = theta0.min(cap);
    let mut r1 = RrCollection::generate(net, mlg, partial, w, size as usize, seeds::derive(seed, &[1]))?;
    let mut r2 = RrCollection::generate(net, mlg, partial, w, size as usize, seeds::derive(seed, &[2]))?;
    for i in 1..=i_max {
        let counts = r1.coverage_counts(net.n());
        let mut best: Option<(f64, NodeId)> = None;
        for &u in candidates {
            let ratio = counts[u] as f64 / net.cost(u);
            if best.as_ref().is_none_or(|&(r, b)| ratio > r || (ratio == r && u < b)) {
                best = Some((ratio, u));
            }
        }
        let (count_ratio, node) = best.expect("candidates is nonempty");
        let f1 = counts[node] as f64 / r1.len() as f64;
        let q_upper = count_ratio / r1.len() as f64;
        let sets_used = (r1.len() + r2.len()) as u64;
        if q_upper <= 0.0 {
            return Ok(MepicOutcome {
                node,
                marginal: 0.0,
                ratio: 0.0,
                rounds: i,
                sets_used,
                capped,
                converged: false,
            });
        }
        let outcome = MepicOutcome {
            node,
            marginal: w * f1,
            ratio: w * q_upper,
            rounds: i,
            sets_used,
            capped,
            converged: false,
        };
        let m = r2.len() as f64;
        let q2 = r2.covered_sets(node) as f64 / m / net.cost(node);
        let q_lower = ((q2 + 2.0 * a / (9.0 * m)).sqrt() - (a / (2.0 * m)).sqrt()).powi(2)
            - a / (18.0 * m);
        if q_lower / q_upper >= 1.0 - eps_p {
            return Ok(MepicOutcome { converged: true, ..outcome });
        }
        if i == i_max {
            return Ok(outcome);
        }
        let next = size.saturating_mul(2);
        if next > cap {
            eprintln!(
                "warning: sampled argmax hit the RR cap {cap} before its stopping test passed"
            );
            return Ok(MepicOutcome { capped: true, ..outcome });
        }
        size = next;
        r1.extend_to(net, mlg, partial, size as usize, seeds::derive(seed, &[1]))?;
        r2.extend_to(net, mlg, partial, size as usize, seeds::derive(seed, &[2]))?;
    }
    unreachable!("the round loop returns at i_max");
}

/// Sampled adaptive greedy: one sampled argmax per step on the residual
/// graph, observing each admitted seed's cascade before the next step.
pub fn sampled_adaptive_greedy(
    net: &SocialNetwork,
    mlg: &MultiLevelGraph,
    params: &PolicyParams,
    policy_seed: u64,
    env: &mut dyn WorldSource,
) -> Result<PolicyResult> {
    params.validate()?;
    let started = Instant::now();
    let n = net.n();
    let mut sel = Selection::new(params, policy_seed);
    let mut tally = Tally { samples: 0, cap_hits: 0 };
    let mut partial = PartialRealization::new(mlg);
    let mut residual = ResidualGraph::full(net, mlg);
    let mut chosen = vec![false; n];
    let mut step: u64 = 0;
    while !sel.terminated {
        let t: Vec<NodeId> = (0..n).filter(|&u| !chosen[u]).collect();
        if t.is_empty() || residual.alive == 0 || residual.mass <= 0.0 || residual.min_mass <= 0.0 {
            break;
        }
        let out = mepic(
            net,
            mlg,
            Some(&partial),
            &t,
            residual.mass,
            residual.min_mass,
            t.len(),
            params.epsilon,
            params.rr_cap,
            seeds::derive(policy_seed, &[0x5A6, step]),
        )?;
        tally.samples += out.sets_used;
        tally.cap_hits += out.capped as u64;
        if out.marginal <= 0.0 {
            break;
        }
        let admitted = sel.try_include(net, out.node, out.marginal);
        chosen[out.node] = true;
        if admitted {
            observe(&mut partial, &mut residual, net, mlg, out.node, env)?;
            residual.recompute_min_mass(net, mlg, &partial);
        }
        step += 1;
    }
    let realized = partial.realized_profit(net);
    Ok(finish(PolicyKind::Sag, sel, realized, tally, started, None))
}

/// Admit nodes in uniformly random order until the budget coin ends it.
pub fn heuristic_random(
    net: &SocialNetwork,
    mlg: &MultiLevelGraph,
    params: &PolicyParams,
    policy_seed: u64,
    env: &mut dyn WorldSource,
) -> Result<PolicyResult> {
    params.validate()?;
    let started = Instant::now();
    let mut sel = Selection::new(params, policy_seed);
    let mut rng = seeds::rng(policy_seed, &[0xA4]);
    let mut pool: Vec<NodeId> = (0..net.n()).collect();
    while !sel.terminated && !pool.is_empty() {
        let u = pool.swap_remove(rng.random_range(0..pool.len()));
        sel.try_include(net, u, 0.0);
    }
    let realized = profit(net, &cascade(mlg, &sel.seeds, env)?);
    Ok(finish(PolicyKind::Ar, sel, realized, Tally { samples: 0, cap_hits: 0 }, started, Some(realized)))
}

/// Admit nodes in static out-degree order (ties by id) until the budget coin
/// ends it.
pub fn heuristic_max_degree(
    net: &SocialNetwork,
    mlg: &MultiLevelGraph,
    params: &PolicyParams,
    policy_seed: u64,
    env: &mut dyn WorldSource,
) -> Result<PolicyResult> {
    params.validate()?;
    let started = Instant::now();
    let mut sel = Selection::new(params, policy_seed);
    let mut order: Vec<NodeId> = (0..net.n()).collect();
    order.sort_by_key(|&u| (std::cmp::Reverse(net.out_degree(u)), u));
    for u in order {
        if sel.terminated {
            break;
        }
        sel.try_include(net, u, 0.0);
    }
    let realized = profit(net, &cascade(mlg, &sel.seeds, env)?);
    Ok(finish(PolicyKind::Amd, sel, realized, Tally { samples: 0, cap_hits: 0 }, started, Some(realized)))
}

/// Adaptive max-profit: each step draws a fresh RR batch on the residual
/// graph sized by [`chernoff_alpha`] and admits the largest estimated gain,
/// not divided by cost.
pub fn heuristic_max_profit(
    net: &SocialNetwork,
    mlg: &MultiLevelGraph,
    params: &PolicyParams,
    policy_seed: u64,
    env: &mut dyn WorldSource,
) -> Result<PolicyResult> {
    params.validate()?;
    let started = Instant::now();
    let n = net.n();
    let mut sel = Selection::new(params, policy_seed);
    let mut tally = Tally { samples: 0, cap_hits: 0 };
    let mut partial = PartialRealization::new(mlg);
    let mut residual = ResidualGraph::full(net, mlg);
    let mut chosen = vec![false; n];
    let mut step: u64 = 0;
    while !sel.terminated && chosen.iter().any(|&c| !c) {
        if residual.alive == 0 || residual.mass <= 0.0 || residual.min_mass <= 0.0 {
            break;
        }
        let alpha = chernoff_alpha(residual.mass, residual.min_mass, params.epsilon_hat, params.delta_prime)?;
        let alpha = if alpha > params.rr_cap {
            eprintln!(
                "warning: RR batch size {alpha} exceeds cap {}, truncating; the accuracy guarantee no longer holds",
                params.rr_cap
            );
            tally.cap_hits += 1;
            params.rr_cap
        } else {
            alpha
        };
        if alpha == 0 {
            break;
        }
        let coll = RrCollection::generate(
            net,
            mlg,
            Some(&partial),
            residual.mass,
            alpha as usize,
            seeds::derive(policy_seed, &[0xA3, step]),
        )?;
        tally.samples += alpha;
        let counts = coll.coverage_counts(n);
        let mut best: Option<(u32, NodeId)> = None;
        for u in 0..n {
            if chosen[u] {
                continue;
            }
            if best.as_ref().is_none_or(|&(c, b)| counts[u] > c || (counts[u] == c && u < b)) {
                best = Some((counts[u], u));
            }
        }
        let Some((count, u)) = best else { break };
        if count == 0 {
            break;
        }
        let estimate = residual.mass * count as f64 / coll.len() as f64;
        let admitted = sel.try_include(net, u, estimate);
        chosen[u] = true;
        if admitted {
            observe(&mut partial, &mut residual, net, mlg, u, env)?;
            residual.recompute_min_mass(net, mlg, &partial);
        }
        step += 1;
    }
    let realized = partial.realized_profit(net);
    Ok(finish(PolicyKind::Amp, sel, realized, tally, started, None))
}
