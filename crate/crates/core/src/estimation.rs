//! Reverse-reachable set machinery and sample-size bounds.
//!
//! An RR set is drawn in two moves: pick a target feature node with
//! probability proportional to its profit-weight mass b(v)*w_v^i over the
//! residual graph, then walk in-edges backwards, flipping each touched edge
//! live with its own probability, and keep every feature node that reaches
//! the target. The fraction of sets an unselected user's copies hit, scaled
//! by the residual mass W, is an unbiased estimate of that user's conditional
//! expected marginal profit; dividing by cost estimates the greedy ratio.
//!
//! Nothing is cached across RR sets: each set must be an independent draw for
//! the concentration bounds to apply.

use rand::Rng;

use crate::diffusion::{EdgeState, PartialRealization};
use crate::error::{Error, Result};
use crate::net::{MultiLevelGraph, NodeId, SocialNetwork};
use crate::seeds;

/// Vose alias table: O(n) build, O(1) categorical sampling.
#[derive(Clone, Debug)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<usize>,
}

impl AliasTable {
    pub fn new(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParam("alias table needs at least one weight".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParam("alias weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidParam("alias weights must not all be zero".into()));
        }
        let n = weights.len();
        let mut prob = vec![0.0; n];
        let mut alias = vec![0usize; n];
        let scaled: Vec<f64> = weights.iter().map(|w| w * n as f64 / total).collect();
        let mut small: Vec<usize> = Vec::with_capacity(n);
        let mut large: Vec<usize> = Vec::with_capacity(n);
        for (i, &s) in scaled.iter().enumerate() {
            if s < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        let mut scaled = scaled;
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            prob[s] = scaled[s];
            alias[s] = l;
            scaled[l] -= 1.0 - scaled[s];
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // leftovers are 1.0 up to rounding
        for &i in small.iter().chain(large.iter()) {
            prob[i] = 1.0;
            alias[i] = i;
        }
        Ok(AliasTable { prob, alias })
    }

    pub fn sample(&self, rng: &mut impl Rng) -> usize {
        let i = rng.random_range(0..self.prob.len());
        if rng.random::<f64>() < self.prob[i] {
            i
        } else {
            self.alias[i]
        }
    }
}

/// Target distribution over the residual graph: alive feature nodes weighted
/// by b(v)*w_v^i. Zero-mass nodes are never targets (their weight is zero in
/// the distribution) but still appear as RR-set members.
pub struct TargetSampler {
    fids: Vec<usize>,
    alias: AliasTable,
}

impl TargetSampler {
    /// Build for the residual graph of `partial`; pass `None` for the whole
    /// multi-level graph.
    pub fn for_residual(
        net: &SocialNetwork,
        mlg: &MultiLevelGraph,
        partial: Option<&PartialRealization>,
    ) -> Result<Self> {
        let mut fids = Vec::new();
        let mut weights = Vec::new();
        for fid in 0..mlg.num_feature_nodes() {
            if partial.is_some_and(|p| p.is_accepted(fid)) {
                continue;
            }
            let w = net.mass_of(fid);
            if w > 0.0 {
                fids.push(fid);
                weights.push(w);
            }
        }
        if fids.is_empty() {
            return Err(Error::EmptyResidual);
        }
        Ok(TargetSampler { fids, alias: AliasTable::new(&weights)? })
    }

    pub fn draw(&self, rng: &mut impl Rng) -> usize {
        self.fids[self.alias.sample(rng)]
    }
}

/// One reverse-reachable set: the target plus every feature node that reaches
/// it through the sampled live edges of the residual graph. Members are in
/// discovery order, target first, no duplicates, all on the target's level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RrSet {
    pub target: usize,
    pub members: Vec<usize>,
}

/// Draw one RR set. Edges whose tail is already accepted are observed and
/// never traversed; unknown edges are flipped independently on first touch.
pub fn sample_rr_set(
    mlg: &MultiLevelGraph,
    partial: Option<&PartialRealization>,
    sampler: &TargetSampler,
    rng: &mut impl Rng,
) -> RrSet {
    let mut visited = vec![0u32; mlg.num_feature_nodes()];
    reverse_reach(mlg, partial, sampler.draw(rng), rng, &mut visited, 1)
}

fn reverse_reach(
    mlg: &MultiLevelGraph,
    partial: Option<&PartialRealization>,
    target: usize,
    rng: &mut impl Rng,
    visited: &mut [u32],
    stamp: u32,
) -> RrSet {
    let mut members = vec![target];
    visited[target] = stamp;
    let mut head = 0;
    while head < members.len() {
        let fid = members[head];
        head += 1;
        for (mle, tail) in mlg.in_of(fid) {
            if visited[tail] == stamp {
                continue;
            }
            // an edge out of an accepted tail is already observed and is not
            // part of the residual graph
            if partial.is_some_and(|p| p.state(mle) != EdgeState::Unknown) {
                continue;
            }
            if rng.random::<f64>() < mlg.edge_prob(mle) {
                visited[tail] = stamp;
                members.push(tail);
            }
        }
    }
    RrSet { target, members }
}

/// A batch of independent RR sets over one residual graph, with an inverted
/// index from feature node to the sets containing it and the residual mass W
/// the batch was drawn against.
pub struct RrCollection {
    sets: Vec<RrSet>,
    index: Vec<Vec<u32>>,
    mass: f64,
    q: usize,
}

impl RrCollection {
    /// Draw `count` sets. Set j is generated from a stream derived from
    /// (`seed`, j), so extending a collection reproduces exactly the sets a
    /// larger initial count would have produced.
    pub fn generate(
        net: &SocialNetwork,
        mlg: &MultiLevelGraph,
        partial: Option<&PartialRealization>,
        mass: f64,
        count: usize,
        seed: u64,
    ) -> Result<Self> {
        let mut coll = RrCollection {
            sets: Vec::new(),
            index: vec![Vec::new(); mlg.num_feature_nodes()],
            mass,
            q: mlg.q(),
        };
        coll.extend_to(net, mlg, partial, count, seed)?;
        Ok(coll)
    }

    /// Grow to `new_count` sets (no-op if already that large), continuing the
    /// per-set seed derivation.
    pub fn extend_to(
        &mut self,
        net: &SocialNetwork,
        mlg: &MultiLevelGraph,
        partial: Option<&PartialRealization>,
        new_count: usize,
        seed: u64,
    ) -> Result<()> {
        if new_count <= self.sets.len() {
            return Ok(());
        }
        let sampler = TargetSampler::for_residual(net, mlg, partial)?;
        let mut visited = vec![0u32; mlg.num_feature_nodes()];
        let mut stamp = 0u32;
        for j in self.sets.len()..new_count {
            let mut rng = seeds::rng(seed, &[j as u64]);
            stamp += 1;
            let set = reverse_reach(mlg, partial, sampler.draw(&mut rng), &mut rng, &mut visited, stamp);
            for &fid in &set.members {
                self.index[fid].push(j as u32);
            }
            self.sets.push(set);
        }
        Ok(())
    }

    /// Assemble from explicit sets (tests, tools).
    pub fn from_sets(sets: Vec<RrSet>, mass: f64, mlg: &MultiLevelGraph) -> Self {
        let mut index = vec![Vec::new(); mlg.num_feature_nodes()];
        for (j, set) in sets.iter().enumerate() {
            for &fid in &set.members {
                index[fid].push(j as u32);
            }
        }
        RrCollection { sets, index, mass, q: mlg.q() }
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Residual mass W the sets were drawn against.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn sets(&self) -> &[RrSet] {
        &self.sets
    }

    /// Indices (ascending) of the sets containing `fid`.
    pub fn sets_containing(&self, fid: usize) -> &[u32] {
        &self.index[fid]
    }

    /// F(u): fraction of sets containing at least one feature copy of `u`,
    /// each set counted once. Computed from the inverted index.
    pub fn coverage(&self, u: NodeId) -> f64 {
        if self.sets.is_empty() {
            return 0.0;
        }
        self.covered_sets(u) as f64 / self.sets.len() as f64
    }

    /// Distinct sets hit by the feature copies of `u`.
    pub fn covered_sets(&self, u: NodeId) -> usize {
        let mut hits: Vec<u32> = Vec::new();
        for i in 0..self.q {
            hits.extend_from_slice(&self.index[u * self.q + i]);
        }
        hits.sort_unstable();
        hits.dedup();
        hits.len()
    }

    /// Coverage of an arbitrary feature-node set (monotone in the set).
    pub fn coverage_of_fids(&self, fids: &[usize]) -> f64 {
        if self.sets.is_empty() {
            return 0.0;
        }
        let mut hits: Vec<u32> = Vec::new();
        for &fid in fids {
            hits.extend_from_slice(&self.index[fid]);
        }
        hits.sort_unstable();
        hits.dedup();
        hits.len() as f64 / self.sets.len() as f64
    }

    /// rho(u | phi) = W * F(u), the unbiased marginal-profit estimate.
    pub fn rho(&self, u: NodeId) -> f64 {
        self.mass * self.coverage(u)
    }

    /// Q(u) = F(u) / c(u); W * Q(u) estimates the greedy ratio.
    pub fn ratio(&self, net: &SocialNetwork, u: NodeId) -> f64 {
        self.coverage(u) / net.cost(u)
    }

    /// Per-user covered-set counts in one pass over all sets. Equivalent to
    /// calling `covered_sets` for every user, but linear in total set size.
    pub fn coverage_counts(&self, n: usize) -> Vec<u32> {
        let mut counts = vec![0u32; n];
        let mut mark = vec![u32::MAX; n];
        for (j, set) in self.sets.iter().enumerate() {
            for &fid in &set.members {
                let u = fid / self.q;
                if mark[u] != j as u32 {
                    mark[u] = j as u32;
                    counts[u] += 1;
                }
            }
        }
        counts
    }
}

/// Sample count for the non-adaptive RR greedy: ceil((2+eta)*Q /
/// (eta^2 * Q*) * ln(1/delta')). `q_star` is the profit mass of the
/// cheapest-suffix bound from [`budget_tail_mass`].
pub fn chernoff_lambda(q_total: f64, q_star: f64, eta: f64, delta_prime: f64) -> Result<u64> {
    chernoff_count(q_total, q_star, eta, delta_prime)
}

/// Sample count per adaptive step: same formula over the residual masses W
/// and W*.
pub fn chernoff_alpha(w: f64, w_star: f64, eps_hat: f64, delta_prime: f64) -> Result<u64> {
    chernoff_count(w, w_star, eps_hat, delta_prime)
}

fn chernoff_count(total: f64, floor: f64, eps: f64, delta_prime: f64) -> Result<u64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParam(format!("accuracy parameter {eps} outside (0,1)")));
    }
    if !(delta_prime > 0.0 && delta_prime <= 1.0) {
        return Err(Error::InvalidParam(format!("confidence parameter {delta_prime} outside (0,1]")));
    }
    if !(floor > 0.0) {
        return Err(Error::NonpositiveTailMass);
    }
    if !(total >= 0.0 && total.is_finite()) {
        return Err(Error::InvalidParam(format!("mass {total} must be finite and nonnegative")));
    }
    let v = ((2.0 + eps) * total / (eps * eps * floor) * (1.0 / delta_prime).ln()).ceil();
    Ok(if v >= u64::MAX as f64 { u64::MAX } else { v.max(0.0) as u64 })
}

/// Q*: profit mass of the longest ascending-cost suffix whose total cost fits
/// the budget (ties in cost broken by node id). Returns 0 when no node fits.
pub fn budget_tail_mass(net: &SocialNetwork, b: f64) -> f64 {
    let n = net.n();
    let mut order: Vec<NodeId> = (0..n).collect();
    order.sort_by(|&x, &y| net.cost(x).partial_cmp(&net.cost(y)).unwrap().then(x.cmp(&y)));
    // walk suffixes from the longest; the first that fits is p*
    let mut suffix_cost: f64 = order.iter().map(|&u| net.cost(u)).sum();
    for p in 0..n {
        if suffix_cost <= b {
            return order[p..].iter().map(|&u| net.profit(u)).sum();
        }
        suffix_cost -= net.cost(order[p]);
    }
    0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{observe, FixedWorld, FullRealization, ResidualGraph};
    use crate::net::{build_multi_level, unit_network};
    use crate::oracle::{exact_marginal_gain, EnumerationBudget};

    fn one_edge() -> (SocialNetwork, MultiLevelGraph) {
        let net = unit_network(1, 2, &[(0, 1)], &[vec![0.5]], &[vec![1.0], vec![1.0]]).unwrap();
        let mlg = build_multi_level(&net);
        (net, mlg)
    }

    #[test]
    fn alias_table_matches_weights() {
        let table = AliasTable::new(&[1.0, 3.0]).unwrap();
        let mut rng = seeds::rng(1, &[]);
        let mut second = 0usize;
        let n = 100_000;
        for _ in 0..n {
            if table.sample(&mut rng) == 1 {
                second += 1;
            }
        }
        let frac = second as f64 / n as f64;
        assert!((frac - 0.75).abs() < 0.01, "frequency {frac}");
    }

    #[test]
    fn alias_table_rejects_degenerate_input() {
        assert!(AliasTable::new(&[]).is_err());
        assert!(AliasTable::new(&[0.0, 0.0]).is_err());
        assert!(AliasTable::new(&[1.0, -1.0]).is_err());
    }

    #[test]
    fn isolated_target_is_a_singleton() {
        let net = unit_network(1, 2, &[(0, 1)], &[vec![1.0]], &[vec![1.0], vec![1.0]]).unwrap();
        let mlg = build_multi_level(&net);
        // node a has no in-edges; force it as target
        let mut visited = vec![0u32; 2];
        let mut rng = seeds::rng(2, &[]);
        let set = reverse_reach(&mlg, None, 0, &mut rng, &mut visited, 1);
        assert_eq!(set.members, vec![0]);
    }

    #[test]
    fn one_edge_membership_distribution() {
        let (net, mlg) = one_edge();
        let sampler = TargetSampler::for_residual(&net, &mlg, None).unwrap();
        let mut rng = seeds::rng(3, &[]);
        let (mut b_targets, mut b_with_a) = (0usize, 0usize);
        for _ in 0..100_000 {
            let set = sample_rr_set(&mlg, None, &sampler, &mut rng);
            if set.target == 1 {
                b_targets += 1;
                if set.members.contains(&0) {
                    b_with_a += 1;
                }
            } else {
                assert_eq!(set.members, vec![0]);
            }
        }
        // target is b half the time; conditioned on that, a joins half the time
        let t = b_targets as f64 / 100_000.0;
        let m = b_with_a as f64 / b_targets as f64;
        assert!((t - 0.5).abs() < 0.01, "target fraction {t}");
        assert!((m - 0.5).abs() < 0.01, "membership fraction {m}");
    }

    #[test]
    fn target_frequency_follows_mass() {
        // b(a)w_a = 1, b(b)w_b = 3
        let net = SocialNetwork::from_parts(
            1,
            None,
            &[(0, 1)],
            vec![0.5],
            vec![1.0, 1.0],
            vec![1.0, 3.0],
            vec![1.0, 1.0],
        )
        .unwrap();
        let mlg = build_multi_level(&net);
        let sampler = TargetSampler::for_residual(&net, &mlg, None).unwrap();
        let mut rng = seeds::rng(4, &[]);
        let hits = (0..100_000).filter(|_| sampler.draw(&mut rng) == 1).count();
        let frac = hits as f64 / 100_000.0;
        assert!((frac - 0.75).abs() < 0.01, "target frequency {frac}");
    }

    #[test]
    fn coverage_counts_each_set_once() {
        let (_, mlg) = one_edge();
        let sets = vec![
            RrSet { target: 1, members: vec![1, 0] },
            RrSet { target: 0, members: vec![0] },
            RrSet { target: 1, members: vec![1] },
            RrSet { target: 1, members: vec![1, 0] },
        ];
        let coll = RrCollection::from_sets(sets, 2.0, &mlg);
        assert_eq!(coll.coverage(0), 0.75);
        assert_eq!(coll.coverage(1), 0.75);
        assert_eq!(coll.covered_sets(0), 3);
    }

    #[test]
    fn coverage_dedups_across_features_of_one_user() {
        // q=2, one user, both copies in the same single set
        let net = unit_network(2, 2, &[(0, 1)], &[vec![0.5, 0.5]], &vec![vec![0.5, 0.5]; 2])
            .unwrap();
        let mlg = build_multi_level(&net);
        let sets = vec![RrSet { target: 0, members: vec![0, 1] }];
        let coll = RrCollection::from_sets(sets, 1.0, &mlg);
        assert_eq!(coll.coverage(0), 1.0, "both copies of user 0 in one set count once");
        let counts = coll.coverage_counts(2);
        assert_eq!(counts, vec![1, 0]);
    }

    #[test]
    fn rho_and_ratio_arithmetic() {
        let (net, mlg) = one_edge();
        let sets = vec![
            RrSet { target: 0, members: vec![0] },
            RrSet { target: 0, members: vec![0] },
            RrSet { target: 0, members: vec![0] },
            RrSet { target: 1, members: vec![1] },
        ];
        let coll = RrCollection::from_sets(sets, 2.0, &mlg);
        assert!((coll.rho(0) - 1.5).abs() < 1e-12, "W=2 times coverage 0.75");
        assert_eq!(coll.rho(1), 0.5);
        // unit costs make ratio equal coverage
        assert_eq!(coll.ratio(&net, 0), coll.coverage(0));
    }

    #[test]
    fn rho_is_unbiased_on_the_one_edge_net() {
        let (net, mlg) = one_edge();
        let coll = RrCollection::generate(&net, &mlg, None, 2.0, 100_000, 7).unwrap();
        // E[rho(a)] = Delta(a | empty) = P({a}) = 1.5
        let empty = crate::diffusion::PartialRealization::new(&mlg);
        let exact =
            exact_marginal_gain(&net, &mlg, &empty, 0, &EnumerationBudget::default()).unwrap();
        let est = coll.rho(0);
        // per-sample variance of W*h is bounded by W^2/4; 3 sigma with margin
        let se = 2.0 * 0.5 / (100_000f64).sqrt();
        assert!((est - exact).abs() <= 3.0 * se + 1e-9, "est {est} exact {exact}");
    }

    #[test]
    fn extend_reproduces_prefix() {
        let (net, mlg) = one_edge();
        let full = RrCollection::generate(&net, &mlg, None, 2.0, 64, 9).unwrap();
        let mut grown = RrCollection::generate(&net, &mlg, None, 2.0, 16, 9).unwrap();
        grown.extend_to(&net, &mlg, None, 64, 9).unwrap();
        assert_eq!(full.sets(), grown.sets());
    }

    #[test]
    fn residual_rr_sets_respect_observed_edges() {
        // a -> b with the edge observed blocked: b's RR set can never pull in a
        let (net, mlg) = one_edge();
        let real = FullRealization { live: vec![false] };
        let mut partial = crate::diffusion::PartialRealization::new(&mlg);
        let mut residual = ResidualGraph::full(&net, &mlg);
        observe(&mut partial, &mut residual, &net, &mlg, 0, &mut FixedWorld { real: &real })
            .unwrap();
        let sampler = TargetSampler::for_residual(&net, &mlg, Some(&partial)).unwrap();
        let mut rng = seeds::rng(10, &[]);
        for _ in 0..200 {
            let set = sample_rr_set(&mlg, Some(&partial), &sampler, &mut rng);
            assert_eq!(set.members, vec![1], "only b_0 is alive");
        }
    }

    #[test]
    fn empty_residual_is_an_error() {
        let (net, mlg) = one_edge();
        let real = FullRealization { live: vec![true] };
        let mut partial = crate::diffusion::PartialRealization::new(&mlg);
        let mut residual = ResidualGraph::full(&net, &mlg);
        observe(&mut partial, &mut residual, &net, &mlg, 0, &mut FixedWorld { real: &real })
            .unwrap();
        assert!(matches!(
            TargetSampler::for_residual(&net, &mlg, Some(&partial)),
            Err(Error::EmptyResidual)
        ));
    }

    #[test]
    fn chernoff_lambda_values() {
        // eta = delta' = 0.1, Q=10, Q*=2: (2.1*10)/(0.01*2) * ln 10 = 1050 * ln 10
        assert_eq!(chernoff_lambda(10.0, 2.0, 0.1, 0.1).unwrap(), 2418);
        // Q* = Q: (2.1/0.01) * ln 10
        assert_eq!(chernoff_lambda(10.0, 10.0, 0.1, 0.1).unwrap(), 484);
        // delta' = 1 needs no samples at all
        assert_eq!(chernoff_lambda(10.0, 2.0, 0.1, 1.0).unwrap(), 0);
        assert!(matches!(
            chernoff_lambda(10.0, 0.0, 0.1, 0.1),
            Err(Error::NonpositiveTailMass)
        ));
        assert!(chernoff_lambda(10.0, 2.0, 1.5, 0.1).is_err());
    }

    #[test]
    fn chernoff_alpha_mirrors_lambda() {
        assert_eq!(
            chernoff_alpha(10.0, 2.0, 0.1, 0.1).unwrap(),
            chernoff_lambda(10.0, 2.0, 0.1, 0.1).unwrap()
        );
    }

    #[test]
    fn budget_tail_mass_cases() {
        let net = SocialNetwork::from_parts(
            1,
            None,
            &[(0, 1)],
            vec![0.5],
            vec![1.0, 2.0, 3.0],
            vec![5.0, 6.0, 7.0],
            vec![1.0, 1.0, 1.0],
        )
        .unwrap();
        // suffixes by ascending cost: {1,2,3} costs 6 > 5, {2,3} costs 5 <= 5
        assert_eq!(budget_tail_mass(&net, 5.0), 13.0);
        // everything fits: Q* = total profit
        assert_eq!(budget_tail_mass(&net, 6.0), 18.0);
        // nothing fits
        assert_eq!(budget_tail_mass(&net, 0.5), 0.0);
    }
}
