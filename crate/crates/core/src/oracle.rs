//! Exact brute-force computations on tiny instances: expected profit of a
//! seed set, conditional expected marginal profit, and the budgeted optimum,
//! each by enumerating edge-state bitmasks of the multi-level graph. No
//! memoization, no shortcuts: this is the ground truth the estimators and
//! policy guarantees are tested against, so it stays as plain as possible.

use crate::diffusion::{diffuse, profit, EdgeState, FullRealization, PartialRealization};
use crate::error::{Error, Result};
use crate::net::{MultiLevelGraph, NodeId, SocialNetwork};

/// Hard limit on enumeration size: 2^max_edges realizations.
#[derive(Clone, Copy, Debug)]
pub struct EnumerationBudget {
    pub max_edges: usize,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget { max_edges: 20 }
    }
}

const MAX_ENUMERABLE_EDGES: usize = 25;
const MAX_OPTIMUM_NODES: usize = 12;

impl EnumerationBudget {
    fn check(&self, edges: usize) -> Result<()> {
        let max = self.max_edges.min(MAX_ENUMERABLE_EDGES);
        if edges > max {
            return Err(Error::EnumerationTooLarge { edges, max });
        }
        Ok(())
    }
}

/// Exact expected profit of seeding `seed_nodes`: sum over all 2^(mq)
/// realizations of mass times profit.
pub fn exact_profit(
    net: &SocialNetwork,
    mlg: &MultiLevelGraph,
    seed_nodes: &[NodeId],
    budget: &EnumerationBudget,
) -> Result<f64> {
    let edges = mlg.num_edges();
    budget.check(edges)?;
    let mut total = 0.0;
    let mut real = FullRealization { live: vec![false; edges] };
    for mask in 0u64..(1u64 << edges) {
        let mut pr = 1.0;
        for mle in 0..edges {
            let live = (mask >> mle) & 1 == 1;
            real.live[mle] = live;
            let p = mlg.edge_prob(mle);
            pr *= if live { p } else { 1.0 - p };
        }
        if pr == 0.0 {
            continue;
        }
        total += pr * profit(net, &diffuse(mlg, &real, seed_nodes)?);
    }
    Ok(total)
}

/// Exact conditional expected marginal profit of adding `u` given a partial
/// realization: the expectation of f(dom + u) - f(dom) over all completions
/// of the unknown edges, weighted by their conditional mass.
pub fn exact_marginal_gain(
    net: &SocialNetwork,
    mlg: &MultiLevelGraph,
    partial: &PartialRealization,
    u: NodeId,
    budget: &EnumerationBudget,
) -> Result<f64> {
    if u >= mlg.base_nodes() {
        return Err(Error::UnknownNode(u));
    }
    if partial.is_seed(u) {
        return Err(Error::DuplicateSeed(u));
    }
    let unknown: Vec<usize> =
        (0..mlg.num_edges()).filter(|&mle| partial.state(mle) == EdgeState::Unknown).collect();
    budget.check(unknown.len())?;

    let mut with_u: Vec<NodeId> = partial.dom().to_vec();
    with_u.push(u);
    let mut real = FullRealization { live: vec![false; mlg.num_edges()] };
    for mle in 0..mlg.num_edges() {
        real.live[mle] = partial.state(mle) == EdgeState::Live;
    }
    let mut total = 0.0;
    for mask in 0u64..(1u64 << unknown.len()) {
        let mut pr = 1.0;
        for (k, &mle) in unknown.iter().enumerate() {
            let live = (mask >> k) & 1 == 1;
            real.live[mle] = live;
            let p = mlg.edge_prob(mle);
            pr *= if live { p } else { 1.0 - p };
        }
        if pr == 0.0 {
            continue;
        }
        let f_with = profit(net, &diffuse(mlg, &real, &with_u)?);
        let f_without = profit(net, &diffuse(mlg, &real, partial.dom())?);
        total += pr * (f_with - f_without);
    }
    Ok(total)
}

/// Best seed set under the deterministic knapsack c(S) <= B, by exhaustive
/// subset enumeration. This lower-bounds the expected-knapsack optimum the
/// policy guarantees refer to.
pub fn exact_optimum(
    net: &SocialNetwork,
    mlg: &MultiLevelGraph,
    b: f64,
    budget: &EnumerationBudget,
) -> Result<(Vec<NodeId>, f64)> {
    if !(b >= 0.0) {
        return Err(Error::InvalidParam(format!("budget {b} must be nonnegative")));
    }
    let n = net.n();
    if n > MAX_OPTIMUM_NODES {
        return Err(Error::TooManyNodes { nodes: n, max: MAX_OPTIMUM_NODES });
    }
    budget.check(mlg.num_edges())?;
    let mut best_set: Vec<NodeId> = Vec::new();
    let mut best = 0.0f64;
    for mask in 0u32..(1u32 << n) {
        let mut cost = 0.0;
        for u in 0..n {
            if (mask >> u) & 1 == 1 {
                cost += net.cost(u);
            }
        }
        if cost > b {
            continue;
        }
        let seeds: Vec<NodeId> = (0..n).filter(|u| (mask >> u) & 1 == 1).collect();
        let p = exact_profit(net, mlg, &seeds, budget)?;
        if p > best {
            best = p;
            best_set = seeds;
        }
    }
    Ok((best_set, best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{monte_carlo_profit, observe, ResidualGraph, FixedWorld, KeyedWorld};
    use crate::net::{build_multi_level, unit_network};

    fn one_edge() -> (crate::net::SocialNetwork, MultiLevelGraph) {
        let net = unit_network(1, 2, &[(0, 1)], &[vec![0.5]], &[vec![1.0], vec![1.0]]).unwrap();
        let mlg = build_multi_level(&net);
        (net, mlg)
    }

    #[test]
    fn exact_profit_empty_seed_set() {
        let (net, mlg) = one_edge();
        assert_eq!(exact_profit(&net, &mlg, &[], &EnumerationBudget::default()).unwrap(), 0.0);
    }

    #[test]
    fn exact_profit_one_edge() {
        let (net, mlg) = one_edge();
        let p = exact_profit(&net, &mlg, &[0], &EnumerationBudget::default()).unwrap();
        assert!((p - 1.5).abs() < 1e-12);
    }

    #[test]
    fn exact_profit_two_features() {
        // a -> b, p=(0.5, 1.0), w_b=(0.3, 0.7): P({a}) = 1 + 0.5*0.3 + 1.0*0.7
        let net = unit_network(
            2,
            2,
            &[(0, 1)],
            &[vec![0.5, 1.0]],
            &[vec![0.5, 0.5], vec![0.3, 0.7]],
        )
        .unwrap();
        let mlg = build_multi_level(&net);
        let p = exact_profit(&net, &mlg, &[0], &EnumerationBudget::default()).unwrap();
        assert!((p - 1.85).abs() < 1e-12, "got {p}");
    }

    #[test]
    fn enumeration_limit_is_enforced() {
        let net = unit_network(
            1,
            4,
            &[(0, 1), (1, 2), (2, 3)],
            &[vec![0.5], vec![0.5], vec![0.5]],
            &vec![vec![1.0]; 4],
        )
        .unwrap();
        let mlg = build_multi_level(&net);
        let err =
            exact_profit(&net, &mlg, &[0], &EnumerationBudget { max_edges: 2 }).unwrap_err();
        assert!(matches!(err, Error::EnumerationTooLarge { edges: 3, max: 2 }));
    }

    #[test]
    fn exact_matches_monte_carlo() {
        let net = unit_network(
            1,
            4,
            &[(0, 1), (1, 2), (0, 3), (3, 2)],
            &[vec![0.3], vec![0.9], vec![0.5], vec![0.7]],
            &vec![vec![1.0]; 4],
        )
        .unwrap();
        let mlg = build_multi_level(&net);
        let exact = exact_profit(&net, &mlg, &[0], &EnumerationBudget::default()).unwrap();
        let (mc, se) = monte_carlo_profit(&net, &mlg, &[0], 100_000, 11).unwrap();
        assert!((mc - exact).abs() <= 3.0 * se + 1e-9, "mc {mc} exact {exact} se {se}");
    }

    #[test]
    fn marginal_of_fully_accepted_node_is_zero() {
        // a -> b -> c with p=1: after seeding a everything is accepted
        let net = unit_network(1, 3, &[(0, 1), (1, 2)], &[vec![1.0], vec![1.0]], &vec![vec![1.0]; 3])
            .unwrap();
        let mlg = build_multi_level(&net);
        let mut partial = PartialRealization::new(&mlg);
        let mut residual = ResidualGraph::full(&net, &mlg);
        let mut world = KeyedWorld::new(1);
        observe(&mut partial, &mut residual, &net, &mlg, 0, &mut world).unwrap();
        let d = exact_marginal_gain(&net, &mlg, &partial, 2, &EnumerationBudget::default())
            .unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn marginal_at_empty_partial_equals_exact_profit() {
        let net = unit_network(
            2,
            3,
            &[(0, 1), (1, 2)],
            &[vec![0.4, 0.8], vec![0.6, 0.2]],
            &[vec![0.5, 0.5], vec![0.3, 0.7], vec![0.9, 0.1]],
        )
        .unwrap();
        let mlg = build_multi_level(&net);
        let empty = PartialRealization::new(&mlg);
        for u in 0..net.n() {
            let d = exact_marginal_gain(&net, &mlg, &empty, u, &EnumerationBudget::default())
                .unwrap();
            let p = exact_profit(&net, &mlg, &[u], &EnumerationBudget::default()).unwrap();
            assert!((d - p).abs() < 1e-12, "node {u}: delta {d} vs P {p}");
        }
    }

    #[test]
    fn marginal_conditions_on_observed_states() {
        // path a -> b -> c, q=1, p=0.5 each
        let net = unit_network(1, 3, &[(0, 1), (1, 2)], &[vec![0.5], vec![0.5]], &vec![vec![1.0]; 3])
            .unwrap();
        let mlg = build_multi_level(&net);
        let budget = EnumerationBudget::default();

        // world where both edges are live: seeding a accepts all of a, b, c
        let all_live = FullRealization { live: vec![true, true] };
        let mut partial = PartialRealization::new(&mlg);
        let mut residual = ResidualGraph::full(&net, &mlg);
        observe(&mut partial, &mut residual, &net, &mlg, 0, &mut FixedWorld { real: &all_live })
            .unwrap();
        assert_eq!(exact_marginal_gain(&net, &mlg, &partial, 2, &budget).unwrap(), 0.0);

        // world where a->b is blocked: only a accepted, b->c still unknown;
        // adding c is worth exactly its own mass
        let blocked = FullRealization { live: vec![false, true] };
        let mut partial = PartialRealization::new(&mlg);
        let mut residual = ResidualGraph::full(&net, &mlg);
        observe(&mut partial, &mut residual, &net, &mlg, 0, &mut FixedWorld { real: &blocked })
            .unwrap();
        let d = exact_marginal_gain(&net, &mlg, &partial, 2, &budget).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
        // adding b is worth its own mass plus the chance of reaching c
        let d = exact_marginal_gain(&net, &mlg, &partial, 1, &budget).unwrap();
        assert!((d - 1.5).abs() < 1e-12);
    }

    #[test]
    fn marginal_rejects_existing_seed() {
        let (net, mlg) = one_edge();
        let mut partial = PartialRealization::new(&mlg);
        let mut residual = ResidualGraph::full(&net, &mlg);
        let mut world = KeyedWorld::new(2);
        observe(&mut partial, &mut residual, &net, &mlg, 0, &mut world).unwrap();
        assert!(matches!(
            exact_marginal_gain(&net, &mlg, &partial, 0, &EnumerationBudget::default()),
            Err(Error::DuplicateSeed(0))
        ));
    }

    #[test]
    fn optimum_with_slack_budget_takes_everything() {
        let net = unit_network(
            1,
            3,
            &[(0, 1), (1, 2)],
            &[vec![0.5], vec![0.5]],
            &vec![vec![1.0]; 3],
        )
        .unwrap();
        let mlg = build_multi_level(&net);
        let (set, value) = exact_optimum(&net, &mlg, 100.0, &EnumerationBudget::default()).unwrap();
        assert_eq!(set, vec![0, 1, 2]);
        assert!((value - net.total_profit()).abs() < 1e-12);
    }

    #[test]
    fn optimum_one_edge_budget_one() {
        let (net, mlg) = one_edge();
        let (set, value) = exact_optimum(&net, &mlg, 1.0, &EnumerationBudget::default()).unwrap();
        assert_eq!(set, vec![0]);
        assert!((value - 1.5).abs() < 1e-12);
    }

    #[test]
    fn optimum_zero_budget_is_empty() {
        let (net, mlg) = one_edge();
        let (set, value) = exact_optimum(&net, &mlg, 0.0, &EnumerationBudget::default()).unwrap();
        assert!(set.is_empty());
        assert_eq!(value, 0.0);
    }
}
