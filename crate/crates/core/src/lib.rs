//! Budgeted profit maximization on social networks where adoption depends on
//! several independently spreading product features.
//!
//! A product has q features. Information about each feature cascades through
//! the network independently (independent-cascade semantics on one level of a
//! stacked multi-level graph). A user buys once the combined weight of the
//! features that reached them clears a uniform random threshold, so the
//! expected profit of a seed set has a closed per-node form and the threshold
//! never needs to be sampled. The toolkit covers:
//!
//! - [`net`]: graph ingestion, parameter synthesis, multi-level construction;
//! - [`diffusion`]: realizations, cascades, profit, adaptive observation;
//! - [`estimation`]: reverse-reachable sets, coverage estimators, sample-size bounds;
//! - [`oracle`]: exact enumeration baselines for tiny instances;
//! - [`policies`]: non-adaptive and adaptive seed-selection strategies under
//!   an expected-knapsack budget;
//! - [`experiment`]: the budget-sweep experiment harness and its CSV output.

pub mod diffusion;
pub mod error;
pub mod estimation;
pub mod experiment;
pub mod net;
pub mod oracle;
pub mod policies;
pub mod seeds;

pub use error::{Error, Result};
