//! Recombines game graphs into new games.
//!
//! A game graph ([`graph::GameGraph`]) holds one node per sprite and typed
//! edges for level-design statistics and rules. New games are built by
//! conceptual expansion ([`expansion`]): each node of the new graph is a
//! weighted, filtered combination of knowledge-base nodes, tuned by greedy
//! hill-climbing against an asymmetric Chamfer distance ([`distance`]) to a
//! partially specified goal. [`baselines`] holds the KNN, blend and genetic
//! algorithm comparisons and [`harness`] runs the designer and developer
//! recreation experiments on synthetic fixtures.

pub mod baselines;
pub mod distance;
pub mod expansion;
pub mod graph;
pub mod harness;
