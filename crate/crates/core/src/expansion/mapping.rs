use std::sync::Arc;

use super::{ExpandedNode, Expansion, ExpansionError, Filter, KnowledgeBase, Part, SourceRef};
use crate::distance::Heuristic;
use crate::graph::PartialGoal;

/// Mapped parts per expanded node.
pub const DEFAULT_PARTS: usize = 10;

/// Percentile weight of the part at `rank` out of `n`: 1.0 for the best
/// match, then `(n - rank) / n`.
pub fn rank_weight(rank: usize, n: usize) -> f64 {
    (n - rank) as f64 / n as f64
}

/// [`rank_weight`] rounded to {0, 1}. A percentile of exactly one half
/// rounds down.
pub fn binary_rank_weight(rank: usize, n: usize) -> f64 {
    if rank_weight(rank, n) > 0.5 {
        1.0
    } else {
        0.0
    }
}

/// Builds the initial expansion: one expanded node per goal node, holding the
/// `n` knowledge-base nodes nearest to it under `h`, weighted by rank.
pub fn map_expansion(
    goal: &PartialGoal,
    kb: Arc<KnowledgeBase>,
    h: &dyn Heuristic,
    n: usize,
) -> Result<Expansion, ExpansionError> {
    map_expansion_with(goal, kb, h, n, rank_weight)
}

/// [`map_expansion`] with a custom `(rank, n) -> weight` rule.
pub fn map_expansion_with(
    goal: &PartialGoal,
    kb: Arc<KnowledgeBase>,
    h: &dyn Heuristic,
    n: usize,
    weight: impl Fn(usize, usize) -> f64,
) -> Result<Expansion, ExpansionError> {
    if n == 0 {
        return Err(ExpansionError::ZeroParts);
    }
    let goal_graph = goal.graph();
    if goal_graph.nodes().is_empty() {
        return Err(ExpansionError::EmptyGoal);
    }
    let sources: Vec<SourceRef> = kb.sources().collect();
    if sources.is_empty() {
        return Err(ExpansionError::EmptyKnowledgeBase);
    }

    let nodes = goal_graph
        .nodes()
        .iter()
        .map(|gn| {
            let goal_edges = goal_graph.edges_of(&gn.id);
            let mut ranked: Vec<(f64, &SourceRef)> = sources
                .iter()
                .map(|s| {
                    let edges = kb.edges_of(s).expect("sources come from the knowledge base");
                    (h.node_distance(goal_edges, edges), s)
                })
                .collect();
            // Sources are already in (graph, node) order; a stable sort keeps
            // that order among equal distances.
            ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
            let parts = ranked
                .into_iter()
                .take(n)
                .enumerate()
                .map(|(rank, (_, source))| Part {
                    filter: Filter::for_edges(kb.edges_of(source).unwrap_or_default(), weight(rank, n)),
                    source: source.clone(),
                })
                .collect();
            ExpandedNode {
                id: gn.id.clone(),
                label: gn.label.clone(),
                parts,
            }
        })
        .collect();
    Expansion::new(nodes, kb)
}
