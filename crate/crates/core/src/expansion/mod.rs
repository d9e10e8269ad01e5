//! Conceptual expansion over game graphs.
//!
//! Each node of a new graph is an [`ExpandedNode`]: a list of parts, each
//! pairing a knowledge-base node (a mapped feature) with a [`Filter`] of
//! weights over that node's edge values. [`map_expansion`] picks the initial
//! parts, [`materialize`] turns an [`Expansion`] into a concrete
//! [`GameGraph`](crate::graph::GameGraph), and [`hill_climb`] improves the
//! weights and parts greedily against a heuristic.

mod mapping;
mod materialize;
mod search;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::graph::{GameGraph, GraphEdge, NodeId};

pub use mapping::{binary_rank_weight, map_expansion, map_expansion_with, rank_weight, DEFAULT_PARTS};
pub use materialize::{materialize, materialize_named, INCLUSION_THRESHOLD};
pub use search::{
    hill_climb, hill_climb_observed, neighbor, neighbor_with, sample_move, ClimbConfig, ClimbOutcome, Move, MoveKind,
    MoveSet, StepView, DEFAULT_MAX_STEPS, DEFAULT_NEIGHBORS,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExpansionError {
    #[error("knowledge base has no nodes")]
    EmptyKnowledgeBase,
    #[error("knowledge base holds two graphs named `{0}`")]
    DuplicateGraph(String),
    #[error("goal graph has no nodes")]
    EmptyGoal,
    #[error("number of mapped parts must be at least 1")]
    ZeroParts,
    #[error("part source {0} is not in the knowledge base")]
    UnknownSource(SourceRef),
    #[error("filter for {part} has {actual} weights, expected {expected}")]
    FilterLength {
        part: SourceRef,
        expected: usize,
        actual: usize,
    },
    #[error("expanded node `{0}` has no parts")]
    EmptyNode(NodeId),
    #[error("move does not apply: {0}")]
    InvalidMove(String),
}

/// A node in a named knowledge-base graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SourceRef {
    pub graph: String,
    pub node: NodeId,
}

impl SourceRef {
    pub fn new(graph: impl Into<String>, node: impl Into<NodeId>) -> Self {
        Self {
            graph: graph.into(),
            node: node.into(),
        }
    }
}

impl fmt::Display for SourceRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.graph, self.node)
    }
}

/// The fully specified graphs available for recombination, sorted by name.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeBase {
    graphs: Vec<GameGraph>,
}

impl KnowledgeBase {
    pub fn new(mut graphs: Vec<GameGraph>) -> Result<Self, ExpansionError> {
        graphs.sort_by(|a, b| a.name().cmp(b.name()));
        if let Some(w) = graphs.windows(2).find(|w| w[0].name() == w[1].name()) {
            return Err(ExpansionError::DuplicateGraph(w[0].name().to_owned()));
        }
        if graphs.iter().all(|g| g.nodes().is_empty()) {
            return Err(ExpansionError::EmptyKnowledgeBase);
        }
        Ok(Self { graphs })
    }

    pub fn graphs(&self) -> &[GameGraph] {
        &self.graphs
    }

    pub fn graph(&self, name: &str) -> Option<&GameGraph> {
        self.graphs
            .binary_search_by(|g| g.name().cmp(name))
            .ok()
            .map(|i| &self.graphs[i])
    }

    /// Owned edges of a source node, or `None` if it does not resolve.
    pub fn edges_of(&self, source: &SourceRef) -> Option<&[GraphEdge]> {
        let g = self.graph(&source.graph)?;
        g.contains(&source.node).then(|| g.edges_of(&source.node))
    }

    /// Every node in the knowledge base, by graph name then node id.
    pub fn sources(&self) -> impl Iterator<Item = SourceRef> + '_ {
        self.graphs
            .iter()
            .flat_map(|g| g.nodes().iter().map(move |n| SourceRef::new(g.name(), n.id.clone())))
    }

    pub fn node_count(&self) -> usize {
        self.graphs.iter().map(|g| g.nodes().len()).sum()
    }
}

/// Number of filter weights for a node with these owned edges: one
/// inclusion weight per edge plus one weight per payload value.
pub fn filter_len(edges: &[GraphEdge]) -> usize {
    edges.iter().map(|e| 1 + e.edge.slot_count()).sum()
}

/// Offset of each edge's inclusion weight within a filter; the edge's value
/// weights follow it in slot order.
pub fn edge_offsets(edges: &[GraphEdge]) -> Vec<usize> {
    let mut offset = 0;
    edges
        .iter()
        .map(|e| {
            let at = offset;
            offset += 1 + e.edge.slot_count();
            at
        })
        .collect()
}

/// Weights applied to one mapped feature.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Filter {
    weights: Vec<f64>,
}

impl Filter {
    pub fn new(weights: Vec<f64>) -> Self {
        Self { weights }
    }

    pub fn uniform(len: usize, weight: f64) -> Self {
        Self {
            weights: vec![weight; len],
        }
    }

    pub fn for_edges(edges: &[GraphEdge], weight: f64) -> Self {
        Self::uniform(filter_len(edges), weight)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Mean weight; 0.0 for an empty filter.
    pub fn strength(&self) -> f64 {
        if self.weights.is_empty() {
            0.0
        } else {
            self.weights.iter().sum::<f64>() / self.weights.len() as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Part {
    pub source: SourceRef,
    pub filter: Filter,
}

/// One node of the new graph, built from weighted knowledge-base nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpandedNode {
    pub id: NodeId,
    pub label: String,
    pub parts: Vec<Part>,
}

/// A fixed-size set of expanded nodes over a shared knowledge base.
#[derive(Debug, Clone)]
pub struct Expansion {
    nodes: Vec<ExpandedNode>,
    kb: Arc<KnowledgeBase>,
}

impl PartialEq for Expansion {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && (Arc::ptr_eq(&self.kb, &other.kb) || self.kb == other.kb)
    }
}

impl Serialize for Expansion {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.nodes.serialize(s)
    }
}

impl Expansion {
    /// Checks that every part resolves into `kb` with a filter of the right
    /// length, every node has at least one part and node ids are unique.
    pub fn new(nodes: Vec<ExpandedNode>, kb: Arc<KnowledgeBase>) -> Result<Self, ExpansionError> {
        let mut ids = BTreeSet::new();
        for n in &nodes {
            if n.parts.is_empty() || !ids.insert(&n.id) {
                return Err(ExpansionError::EmptyNode(n.id.clone()));
            }
            for p in &n.parts {
                let edges = kb
                    .edges_of(&p.source)
                    .ok_or_else(|| ExpansionError::UnknownSource(p.source.clone()))?;
                let expected = filter_len(edges);
                if p.filter.len() != expected {
                    return Err(ExpansionError::FilterLength {
                        part: p.source.clone(),
                        expected,
                        actual: p.filter.len(),
                    });
                }
            }
        }
        Ok(Self { nodes, kb })
    }

    /// One single-part node per node of `graph`, all weights at `weight`,
    /// keeping the original ids. With weight 1.0 this materializes back to
    /// `graph` itself.
    pub fn identity(graph_name: &str, kb: Arc<KnowledgeBase>, weight: f64) -> Result<Self, ExpansionError> {
        let graph = kb
            .graph(graph_name)
            .ok_or_else(|| ExpansionError::UnknownSource(SourceRef::new(graph_name, "")))?;
        let nodes = graph
            .nodes()
            .iter()
            .map(|n| ExpandedNode {
                id: n.id.clone(),
                label: n.label.clone(),
                parts: vec![Part {
                    source: SourceRef::new(graph_name, n.id.clone()),
                    filter: Filter::for_edges(graph.edges_of(&n.id), weight),
                }],
            })
            .collect();
        Self::new(nodes, kb)
    }

    pub fn nodes(&self) -> &[ExpandedNode] {
        &self.nodes
    }

    pub fn knowledge_base(&self) -> &Arc<KnowledgeBase> {
        &self.kb
    }

    /// Every filter weight, node by node and part by part.
    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes
            .iter()
            .flat_map(|n| n.parts.iter().flat_map(|p| p.filter.weights().iter().copied()))
    }

    pub(crate) fn nodes_mut(&mut self) -> &mut [ExpandedNode] {
        &mut self.nodes
    }

    /// Canonical JSON of the node list, for reproducibility checks.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("expansions always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, SpriteNode};

    fn kb() -> Arc<KnowledgeBase> {
        let g = GameGraph::new(
            "a",
            vec![SpriteNode::new("n", "N")],
            vec![GraphEdge::new("n", Edge::N { count: 2, l_id: "l".into() })],
        );
        Arc::new(KnowledgeBase::new(vec![g]).unwrap())
    }

    #[test]
    fn knowledge_base_rejects_duplicates_and_emptiness() {
        let g = GameGraph::empty("x");
        assert_eq!(
            KnowledgeBase::new(vec![g.clone()]),
            Err(ExpansionError::EmptyKnowledgeBase)
        );
        let kb = kb();
        let a = kb.graphs()[0].clone();
        assert_eq!(
            KnowledgeBase::new(vec![a.clone(), a]),
            Err(ExpansionError::DuplicateGraph("a".into()))
        );
    }

    #[test]
    fn expansion_checks_filter_length() {
        let kb = kb();
        let part = |len| Part {
            source: SourceRef::new("a", "n"),
            filter: Filter::uniform(len, 1.0),
        };
        let node = |len| ExpandedNode {
            id: "x".into(),
            label: "X".into(),
            parts: vec![part(len)],
        };
        assert!(Expansion::new(vec![node(3)], kb.clone()).is_ok());
        assert!(matches!(
            Expansion::new(vec![node(2)], kb.clone()),
            Err(ExpansionError::FilterLength { expected: 3, .. })
        ));
        let missing = ExpandedNode {
            id: "x".into(),
            label: "X".into(),
            parts: vec![Part {
                source: SourceRef::new("a", "zz"),
                filter: Filter::uniform(0, 1.0),
            }],
        };
        assert!(matches!(
            Expansion::new(vec![missing], kb),
            Err(ExpansionError::UnknownSource(_))
        ));
    }

    #[test]
    fn offsets_follow_slot_counts() {
        let kb = kb();
        let edges = kb.graphs()[0].edges();
        assert_eq!(edge_offsets(edges), vec![0]);
        assert_eq!(filter_len(edges), 3);
    }
}
