use std::collections::HashMap;

use super::Expansion;
use crate::distance::edge_distance;
use crate::graph::{Edge, GameGraph, GraphEdge, NodeId, SlotKey, SlotMut, SlotRef, SpriteNode};

/// Weight at or above which an edge is included or a categorical value kept.
pub const INCLUSION_THRESHOLD: f64 = 0.5;

/// Where each knowledge-base node ends up in the new graph: the expanded
/// node holding it with the highest mean filter weight, then the lowest part
/// rank, then the smallest expanded node id.
struct Remap<'a> {
    table: HashMap<&'a str, HashMap<&'a NodeId, (f64, usize, &'a NodeId)>>,
}

fn outranks(a: (f64, usize, &NodeId), b: (f64, usize, &NodeId)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && (a.1 < b.1 || (a.1 == b.1 && a.2 < b.2)))
}

impl<'a> Remap<'a> {
    fn new(e: &'a Expansion) -> Self {
        let mut table: HashMap<&str, HashMap<&NodeId, (f64, usize, &NodeId)>> = HashMap::new();
        for x in e.nodes() {
            for (rank, p) in x.parts.iter().enumerate() {
                let cand = (p.filter.strength(), rank, &x.id);
                let slot = table.entry(p.source.graph.as_str()).or_default();
                if slot.get(&p.source.node).is_none_or(|held| outranks(cand, *held)) {
                    slot.insert(&p.source.node, cand);
                }
            }
        }
        Self { table }
    }

    fn get(&self, graph: &str, node: &NodeId) -> Option<NodeId> {
        self.table.get(graph)?.get(node).map(|&(_, _, id)| id.clone())
    }
}

pub fn materialize(e: &Expansion) -> GameGraph {
    materialize_named(e, "expansion")
}

/// Builds the concrete graph an expansion describes.
///
/// For every part and every edge of its source node: the edge is kept iff
/// its inclusion weight reaches [`INCLUSION_THRESHOLD`]; numeric values are
/// multiplied by their weight; a categorical value under the threshold is
/// replaced by the same slot of the closest edge in the node's first-ranked
/// part, and the edge is dropped when no such value exists. Node references
/// are remapped into the new graph and edges whose references cannot be
/// remapped are dropped.
pub fn materialize_named(e: &Expansion, name: &str) -> GameGraph {
    let kb = e.knowledge_base();
    let remap = Remap::new(e);
    let mut edges = Vec::new();
    for x in e.nodes() {
        let anchor = &x.parts[0];
        let anchor_edges = kb.edges_of(&anchor.source).unwrap_or_default();
        for (rank, part) in x.parts.iter().enumerate() {
            let Some(source_edges) = kb.edges_of(&part.source) else {
                continue;
            };
            let donor = (rank > 0).then_some((anchor.source.graph.as_str(), anchor_edges));
            let weights = part.filter.weights();
            let mut offset = 0;
            for ge in source_edges {
                let len = 1 + ge.edge.slot_count();
                let Some(w) = weights.get(offset..offset + len) else {
                    break;
                };
                offset += len;
                if w[0] < INCLUSION_THRESHOLD {
                    continue;
                }
                if let Some(edge) = filter_edge(&ge.edge, &w[1..], &part.source.graph, donor, &remap) {
                    edges.push(GraphEdge::new(x.id.clone(), edge));
                }
            }
        }
    }
    let nodes = e
        .nodes()
        .iter()
        .map(|x| SpriteNode::new(x.id.clone(), x.label.clone()))
        .collect();
    GameGraph::new(name, nodes, edges)
}

fn scale(key: SlotKey, value: f64, weight: f64) -> f64 {
    let scaled = value * weight;
    match key.field {
        "probability" => scaled.clamp(0.0, 1.0),
        "width" | "height" => scaled.max(0.0),
        _ => scaled,
    }
}

/// Closest edge among `candidates` that has a slot named `key`.
fn donor_value<'d>(original: &Edge, key: SlotKey, candidates: &'d [GraphEdge]) -> Option<SlotRef<'d>> {
    let mut best: Option<(f64, SlotRef<'d>)> = None;
    for c in candidates.iter().filter(|c| c.edge.kind() == original.kind()) {
        let Some((_, value)) = c.edge.slots().into_iter().find(|(k, _)| *k == key) else {
            continue;
        };
        let d = edge_distance(original, &c.edge);
        if best.as_ref().is_none_or(|(b, _)| d < *b) {
            best = Some((d, value));
        }
    }
    best.map(|(_, v)| v)
}

fn filter_edge(
    edge: &Edge,
    weights: &[f64],
    graph: &str,
    donor: Option<(&str, &[GraphEdge])>,
    remap: &Remap<'_>,
) -> Option<Edge> {
    let mut out = edge.clone();
    for ((key, slot), &w) in out.slots_mut().into_iter().zip(weights) {
        match slot {
            SlotMut::Num(v) => *v = scale(key, *v, w),
            SlotMut::Count(c) => *c = (*c as f64 * w).round().max(0.0) as u64,
            SlotMut::Text(_) | SlotMut::Shape(_) if w >= INCLUSION_THRESHOLD => {}
            SlotMut::Node(n) if w >= INCLUSION_THRESHOLD => *n = remap.get(graph, n)?,
            SlotMut::OptNode(n) if w >= INCLUSION_THRESHOLD => {
                if let Some(id) = n {
                    *id = remap.get(graph, id)?;
                }
            }
            slot => {
                let (donor_graph, donor_edges) = donor?;
                match (slot, donor_value(edge, key, donor_edges)?) {
                    (SlotMut::Text(t), SlotRef::Text(v)) => t.clone_from(v),
                    (SlotMut::Shape(t), SlotRef::Shape(v)) => t.clone_from(v),
                    (SlotMut::Node(t), SlotRef::Node(v)) => *t = remap.get(donor_graph, v)?,
                    (SlotMut::OptNode(t), SlotRef::OptNode(v)) => {
                        *t = match v {
                            None => None,
                            Some(id) => Some(remap.get(donor_graph, id)?),
                        }
                    }
                    _ => return None,
                }
            }
        }
    }
    Some(out)
}
