//! Asymmetric Chamfer distance between game graphs.
//!
//! Distances compose bottom-up. Two edges of different kinds are 1.0 apart;
//! otherwise their distance is one minus the fraction of matching values,
//! where categorical values match exactly or not at all and numeric values
//! match fractionally as `1 / (1 + |a - b|)`. A goal node's distance to a
//! candidate node is the mean, over the goal node's edges, of the distance
//! to the nearest candidate edge. A goal graph's distance to a candidate
//! graph is the mean, over goal nodes, of the distance to the nearest
//! candidate node. Candidate-only structure is never penalized.
//!
//! Rule ids are not compared: they are arbitrary labels produced by
//! independent learning runs.

use serde::Serialize;

use crate::graph::{Edge, Fact, GameGraph, GraphEdge, NodeId, PartialGoal, ShapeMatrix};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NodeMatch {
    pub goal_node: NodeId,
    pub candidate_node: NodeId,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DistanceReport {
    /// Mean of the per-node distances, in `[0, 1]`.
    pub total: f64,
    pub per_goal_node: Vec<NodeMatch>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DistanceError {
    #[error("candidate graph `{0}` has no nodes")]
    EmptyCandidate(String),
}

/// Scoring function driving mapping and search. Lower is better; all values
/// lie in `[0, 1]`.
pub trait Heuristic: Sync {
    fn node_distance(&self, goal: &[GraphEdge], candidate: &[GraphEdge]) -> f64;

    /// Distance from `goal` to a whole candidate graph. An empty candidate
    /// scores 1.0 unless the goal is empty too.
    fn graph_distance(&self, goal: &PartialGoal, candidate: &GameGraph) -> f64;
}

/// The asymmetric Chamfer distance implemented by this module.
#[derive(Debug, Clone, Copy, Default)]
pub struct Chamfer;

impl Heuristic for Chamfer {
    fn node_distance(&self, goal: &[GraphEdge], candidate: &[GraphEdge]) -> f64 {
        node_distance(goal, candidate)
    }

    fn graph_distance(&self, goal: &PartialGoal, candidate: &GameGraph) -> f64 {
        match graph_distance(goal, candidate) {
            Ok(report) => report.total,
            Err(DistanceError::EmptyCandidate(_)) if goal.graph().nodes().is_empty() => 0.0,
            Err(DistanceError::EmptyCandidate(_)) => 1.0,
        }
    }
}

fn numeric_match(a: f64, b: f64) -> f64 {
    1.0 / (1.0 + (a - b).abs())
}

fn exact_match<T: PartialEq + ?Sized>(a: &T, b: &T) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Fraction of matching cells, with both grids anchored at the top-left.
/// Cells covered by only one grid count as mismatches.
pub fn shape_similarity(a: &ShapeMatrix, b: &ShapeMatrix) -> f64 {
    let overlap_rows = a.rows.min(b.rows);
    let overlap_cols = a.cols.min(b.cols);
    let area_a = (a.rows * a.cols) as usize;
    let area_b = (b.rows * b.cols) as usize;
    let overlap = (overlap_rows * overlap_cols) as usize;
    let union = area_a + area_b - overlap;
    if union == 0 {
        return 1.0;
    }
    let mut matching = 0usize;
    for r in 0..overlap_rows {
        for c in 0..overlap_cols {
            if a.get(r, c) == b.get(r, c) {
                matching += 1;
            }
        }
    }
    matching as f64 / union as f64
}

/// `(matched value, compared value count)` for two facts. Facts of
/// different kinds share only the kind tag, which does not match, so every
/// field of both sides counts as a mismatch.
fn fact_match(a: &Fact, b: &Fact) -> (f64, f64) {
    use Fact::*;
    let fields = match (a, b) {
        (
            Animation {
                name: n1,
                width: w1,
                height: h1,
            },
            Animation {
                name: n2,
                width: w2,
                height: h2,
            },
        ) => (
            exact_match(n1, n2) + numeric_match(*w1, *w2) + numeric_match(*h1, *h2),
            3.0,
        ),
        (Spatial { x: x1, y: y1 }, Spatial { x: x2, y: y2 }) => (numeric_match(*x1, *x2) + numeric_match(*y1, *y2), 2.0),
        (RelationshipX { target: t1, offset: o1 }, RelationshipX { target: t2, offset: o2 })
        | (RelationshipY { target: t1, offset: o1 }, RelationshipY { target: t2, offset: o2 }) => {
            (exact_match(t1, t2) + numeric_match(*o1, *o2), 2.0)
        }
        (VelocityX { vx: a }, VelocityX { vx: b })
        | (VelocityY { vy: a }, VelocityY { vy: b })
        | (CameraX { x: a }, CameraX { x: b })
        | (CameraY { y: a }, CameraY { y: b }) => (numeric_match(*a, *b), 1.0),
        (Random { seed_tag: a }, Random { seed_tag: b }) => (exact_match(a, b), 1.0),
        _ => {
            let width = |f: &Fact| match f {
                Animation { .. } => 3.0,
                Spatial { .. } | RelationshipX { .. } | RelationshipY { .. } => 2.0,
                _ => 1.0,
            };
            return (0.0, 1.0 + width(a) + width(b));
        }
    };
    // The kind tag itself matches.
    (fields.0 + 1.0, fields.1 + 1.0)
}

/// Distance between two edge payloads, in `[0, 1]`. Symmetric; exactly 1.0
/// across edge kinds.
pub fn edge_distance(a: &Edge, b: &Edge) -> f64 {
    let (matched, total) = match (a, b) {
        (
            Edge::G {
                x: x1,
                y: y1,
                shape: sh1,
                s_id: s1,
                l_id: l1,
            },
            Edge::G {
                x: x2,
                y: y2,
                shape: sh2,
                s_id: s2,
                l_id: l2,
            },
        ) => (
            numeric_match(*x1, *x2)
                + numeric_match(*y1, *y2)
                + shape_similarity(sh1, sh2)
                + exact_match(s1, s2)
                + exact_match(l1, l2),
            5.0,
        ),
        (
            Edge::D {
                dx: dx1,
                dy: dy1,
                probability: p1,
                s_id: s1,
                l_id: l1,
                target: t1,
            },
            Edge::D {
                dx: dx2,
                dy: dy2,
                probability: p2,
                s_id: s2,
                l_id: l2,
                target: t2,
            },
        ) => (
            numeric_match(*dx1, *dx2)
                + numeric_match(*dy1, *dy2)
                + numeric_match(*p1, *p2)
                + exact_match(s1, s2)
                + exact_match(l1, l2)
                + exact_match(t1, t2),
            6.0,
        ),
        (Edge::N { count: c1, l_id: l1 }, Edge::N { count: c2, l_id: l2 }) => {
            (numeric_match(*c1 as f64, *c2 as f64) + exact_match(l1, l2), 2.0)
        }
        (
            Edge::RuleCondition {
                fact: f1, target: t1, ..
            },
            Edge::RuleCondition {
                fact: f2, target: t2, ..
            },
        ) => {
            let (m, n) = fact_match(f1, f2);
            (m + exact_match(t1, t2), n + 1.0)
        }
        (
            Edge::RuleEffect {
                pre: pre1,
                post: post1,
                target: t1,
                ..
            },
            Edge::RuleEffect {
                pre: pre2,
                post: post2,
                target: t2,
                ..
            },
        ) => {
            let (m1, n1) = fact_match(pre1, pre2);
            let (m2, n2) = fact_match(post1, post2);
            (m1 + m2 + exact_match(t1, t2), n1 + n2 + 1.0)
        }
        _ => return 1.0,
    };
    (1.0 - matched / total).clamp(0.0, 1.0)
}

/// Mean over the goal node's edges of the distance to the nearest candidate
/// edge. 0.0 for an edge-free goal node; a goal edge with no candidate edges
/// to match contributes 1.0.
pub fn node_distance(goal: &[GraphEdge], candidate: &[GraphEdge]) -> f64 {
    if goal.is_empty() {
        return 0.0;
    }
    let sum: f64 = goal
        .iter()
        .map(|g| {
            candidate
                .iter()
                .map(|c| edge_distance(&g.edge, &c.edge))
                .fold(1.0, f64::min)
        })
        .sum();
    sum / goal.len() as f64
}

/// Full per-node report of the distance from `goal` to `candidate`. Ties
/// between candidate nodes go to the smallest id.
pub fn graph_distance(goal: &PartialGoal, candidate: &GameGraph) -> Result<DistanceReport, DistanceError> {
    if candidate.nodes().is_empty() {
        return Err(DistanceError::EmptyCandidate(candidate.name().to_owned()));
    }
    let goal_graph = goal.graph();
    let per_goal_node: Vec<NodeMatch> = goal_graph
        .nodes()
        .iter()
        .map(|gn| {
            let goal_edges = goal_graph.edges_of(&gn.id);
            let mut best: Option<(f64, &NodeId)> = None;
            // Candidate nodes are sorted by id, so strict `<` keeps the
            // smallest id among ties.
            for cn in candidate.nodes() {
                let d = node_distance(goal_edges, candidate.edges_of(&cn.id));
                if best.is_none_or(|(b, _)| d < b) {
                    best = Some((d, &cn.id));
                }
                if d == 0.0 {
                    break;
                }
            }
            let (distance, id) = best.expect("candidate is non-empty");
            NodeMatch {
                goal_node: gn.id.clone(),
                candidate_node: id.clone(),
                distance,
            }
        })
        .collect();
    let total = if per_goal_node.is_empty() {
        0.0
    } else {
        per_goal_node.iter().map(|m| m.distance).sum::<f64>() / per_goal_node.len() as f64
    };
    Ok(DistanceReport { total, per_goal_node })
}
