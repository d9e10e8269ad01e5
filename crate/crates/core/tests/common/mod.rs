//! Reference implementations and generators shared by the integration tests.
//!
//! The oracles here work on the serialized JSON form of edges and enumerate
//! matchings exhaustively, so they share no code with the library's distance
//! functions.
#![allow(dead_code)]

use expansion_forge::graph::{Edge, Fact, GameGraph, GraphEdge, NodeId, ShapeMatrix, SpriteNode};
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{Map, Value};

pub mod oracle {
    use super::*;

    fn number(v: &Value) -> Option<f64> {
        v.as_f64()
    }

    /// Shape score from the JSON form: cells are compared on the common
    /// top-left-anchored region; every cell in the union of the two grids
    /// counts toward the denominator.
    fn shape_score(a: &Map<String, Value>, b: &Map<String, Value>) -> f64 {
        let dims = |m: &Map<String, Value>| {
            (
                m["rows"].as_u64().unwrap() as usize,
                m["cols"].as_u64().unwrap() as usize,
                m["cells"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).collect::<Vec<_>>(),
            )
        };
        let (ra, ca, xa) = dims(a);
        let (rb, cb, xb) = dims(b);
        let mut union = 0usize;
        let mut matching = 0usize;
        for r in 0..ra.max(rb) {
            for c in 0..ca.max(cb) {
                let in_a = r < ra && c < ca;
                let in_b = r < rb && c < cb;
                if in_a || in_b {
                    union += 1;
                }
                if in_a && in_b && xa[r * ca + c] == xb[r * cb + c] {
                    matching += 1;
                }
            }
        }
        if union == 0 {
            1.0
        } else {
            matching as f64 / union as f64
        }
    }

    fn leaf_score(key: &str, a: &Value, b: &Value) -> (f64, f64) {
        match (a, b) {
            (Value::Object(x), Value::Object(y)) if key == "shape" => (shape_score(x, y), 1.0),
            (Value::Object(x), Value::Object(y)) => fact_score(x, y),
            _ => match (number(a), number(b)) {
                (Some(p), Some(q)) => (1.0 / (1.0 + (p - q).abs()), 1.0),
                _ => (if a == b { 1.0 } else { 0.0 }, 1.0),
            },
        }
    }

    fn fact_score(a: &Map<String, Value>, b: &Map<String, Value>) -> (f64, f64) {
        if a["factKind"] != b["factKind"] {
            // Kind tag plus every field of both facts, all mismatched.
            return (0.0, (a.len() - 1 + b.len() - 1 + 1) as f64);
        }
        a.keys()
            .map(|k| leaf_score(k, &a[k], &b[k]))
            .fold((0.0, 0.0), |s, x| (s.0 + x.0, s.1 + x.1))
    }

    /// Edge distance by enumerating every payload field except the rule id.
    pub fn edge_distance(a: &Edge, b: &Edge) -> f64 {
        let (ja, jb) = (serde_json::to_value(a).unwrap(), serde_json::to_value(b).unwrap());
        if ja["kind"] != jb["kind"] {
            return 1.0;
        }
        let (pa, pb) = (ja["payload"].as_object().unwrap(), jb["payload"].as_object().unwrap());
        let mut keys: Vec<&String> = pa.keys().chain(pb.keys()).filter(|k| *k != "ruleId").collect();
        keys.sort();
        keys.dedup();
        let (mut matched, mut total) = (0.0, 0.0);
        for k in keys {
            let (m, n) = match (pa.get(k), pb.get(k)) {
                (Some(x), Some(y)) => leaf_score(k, x, y),
                _ => (0.0, 1.0),
            };
            matched += m;
            total += n;
        }
        (1.0 - matched / total).clamp(0.0, 1.0)
    }

    /// Visits every function from `0..domain` over `len` positions.
    fn for_each_assignment(len: usize, domain: usize, mut f: impl FnMut(&[usize])) {
        let mut a = vec![0usize; len];
        if domain == 0 && len > 0 {
            return;
        }
        loop {
            f(&a);
            let mut i = 0;
            loop {
                if i == len {
                    return;
                }
                a[i] += 1;
                if a[i] < domain {
                    break;
                }
                a[i] = 0;
                i += 1;
            }
        }
    }

    /// Node distance as the best mean over every goal-edge to candidate-edge
    /// assignment.
    pub fn node_distance(goal: &[GraphEdge], candidate: &[GraphEdge]) -> f64 {
        if goal.is_empty() {
            return 0.0;
        }
        if candidate.is_empty() {
            return 1.0;
        }
        let table: Vec<Vec<f64>> = goal
            .iter()
            .map(|g| candidate.iter().map(|c| edge_distance(&g.edge, &c.edge)).collect())
            .collect();
        let mut best = f64::INFINITY;
        for_each_assignment(goal.len(), candidate.len(), |a| {
            let mean = a.iter().enumerate().map(|(i, &j)| table[i][j]).sum::<f64>() / goal.len() as f64;
            best = best.min(mean);
        });
        best
    }

    /// Graph distance as the best mean over every goal-node to
    /// candidate-node assignment.
    pub fn graph_distance(goal: &GameGraph, candidate: &GameGraph) -> f64 {
        if goal.nodes().is_empty() {
            return 0.0;
        }
        let table: Vec<Vec<f64>> = goal
            .nodes()
            .iter()
            .map(|g| {
                let ge: Vec<GraphEdge> = goal.edges().iter().filter(|e| e.owner == g.id).cloned().collect();
                candidate
                    .nodes()
                    .iter()
                    .map(|c| {
                        let ce: Vec<GraphEdge> =
                            candidate.edges().iter().filter(|e| e.owner == c.id).cloned().collect();
                        node_distance(&ge, &ce)
                    })
                    .collect()
            })
            .collect();
        let n = goal.nodes().len();
        let mut best = f64::INFINITY;
        for_each_assignment(n, candidate.nodes().len(), |a| {
            let mean = a.iter().enumerate().map(|(i, &j)| table[i][j]).sum::<f64>() / n as f64;
            best = best.min(mean);
        });
        best
    }

    /// Graph distance by direct nearest-edge and nearest-node lookups, for
    /// graphs too large to enumerate.
    pub fn chamfer(goal: &GameGraph, candidate: &GameGraph) -> f64 {
        if goal.nodes().is_empty() {
            return 0.0;
        }
        let owned = |g: &GameGraph, id: &NodeId| -> Vec<Edge> {
            g.edges().iter().filter(|e| &e.owner == id).map(|e| e.edge.clone()).collect()
        };
        let per_node: Vec<f64> = goal
            .nodes()
            .iter()
            .map(|g| {
                let ge = owned(goal, &g.id);
                candidate
                    .nodes()
                    .iter()
                    .map(|c| {
                        let ce = owned(candidate, &c.id);
                        if ge.is_empty() {
                            return 0.0;
                        }
                        ge.iter()
                            .map(|x| ce.iter().map(|y| edge_distance(x, y)).fold(1.0, f64::min))
                            .sum::<f64>()
                            / ge.len() as f64
                    })
                    .fold(1.0, f64::min)
            })
            .collect();
        per_node.iter().sum::<f64>() / per_node.len() as f64
    }
}

const IDS: [&str; 5] = ["a", "b", "c", "d", "e"];

fn small(rng: &mut impl Rng) -> f64 {
    f64::from(rng.gen_range(-2..=2))
}

fn shape(rng: &mut impl Rng) -> ShapeMatrix {
    let rows = rng.gen_range(1..=3);
    let cols = rng.gen_range(1..=3);
    ShapeMatrix {
        rows,
        cols,
        cells: (0..rows * cols).map(|_| rng.gen_bool(0.5)).collect(),
    }
}

pub fn random_fact(rng: &mut impl Rng, nodes: &[NodeId], kind: usize) -> Fact {
    match kind {
        0 => Fact::Animation {
            name: ["run", "hop"].choose(rng).unwrap().to_string(),
            width: f64::from(rng.gen_range(0..3)),
            height: f64::from(rng.gen_range(0..3)),
        },
        1 => Fact::Spatial {
            x: small(rng),
            y: small(rng),
        },
        2 => Fact::RelationshipX {
            target: nodes.choose(rng).unwrap().clone(),
            offset: small(rng),
        },
        3 => Fact::RelationshipY {
            target: nodes.choose(rng).unwrap().clone(),
            offset: small(rng),
        },
        4 => Fact::VelocityX { vx: small(rng) },
        5 => Fact::VelocityY { vy: small(rng) },
        6 => Fact::CameraX { x: small(rng) },
        7 => Fact::CameraY { y: small(rng) },
        _ => Fact::Random {
            seed_tag: ["p", "q"].choose(rng).unwrap().to_string(),
        },
    }
}

fn tag(rng: &mut impl Rng, prefix: &str) -> String {
    format!("{prefix}{}", rng.gen_range(0..2))
}

fn target(rng: &mut impl Rng, nodes: &[NodeId]) -> Option<NodeId> {
    if rng.gen_bool(0.5) {
        None
    } else {
        nodes.choose(rng).cloned()
    }
}

/// A valid edge of a random kind whose references point into `nodes`.
pub fn random_edge(rng: &mut impl Rng, nodes: &[NodeId]) -> Edge {
    match rng.gen_range(0..5) {
        0 => Edge::G {
            x: small(rng),
            y: small(rng),
            shape: shape(rng),
            s_id: tag(rng, "s"),
            l_id: tag(rng, "l"),
        },
        1 => Edge::D {
            dx: small(rng),
            dy: small(rng),
            probability: f64::from(rng.gen_range(0..=2)) / 2.0,
            s_id: tag(rng, "s"),
            l_id: tag(rng, "l"),
            target: nodes.choose(rng).unwrap().clone(),
        },
        2 => Edge::N {
            count: rng.gen_range(0..4),
            l_id: tag(rng, "l"),
        },
        3 => {
            let kind = rng.gen_range(0..9);
            Edge::RuleCondition {
                fact: random_fact(rng, nodes, kind),
                rule_id: tag(rng, "r"),
                target: target(rng, nodes),
            }
        }
        _ => {
            let kind = rng.gen_range(0..9);
            Edge::RuleEffect {
                pre: random_fact(rng, nodes, kind),
                post: random_fact(rng, nodes, kind),
                rule_id: tag(rng, "r"),
                target: target(rng, nodes),
            }
        }
    }
}

/// A graph of 1..=`max_nodes` nodes, each owning 0..=`max_edges` edges.
pub fn random_graph(rng: &mut impl Rng, name: &str, max_nodes: usize, max_edges: usize) -> GameGraph {
    let count = rng.gen_range(1..=max_nodes.min(IDS.len()));
    let ids: Vec<NodeId> = IDS[..count].iter().map(|&s| NodeId::from(s)).collect();
    let nodes = ids.iter().map(|id| SpriteNode::new(id.clone(), "sprite")).collect();
    let mut edges = Vec::new();
    for id in &ids {
        for _ in 0..rng.gen_range(0..=max_edges) {
            edges.push(GraphEdge::new(id.clone(), random_edge(rng, &ids)));
        }
    }
    GameGraph::new(name, nodes, edges)
}

pub fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
