use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;

use super::{Edge, FactKind, GameGraph, NodeId, SlotRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Severity {
    Error,
    /// Reported but does not stop a graph from loading.
    Warning,
}

/// A broken graph invariant. Edge loci are indices into [`GameGraph::edges`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "violation")]
pub enum Violation {
    EmptyNodeId { node: usize },
    DuplicateNodeId { id: NodeId },
    UnknownOwner { edge: usize, owner: NodeId },
    DanglingTarget { edge: usize, target: NodeId },
    ProbabilityOutOfRange { edge: usize, value: f64 },
    NegativeSize { edge: usize, value: f64 },
    MalformedShape { edge: usize, rows: u32, cols: u32, cells: usize },
    NonFiniteValue { edge: usize },
    EffectKindMismatch { edge: usize, pre: FactKind, post: FactKind },
    RuleWithoutCondition { rule_id: String },
    RuleWithoutEffect { rule_id: String },
}

impl Violation {
    pub fn severity(&self) -> Severity {
        match self {
            Violation::RuleWithoutCondition { .. } | Violation::RuleWithoutEffect { .. } => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyNodeId { node } => write!(f, "node #{node} has an empty id"),
            Violation::DuplicateNodeId { id } => write!(f, "node id `{id}` appears more than once"),
            Violation::UnknownOwner { edge, owner } => write!(f, "edge #{edge} is owned by unknown node `{owner}`"),
            Violation::DanglingTarget { edge, target } => write!(f, "edge #{edge} targets unknown node `{target}`"),
            Violation::ProbabilityOutOfRange { edge, value } => {
                write!(f, "edge #{edge} has probability {value} outside [0, 1]")
            }
            Violation::NegativeSize { edge, value } => write!(f, "edge #{edge} has negative animation size {value}"),
            Violation::MalformedShape { edge, rows, cols, cells } => {
                write!(f, "edge #{edge} has a {rows}x{cols} shape with {cells} cells")
            }
            Violation::NonFiniteValue { edge } => write!(f, "edge #{edge} holds a non-finite number"),
            Violation::EffectKindMismatch { edge, pre, post } => {
                write!(f, "effect edge #{edge} replaces a {pre} fact with a {post} fact")
            }
            Violation::RuleWithoutCondition { rule_id } => write!(f, "rule `{rule_id}` has an effect but no condition"),
            Violation::RuleWithoutEffect { rule_id } => write!(f, "rule `{rule_id}` has a condition but no effect"),
        }
    }
}

/// Checks every graph invariant. An empty result means the graph is valid;
/// otherwise there is one entry per violation.
pub fn validate(graph: &GameGraph) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut seen = HashSet::new();
    let mut reported = BTreeSet::new();
    for (i, n) in graph.nodes().iter().enumerate() {
        if n.id.as_str().is_empty() {
            out.push(Violation::EmptyNodeId { node: i });
        }
        if !seen.insert(&n.id) && reported.insert(&n.id) {
            out.push(Violation::DuplicateNodeId { id: n.id.clone() });
        }
    }

    let mut cond_rules = BTreeSet::new();
    let mut effect_rules = BTreeSet::new();
    for (i, e) in graph.edges().iter().enumerate() {
        if !seen.contains(&e.owner) {
            out.push(Violation::UnknownOwner {
                edge: i,
                owner: e.owner.clone(),
            });
        }
        for target in e.edge.node_refs() {
            if !seen.contains(target) {
                out.push(Violation::DanglingTarget {
                    edge: i,
                    target: target.clone(),
                });
            }
        }
        check_payload(i, &e.edge, &mut out);
        match &e.edge {
            Edge::RuleCondition { rule_id, .. } => {
                cond_rules.insert(rule_id.as_str());
            }
            Edge::RuleEffect { rule_id, .. } => {
                effect_rules.insert(rule_id.as_str());
            }
            _ => {}
        }
    }

    for r in effect_rules.difference(&cond_rules) {
        out.push(Violation::RuleWithoutCondition { rule_id: r.to_string() });
    }
    for r in cond_rules.difference(&effect_rules) {
        out.push(Violation::RuleWithoutEffect { rule_id: r.to_string() });
    }
    out
}

fn check_payload(i: usize, edge: &Edge, out: &mut Vec<Violation>) {
    let finite = edge.slots().iter().all(|(_, v)| match v {
        SlotRef::Num(x) => x.is_finite(),
        _ => true,
    });
    if !finite {
        out.push(Violation::NonFiniteValue { edge: i });
    }
    match edge {
        Edge::G { shape, .. } if !shape.is_well_formed() => out.push(Violation::MalformedShape {
            edge: i,
            rows: shape.rows,
            cols: shape.cols,
            cells: shape.cells.len(),
        }),
        Edge::D { probability, .. } if !(0.0..=1.0).contains(probability) => {
            out.push(Violation::ProbabilityOutOfRange {
                edge: i,
                value: *probability,
            })
        }
        Edge::RuleEffect { pre, post, .. } if pre.kind() != post.kind() => out.push(Violation::EffectKindMismatch {
            edge: i,
            pre: pre.kind(),
            post: post.kind(),
        }),
        _ => {}
    }
    for (key, v) in edge.slots() {
        if let SlotRef::Num(x) = v {
            if (key.field == "width" || key.field == "height") && *x < 0.0 {
                out.push(Violation::NegativeSize { edge: i, value: *x });
            }
        }
    }
}
