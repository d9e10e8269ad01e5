//! Game graph data model.
//!
//! A game graph has one node per sprite and typed edges carrying the learned
//! level-design statistics (`G`, `D`, `N`) and ruleset (`cond`, `effect`).
//! Graphs are immutable once built: [`GameGraph::new`] puts nodes and edges
//! into canonical order so that structurally equal graphs compare equal and
//! serialize to identical bytes.

mod io;
mod slots;
mod validate;

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use io::{from_json_str, load, load_file, load_unchecked, save, save_file, to_canonical_json};
pub use slots::{FactRole, SlotClass, SlotKey, SlotMut, SlotRef};
pub use validate::{validate, Severity, Violation};

/// Identifier of a sprite node, unique within its graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for NodeId {
    fn from(id: &str) -> Self {
        Self(id.to_owned())
    }
}

impl From<String> for NodeId {
    fn from(id: String) -> Self {
        Self(id)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpriteNode {
    pub id: NodeId,
    pub label: String,
}

impl SpriteNode {
    pub fn new(id: impl Into<NodeId>, label: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            label: label.into(),
        }
    }
}

/// Dense row-major occupancy grid of a sprite shape.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeMatrix {
    pub rows: u32,
    pub cols: u32,
    #[serde(with = "binary_cells")]
    pub cells: Vec<bool>,
}

impl ShapeMatrix {
    /// Builds a matrix from rows of `'0'`/`'1'` characters. Any character
    /// other than `'1'` is treated as empty.
    pub fn from_rows(rows: &[&str]) -> Self {
        let cols = rows.first().map_or(0, |r| r.chars().count());
        let cells = rows
            .iter()
            .flat_map(|r| r.chars().map(|c| c == '1'))
            .collect();
        Self {
            rows: rows.len() as u32,
            cols: cols as u32,
            cells,
        }
    }

    pub fn filled(rows: u32, cols: u32) -> Self {
        Self {
            rows,
            cols,
            cells: vec![true; (rows * cols) as usize],
        }
    }

    pub fn is_well_formed(&self) -> bool {
        self.rows >= 1 && self.cols >= 1 && self.cells.len() == (self.rows * self.cols) as usize
    }

    /// Cell at `(row, col)`, or `None` outside the grid.
    pub fn get(&self, row: u32, col: u32) -> Option<bool> {
        if row < self.rows && col < self.cols {
            self.cells.get((row * self.cols + col) as usize).copied()
        } else {
            None
        }
    }
}

mod binary_cells {
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(cells: &[bool], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(cells.iter().map(|&c| u8::from(c)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        let raw = Vec::<u8>::deserialize(d)?;
        raw.into_iter()
            .map(|c| match c {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(D::Error::custom(format!("shape cell must be 0 or 1, got {other}"))),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FactKind {
    Animation,
    Spatial,
    RelationshipX,
    RelationshipY,
    VelocityX,
    VelocityY,
    CameraX,
    CameraY,
    Random,
}

impl FactKind {
    pub const ALL: [FactKind; 9] = [
        FactKind::Animation,
        FactKind::Spatial,
        FactKind::RelationshipX,
        FactKind::RelationshipY,
        FactKind::VelocityX,
        FactKind::VelocityY,
        FactKind::CameraX,
        FactKind::CameraY,
        FactKind::Random,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FactKind::Animation => "Animation",
            FactKind::Spatial => "Spatial",
            FactKind::RelationshipX => "RelationshipX",
            FactKind::RelationshipY => "RelationshipY",
            FactKind::VelocityX => "VelocityX",
            FactKind::VelocityY => "VelocityY",
            FactKind::CameraX => "CameraX",
            FactKind::CameraY => "CameraY",
            FactKind::Random => "Random",
        }
    }
}

impl fmt::Display for FactKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An atomic frame observation used in rule conditions and effects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "factKind", deny_unknown_fields)]
pub enum Fact {
    Animation { name: String, width: f64, height: f64 },
    Spatial { x: f64, y: f64 },
    RelationshipX { target: NodeId, offset: f64 },
    RelationshipY { target: NodeId, offset: f64 },
    VelocityX { vx: f64 },
    VelocityY { vy: f64 },
    CameraX { x: f64 },
    CameraY { y: f64 },
    Random {
        #[serde(rename = "seedTag")]
        seed_tag: String,
    },
}

impl Fact {
    pub fn kind(&self) -> FactKind {
        match self {
            Fact::Animation { .. } => FactKind::Animation,
            Fact::Spatial { .. } => FactKind::Spatial,
            Fact::RelationshipX { .. } => FactKind::RelationshipX,
            Fact::RelationshipY { .. } => FactKind::RelationshipY,
            Fact::VelocityX { .. } => FactKind::VelocityX,
            Fact::VelocityY { .. } => FactKind::VelocityY,
            Fact::CameraX { .. } => FactKind::CameraX,
            Fact::CameraY { .. } => FactKind::CameraY,
            Fact::Random { .. } => FactKind::Random,
        }
    }

    /// Node referenced by a relationship fact.
    pub fn node_ref(&self) -> Option<&NodeId> {
        match self {
            Fact::RelationshipX { target, .. } | Fact::RelationshipY { target, .. } => Some(target),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    G,
    D,
    N,
    RuleCondition,
    RuleEffect,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 5] = [
        EdgeKind::G,
        EdgeKind::D,
        EdgeKind::N,
        EdgeKind::RuleCondition,
        EdgeKind::RuleEffect,
    ];

    /// Tag used in the serialized form.
    pub fn tag(self) -> &'static str {
        match self {
            EdgeKind::G => "G",
            EdgeKind::D => "D",
            EdgeKind::N => "N",
            EdgeKind::RuleCondition => "cond",
            EdgeKind::RuleEffect => "effect",
        }
    }

    /// Level-design edge (`G`, `D`, `N`) as opposed to a rule edge.
    pub fn is_design(self) -> bool {
        matches!(self, EdgeKind::G | EdgeKind::D | EdgeKind::N)
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Typed edge payload. `G` and `N` edges are cyclic and have no target; rule
/// edges target another node or, when `target` is `None`, their owner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all_fields = "camelCase", deny_unknown_fields)]
pub enum Edge {
    #[serde(rename = "G")]
    G {
        x: f64,
        y: f64,
        shape: ShapeMatrix,
        s_id: String,
        l_id: String,
    },
    #[serde(rename = "D")]
    D {
        dx: f64,
        dy: f64,
        probability: f64,
        s_id: String,
        l_id: String,
        target: NodeId,
    },
    #[serde(rename = "N")]
    N { count: u64, l_id: String },
    #[serde(rename = "cond")]
    RuleCondition {
        fact: Fact,
        rule_id: String,
        target: Option<NodeId>,
    },
    #[serde(rename = "effect")]
    RuleEffect {
        pre: Fact,
        post: Fact,
        rule_id: String,
        target: Option<NodeId>,
    },
}

impl Edge {
    pub fn kind(&self) -> EdgeKind {
        match self {
            Edge::G { .. } => EdgeKind::G,
            Edge::D { .. } => EdgeKind::D,
            Edge::N { .. } => EdgeKind::N,
            Edge::RuleCondition { .. } => EdgeKind::RuleCondition,
            Edge::RuleEffect { .. } => EdgeKind::RuleEffect,
        }
    }

    pub fn rule_id(&self) -> Option<&str> {
        match self {
            Edge::RuleCondition { rule_id, .. } | Edge::RuleEffect { rule_id, .. } => Some(rule_id),
            _ => None,
        }
    }

    /// Every node id this edge refers to, other than its owner.
    pub fn node_refs(&self) -> Vec<&NodeId> {
        let mut refs = Vec::new();
        match self {
            Edge::D { target, .. } => refs.push(target),
            Edge::RuleCondition { fact, target, .. } => {
                refs.extend(fact.node_ref());
                refs.extend(target.as_ref());
            }
            Edge::RuleEffect {
                pre, post, target, ..
            } => {
                refs.extend(pre.node_ref());
                refs.extend(post.node_ref());
                refs.extend(target.as_ref());
            }
            Edge::G { .. } | Edge::N { .. } => {}
        }
        refs
    }

    /// Canonical JSON of the `{kind, payload}` pair, used for edge ordering.
    pub(crate) fn sort_key(&self) -> String {
        serde_json::to_value(self)
            .and_then(|v| serde_json::to_string(&v))
            .expect("edge payloads always serialize")
    }

    /// Rewrites negative zeros to positive zeros so equal values share one
    /// byte representation.
    pub(crate) fn normalize_zeros(&mut self) {
        for (_, slot) in self.slots_mut() {
            if let SlotMut::Num(v) = slot {
                *v += 0.0;
            }
        }
    }
}

/// An edge together with the node that owns it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub owner: NodeId,
    #[serde(flatten)]
    pub edge: Edge,
}

impl GraphEdge {
    pub fn new(owner: impl Into<NodeId>, edge: Edge) -> Self {
        Self {
            owner: owner.into(),
            edge,
        }
    }
}

/// One game's sprites plus its design and rule edges, in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameGraph {
    name: String,
    nodes: Vec<SpriteNode>,
    edges: Vec<GraphEdge>,
}

impl GameGraph {
    /// Builds a graph, sorting nodes by id and edges by
    /// `(owner, kind tag, canonical payload)`. No validation is performed;
    /// see [`validate`].
    pub fn new(name: impl Into<String>, mut nodes: Vec<SpriteNode>, mut edges: Vec<GraphEdge>) -> Self {
        nodes.sort_by(|a, b| a.id.cmp(&b.id).then_with(|| a.label.cmp(&b.label)));
        for e in &mut edges {
            e.edge.normalize_zeros();
        }
        edges.sort_by_cached_key(|e| (e.owner.clone(), e.edge.kind().tag(), e.edge.sort_key()));
        Self {
            name: name.into(),
            nodes,
            edges,
        }
    }

    pub fn empty(name: impl Into<String>) -> Self {
        Self::new(name, Vec::new(), Vec::new())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn nodes(&self) -> &[SpriteNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn node(&self, id: &NodeId) -> Option<&SpriteNode> {
        self.nodes
            .binary_search_by(|n| n.id.cmp(id))
            .ok()
            .map(|i| &self.nodes[i])
    }

    pub fn contains(&self, id: &NodeId) -> bool {
        self.node(id).is_some()
    }

    /// Edges owned by `id`, in canonical order.
    pub fn edges_of(&self, id: &NodeId) -> &[GraphEdge] {
        let start = self.edges.partition_point(|e| e.owner.cmp(id) == Ordering::Less);
        let end = self.edges.partition_point(|e| e.owner.cmp(id) != Ordering::Greater);
        &self.edges[start..end]
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Same nodes and edges, ignoring the graph name.
    pub fn same_structure(&self, other: &GameGraph) -> bool {
        self.nodes == other.nodes && self.edges == other.edges
    }

    /// Copy of this graph keeping only the edges accepted by `keep`.
    pub fn filter_edges(&self, mut keep: impl FnMut(&GraphEdge) -> bool) -> GameGraph {
        GameGraph {
            name: self.name.clone(),
            nodes: self.nodes.clone(),
            edges: self.edges.iter().filter(|e| keep(e)).cloned().collect(),
        }
    }

    pub fn into_parts(self) -> (String, Vec<SpriteNode>, Vec<GraphEdge>) {
        (self.name, self.nodes, self.edges)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GoalScope {
    DesignOnly,
    RulesOnly,
    Full,
}

impl GoalScope {
    pub fn admits(self, kind: EdgeKind) -> bool {
        match self {
            GoalScope::DesignOnly => kind.is_design(),
            GoalScope::RulesOnly => !kind.is_design(),
            GoalScope::Full => true,
        }
    }
}

/// A goal graph that may carry only part of a game's knowledge.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialGoal {
    graph: GameGraph,
    scope: GoalScope,
}

impl PartialGoal {
    pub fn new(graph: GameGraph, scope: GoalScope) -> Result<Self, GraphError> {
        if let Some(e) = graph.edges().iter().find(|e| !scope.admits(e.edge.kind())) {
            return Err(GraphError::ScopeViolation {
                scope,
                kind: e.edge.kind(),
                owner: e.owner.clone(),
            });
        }
        Ok(Self { graph, scope })
    }

    pub fn full(graph: GameGraph) -> Self {
        Self {
            graph,
            scope: GoalScope::Full,
        }
    }

    /// Narrowest scope that admits every edge of `graph`. Edge-free graphs
    /// are treated as full goals.
    pub fn infer(graph: GameGraph) -> Self {
        let kinds = graph.edges().iter().map(|e| e.edge.kind());
        let (mut design, mut rules) = (false, false);
        for k in kinds {
            if k.is_design() {
                design = true;
            } else {
                rules = true;
            }
        }
        let scope = match (design, rules) {
            (true, false) => GoalScope::DesignOnly,
            (false, true) => GoalScope::RulesOnly,
            _ => GoalScope::Full,
        };
        Self { graph, scope }
    }

    pub fn graph(&self) -> &GameGraph {
        &self.graph
    }

    pub fn scope(&self) -> GoalScope {
        self.scope
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("graph is invalid: {}", join_violations(.0))]
    Validation(Vec<Violation>),
    #[error("{scope:?} goal cannot hold the {kind} edge owned by {owner}")]
    ScopeViolation {
        scope: GoalScope,
        kind: EdgeKind,
        owner: NodeId,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g_edge(x: f64) -> Edge {
        Edge::G {
            x,
            y: 0.0,
            shape: ShapeMatrix::filled(1, 1),
            s_id: "s".into(),
            l_id: "l".into(),
        }
    }

    #[test]
    fn construction_order_does_not_matter() {
        let nodes = vec![SpriteNode::new("b", "B"), SpriteNode::new("a", "A")];
        let edges = vec![
            GraphEdge::new("b", g_edge(2.0)),
            GraphEdge::new("a", Edge::N { count: 3, l_id: "l".into() }),
            GraphEdge::new("a", g_edge(1.0)),
        ];
        let mut rev_nodes = nodes.clone();
        rev_nodes.reverse();
        let mut rev_edges = edges.clone();
        rev_edges.reverse();
        assert_eq!(GameGraph::new("g", nodes, edges), GameGraph::new("g", rev_nodes, rev_edges));
    }

    #[test]
    fn edges_of_returns_owned_slice() {
        let g = GameGraph::new(
            "g",
            vec![SpriteNode::new("a", "A"), SpriteNode::new("b", "B"), SpriteNode::new("c", "C")],
            vec![
                GraphEdge::new("a", g_edge(1.0)),
                GraphEdge::new("c", g_edge(2.0)),
                GraphEdge::new("a", g_edge(3.0)),
            ],
        );
        assert_eq!(g.edges_of(&"a".into()).len(), 2);
        assert!(g.edges_of(&"b".into()).is_empty());
        assert_eq!(g.edges_of(&"c".into()).len(), 1);
        assert!(g.edges_of(&"zzz".into()).is_empty());
    }

    #[test]
    fn negative_zero_is_normalized() {
        let a = GameGraph::new("g", vec![SpriteNode::new("a", "A")], vec![GraphEdge::new("a", g_edge(-0.0))]);
        let b = GameGraph::new("g", vec![SpriteNode::new("a", "A")], vec![GraphEdge::new("a", g_edge(0.0))]);
        assert_eq!(to_canonical_json(&a), to_canonical_json(&b));
    }

    #[test]
    fn scope_is_enforced_and_inferred() {
        let g = GameGraph::new("g", vec![SpriteNode::new("a", "A")], vec![GraphEdge::new("a", g_edge(0.0))]);
        assert!(PartialGoal::new(g.clone(), GoalScope::RulesOnly).is_err());
        assert!(PartialGoal::new(g.clone(), GoalScope::DesignOnly).is_ok());
        assert_eq!(PartialGoal::infer(g).scope(), GoalScope::DesignOnly);
        assert_eq!(PartialGoal::infer(GameGraph::empty("e")).scope(), GoalScope::Full);
    }

    #[test]
    fn shape_from_rows() {
        let s = ShapeMatrix::from_rows(&["10", "01"]);
        assert!(s.is_well_formed());
        assert_eq!(s.get(0, 0), Some(true));
        assert_eq!(s.get(0, 1), Some(false));
        assert_eq!(s.get(2, 0), None);
    }
}
