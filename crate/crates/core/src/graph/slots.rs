//! Flat view of an edge payload as an ordered list of value slots.
//!
//! Slot order is fixed per edge kind (and per fact kind for rule edges).
//! Filters, materialization and the GA mutation operator all address edge
//! values through this view.

use std::fmt;

use super::{Edge, EdgeKind, Fact, FactKind, NodeId, ShapeMatrix};

/// Where a fact sits inside a rule edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FactRole {
    None,
    Condition,
    Pre,
    Post,
}

/// Type-stable name of a slot. Two slots with equal keys hold values of the
/// same type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlotKey {
    pub edge: EdgeKind,
    pub role: FactRole,
    pub fact: Option<FactKind>,
    pub field: &'static str,
}

impl fmt::Display for SlotKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.edge.tag())?;
        match self.role {
            FactRole::None => {}
            FactRole::Condition => f.write_str(".fact")?,
            FactRole::Pre => f.write_str(".pre")?,
            FactRole::Post => f.write_str(".post")?,
        }
        if let Some(k) = self.fact {
            write!(f, ".{k}")?;
        }
        write!(f, ".{}", self.field)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotClass {
    /// Scaled by its filter weight.
    Numeric,
    /// Kept or replaced whole.
    Categorical,
    /// Categorical, and names a node that must be remapped.
    NodeRef,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlotRef<'a> {
    Num(&'a f64),
    Count(&'a u64),
    Text(&'a String),
    Shape(&'a ShapeMatrix),
    Node(&'a NodeId),
    /// `None` is a self-target.
    OptNode(&'a Option<NodeId>),
}

impl SlotRef<'_> {
    pub fn class(&self) -> SlotClass {
        match self {
            SlotRef::Num(_) | SlotRef::Count(_) => SlotClass::Numeric,
            SlotRef::Text(_) | SlotRef::Shape(_) => SlotClass::Categorical,
            SlotRef::Node(_) | SlotRef::OptNode(_) => SlotClass::NodeRef,
        }
    }
}

#[derive(Debug)]
pub enum SlotMut<'a> {
    Num(&'a mut f64),
    Count(&'a mut u64),
    Text(&'a mut String),
    Shape(&'a mut ShapeMatrix),
    Node(&'a mut NodeId),
    OptNode(&'a mut Option<NodeId>),
}

const fn key(edge: EdgeKind, field: &'static str) -> SlotKey {
    SlotKey {
        edge,
        role: FactRole::None,
        fact: None,
        field,
    }
}

fn fact_key(edge: EdgeKind, role: FactRole, fact: FactKind, field: &'static str) -> SlotKey {
    SlotKey {
        edge,
        role,
        fact: Some(fact),
        field,
    }
}

fn fact_slots<'a>(fact: &'a Fact, edge: EdgeKind, role: FactRole, out: &mut Vec<(SlotKey, SlotRef<'a>)>) {
    let k = fact.kind();
    let mk = |field| fact_key(edge, role, k, field);
    match fact {
        Fact::Animation { name, width, height } => {
            out.push((mk("name"), SlotRef::Text(name)));
            out.push((mk("width"), SlotRef::Num(width)));
            out.push((mk("height"), SlotRef::Num(height)));
        }
        Fact::Spatial { x, y } => {
            out.push((mk("x"), SlotRef::Num(x)));
            out.push((mk("y"), SlotRef::Num(y)));
        }
        Fact::RelationshipX { target, offset } | Fact::RelationshipY { target, offset } => {
            out.push((mk("target"), SlotRef::Node(target)));
            out.push((mk("offset"), SlotRef::Num(offset)));
        }
        Fact::VelocityX { vx } => out.push((mk("vx"), SlotRef::Num(vx))),
        Fact::VelocityY { vy } => out.push((mk("vy"), SlotRef::Num(vy))),
        Fact::CameraX { x } => out.push((mk("x"), SlotRef::Num(x))),
        Fact::CameraY { y } => out.push((mk("y"), SlotRef::Num(y))),
        Fact::Random { seed_tag } => out.push((mk("seedTag"), SlotRef::Text(seed_tag))),
    }
}

fn fact_slots_mut<'a>(fact: &'a mut Fact, edge: EdgeKind, role: FactRole, out: &mut Vec<(SlotKey, SlotMut<'a>)>) {
    let k = fact.kind();
    let mk = |field| fact_key(edge, role, k, field);
    match fact {
        Fact::Animation { name, width, height } => {
            out.push((mk("name"), SlotMut::Text(name)));
            out.push((mk("width"), SlotMut::Num(width)));
            out.push((mk("height"), SlotMut::Num(height)));
        }
        Fact::Spatial { x, y } => {
            out.push((mk("x"), SlotMut::Num(x)));
            out.push((mk("y"), SlotMut::Num(y)));
        }
        Fact::RelationshipX { target, offset } | Fact::RelationshipY { target, offset } => {
            out.push((mk("target"), SlotMut::Node(target)));
            out.push((mk("offset"), SlotMut::Num(offset)));
        }
        Fact::VelocityX { vx } => out.push((mk("vx"), SlotMut::Num(vx))),
        Fact::VelocityY { vy } => out.push((mk("vy"), SlotMut::Num(vy))),
        Fact::CameraX { x } => out.push((mk("x"), SlotMut::Num(x))),
        Fact::CameraY { y } => out.push((mk("y"), SlotMut::Num(y))),
        Fact::Random { seed_tag } => out.push((mk("seedTag"), SlotMut::Text(seed_tag))),
    }
}

impl Edge {
    /// All payload values in slot order.
    pub fn slots(&self) -> Vec<(SlotKey, SlotRef<'_>)> {
        let kind = self.kind();
        let mut out = Vec::with_capacity(8);
        match self {
            Edge::G {
                x,
                y,
                shape,
                s_id,
                l_id,
            } => {
                out.push((key(kind, "x"), SlotRef::Num(x)));
                out.push((key(kind, "y"), SlotRef::Num(y)));
                out.push((key(kind, "shape"), SlotRef::Shape(shape)));
                out.push((key(kind, "sId"), SlotRef::Text(s_id)));
                out.push((key(kind, "lId"), SlotRef::Text(l_id)));
            }
            Edge::D {
                dx,
                dy,
                probability,
                s_id,
                l_id,
                target,
            } => {
                out.push((key(kind, "dx"), SlotRef::Num(dx)));
                out.push((key(kind, "dy"), SlotRef::Num(dy)));
                out.push((key(kind, "probability"), SlotRef::Num(probability)));
                out.push((key(kind, "sId"), SlotRef::Text(s_id)));
                out.push((key(kind, "lId"), SlotRef::Text(l_id)));
                out.push((key(kind, "target"), SlotRef::Node(target)));
            }
            Edge::N { count, l_id } => {
                out.push((key(kind, "count"), SlotRef::Count(count)));
                out.push((key(kind, "lId"), SlotRef::Text(l_id)));
            }
            Edge::RuleCondition { fact, rule_id, target } => {
                fact_slots(fact, kind, FactRole::Condition, &mut out);
                out.push((key(kind, "ruleId"), SlotRef::Text(rule_id)));
                out.push((key(kind, "target"), SlotRef::OptNode(target)));
            }
            Edge::RuleEffect {
                pre,
                post,
                rule_id,
                target,
            } => {
                fact_slots(pre, kind, FactRole::Pre, &mut out);
                fact_slots(post, kind, FactRole::Post, &mut out);
                out.push((key(kind, "ruleId"), SlotRef::Text(rule_id)));
                out.push((key(kind, "target"), SlotRef::OptNode(target)));
            }
        }
        out
    }

    /// Mutable counterpart of [`Edge::slots`], same order.
    pub fn slots_mut(&mut self) -> Vec<(SlotKey, SlotMut<'_>)> {
        let kind = self.kind();
        let mut out = Vec::with_capacity(8);
        match self {
            Edge::G {
                x,
                y,
                shape,
                s_id,
                l_id,
            } => {
                out.push((key(kind, "x"), SlotMut::Num(x)));
                out.push((key(kind, "y"), SlotMut::Num(y)));
                out.push((key(kind, "shape"), SlotMut::Shape(shape)));
                out.push((key(kind, "sId"), SlotMut::Text(s_id)));
                out.push((key(kind, "lId"), SlotMut::Text(l_id)));
            }
            Edge::D {
                dx,
                dy,
                probability,
                s_id,
                l_id,
                target,
            } => {
                out.push((key(kind, "dx"), SlotMut::Num(dx)));
                out.push((key(kind, "dy"), SlotMut::Num(dy)));
                out.push((key(kind, "probability"), SlotMut::Num(probability)));
                out.push((key(kind, "sId"), SlotMut::Text(s_id)));
                out.push((key(kind, "lId"), SlotMut::Text(l_id)));
                out.push((key(kind, "target"), SlotMut::Node(target)));
            }
            Edge::N { count, l_id } => {
                out.push((key(kind, "count"), SlotMut::Count(count)));
                out.push((key(kind, "lId"), SlotMut::Text(l_id)));
            }
            Edge::RuleCondition { fact, rule_id, target } => {
                fact_slots_mut(fact, kind, FactRole::Condition, &mut out);
                out.push((key(kind, "ruleId"), SlotMut::Text(rule_id)));
                out.push((key(kind, "target"), SlotMut::OptNode(target)));
            }
            Edge::RuleEffect {
                pre,
                post,
                rule_id,
                target,
            } => {
                fact_slots_mut(pre, kind, FactRole::Pre, &mut out);
                fact_slots_mut(post, kind, FactRole::Post, &mut out);
                out.push((key(kind, "ruleId"), SlotMut::Text(rule_id)));
                out.push((key(kind, "target"), SlotMut::OptNode(target)));
            }
        }
        out
    }

    pub fn slot_count(&self) -> usize {
        let fact_len = |f: &Fact| match f {
            Fact::Animation { .. } => 3,
            Fact::Spatial { .. } | Fact::RelationshipX { .. } | Fact::RelationshipY { .. } => 2,
            _ => 1,
        };
        match self {
            Edge::G { .. } => 5,
            Edge::D { .. } => 6,
            Edge::N { .. } => 2,
            Edge::RuleCondition { fact, .. } => fact_len(fact) + 2,
            Edge::RuleEffect { pre, post, .. } => fact_len(pre) + fact_len(post) + 2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slot_count_matches_slots() {
        let edges = [
            Edge::N { count: 1, l_id: "l".into() },
            Edge::RuleEffect {
                pre: Fact::Animation {
                    name: "a".into(),
                    width: 1.0,
                    height: 1.0,
                },
                post: Fact::RelationshipY {
                    target: "b".into(),
                    offset: 2.0,
                },
                rule_id: "r".into(),
                target: None,
            },
        ];
        for mut e in edges {
            assert_eq!(e.slot_count(), e.slots().len());
            assert_eq!(e.slot_count(), e.slots_mut().len());
        }
    }

    #[test]
    fn slot_keys_render_path() {
        let e = Edge::RuleEffect {
            pre: Fact::VelocityX { vx: 0.0 },
            post: Fact::VelocityX { vx: -2.0 },
            rule_id: "r".into(),
            target: None,
        };
        let names: Vec<String> = e.slots().iter().map(|(k, _)| k.to_string()).collect();
        assert_eq!(
            names,
            ["effect.pre.VelocityX.vx", "effect.post.VelocityX.vx", "effect.ruleId", "effect.target"]
        );
    }
}
