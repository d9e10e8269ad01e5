use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{Edge, Fact, GameGraph, GraphEdge, NodeId, ShapeMatrix, SpriteNode};

const LABELS: [&str; 8] = ["Hero", "Walker", "Flyer", "Block", "Coin", "Pipe", "Spring", "Flag"];
const ANIMATIONS: [&str; 3] = ["idle", "walk", "jump"];
const PROBABILITIES: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

/// Shape of a synthetic game graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct FixtureParams {
    pub node_count: usize,
    /// Expected edges owned per fresh node, split evenly between level-design
    /// edges and rule edges.
    pub edge_density: f64,
    /// Fraction of nodes copied from the base graph, when one is given.
    pub shared_fraction: f64,
}

impl Default for FixtureParams {
    fn default() -> Self {
        Self {
            node_count: 8,
            edge_density: 4.0,
            shared_fraction: 0.5,
        }
    }
}

/// A related game triple: two knowledge-base games and a goal game, all
/// sharing nodes with a common ancestor.
#[derive(Debug, Clone)]
pub struct Triad {
    pub base: GameGraph,
    pub kb: [GameGraph; 2],
    pub goal: GameGraph,
}

/// `floor(mean)`, plus one with probability `frac(mean)`.
fn count_near<R: Rng>(rng: &mut R, mean: f64) -> usize {
    let mean = mean.max(0.0);
    let whole = mean.floor();
    whole as usize + usize::from(rng.gen_bool(mean - whole))
}

fn small(rng: &mut impl Rng, lo: i32, hi: i32) -> f64 {
    f64::from(rng.gen_range(lo..=hi))
}

fn random_shape(rng: &mut impl Rng) -> ShapeMatrix {
    let rows = rng.gen_range(1..=2);
    let cols = rng.gen_range(1..=2);
    let mut cells: Vec<bool> = (0..rows * cols).map(|_| rng.gen_bool(0.6)).collect();
    cells[0] = true;
    ShapeMatrix { rows, cols, cells }
}

fn design_edge(rng: &mut impl Rng, others: &[NodeId]) -> Edge {
    let s_id = format!("s{}", rng.gen_range(0..4));
    let l_id = format!("l{}", rng.gen_range(0..3));
    match rng.gen_range(0..3) {
        0 => Edge::G {
            x: small(rng, 0, 15),
            y: small(rng, 0, 11),
            shape: random_shape(rng),
            s_id,
            l_id,
        },
        1 if !others.is_empty() => Edge::D {
            dx: small(rng, -4, 4),
            dy: small(rng, -4, 4),
            probability: *PROBABILITIES.choose(rng).expect("non-empty"),
            s_id,
            l_id,
            target: others.choose(rng).expect("non-empty").clone(),
        },
        _ => Edge::N {
            count: rng.gen_range(1..=6),
            l_id,
        },
    }
}

fn condition_fact(rng: &mut impl Rng, others: &[NodeId]) -> Fact {
    match rng.gen_range(0..6) {
        0 => Fact::Animation {
            name: ANIMATIONS.choose(rng).expect("non-empty").to_string(),
            width: small(rng, 1, 2),
            height: small(rng, 1, 2),
        },
        1 => Fact::VelocityX { vx: small(rng, -2, 2) },
        2 => Fact::VelocityY { vy: small(rng, -2, 2) },
        3 if !others.is_empty() => Fact::RelationshipX {
            target: others.choose(rng).expect("non-empty").clone(),
            offset: small(rng, -1, 1),
        },
        4 if !others.is_empty() => Fact::RelationshipY {
            target: others.choose(rng).expect("non-empty").clone(),
            offset: small(rng, -1, 1),
        },
        _ => Fact::Random {
            seed_tag: if rng.gen_bool(0.5) { "a" } else { "b" }.into(),
        },
    }
}

fn effect_facts(rng: &mut impl Rng) -> (Fact, Fact) {
    match rng.gen_range(0..3) {
        0 => (
            Fact::VelocityX { vx: small(rng, -2, 2) },
            Fact::VelocityX { vx: small(rng, -2, 2) },
        ),
        1 => (
            Fact::VelocityY { vy: small(rng, -2, 2) },
            Fact::VelocityY { vy: small(rng, -2, 2) },
        ),
        _ => {
            let mut anim = || Fact::Animation {
                name: ANIMATIONS.choose(rng).expect("non-empty").to_string(),
                width: small(rng, 1, 2),
                height: small(rng, 1, 2),
            };
            (anim(), anim())
        }
    }
}

fn rule_target(rng: &mut impl Rng, others: &[NodeId]) -> Option<NodeId> {
    if others.is_empty() || rng.gen_bool(0.7) {
        None
    } else {
        others.choose(rng).cloned()
    }
}

/// Samples a valid synthetic game graph. With a `base`, a `shared_fraction`
/// share of the nodes are copies of base nodes (same ids, same edges); the
/// remainder are fresh. Copied edges that name an absent node are dropped,
/// along with every other edge of their rule.
pub fn generate_fixture(seed: u64, params: &FixtureParams, base: Option<&GameGraph>) -> GameGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let node_count = params.node_count.max(1);
    let base_nodes = base.map_or(&[][..], GameGraph::nodes);
    let shared = params.shared_fraction.clamp(0.0, 1.0);
    let copies = (shared * node_count.min(base_nodes.len()) as f64).round() as usize;

    let mut picked = index::sample(&mut rng, base_nodes.len(), copies).into_vec();
    picked.sort_unstable();
    let mut nodes: Vec<SpriteNode> = picked.iter().map(|&i| base_nodes[i].clone()).collect();
    let reserved: BTreeSet<&NodeId> = base_nodes.iter().map(|n| &n.id).collect();
    let mut fresh = Vec::new();
    let mut counter = 0u32;
    while nodes.len() < node_count {
        let id = NodeId::new(format!("n{:x}-{counter}", seed & 0xfff));
        counter += 1;
        if reserved.contains(&id) {
            continue;
        }
        fresh.push(id.clone());
        nodes.push(SpriteNode::new(id, *LABELS.choose(&mut rng).expect("non-empty")));
    }
    let present: BTreeSet<NodeId> = nodes.iter().map(|n| n.id.clone()).collect();

    let mut edges = Vec::new();
    let mut rule_ids = BTreeSet::new();
    if let Some(base) = base {
        let copied: BTreeSet<&NodeId> = picked.iter().map(|&i| &base_nodes[i].id).collect();
        // A rule survives only if all of its base edges do.
        let mut rule_complete: BTreeMap<&str, bool> = BTreeMap::new();
        for e in base.edges() {
            if let Some(r) = e.edge.rule_id() {
                rule_ids.insert(r.to_owned());
                let ok = copied.contains(&e.owner) && e.edge.node_refs().iter().all(|t| present.contains(*t));
                *rule_complete.entry(r).or_insert(true) &= ok;
            }
        }
        for e in base.edges().iter().filter(|e| copied.contains(&e.owner)) {
            let keep = match e.edge.rule_id() {
                Some(r) => rule_complete[r],
                None => e.edge.node_refs().iter().all(|t| present.contains(*t)),
            };
            if keep {
                edges.push(e.clone());
            }
        }
    }

    let all: Vec<NodeId> = present.iter().cloned().collect();
    let mut next_rule = 0u32;
    for owner in &fresh {
        let others: Vec<NodeId> = all.iter().filter(|n| *n != owner).cloned().collect();
        for _ in 0..count_near(&mut rng, params.edge_density / 2.0).max(1) {
            edges.push(GraphEdge::new(owner.clone(), design_edge(&mut rng, &others)));
        }
        // Each rule has one or two conditions and one effect.
        for _ in 0..count_near(&mut rng, params.edge_density / 5.0).max(1) {
            let rule_id = loop {
                let id = format!("r{next_rule}");
                next_rule += 1;
                if rule_ids.insert(id.clone()) {
                    break id;
                }
            };
            for _ in 0..rng.gen_range(1..=2) {
                let fact = condition_fact(&mut rng, &others);
                let target = rule_target(&mut rng, &others);
                edges.push(GraphEdge::new(
                    owner.clone(),
                    Edge::RuleCondition {
                        fact,
                        rule_id: rule_id.clone(),
                        target,
                    },
                ));
            }
            let (pre, post) = effect_facts(&mut rng);
            let target = rule_target(&mut rng, &others);
            edges.push(GraphEdge::new(
                owner.clone(),
                Edge::RuleEffect {
                    pre,
                    post,
                    rule_id,
                    target,
                },
            ));
        }
    }
    GameGraph::new(format!("fixture-{seed}"), nodes, edges)
}

/// Base, two knowledge-base games (`kb-a`, `kb-b`) and a goal game, each
/// derived from the base with `params.shared_fraction` overlap.
pub fn generate_triad(seed: u64, params: &FixtureParams) -> Triad {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base_params = FixtureParams {
        shared_fraction: 0.0,
        ..*params
    };
    let base = generate_fixture(rng.gen(), &base_params, None).with_name("base");
    let mut derive = |name: &str| generate_fixture(rng.gen(), params, Some(&base)).with_name(name);
    let kb = [derive("kb-a"), derive("kb-b")];
    let goal = derive("goal");
    Triad { base, kb, goal }
}
