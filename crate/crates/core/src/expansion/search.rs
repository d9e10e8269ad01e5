use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{materialize, Expansion, ExpansionError, Filter, Part, SourceRef};
use crate::distance::Heuristic;
use crate::graph::{GameGraph, PartialGoal};

pub const DEFAULT_NEIGHBORS: usize = 10;
pub const DEFAULT_MAX_STEPS: usize = 500;

/// Which weight moves the search may make.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum MoveSet {
    /// Real-valued weights: shift a node, scale one weight.
    #[default]
    Continuous,
    /// Weights stay in {0, 1}: both weight moves become a single flip.
    Binary,
}

/// One neighbor step. Indices refer to the expansion the move is applied to.
#[derive(Debug, Clone, PartialEq)]
pub enum Move {
    /// Append a mapped feature with its own filter.
    AddPart { node: usize, source: SourceRef, filter: Filter },
    RemovePart { node: usize, part: usize },
    /// Add `delta` to every weight of every part of a node.
    ShiftNode { node: usize, delta: f64 },
    /// Multiply a single weight by `factor`.
    ScaleWeight {
        node: usize,
        part: usize,
        index: usize,
        factor: f64,
    },
    /// Replace a single weight `w` with `1 - w`.
    FlipWeight { node: usize, part: usize, index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum MoveKind {
    AddPart,
    RemovePart,
    ShiftNode,
    ScaleWeight,
    FlipWeight,
}

impl Move {
    pub fn kind(&self) -> MoveKind {
        match self {
            Move::AddPart { .. } => MoveKind::AddPart,
            Move::RemovePart { .. } => MoveKind::RemovePart,
            Move::ShiftNode { .. } => MoveKind::ShiftNode,
            Move::ScaleWeight { .. } => MoveKind::ScaleWeight,
            Move::FlipWeight { .. } => MoveKind::FlipWeight,
        }
    }
}

fn invalid(mv: &Move) -> ExpansionError {
    ExpansionError::InvalidMove(format!("{mv:?}"))
}

impl Expansion {
    /// Returns a copy with `mv` applied. Fails if the move's indices do not
    /// fit, if it would leave a node without parts, or if an added part's
    /// filter does not match its source.
    pub fn apply(&self, mv: &Move) -> Result<Expansion, ExpansionError> {
        let mut out = self.clone();
        let nodes = out.nodes_mut();
        match mv {
            Move::AddPart { node, source, filter } => {
                let edges = self.kb.edges_of(source).ok_or_else(|| ExpansionError::UnknownSource(source.clone()))?;
                if filter.len() != super::filter_len(edges) {
                    return Err(invalid(mv));
                }
                nodes.get_mut(*node).ok_or_else(|| invalid(mv))?.parts.push(Part {
                    source: source.clone(),
                    filter: filter.clone(),
                });
            }
            Move::RemovePart { node, part } => {
                let n = nodes.get_mut(*node).ok_or_else(|| invalid(mv))?;
                if n.parts.len() < 2 || *part >= n.parts.len() {
                    return Err(invalid(mv));
                }
                n.parts.remove(*part);
            }
            Move::ShiftNode { node, delta } => {
                let n = nodes.get_mut(*node).ok_or_else(|| invalid(mv))?;
                for p in &mut n.parts {
                    for w in p.filter.weights_mut() {
                        *w += delta;
                    }
                }
            }
            Move::ScaleWeight {
                node,
                part,
                index,
                factor,
            } => {
                *weight_mut(nodes, *node, *part, *index).ok_or_else(|| invalid(mv))? *= factor;
            }
            Move::FlipWeight { node, part, index } => {
                let w = weight_mut(nodes, *node, *part, *index).ok_or_else(|| invalid(mv))?;
                *w = 1.0 - *w;
            }
        }
        Ok(out)
    }
}

fn weight_mut(nodes: &mut [super::ExpandedNode], node: usize, part: usize, index: usize) -> Option<&mut f64> {
    nodes
        .get_mut(node)?
        .parts
        .get_mut(part)?
        .filter
        .weights_mut()
        .get_mut(index)
}

/// Draws a neighbor move. The four move slots (add a part, remove a part,
/// shift a node, scale a weight) are equally likely; a slot with no legal
/// move in `e` is redrawn. Under [`MoveSet::Binary`] the two weight slots
/// both flip one weight chosen uniformly over the whole expansion, and added
/// parts get random {0, 1} weights instead of uniform `[0, 1)` ones.
pub fn sample_move<R: Rng + ?Sized>(e: &Expansion, moves: MoveSet, rng: &mut R) -> Move {
    let kb = e.knowledge_base();
    let nodes = e.nodes();
    loop {
        match rng.gen_range(0..4) {
            0 => {
                let node = rng.gen_range(0..nodes.len());
                let pick = rng.gen_range(0..kb.node_count());
                let source = kb.sources().nth(pick).expect("index below node count");
                let len = super::filter_len(kb.edges_of(&source).unwrap_or_default());
                let weights = (0..len)
                    .map(|_| match moves {
                        MoveSet::Continuous => rng.gen::<f64>(),
                        MoveSet::Binary => f64::from(u8::from(rng.gen_bool(0.5))),
                    })
                    .collect();
                return Move::AddPart {
                    node,
                    source,
                    filter: Filter::new(weights),
                };
            }
            1 => {
                let eligible: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i].parts.len() >= 2).collect();
                if eligible.is_empty() {
                    continue;
                }
                let node = eligible[rng.gen_range(0..eligible.len())];
                let part = rng.gen_range(0..nodes[node].parts.len());
                return Move::RemovePart { node, part };
            }
            slot => match moves {
                MoveSet::Binary => {
                    let total = e.weights().count();
                    if total == 0 {
                        continue;
                    }
                    let (node, part, index) = locate(e, rng.gen_range(0..total));
                    return Move::FlipWeight { node, part, index };
                }
                MoveSet::Continuous => {
                    let eligible: Vec<usize> = (0..nodes.len())
                        .filter(|&i| nodes[i].parts.iter().any(|p| !p.filter.is_empty()))
                        .collect();
                    if eligible.is_empty() {
                        continue;
                    }
                    let node = eligible[rng.gen_range(0..eligible.len())];
                    if slot == 2 {
                        let delta = rng.gen_range(-2.0..=2.0);
                        return Move::ShiftNode { node, delta };
                    }
                    let parts: Vec<usize> = (0..nodes[node].parts.len())
                        .filter(|&p| !nodes[node].parts[p].filter.is_empty())
                        .collect();
                    let part = parts[rng.gen_range(0..parts.len())];
                    let index = rng.gen_range(0..nodes[node].parts[part].filter.len());
                    let factor = rng.gen_range(-2.0..=2.0);
                    return Move::ScaleWeight {
                        node,
                        part,
                        index,
                        factor,
                    };
                }
            },
        }
    }
}

/// `(node, part, index)` of the `flat`-th weight in [`Expansion::weights`] order.
fn locate(e: &Expansion, mut flat: usize) -> (usize, usize, usize) {
    for (ni, n) in e.nodes().iter().enumerate() {
        for (pi, p) in n.parts.iter().enumerate() {
            if flat < p.filter.len() {
                return (ni, pi, flat);
            }
            flat -= p.filter.len();
        }
    }
    unreachable!("flat index is below the weight count")
}

pub fn neighbor_with<R: Rng + ?Sized>(e: &Expansion, moves: MoveSet, rng: &mut R) -> (Expansion, Move) {
    let mv = sample_move(e, moves, rng);
    let next = e.apply(&mv).expect("sampled moves are always legal");
    (next, mv)
}

/// A random neighbor under the continuous move set. `e` is left untouched.
pub fn neighbor<R: Rng + ?Sized>(e: &Expansion, rng: &mut R) -> Expansion {
    neighbor_with(e, MoveSet::Continuous, rng).0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClimbConfig {
    pub neighbors_per_step: usize,
    pub max_steps: usize,
    pub moves: MoveSet,
}

impl Default for ClimbConfig {
    fn default() -> Self {
        Self {
            neighbors_per_step: DEFAULT_NEIGHBORS,
            max_steps: DEFAULT_MAX_STEPS,
            moves: MoveSet::Continuous,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClimbOutcome {
    pub expansion: Expansion,
    /// `expansion`, materialized.
    pub graph: GameGraph,
    /// Heuristic value of the start expansion.
    pub initial: f64,
    /// Heuristic value of the current expansion after each step.
    pub trace: Vec<f64>,
}

impl ClimbOutcome {
    pub fn final_value(&self) -> f64 {
        self.trace.last().copied().unwrap_or(self.initial)
    }

    pub fn steps(&self) -> usize {
        self.trace.len()
    }
}

/// What the climber saw at one step, before deciding whether to move.
pub struct StepView<'a> {
    pub step: usize,
    pub current: &'a Expansion,
    pub current_value: f64,
    pub neighbors: &'a [Expansion],
    pub values: &'a [f64],
}

/// Greedy hill-climbing: each step samples `neighbors_per_step` neighbors and
/// moves to the best one only if it strictly improves on the current value;
/// otherwise the search stops. At most `max_steps` steps are taken.
pub fn hill_climb<R: Rng + ?Sized>(
    start: Expansion,
    goal: &PartialGoal,
    h: &dyn Heuristic,
    config: &ClimbConfig,
    rng: &mut R,
) -> ClimbOutcome {
    hill_climb_observed(start, goal, h, config, rng, &mut |_| {})
}

pub fn hill_climb_observed<R: Rng + ?Sized>(
    start: Expansion,
    goal: &PartialGoal,
    h: &dyn Heuristic,
    config: &ClimbConfig,
    rng: &mut R,
    observer: &mut dyn FnMut(&StepView<'_>),
) -> ClimbOutcome {
    let evaluate = |e: &Expansion| h.graph_distance(goal, &materialize(e));
    let mut current = start;
    let mut value = evaluate(&current);
    let initial = value;
    let mut trace = Vec::new();

    for step in 0..config.max_steps.max(1) {
        if value <= 0.0 {
            observer(&StepView {
                step,
                current: &current,
                current_value: value,
                neighbors: &[],
                values: &[],
            });
            trace.push(value);
            break;
        }
        // Draws happen before the parallel evaluation so the outcome does not
        // depend on scheduling.
        let mut neighbors: Vec<Expansion> = (0..config.neighbors_per_step)
            .map(|_| neighbor_with(&current, config.moves, rng).0)
            .collect();
        let values: Vec<f64> = neighbors.par_iter().map(evaluate).collect();
        observer(&StepView {
            step,
            current: &current,
            current_value: value,
            neighbors: &neighbors,
            values: &values,
        });
        let best = values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, &v)| (i, v));
        match best {
            Some((i, v)) if v < value => {
                current = neighbors.swap_remove(i);
                value = v;
                trace.push(value);
                log::debug!("step {step}: h = {value:.6}");
            }
            _ => {
                trace.push(value);
                break;
            }
        }
    }

    let graph = materialize(&current);
    ClimbOutcome {
        expansion: current,
        graph,
        initial,
        trace,
    }
}
