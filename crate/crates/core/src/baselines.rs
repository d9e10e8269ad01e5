//! Comparison methods: nearest knowledge-base graph, binary-weight blending
//! and a genetic algorithm over whole graphs.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rayon::prelude::*;

use crate::distance::Heuristic;
use crate::expansion::{
    binary_rank_weight, hill_climb_observed, map_expansion_with, ClimbConfig, ClimbOutcome, ExpansionError,
    KnowledgeBase, MoveSet, StepView,
};
use crate::graph::{GameGraph, GraphEdge, NodeId, PartialGoal, ShapeMatrix, SlotKey, SlotMut, SlotRef};

pub const GA_POPULATION: usize = 10;
pub const GA_ELITES: usize = 2;
pub const GA_MUTATION_RATE: f64 = 0.3;
pub const DEFAULT_GENERATIONS: usize = 100;
/// Mutated copies of each knowledge-base graph in the first generation.
const GA_SEED_MUTANTS: usize = 4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BaselineError {
    #[error("knowledge base is empty")]
    EmptyKnowledgeBase,
    #[error("genetic search needs exactly 2 knowledge-base graphs, got {0}")]
    WrongKbSize(usize),
    #[error(transparent)]
    Expansion(#[from] ExpansionError),
}

/// The knowledge-base graph nearest to `goal`. Ties go to the smallest name.
pub fn knn_select<'a>(kb: &'a [GameGraph], goal: &PartialGoal, h: &dyn Heuristic) -> Result<&'a GameGraph, BaselineError> {
    let mut ordered: Vec<&GameGraph> = kb.iter().collect();
    ordered.sort_by(|a, b| a.name().cmp(b.name()));
    let mut best: Option<(f64, &GameGraph)> = None;
    for g in ordered {
        let d = h.graph_distance(goal, g);
        if best.is_none_or(|(b, _)| d < b) {
            best = Some((d, g));
        }
    }
    best.map(|(_, g)| g).ok_or(BaselineError::EmptyKnowledgeBase)
}

/// Expansion search restricted to {0, 1} weights: binary rank mapping and
/// weight flips in place of shifting and scaling.
pub fn blend_search<R: Rng + ?Sized>(
    goal: &PartialGoal,
    kb: Arc<KnowledgeBase>,
    h: &dyn Heuristic,
    parts: usize,
    config: &ClimbConfig,
    rng: &mut R,
) -> Result<ClimbOutcome, BaselineError> {
    blend_search_observed(goal, kb, h, parts, config, rng, &mut |_| {})
}

pub fn blend_search_observed<R: Rng + ?Sized>(
    goal: &PartialGoal,
    kb: Arc<KnowledgeBase>,
    h: &dyn Heuristic,
    parts: usize,
    config: &ClimbConfig,
    rng: &mut R,
    observer: &mut dyn FnMut(&StepView<'_>),
) -> Result<ClimbOutcome, BaselineError> {
    let start = map_expansion_with(goal, kb, h, parts, binary_rank_weight)?;
    let config = ClimbConfig {
        moves: MoveSet::Binary,
        ..*config
    };
    Ok(hill_climb_observed(start, goal, h, &config, rng, observer))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GAIndividual {
    pub graph: GameGraph,
    /// Heuristic distance to the goal; lower is fitter.
    pub fitness: f64,
}

#[derive(Debug, Clone)]
pub struct GaOutcome {
    /// Fittest individual seen in any generation.
    pub best: GAIndividual,
    /// Best-ever fitness after each generation.
    pub trace: Vec<f64>,
}

impl GaOutcome {
    pub fn generations(&self) -> usize {
        self.trace.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum SlotValue {
    Num(u64),
    Count(u64),
    Text(String),
    Shape(ShapeMatrix),
    Node(NodeId),
    OptNode(Option<NodeId>),
}

impl SlotValue {
    fn of(slot: &SlotRef<'_>) -> Self {
        match *slot {
            // Bit pattern, so values can be compared and deduplicated.
            SlotRef::Num(v) => SlotValue::Num(v.to_bits()),
            SlotRef::Count(v) => SlotValue::Count(*v),
            SlotRef::Text(v) => SlotValue::Text(v.clone()),
            SlotRef::Shape(v) => SlotValue::Shape(v.clone()),
            SlotRef::Node(v) => SlotValue::Node(v.clone()),
            SlotRef::OptNode(v) => SlotValue::OptNode(v.clone()),
        }
    }

    fn store(self, slot: SlotMut<'_>) {
        match (slot, self) {
            (SlotMut::Num(s), SlotValue::Num(v)) => *s = f64::from_bits(v),
            (SlotMut::Count(s), SlotValue::Count(v)) => *s = v,
            (SlotMut::Text(s), SlotValue::Text(v)) => *s = v,
            (SlotMut::Shape(s), SlotValue::Shape(v)) => *s = v,
            (SlotMut::Node(s), SlotValue::Node(v)) => *s = v,
            (SlotMut::OptNode(s), SlotValue::OptNode(v)) => *s = v,
            _ => unreachable!("slot keys fix the value type"),
        }
    }
}

/// Changes one edge value to a different value found in the same slot of some
/// other edge of `graph`. Rule ids are never changed, so rules stay intact.
/// Returns `None` when no slot has an alternative.
pub fn mutate<R: Rng + ?Sized>(graph: &GameGraph, rng: &mut R) -> Option<GameGraph> {
    let mut pool: BTreeMap<SlotKey, Vec<SlotValue>> = BTreeMap::new();
    let mut sites: Vec<(usize, usize, SlotKey)> = Vec::new();
    for (ei, e) in graph.edges().iter().enumerate() {
        for (si, (key, slot)) in e.edge.slots().into_iter().enumerate() {
            if key.field == "ruleId" {
                continue;
            }
            let value = SlotValue::of(&slot);
            let values = pool.entry(key).or_default();
            if !values.contains(&value) {
                values.push(value);
            }
            sites.push((ei, si, key));
        }
    }
    // Only slots whose key holds at least two distinct values can change.
    let mutable: Vec<&(usize, usize, SlotKey)> = sites.iter().filter(|s| pool[&s.2].len() >= 2).collect();
    let &&(ei, si, key) = mutable.choose(rng)?;
    let (_, nodes, mut edges) = graph.clone().into_parts();
    let current = SlotValue::of(&edges[ei].edge.slots()[si].1);
    let choices: Vec<&SlotValue> = pool[&key].iter().filter(|v| **v != current).collect();
    let value = (*choices.choose(rng).expect("at least two distinct values")).clone();
    let (_, slot) = edges[ei].edge.slots_mut().swap_remove(si);
    value.store(slot);
    Some(GameGraph::new(graph.name(), nodes, edges))
}

/// Child of `a` and `b`: a random half (rounded up) of `a`'s nodes, then a
/// random half (rounded down) of `b`'s nodes, skipping ids already taken. If
/// too few of `b`'s ids are free, all free ones are taken. Each node keeps
/// the edges it owns in its parent; edges naming a node the child lacks are
/// dropped.
pub fn crossover<R: Rng + ?Sized>(a: &GameGraph, b: &GameGraph, rng: &mut R) -> GameGraph {
    let mut nodes = Vec::new();
    let mut edges: Vec<GraphEdge> = Vec::new();
    let mut taken = BTreeSet::new();

    let take_a = a.nodes().len().div_ceil(2);
    for i in rand::seq::index::sample(rng, a.nodes().len(), take_a).into_vec() {
        let n = &a.nodes()[i];
        taken.insert(n.id.clone());
        nodes.push(n.clone());
        edges.extend_from_slice(a.edges_of(&n.id));
    }
    let free: Vec<usize> = (0..b.nodes().len()).filter(|&i| !taken.contains(&b.nodes()[i].id)).collect();
    let take_b = (b.nodes().len() / 2).min(free.len());
    for i in rand::seq::index::sample(rng, free.len(), take_b).into_vec() {
        let n = &b.nodes()[free[i]];
        taken.insert(n.id.clone());
        nodes.push(n.clone());
        edges.extend_from_slice(b.edges_of(&n.id));
    }
    edges.retain(|e| e.edge.node_refs().into_iter().all(|r| taken.contains(r)));
    GameGraph::new(a.name(), nodes, edges)
}

fn evaluate(graphs: Vec<GameGraph>, goal: &PartialGoal, h: &dyn Heuristic) -> Vec<GAIndividual> {
    graphs
        .into_par_iter()
        .map(|graph| GAIndividual {
            fitness: h.graph_distance(goal, &graph),
            graph,
        })
        .collect()
}

/// Genetic search over two knowledge-base graphs. Fitness is the heuristic
/// itself. Each generation keeps the two fittest individuals and breeds the
/// rest by crossover of parents drawn with probability proportional to
/// `1 - fitness`, mutating each child with probability 0.3.
pub fn ga_search<R: Rng + ?Sized>(
    kb: &[GameGraph],
    goal: &PartialGoal,
    h: &dyn Heuristic,
    max_generations: usize,
    rng: &mut R,
) -> Result<GaOutcome, BaselineError> {
    ga_search_observed(kb, goal, h, max_generations, rng, &mut |_, _| {})
}

pub fn ga_search_observed<R: Rng + ?Sized>(
    kb: &[GameGraph],
    goal: &PartialGoal,
    h: &dyn Heuristic,
    max_generations: usize,
    rng: &mut R,
    observer: &mut dyn FnMut(usize, &[GAIndividual]),
) -> Result<GaOutcome, BaselineError> {
    if kb.len() != 2 {
        return Err(BaselineError::WrongKbSize(kb.len()));
    }
    let mut initial: Vec<GameGraph> = kb.to_vec();
    for parent in kb {
        for _ in 0..GA_SEED_MUTANTS {
            initial.push(mutate(parent, rng).unwrap_or_else(|| parent.clone()));
        }
    }
    let mut population = evaluate(initial, goal, h);
    let mut best: Option<GAIndividual> = None;
    let mut trace = Vec::new();

    for generation in 0..max_generations.max(1) {
        observer(generation, &population);
        population.sort_by(|x, y| x.fitness.total_cmp(&y.fitness));
        if best.as_ref().is_none_or(|b| population[0].fitness < b.fitness) {
            best = Some(population[0].clone());
        }
        let best_fitness = best.as_ref().map_or(1.0, |b| b.fitness);
        trace.push(best_fitness);
        log::debug!("generation {generation}: best {best_fitness:.6}");
        if best_fitness <= 0.0 || generation + 1 >= max_generations {
            break;
        }

        let weights: Vec<f64> = population.iter().map(|i| (1.0 - i.fitness).max(0.0)).collect();
        let pick = WeightedIndex::new(&weights).ok();
        let parent = |rng: &mut R| match &pick {
            Some(w) => w.sample(rng),
            None => rng.gen_range(0..population.len()),
        };
        let mut children = Vec::with_capacity(GA_POPULATION - GA_ELITES);
        for _ in 0..GA_POPULATION - GA_ELITES {
            let (pa, pb) = (parent(rng), parent(rng));
            let mut child = crossover(&population[pa].graph, &population[pb].graph, rng);
            if rng.gen_bool(GA_MUTATION_RATE) {
                if let Some(m) = mutate(&child, rng) {
                    child = m;
                }
            }
            children.push(child);
        }
        let mut next: Vec<GAIndividual> = population.drain(..GA_ELITES).collect();
        next.extend(evaluate(children, goal, h));
        population = next;
    }

    Ok(GaOutcome {
        best: best.expect("at least one generation runs"),
        trace,
    })
}

#[cfg(test)]
mod tests {
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::distance::Chamfer;
    use crate::graph::{validate, Edge, GoalScope, SpriteNode};

    fn graph(name: &str, prefix: &str, counts: &[u64]) -> GameGraph {
        let nodes = (0..counts.len()).map(|i| SpriteNode::new(format!("{prefix}{i}"), "S")).collect();
        let edges = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                GraphEdge::new(
                    format!("{prefix}{i}"),
                    Edge::N {
                        count: c,
                        l_id: "l".into(),
                    },
                )
            })
            .collect();
        GameGraph::new(name, nodes, edges)
    }

    #[test]
    fn knn_ties_go_to_smallest_name() {
        let a = graph("b", "n", &[1]);
        let b = graph("a", "n", &[1]);
        let goal = PartialGoal::full(graph("g", "n", &[1]));
        assert_eq!(knn_select(&[a, b], &goal, &Chamfer).unwrap().name(), "a");
        assert_eq!(knn_select(&[], &goal, &Chamfer), Err(BaselineError::EmptyKnowledgeBase));
    }

    #[test]
    fn mutation_changes_exactly_one_value() {
        let g = graph("g", "n", &[1, 5, 9]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let m = mutate(&g, &mut rng).unwrap();
            let before: BTreeSet<u64> = [1, 5, 9].into();
            let after: Vec<u64> = m
                .edges()
                .iter()
                .map(|e| match e.edge {
                    Edge::N { count, .. } => count,
                    _ => unreachable!(),
                })
                .collect();
            let changed = after.iter().zip([1, 5, 9]).filter(|(a, b)| **a != *b).count();
            assert_eq!(changed, 1);
            assert!(after.iter().all(|c| before.contains(c)));
        }
        assert!(mutate(&graph("g", "n", &[2, 2]), &mut rng).is_none());
    }

    #[test]
    fn crossover_sizes() {
        let a = graph("a", "a", &[1, 2, 3, 4, 5]);
        let b = graph("b", "b", &[1, 2, 3]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let c = crossover(&a, &b, &mut rng);
            assert_eq!(c.nodes().len(), 3 + 1);
            assert!(validate(&c).is_empty());
        }
    }

    #[test]
    fn ga_keeps_population_and_monotone_trace() {
        let a = graph("a", "n", &[1, 2, 3, 4]);
        let b = graph("b", "n", &[7, 8, 9]);
        let goal = PartialGoal::new(graph("g", "n", &[3, 9, 1]), GoalScope::DesignOnly).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut sizes = Vec::new();
        let out = ga_search_observed(&[a, b], &goal, &Chamfer, 30, &mut rng, &mut |_, p| sizes.push(p.len())).unwrap();
        assert!(sizes.iter().all(|&s| s == GA_POPULATION));
        assert_eq!(sizes.len(), out.generations());
        assert!(out.generations() <= 30);
        assert!(out.trace.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(out.best.fitness, *out.trace.last().unwrap());
        assert!(matches!(
            ga_search(&[graph("a", "n", &[1])], &goal, &Chamfer, 5, &mut rng),
            Err(BaselineError::WrongKbSize(1))
        ));
    }
}
