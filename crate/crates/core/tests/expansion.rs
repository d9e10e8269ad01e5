mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use common::{oracle, random_graph};
use expansion_forge::distance::{Chamfer, Heuristic};
use expansion_forge::expansion::{
    hill_climb, map_expansion, materialize, neighbor, sample_move, ClimbConfig, ExpandedNode, Expansion, Filter,
    KnowledgeBase, MoveKind, MoveSet, Part, SourceRef,
};
use expansion_forge::graph::{GameGraph, GoalScope, PartialGoal};
use expansion_forge::harness::{generate_fixture, generate_triad, project, FixtureParams};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn kb_of(graphs: Vec<GameGraph>) -> Arc<KnowledgeBase> {
    Arc::new(KnowledgeBase::new(graphs).unwrap())
}

#[test]
fn identity_and_zero_filters() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..40 {
        let g = random_graph(&mut rng, "src", 5, 5);
        let kb = kb_of(vec![g.clone()]);
        let ones = materialize(&Expansion::identity("src", kb.clone(), 1.0).unwrap());
        assert!(ones.same_structure(&g));
        let zeros = materialize(&Expansion::identity("src", kb, 0.0).unwrap());
        assert!(zeros.edges().is_empty());
        assert_eq!(zeros.nodes(), g.nodes());
    }
}

#[test]
fn move_kinds_are_uniform() {
    let t = generate_triad(2, &FixtureParams::default());
    let goal = project(&t.goal, GoalScope::DesignOnly);
    // With ten parts per node every move kind is always legal.
    let e = map_expansion(&goal, kb_of(t.kb.to_vec()), &Chamfer, 10).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut counts: BTreeMap<MoveKind, usize> = BTreeMap::new();
    let draws = 10_000;
    for _ in 0..draws {
        *counts.entry(sample_move(&e, MoveSet::Continuous, &mut rng).kind()).or_default() += 1;
    }
    assert_eq!(counts.len(), 4);
    let expected = draws as f64 / 4.0;
    let sigma = (draws as f64 * 0.25 * 0.75).sqrt();
    let mut chi2 = 0.0;
    for (kind, &c) in &counts {
        assert!((c as f64 - expected).abs() <= 3.0 * sigma, "{kind:?}: {c}");
        chi2 += (c as f64 - expected).powi(2) / expected;
    }
    // 99.9th percentile of chi-square with 3 degrees of freedom.
    assert!(chi2 < 16.27, "chi2 = {chi2}");
}

#[test]
fn neighbor_leaves_input_alone() {
    let kb = kb_of(vec![generate_fixture(3, &FixtureParams::default(), None)]);
    let name = kb.graphs()[0].name().to_owned();
    let e = Expansion::identity(&name, kb, 1.0).unwrap();
    let snapshot = e.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..100 {
        let n = neighbor(&e, &mut rng);
        assert_eq!(n.nodes().len(), e.nodes().len());
    }
    assert_eq!(e, snapshot);
}

#[test]
fn mapping_ranks_agree_with_oracle() {
    let p = FixtureParams {
        node_count: 15,
        ..FixtureParams::default()
    };
    let a = generate_fixture(40, &p, None).with_name("a");
    let b = generate_fixture(41, &p, Some(&a)).with_name("b");
    let goal = PartialGoal::full(generate_fixture(42, &p, Some(&a)).with_name("goal"));
    let kb = kb_of(vec![a, b]);
    assert_eq!(kb.node_count(), 30);
    let e = map_expansion(&goal, kb.clone(), &Chamfer, 10).unwrap();
    for node in e.nodes() {
        let goal_edges = goal.graph().edges_of(&node.id);
        let truth: BTreeMap<SourceRef, f64> = kb
            .sources()
            .map(|s| {
                let d = oracle::node_distance(goal_edges, kb.edges_of(&s).unwrap());
                (s, d)
            })
            .collect();
        assert_eq!(node.parts.len(), 10);
        let chosen: Vec<f64> = node.parts.iter().map(|p| truth[&p.source]).collect();
        assert!(chosen.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        let worst_chosen = *chosen.last().unwrap();
        for (s, d) in &truth {
            if !node.parts.iter().any(|p| &p.source == s) {
                assert!(*d >= worst_chosen - 1e-12);
            }
        }
        for (k, part) in node.parts.iter().enumerate() {
            let w = (10 - k) as f64 / 10.0;
            assert!(part.filter.weights().iter().all(|&x| x == w));
        }
    }
}

#[test]
fn exact_copy_ranks_first() {
    let a = generate_fixture(50, &FixtureParams::default(), None).with_name("a");
    let b = generate_fixture(51, &FixtureParams::default(), None).with_name("b");
    let goal = project(&a.clone().with_name("goal"), GoalScope::Full);
    let e = map_expansion(&goal, kb_of(vec![a, b]), &Chamfer, 10).unwrap();
    for node in e.nodes() {
        let first = &node.parts[0];
        let edges = e.knowledge_base().edges_of(&first.source).unwrap();
        assert_eq!(Chamfer.node_distance(goal.graph().edges_of(&node.id), edges), 0.0);
        assert!(first.filter.weights().iter().all(|&w| w == 1.0));
    }
    let single = map_expansion(&goal, e.knowledge_base().clone(), &Chamfer, 1).unwrap();
    assert!(single
        .nodes()
        .iter()
        .all(|n| n.parts.len() == 1 && n.parts[0].filter.weights().iter().all(|&w| w == 1.0)));
}

#[test]
fn climbing_a_related_goal_improves_on_mapping() {
    for seed in 0..5 {
        let t = generate_triad(seed, &FixtureParams::default());
        let goal = project(&t.goal, GoalScope::DesignOnly);
        let start = map_expansion(&goal, kb_of(t.kb.to_vec()), &Chamfer, 10).unwrap();
        let mapped = Chamfer.graph_distance(&goal, &materialize(&start));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let out = hill_climb(start, &goal, &Chamfer, &ClimbConfig::default(), &mut rng);
        assert_eq!(out.initial, mapped);
        assert!(out.final_value() <= mapped);
        assert_eq!(Chamfer.graph_distance(&goal, &out.graph), out.final_value());
    }
}

#[test]
fn blend_space_is_inside_expansion_space() {
    let kb = kb_of(vec![generate_fixture(5, &FixtureParams::default(), None)]);
    let name = kb.graphs()[0].name().to_owned();
    let src = &kb.graphs()[0].nodes()[0].id;
    let len = expansion_forge::expansion::filter_len(kb.graphs()[0].edges_of(src));
    let weights = (0..len).map(|i| (i % 2) as f64).collect();
    let node = ExpandedNode {
        id: "x".into(),
        label: "X".into(),
        parts: vec![Part {
            source: SourceRef::new(name, src.clone()),
            filter: Filter::new(weights),
        }],
    };
    assert!(Expansion::new(vec![node], kb).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn climbs_are_monotone_and_seeded(seed in any::<u64>()) {
        let t = generate_triad(seed % 1000, &FixtureParams::default());
        let goal = project(&t.goal, GoalScope::RulesOnly);
        let start = map_expansion(&goal, kb_of(t.kb.to_vec()), &Chamfer, 10).unwrap();
        let config = ClimbConfig { max_steps: 25, ..ClimbConfig::default() };
        let run = |s| hill_climb(start.clone(), &goal, &Chamfer, &config, &mut ChaCha8Rng::seed_from_u64(s));
        let (x, y) = (run(seed), run(seed));
        prop_assert!(x.trace.len() <= 25);
        prop_assert!(x.trace.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(x.expansion.to_json(), y.expansion.to_json());
        prop_assert_eq!(x.trace, y.trace);
    }

    #[test]
    fn neighbors_keep_filter_lengths(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, "k", 5, 5);
        let kb = kb_of(vec![g]);
        let mut e = Expansion::identity("k", kb.clone(), 1.0).unwrap();
        for _ in 0..50 {
            e = neighbor(&e, &mut rng);
            prop_assert!(Expansion::new(e.nodes().to_vec(), kb.clone()).is_ok());
            // Materialization is total.
            let _ = materialize(&e);
        }
    }
}
