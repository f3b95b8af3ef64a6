#![allow(dead_code)]

use std::path::PathBuf;

use qrg::format::{parse_game, parse_profile, ProfileRules};
use qrg::tree::{unravel, TreeStrategyProfile, TruncatedTree};
use qrg::GameGraph;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn game(name: &str) -> GameGraph {
    let text = std::fs::read_to_string(fixture_path(name)).unwrap();
    parse_game(&text).unwrap()
}

pub fn rules(g: &GameGraph, name: &str) -> ProfileRules {
    let text = std::fs::read_to_string(fixture_path(name)).unwrap();
    parse_profile(g, &text).unwrap()
}

pub fn tree(g: &GameGraph, depth: usize) -> TruncatedTree {
    unravel(g, g.initial().unwrap(), depth).unwrap()
}

pub fn profile(t: &TruncatedTree, r: &ProfileRules) -> TreeStrategyProfile {
    r.to_tree_profile(t).unwrap()
}

/// Small random games: `n` vertices named `v0..`, out-degree 1 to
/// `max_out`, non-empty goal sets, initial vertex `v0`.
pub fn arb_game(
    max_vertices: usize,
    max_players: usize,
    max_out: usize,
) -> impl proptest::strategy::Strategy<Value = GameGraph> {
    use proptest::prelude::*;
    (2..=max_vertices, 1..=max_players)
        .prop_flat_map(move |(n, p)| {
            let owners = proptest::collection::vec(0..p, n);
            let succ = proptest::collection::vec(proptest::collection::btree_set(0..n, 1..=max_out.min(n)), n);
            let goals = proptest::collection::vec(proptest::collection::btree_set(0..n, 1..=n), p);
            (Just(p), owners, succ, goals)
        })
        .prop_map(|(p, owners, succ, goals)| {
            let name = |i: usize| format!("v{i}");
            let mut b = qrg::GameBuilder::new(p);
            for (i, o) in owners.iter().enumerate() {
                b.add_vertex(&name(i), *o);
            }
            for (i, s) in succ.iter().enumerate() {
                for t in s {
                    b.add_edge(&name(i), &name(*t), None);
                }
            }
            for (j, gs) in goals.iter().enumerate() {
                let names: Vec<String> = gs.iter().map(|&i| name(i)).collect();
                b.add_goal(j, names.iter().map(String::as_str));
            }
            b.set_initial("v0");
            b.build().expect("generated game is well formed")
        })
}

/// Copy of `g` with every edge weighted, each weight drawn by `weight`.
pub fn reweight(g: &GameGraph, mut weight: impl FnMut() -> qrg::Rational) -> GameGraph {
    let mut b = qrg::GameBuilder::new(g.players());
    for v in g.vertices() {
        b.add_vertex(g.name(v), g.owner(v));
    }
    for (from, to, _) in g.edges() {
        let ws = (0..g.players()).map(|_| weight()).collect();
        b.add_edge(g.name(from), g.name(to), Some(ws));
    }
    for j in 0..g.players() {
        b.add_goal(j, g.goal_set(j).iter().map(|v| g.name(*v)));
    }
    if let Some(v) = g.initial() {
        b.set_initial(g.name(v));
    }
    b.build().unwrap()
}

/// Uniformly random profile of the tree.
pub fn random_profile(t: &TruncatedTree, rng: &mut impl rand::Rng) -> TreeStrategyProfile {
    let mut choice = vec![qrg::tree::NO_NODE; t.len()];
    for n in t.nodes().filter(|&n| !t.is_leaf(n)) {
        let cs = t.children(n);
        choice[n as usize] = rng.gen_range(cs);
    }
    TreeStrategyProfile::from_choices(t, choice).unwrap()
}

/// Seeded counterpart of [`arb_game`] for fixed-size batches.
pub fn random_game(rng: &mut impl rand::Rng, max_vertices: usize, max_players: usize, max_out: usize) -> GameGraph {
    let n = rng.gen_range(2..=max_vertices);
    let p = rng.gen_range(1..=max_players);
    let name = |i: usize| format!("v{i}");
    let mut b = qrg::GameBuilder::new(p);
    for i in 0..n {
        b.add_vertex(&name(i), rng.gen_range(0..p));
    }
    for i in 0..n {
        let k = rng.gen_range(1..=max_out.min(n));
        let mut succ: Vec<usize> = (0..n).collect();
        for s in 0..k {
            let t = rng.gen_range(s..n);
            succ.swap(s, t);
        }
        for t in &succ[..k] {
            b.add_edge(&name(i), &name(*t), None);
        }
    }
    for j in 0..p {
        let mut goals: Vec<String> = (0..n).filter(|_| rng.gen_bool(0.3)).map(name).collect();
        if goals.is_empty() {
            goals.push(name(rng.gen_range(0..n)));
        }
        b.add_goal(j, goals.iter().map(String::as_str));
    }
    b.set_initial("v0");
    b.build().unwrap()
}
