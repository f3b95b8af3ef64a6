mod common;

use proptest::prelude::*;
use qrg::decider::{
    accepts, decide_secure_existence, decide_secure_with_thresholds, profile_count, stage_backward_induction,
    stage_exhaustive, stage_outcome_supported, Answer, Budgets, DecideOptions, Stage,
};
use qrg::tree::{depth_constants, unravel};
use qrg::{Cost, GameBuilder};

fn walk() -> qrg::GameGraph {
    GameBuilder::new(1)
        .vertex("A", 0)
        .vertex("B", 0)
        .edge("A", "B")
        .edge("B", "B")
        .goal(0, &["B"])
        .initial("A")
        .build()
        .unwrap()
}

#[test]
fn zero_threshold_outside_goals_is_refuted() {
    let g = walk();
    let v0 = g.initial().unwrap();
    let d = decide_secure_with_thresholds(&g, v0, vec![Cost::ZERO], &DecideOptions::default()).unwrap();
    assert_eq!(d.depth, d.full_depth);
    assert!(d.stages.contains(&Stage::Exhaustive));
    assert!(matches!(d.answer, Answer::No(_)), "{:?}", d.answer);
    assert!(d.conclusive());

    let d = decide_secure_with_thresholds(&g, v0, vec![Cost::from_steps(1)], &DecideOptions::default()).unwrap();
    assert!(matches!(d.answer, Answer::Yes(_)));
}

#[test]
fn fig5_has_a_witness_with_finite_memory() {
    let g = common::game("fig5.qrg");
    let v0 = g.initial().unwrap();
    let d = decide_secure_existence(&g, v0, &DecideOptions::default()).unwrap();
    let Answer::Yes(w) = &d.answer else {
        panic!("{:?}", d.answer)
    };
    assert!(d.depth < d.full_depth);
    assert!(w.moore.is_some(), "{}", w.moore_note);
    let moore = w.moore.as_ref().unwrap();
    let lasso = moore.outcome(&g, v0, 1000).unwrap();
    assert_eq!(qrg::play::lasso_cost_profile(&g, &lasso), w.costs);
}

#[test]
fn fig6_has_a_witness() {
    let g = common::game("fig6.qrg");
    let v0 = g.initial().unwrap();
    let opts = DecideOptions {
        depth: Some(14),
        ..DecideOptions::default()
    };
    let d = decide_secure_existence(&g, v0, &opts).unwrap();
    assert!(matches!(d.answer, Answer::Yes(_)), "{:?}", d.answer);
}

#[test]
fn full_depth_single_play_is_decided() {
    // Deterministic game: the tree at depth d is a single path.
    let g = GameBuilder::new(2)
        .vertex("A", 0)
        .vertex("B", 1)
        .vertex("C", 0)
        .edge("A", "B")
        .edge("B", "C")
        .edge("C", "A")
        .goal(0, &["C"])
        .goal(1, &["A"])
        .initial("A")
        .build()
        .unwrap();
    let d = decide_secure_existence(&g, g.initial().unwrap(), &DecideOptions::default()).unwrap();
    assert_eq!(d.depth, depth_constants(&g).d);
    assert_eq!(d.profile_count, 1);
    assert!(matches!(d.answer, Answer::Yes(_)));
    assert!(d.conclusive());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // On micro trees, stages 1 and 2 never claim a witness that the
    // exhaustive stage cannot find, and every witness passes the checks.
    #[test]
    fn stages_agree_on_micro_trees(g in common::arb_game(3, 2, 2), depth in 2usize..6) {
        let v0 = g.initial().unwrap();
        let tree = match unravel(&g, v0, depth) {
            Ok(t) if t.len() <= 200 => t,
            _ => return Ok(()),
        };
        let count = profile_count(&tree);
        prop_assume!(count <= 4096);
        let t = None;
        let exhaustive = stage_exhaustive(&tree, &t, count);
        if let Some(s) = &exhaustive {
            prop_assert!(accepts(&tree, s, &t));
        }
        let early = stage_backward_induction(&tree, &t, 4).or_else(|| stage_outcome_supported(&tree, &t, 100));
        if let Some((_, s)) = &early {
            prop_assert!(accepts(&tree, s, &t));
            prop_assert!(exhaustive.is_some());
        }

        let opts = DecideOptions {
            depth: Some(depth),
            thresholds: None,
            budgets: Budgets { profiles: 4096, ..Budgets::default() },
        };
        let d = decide_secure_existence(&g, v0, &opts).unwrap();
        prop_assert_eq!(matches!(d.answer, Answer::Yes(_)), exhaustive.is_some());
        prop_assert!(!matches!(d.answer, Answer::No(_)) || depth >= d.full_depth);
    }
}
