//! One PASS/FAIL line per acceptance criterion. Verdicts and cost
//! profiles are compared exactly; each criterion also has a time budget.
//!
//! Criterion 3 contains a clause that cannot hold on the Fig. 6 game: the
//! requested outcome ABD^ω is not supported by any secure profile. The
//! line reports FAIL, and the test pins the exact failure so that any
//! change in behavior is noticed.

mod common;

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use qrg::construction::{
    assemble_finite_memory, beats, naive_shift, random_deviation, remove_cycle, remove_cycle_unchecked, Bounds,
    ConstructionError, SharedStrategy,
};
use qrg::decider::{decide_secure_existence, profile_count, stage_backward_induction, stage_exhaustive, stage_outcome_supported, Answer, DecideOptions};
use qrg::format::{parse_profile, render_tree_profile};
use qrg::play::{cost_profile, lasso_cost_profile, lasso_visit_set, visit_set, weight_constants, weighted_cost_profile, CycleDecomposition};
use qrg::preference::{nash_prefers, secure_prefers};
use qrg::solver::{
    backward_induction, backward_induction_seeded, devopt_characterization, is_dev_optimized, is_goal_optimized,
    is_nash, is_secure, is_spe, is_spse, Family,
};
use qrg::tree::{outcome, unravel, unravel_with, CostModel, NodeId, TreeStrategyProfile, TruncatedTree};
use qrg::zero_sum::{solve_reach_under_safety, ZeroSumArena};
use qrg::{Cost, CostProfile, GameBuilder, GameGraph, Rational, VertexId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Report {
    pass: bool,
    detail: String,
}

fn timed(n: usize, budget: Duration, f: impl FnOnce() -> Report) -> (bool, String) {
    let start = Instant::now();
    let r = f();
    let t = start.elapsed();
    let in_time = t <= budget;
    let pass = r.pass && in_time;
    let line = format!(
        "criterion {n}: {} ({}; {:.2}s of {}s)",
        if pass { "PASS" } else { "FAIL" },
        r.detail,
        t.as_secs_f64(),
        budget.as_secs()
    );
    println!("{line}");
    (pass, line)
}

fn cp(s: &str) -> CostProfile {
    s.parse().unwrap()
}

fn flat(g: &GameGraph, path: &[VertexId]) -> String {
    path.iter().map(|v| g.name(*v)).collect()
}

struct Classified {
    nash: bool,
    secure: bool,
    spe: bool,
    spse: bool,
    costs: CostProfile,
    outcome: String,
}

fn classify(game_file: &str, prof: &str, depth: usize) -> Classified {
    let g = game(game_file);
    let t = tree(&g, depth);
    let s = profile(&t, &rules(&g, prof));
    let leaf = outcome(&t, &s, t.root());
    Classified {
        nash: is_nash(&t, &s).holds(),
        secure: is_secure(&t, &s).holds(),
        spe: is_spe(&t, &s).holds(),
        spse: is_spse(&t, &s).holds(),
        costs: t.profile(leaf).clone(),
        outcome: flat(&g, &t.history(leaf)),
    }
}

fn criterion_1() -> Report {
    let mut bad = Vec::new();
    let g = classify("fig1_g.qrg", "fig1_s1_s2.prof", 8);
    if !(g.secure && g.nash && !g.spe && g.costs == cp("3,inf")) {
        bad.push("G: (s1,s2)");
    }
    if !classify("fig1_g.qrg", "fig1_s1p_s2p.prof", 8).spse {
        bad.push("G: (s1',s2')");
    }
    let c = classify("fig2_gprime.qrg", "fig1_s1p_s2p.prof", 7);
    if !(c.spe && !c.secure) {
        bad.push("G': (s1',s2')");
    }
    if !classify("fig2_gprime.qrg", "fig1_s1_s2p.prof", 7).spse {
        bad.push("G': (s1,s2')");
    }
    let c = classify("fig3_gsecond.qrg", "fig1_s1_s2p.prof", 7);
    if !(c.spe && c.secure && !c.spse) {
        bad.push("G'': (s1,s2')");
    }
    if !classify("fig3_gsecond.qrg", "fig1_s1_s2.prof", 7).spse {
        bad.push("G'': (s1,s2)");
    }
    Report {
        pass: bad.is_empty(),
        detail: if bad.is_empty() { "7 verdict groups exact".into() } else { format!("wrong: {bad:?}") },
    }
}

fn criterion_2() -> Report {
    let mut bad = Vec::new();
    for n in 1..=3usize {
        let c = classify("fig4.qrg", &format!("fig4_sigma_n{n}.prof"), 8);
        let want = format!("{}{}", "A".repeat(n), "B".repeat(9 - n));
        if !(c.spe && !c.secure && c.costs == cp(&format!("0,{n}")) && c.outcome == want) {
            bad.push(format!("fig4 n={n}"));
        }
        let c = classify("fig5.qrg", &format!("fig5_sigma_n{n}.prof"), 8);
        if !(c.secure && !c.spe && c.costs == cp(&format!("{},{}", n + 1, n + 1))) {
            bad.push(format!("fig5 n={n}"));
        }
    }
    Report {
        pass: bad.is_empty(),
        detail: if bad.is_empty() { "6 profiles exact".into() } else { format!("wrong: {bad:?}") },
    }
}

/// `true` iff some profile of `t` with outcome `leaf` is secure: every
/// subtree hanging off the outcome must be one where the coalition can
/// keep its deviator from anything strictly better.
fn secure_outcome_exists(t: &TruncatedTree, leaf: NodeId) -> bool {
    let x = t.profile(leaf).clone();
    let path: Vec<NodeId> = (0..=t.depth()).map(|d| t.ancestor_at(leaf, d)).collect();
    fn coalition_holds(t: &TruncatedTree, n: NodeId, j: usize, x: &CostProfile) -> bool {
        if t.is_leaf(n) {
            return !secure_prefers(j, x, t.profile(n));
        }
        let mut cs = t.children(n);
        if t.owner(n) == j {
            cs.all(|c| coalition_holds(t, c, j, x))
        } else {
            cs.any(|c| coalition_holds(t, c, j, x))
        }
    }
    path.windows(2).all(|w| {
        let j = t.owner(w[0]);
        t.children(w[0]).filter(|&c| c != w[1]).all(|c| coalition_holds(t, c, j, &x))
    })
}

/// Returns the report and whether the known failure matched exactly.
fn criterion_3() -> (Report, bool) {
    let g = game("fig6.qrg");
    let t = tree(&g, 12);
    let sigma: SharedStrategy = Arc::new(rules(&g, "fig6_sigma.prof"));
    let base = profile(&t, &rules(&g, "fig6_sigma.prof"));
    let leaf = outcome(&t, &base, t.root());
    // The B -> D shortcut is expanded through Y.
    let clause_a = is_secure(&t, &base).holds()
        && t.profile(leaf) == &cp("0,0,5")
        && flat(&g, &t.history(leaf)).starts_with("ABCBYDDD");

    let dec = CycleDecomposition { alpha_end: 1, beta_end: 3 };
    let naive = naive_shift(&t, sigma.clone(), dec).unwrap();
    let w = is_secure(&t, &naive.profile).witness;
    let clause_b = is_nash(&t, &naive.profile).holds()
        && w.as_ref().is_some_and(|w| w.deviation[2] == Cost::from_steps(4) && w.on_path == cp("0,0,3"))
        && flat(&g, &naive.outcome).starts_with("ABYD");

    let strict = remove_cycle(&t, sigma.clone(), dec);
    let forced = remove_cycle_unchecked(&t, sigma, dec).unwrap();
    let clause_c = strict
        .as_ref()
        .is_ok_and(|c| is_secure(&t, &c.profile).holds() && c.costs == cp("0,0,3"));
    let abd: Vec<NodeId> = t
        .leaves()
        .filter(|&l| flat(&g, &t.history(l)).starts_with("ABYD") && t.profile(l) == &cp("0,0,3"))
        .collect();
    let none_secure = !abd.is_empty() && abd.iter().all(|&l| !secure_outcome_exists(&t, l));

    let known = clause_a
        && clause_b
        && matches!(strict, Err(ConstructionError::Precondition(_)))
        && forced.costs == cp("0,0,3")
        && !is_secure(&t, &forced.profile).holds()
        && none_secure;
    let detail = format!(
        "secure (0,0,5) {}; naive shift Nash, not secure, deviation cost 4 {}; \
         cycle removal secure (0,0,3) {} [precondition rejected; forced variant not secure; \
         no secure profile has an ABD outcome in T^12: {}]",
        if clause_a { "ok" } else { "WRONG" },
        if clause_b { "ok" } else { "WRONG" },
        if clause_c { "ok" } else { "UNATTAINABLE" },
        none_secure
    );
    (
        Report {
            pass: clause_a && clause_b && clause_c,
            detail,
        },
        known,
    )
}

fn random_arena(rng: &mut impl Rng) -> (Vec<Vec<usize>>, Vec<bool>, Vec<bool>, Vec<bool>) {
    let n = rng.gen_range(1..=12);
    let succ = (0..n)
        .map(|_| (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(0..n)).collect())
        .collect();
    let prot = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    let mut reach: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.25)).collect();
    reach[rng.gen_range(0..n)] = true;
    let safe = (0..n).map(|_| rng.gen_bool(0.8)).collect();
    (succ, prot, reach, safe)
}

fn fixpoint_oracle(succ: &[Vec<usize>], prot: &[bool], reach: &[bool], safe: &[bool]) -> Vec<bool> {
    let n = succ.len();
    let cpre = |x: &[bool]| -> Vec<bool> {
        (0..n)
            .map(|v| if prot[v] { succ[v].iter().any(|&w| x[w]) } else { succ[v].iter().all(|&w| x[w]) })
            .collect()
    };
    let mut z = safe.to_vec();
    loop {
        let p = cpre(&z);
        let next: Vec<bool> = (0..n).map(|v| safe[v] && p[v]).collect();
        if next == z {
            break;
        }
        z = next;
    }
    let mut x = vec![false; n];
    loop {
        let p = cpre(&x);
        let next: Vec<bool> = (0..n).map(|v| (reach[v] && z[v]) || (safe[v] && p[v])).collect();
        if next == x {
            return x;
        }
        x = next;
    }
}

fn criterion_4() -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut bad = 0;
    for _ in 0..1000 {
        let (succ, prot, reach, safe) = random_arena(&mut rng);
        let n = succ.len();
        let a = ZeroSumArena::new(
            succ.iter().map(|s| s.iter().map(|&w| VertexId(w as u32)).collect()).collect(),
            prot.clone(),
            reach.clone(),
            safe.clone(),
        )
        .unwrap();
        let res = solve_reach_under_safety(&a);
        let won: Vec<bool> = (0..n).map(|v| res.is_winning(VertexId(v as u32))).collect();
        let mut ok = won == fixpoint_oracle(&succ, &prot, &reach, &safe);
        let len = 3 * n;
        for sim in 0..1000 {
            let start = VertexId((sim % n) as u32);
            let winning = res.is_winning(start);
            let mut path = vec![start];
            for _ in 0..len {
                let v = *path.last().unwrap();
                let next = if a.is_protagonist(v) == winning {
                    res.choice(v)
                } else {
                    let s = a.successors(v);
                    s[rng.gen_range(0..s.len())]
                };
                path.push(next);
            }
            if winning {
                let rank = res.rank(start).unwrap() as usize;
                ok &= rank < n && a.prefix_wins(&path[..=rank]) && path.iter().all(|v| a.in_safe(*v));
            } else if let Some(t) = path.iter().position(|v| a.in_reach(*v)) {
                if t + n <= len {
                    ok &= path[..=t + n].iter().any(|v| !a.in_safe(*v));
                }
            }
        }
        if !ok {
            bad += 1;
        }
    }
    Report {
        pass: bad == 0,
        detail: format!("1000 arenas x 1000 simulations, {bad} mismatches"),
    }
}

fn deviation_leaves(t: &TruncatedTree, sigma: &TreeStrategyProfile, n: NodeId, j: usize) -> BTreeSet<CostProfile> {
    let mut out = BTreeSet::new();
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if t.is_leaf(m) {
            out.insert(t.profile(m).clone());
        } else if t.owner(m) == j {
            stack.extend(t.children(m));
        } else {
            stack.push(sigma.chosen(m));
        }
    }
    out
}

fn oracle(
    t: &TruncatedTree,
    s: &TreeStrategyProfile,
    prefers: fn(usize, &CostProfile, &CostProfile) -> bool,
    everywhere: bool,
) -> bool {
    let nodes: Vec<NodeId> = if everywhere {
        t.nodes().filter(|&n| !t.is_leaf(n)).collect()
    } else {
        vec![t.root()]
    };
    nodes.into_iter().all(|n| {
        let x = t.profile(outcome(t, s, n));
        (0..t.game().players()).all(|j| deviation_leaves(t, s, n, j).iter().all(|y| !prefers(j, x, y)))
    })
}

/// Secure, goal-optimized and dev-optimized profiles collected for the
/// assembly criterion.
type Pool = Vec<(Arc<TruncatedTree>, TreeStrategyProfile)>;

fn collect_optimized(pool: &mut Pool, t: &Arc<TruncatedTree>, s: &TreeStrategyProfile) {
    let x = t.profile(outcome(t, s, t.root()));
    if is_goal_optimized(t.game(), x)
        && is_secure(t, s).holds()
        && is_dev_optimized(t, s).is_ok_and(|v| v.holds())
    {
        pool.push((t.clone(), s.clone()));
    }
}

fn criterion_5(pool: &mut Pool) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut bad, mut checked) = (0, 0);
    for _ in 0..500 {
        let g = random_game(&mut rng, 4, 3, 3);
        let depth = rng.gen_range(1..=6);
        let t = Arc::new(unravel_with(&g, g.initial().unwrap(), depth, CostModel::Unit, 50_000).unwrap());
        let nash = backward_induction(&t, Family::Nash);
        let secure = backward_induction(&t, Family::Secure);
        let mut ok = is_spe(&t, &nash).holds()
            && oracle(&t, &nash, nash_prefers, true)
            && is_spse(&t, &secure).holds()
            && oracle(&t, &secure, secure_prefers, true);
        for s in [nash, secure, random_profile(&t, &mut rng)] {
            checked += 1;
            let (n, se, sp, sps) = (
                is_nash(&t, &s).holds(),
                is_secure(&t, &s).holds(),
                is_spe(&t, &s).holds(),
                is_spse(&t, &s).holds(),
            );
            ok &= n == oracle(&t, &s, nash_prefers, false)
                && se == oracle(&t, &s, secure_prefers, false)
                && sp == oracle(&t, &s, nash_prefers, true)
                && sps == oracle(&t, &s, secure_prefers, true)
                && (!sps || (sp && se))
                && (!se || n)
                && (!sp || n);
            collect_optimized(pool, &t, &s);
        }
        if !ok {
            bad += 1;
        }
    }
    Report {
        pass: bad == 0,
        detail: format!("500 games, {checked} profiles through the implication suite, {bad} failures"),
    }
}

fn criterion_6(pool: &mut Pool) -> Report {
    let mut disagreements = 0;
    let mut fixtures = 0;
    let manifest = [
        ("fig1_g.qrg", vec!["fig1_s1_s2.prof", "fig1_s1p_s2p.prof", "fig1_s1_s2p.prof"]),
        ("fig2_gprime.qrg", vec!["fig1_s1p_s2p.prof", "fig1_s1_s2p.prof"]),
        ("fig3_gsecond.qrg", vec!["fig1_s1_s2p.prof", "fig1_s1_s2.prof"]),
        ("fig4.qrg", vec!["fig4_sigma_n1.prof", "fig4_sigma_n2.prof", "fig4_sigma_n3.prof"]),
        ("fig5.qrg", vec!["fig5_sigma_n1.prof", "fig5_sigma_n2.prof", "fig5_sigma_n3.prof"]),
        ("fig6.qrg", vec!["fig6_sigma.prof"]),
        ("devopt_gap.qrg", vec!["devopt_gap.prof"]),
    ];
    for (file, profs) in manifest {
        let g = game(file);
        let t = Arc::new(tree(&g, 14));
        for p in profs {
            let s = profile(&t, &rules(&g, p));
            if is_secure(&t, &s).holds() {
                fixtures += 1;
                let a = is_dev_optimized(&t, &s).map(|v| v.holds());
                let b = devopt_characterization(&t, &s).map(|v| v.holds());
                disagreements += usize::from(a != b);
                collect_optimized(pool, &t, &s);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut found, mut failing) = (0, 0);
    while found < 200 {
        let g = random_game(&mut rng, 3, 3, 2);
        let depth = 3 * g.vertex_count() + 2;
        let Ok(t) = unravel_with(&g, g.initial().unwrap(), depth, CostModel::Unit, 20_000) else {
            continue;
        };
        let t = Arc::new(t);
        let candidate = if rng.gen_bool(0.5) {
            backward_induction_seeded(&t, Family::Secure, rng.gen_range(1..1000))
        } else {
            random_profile(&t, &mut rng)
        };
        if !is_secure(&t, &candidate).holds() {
            continue;
        }
        found += 1;
        let a = is_dev_optimized(&t, &candidate).map(|v| v.holds());
        let b = devopt_characterization(&t, &candidate).map(|v| v.holds());
        disagreements += usize::from(a != b);
        failing += usize::from(a == Ok(false));
        collect_optimized(pool, &t, &candidate);
    }
    Report {
        pass: disagreements == 0,
        detail: format!(
            "{fixtures} fixture and 200 random secure profiles ({failing} not dev-optimized), {disagreements} disagreements"
        ),
    }
}

fn criterion_7(pool: &Pool) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut assembled, mut shallow, mut bad) = (0, 0, 0);
    for (t, s) in pool {
        let g = t.game();
        let v0 = g.initial().unwrap();
        let leaf = outcome(t, s, t.root());
        let x = t.profile(leaf).clone();
        let asm = match assemble_finite_memory(t, s, Bounds::Working) {
            Ok(a) => a,
            // The α prefix of length d_dev + |V| does not fit in the tree.
            Err(ConstructionError::DecompositionNotFound(m)) if m.contains("tree depth") => {
                shallow += 1;
                continue;
            }
            Err(_) => {
                bad += 1;
                continue;
            }
        };
        assembled += 1;
        let lasso = asm.moore.outcome(g, v0, 100_000).unwrap();
        let mut ok = lasso_cost_profile(g, &lasso) == x
            && lasso_visit_set(g, &lasso) == visit_set(g, &t.history(leaf))
            && asm.outcome == lasso
            && asm.states_per_player <= asm.state_bound;
        for k in 0..1000 {
            let j = k % g.players();
            let free = rng.gen_range(0..=2 * t.depth());
            let dev = random_deviation(g, &asm.moore, v0, j, free, &mut rng);
            ok &= !beats(j, &x, &lasso_cost_profile(g, &dev));
        }
        bad += usize::from(!ok);
    }
    Report {
        pass: bad == 0 && assembled > 0,
        detail: format!(
            "{assembled} assembled with 1000 deviations each, {shallow} trees too shallow for the α prefix, {bad} failures"
        ),
    }
}

fn reverify(g: &GameGraph, depth: usize, profile_text: &str, costs: &CostProfile) -> bool {
    let t = unravel(g, g.initial().unwrap(), depth).unwrap();
    let s = parse_profile(g, profile_text).unwrap().to_tree_profile(&t).unwrap();
    let x = t.profile(outcome(&t, &s, t.root()));
    x == costs
        && is_secure(&t, &s).holds()
        && is_goal_optimized(g, x)
        && is_dev_optimized(&t, &s).is_ok_and(|v| v.holds())
}

fn criterion_8() -> Report {
    let mut bad = Vec::new();
    for file in ["fig1_g.qrg", "fig2_gprime.qrg", "fig3_gsecond.qrg", "fig4.qrg", "fig5.qrg", "fig6.qrg"] {
        let g = game(file);
        let d = decide_secure_existence(&g, g.initial().unwrap(), &DecideOptions::default()).unwrap();
        let Answer::Yes(w) = &d.answer else {
            bad.push(format!("{file}: {}", d.answer.label()));
            continue;
        };
        let t = unravel(&g, g.initial().unwrap(), d.depth).unwrap();
        if !reverify(&g, d.depth, &render_tree_profile(&t, &w.profile), &w.costs) {
            bad.push(format!("{file}: witness"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut micro, mut yes) = (0, 0);
    while micro < 150 {
        let g = random_game(&mut rng, 3, 2, 2);
        let depth = rng.gen_range(2..=6);
        let Ok(t) = unravel_with(&g, g.initial().unwrap(), depth, CostModel::Unit, 200) else {
            continue;
        };
        let count = profile_count(&t);
        if count > 4096 {
            continue;
        }
        micro += 1;
        let exhaustive = stage_exhaustive(&t, &None, count);
        let early = stage_backward_induction(&t, &None, 4).or_else(|| stage_outcome_supported(&t, &None, 200));
        yes += usize::from(exhaustive.is_some());
        if early.is_some() && exhaustive.is_none() {
            bad.push(format!("micro {micro}: early Yes, exhaustive none"));
        }
        let opts = DecideOptions { depth: Some(depth), ..DecideOptions::default() };
        let plain = decide_secure_existence(&g, g.initial().unwrap(), &opts).unwrap();
        let inf = qrg::decider::decide_secure_with_thresholds(
            &g,
            g.initial().unwrap(),
            vec![Cost::Infinite; g.players()],
            &opts,
        )
        .unwrap();
        if plain.answer.label() != inf.answer.label() || (plain.answer.label() == "yes") != exhaustive.is_some() {
            bad.push(format!("micro {micro}: thresholds or stage disagreement"));
        }
    }
    Report {
        pass: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("6 fixtures Yes and re-verified; {micro} micro trees agree ({yes} with witnesses)")
        } else {
            format!("{bad:?}")
        },
    }
}

fn criterion_9() -> Report {
    let mut bad = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut plays = 0;
    while plays < 1000 {
        let g = reweight(&random_game(&mut rng, 5, 3, 3), || Rational::from_integer(1));
        for _ in 0..10 {
            let mut p = vec![g.initial().unwrap()];
            for _ in 0..rng.gen_range(0..25) {
                let s = g.successors(*p.last().unwrap());
                p.push(s[rng.gen_range(0..s.len())]);
            }
            plays += 1;
            if weighted_cost_profile(&g, &p).unwrap() != cost_profile(&g, &p, None).unwrap() {
                bad.push("unit weights".to_string());
            }
        }
    }
    let hand = GameBuilder::new(2)
        .vertex("A", 0)
        .vertex("B", 1)
        .weighted_edge("A", "B", vec![Rational::new(1, 2), Rational::from_integer(2)])
        .weighted_edge("B", "A", vec![Rational::from_integer(3), Rational::new(5, 4)])
        .weighted_edge("B", "B", vec![Rational::from_integer(1), Rational::from_integer(1)])
        .goal(0, &["A"])
        .goal(1, &["B"])
        .initial("A")
        .build()
        .unwrap();
    let wc = weight_constants(&hand).unwrap();
    if (wc.c_min, wc.c_max, wc.k) != (Rational::new(1, 2), Rational::from_integer(3), 6) {
        bad.push(format!("weight constants {wc:?}"));
    }
    for _ in 0..100 {
        let g = random_game(&mut rng, 4, 3, 3);
        let g = reweight(&g, || Rational::new(rng.gen_range(1..=6), rng.gen_range(1..=3)));
        let depth = rng.gen_range(1..=5);
        let t = unravel_with(&g, g.initial().unwrap(), depth, CostModel::Weighted, 50_000).unwrap();
        let s = backward_induction(&t, Family::Nash);
        if !is_spe(&t, &s).holds() || !oracle(&t, &s, nash_prefers, true) {
            bad.push("weighted backward induction".to_string());
        }
    }
    Report {
        pass: bad.is_empty(),
        detail: if bad.is_empty() {
            "1000 unit-weight plays, hand constants, 100 weighted trees".into()
        } else {
            format!("{bad:?}")
        },
    }
}

#[test]
fn acceptance() {
    let secs = Duration::from_secs;
    let mut pool = Pool::new();
    let mut results = Vec::new();
    results.push(timed(1, secs(1), criterion_1));
    results.push(timed(2, secs(1), criterion_2));
    let mut known_failure = false;
    results.push(timed(3, secs(5), || {
        let (r, known) = criterion_3();
        known_failure = known;
        r
    }));
    results.push(timed(4, secs(30), criterion_4));
    results.push(timed(5, secs(60), || criterion_5(&mut pool)));
    results.push(timed(6, secs(60), || criterion_6(&mut pool)));
    results.push(timed(7, secs(60), || criterion_7(&pool)));
    results.push(timed(8, secs(300), criterion_8));
    results.push(timed(9, secs(10), criterion_9));

    // Criterion 3 fails in exactly the documented way; everything else
    // must pass.
    assert!(known_failure || results[2].0, "criterion 3 changed: {}", results[2].1);
    let failed: Vec<&String> = results
        .iter()
        .enumerate()
        .filter(|(i, (pass, _))| *i != 2 && !pass)
        .map(|(_, (_, line))| line)
        .collect();
    assert!(failed.is_empty(), "{failed:#?}");
}
