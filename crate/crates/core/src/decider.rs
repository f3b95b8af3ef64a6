//! Staged search for secure equilibria with a three-valued answer.
//!
//! Stage 1 tries backward-induction profiles, stage 2 builds punishing
//! profiles around short outcomes, and stage 3 enumerates every profile of
//! the truncated tree when there are few enough. Only stage 3 can answer
//! No, and only on the full depth `d`.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::construction::{
    assemble_finite_memory, coalition_punishment, make_goal_dev_optimized, Bounds, TreeBacked,
};
use crate::cost::{Cost, CostProfile};
use crate::game::{GameGraph, VertexId};
use crate::moore::MooreProfile;
use crate::solver::{
    achievable_set, backward_induction_seeded, is_dev_optimized, is_goal_optimized, is_secure, Family,
};
use crate::preference::secure_prefers;
use crate::tree::{depth_constants, level_sizes, outcome, unravel_with, CostModel, NodeId, TreeError, TreeStrategyProfile, TruncatedTree, NO_NODE};
use crate::zero_sum::{build_player_game, solve_reach_under_safety};

/// Resource limits of the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budgets {
    /// Largest tree the search may build.
    pub nodes: usize,
    /// Tie-break seeds tried in stage 1.
    pub seeds: u64,
    /// Outcomes tried in stage 2.
    pub outcomes: usize,
    /// Largest profile count enumerated in stage 3.
    pub profiles: u64,
    /// Wall-clock limit; running out turns a pending answer into Unknown.
    pub time: Option<Duration>,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            nodes: 100_000,
            seeds: 16,
            outcomes: 2_000,
            profiles: 2_000_000,
            time: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecideOptions {
    /// Working depth; defaults to the largest depth up to `d` that fits
    /// the node budget.
    pub depth: Option<usize>,
    /// Per-player upper bounds on the witness costs.
    pub thresholds: Option<Vec<Cost>>,
    pub budgets: Budgets,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions {
            depth: None,
            thresholds: None,
            budgets: Budgets::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    BackwardInduction,
    OutcomeSupported,
    Exhaustive,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::BackwardInduction => "backward-induction",
            Stage::OutcomeSupported => "outcome-supported",
            Stage::Exhaustive => "exhaustive",
        }
    }
}

/// A verified witness.
#[derive(Debug, Clone)]
pub struct YesWitness {
    pub stage: Stage,
    pub profile: TreeStrategyProfile,
    pub costs: CostProfile,
    pub outcome: Vec<VertexId>,
    /// Finite-memory version, when the assembly succeeds on the tree.
    pub moore: Option<MooreProfile>,
    pub moore_note: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exhaustion {
    pub profiles: u64,
    /// Whether an independent second pass confirmed the result.
    pub double_checked: bool,
}

#[derive(Debug, Clone)]
pub enum Answer {
    Yes(Box<YesWitness>),
    No(Exhaustion),
    Unknown(String),
}

impl Answer {
    pub fn label(&self) -> &'static str {
        match self {
            Answer::Yes(_) => "yes",
            Answer::No(_) => "no",
            Answer::Unknown(_) => "unknown",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Decision {
    pub answer: Answer,
    pub depth: usize,
    /// `d = d_goal + 3|V|`.
    pub full_depth: usize,
    pub tree_nodes: usize,
    pub stages: Vec<Stage>,
    /// Profile count of the tree, saturating.
    pub profile_count: u64,
    pub elapsed: Duration,
}

impl Decision {
    /// `true` iff the answer speaks about the infinite game: a Yes or No
    /// obtained on `T^d` itself. Below `d` a Yes still comes with a
    /// verified tree witness, but the infinite game is only covered by
    /// re-verification of the assembled machine.
    pub fn conclusive(&self) -> bool {
        !matches!(self.answer, Answer::Unknown(_)) && self.depth >= self.full_depth
    }
}

/// Deadline shared by the stages.
struct Clock {
    deadline: Option<Instant>,
    expired: AtomicBool,
}

impl Clock {
    fn new(limit: Option<Duration>) -> Self {
        Clock {
            deadline: limit.map(|l| Instant::now() + l),
            expired: AtomicBool::new(false),
        }
    }

    fn out(&self) -> bool {
        if self.expired.load(Ordering::Relaxed) {
            return true;
        }
        let out = self.deadline.is_some_and(|d| Instant::now() >= d);
        if out {
            self.expired.store(true, Ordering::Relaxed);
        }
        out
    }
}

fn within(costs: &CostProfile, t: &Option<Vec<Cost>>) -> bool {
    t.as_ref()
        .is_none_or(|t| costs.iter().zip(t).all(|(c, b)| c <= b))
}

/// The full acceptance test for a candidate: secure, goal-optimized,
/// dev-optimized and within the thresholds.
pub fn accepts(tree: &TruncatedTree, sigma: &TreeStrategyProfile, thresholds: &Option<Vec<Cost>>) -> bool {
    let g = tree.game();
    let x = tree.profile(outcome(tree, sigma, tree.root()));
    within(x, thresholds)
        && is_goal_optimized(g, x)
        && is_secure(tree, sigma).holds()
        && is_dev_optimized(tree, sigma).is_ok_and(|v| v.holds())
}

/// Number of profiles of the tree, saturating at `u64::MAX`.
pub fn profile_count(tree: &TruncatedTree) -> u64 {
    tree.nodes()
        .filter(|&n| !tree.is_leaf(n))
        .fold(1u64, |acc, n| acc.saturating_mul(tree.children(n).len() as u64))
}

fn choose_depth(g: &GameGraph, v0: VertexId, opts: &DecideOptions) -> usize {
    if let Some(d) = opts.depth {
        return d;
    }
    let d = depth_constants(g).d;
    let sizes = level_sizes(g, v0, d);
    let mut total = 0usize;
    let mut depth = 0;
    for (i, s) in sizes.iter().enumerate() {
        total = total.saturating_add(*s);
        if total > opts.budgets.nodes {
            break;
        }
        depth = i;
    }
    depth.max(1)
}

pub fn decide_secure_existence(g: &GameGraph, v0: VertexId, opts: &DecideOptions) -> Result<Decision, TreeError> {
    let start = Instant::now();
    let depth = choose_depth(g, v0, opts);
    let tree = unravel_with(g, v0, depth, CostModel::Unit, opts.budgets.nodes)?;
    let full_depth = depth_constants(g).d;
    let count = profile_count(&tree);
    let mut stages = Vec::new();
    let t = &opts.thresholds;
    let clock = Clock::new(opts.budgets.time);

    let found = {
        stages.push(Stage::BackwardInduction);
        backward_induction_stage(&tree, t, opts.budgets.seeds, &clock)
    }
    .or_else(|| {
        if clock.out() {
            return None;
        }
        stages.push(Stage::OutcomeSupported);
        outcome_stage(&tree, t, opts.budgets.outcomes, &clock)
    });
    let timeout = || Answer::Unknown("time budget exhausted".into());
    let answer = match found {
        Some((stage, sigma)) => Answer::Yes(Box::new(witness(&tree, stage, sigma, t))),
        None if clock.out() => timeout(),
        None if count <= opts.budgets.profiles => {
            stages.push(Stage::Exhaustive);
            match exhaustive_stage(&tree, t, count, &clock) {
                Some(sigma) => Answer::Yes(Box::new(witness(&tree, Stage::Exhaustive, sigma, t))),
                None if clock.out() => timeout(),
                None => {
                    let double_checked = g.players() < 3 || independent_pass(&tree, t, count);
                    if !double_checked {
                        Answer::Unknown("the two exhaustive passes disagree".into())
                    } else if depth >= full_depth {
                        Answer::No(Exhaustion {
                            profiles: count,
                            double_checked: true,
                        })
                    } else {
                        Answer::Unknown(format!(
                            "no goal- and dev-optimized secure profile in T^{depth} ({count} profiles), but {depth} < d = {full_depth}"
                        ))
                    }
                }
            }
        }
        None => Answer::Unknown(format!(
            "no witness from stages 1-2 and {count} profiles exceed the budget of {}",
            opts.budgets.profiles
        )),
    };
    Ok(Decision {
        answer,
        depth,
        full_depth,
        tree_nodes: tree.len(),
        stages,
        profile_count: count,
        elapsed: start.elapsed(),
    })
}

/// Threshold variant: witnesses must have costs `c_i <= t_i`.
pub fn decide_secure_with_thresholds(
    g: &GameGraph,
    v0: VertexId,
    thresholds: Vec<Cost>,
    opts: &DecideOptions,
) -> Result<Decision, TreeError> {
    let opts = DecideOptions {
        thresholds: Some(thresholds),
        ..opts.clone()
    };
    decide_secure_existence(g, v0, &opts)
}

/// Re-verifies the profile from scratch and tries to assemble a
/// finite-memory version.
fn witness(tree: &TruncatedTree, stage: Stage, sigma: TreeStrategyProfile, t: &Option<Vec<Cost>>) -> YesWitness {
    assert!(accepts(tree, &sigma, t), "witness failed independent verification");
    let leaf = outcome(tree, &sigma, tree.root());
    let g = tree.game();
    let full = tree.depth() >= depth_constants(g).d;
    let bounds = if full { Bounds::Full } else { Bounds::Working };
    let (moore, moore_note) = match assemble_finite_memory(tree, &sigma, bounds) {
        Ok(a) => {
            let note = if full {
                format!("assembled on T^d with {} states per player", a.states_per_player)
            } else {
                format!(
                    "assembled on T^{} below d with {} states per player; {}",
                    tree.depth(),
                    a.states_per_player,
                    a.warnings.join("; ")
                )
            };
            (Some(a.moore), note)
        }
        Err(e) => (None, format!("assembly failed: {e}")),
    };
    YesWitness {
        stage,
        costs: tree.profile(leaf).clone(),
        outcome: tree.history(leaf),
        profile: sigma,
        moore,
        moore_note,
    }
}

pub fn stage_backward_induction(
    tree: &TruncatedTree,
    t: &Option<Vec<Cost>>,
    seeds: u64,
) -> Option<(Stage, TreeStrategyProfile)> {
    backward_induction_stage(tree, t, seeds, &Clock::new(None))
}

fn backward_induction_stage(
    tree: &TruncatedTree,
    t: &Option<Vec<Cost>>,
    seeds: u64,
    clock: &Clock,
) -> Option<(Stage, TreeStrategyProfile)> {
    for seed in 0..seeds.max(1) {
        if clock.out() {
            return None;
        }
        let sigma = backward_induction_seeded(tree, Family::Secure, seed);
        if accepts(tree, &sigma, t) {
            return Some((Stage::BackwardInduction, sigma));
        }
        if is_secure(tree, &sigma).holds() {
            let base = Arc::new(TreeBacked { tree, sigma });
            if let Ok(opt) = make_goal_dev_optimized(tree, base) {
                if accepts(tree, &opt.construction.profile, t) {
                    return Some((Stage::BackwardInduction, opt.construction.profile));
                }
            }
        }
    }
    None
}

/// Builds a profile with outcome `leaf` in which a deviating player is
/// answered by a memoryless coalition strategy chosen at the deviation.
fn supporting_profile(tree: &TruncatedTree, leaf: NodeId, targeted_first: bool) -> TreeStrategyProfile {
    let g = tree.game();
    let x = tree.profile(leaf).clone();
    let path = tree.history(leaf);
    let keep_out: Vec<Option<Vec<VertexId>>> = (0..g.players())
        .map(|j| {
            build_player_game(g, j, g.goal_set(j).iter().copied(), g.vertices())
                .ok()
                .map(|a| solve_reach_under_safety(&a).strategy_table().to_vec())
        })
        .collect();
    let mut choice = vec![NO_NODE; tree.len()];
    // Memoryless table in force below each node, with its deviator.
    let mut table: Vec<Option<(usize, Arc<Vec<VertexId>>)>> = vec![None; tree.len()];
    for n in tree.nodes() {
        if tree.is_leaf(n) {
            continue;
        }
        let d = tree.node_depth(n);
        let on_path = tree.ancestor_at(leaf, d) == n;
        let v = tree.vertex(n);
        let next = if on_path {
            path[d + 1]
        } else {
            let (j, tab) = table[n as usize].clone().expect("set by the parent");
            if g.owner(v) == j {
                g.least_successor(v)
            } else {
                tab[v.index()]
            }
        };
        let c = tree.child_with_vertex(n, next).expect("successor");
        choice[n as usize] = c;
        for c in tree.children(n) {
            table[c as usize] = if on_path {
                if tree.vertex(c) == path[d + 1] {
                    None
                } else {
                    let j = g.owner(v);
                    let h = tree.history(c);
                    let targeted = || {
                        coalition_punishment(g, &x, &h, j)
                            .ok()
                            .map(|p| p.solution.strategy_table().to_vec())
                    };
                    let tab = if targeted_first {
                        targeted().or_else(|| keep_out[j].clone())
                    } else {
                        keep_out[j].clone().or_else(targeted)
                    };
                    let tab = tab.unwrap_or_else(|| g.vertices().map(|v| g.least_successor(v)).collect());
                    Some((j, Arc::new(tab)))
                }
            } else {
                table[n as usize].clone()
            };
        }
    }
    TreeStrategyProfile::from_choices(tree, choice).expect("choices are children")
}

pub fn stage_outcome_supported(
    tree: &TruncatedTree,
    t: &Option<Vec<Cost>>,
    limit: usize,
) -> Option<(Stage, TreeStrategyProfile)> {
    outcome_stage(tree, t, limit, &Clock::new(None))
}

fn outcome_stage(
    tree: &TruncatedTree,
    t: &Option<Vec<Cost>>,
    limit: usize,
    clock: &Clock,
) -> Option<(Stage, TreeStrategyProfile)> {
    let g = tree.game();
    let d_goal = depth_constants(g).d_goal;
    let mut leaves: Vec<NodeId> = tree
        .leaves()
        .filter(|&l| {
            let x = tree.profile(l);
            x.iter().all(|c| c.is_infinite() || c.below(d_goal)) && within(x, t)
        })
        .collect();
    leaves.sort_by_key(|&l| (tree.profile(l).finite_sum(), l));
    leaves.truncate(limit);
    leaves.into_par_iter().find_map_first(|leaf| {
        if clock.out() {
            return None;
        }
        [true, false].into_iter().find_map(|targeted_first| {
            let sigma = supporting_profile(tree, leaf, targeted_first);
            accepts(tree, &sigma, t).then_some((Stage::OutcomeSupported, sigma))
        })
    })
}

fn internal_nodes(tree: &TruncatedTree) -> Vec<NodeId> {
    tree.nodes().filter(|&n| !tree.is_leaf(n)).collect()
}

fn decode(tree: &TruncatedTree, internal: &[NodeId], mut index: u64) -> TreeStrategyProfile {
    let mut choice = vec![NO_NODE; tree.len()];
    for &n in internal {
        let cs = tree.children(n);
        let k = cs.len() as u64;
        choice[n as usize] = cs.start + (index % k) as NodeId;
        index /= k;
    }
    TreeStrategyProfile::from_choices(tree, choice).expect("choices are children")
}

pub fn stage_exhaustive(tree: &TruncatedTree, t: &Option<Vec<Cost>>, count: u64) -> Option<TreeStrategyProfile> {
    exhaustive_stage(tree, t, count, &Clock::new(None))
}

fn exhaustive_stage(tree: &TruncatedTree, t: &Option<Vec<Cost>>, count: u64, clock: &Clock) -> Option<TreeStrategyProfile> {
    let internal = internal_nodes(tree);
    (0..count)
        .into_par_iter()
        .map(|i| decode(tree, &internal, i))
        .find_first(|sigma| !clock.out() && accepts(tree, sigma, t))
}

/// A second enumeration, in reverse order, with a secure check built on
/// the explicit achievable sets at the root.
fn independent_pass(tree: &TruncatedTree, t: &Option<Vec<Cost>>, count: u64) -> bool {
    let internal = internal_nodes(tree);
    let g = tree.game();
    !(0..count).rev().any(|i| {
        let sigma = decode(tree, &internal, i);
        let x = tree.profile(outcome(tree, &sigma, tree.root())).clone();
        let secure = (0..g.players()).all(|j| {
            achievable_set(tree, &sigma, tree.root(), j)
                .iter()
                .all(|y| !secure_prefers(j, &x, y))
        });
        secure
            && within(&x, t)
            && is_goal_optimized(g, &x)
            && is_dev_optimized(tree, &sigma).is_ok_and(|v| v.holds())
    })
}
