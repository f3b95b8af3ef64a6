//! Transformations of secure equilibria: coalition punishments, cycle
//! removal, dev-optimization and the assembly of finite-memory profiles.
//!
//! Strategies here are functions of whole histories ([`Strategy`]), so
//! that a transformation can look up the input profile beyond the depth
//! of any particular tree. Results are materialized on a working tree and
//! re-verified there.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::Rng;

use crate::cost::{Cost, CostProfile};
use crate::format::ProfileRules;
use crate::game::{GameGraph, PlayerSet, VertexId};
use crate::moore::{MooreMachine, MooreProfile, StateId};
use crate::play::{cost_profile, lasso_cost_profile, lasso_visit_set, visit_set, CycleDecomposition, Lasso};
use crate::preference::{secure_prefers, secure_prefers_eq};
use crate::solver::{dev_depth, is_dev_optimized, is_goal_optimized, is_secure, SolverError, Verdict, Witness};
use crate::tree::{depth_constants, outcome, CostModel, NodeId, TreeStrategyProfile, TruncatedTree};
use crate::zero_sum::{build_coalition_game, build_player_game, solve_reach_under_safety, AttractorResult, ZeroSumError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConstructionError {
    #[error("input profile is not a secure equilibrium")]
    NotSecure,
    #[error("history length {len} is outside the window of the sorted costs {costs}")]
    Window { len: usize, costs: CostProfile },
    #[error("decomposition precondition violated: {0}")]
    Precondition(String),
    #[error("re-verification failed: player {} deviates to {}", .0.player + 1, .0.deviation)]
    Reverification(Box<Witness>),
    #[error("no decomposition of the outcome found: {0}")]
    DecompositionNotFound(String),
    #[error("strategy moves from {0} to a non-successor")]
    IllegalMove(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    ZeroSum(#[from] ZeroSumError),
}

type Result<T> = std::result::Result<T, ConstructionError>;

/// A strategy profile as a function of histories: the move of the owner
/// of the last vertex.
pub trait Strategy: Send + Sync {
    fn next(&self, g: &GameGraph, h: &[VertexId]) -> Result<VertexId>;
}

pub type SharedStrategy<'a> = Arc<dyn Strategy + 'a>;

/// A tree profile, extended by least successors beyond the tree.
pub struct TreeBacked<'t> {
    pub tree: &'t TruncatedTree,
    pub sigma: TreeStrategyProfile,
}

impl Strategy for TreeBacked<'_> {
    fn next(&self, g: &GameGraph, h: &[VertexId]) -> Result<VertexId> {
        Ok(match self.tree.find(h) {
            Some(n) if !self.tree.is_leaf(n) => self.tree.vertex(self.sigma.chosen(n)),
            _ => g.least_successor(*h.last().unwrap()),
        })
    }
}

impl Strategy for ProfileRules {
    fn next(&self, g: &GameGraph, h: &[VertexId]) -> Result<VertexId> {
        Ok(self
            .move_after(g, h)
            .unwrap_or_else(|| g.least_successor(*h.last().unwrap())))
    }
}

impl Strategy for MooreProfile {
    fn next(&self, g: &GameGraph, h: &[VertexId]) -> Result<VertexId> {
        Ok(self.move_after(g, h))
    }
}

/// One move per vertex.
pub struct Memoryless(pub Vec<VertexId>);

impl Strategy for Memoryless {
    fn next(&self, _: &GameGraph, h: &[VertexId]) -> Result<VertexId> {
        Ok(self.0[h.last().unwrap().index()])
    }
}

/// The play of `len` edges from `v0`.
pub fn simulate(g: &GameGraph, s: &dyn Strategy, v0: VertexId, len: usize) -> Result<Vec<VertexId>> {
    let mut path = vec![v0];
    for _ in 0..len {
        let v = *path.last().unwrap();
        let w = s.next(g, &path)?;
        if !g.has_edge(v, w) {
            return Err(ConstructionError::IllegalMove(crate::play::path_string(g, &path)));
        }
        path.push(w);
    }
    Ok(path)
}

/// Evaluates a strategy at every internal node of the tree.
pub fn materialize(tree: &TruncatedTree, s: &dyn Strategy) -> Result<TreeStrategyProfile> {
    let g = tree.game();
    let mut err = None;
    let profile = TreeStrategyProfile::from_fn(tree, |n| match s.next(g, &tree.history(n)) {
        Ok(v) => Some(v),
        Err(e) => {
            err.get_or_insert(e);
            None
        }
    });
    match (err, profile) {
        (Some(e), _) => Err(e),
        (None, Ok(p)) => Ok(p),
        (None, Err(e)) => Err(ConstructionError::IllegalMove(e.to_string())),
    }
}

fn steps(c: &Cost) -> Option<usize> {
    c.steps()
}

/// Players ordered by cost, ties by index, with the window indices of a
/// history length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortedCosts {
    costs: CostProfile,
    order: Vec<usize>,
}

impl SortedCosts {
    pub fn new(costs: &CostProfile) -> Self {
        let mut order: Vec<usize> = (0..costs.players()).collect();
        order.sort_by_key(|&i| costs[i]);
        SortedCosts {
            costs: costs.clone(),
            order,
        }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Number `k` of players whose cost is at most `len`.
    pub fn k_at(&self, len: usize) -> usize {
        self.costs.iter().filter(|c| c.below(len + 1)).count()
    }

    /// Number `l` of finite costs.
    pub fn l(&self) -> usize {
        self.costs.iter().filter(|c| c.is_finite()).count()
    }

    /// `x_{k+1}` for the window of `len`, `None` when `k = n`.
    pub fn next_after(&self, len: usize) -> Option<Cost> {
        self.order
            .iter()
            .map(|&i| self.costs[i])
            .find(|c| !c.below(len + 1))
    }
}

/// `None` while `h` follows the reference, otherwise the owner of the
/// vertex where `h` first left it.
pub fn punishment(g: &GameGraph, h: &[VertexId], reference: &Lasso) -> Option<usize> {
    pun_against(g, h, |t| Some(reference.at(t)))
}

fn pun_against(g: &GameGraph, h: &[VertexId], reference: impl Fn(usize) -> Option<VertexId>) -> Option<usize> {
    (1..h.len())
        .find(|&t| reference(t) != Some(h[t]))
        .map(|t| g.owner(h[t - 1]))
}

/// Classification of a history against the cost profile `x` of an
/// outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Promise {
    Promising,
    NotPromising,
    /// Not consistent with the other players' strategies.
    Inconsistent,
    /// Already strictly cheaper for the deviator, so the profile was not
    /// secure.
    Profitable,
}

/// The cost part of the definition, for a history of length `len` with
/// cost profile `cost_h`, assuming consistency.
pub fn promise_of_costs(x: &CostProfile, cost_h: &CostProfile, len: usize, j: usize) -> Result<Promise> {
    let sorted = SortedCosts::new(x);
    let next = sorted.next_after(len).ok_or_else(|| ConstructionError::Window {
        len,
        costs: x.clone(),
    })?;
    if cost_h[j] < x[j] {
        return Ok(Promise::Profitable);
    }
    let all_ge = (0..x.players()).all(|i| cost_h[i] >= x[i]);
    let ok = if next.is_finite() {
        if x[j].below(len + 1) {
            cost_h[j] == x[j] && all_ge
        } else {
            cost_h[j].is_infinite()
        }
    } else {
        cost_h[j] == x[j] && all_ge && (0..x.players()).any(|i| cost_h[i] > x[i])
    };
    Ok(if ok { Promise::Promising } else { Promise::NotPromising })
}

/// Full check: consistency of `h` with `sigma` off player `j`, then the
/// cost conditions.
pub fn is_promising(
    g: &GameGraph,
    sigma: &dyn Strategy,
    x: &CostProfile,
    h: &[VertexId],
    j: usize,
) -> Result<Promise> {
    for t in 0..h.len() - 1 {
        if g.owner(h[t]) != j && sigma.next(g, &h[..=t])? != h[t + 1] {
            return Ok(Promise::Inconsistent);
        }
    }
    let cost_h = cost_profile(g, h, None).expect("valid history");
    promise_of_costs(x, &cost_h, h.len() - 1, j)
}

/// Which objective the coalition plays against the deviator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PunishCase {
    /// The deviator already has the cost of the outcome: force a visit of
    /// a goal set not yet visited.
    ForceLaterGoals,
    /// The deviator's goal is visited later on the outcome: keep it out.
    KeepOut,
    /// The deviator never reaches its goal and is not ahead: force other
    /// goals while keeping it out.
    ForceOthersKeepOut,
    /// The deviator never reaches its goal and is behind: keep it out.
    KeepOutBehind,
}

/// A memoryless coalition strategy against player `j`.
#[derive(Debug, Clone)]
pub struct Punishment {
    pub deviator: usize,
    pub case: PunishCase,
    pub reach: Vec<VertexId>,
    pub safe: Vec<VertexId>,
    pub solution: AttractorResult,
}

impl Punishment {
    pub fn choice(&self, v: VertexId) -> VertexId {
        self.solution.choice(v)
    }
}

/// Picks the reach/safety objective for the coalition after the
/// `j`-promising history `h` and solves it. Fails when the coalition
/// does not win from `last(h)`.
pub fn coalition_punishment(g: &GameGraph, x: &CostProfile, h: &[VertexId], j: usize) -> Result<Punishment> {
    let len = h.len() - 1;
    let sorted = SortedCosts::new(x);
    let window = || ConstructionError::Window {
        len,
        costs: x.clone(),
    };
    let next = sorted.next_after(len).ok_or_else(window)?;
    if next.steps().is_some_and(|n| len + g.vertex_count() > n) {
        return Err(window());
    }
    let later: Vec<usize> = (0..g.players()).filter(|&i| !x[i].below(len + 1)).collect();
    let goals = |players: &mut dyn Iterator<Item = usize>| -> Vec<VertexId> {
        let mut vs: Vec<VertexId> = players.flat_map(|i| g.goal_set(i).iter().copied()).collect();
        vs.sort();
        vs.dedup();
        vs
    };
    let all: Vec<VertexId> = g.vertices().collect();
    let keep_out: Vec<VertexId> = g.vertices().filter(|v| !g.goal_set(j).contains(v)).collect();
    let cost_h = cost_profile(g, h, None).expect("valid history");
    let case = if x[j].below(len + 1) {
        PunishCase::ForceLaterGoals
    } else if x[j].is_finite() {
        PunishCase::KeepOut
    } else if secure_prefers_eq(j, &crate::solver::cut_at(x, len + 1), &cost_h) {
        PunishCase::ForceOthersKeepOut
    } else {
        PunishCase::KeepOutBehind
    };
    let (reach, safe) = match case {
        PunishCase::ForceLaterGoals => (goals(&mut later.iter().copied()), all),
        PunishCase::KeepOut | PunishCase::KeepOutBehind => (all, keep_out),
        PunishCase::ForceOthersKeepOut => (goals(&mut later.iter().copied().filter(|&i| i != j)), keep_out),
    };
    let arena = build_coalition_game(g, j, reach.iter().copied(), safe.iter().copied())
        .map_err(|e| match e {
            ZeroSumError::EmptyReach => ConstructionError::NotSecure,
            e => e.into(),
        })?;
    let solution = solve_reach_under_safety(&arena);
    if !solution.is_winning(*h.last().unwrap()) {
        return Err(ConstructionError::NotSecure);
    }
    Ok(Punishment {
        deviator: j,
        case,
        reach,
        safe,
        solution,
    })
}

/// How a rewired profile treats deviations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rewiring {
    /// Skip β on the outcome and punish promising deviations before α.
    RemoveCycle,
    /// Skip β only; deviations are answered by the input profile.
    NaiveShift,
    /// Keep the outcome and punish promising deviations of length |α|.
    DevOptimize,
}

/// The profile built from `base` by the chosen rewiring around the
/// outcome prefix `alpha` and the cycle `beta` that follows it.
pub struct Rewired<'a> {
    base: SharedStrategy<'a>,
    alpha: Vec<VertexId>,
    beta: Vec<VertexId>,
    mode: Rewiring,
    x: CostProfile,
    cache: Mutex<HashMap<Vec<VertexId>, Option<Arc<Punishment>>>>,
}

impl<'a> Rewired<'a> {
    fn pivot(&self, g: &GameGraph, prefix: &[VertexId], j: usize) -> Result<Option<Arc<Punishment>>> {
        if let Some(p) = self.cache.lock().unwrap().get(prefix) {
            return Ok(p.clone());
        }
        let found = match is_promising(g, self.base.as_ref(), &self.x, prefix, j) {
            Ok(Promise::Promising) => Some(Arc::new(coalition_punishment(g, &self.x, prefix, j)?)),
            Ok(Promise::Profitable) => return Err(ConstructionError::NotSecure),
            Ok(_) | Err(ConstructionError::Window { .. }) => None,
            Err(e) => return Err(e),
        };
        self.cache.lock().unwrap().insert(prefix.to_vec(), found.clone());
        Ok(found)
    }
}

impl Strategy for Rewired<'_> {
    fn next(&self, g: &GameGraph, h: &[VertexId]) -> Result<VertexId> {
        let a = self.alpha.len();
        if h.len() >= a && h[..a] == self.alpha[..] {
            if self.mode == Rewiring::DevOptimize {
                return self.base.next(g, h);
            }
            let mut shifted = self.alpha.clone();
            shifted.extend_from_slice(&self.beta);
            shifted.extend_from_slice(&h[a..]);
            return self.base.next(g, &shifted);
        }
        if self.mode == Rewiring::NaiveShift {
            return self.base.next(g, h);
        }
        let Some(j) = pun_against(g, h, |t| self.alpha.get(t).copied()) else {
            return self.base.next(g, h);
        };
        let last = *h.last().unwrap();
        if g.owner(last) == j {
            return Ok(g.least_successor(last));
        }
        if h.len() >= a {
            if let Some(p) = self.pivot(g, &h[..a], j)? {
                return Ok(p.choice(last));
            }
        }
        self.base.next(g, h)
    }
}

/// A transformed profile, materialized on a working tree.
pub struct Construction<'a> {
    pub strategy: SharedStrategy<'a>,
    pub profile: TreeStrategyProfile,
    /// Outcome history in the working tree.
    pub outcome: Vec<VertexId>,
    pub costs: CostProfile,
    pub secure: Verdict,
}

impl<'a> Construction<'a> {
    fn build(tree: &TruncatedTree, strategy: SharedStrategy<'a>) -> Result<Self> {
        let profile = materialize(tree, strategy.as_ref())?;
        let leaf = outcome(tree, &profile, tree.root());
        let secure = is_secure(tree, &profile);
        Ok(Construction {
            strategy,
            outcome: tree.history(leaf),
            costs: tree.profile(leaf).clone(),
            profile,
            secure,
        })
    }

    /// Turns a failed security check into an error.
    pub fn verified(self) -> Result<Self> {
        match &self.secure.witness {
            None => Ok(self),
            Some(w) => Err(ConstructionError::Reverification(Box::new(w.clone()))),
        }
    }
}

fn unit_costs(tree: &TruncatedTree) -> Result<()> {
    if tree.cost_model() == CostModel::Weighted {
        return Err(SolverError::NonIntegral.into());
    }
    Ok(())
}

/// Checks that `sigma` is secure on the tree and returns its outcome
/// costs there.
fn secure_input(tree: &TruncatedTree, sigma: &dyn Strategy) -> Result<CostProfile> {
    unit_costs(tree)?;
    let c = Construction::build(tree, Arc::new(Adapter(sigma)))?;
    if !c.secure.holds() {
        return Err(ConstructionError::NotSecure);
    }
    Ok(c.costs)
}

struct Adapter<'s>(&'s dyn Strategy);

impl Strategy for Adapter<'_> {
    fn next(&self, g: &GameGraph, h: &[VertexId]) -> Result<VertexId> {
        self.0.next(g, h)
    }
}

/// Validates a cycle decomposition of the outcome `rho` with costs `x`.
/// `strict` also demands that the next goal visit after α is at least
/// `|αβ| + |V|` steps in.
fn check_decomposition(g: &GameGraph, rho: &[VertexId], x: &CostProfile, dec: CycleDecomposition, strict: bool) -> Result<()> {
    let pre = |m: String| Err(ConstructionError::Precondition(m));
    let (a, b) = (dec.alpha_end, dec.beta_end);
    if b <= a || b >= rho.len() {
        return pre(format!("cycle positions {a}..{b} out of range"));
    }
    if rho[a] != rho[b] {
        return pre("β does not close on last(α)".into());
    }
    if visit_set(g, &rho[..=a]) != visit_set(g, &rho[..=b]) {
        return pre("β visits a new goal set".into());
    }
    let Some(next) = x.iter().filter_map(steps).filter(|&c| c > a).min() else {
        return pre("no goal set is visited after α".into());
    };
    if strict && next < b + g.vertex_count() {
        return pre(format!(
            "the next goal visit at {next} leaves fewer than |V| = {} steps after αβ (|αβ| = {b})",
            g.vertex_count()
        ));
    }
    Ok(())
}

fn rewire<'a>(
    tree: &TruncatedTree,
    sigma: SharedStrategy<'a>,
    dec: CycleDecomposition,
    mode: Rewiring,
    strict: bool,
) -> Result<Construction<'a>> {
    let g = tree.game();
    let x = secure_input(tree, sigma.as_ref())?;
    let rho = simulate(g, sigma.as_ref(), tree.vertex(tree.root()), tree.depth() + dec.beta_len())?;
    if mode != Rewiring::DevOptimize {
        check_decomposition(g, &rho, &x, dec, strict)?;
    }
    let strategy: SharedStrategy<'a> = Arc::new(Rewired {
        base: sigma,
        alpha: rho[..=dec.alpha_end].to_vec(),
        beta: rho[dec.alpha_end + 1..=dec.beta_end].to_vec(),
        mode,
        x: x.clone(),
        cache: Mutex::new(HashMap::new()),
    });
    let c = Construction::build(tree, strategy)?;
    let mut expected = rho[..=dec.alpha_end].to_vec();
    let skip = if mode == Rewiring::DevOptimize { 0 } else { dec.beta_len() };
    expected.extend_from_slice(&rho[dec.alpha_end + 1 + skip..]);
    expected.truncate(tree.depth() + 1);
    debug_assert_eq!(c.outcome, expected);
    Ok(c)
}

/// Removes the cycle β from the outcome of the secure profile `sigma`,
/// punishing promising deviations before α with coalition strategies.
/// The result is re-verified on `tree`.
pub fn remove_cycle<'a>(tree: &TruncatedTree, sigma: SharedStrategy<'a>, dec: CycleDecomposition) -> Result<Construction<'a>> {
    rewire(tree, sigma, dec, Rewiring::RemoveCycle, true)?.verified()
}

/// The same construction without the distance requirement between β and
/// the next goal visit, and without re-verification.
pub fn remove_cycle_unchecked<'a>(
    tree: &TruncatedTree,
    sigma: SharedStrategy<'a>,
    dec: CycleDecomposition,
) -> Result<Construction<'a>> {
    rewire(tree, sigma, dec, Rewiring::RemoveCycle, false)
}

/// Skips β without changing any punishment. Not re-verified.
pub fn naive_shift<'a>(tree: &TruncatedTree, sigma: SharedStrategy<'a>, dec: CycleDecomposition) -> Result<Construction<'a>> {
    rewire(tree, sigma, dec, Rewiring::NaiveShift, false)
}

/// A dev-optimized secure profile with the same outcome.
pub fn make_dev_optimized<'a>(tree: &TruncatedTree, sigma: SharedStrategy<'a>) -> Result<Construction<'a>> {
    let x = secure_input(tree, sigma.as_ref())?;
    let alpha_end = x.iter().filter_map(steps).max().unwrap_or(0);
    let dec = CycleDecomposition {
        alpha_end,
        beta_end: alpha_end,
    };
    let c = rewire(tree, sigma, dec, Rewiring::DevOptimize, false)?.verified()?;
    if c.costs != x {
        return Err(ConstructionError::Precondition("outcome changed".into()));
    }
    match is_dev_optimized(tree, &c.profile)?.witness {
        None => Ok(c),
        Some(w) => Err(ConstructionError::Reverification(Box::new(w))),
    }
}

/// Gap search of the goal-optimization loop: the first `k` (from 0) with
/// `x_{k+1} - x_k >= 2|V|` over the sorted finite costs, `x_0 = 0`, and a
/// cycle in the window `[x_k, x_k + |V|]` of the outcome.
pub fn goal_gap_cycle(g: &GameGraph, rho: &[VertexId], x: &CostProfile) -> Option<CycleDecomposition> {
    let n = g.vertex_count();
    let mut finite: Vec<usize> = x.iter().filter_map(steps).collect();
    finite.sort();
    let mut prev = 0;
    for next in finite {
        if next >= prev + 2 * n {
            let hi = (prev + n).min(rho.len() - 1);
            for b in prev + 1..=hi {
                if let Some(a) = (prev..b).find(|&a| rho[a] == rho[b]) {
                    return Some(CycleDecomposition {
                        alpha_end: a,
                        beta_end: b,
                    });
                }
            }
            return None;
        }
        prev = next;
    }
    None
}

/// Result of the goal/dev-optimization loop.
pub struct Optimized<'a> {
    pub construction: Construction<'a>,
    /// The cycles removed, in order.
    pub removed: Vec<CycleDecomposition>,
    pub input_costs: CostProfile,
}

/// Removes cycles while some gap between sorted costs is at least `2|V|`,
/// then dev-optimizes. Costs never increase.
pub fn make_goal_dev_optimized<'a>(tree: &TruncatedTree, sigma: SharedStrategy<'a>) -> Result<Optimized<'a>> {
    let g = tree.game();
    let input_costs = secure_input(tree, sigma.as_ref())?;
    let mut current = sigma;
    let mut costs = input_costs.clone();
    let mut removed = Vec::new();
    loop {
        let rho = simulate(g, current.as_ref(), tree.vertex(tree.root()), tree.depth())?;
        let Some(dec) = goal_gap_cycle(g, &rho, &costs) else {
            break;
        };
        let c = remove_cycle(tree, current, dec)?;
        debug_assert!(c.costs.finite_sum() < costs.finite_sum());
        removed.push(dec);
        costs = c.costs.clone();
        current = c.strategy;
    }
    let construction = make_dev_optimized(tree, current)?;
    if !is_goal_optimized(g, &construction.costs) {
        return Err(ConstructionError::Precondition("loop ended with a goal gap".into()));
    }
    if !construction.costs.dominated_by(&input_costs) {
        return Err(ConstructionError::Precondition("a cost increased".into()));
    }
    Ok(Optimized {
        construction,
        removed,
        input_costs,
    })
}

/// Where the decomposition window of the assembly starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bounds {
    /// `|α| >= d_goal + |V|`, as required on `T^d`.
    Full,
    /// `|α| >= d_dev`, enough for the punishments to see every profitable
    /// deviation of a dev-optimized profile on a smaller tree.
    Working,
}

/// A finite-memory profile assembled from a tree profile.
#[derive(Debug, Clone)]
pub struct Assembly {
    pub moore: MooreProfile,
    pub decomposition: CycleDecomposition,
    pub outcome: Lasso,
    pub costs: CostProfile,
    pub visit: PlayerSet,
    /// States of each player's machine.
    pub states_per_player: usize,
    /// Upper bound on `states_per_player`.
    pub state_bound: usize,
    pub warnings: Vec<String>,
}

/// Builds a Moore profile with outcome `αβ^ω` that follows the tree
/// profile `tau` on deviations until depth `|α|` and then switches to a
/// memoryless coalition strategy keeping the deviator out of its goal.
pub fn assemble_finite_memory(tree: &TruncatedTree, tau: &TreeStrategyProfile, bounds: Bounds) -> Result<Assembly> {
    unit_costs(tree)?;
    let g = tree.game();
    let n = g.vertex_count();
    let players = g.players();
    if let Some(w) = is_secure(tree, tau).witness {
        return Err(ConstructionError::Reverification(Box::new(w)));
    }
    let leaf = outcome(tree, tau, tree.root());
    let pi = tree.history(leaf);
    let x = tree.profile(leaf).clone();
    let mut warnings = Vec::new();
    let dc = depth_constants(g);
    if !is_goal_optimized(g, &x) {
        return Err(ConstructionError::DecompositionNotFound("the profile is not goal-optimized".into()));
    }
    if let Some(w) = is_dev_optimized(tree, tau)?.witness {
        return Err(ConstructionError::Reverification(Box::new(w)));
    }
    let start = match bounds {
        Bounds::Full => dc.d_goal + n,
        Bounds::Working => {
            let s = dev_depth(&x, g)?;
            if tree.depth() < dc.d {
                warnings.push(format!(
                    "working depth {} is below d = {}; the result rests on re-verification",
                    tree.depth(),
                    dc.d
                ));
            }
            s
        }
    };
    if start + n > tree.depth() {
        return Err(ConstructionError::DecompositionNotFound(format!(
            "the tree depth {} is below {} + |V|",
            tree.depth(),
            start
        )));
    }
    let (a, b) = (start..=start + n)
        .flat_map(|b| (start..b).map(move |a| (a, b)))
        .find(|&(a, b)| pi[a] == pi[b])
        .expect("pigeonhole on |V| + 1 positions");
    if visit_set(g, &pi[..=a]) != visit_set(g, &pi) {
        return Err(ConstructionError::DecompositionNotFound("a goal set is first visited after α".into()));
    }
    let alpha_visits = visit_set(g, &pi[..=a]);

    // Coalition strategies against each player whose goal α misses.
    let mut punish: Vec<Option<AttractorResult>> = Vec::with_capacity(players);
    for j in 0..players {
        punish.push(if alpha_visits.contains(j) {
            None
        } else {
            let arena = build_player_game(g, j, g.goal_set(j).iter().copied(), g.vertices())?;
            Some(solve_reach_under_safety(&arena))
        });
    }

    let mut names = vec!["init".to_string(), "free".to_string()];
    let free: StateId = 1;
    let pun_state = |j: usize| (2 + j) as StateId;
    names.extend((0..players).map(|j| format!("pun{}", j + 1)));
    let pos0 = names.len() as StateId;
    names.extend((0..b).map(|t| format!("p{t}")));
    let mut node_state: HashMap<NodeId, (StateId, usize)> = HashMap::new();
    let mut trans: Vec<(StateId, VertexId, StateId)> = Vec::new();
    let mut outs: Vec<(StateId, VertexId, VertexId)> = Vec::new();
    let after_alpha = |j: usize| if punish[j].is_some() { pun_state(j) } else { free };

    trans.push((0, pi[0], pos0));
    let mut stack: Vec<NodeId> = Vec::new();
    let mut path_node = tree.root();
    for t in 0..b {
        let s = pos0 + t as StateId;
        let v = pi[t];
        let (next_vertex, next_state) = if t + 1 < b {
            (pi[t + 1], pos0 + t as StateId + 1)
        } else {
            (pi[b], pos0 + a as StateId)
        };
        outs.push((s, v, next_vertex));
        for &w in g.successors(v) {
            if w == next_vertex {
                trans.push((s, w, next_state));
            } else if t + 1 < a {
                let c = tree.child_with_vertex(path_node, w).expect("inside the tree");
                let id = names.len() as StateId;
                names.push(format!("n{c}"));
                node_state.insert(c, (id, g.owner(v)));
                stack.push(c);
                trans.push((s, w, id));
            } else {
                trans.push((s, w, after_alpha(g.owner(v))));
            }
        }
        if t + 1 < b {
            path_node = tree.child_with_vertex(path_node, pi[t + 1]).expect("on the outcome");
        }
    }
    while let Some(nd) = stack.pop() {
        let (s, j) = node_state[&nd];
        let v = tree.vertex(nd);
        if g.owner(v) != j {
            outs.push((s, v, tree.vertex(tau.chosen(nd))));
        }
        for c in tree.children(nd) {
            let w = tree.vertex(c);
            if tree.node_depth(c) < a {
                let id = names.len() as StateId;
                names.push(format!("n{c}"));
                node_state.insert(c, (id, j));
                stack.push(c);
                trans.push((s, w, id));
            } else {
                trans.push((s, w, after_alpha(j)));
            }
        }
    }
    for (j, p) in punish.iter().enumerate() {
        if let Some(p) = p {
            for v in g.vertices().filter(|v| g.owner(*v) != j) {
                outs.push((pun_state(j), v, p.choice(v)));
            }
        }
    }

    let mut machine = MooreMachine::new(names);
    for (s, v, t) in trans {
        machine.set_transition(s, v, t);
    }
    let mut machines = vec![machine; players];
    for (s, v, w) in outs {
        machines[g.owner(v)].set_output(s, v, w);
    }
    let states_per_player = machines[0].state_count();
    let moore = MooreProfile::new(g, machines).expect("outputs follow edges");

    let lasso = Lasso::new(g, pi[..a].to_vec(), pi[a..b].to_vec())
        .expect("outcome prefix is a path")
        .normalized();
    let simulated = moore
        .outcome(g, pi[0], 4 * tree.depth() + states_per_player)
        .map_err(|e| ConstructionError::DecompositionNotFound(e.to_string()))?;
    let costs = lasso_cost_profile(g, &simulated);
    let visit = lasso_visit_set(g, &simulated);
    if simulated != lasso || costs != x || visit != visit_set(g, &pi) {
        return Err(ConstructionError::DecompositionNotFound("simulated outcome differs from αβ^ω".into()));
    }
    let histories: usize = (0..=a).map(|d| tree.level(d).len()).sum();
    let state_bound = histories + n * players + 3;
    assert!(states_per_player <= state_bound, "memory bound exceeded");
    Ok(Assembly {
        moore,
        decomposition: CycleDecomposition {
            alpha_end: a,
            beta_end: b,
        },
        outcome: simulated,
        costs,
        visit,
        states_per_player,
        state_bound,
        warnings,
    })
}

/// Outcome when player `j` plays uniformly random moves for `free_steps`
/// steps and then a random memoryless table, against `profile`. The
/// result is exact because the final phase is finite-state.
pub fn random_deviation(
    g: &GameGraph,
    profile: &MooreProfile,
    v0: VertexId,
    j: usize,
    free_steps: usize,
    rng: &mut impl Rng,
) -> Lasso {
    let table: Vec<VertexId> = g
        .vertices()
        .map(|v| {
            let s = g.successors(v);
            s[rng.gen_range(0..s.len())]
        })
        .collect();
    let mut states = profile.start();
    profile.observe(&mut states, v0);
    let mut path = vec![v0];
    let mut seen: HashMap<(Vec<StateId>, VertexId), usize> = HashMap::new();
    loop {
        let v = *path.last().unwrap();
        let t = path.len() - 1;
        if t >= free_steps {
            if let Some(&first) = seen.get(&(states.clone(), v)) {
                path.pop();
                let cycle = path.split_off(first);
                let mut stem = path;
                if stem.is_empty() {
                    stem = cycle.clone();
                }
                return Lasso::new(g, stem, cycle).expect("simulated play").normalized();
            }
            seen.insert((states.clone(), v), t);
        }
        let w = if g.owner(v) == j {
            if t < free_steps {
                let s = g.successors(v);
                s[rng.gen_range(0..s.len())]
            } else {
                table[v.index()]
            }
        } else {
            profile.next_move(g, &states, v)
        };
        path.push(w);
        profile.observe(&mut states, w);
    }
}

/// `true` iff the deviation outcome is strictly better for `j` than `x`.
pub fn beats(j: usize, x: &CostProfile, deviation: &CostProfile) -> bool {
    secure_prefers(j, x, deviation)
}
