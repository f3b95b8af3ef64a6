//! Equilibrium checks and backward induction on truncated trees.
//!
//! A unilateral deviation of player `j` is summarized by the set of leaf
//! cost profiles that `j` can reach when the other players follow the
//! profile. These sets are computed bottom-up: at `j`'s nodes the sets of
//! the children are merged, elsewhere the chosen child's set is inherited.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cost::{Cost, CostProfile};
use crate::game::{GameGraph, VertexId};
use crate::preference::{choice_key, ChoiceKey, PreferenceKind};
use crate::tree::{outcome_leaves, CostModel, NodeId, TreeStrategyProfile, TruncatedTree};

/// Which relation a deviation must satisfy to be profitable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Strictly lower own cost.
    Nash,
    /// The secure relation `≺_j`.
    Secure,
}

impl Family {
    pub fn of(self, j: usize) -> PreferenceKind {
        match self {
            Family::Nash => PreferenceKind::NashOf(j),
            Family::Secure => PreferenceKind::SecureOf(j),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolverError {
    #[error("tree depth {depth} is below the required {required}")]
    TooShallow { depth: usize, required: usize },
    #[error("the profile is not a secure equilibrium")]
    NotSecure,
    #[error("costs are not integral step counts")]
    NonIntegral,
}

/// A profitable deviation found by a check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub player: usize,
    /// Node after which the deviation starts (the root for root checks).
    pub node: NodeId,
    pub history: Vec<VertexId>,
    /// Cost profile of the outcome from `node`.
    pub on_path: CostProfile,
    /// Cost profile reached by the deviation.
    pub deviation: CostProfile,
    /// A leaf history realizing `deviation`.
    pub deviation_play: Vec<VertexId>,
    pub family: Family,
}

impl Witness {
    /// Re-checks the claimed relation between the two profiles.
    pub fn is_consistent(&self) -> bool {
        self.family.of(self.player).prefers(&self.on_path, &self.deviation)
    }
}

/// Result of a check: holds, or a witness of a violation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub witness: Option<Witness>,
}

impl Verdict {
    pub const HOLDS: Verdict = Verdict { witness: None };

    pub fn holds(&self) -> bool {
        self.witness.is_none()
    }
}

/// Cost profiles in use, possibly cut at a horizon, with a map from the
/// tree's interned profile ids.
struct Pool {
    profiles: Vec<CostProfile>,
    map: Vec<u32>,
}

impl Pool {
    fn new(tree: &TruncatedTree, horizon: Option<usize>) -> Pool {
        match horizon {
            None => Pool {
                profiles: tree.profile_pool().to_vec(),
                map: (0..tree.profile_pool().len() as u32).collect(),
            },
            Some(h) => {
                let mut profiles = Vec::new();
                let mut ids: HashMap<CostProfile, u32> = HashMap::new();
                let map = tree
                    .profile_pool()
                    .iter()
                    .map(|p| {
                        let cut = cut_at(p, h);
                        *ids.entry(cut).or_insert_with_key(|c| {
                            profiles.push(c.clone());
                            (profiles.len() - 1) as u32
                        })
                    })
                    .collect();
                Pool { profiles, map }
            }
        }
    }

    fn of(&self, tree: &TruncatedTree, n: NodeId) -> u32 {
        self.map[tree.profile_id(n) as usize]
    }

    fn get(&self, id: u32) -> &CostProfile {
        &self.profiles[id as usize]
    }
}

/// Keeps only the costs that are strictly below `horizon`: the cost
/// profile of the prefix made of the vertices at indices `< horizon`.
pub fn cut_at(p: &CostProfile, horizon: usize) -> CostProfile {
    CostProfile::new(
        p.iter()
            .map(|c| if c.below(horizon) { *c } else { Cost::Infinite })
            .collect(),
    )
}

/// An achievable profile together with one leaf realizing it.
type Entry = (u32, NodeId);

fn merge(sets: impl Iterator<Item = Vec<Entry>>) -> Vec<Entry> {
    let mut all: Vec<Entry> = sets.flatten().collect();
    all.sort_unstable();
    all.dedup_by_key(|e| e.0);
    all
}

fn prune(set: &mut Vec<Entry>, kind: PreferenceKind, pool: &Pool) {
    if set.len() < 2 {
        return;
    }
    let keep: Vec<bool> = set
        .iter()
        .map(|(y, _)| {
            !set.iter()
                .any(|(z, _)| kind.prefers(pool.get(*y), pool.get(*z)))
        })
        .collect();
    let mut it = keep.into_iter();
    set.retain(|_| it.next().unwrap());
}

/// What to check while sweeping a player's deviation sets.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Scope {
    Root,
    EveryNode,
}

/// Nodes of the part of the tree that player `j` can steer into from
/// `from`, in an order where children come before parents.
fn deviation_region(
    tree: &TruncatedTree,
    sigma: &TreeStrategyProfile,
    j: usize,
    from: NodeId,
) -> Vec<NodeId> {
    let mut order = Vec::new();
    let mut stack = vec![from];
    while let Some(n) = stack.pop() {
        order.push(n);
        if tree.is_leaf(n) {
            continue;
        }
        if tree.owner(n) == j {
            stack.extend(tree.children(n));
        } else {
            stack.push(sigma.chosen(n));
        }
    }
    order.reverse();
    order
}

struct Sweep<'a> {
    tree: &'a TruncatedTree,
    sigma: &'a TreeStrategyProfile,
    leaf_of: &'a [NodeId],
    pool: &'a Pool,
}

impl Sweep<'_> {
    fn witness(&self, j: usize, n: NodeId, family: Family, x: u32, y: Entry) -> Witness {
        Witness {
            player: j,
            node: n,
            history: self.tree.history(n),
            on_path: self.pool.get(x).clone(),
            deviation: self.pool.get(y.0).clone(),
            deviation_play: self.tree.history(y.1),
            family,
        }
    }

    /// Sweeps player `j`'s deviation sets and returns the first violation.
    fn run(&self, j: usize, family: Family, scope: Scope) -> Option<Witness> {
        let tree = self.tree;
        let kind = family.of(j);
        let mut sets: HashMap<NodeId, Vec<Entry>> = HashMap::new();
        let order: Box<dyn Iterator<Item = NodeId>> = match scope {
            Scope::Root => Box::new(deviation_region(tree, self.sigma, j, tree.root()).into_iter()),
            Scope::EveryNode => Box::new(tree.nodes().rev()),
        };
        for n in order {
            let set = if tree.is_leaf(n) {
                vec![(self.pool.of(tree, n), n)]
            } else if tree.owner(n) == j {
                let mut s = merge(tree.children(n).map(|c| sets.remove(&c).unwrap_or_default()));
                prune(&mut s, kind, self.pool);
                s
            } else {
                let s = sets.remove(&self.sigma.chosen(n)).unwrap_or_default();
                if scope == Scope::EveryNode {
                    for c in tree.children(n) {
                        sets.remove(&c);
                    }
                }
                s
            };
            let check = match scope {
                Scope::Root => n == tree.root(),
                Scope::EveryNode => !tree.is_leaf(n) && tree.owner(n) == j,
            };
            if check {
                let x = self.pool.of(tree, self.leaf_of[n as usize]);
                if let Some(y) = set
                    .iter()
                    .find(|(y, _)| kind.prefers(self.pool.get(x), self.pool.get(*y)))
                {
                    return Some(self.witness(j, n, family, x, *y));
                }
            }
            sets.insert(n, set);
        }
        None
    }
}

fn check(
    tree: &TruncatedTree,
    sigma: &TreeStrategyProfile,
    family: Family,
    scope: Scope,
    horizon: Option<usize>,
) -> Verdict {
    let leaf_of = outcome_leaves(tree, sigma);
    let pool = Pool::new(tree, horizon);
    let sweep = Sweep {
        tree,
        sigma,
        leaf_of: &leaf_of,
        pool: &pool,
    };
    let found: Vec<Option<Witness>> = (0..tree.game().players())
        .into_par_iter()
        .map(|j| sweep.run(j, family, scope))
        .collect();
    Verdict {
        witness: found.into_iter().flatten().next(),
    }
}

/// Nash equilibrium at the root.
pub fn is_nash(tree: &TruncatedTree, sigma: &TreeStrategyProfile) -> Verdict {
    check(tree, sigma, Family::Nash, Scope::Root, None)
}

/// Secure equilibrium at the root.
pub fn is_secure(tree: &TruncatedTree, sigma: &TreeStrategyProfile) -> Verdict {
    check(tree, sigma, Family::Secure, Scope::Root, None)
}

/// Nash equilibrium in every subgame.
pub fn is_spe(tree: &TruncatedTree, sigma: &TreeStrategyProfile) -> Verdict {
    check(tree, sigma, Family::Nash, Scope::EveryNode, None)
}

/// Secure equilibrium in every subgame.
pub fn is_spse(tree: &TruncatedTree, sigma: &TreeStrategyProfile) -> Verdict {
    check(tree, sigma, Family::Secure, Scope::EveryNode, None)
}

/// Every cost profile player `j` can obtain from `node` against the other
/// players' choices in `sigma`.
pub fn achievable_set(
    tree: &TruncatedTree,
    sigma: &TreeStrategyProfile,
    node: NodeId,
    j: usize,
) -> BTreeSet<CostProfile> {
    deviation_region(tree, sigma, j, node)
        .into_iter()
        .filter(|n| tree.is_leaf(*n))
        .map(|n| tree.profile(n).clone())
        .collect()
}

/// Cost profile of the outcome of `sigma` from `node`.
pub fn outcome_profile(tree: &TruncatedTree, sigma: &TreeStrategyProfile, node: NodeId) -> CostProfile {
    tree.profile(crate::tree::outcome(tree, sigma, node)).clone()
}

/// Every finite cost is below `d_goal = 2 |Π| |V|`.
pub fn is_goal_optimized(g: &GameGraph, x: &CostProfile) -> bool {
    let d_goal = crate::tree::depth_constants(g).d_goal;
    x.iter().all(|c| c.is_infinite() || c.below(d_goal))
}

/// `max { finite x_i } + |V|`, with an empty maximum counted as 0.
pub fn dev_depth(x: &CostProfile, g: &GameGraph) -> Result<usize, SolverError> {
    let mut max = 0;
    for c in x.iter().filter(|c| c.is_finite()) {
        max = max.max(c.steps().ok_or(SolverError::NonIntegral)?);
    }
    Ok(max + g.vertex_count())
}

fn dev_depth_checked(tree: &TruncatedTree, x: &CostProfile) -> Result<usize, SolverError> {
    if tree.cost_model() == CostModel::Weighted {
        return Err(SolverError::NonIntegral);
    }
    let d_dev = dev_depth(x, tree.game())?;
    if tree.depth() < d_dev {
        return Err(SolverError::TooShallow {
            depth: tree.depth(),
            required: d_dev,
        });
    }
    Ok(d_dev)
}

/// No player can reach, within the first `d_dev` vertices, a prefix that
/// is `≺_j`-better than the outcome's prefix of the same length.
pub fn is_dev_optimized(tree: &TruncatedTree, sigma: &TreeStrategyProfile) -> Result<Verdict, SolverError> {
    let x = outcome_profile(tree, sigma, tree.root());
    let d_dev = dev_depth_checked(tree, &x)?;
    Ok(check(tree, sigma, Family::Secure, Scope::Root, Some(d_dev)))
}

/// The equivalent formulation for secure profiles: every deviation that
/// keeps `j`'s cost, raises no finite cost and raises some cost must give
/// a player with infinite outcome cost a cost below `d_dev`.
pub fn devopt_characterization(
    tree: &TruncatedTree,
    sigma: &TreeStrategyProfile,
) -> Result<Verdict, SolverError> {
    if !is_secure(tree, sigma).holds() {
        return Err(SolverError::NotSecure);
    }
    let root = tree.root();
    let x = outcome_profile(tree, sigma, root);
    let d_dev = dev_depth_checked(tree, &x)?;
    let players = tree.game().players();
    for j in 0..players {
        for n in deviation_region(tree, sigma, j, root) {
            if !tree.is_leaf(n) {
                continue;
            }
            let y = tree.profile(n);
            let premise = y[j] == x[j]
                && x.iter().zip(y.iter()).all(|(a, b)| a.is_infinite() || a <= b)
                && x.iter().zip(y.iter()).any(|(a, b)| a < b);
            let rescued = (0..players).any(|l| x[l].is_infinite() && y[l].below(d_dev));
            if premise && !rescued {
                return Ok(Verdict {
                    witness: Some(Witness {
                        player: j,
                        node: root,
                        history: tree.history(root),
                        on_path: x.clone(),
                        deviation: y.clone(),
                        deviation_play: tree.history(n),
                        family: Family::Secure,
                    }),
                });
            }
        }
    }
    Ok(Verdict::HOLDS)
}

/// Bottom-up construction of a subgame perfect profile: at each node the
/// owner picks a child whose outcome is optimal for a total preorder that
/// extends the owner's strict preference. Ties go to the least vertex.
pub fn backward_induction(tree: &TruncatedTree, family: Family) -> TreeStrategyProfile {
    backward_induction_seeded(tree, family, 0)
}

/// As [`backward_induction`], but seed `s > 0` breaks ties at random with
/// a reproducible generator.
pub fn backward_induction_seeded(tree: &TruncatedTree, family: Family, seed: u64) -> TreeStrategyProfile {
    let players = tree.game().players();
    let pool = tree.profile_pool();
    let keys: Vec<Vec<ChoiceKey>> = (0..players)
        .map(|j| pool.iter().map(|p| choice_key(family.of(j), p)).collect())
        .collect();
    let mut rng = (seed != 0).then(|| ChaCha8Rng::seed_from_u64(seed));
    let mut leaf_of = vec![crate::tree::NO_NODE; tree.len()];
    let mut choice = vec![crate::tree::NO_NODE; tree.len()];
    let mut best: Vec<NodeId> = Vec::new();
    for n in tree.nodes().rev() {
        if tree.is_leaf(n) {
            leaf_of[n as usize] = n;
            continue;
        }
        let key = &keys[tree.owner(n)];
        let key_of = |c: NodeId| &key[tree.profile_id(leaf_of[c as usize]) as usize];
        best.clear();
        for c in tree.children(n) {
            match best.first() {
                None => best.push(c),
                Some(&b) => match key_of(c).cmp(key_of(b)) {
                    std::cmp::Ordering::Less => {
                        best.clear();
                        best.push(c);
                    }
                    std::cmp::Ordering::Equal => best.push(c),
                    std::cmp::Ordering::Greater => {}
                },
            }
        }
        let c = match rng.as_mut() {
            Some(r) => *best.choose(r).unwrap(),
            None => best[0],
        };
        choice[n as usize] = c;
        leaf_of[n as usize] = leaf_of[c as usize];
    }
    TreeStrategyProfile::from_choices(tree, choice).expect("choices are children")
}
