//! Unraveling of an arena into the truncated tree of histories, and tree
//! strategy profiles.

use std::collections::HashMap;
use std::ops::Range;

use num_traits::Zero;

use crate::cost::{Cost, CostProfile, Rational};
use crate::game::{GameGraph, PlayerSet, VertexId};

pub type NodeId = u32;

/// Marker for "no node" (the root's parent, a leaf's choice).
pub const NO_NODE: NodeId = u32::MAX;

/// Default cap on materialized tree nodes.
pub const DEFAULT_NODE_BUDGET: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("the truncation depth must be at least 1")]
    ZeroDepth,
    #[error("vertex index {0} out of range")]
    UnknownVertex(u32),
    #[error("tree exceeds the node budget of {budget} (depth {depth} alone needs {needed} nodes)")]
    Budget {
        budget: usize,
        depth: usize,
        needed: usize,
    },
    #[error("edge {0} -> {1} carries no weights")]
    MissingWeight(String, String),
}

/// How costs are accumulated along branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CostModel {
    /// The cost of a player is the index of the first goal visit.
    #[default]
    Unit,
    /// The cost is the sum of the player's edge weights up to that visit.
    Weighted,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    vertex: VertexId,
    parent: NodeId,
    depth: u32,
    first_child: NodeId,
    child_count: u32,
    visit: PlayerSet,
    profile: u32,
}

/// The tree of all histories of length at most `depth` from a fixed
/// initial vertex, stored in breadth-first order. Children are contiguous
/// and sorted by vertex id. Each node carries its visit set and the cost
/// profile of the history it stands for, with unvisited goals at `inf`.
#[derive(Debug, Clone)]
pub struct TruncatedTree {
    game: GameGraph,
    depth: usize,
    model: CostModel,
    nodes: Vec<Node>,
    level_start: Vec<NodeId>,
    profiles: Vec<CostProfile>,
}

/// Depth constants of the secure-equilibrium decision procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DepthConstants {
    pub d_goal: usize,
    pub d: usize,
}

pub fn depth_constants(g: &GameGraph) -> DepthConstants {
    let d_goal = 2 * g.players() * g.vertex_count();
    DepthConstants {
        d_goal,
        d: d_goal + 3 * g.vertex_count(),
    }
}

/// Number of histories of each length `0..=depth` from `v0`, saturating.
pub fn level_sizes(g: &GameGraph, v0: VertexId, depth: usize) -> Vec<usize> {
    let mut counts = vec![0usize; g.vertex_count()];
    counts[v0.index()] = 1;
    let mut sizes = vec![1];
    for _ in 0..depth {
        let mut next = vec![0usize; g.vertex_count()];
        for v in g.vertices() {
            let c = counts[v.index()];
            if c > 0 {
                for w in g.successors(v) {
                    next[w.index()] = next[w.index()].saturating_add(c);
                }
            }
        }
        counts = next;
        sizes.push(counts.iter().fold(0usize, |a, c| a.saturating_add(*c)));
    }
    sizes
}

pub fn unravel(g: &GameGraph, v0: VertexId, depth: usize) -> Result<TruncatedTree, TreeError> {
    unravel_with(g, v0, depth, CostModel::Unit, DEFAULT_NODE_BUDGET)
}

pub fn unravel_with(
    g: &GameGraph,
    v0: VertexId,
    depth: usize,
    model: CostModel,
    budget: usize,
) -> Result<TruncatedTree, TreeError> {
    if depth == 0 {
        return Err(TreeError::ZeroDepth);
    }
    if v0.index() >= g.vertex_count() {
        return Err(TreeError::UnknownVertex(v0.0));
    }
    let sizes = level_sizes(g, v0, depth);
    let mut total = 0usize;
    for (d, s) in sizes.iter().enumerate() {
        total = total.saturating_add(*s);
        if total > budget {
            return Err(TreeError::Budget {
                budget,
                depth: d,
                needed: total,
            });
        }
    }

    let n = g.players();
    let mut profiles = Vec::new();
    let mut interned: HashMap<CostProfile, u32> = HashMap::new();
    let mut intern = |p: CostProfile, profiles: &mut Vec<CostProfile>| -> u32 {
        *interned.entry(p).or_insert_with_key(|p| {
            profiles.push(p.clone());
            (profiles.len() - 1) as u32
        })
    };
    // Accumulated weights per node, only for the weighted model.
    let mut acc: Vec<Box<[Rational]>> = Vec::new();

    let mut nodes = Vec::with_capacity(total);
    let root_visit = g.goal_players(v0);
    let mut root_profile = CostProfile::infinite(n);
    for p in root_visit.iter() {
        root_profile.set(p, Cost::ZERO);
    }
    nodes.push(Node {
        vertex: v0,
        parent: NO_NODE,
        depth: 0,
        first_child: NO_NODE,
        child_count: 0,
        visit: root_visit,
        profile: intern(root_profile, &mut profiles),
    });
    if model == CostModel::Weighted {
        acc.push(vec![Rational::zero(); n].into_boxed_slice());
    }
    let mut level_start = vec![0];
    let mut current = 0..1usize;
    for d in 1..=depth {
        let start = nodes.len();
        level_start.push(start as NodeId);
        for id in current.clone() {
            let parent = nodes[id];
            let succ = g.successors(parent.vertex);
            nodes[id].first_child = nodes.len() as NodeId;
            nodes[id].child_count = succ.len() as u32;
            for &w in succ {
                let fresh = g.goal_players(w);
                let visit = parent.visit.union(fresh);
                let profile = match model {
                    CostModel::Unit => {
                        if visit == parent.visit {
                            parent.profile
                        } else {
                            let mut p = profiles[parent.profile as usize].clone();
                            for q in fresh.iter().filter(|q| !parent.visit.contains(*q)) {
                                p.set(q, Cost::from_steps(d));
                            }
                            intern(p, &mut profiles)
                        }
                    }
                    CostModel::Weighted => {
                        let ws = g.edge_weights(parent.vertex, w).ok_or_else(|| {
                            TreeError::MissingWeight(
                                g.name(parent.vertex).to_string(),
                                g.name(w).to_string(),
                            )
                        })?;
                        let sums: Box<[Rational]> =
                            acc[id].iter().zip(ws.iter()).map(|(a, b)| a + b).collect();
                        let mut p = profiles[parent.profile as usize].clone();
                        for q in fresh.iter().filter(|q| !parent.visit.contains(*q)) {
                            p.set(q, Cost::Finite(sums[q]));
                        }
                        acc.push(sums);
                        intern(p, &mut profiles)
                    }
                };
                nodes.push(Node {
                    vertex: w,
                    parent: id as NodeId,
                    depth: d as u32,
                    first_child: NO_NODE,
                    child_count: 0,
                    visit,
                    profile,
                });
            }
        }
        current = start..nodes.len();
    }
    level_start.push(nodes.len() as NodeId);

    Ok(TruncatedTree {
        game: g.clone(),
        depth,
        model,
        nodes,
        level_start,
        profiles,
    })
}

impl TruncatedTree {
    pub fn game(&self) -> &GameGraph {
        &self.game
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn cost_model(&self) -> CostModel {
        self.model
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn vertex(&self, n: NodeId) -> VertexId {
        self.nodes[n as usize].vertex
    }

    pub fn owner(&self, n: NodeId) -> usize {
        self.game.owner(self.vertex(n))
    }

    pub fn parent(&self, n: NodeId) -> Option<NodeId> {
        let p = self.nodes[n as usize].parent;
        (p != NO_NODE).then_some(p)
    }

    pub fn node_depth(&self, n: NodeId) -> usize {
        self.nodes[n as usize].depth as usize
    }

    pub fn children(&self, n: NodeId) -> Range<NodeId> {
        let node = &self.nodes[n as usize];
        if node.first_child == NO_NODE {
            0..0
        } else {
            node.first_child..node.first_child + node.child_count
        }
    }

    pub fn is_leaf(&self, n: NodeId) -> bool {
        self.nodes[n as usize].first_child == NO_NODE
    }

    /// Internal nodes whose vertex has more than one successor.
    pub fn is_branching(&self, n: NodeId) -> bool {
        self.nodes[n as usize].child_count > 1
    }

    pub fn child_with_vertex(&self, n: NodeId, v: VertexId) -> Option<NodeId> {
        let range = self.children(n);
        let (lo, hi) = (range.start as usize, range.end as usize);
        self.nodes[lo..hi]
            .binary_search_by(|c| c.vertex.cmp(&v))
            .ok()
            .map(|i| (lo + i) as NodeId)
    }

    pub fn visit(&self, n: NodeId) -> PlayerSet {
        self.nodes[n as usize].visit
    }

    /// Cost profile of the history at `n` (goals not yet visited: `inf`).
    pub fn profile(&self, n: NodeId) -> &CostProfile {
        &self.profiles[self.nodes[n as usize].profile as usize]
    }

    /// Id of `profile(n)` in the interned pool; equal ids mean equal
    /// profiles.
    pub fn profile_id(&self, n: NodeId) -> u32 {
        self.nodes[n as usize].profile
    }

    pub fn profile_pool(&self) -> &[CostProfile] {
        &self.profiles
    }

    /// Nodes at exactly `depth`.
    pub fn level(&self, depth: usize) -> Range<NodeId> {
        self.level_start[depth]..self.level_start[depth + 1]
    }

    pub fn leaves(&self) -> Range<NodeId> {
        self.level(self.depth)
    }

    /// Vertices of the history from the root to `n`.
    pub fn history(&self, n: NodeId) -> Vec<VertexId> {
        let mut path = Vec::with_capacity(self.node_depth(n) + 1);
        let mut cur = n;
        loop {
            path.push(self.vertex(cur));
            match self.parent(cur) {
                Some(p) => cur = p,
                None => break,
            }
        }
        path.reverse();
        path
    }

    /// Ancestor of `n` at depth `depth` (which must not exceed `n`'s).
    pub fn ancestor_at(&self, n: NodeId, depth: usize) -> NodeId {
        let mut cur = n;
        while self.node_depth(cur) > depth {
            cur = self.nodes[cur as usize].parent;
        }
        cur
    }

    /// Node of the history `path`, if it lies in the tree.
    pub fn find(&self, path: &[VertexId]) -> Option<NodeId> {
        let (first, rest) = path.split_first()?;
        if *first != self.vertex(0) {
            return None;
        }
        rest.iter()
            .try_fold(0, |n, v| self.child_with_vertex(n, *v))
    }

    pub fn nodes(&self) -> Range<NodeId> {
        0..self.nodes.len() as NodeId
    }
}

/// A choice of child at every internal node; leaves carry [`NO_NODE`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TreeStrategyProfile {
    choice: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProfileError {
    #[error("no move defined at history {0}")]
    Undefined(String),
    #[error("move {1} is not available at history {0}")]
    IllegalMove(String, String),
    #[error("profile has {found} entries, tree has {expected} nodes")]
    SizeMismatch { expected: usize, found: usize },
}

impl TreeStrategyProfile {
    /// Builds a profile from a rule giving the next vertex at every
    /// internal node.
    pub fn from_fn(
        tree: &TruncatedTree,
        mut rule: impl FnMut(NodeId) -> Option<VertexId>,
    ) -> Result<Self, ProfileError> {
        let mut choice = vec![NO_NODE; tree.len()];
        for n in tree.nodes() {
            if tree.is_leaf(n) {
                continue;
            }
            let hist = || crate::play::path_string(tree.game(), &tree.history(n));
            let v = rule(n).ok_or_else(|| ProfileError::Undefined(hist()))?;
            let c = tree.child_with_vertex(n, v).ok_or_else(|| {
                ProfileError::IllegalMove(hist(), tree.game().name(v).to_string())
            })?;
            choice[n as usize] = c;
        }
        Ok(TreeStrategyProfile { choice })
    }

    /// The profile that always moves to the least successor.
    pub fn least(tree: &TruncatedTree) -> Self {
        let choice = tree
            .nodes()
            .map(|n| {
                if tree.is_leaf(n) {
                    NO_NODE
                } else {
                    tree.children(n).start
                }
            })
            .collect();
        TreeStrategyProfile { choice }
    }

    pub fn from_choices(tree: &TruncatedTree, choice: Vec<NodeId>) -> Result<Self, ProfileError> {
        if choice.len() != tree.len() {
            return Err(ProfileError::SizeMismatch {
                expected: tree.len(),
                found: choice.len(),
            });
        }
        for n in tree.nodes() {
            let c = choice[n as usize];
            let ok = if tree.is_leaf(n) {
                c == NO_NODE
            } else {
                tree.children(n).contains(&c)
            };
            if !ok {
                return Err(ProfileError::IllegalMove(
                    crate::play::path_string(tree.game(), &tree.history(n)),
                    format!("#{c}"),
                ));
            }
        }
        Ok(TreeStrategyProfile { choice })
    }

    /// Chosen child of an internal node.
    pub fn chosen(&self, n: NodeId) -> NodeId {
        self.choice[n as usize]
    }

    /// Replaces the choice at `n` by its child `c`.
    pub fn set(&mut self, n: NodeId, c: NodeId) {
        self.choice[n as usize] = c;
    }

    pub fn choices(&self) -> &[NodeId] {
        &self.choice
    }
}

/// Leaf reached from `from` when everybody follows `sigma`.
pub fn outcome(tree: &TruncatedTree, sigma: &TreeStrategyProfile, from: NodeId) -> NodeId {
    let mut cur = from;
    while !tree.is_leaf(cur) {
        cur = sigma.chosen(cur);
    }
    cur
}

/// Outcome leaf of every node, computed bottom-up in one pass.
pub fn outcome_leaves(tree: &TruncatedTree, sigma: &TreeStrategyProfile) -> Vec<NodeId> {
    let mut leaf = vec![NO_NODE; tree.len()];
    for n in tree.nodes().rev() {
        leaf[n as usize] = if tree.is_leaf(n) {
            n
        } else {
            leaf[sigma.chosen(n) as usize]
        };
    }
    leaf
}
