//! Histories, lassos and the cost functions evaluated on them.

use std::fmt;

use num_traits::Zero;

use crate::cost::{Cost, CostProfile, Rational};
use crate::game::{GameGraph, PlayerSet, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlayError {
    #[error("a history must contain at least one vertex")]
    Empty,
    #[error("no edge {0} -> {1}")]
    MissingEdge(String, String),
    #[error("vertex index {0} out of range")]
    UnknownVertex(u32),
    #[error("the cycle of a lasso must be nonempty")]
    EmptyCycle,
    #[error("horizon {horizon} exceeds the history length {len}")]
    HorizonTooLong { horizon: usize, len: usize },
    #[error("edge {0} -> {1} carries no weights")]
    MissingWeight(String, String),
    #[error("the game has no weighted edge")]
    Unweighted,
}

fn check_path(g: &GameGraph, path: &[VertexId]) -> Result<(), PlayError> {
    if path.is_empty() {
        return Err(PlayError::Empty);
    }
    for v in path {
        if v.index() >= g.vertex_count() {
            return Err(PlayError::UnknownVertex(v.0));
        }
    }
    for w in path.windows(2) {
        if !g.has_edge(w[0], w[1]) {
            return Err(PlayError::MissingEdge(
                g.name(w[0]).to_string(),
                g.name(w[1]).to_string(),
            ));
        }
    }
    Ok(())
}

/// A finite nonempty path. Its length is the number of edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct History(Vec<VertexId>);

impl History {
    pub fn new(g: &GameGraph, vertices: Vec<VertexId>) -> Result<Self, PlayError> {
        check_path(g, &vertices)?;
        Ok(History(vertices))
    }

    pub fn from_names(g: &GameGraph, names: &[&str]) -> Result<Self, PlayError> {
        let vs = names
            .iter()
            .map(|n| g.vertex(n).ok_or(PlayError::UnknownVertex(u32::MAX)))
            .collect::<Result<Vec<_>, _>>()?;
        History::new(g, vs)
    }

    pub fn len(&self) -> usize {
        self.0.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    pub fn last(&self) -> VertexId {
        *self.0.last().unwrap()
    }

    pub fn first(&self) -> VertexId {
        self.0[0]
    }

    /// `true` iff `self` is a (not necessarily strict) prefix of `other`.
    pub fn is_prefix_of(&self, other: &History) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn into_vertices(self) -> Vec<VertexId> {
        self.0
    }
}

/// The ultimately periodic play `stem · cycle^ω`.
///
/// `stem` starts at the initial vertex and is nonempty; the last stem
/// vertex has an edge to the first cycle vertex, and the cycle closes on
/// itself.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Lasso {
    stem: Vec<VertexId>,
    cycle: Vec<VertexId>,
}

impl Lasso {
    pub fn new(g: &GameGraph, stem: Vec<VertexId>, cycle: Vec<VertexId>) -> Result<Self, PlayError> {
        if cycle.is_empty() {
            return Err(PlayError::EmptyCycle);
        }
        check_path(g, &stem)?;
        let mut whole = Vec::with_capacity(stem.len() + cycle.len() + 1);
        whole.extend_from_slice(&stem);
        whole.extend_from_slice(&cycle);
        whole.push(cycle[0]);
        check_path(g, &whole)?;
        Ok(Lasso { stem, cycle })
    }

    pub fn from_names(g: &GameGraph, stem: &[&str], cycle: &[&str]) -> Result<Self, PlayError> {
        let lookup = |ns: &[&str]| {
            ns.iter()
                .map(|n| g.vertex(n).ok_or(PlayError::UnknownVertex(u32::MAX)))
                .collect::<Result<Vec<_>, _>>()
        };
        Lasso::new(g, lookup(stem)?, lookup(cycle)?)
    }

    pub fn stem(&self) -> &[VertexId] {
        &self.stem
    }

    pub fn cycle(&self) -> &[VertexId] {
        &self.cycle
    }

    /// Vertex at position `i` of the infinite play.
    pub fn at(&self, i: usize) -> VertexId {
        if i < self.stem.len() {
            self.stem[i]
        } else {
            self.cycle[(i - self.stem.len()) % self.cycle.len()]
        }
    }

    /// Number of vertices in stem plus one period; every goal visited at
    /// all is visited among these positions.
    pub fn period_end(&self) -> usize {
        self.stem.len() + self.cycle.len()
    }

    /// The first `len + 1` vertices, i.e. the prefix with `len` edges.
    pub fn unroll(&self, len: usize) -> Vec<VertexId> {
        (0..=len).map(|i| self.at(i)).collect()
    }

    /// Minimal representation: rotates the cycle into the stem as far as
    /// possible and shortens a cycle made of repeated blocks.
    pub fn normalized(&self) -> Lasso {
        let mut cycle = self.cycle.clone();
        let b = cycle.len();
        for p in 1..b {
            if b % p == 0 && (0..b).all(|i| cycle[i] == cycle[i % p]) {
                cycle.truncate(p);
                break;
            }
        }
        let mut stem = self.stem.clone();
        while stem.len() > 1 && stem.last() == cycle.last() {
            let v = stem.pop().unwrap();
            cycle.rotate_right(1);
            debug_assert_eq!(cycle[0], v);
        }
        Lasso { stem, cycle }
    }

    pub fn display<'a>(&'a self, g: &'a GameGraph) -> impl fmt::Display + 'a {
        LassoDisplay { g, lasso: self }
    }
}

struct LassoDisplay<'a> {
    g: &'a GameGraph,
    lasso: &'a Lasso,
}

impl fmt::Display for LassoDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.lasso.stem {
            f.write_str(self.g.name(*v))?;
        }
        f.write_str("(")?;
        for v in &self.lasso.cycle {
            f.write_str(self.g.name(*v))?;
        }
        f.write_str(")^w")
    }
}

/// Renders a path as concatenated names when every name is a single
/// character, slash-separated otherwise.
pub fn path_string(g: &GameGraph, path: &[VertexId]) -> String {
    let names: Vec<&str> = path.iter().map(|v| g.name(*v)).collect();
    if names.iter().all(|n| n.len() == 1) {
        names.concat()
    } else {
        names.join("/")
    }
}

/// First-visit costs along `path` looking only at indices `<= horizon`.
/// Without a horizon the whole path is used.
pub fn cost_profile(
    g: &GameGraph,
    path: &[VertexId],
    horizon: Option<usize>,
) -> Result<CostProfile, PlayError> {
    check_path(g, path)?;
    let len = path.len() - 1;
    let horizon = horizon.unwrap_or(len);
    if horizon > len {
        return Err(PlayError::HorizonTooLong { horizon, len });
    }
    Ok(first_visits(g, &path[..=horizon]))
}

fn first_visits(g: &GameGraph, path: &[VertexId]) -> CostProfile {
    let mut costs = CostProfile::infinite(g.players());
    let mut seen = PlayerSet::EMPTY;
    for (i, v) in path.iter().enumerate() {
        for p in g.goal_players(*v).iter() {
            if !seen.contains(p) {
                seen.insert(p);
                costs.set(p, Cost::from_steps(i));
            }
        }
    }
    costs
}

/// Exact first-visit costs of the infinite play a lasso represents.
pub fn lasso_cost_profile(g: &GameGraph, lasso: &Lasso) -> CostProfile {
    first_visits(g, &lasso.unroll(lasso.period_end() - 1))
}

/// Weighted cost: the sum of a player's own edge weights up to the first
/// goal visit.
pub fn weighted_cost_profile(g: &GameGraph, path: &[VertexId]) -> Result<CostProfile, PlayError> {
    check_path(g, path)?;
    let n = g.players();
    let mut acc = vec![Rational::zero(); n];
    let mut costs = CostProfile::infinite(n);
    let mut done = PlayerSet::EMPTY;
    for (i, v) in path.iter().enumerate() {
        if i > 0 {
            let from = path[i - 1];
            let ws = g.edge_weights(from, *v).ok_or_else(|| {
                PlayError::MissingWeight(g.name(from).to_string(), g.name(*v).to_string())
            })?;
            for p in 0..n {
                if !done.contains(p) {
                    acc[p] += ws[p];
                }
            }
        }
        for p in g.goal_players(*v).iter() {
            if !done.contains(p) {
                done.insert(p);
                costs.set(p, Cost::Finite(acc[p]));
            }
        }
        if done.len() == n {
            break;
        }
    }
    Ok(costs)
}

/// Weighted costs of a lasso, exact.
pub fn weighted_lasso_cost_profile(g: &GameGraph, lasso: &Lasso) -> Result<CostProfile, PlayError> {
    weighted_cost_profile(g, &lasso.unroll(lasso.period_end() - 1))
}

/// Players whose goal set is visited by `path`.
pub fn visit_set(g: &GameGraph, path: &[VertexId]) -> PlayerSet {
    path.iter()
        .fold(PlayerSet::EMPTY, |acc, v| acc.union(g.goal_players(*v)))
}

pub fn lasso_visit_set(g: &GameGraph, lasso: &Lasso) -> PlayerSet {
    visit_set(g, lasso.stem()).union(visit_set(g, lasso.cycle()))
}

/// Extreme edge weights and the ratio bound `K = ceil(c_max / c_min)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightConstants {
    pub c_min: Rational,
    pub c_max: Rational,
    pub k: u64,
}

pub fn weight_constants(g: &GameGraph) -> Result<WeightConstants, PlayError> {
    let mut all = g.edges().filter_map(|(_, _, ws)| ws).flatten();
    let first = *all.next().ok_or(PlayError::Unweighted)?;
    let (c_min, c_max) = all.fold((first, first), |(lo, hi), w| (lo.min(*w), hi.max(*w)));
    let ratio = c_max / c_min;
    Ok(WeightConstants {
        c_min,
        c_max,
        k: ratio.ceil().to_integer().max(1),
    })
}

/// A decomposition `ρ = α β · tail` of a lasso play where β is a cycle
/// closing on `last(α)` that visits no new goal set, while the play
/// visits a new one later.
///
/// Positions are indices into the play: α ends at index `alpha_end` and
/// β ends at `beta_end`, with `at(alpha_end) == at(beta_end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleDecomposition {
    pub alpha_end: usize,
    pub beta_end: usize,
}

impl CycleDecomposition {
    /// Length of α in edges.
    pub fn alpha_len(&self) -> usize {
        self.alpha_end
    }

    /// Number of vertices of β.
    pub fn beta_len(&self) -> usize {
        self.beta_end - self.alpha_end
    }
}

/// Lexicographically smallest `(alpha_end, beta_end)` unnecessary cycle
/// inside the first traversal of the lasso, if any.
pub fn find_unnecessary_cycle(g: &GameGraph, lasso: &Lasso) -> Option<CycleDecomposition> {
    let end = lasso.period_end();
    let path = lasso.unroll(end);
    let total = lasso_visit_set(g, lasso);
    let mut prefix_visit = Vec::with_capacity(path.len());
    let mut acc = PlayerSet::EMPTY;
    for v in &path {
        acc = acc.union(g.goal_players(*v));
        prefix_visit.push(acc);
    }
    for i in 0..path.len() {
        if prefix_visit[i] == total {
            break;
        }
        for j in i + 1..path.len() {
            if prefix_visit[j] != prefix_visit[i] {
                break;
            }
            if path[j] == path[i] {
                return Some(CycleDecomposition {
                    alpha_end: i,
                    beta_end: j,
                });
            }
        }
    }
    None
}
