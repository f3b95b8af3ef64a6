//! Arena representation: vertices, ownership, edges, goal sets and optional
//! per-player edge weights.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_traits::Zero;

use crate::cost::Rational;

/// Index of a vertex. Vertex ids follow the lexicographic order of vertex
/// names, so "least vertex id" and "lexicographically least name" coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

impl VertexId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Maximum number of players supported by [`PlayerSet`].
pub const MAX_PLAYERS: usize = 64;

/// A set of (0-based) players, stored as a bit mask.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlayerSet(u64);

impl PlayerSet {
    pub const EMPTY: PlayerSet = PlayerSet(0);

    pub fn singleton(player: usize) -> Self {
        PlayerSet(1 << player)
    }

    pub fn all(players: usize) -> Self {
        if players >= 64 {
            PlayerSet(u64::MAX)
        } else {
            PlayerSet((1u64 << players) - 1)
        }
    }

    pub fn contains(self, player: usize) -> bool {
        self.0 >> player & 1 == 1
    }

    pub fn insert(&mut self, player: usize) {
        self.0 |= 1 << player;
    }

    pub fn union(self, other: PlayerSet) -> PlayerSet {
        PlayerSet(self.0 | other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&i| self.contains(i))
    }
}

impl FromIterator<usize> for PlayerSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = PlayerSet::EMPTY;
        for p in iter {
            s.insert(p);
        }
        s
    }
}

impl fmt::Display for PlayerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, p) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", p + 1)?;
        }
        f.write_str("}")
    }
}

/// Structural problems detected while assembling a game.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BuildError {
    #[error("a game needs at least one player")]
    NoPlayers,
    #[error("at most {MAX_PLAYERS} players are supported, got {0}")]
    TooManyPlayers(usize),
    #[error("vertex `{0}` declared twice")]
    DuplicateVertex(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("player {0} out of range")]
    PlayerOutOfRange(usize),
    #[error("edge {0} -> {1} declared twice with different weights")]
    ConflictingEdge(String, String),
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
}

/// One broken invariant found by [`GameGraph::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoOutgoingEdge { vertex: String },
    EmptyGoalSet { player: usize },
    OwnerOutOfRange { vertex: String, owner: usize },
    NonPositiveWeight { from: String, to: String, player: usize },
    WeightArity { from: String, to: String, expected: usize, found: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoOutgoingEdge { vertex } => {
                write!(f, "vertex {vertex}: no outgoing edge")
            }
            Violation::EmptyGoalSet { player } => {
                write!(f, "player {}: empty goal set", player + 1)
            }
            Violation::OwnerOutOfRange { vertex, owner } => {
                write!(f, "vertex {vertex}: owner {} is not a player", owner + 1)
            }
            Violation::NonPositiveWeight { from, to, player } => write!(
                f,
                "edge {from} -> {to}: weight of player {} is not strictly positive",
                player + 1
            ),
            Violation::WeightArity {
                from,
                to,
                expected,
                found,
            } => write!(
                f,
                "edge {from} -> {to}: expected {expected} weights, found {found}"
            ),
        }
    }
}

/// Result of [`GameGraph::validate`]; valid iff no violation was found.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Weights of an edge, one per player.
pub type EdgeWeights = Box<[Rational]>;

/// A finite arena with a vertex partition among players and one goal set per
/// player. Players are 0-based in this API.
///
/// Construction goes through [`GameBuilder`], which only rejects structural
/// errors; the arena invariants (total edge relation, nonempty goals,
/// positive weights) are reported by [`GameGraph::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameGraph {
    players: usize,
    names: Vec<String>,
    owner: Vec<usize>,
    succ: Vec<Vec<VertexId>>,
    weights: Vec<Vec<Option<EdgeWeights>>>,
    goals: Vec<BTreeSet<VertexId>>,
    goal_mask: Vec<PlayerSet>,
    initial: Option<VertexId>,
}

impl GameGraph {
    pub fn players(&self) -> usize {
        self.players
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.names.len() as u32).map(VertexId)
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v.index()]
    }

    pub fn vertex(&self, name: &str) -> Option<VertexId> {
        self.names
            .binary_search_by(|n| n.as_str().cmp(name))
            .ok()
            .map(|i| VertexId(i as u32))
    }

    pub fn owner(&self, v: VertexId) -> usize {
        self.owner[v.index()]
    }

    /// Vertices owned by `player`.
    pub fn owned_by(&self, player: usize) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices().filter(move |&v| self.owner(v) == player)
    }

    /// Successors of `v`, sorted by vertex id.
    pub fn successors(&self, v: VertexId) -> &[VertexId] {
        &self.succ[v.index()]
    }

    pub fn has_edge(&self, from: VertexId, to: VertexId) -> bool {
        self.succ[from.index()].binary_search(&to).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    /// Lexicographically least successor; used wherever a construction
    /// leaves the choice open.
    pub fn least_successor(&self, v: VertexId) -> VertexId {
        self.succ[v.index()][0]
    }

    pub fn goal_set(&self, player: usize) -> &BTreeSet<VertexId> {
        &self.goals[player]
    }

    pub fn is_goal(&self, player: usize, v: VertexId) -> bool {
        self.goal_mask[v.index()].contains(player)
    }

    /// Players whose goal set contains `v`.
    pub fn goal_players(&self, v: VertexId) -> PlayerSet {
        self.goal_mask[v.index()]
    }

    pub fn initial(&self) -> Option<VertexId> {
        self.initial
    }

    pub fn with_initial(mut self, v: VertexId) -> Self {
        self.initial = Some(v);
        self
    }

    /// `true` iff at least one edge carries weights.
    pub fn is_weighted(&self) -> bool {
        self.weights.iter().flatten().any(Option::is_some)
    }

    pub fn edge_weights(&self, from: VertexId, to: VertexId) -> Option<&[Rational]> {
        let i = self.succ[from.index()].binary_search(&to).ok()?;
        self.weights[from.index()][i].as_deref()
    }

    /// Iterates over `(from, to, weights)` for every edge.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, Option<&[Rational]>)> + '_ {
        self.vertices().flat_map(move |v| {
            self.succ[v.index()]
                .iter()
                .zip(self.weights[v.index()].iter())
                .map(move |(&w, ws)| (v, w, ws.as_deref()))
        })
    }

    /// `true` iff `path` is a nonempty walk along edges.
    pub fn is_path(&self, path: &[VertexId]) -> bool {
        !path.is_empty()
            && path.iter().all(|v| v.index() < self.vertex_count())
            && path.windows(2).all(|w| self.has_edge(w[0], w[1]))
    }

    /// Checks every arena invariant and lists all violations.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for v in self.vertices() {
            if self.owner(v) >= self.players {
                violations.push(Violation::OwnerOutOfRange {
                    vertex: self.name(v).to_string(),
                    owner: self.owner(v),
                });
            }
            if self.successors(v).is_empty() {
                violations.push(Violation::NoOutgoingEdge {
                    vertex: self.name(v).to_string(),
                });
            }
        }
        for (p, goal) in self.goals.iter().enumerate() {
            if goal.is_empty() {
                violations.push(Violation::EmptyGoalSet { player: p });
            }
        }
        for (from, to, ws) in self.edges() {
            let Some(ws) = ws else { continue };
            if ws.len() != self.players {
                violations.push(Violation::WeightArity {
                    from: self.name(from).to_string(),
                    to: self.name(to).to_string(),
                    expected: self.players,
                    found: ws.len(),
                });
            }
            for (p, w) in ws.iter().enumerate() {
                if w.is_zero() {
                    violations.push(Violation::NonPositiveWeight {
                        from: self.name(from).to_string(),
                        to: self.name(to).to_string(),
                        player: p,
                    });
                }
            }
        }
        ValidationReport { violations }
    }

    /// `true` iff every play from `from` ends in an absorbing vertex (a
    /// vertex whose only successor is itself), i.e. the non-absorbing part
    /// reachable from `from` is acyclic.
    pub fn is_terminal_lasso_shaped(&self, from: VertexId) -> bool {
        let absorbing = |v: VertexId| self.successors(v) == [v];
        // 0 = unseen, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.vertex_count()];
        let mut stack = vec![(from, 0usize)];
        state[from.index()] = 1;
        while let Some((v, i)) = stack.pop() {
            if absorbing(v) {
                state[v.index()] = 2;
                continue;
            }
            let succ = self.successors(v);
            if i < succ.len() {
                stack.push((v, i + 1));
                let w = succ[i];
                match state[w.index()] {
                    0 => {
                        state[w.index()] = 1;
                        stack.push((w, 0));
                    }
                    1 if !absorbing(w) => return false,
                    _ => {}
                }
            } else {
                state[v.index()] = 2;
            }
        }
        true
    }
}

/// Incremental constructor for [`GameGraph`]. Vertices may be declared in
/// any order; ids are assigned by name order when the game is built.
#[derive(Debug, Clone, Default)]
pub struct GameBuilder {
    players: usize,
    vertices: BTreeMap<String, usize>,
    edges: Vec<(String, String, Option<Vec<Rational>>)>,
    goals: Vec<(usize, String)>,
    declared_goal_players: BTreeSet<usize>,
    initial: Option<String>,
    duplicate: Option<String>,
}

impl GameBuilder {
    pub fn new(players: usize) -> Self {
        GameBuilder {
            players,
            ..Default::default()
        }
    }

    pub fn vertex(mut self, name: &str, owner: usize) -> Self {
        self.add_vertex(name, owner);
        self
    }

    pub fn add_vertex(&mut self, name: &str, owner: usize) {
        if self.vertices.insert(name.to_string(), owner).is_some() && self.duplicate.is_none() {
            self.duplicate = Some(name.to_string());
        }
    }

    pub fn edge(mut self, from: &str, to: &str) -> Self {
        self.add_edge(from, to, None);
        self
    }

    pub fn weighted_edge(mut self, from: &str, to: &str, weights: Vec<Rational>) -> Self {
        self.add_edge(from, to, Some(weights));
        self
    }

    pub fn add_edge(&mut self, from: &str, to: &str, weights: Option<Vec<Rational>>) {
        self.edges.push((from.to_string(), to.to_string(), weights));
    }

    pub fn goal(mut self, player: usize, vertices: &[&str]) -> Self {
        self.add_goal(player, vertices.iter().copied());
        self
    }

    pub fn add_goal<'a, I: IntoIterator<Item = &'a str>>(&mut self, player: usize, vertices: I) {
        self.declared_goal_players.insert(player);
        for v in vertices {
            self.goals.push((player, v.to_string()));
        }
    }

    pub fn initial(mut self, name: &str) -> Self {
        self.set_initial(name);
        self
    }

    pub fn set_initial(&mut self, name: &str) {
        self.initial = Some(name.to_string());
    }

    pub fn build(self) -> Result<GameGraph, BuildError> {
        if self.players == 0 {
            return Err(BuildError::NoPlayers);
        }
        if self.players > MAX_PLAYERS {
            return Err(BuildError::TooManyPlayers(self.players));
        }
        if let Some(d) = self.duplicate {
            return Err(BuildError::DuplicateVertex(d));
        }
        for name in self.vertices.keys() {
            if !is_identifier(name) {
                return Err(BuildError::InvalidIdentifier(name.clone()));
            }
        }
        let names: Vec<String> = self.vertices.keys().cloned().collect();
        let owner: Vec<usize> = self.vertices.values().copied().collect();
        let ids: HashMap<&str, VertexId> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), VertexId(i as u32)))
            .collect();
        let lookup = |n: &str| {
            ids.get(n)
                .copied()
                .ok_or_else(|| BuildError::UnknownVertex(n.to_string()))
        };

        let mut adj: Vec<BTreeMap<VertexId, Option<Vec<Rational>>>> = vec![BTreeMap::new(); names.len()];
        for (from, to, ws) in &self.edges {
            let (f, t) = (lookup(from)?, lookup(to)?);
            match adj[f.index()].get(&t) {
                Some(existing) if existing != ws => {
                    return Err(BuildError::ConflictingEdge(from.clone(), to.clone()))
                }
                _ => {
                    adj[f.index()].insert(t, ws.clone());
                }
            }
        }
        let succ = adj.iter().map(|m| m.keys().copied().collect()).collect();
        let weights = adj
            .into_iter()
            .map(|m| {
                m.into_values()
                    .map(|w| w.map(Vec::into_boxed_slice))
                    .collect()
            })
            .collect();

        let mut goals = vec![BTreeSet::new(); self.players];
        let mut goal_mask = vec![PlayerSet::EMPTY; names.len()];
        for p in &self.declared_goal_players {
            if *p >= self.players {
                return Err(BuildError::PlayerOutOfRange(*p + 1));
            }
        }
        for (p, v) in &self.goals {
            let v = lookup(v)?;
            goals[*p].insert(v);
            goal_mask[v.index()].insert(*p);
        }
        let initial = self.initial.as_deref().map(lookup).transpose()?;

        Ok(GameGraph {
            players: self.players,
            names,
            owner,
            succ,
            weights,
            goals,
            goal_mask,
            initial,
        })
    }
}

/// Vertex identifiers are nonempty alphanumeric tokens (`_` allowed).
pub fn is_identifier(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}
