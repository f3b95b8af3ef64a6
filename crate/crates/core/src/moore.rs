//! Finite-memory strategies as Moore machines, and their link to tree
//! profiles.
//!
//! Memory update convention: before the first move a machine reads the
//! initial vertex, so after the history `v_0 .. v_k` it is in state
//! `m_k = δ(m_{k-1}, v_k)` with `m_{-1}` the initial state, and a player
//! owning `v_k` moves to `output(m_k, v_k)`.

use std::collections::HashMap;

use crate::game::{GameGraph, VertexId};
use crate::play::Lasso;
use crate::tree::{NodeId, TreeStrategyProfile, TruncatedTree};

pub type StateId = u32;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MooreError {
    #[error("output {0} -> {1} is not an edge")]
    IllegalOutput(String, String),
    #[error("state {0} out of range")]
    UnknownState(u32),
    #[error("profile has {found} machines, the game has {expected} players")]
    Arity { expected: usize, found: usize },
    #[error("no repetition found within {0} steps")]
    NoRepetition(usize),
}

/// One player's machine. A missing transition keeps the state; a missing
/// output moves to the least successor.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MooreMachine {
    state_names: Vec<String>,
    initial: StateId,
    transitions: HashMap<(StateId, VertexId), StateId>,
    outputs: HashMap<(StateId, VertexId), VertexId>,
}

impl MooreMachine {
    /// A machine with the given named states, starting in state 0.
    pub fn new(state_names: Vec<String>) -> Self {
        assert!(!state_names.is_empty());
        MooreMachine {
            state_names,
            ..Default::default()
        }
    }

    /// The one-state machine that always plays the least successor.
    pub fn trivial() -> Self {
        MooreMachine::new(vec!["s".to_string()])
    }

    pub fn add_state(&mut self, name: String) -> StateId {
        self.state_names.push(name);
        (self.state_names.len() - 1) as StateId
    }

    pub fn set_initial(&mut self, s: StateId) {
        self.initial = s;
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn state_count(&self) -> usize {
        self.state_names.len()
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.state_names[s as usize]
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.state_names
            .iter()
            .position(|n| n == name)
            .map(|i| i as StateId)
    }

    pub fn set_transition(&mut self, s: StateId, v: VertexId, t: StateId) {
        self.transitions.insert((s, v), t);
    }

    pub fn set_output(&mut self, s: StateId, v: VertexId, w: VertexId) {
        self.outputs.insert((s, v), w);
    }

    pub fn next_state(&self, s: StateId, v: VertexId) -> StateId {
        self.transitions.get(&(s, v)).copied().unwrap_or(s)
    }

    pub fn output(&self, g: &GameGraph, s: StateId, v: VertexId) -> VertexId {
        self.outputs
            .get(&(s, v))
            .copied()
            .unwrap_or_else(|| g.least_successor(v))
    }

    /// Sorted `(state, vertex, next)` triples.
    pub fn transition_table(&self) -> Vec<(StateId, VertexId, StateId)> {
        let mut t: Vec<_> = self.transitions.iter().map(|(&(s, v), &n)| (s, v, n)).collect();
        t.sort();
        t
    }

    /// Sorted `(state, vertex, move)` triples.
    pub fn output_table(&self) -> Vec<(StateId, VertexId, VertexId)> {
        let mut t: Vec<_> = self.outputs.iter().map(|(&(s, v), &w)| (s, v, w)).collect();
        t.sort();
        t
    }

    pub fn validate(&self, g: &GameGraph) -> Result<(), MooreError> {
        let n = self.state_count() as u32;
        if self.initial >= n {
            return Err(MooreError::UnknownState(self.initial));
        }
        for (&(s, _), &t) in &self.transitions {
            if s >= n || t >= n {
                return Err(MooreError::UnknownState(s.max(t)));
            }
        }
        for (&(s, v), &w) in &self.outputs {
            if s >= n {
                return Err(MooreError::UnknownState(s));
            }
            if !g.has_edge(v, w) {
                return Err(MooreError::IllegalOutput(
                    g.name(v).to_string(),
                    g.name(w).to_string(),
                ));
            }
        }
        Ok(())
    }
}

/// One machine per player.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MooreProfile {
    machines: Vec<MooreMachine>,
}

impl MooreProfile {
    pub fn new(g: &GameGraph, machines: Vec<MooreMachine>) -> Result<Self, MooreError> {
        if machines.len() != g.players() {
            return Err(MooreError::Arity {
                expected: g.players(),
                found: machines.len(),
            });
        }
        for m in &machines {
            m.validate(g)?;
        }
        Ok(MooreProfile { machines })
    }

    pub fn machine(&self, player: usize) -> &MooreMachine {
        &self.machines[player]
    }

    pub fn machines(&self) -> &[MooreMachine] {
        &self.machines
    }

    /// Total number of memory states over all players.
    pub fn state_count(&self) -> usize {
        self.machines.iter().map(MooreMachine::state_count).sum()
    }

    /// Fresh memory, before the initial vertex is read.
    pub fn start(&self) -> Vec<StateId> {
        self.machines.iter().map(MooreMachine::initial).collect()
    }

    /// Reads vertex `v` into every machine.
    pub fn observe(&self, states: &mut [StateId], v: VertexId) {
        for (s, m) in states.iter_mut().zip(&self.machines) {
            *s = m.next_state(*s, v);
        }
    }

    /// Move prescribed at the current vertex `v` (already observed).
    pub fn next_move(&self, g: &GameGraph, states: &[StateId], v: VertexId) -> VertexId {
        let p = g.owner(v);
        self.machines[p].output(g, states[p], v)
    }

    /// Move prescribed after the history `path`.
    pub fn move_after(&self, g: &GameGraph, path: &[VertexId]) -> VertexId {
        let mut states = self.start();
        for v in path {
            self.observe(&mut states, *v);
        }
        self.next_move(g, &states, *path.last().unwrap())
    }

    /// The outcome from `v0` as a lasso, found by detecting the first
    /// repeated joint configuration.
    pub fn outcome(&self, g: &GameGraph, v0: VertexId, max_steps: usize) -> Result<Lasso, MooreError> {
        let mut seen: HashMap<(Vec<StateId>, VertexId), usize> = HashMap::new();
        let mut states = self.start();
        let mut path = Vec::new();
        let mut v = v0;
        for step in 0..=max_steps {
            self.observe(&mut states, v);
            if let Some(&first) = seen.get(&(states.clone(), v)) {
                let cycle = path.split_off(first);
                if path.is_empty() {
                    // Periodic from the start: unroll one period as stem.
                    path = cycle.clone();
                }
                let lasso = Lasso::new(g, path, cycle).expect("simulated play is a path");
                return Ok(lasso.normalized());
            }
            seen.insert((states.clone(), v), step);
            path.push(v);
            v = self.next_move(g, &states, v);
        }
        Err(MooreError::NoRepetition(max_steps))
    }

    /// Plays `steps` edges from `v0`; at vertices owned by `deviator` the
    /// closure picks the move instead of the machine.
    pub fn play_with_deviation(
        &self,
        g: &GameGraph,
        v0: VertexId,
        deviator: usize,
        steps: usize,
        mut deviate: impl FnMut(&[VertexId]) -> VertexId,
    ) -> Vec<VertexId> {
        let mut states = self.start();
        let mut path = vec![v0];
        self.observe(&mut states, v0);
        for _ in 0..steps {
            let v = *path.last().unwrap();
            let w = if g.owner(v) == deviator {
                deviate(&path)
            } else {
                self.next_move(g, &states, v)
            };
            debug_assert!(g.has_edge(v, w));
            path.push(w);
            self.observe(&mut states, w);
        }
        path
    }
}

/// Evaluates a finite-memory profile on every internal node of the tree.
pub fn restrict_strategy(profile: &MooreProfile, tree: &TruncatedTree) -> TreeStrategyProfile {
    let g = tree.game();
    let players = g.players();
    let mut states = vec![0 as StateId; tree.len() * players];
    let mut choice = vec![crate::tree::NO_NODE; tree.len()];
    for n in tree.nodes() {
        let base = n as usize * players;
        let mut s = match tree.parent(n) {
            Some(p) => states[p as usize * players..(p as usize + 1) * players].to_vec(),
            None => profile.start(),
        };
        profile.observe(&mut s, tree.vertex(n));
        if !tree.is_leaf(n) {
            let w = profile.next_move(g, &s, tree.vertex(n));
            choice[n as usize] = tree
                .child_with_vertex(n, w)
                .expect("validated outputs follow edges");
        }
        states[base..base + players].copy_from_slice(&s);
    }
    TreeStrategyProfile::from_choices(tree, choice).expect("choices are children")
}

/// Extends a tree profile to the whole game: inside the tree it follows the
/// profile, beyond the truncation depth every player moves to the least
/// successor.
///
/// Each player's machine has one state per tree node plus an initial state.
/// Once the play leaves the tree the machine stays in a leaf state, where
/// no output is defined.
pub fn extend_arbitrary(sigma: &TreeStrategyProfile, tree: &TruncatedTree) -> MooreProfile {
    let g = tree.game();
    let mut machine = MooreMachine::new(vec!["init".to_string()]);
    let node_state = |n: NodeId| n + 1;
    for n in tree.nodes() {
        machine.add_state(format!("n{n}"));
    }
    machine.set_transition(0, tree.vertex(0), node_state(0));
    for n in tree.nodes() {
        for c in tree.children(n) {
            machine.set_transition(node_state(n), tree.vertex(c), node_state(c));
        }
    }
    let mut machines = vec![machine; g.players()];
    for n in tree.nodes() {
        if !tree.is_leaf(n) {
            let owner = tree.owner(n);
            machines[owner].set_output(node_state(n), tree.vertex(n), tree.vertex(sigma.chosen(n)));
        }
    }
    MooreProfile::new(g, machines).expect("built from a valid tree profile")
}

/// Lifts a memoryless table (move at each vertex) to a one-state profile.
pub fn memoryless_profile(g: &GameGraph, choice: impl Fn(VertexId) -> VertexId) -> MooreProfile {
    let mut machines = vec![MooreMachine::trivial(); g.players()];
    for v in g.vertices() {
        machines[g.owner(v)].set_output(0, v, choice(v));
    }
    MooreProfile::new(g, machines).expect("memoryless choices follow edges")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::GameBuilder;
    use crate::tree::unravel;

    fn loop_game() -> GameGraph {
        GameBuilder::new(1)
            .vertex("a", 0)
            .vertex("b", 0)
            .edge("a", "a")
            .edge("a", "b")
            .edge("b", "b")
            .goal(0, &["b"])
            .build()
            .unwrap()
    }

    #[test]
    fn memoryless_outcome() {
        let g = loop_game();
        let (a, b) = (VertexId(0), VertexId(1));
        let p = memoryless_profile(&g, |v| if v == a { b } else { b });
        let l = p.outcome(&g, a, 100).unwrap();
        assert_eq!(l.stem(), &[a]);
        assert_eq!(l.cycle(), &[b]);
    }

    #[test]
    fn extension_round_trip() {
        let g = loop_game();
        let t = unravel(&g, VertexId(0), 4).unwrap();
        // Stay on a twice, then leave.
        let sigma = TreeStrategyProfile::from_fn(&t, |n| {
            let v = t.vertex(n);
            Some(if v == VertexId(0) && t.node_depth(n) < 2 { VertexId(0) } else { VertexId(1) })
        })
        .unwrap();
        let m = extend_arbitrary(&sigma, &t);
        assert_eq!(restrict_strategy(&m, &t), sigma);
        let l = m.outcome(&g, VertexId(0), 100).unwrap();
        assert_eq!(l.stem().len(), 3);
    }
}
