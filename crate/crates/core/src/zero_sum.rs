//! Two-player zero-sum games where the protagonist wants to visit `R`
//! while every vertex of the play stays in `S`.

use crate::game::{GameGraph, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ZeroSumError {
    #[error("the reach set is empty")]
    EmptyReach,
    #[error("vertex {0} has no successor")]
    DeadEnd(u32),
    #[error("successor {1} of vertex {0} is out of range")]
    BadSuccessor(u32, u32),
    #[error("player {0} out of range")]
    BadPlayer(usize),
}

/// Arena of a reachability-under-safety game. Vertex sets are stored as
/// membership vectors indexed by vertex id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroSumArena {
    succ: Vec<Vec<VertexId>>,
    protagonist: Vec<bool>,
    reach: Vec<bool>,
    safe: Vec<bool>,
}

fn membership(n: usize, set: impl IntoIterator<Item = VertexId>) -> Vec<bool> {
    let mut m = vec![false; n];
    for v in set {
        if v.index() < n {
            m[v.index()] = true;
        }
    }
    m
}

impl ZeroSumArena {
    /// Successor lists are sorted and deduplicated here.
    pub fn new(
        mut succ: Vec<Vec<VertexId>>,
        protagonist: Vec<bool>,
        reach: Vec<bool>,
        safe: Vec<bool>,
    ) -> Result<Self, ZeroSumError> {
        let n = succ.len();
        assert!(protagonist.len() == n && reach.len() == n && safe.len() == n);
        for (v, s) in succ.iter_mut().enumerate() {
            s.sort();
            s.dedup();
            if s.is_empty() {
                return Err(ZeroSumError::DeadEnd(v as u32));
            }
            if let Some(w) = s.iter().find(|w| w.index() >= n) {
                return Err(ZeroSumError::BadSuccessor(v as u32, w.0));
            }
        }
        if !reach.iter().any(|&r| r) {
            return Err(ZeroSumError::EmptyReach);
        }
        Ok(ZeroSumArena {
            succ,
            protagonist,
            reach,
            safe,
        })
    }

    fn from_game(
        g: &GameGraph,
        protagonist: impl Fn(VertexId) -> bool,
        reach: impl IntoIterator<Item = VertexId>,
        safe: impl IntoIterator<Item = VertexId>,
    ) -> Result<Self, ZeroSumError> {
        let n = g.vertex_count();
        ZeroSumArena::new(
            g.vertices().map(|v| g.successors(v).to_vec()).collect(),
            g.vertices().map(protagonist).collect(),
            membership(n, reach),
            membership(n, safe),
        )
    }

    pub fn vertex_count(&self) -> usize {
        self.succ.len()
    }

    pub fn successors(&self, v: VertexId) -> &[VertexId] {
        &self.succ[v.index()]
    }

    pub fn is_protagonist(&self, v: VertexId) -> bool {
        self.protagonist[v.index()]
    }

    pub fn in_reach(&self, v: VertexId) -> bool {
        self.reach[v.index()]
    }

    pub fn in_safe(&self, v: VertexId) -> bool {
        self.safe[v.index()]
    }

    /// Predecessor lists, sorted.
    fn predecessors(&self) -> Vec<Vec<VertexId>> {
        let mut pred = vec![Vec::new(); self.vertex_count()];
        for (v, ws) in self.succ.iter().enumerate() {
            for w in ws {
                pred[w.index()].push(VertexId(v as u32));
            }
        }
        pred
    }

    /// `true` iff the finite prefix of a play already meets the objective
    /// as far as it can be judged: some vertex in `R` and all in `S`.
    pub fn prefix_wins(&self, path: &[VertexId]) -> bool {
        path.iter().all(|v| self.in_safe(*v)) && path.iter().any(|v| self.in_reach(*v))
    }
}

/// Game `G_i`: player `i` is the protagonist against everybody else.
pub fn build_player_game(
    g: &GameGraph,
    i: usize,
    reach: impl IntoIterator<Item = VertexId>,
    safe: impl IntoIterator<Item = VertexId>,
) -> Result<ZeroSumArena, ZeroSumError> {
    if i >= g.players() {
        return Err(ZeroSumError::BadPlayer(i));
    }
    ZeroSumArena::from_game(g, |v| g.owner(v) == i, reach, safe)
}

/// Game `G_{-j}`: the coalition of all players but `j` is the protagonist.
pub fn build_coalition_game(
    g: &GameGraph,
    j: usize,
    reach: impl IntoIterator<Item = VertexId>,
    safe: impl IntoIterator<Item = VertexId>,
) -> Result<ZeroSumArena, ZeroSumError> {
    if j >= g.players() {
        return Err(ZeroSumError::BadPlayer(j));
    }
    ZeroSumArena::from_game(g, |v| g.owner(v) != j, reach, safe)
}

/// Weak-parity coloring of the objective: 3 outside `S`, 2 on `R ∩ S`,
/// 1 elsewhere.
pub fn encode_weak_parity(reach: &[bool], safe: &[bool]) -> Vec<u8> {
    reach
        .iter()
        .zip(safe)
        .map(|(&r, &s)| match (r, s) {
            (_, false) => 3,
            (true, true) => 2,
            (false, true) => 1,
        })
        .collect()
}

/// Winning region, ranks and memoryless strategies for both sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttractorResult {
    winning: Vec<bool>,
    rank: Vec<Option<u32>>,
    /// Vertices from which the protagonist can keep the play in `S`
    /// forever.
    safe_region: Vec<bool>,
    strategy: Vec<VertexId>,
}

impl AttractorResult {
    pub fn is_winning(&self, v: VertexId) -> bool {
        self.winning[v.index()]
    }

    pub fn winning_region(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.winning
            .iter()
            .enumerate()
            .filter(|(_, w)| **w)
            .map(|(i, _)| VertexId(i as u32))
    }

    /// Number of steps the protagonist needs to reach `R` from `v`.
    pub fn rank(&self, v: VertexId) -> Option<u32> {
        self.rank[v.index()]
    }

    pub fn can_stay_safe(&self, v: VertexId) -> bool {
        self.safe_region[v.index()]
    }

    /// The memoryless move of whoever owns `v`. On protagonist vertices
    /// this is the protagonist strategy, on the others the antagonist's.
    pub fn choice(&self, v: VertexId) -> VertexId {
        self.strategy[v.index()]
    }

    pub fn strategy_table(&self) -> &[VertexId] {
        &self.strategy
    }
}

/// Solves the game with two worklist fixpoints: the safety kernel of `S`,
/// then the attractor of `R` inside it. Linear in the arena size.
pub fn solve_reach_under_safety(a: &ZeroSumArena) -> AttractorResult {
    let n = a.vertex_count();
    let pred = a.predecessors();

    // Antagonist attractor of V \ S; its complement is the set of
    // vertices from which the protagonist can stay in S forever.
    let escape_rank = attractor(
        a,
        &pred,
        (0..n).filter(|&v| !a.safe[v]),
        |v| !a.protagonist[v],
        |_| true,
    );
    let in_kernel: Vec<bool> = escape_rank.iter().map(Option::is_none).collect();

    // Protagonist attractor of R ∩ kernel, moving only through S.
    let rank = attractor(
        a,
        &pred,
        (0..n).filter(|&v| a.reach[v] && in_kernel[v]),
        |v| a.protagonist[v],
        |v| a.safe[v],
    );
    let winning: Vec<bool> = rank.iter().map(Option::is_some).collect();

    let strategy = (0..n)
        .map(|v| {
            let succ = &a.succ[v];
            let pick = |f: &dyn Fn(usize) -> bool| succ.iter().copied().find(|w| f(w.index()));
            let chosen = if a.protagonist[v] {
                match rank[v] {
                    Some(rv) if rv > 0 => {
                        pick(&|w| rank[w].is_some_and(|rw| rw < rv))
                    }
                    _ if in_kernel[v] => pick(&|w| in_kernel[w]),
                    _ => None,
                }
            } else if !a.safe[v] || winning[v] {
                None
            } else if !in_kernel[v] {
                let rv = escape_rank[v].unwrap_or(u32::MAX);
                pick(&|w| escape_rank[w].is_some_and(|rw| rw < rv))
            } else {
                pick(&|w| !winning[w])
            };
            chosen.unwrap_or(succ[0])
        })
        .collect();

    AttractorResult {
        winning,
        rank,
        safe_region: in_kernel,
        strategy,
    }
}

/// Layered attractor: `seeds` get rank 0; a vertex allowed by `inside`
/// joins the next layer when it is `existential` and has one successor in
/// the set, or universal and has all of them there.
fn attractor(
    a: &ZeroSumArena,
    pred: &[Vec<VertexId>],
    seeds: impl Iterator<Item = usize>,
    existential: impl Fn(usize) -> bool,
    inside: impl Fn(usize) -> bool,
) -> Vec<Option<u32>> {
    let n = a.vertex_count();
    let mut rank: Vec<Option<u32>> = vec![None; n];
    let mut remaining: Vec<usize> = (0..n).map(|v| a.succ[v].len()).collect();
    let mut layer: Vec<usize> = seeds.collect();
    for &v in &layer {
        rank[v] = Some(0);
    }
    let mut r = 0;
    while !layer.is_empty() {
        let mut next = Vec::new();
        for &v in &layer {
            for p in &pred[v] {
                let p = p.index();
                if rank[p].is_some() || !inside(p) {
                    continue;
                }
                remaining[p] -= 1;
                if existential(p) || remaining[p] == 0 {
                    rank[p] = Some(r + 1);
                    next.push(p);
                }
            }
        }
        r += 1;
        layer = next;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: u32) -> VertexId {
        VertexId(i)
    }

    #[test]
    fn coloring() {
        assert_eq!(encode_weak_parity(&[true, true], &[true, true]), vec![2, 2]);
        assert_eq!(encode_weak_parity(&[true], &[false]), vec![3]);
        assert_eq!(encode_weak_parity(&[false], &[true]), vec![1]);
    }

    #[test]
    fn target_in_safe_has_rank_zero() {
        let a = ZeroSumArena::new(
            vec![vec![v(0)]],
            vec![true],
            vec![true],
            vec![true],
        )
        .unwrap();
        let res = solve_reach_under_safety(&a);
        assert_eq!(res.rank(v(0)), Some(0));
    }

    #[test]
    fn reaching_r_outside_the_safety_kernel_does_not_win() {
        // 0 -> 1 (in R), 1 -> 2, 2 -> 2 with 2 unsafe.
        let a = ZeroSumArena::new(
            vec![vec![v(1)], vec![v(2)], vec![v(2)]],
            vec![true, true, true],
            vec![false, true, false],
            vec![true, true, false],
        )
        .unwrap();
        let res = solve_reach_under_safety(&a);
        assert!(!res.is_winning(v(0)) && !res.is_winning(v(1)));
    }

    #[test]
    fn antagonist_escapes() {
        // 0 (antagonist) -> {1, 2}; 1 in R; 2 unsafe sink.
        let a = ZeroSumArena::new(
            vec![vec![v(1), v(2)], vec![v(1)], vec![v(2)]],
            vec![false, true, true],
            vec![false, true, false],
            vec![true, true, false],
        )
        .unwrap();
        let res = solve_reach_under_safety(&a);
        assert!(!res.is_winning(v(0)));
        assert_eq!(res.choice(v(0)), v(2));
    }

    #[test]
    fn empty_reach_is_rejected() {
        assert_eq!(
            ZeroSumArena::new(vec![vec![v(0)]], vec![true], vec![false], vec![true]),
            Err(ZeroSumError::EmptyReach)
        );
    }
}
