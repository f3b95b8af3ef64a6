//! Line-oriented text formats for games, tree profiles and Moore profiles.
//!
//! Players are numbered from 1 in every text format.
//!
//! Game:
//! ```text
//! players 2
//! vertex A owner=1
//! edge A B
//! edge B A weights=1,3/2
//! goal 1 A
//! init A
//! ```
//!
//! Profile: `A/B -> C` fixes the move after the history `A B`, and
//! `B => C` fixes the move at every history ending in `B`.
//!
//! Moore profile:
//! ```text
//! player 1
//! states s t
//! initial s
//! transition s A -> t
//! output t A -> B
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::cost::parse_rational;
use crate::game::{is_identifier, GameBuilder, GameGraph, VertexId};
use crate::moore::{MooreMachine, MooreProfile};
use crate::play::path_string;
use crate::tree::{ProfileError, TreeStrategyProfile, TruncatedTree};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError {
        line,
        message: message.into(),
    }
}

/// Non-empty lines with comments stripped, paired with 1-based numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn player_index(tok: &str, players: usize, line: usize) -> Result<usize, FormatError> {
    let p: usize = tok
        .parse()
        .map_err(|_| err(line, format!("invalid player `{tok}`")))?;
    if p == 0 || p > players {
        return Err(err(line, format!("player {p} out of range 1..={players}")));
    }
    Ok(p - 1)
}

fn identifier(tok: &str, line: usize) -> Result<&str, FormatError> {
    if is_identifier(tok) {
        Ok(tok)
    } else {
        Err(err(line, format!("invalid identifier `{tok}`")))
    }
}

pub fn parse_game(text: &str) -> Result<GameGraph, FormatError> {
    let mut builder: Option<GameBuilder> = None;
    let mut players = 0;
    let mut last_line = 0;
    for (no, line) in lines(text) {
        last_line = no;
        let toks: Vec<&str> = line.split_whitespace().collect();
        let (kw, args) = toks.split_first().unwrap();
        if *kw == "players" {
            if builder.is_some() {
                return Err(err(no, "duplicate `players` declaration"));
            }
            let [n] = args else {
                return Err(err(no, "expected `players N`"));
            };
            players = n
                .parse()
                .map_err(|_| err(no, format!("invalid player count `{n}`")))?;
            builder = Some(GameBuilder::new(players));
            continue;
        }
        let b = builder
            .as_mut()
            .ok_or_else(|| err(no, "`players` must come first"))?;
        match *kw {
            "vertex" => {
                let [name, owner] = args else {
                    return Err(err(no, "expected `vertex NAME owner=I`"));
                };
                let owner = owner
                    .strip_prefix("owner=")
                    .ok_or_else(|| err(no, "expected `owner=I`"))?;
                let owner = player_index(owner, players, no)?;
                b.add_vertex(identifier(name, no)?, owner);
            }
            "edge" => {
                let (from, to, weights) = match args {
                    [f, t] => (f, t, None),
                    [f, t, w] => {
                        let w = w
                            .strip_prefix("weights=")
                            .ok_or_else(|| err(no, "expected `weights=w1,...`"))?;
                        let ws = w
                            .split(',')
                            .map(|x| parse_rational(x).ok_or_else(|| err(no, format!("invalid weight `{x}`"))))
                            .collect::<Result<Vec<_>, _>>()?;
                        (f, t, Some(ws))
                    }
                    _ => return Err(err(no, "expected `edge FROM TO [weights=...]`")),
                };
                b.add_edge(identifier(from, no)?, identifier(to, no)?, weights);
            }
            "goal" => {
                let Some((p, vs)) = args.split_first() else {
                    return Err(err(no, "expected `goal I V...`"));
                };
                let p = player_index(p, players, no)?;
                for v in vs {
                    identifier(v, no)?;
                }
                b.add_goal(p, vs.iter().copied());
            }
            "init" => {
                let [v] = args else {
                    return Err(err(no, "expected `init V`"));
                };
                b.set_initial(identifier(v, no)?);
            }
            other => return Err(err(no, format!("unknown keyword `{other}`"))),
        }
    }
    builder
        .ok_or_else(|| err(last_line.max(1), "missing `players` declaration"))?
        .build()
        .map_err(|e| err(0, e.to_string()))
}

pub fn render_game(g: &GameGraph) -> String {
    let mut out = String::new();
    writeln!(out, "players {}", g.players()).unwrap();
    for v in g.vertices() {
        writeln!(out, "vertex {} owner={}", g.name(v), g.owner(v) + 1).unwrap();
    }
    for (from, to, ws) in g.edges() {
        write!(out, "edge {} {}", g.name(from), g.name(to)).unwrap();
        if let Some(ws) = ws {
            let ws: Vec<String> = ws
                .iter()
                .map(|w| {
                    if w.is_integer() {
                        w.to_integer().to_string()
                    } else {
                        format!("{}/{}", w.numer(), w.denom())
                    }
                })
                .collect();
            write!(out, " weights={}", ws.join(",")).unwrap();
        }
        out.push('\n');
    }
    for p in 0..g.players() {
        write!(out, "goal {}", p + 1).unwrap();
        for v in g.goal_set(p) {
            write!(out, " {}", g.name(*v)).unwrap();
        }
        out.push('\n');
    }
    if let Some(v) = g.initial() {
        writeln!(out, "init {}", g.name(v)).unwrap();
    }
    out
}

/// Strategy rules read from a profile file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProfileRules {
    pub history: HashMap<Vec<VertexId>, VertexId>,
    pub memoryless: HashMap<VertexId, VertexId>,
}

impl ProfileRules {
    /// Move after `path`: a history rule, else a memoryless rule, else
    /// the only successor if there is just one.
    pub fn move_after(&self, g: &GameGraph, path: &[VertexId]) -> Option<VertexId> {
        let last = *path.last()?;
        self.history
            .get(path)
            .or_else(|| self.memoryless.get(&last))
            .copied()
            .or_else(|| match g.successors(last) {
                [only] => Some(*only),
                _ => None,
            })
    }

    pub fn to_tree_profile(&self, tree: &TruncatedTree) -> Result<TreeStrategyProfile, ProfileError> {
        let g = tree.game();
        TreeStrategyProfile::from_fn(tree, |n| self.move_after(g, &tree.history(n)))
    }
}

fn vertex_of(g: &GameGraph, name: &str, line: usize) -> Result<VertexId, FormatError> {
    g.vertex(name)
        .ok_or_else(|| err(line, format!("unknown vertex `{name}`")))
}

pub fn parse_profile(g: &GameGraph, text: &str) -> Result<ProfileRules, FormatError> {
    let mut rules = ProfileRules::default();
    for (no, line) in lines(text) {
        if let Some((lhs, rhs)) = line.split_once("=>") {
            let v = vertex_of(g, lhs.trim(), no)?;
            let w = vertex_of(g, rhs.trim(), no)?;
            if !g.has_edge(v, w) {
                return Err(err(no, format!("no edge {} -> {}", lhs.trim(), rhs.trim())));
            }
            rules.memoryless.insert(v, w);
        } else if let Some((lhs, rhs)) = line.split_once("->") {
            let path = lhs
                .trim()
                .split('/')
                .map(|n| vertex_of(g, n.trim(), no))
                .collect::<Result<Vec<_>, _>>()?;
            if !g.is_path(&path) {
                return Err(err(no, format!("`{}` is not a history", lhs.trim())));
            }
            let w = vertex_of(g, rhs.trim(), no)?;
            if !g.has_edge(*path.last().unwrap(), w) {
                return Err(err(no, format!("no edge into `{}`", rhs.trim())));
            }
            rules.history.insert(path, w);
        } else {
            return Err(err(no, "expected `PATH -> V` or `V => W`"));
        }
    }
    Ok(rules)
}

/// Lists the choice at every branching node as a history rule.
pub fn render_tree_profile(tree: &TruncatedTree, sigma: &TreeStrategyProfile) -> String {
    let g = tree.game();
    let mut out = String::new();
    for n in tree.nodes() {
        if tree.is_leaf(n) || !tree.is_branching(n) {
            continue;
        }
        let h: Vec<&str> = tree.history(n).iter().map(|v| g.name(*v)).collect();
        writeln!(out, "{} -> {}", h.join("/"), g.name(tree.vertex(sigma.chosen(n)))).unwrap();
    }
    out
}

pub fn parse_moore(g: &GameGraph, text: &str) -> Result<MooreProfile, FormatError> {
    let mut machines: Vec<Option<MooreMachine>> = vec![None; g.players()];
    let mut current: Option<usize> = None;
    for (no, line) in lines(text) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let (kw, args) = toks.split_first().unwrap();
        if *kw == "player" {
            let [p] = args else {
                return Err(err(no, "expected `player I`"));
            };
            let p = player_index(p, g.players(), no)?;
            if machines[p].is_some() {
                return Err(err(no, format!("player {} declared twice", p + 1)));
            }
            current = Some(p);
            continue;
        }
        let p = current.ok_or_else(|| err(no, "`player` must come first"))?;
        let m = &mut machines[p];
        let state = |m: &Option<MooreMachine>, s: &str| {
            m.as_ref()
                .ok_or_else(|| err(no, "`states` must come first"))?
                .state_by_name(s)
                .ok_or_else(|| err(no, format!("unknown state `{s}`")))
        };
        match *kw {
            "states" => {
                if args.is_empty() || m.is_some() {
                    return Err(err(no, "expected one `states S...` line per player"));
                }
                let names = args
                    .iter()
                    .map(|s| identifier(s, no).map(str::to_string))
                    .collect::<Result<Vec<_>, _>>()?;
                *m = Some(MooreMachine::new(names));
            }
            "initial" => {
                let [s] = args else {
                    return Err(err(no, "expected `initial S`"));
                };
                let s = state(m, s)?;
                m.as_mut().unwrap().set_initial(s);
            }
            "transition" | "output" => {
                let [s, v, arrow, t] = args else {
                    return Err(err(no, format!("expected `{kw} S V -> X`")));
                };
                if *arrow != "->" {
                    return Err(err(no, "expected `->`"));
                }
                let s = state(m, s)?;
                let v = vertex_of(g, v, no)?;
                if *kw == "transition" {
                    let t = state(m, t)?;
                    m.as_mut().unwrap().set_transition(s, v, t);
                } else {
                    let w = vertex_of(g, t, no)?;
                    if !g.has_edge(v, w) {
                        return Err(err(no, format!("no edge {} -> {}", g.name(v), g.name(w))));
                    }
                    m.as_mut().unwrap().set_output(s, v, w);
                }
            }
            other => return Err(err(no, format!("unknown keyword `{other}`"))),
        }
    }
    let machines = machines
        .into_iter()
        .map(|m| m.unwrap_or_else(MooreMachine::trivial))
        .collect();
    MooreProfile::new(g, machines).map_err(|e| err(0, e.to_string()))
}

pub fn render_moore(g: &GameGraph, profile: &MooreProfile) -> String {
    let mut out = String::new();
    for (p, m) in profile.machines().iter().enumerate() {
        writeln!(out, "player {}", p + 1).unwrap();
        let names: Vec<&str> = (0..m.state_count() as u32).map(|s| m.state_name(s)).collect();
        writeln!(out, "states {}", names.join(" ")).unwrap();
        writeln!(out, "initial {}", m.state_name(m.initial())).unwrap();
        for (s, v, t) in m.transition_table() {
            writeln!(out, "transition {} {} -> {}", m.state_name(s), g.name(v), m.state_name(t)).unwrap();
        }
        for (s, v, w) in m.output_table() {
            writeln!(out, "output {} {} -> {}", m.state_name(s), g.name(v), g.name(w)).unwrap();
        }
    }
    out
}

/// Renders a history for messages.
pub fn history_string(g: &GameGraph, path: &[VertexId]) -> String {
    path_string(g, path)
}
