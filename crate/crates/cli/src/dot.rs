use std::collections::BTreeSet;
use std::fmt::Write;

use qrg::{GameGraph, VertexId};

const SHAPES: [&str; 6] = ["circle", "box", "diamond", "hexagon", "triangle", "octagon"];

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT rendering of an arena. Player `i` gets the `i`-th shape, goal
/// vertices are shaded and double-bordered, and `highlight` edges are
/// drawn bold.
pub fn export_dot(g: &GameGraph, highlight: &BTreeSet<(VertexId, VertexId)>) -> String {
    let mut out = String::from("digraph game {\n  rankdir=LR;\n");
    for v in g.vertices() {
        let owner = g.owner(v);
        let goals: Vec<String> = g.goal_players(v).iter().map(|p| (p + 1).to_string()).collect();
        write!(
            out,
            "  {} [label={}, shape={}, owner={}",
            quote(g.name(v)),
            quote(g.name(v)),
            SHAPES[owner % SHAPES.len()],
            owner + 1
        )
        .unwrap();
        if !goals.is_empty() {
            write!(out, ", goals=\"{}\", style=filled, fillcolor=gray85, peripheries=2", goals.join(",")).unwrap();
        }
        out.push_str("];\n");
    }
    if let Some(v0) = g.initial() {
        writeln!(out, "  __start [shape=point];\n  __start -> {};", quote(g.name(v0))).unwrap();
    }
    for (from, to, ws) in g.edges() {
        let mut attrs = Vec::new();
        if let Some(ws) = ws {
            let label: Vec<String> = ws
                .iter()
                .map(|w| if w.is_integer() { w.to_integer().to_string() } else { w.to_string() })
                .collect();
            attrs.push(format!("label=\"{}\"", label.join(",")));
        }
        if highlight.contains(&(from, to)) {
            attrs.push("color=red, penwidth=2.5".into());
        }
        write!(out, "  {} -> {}", quote(g.name(from)), quote(g.name(to))).unwrap();
        if !attrs.is_empty() {
            write!(out, " [{}]", attrs.join(", ")).unwrap();
        }
        out.push_str(";\n");
    }
    out.push_str("}\n");
    out
}
