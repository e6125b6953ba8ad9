//! Graphviz renderings.

use std::fmt::Write;

use crate::corner::{CornerArcKind, CornerGraph, Fog};
use crate::game::{Owner, WeightedGame};
use crate::timed::{RegionAutomaton, TimedGame};

fn shape(owner: Owner) -> &'static str {
    match owner {
        Owner::Min => "circle",
        Owner::Max => "box",
    }
}

fn esc(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn corner_label(c: &[u32]) -> String {
    let parts: Vec<String> = c.iter().map(u32::to_string).collect();
    format!("({})", parts.join(","))
}

pub fn game_dot(game: &WeightedGame) -> String {
    let mut s = String::from("digraph game {\n");
    for v in game.vertices() {
        let periph = if game.is_target(v) { 2 } else { 1 };
        let _ = writeln!(
            s,
            "  v{v} [label=\"{}\", shape={}, peripheries={periph}];",
            esc(game.name(v)),
            shape(game.owner(v))
        );
    }
    for e in game.edges() {
        let label = format!("{}: {}", e.action, e.weight);
        let _ = writeln!(s, "  v{} -> v{} [label=\"{}\"];", e.src, e.dst, esc(&label));
    }
    s.push_str("}\n");
    s
}

pub fn region_dot(game: &TimedGame, ra: &RegionAutomaton) -> String {
    let mut s = String::from("digraph regions {\n");
    for n in 0..ra.num_nodes() {
        let periph = if ra.is_target(n) { 2 } else { 1 };
        let _ = writeln!(
            s,
            "  n{n} [label=\"{}\", shape={}, peripheries={periph}];",
            esc(&ra.label(game, n)),
            shape(ra.owner(n))
        );
    }
    for a in ra.arcs() {
        let t = game.transition(a.trans);
        let _ = writeln!(s, "  n{} -> n{} [label=\"t{}: {}\"];", a.src, a.dst, a.trans, t.weight);
    }
    s.push_str("}\n");
    s
}

pub fn corner_dot(game: &TimedGame, ra: &RegionAutomaton, cg: &CornerGraph) -> String {
    let mut s = String::from("digraph corners {\n");
    for (i, (n, c)) in cg.nodes.iter().enumerate() {
        let _ = writeln!(
            s,
            "  c{i} [label=\"{} @ {}\", shape={}];",
            esc(&ra.label(game, *n)),
            corner_label(c),
            shape(ra.owner(*n))
        );
    }
    for a in &cg.arcs {
        let (label, style) = match a.kind {
            CornerArcKind::Delay { delay } => (format!("wait {delay}: {}", a.weight), "dashed"),
            CornerArcKind::Transition { trans } => (format!("t{trans}: {}", a.weight), "solid"),
        };
        let _ = writeln!(s, "  c{} -> c{} [label=\"{label}\", style={style}];", a.src, a.dst);
    }
    s.push_str("}\n");
    s
}

pub fn fog_dot(fog: &Fog) -> String {
    let mut s = String::from("digraph fog {\n");
    for (i, c) in fog.corners.iter().enumerate() {
        let _ = writeln!(s, "  k{i} [label=\"{}\"];", corner_label(c));
    }
    for e in &fog.edges {
        let _ = writeln!(s, "  k{} -> k{} [label=\"{}\"];", e.from, e.to, e.weight);
    }
    s.push_str("}\n");
    s
}
