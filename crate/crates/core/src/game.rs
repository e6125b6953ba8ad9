//! Finite weighted (untimed) games, plays, and the `.wg` text format.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ext::{ArithError, ExtValue, Extended};

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Owner {
    Min,
    Max,
}

impl Owner {
    pub fn opponent(self) -> Owner {
        match self {
            Owner::Min => Owner::Max,
            Owner::Max => Owner::Min,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Owner::Min => "min",
            Owner::Max => "max",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub src: VertexId,
    pub action: String,
    pub dst: VertexId,
    pub weight: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("duplicate vertex {0}")]
    DuplicateVertex(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("vertex {vertex} has two edges labelled {action}")]
    NonDeterministic { vertex: String, action: String },
    #[error("vertex {0} has no outgoing edge")]
    Deadlock(String),
    #[error("target {0} is owned by max")]
    MaxTarget(String),
    #[error("play is not chained at step {0}")]
    NonChainedPlay(usize),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

impl GameError {
    pub fn is_syntax(&self) -> bool {
        matches!(self, GameError::Syntax { .. })
    }
}

/// A validated weighted game: deadlock-free, deterministic, targets owned by Min.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedGame {
    names: Vec<String>,
    owners: Vec<Owner>,
    targets: Vec<bool>,
    edges: Vec<Edge>,
    out: Vec<Vec<EdgeId>>,
    index: HashMap<String, VertexId>,
}

impl WeightedGame {
    pub fn builder() -> GameBuilder {
        GameBuilder::default()
    }

    pub fn parse(text: &str) -> Result<WeightedGame, GameError> {
        parse_untimed_game(text)
    }

    pub fn num_vertices(&self) -> usize {
        self.names.len()
    }

    pub fn vertices(&self) -> std::ops::Range<VertexId> {
        0..self.names.len()
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v]
    }

    pub fn vertex(&self, name: &str) -> Option<VertexId> {
        self.index.get(name).copied()
    }

    pub fn owner(&self, v: VertexId) -> Owner {
        self.owners[v]
    }

    pub fn owners(&self) -> &[Owner] {
        &self.owners
    }

    pub fn is_target(&self, v: VertexId) -> bool {
        self.targets[v]
    }

    pub fn targets(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices().filter(|&v| self.targets[v])
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    /// Outgoing edges of `v`, sorted by action label.
    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.out[v]
    }

    pub fn edge_by_action(&self, v: VertexId, action: &str) -> Option<EdgeId> {
        self.out[v].iter().copied().find(|&e| self.edges[e].action == action)
    }

    pub fn alphabet(&self) -> BTreeSet<&str> {
        self.edges.iter().map(|e| e.action.as_str()).collect()
    }

    pub fn max_abs_weight(&self) -> i64 {
        self.edges.iter().map(|e| e.weight.abs()).max().unwrap_or(0)
    }

    /// Successor lists (one entry per edge, so parallel edges repeat).
    pub fn successors(&self) -> Vec<Vec<VertexId>> {
        self.out
            .iter()
            .map(|es| es.iter().map(|&e| self.edges[e].dst).collect())
            .collect()
    }

    /// Same arena with owners swapped and weights negated. Targets are dropped,
    /// since they would be Max-owned; callers solve components with explicit boundaries.
    pub fn dual(&self) -> WeightedGame {
        let mut g = self.clone();
        for o in &mut g.owners {
            *o = o.opponent();
        }
        for e in &mut g.edges {
            e.weight = -e.weight;
        }
        g.targets.iter_mut().for_each(|t| *t = false);
        g
    }

    /// Serializes to the `.wg` format accepted by [`parse_untimed_game`].
    pub fn to_wg(&self) -> String {
        let mut s = String::from("game untimed\n");
        for v in self.vertices() {
            let _ = writeln!(s, "vertex {} {}", self.names[v], self.owners[v].keyword());
        }
        for v in self.targets() {
            let _ = writeln!(s, "target {}", self.names[v]);
        }
        for e in &self.edges {
            let _ = writeln!(
                s,
                "edge {} {} {} {}",
                self.names[e.src], e.action, self.names[e.dst], e.weight
            );
        }
        s
    }
}

/// Incremental construction of a [`WeightedGame`]; validation happens in [`GameBuilder::build`].
#[derive(Default, Debug, Clone)]
pub struct GameBuilder {
    names: Vec<String>,
    owners: Vec<Owner>,
    targets: Vec<bool>,
    edges: Vec<(VertexId, Option<String>, VertexId, i64)>,
    index: HashMap<String, VertexId>,
}

impl GameBuilder {
    pub fn vertex(&mut self, name: &str, owner: Owner) -> Result<VertexId, GameError> {
        if self.index.contains_key(name) {
            return Err(GameError::DuplicateVertex(name.to_string()));
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.owners.push(owner);
        self.targets.push(false);
        self.index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn target(&mut self, name: &str) -> Result<(), GameError> {
        let v = self.lookup(name)?;
        self.targets[v] = true;
        Ok(())
    }

    /// Adds an edge; `action = None` receives a generated label `a0`, `a1`, ...
    pub fn edge(
        &mut self,
        src: &str,
        action: Option<&str>,
        dst: &str,
        weight: i64,
    ) -> Result<(), GameError> {
        let s = self.lookup(src)?;
        let d = self.lookup(dst)?;
        self.edges.push((s, action.map(str::to_string), d, weight));
        Ok(())
    }

    pub fn edge_ids(
        &mut self,
        src: VertexId,
        action: Option<&str>,
        dst: VertexId,
        weight: i64,
    ) -> &mut Self {
        self.edges.push((src, action.map(str::to_string), dst, weight));
        self
    }

    fn lookup(&self, name: &str) -> Result<VertexId, GameError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| GameError::UnknownVertex(name.to_string()))
    }

    pub fn build(self) -> Result<WeightedGame, GameError> {
        let n = self.names.len();
        let mut used: Vec<BTreeSet<String>> = vec![BTreeSet::new(); n];
        for (s, a, _, _) in &self.edges {
            if let Some(a) = a {
                if !used[*s].insert(a.clone()) {
                    return Err(GameError::NonDeterministic {
                        vertex: self.names[*s].clone(),
                        action: a.clone(),
                    });
                }
            }
        }
        let mut counters = vec![0usize; n];
        let mut edges = Vec::with_capacity(self.edges.len());
        for (s, a, d, w) in self.edges {
            let action = match a {
                Some(a) => a,
                None => loop {
                    let cand = format!("a{}", counters[s]);
                    counters[s] += 1;
                    if used[s].insert(cand.clone()) {
                        break cand;
                    }
                },
            };
            edges.push(Edge { src: s, action, dst: d, weight: w });
        }
        let mut out: Vec<Vec<EdgeId>> = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            out[e.src].push(i);
        }
        for list in &mut out {
            list.sort_by(|&a, &b| edges[a].action.cmp(&edges[b].action));
        }
        for v in 0..n {
            if self.targets[v] && self.owners[v] == Owner::Max {
                return Err(GameError::MaxTarget(self.names[v].clone()));
            }
            if out[v].is_empty() {
                return Err(GameError::Deadlock(self.names[v].clone()));
            }
        }
        Ok(WeightedGame {
            names: self.names,
            owners: self.owners,
            targets: self.targets,
            edges,
            out,
            index: self.index,
        })
    }
}

/// Parses the line-oriented `.wg` format.
///
/// ```text
/// game untimed
/// vertex v min
/// target v
/// edge v a v 0
/// ```
///
/// `edge <src> <dst> <int>` (without action) gets a generated label.
pub fn parse_untimed_game(text: &str) -> Result<WeightedGame, GameError> {
    let mut b = GameBuilder::default();
    let mut header_seen = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let toks = tokens(line);
        if toks.is_empty() {
            continue;
        }
        let ln = lineno + 1;
        let err = |col: usize, msg: String| GameError::Syntax { line: ln, col, msg };
        if !header_seen {
            if toks.len() == 2 && toks[0].1 == "game" && toks[1].1 == "untimed" {
                header_seen = true;
                continue;
            }
            return Err(err(toks[0].0, "expected `game untimed`".into()));
        }
        let arity = |n: usize| -> Result<(), GameError> {
            if toks.len() != n {
                let col = toks.get(n).map_or(line.len() + 1, |t| t.0);
                Err(err(col, format!("`{}` expects {} arguments", toks[0].1, n - 1)))
            } else {
                Ok(())
            }
        };
        match toks[0].1 {
            "vertex" => {
                arity(3)?;
                let owner = match toks[2].1 {
                    "min" => Owner::Min,
                    "max" => Owner::Max,
                    other => return Err(err(toks[2].0, format!("expected min or max, got {other}"))),
                };
                b.vertex(toks[1].1, owner)?;
            }
            "target" => {
                arity(2)?;
                b.target(toks[1].1)?;
            }
            "edge" => {
                let (src, action, dst, wtok) = match toks.len() {
                    5 => (toks[1].1, Some(toks[2].1), toks[3].1, toks[4]),
                    4 => (toks[1].1, None, toks[2].1, toks[3]),
                    _ => return Err(err(toks[0].0, "`edge` expects <src> [<action>] <dst> <int>".into())),
                };
                let w: i64 = wtok
                    .1
                    .parse()
                    .map_err(|_| err(wtok.0, format!("bad integer weight {}", wtok.1)))?;
                b.edge(src, action, dst, w)?;
            }
            "game" => return Err(err(toks[0].0, "duplicate header".into())),
            other => return Err(err(toks[0].0, format!("unknown directive {other}"))),
        }
    }
    if !header_seen {
        return Err(GameError::Syntax { line: 1, col: 1, msg: "missing `game untimed` header".into() });
    }
    b.build()
}

/// Whitespace tokens with their 1-based column.
pub(crate) fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

/// A finite play: a start vertex and a chain of edges.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Play {
    pub start: VertexId,
    pub steps: Vec<EdgeId>,
}

impl Play {
    pub fn new(start: VertexId) -> Play {
        Play { start, steps: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Builds a play from `(vertex, action)` pairs.
    pub fn from_actions(game: &WeightedGame, start: VertexId, actions: &[&str]) -> Option<Play> {
        let mut cur = start;
        let mut steps = Vec::new();
        for a in actions {
            let e = game.edge_by_action(cur, a)?;
            steps.push(e);
            cur = game.edge(e).dst;
        }
        Some(Play { start, steps })
    }

    pub fn end(&self, game: &WeightedGame) -> VertexId {
        self.steps.last().map_or(self.start, |&e| game.edge(e).dst)
    }

    fn check(&self, game: &WeightedGame) -> Result<(), GameError> {
        let mut cur = self.start;
        for (i, &e) in self.steps.iter().enumerate() {
            if e >= game.edges.len() || game.edges[e].src != cur {
                return Err(GameError::NonChainedPlay(i));
            }
            cur = game.edges[e].dst;
        }
        Ok(())
    }
}

/// Accumulated weight of a finite play.
pub fn play_weight(game: &WeightedGame, play: &Play) -> Result<i64, GameError> {
    play.check(game)?;
    let mut total: i64 = 0;
    for &e in &play.steps {
        total = total.checked_add(game.edge(e).weight).ok_or(ArithError::Overflow)?;
    }
    Ok(total)
}

/// Weight up to the first target visit, `+inf` if the play never visits a target.
pub fn play_value(game: &WeightedGame, play: &Play) -> Result<ExtValue, GameError> {
    play.check(game)?;
    let mut cur = play.start;
    let mut total: i64 = 0;
    for &e in &play.steps {
        if game.is_target(cur) {
            return Ok(Extended::Fin(total));
        }
        total = total.checked_add(game.edge(e).weight).ok_or(ArithError::Overflow)?;
        cur = game.edge(e).dst;
    }
    if game.is_target(cur) {
        Ok(Extended::Fin(total))
    } else {
        Ok(Extended::PosInf)
    }
}

/// An infinite play of lasso shape: `stem` followed by `cycle` repeated forever.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LassoPlay {
    pub stem: Play,
    pub cycle: Vec<EdgeId>,
}

impl LassoPlay {
    pub fn value(&self, game: &WeightedGame) -> Result<ExtValue, GameError> {
        let mut once = self.stem.clone();
        once.steps.extend_from_slice(&self.cycle);
        once.check(game)?;
        if once.end(game) != self.stem.end(game) || self.cycle.is_empty() {
            return Err(GameError::NonChainedPlay(once.steps.len()));
        }
        // Every vertex of the lasso is visited within stem + one turn of the cycle.
        play_value(game, &once)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testdata::FIG1;
    use proptest::prelude::*;

    #[test]
    fn parses_fig1() {
        let g = parse_untimed_game(FIG1).unwrap();
        assert_eq!(g.num_vertices(), 10);
        assert_eq!(g.edges().len(), 21);
        let targets: Vec<_> = g.targets().map(|v| g.name(v)).collect();
        assert_eq!(targets, vec!["vt"]);
        assert_eq!(g.owner(g.vertex("v2").unwrap()), Owner::Max);
    }

    #[test]
    fn minimal_game() {
        let g = parse_untimed_game("game untimed\nvertex v min\ntarget v\nedge v a v 0\n").unwrap();
        assert_eq!(g.num_vertices(), 1);
        assert_eq!(g.edge(0).weight, 0);
        assert_eq!(g.edge(0).dst, 0);
    }

    #[test]
    fn dropping_target_loop_is_a_deadlock() {
        let text = FIG1.replace("edge vt a vt 0", "");
        assert_eq!(parse_untimed_game(&text), Err(GameError::Deadlock("vt".into())));
    }

    #[test]
    fn removing_v3_to_v2_is_still_valid() {
        let text = FIG1.replace("edge v3 a v2 0", "");
        assert!(parse_untimed_game(&text).is_ok());
    }

    #[test]
    fn error_cases() {
        let e = parse_untimed_game("game untimed\nvertex v min\nvertex v max\n").unwrap_err();
        assert_eq!(e, GameError::DuplicateVertex("v".into()));
        let e = parse_untimed_game("game untimed\nvertex v min\nedge v a w 0\n").unwrap_err();
        assert_eq!(e, GameError::UnknownVertex("w".into()));
        let e = parse_untimed_game("game untimed\nvertex v min\nedge v a v 0\nedge v a v 1\n").unwrap_err();
        assert!(matches!(e, GameError::NonDeterministic { .. }));
        let e = parse_untimed_game("game untimed\nvertex v max\ntarget v\nedge v a v 0\n").unwrap_err();
        assert_eq!(e, GameError::MaxTarget("v".into()));
        let e = parse_untimed_game("game untimed\nvertex v min\nedge v a v x1\n").unwrap_err();
        assert_eq!(e, GameError::Syntax { line: 3, col: 12, msg: "bad integer weight x1".into() });
        let e = parse_untimed_game("  vertex v min\n").unwrap_err();
        assert!(matches!(e, GameError::Syntax { line: 1, col: 3, .. }));
    }

    #[test]
    fn generated_labels_avoid_explicit_ones() {
        let g = parse_untimed_game("game untimed\nvertex v min\nedge v a0 v 1\nedge v v 2\nedge v v 3\n").unwrap();
        let labels: Vec<_> = g.out_edges(0).iter().map(|&e| g.edge(e).action.clone()).collect();
        assert_eq!(labels, vec!["a0", "a1", "a2"]);
    }

    #[test]
    fn play_weights() {
        let g = parse_untimed_game(FIG1).unwrap();
        let v = |n| g.vertex(n).unwrap();
        let p = Play::from_actions(&g, v("v9"), &["a", "a"]).unwrap();
        assert_eq!(p.end(&g), v("v9"));
        assert_eq!(play_weight(&g, &p), Ok(1));
        assert_eq!(play_weight(&g, &Play::new(v("v3"))), Ok(0));
        let p = Play::from_actions(&g, v("v2"), &["c", "a", "b"]).unwrap();
        assert_eq!(p.end(&g), v("v8"));
        assert_eq!(play_weight(&g, &p), Ok(-9));
        let broken = Play { start: v("v1"), steps: vec![g.edge_by_action(v("v9"), "a").unwrap()] };
        assert_eq!(play_weight(&g, &broken), Err(GameError::NonChainedPlay(0)));
    }

    #[test]
    fn play_values() {
        let g = parse_untimed_game(FIG1).unwrap();
        let v = |n| g.vertex(n).unwrap();
        let p = Play::from_actions(&g, v("v8"), &["b"]).unwrap();
        assert_eq!(play_value(&g, &p), Ok(Extended::Fin(0)));
        let p = Play::from_actions(&g, v("v9"), &["b", "a", "a"]).unwrap();
        assert_eq!(play_value(&g, &p), Ok(Extended::Fin(0)));
        let lasso = LassoPlay {
            stem: Play::new(v("v4")),
            cycle: vec![g.edge_by_action(v("v4"), "a").unwrap()],
        };
        assert_eq!(lasso.value(&g), Ok(Extended::PosInf));
    }

    proptest! {
        #[test]
        fn wg_round_trip(seed in any::<u64>()) {
            let g = crate::corpus::random_game(&mut crate::corpus::rng(seed), 6, 5);
            let back = parse_untimed_game(&g.to_wg()).unwrap();
            prop_assert_eq!(back, g);
        }

        #[test]
        fn value_is_weight_of_prefix_to_first_target(seed in any::<u64>(), len in 0usize..12) {
            use rand::Rng;
            let mut rng = crate::corpus::rng(seed);
            let g = crate::corpus::random_game(&mut rng, 5, 4);
            let mut play = Play::new(rng.gen_range(0..g.num_vertices()));
            let mut cur = play.start;
            let mut first_target = if g.is_target(cur) { Some(0) } else { None };
            for i in 0..len {
                let out = g.out_edges(cur);
                let e = out[rng.gen_range(0..out.len())];
                play.steps.push(e);
                cur = g.edge(e).dst;
                if first_target.is_none() && g.is_target(cur) {
                    first_target = Some(i + 1);
                }
            }
            let expected = match first_target {
                Some(k) => Extended::Fin(play_weight(&g, &Play { start: play.start, steps: play.steps[..k].to_vec() }).unwrap()),
                None => Extended::PosInf,
            };
            prop_assert_eq!(play_value(&g, &play).unwrap(), expected);
        }
    }
}
