//! Strategy extraction from solved games and certification by one-player solving.

use serde::Serialize;

use crate::ext::{ExtValue, Extended};
use crate::game::{EdgeId, Owner, VertexId, WeightedGame};
use crate::graph_analysis::{attractor_in, full_graph, sccs, Digraph};
use crate::untimed::{SolveError, ValueVector};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StrategyKind {
    /// One edge per vertex of the player.
    Memoryless { choice: Vec<Option<EdgeId>> },
    /// Follows `greedy` while the fuel counter exceeds `threshold`, then `fallback`.
    /// The counter starts at `initial` and decreases with every move.
    Fuel {
        initial: u64,
        threshold: u64,
        greedy: Vec<Option<EdgeId>>,
        fallback: Vec<Option<EdgeId>>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Strategy {
    pub player: Owner,
    #[serde(flatten)]
    pub kind: StrategyKind,
}

impl Strategy {
    /// The edge chosen at `v` with `fuel` moves left (ignored when memoryless).
    pub fn choose(&self, v: VertexId, fuel: u64) -> Option<EdgeId> {
        match &self.kind {
            StrategyKind::Memoryless { choice } => choice[v],
            StrategyKind::Fuel { threshold, greedy, fallback, .. } => {
                if fuel > *threshold {
                    greedy[v]
                } else {
                    fallback[v]
                }
            }
        }
    }

    /// Action labels instead of edge ids, keyed by vertex name.
    pub fn to_json(&self, game: &WeightedGame) -> serde_json::Value {
        let table = |choice: &[Option<EdgeId>]| {
            let mut m = serde_json::Map::new();
            for v in game.vertices() {
                if let Some(e) = choice[v] {
                    m.insert(game.name(v).to_string(), game.edge(e).action.clone().into());
                }
            }
            serde_json::Value::Object(m)
        };
        match &self.kind {
            StrategyKind::Memoryless { choice } => serde_json::json!({
                "player": self.player,
                "kind": "memoryless",
                "choice": table(choice),
            }),
            StrategyKind::Fuel { initial, threshold, greedy, fallback } => serde_json::json!({
                "player": self.player,
                "kind": "fuel",
                "initial": initial,
                "threshold": threshold,
                "greedy": table(greedy),
                "fallback": table(fallback),
            }),
        }
    }

    fn validate(&self, game: &WeightedGame) -> Result<(), SolveError> {
        let tables: Vec<&Vec<Option<EdgeId>>> = match &self.kind {
            StrategyKind::Memoryless { choice } => vec![choice],
            StrategyKind::Fuel { greedy, fallback, .. } => vec![greedy, fallback],
        };
        for t in tables {
            for v in game.vertices() {
                if game.owner(v) != self.player || game.is_target(v) {
                    continue;
                }
                match t.get(v).copied().flatten() {
                    Some(e) if e < game.edges().len() && game.edge(e).src == v => {}
                    _ => return Err(SolveError::InvalidStrategy(v)),
                }
            }
        }
        Ok(())
    }
}

/// Edge attaining the operator at `v` against `values`, smallest action first.
fn optimizing_edge(game: &WeightedGame, values: &ValueVector, v: VertexId) -> Result<EdgeId, SolveError> {
    let mut best: Option<(ExtValue, EdgeId)> = None;
    for &e in game.out_edges(v) {
        let edge = game.edge(e);
        let c = values[edge.dst].plus_weight(edge.weight)?;
        let better = match (best, game.owner(v)) {
            (None, _) => true,
            (Some((b, _)), Owner::Min) => c < b,
            (Some((b, _)), Owner::Max) => c > b,
        };
        if better {
            best = Some((c, e));
        }
    }
    Ok(best.expect("games are deadlock-free").1)
}

/// Memoryless Max strategy picking an edge that attains the max at the fixed point.
pub fn extract_max_strategy(game: &WeightedGame, values: &ValueVector) -> Result<Strategy, SolveError> {
    let mut choice = vec![None; game.num_vertices()];
    for v in game.vertices() {
        if game.owner(v) == Owner::Max {
            choice[v] = Some(optimizing_edge(game, values, v)?);
        }
    }
    Ok(Strategy { player: Owner::Max, kind: StrategyKind::Memoryless { choice } })
}

/// Initial fuel of the Min strategy: `|V| (2 |V| W + 1)`.
pub fn min_fuel(game: &WeightedGame) -> u64 {
    let n = game.num_vertices() as u64;
    n * (2 * n * game.max_abs_weight() as u64 + 1)
}

/// Fuel-based Min strategy; requires every value to be finite.
pub fn extract_min_strategy(game: &WeightedGame, values: &ValueVector) -> Result<Strategy, SolveError> {
    if let Some(v) = game.vertices().find(|&v| !values[v].is_finite()) {
        return Err(SolveError::InfiniteValue(v));
    }
    let n = game.num_vertices();
    let targets: Vec<bool> = game.vertices().map(|v| game.is_target(v)).collect();
    let g = full_graph(game);
    let attr = attractor_in(&g, game.owners(), Owner::Min, &targets, &vec![true; n]);
    let mut greedy = vec![None; n];
    let mut fallback = vec![None; n];
    for v in game.vertices() {
        if game.owner(v) != Owner::Min {
            continue;
        }
        greedy[v] = Some(optimizing_edge(game, values, v)?);
        fallback[v] = Some(match attr.via[v] {
            Some(a) => g.arc(a).tag,
            None => game.out_edges(v)[0],
        });
    }
    Ok(Strategy {
        player: Owner::Min,
        kind: StrategyKind::Fuel { initial: min_fuel(game), threshold: n as u64, greedy, fallback },
    })
}

/// A graph where only `chooser` decides; `terminal` nodes end the play with weight 0.
struct OnePlayer {
    graph: Digraph,
    terminal: Vec<bool>,
    chooser: Owner,
}

impl OnePlayer {
    fn solve(&self) -> Vec<ExtValue> {
        match self.chooser {
            Owner::Max => self.longest(),
            Owner::Min => self.shortest(),
        }
    }

    /// `+inf` where some path avoids terminals forever, else the heaviest path.
    fn longest(&self) -> Vec<ExtValue> {
        let n = self.graph.num_nodes();
        let mut inner = Digraph::new(n);
        for a in self.graph.arcs() {
            if !self.terminal[a.src] && !self.terminal[a.dst] {
                inner.add_arc(a.src, a.dst, a.weight, a.tag);
            }
        }
        let scc = sccs(&inner);
        let mut val: Vec<ExtValue> = (0..n)
            .map(|v| if self.terminal[v] { Extended::Fin(0) } else { Extended::PosInf })
            .collect();
        // Inverse topological order: successors are settled first.
        for (c, comp) in scc.components.iter().enumerate() {
            let v = comp[0];
            if self.terminal[v] {
                continue;
            }
            if scc.is_trivial(&inner, c) {
                let mut best = Extended::NegInf;
                for &a in self.graph.out_arcs(v) {
                    let arc = self.graph.arc(a);
                    let c = val[arc.dst].plus_weight(arc.weight).expect("bounded weights");
                    best = best.max(c);
                }
                if self.graph.out_arcs(v).is_empty() {
                    best = Extended::PosInf;
                }
                val[v] = best;
            }
        }
        val
    }

    /// Shortest path to a terminal with `-inf` where negative cycles can be pumped.
    fn shortest(&self) -> Vec<ExtValue> {
        let n = self.graph.num_nodes();
        let mut val: Vec<ExtValue> = (0..n)
            .map(|v| if self.terminal[v] { Extended::Fin(0) } else { Extended::PosInf })
            .collect();
        let relax = |val: &mut Vec<ExtValue>, pump: bool| {
            let mut changed = false;
            for a in self.graph.arcs() {
                if self.terminal[a.src] {
                    continue;
                }
                let c = val[a.dst].plus_weight(a.weight).expect("bounded weights");
                if c < val[a.src] {
                    val[a.src] = if pump { Extended::NegInf } else { c };
                    changed = true;
                }
            }
            changed
        };
        for _ in 0..n {
            if !relax(&mut val, false) {
                return val;
            }
        }
        for _ in 0..=n {
            if !relax(&mut val, true) {
                break;
            }
        }
        val
    }
}

/// Value of every vertex when `strategy`'s player follows it and the opponent
/// answers optimally. Fuel strategies are evaluated with their initial fuel.
pub fn strategy_value(game: &WeightedGame, strategy: &Strategy) -> Result<ValueVector, SolveError> {
    strategy.validate(game)?;
    let n = game.num_vertices();
    let chooser = strategy.player.opponent();
    let (layers, start_layer, threshold) = match &strategy.kind {
        StrategyKind::Memoryless { .. } => (1usize, 0usize, 0u64),
        StrategyKind::Fuel { initial, threshold, .. } => {
            let top = initial.saturating_sub(*threshold) as usize;
            (top + 1, top, *threshold)
        }
    };
    // Layer 0 is the fallback mode, layer k > 0 holds fuel `threshold + k`.
    let mut graph = Digraph::new(n * layers);
    let mut terminal = vec![false; n * layers];
    for layer in 0..layers {
        let next = layer.saturating_sub(1);
        let fuel = threshold + layer as u64;
        for v in game.vertices() {
            let node = layer * n + v;
            if game.is_target(v) {
                terminal[node] = true;
                continue;
            }
            let (edges, dst_layer): (Vec<EdgeId>, usize) = match &strategy.kind {
                StrategyKind::Memoryless { choice } if game.owner(v) == strategy.player => {
                    (vec![choice[v].expect("validated")], 0)
                }
                StrategyKind::Memoryless { .. } => (game.out_edges(v).to_vec(), 0),
                StrategyKind::Fuel { .. } if game.owner(v) == strategy.player => {
                    let pick = if layer == 0 { strategy.choose(v, 0) } else { strategy.choose(v, fuel) };
                    (vec![pick.expect("validated")], next)
                }
                StrategyKind::Fuel { .. } => (game.out_edges(v).to_vec(), next),
            };
            for e in edges {
                let edge = game.edge(e);
                graph.add_arc(node, dst_layer * n + edge.dst, edge.weight, e);
            }
        }
    }
    let solved = OnePlayer { graph, terminal, chooser }.solve();
    Ok(ValueVector(solved[start_layer * n..(start_layer + 1) * n].to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::parse_untimed_game;
    use crate::testdata::FIG1;
    use crate::untimed::solve;

    #[test]
    fn fig1_max_strategy() {
        let g = parse_untimed_game(FIG1).unwrap();
        let vals = solve(&g).unwrap();
        let s = extract_max_strategy(&g, &vals).unwrap();
        let act = |n: &str| g.edge(s.choose(g.vertex(n).unwrap(), 0).unwrap()).action.clone();
        assert_eq!(act("v9"), "a");
        assert_eq!(act("v2"), "c");
        assert_eq!(strategy_value(&g, &s).unwrap(), vals);
    }

    fn fig1_finite_part() -> WeightedGame {
        let mut text = String::new();
        for line in FIG1.lines() {
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.iter().any(|w| ["v1", "v4", "v7"].contains(w)) {
                continue;
            }
            text += line;
            text.push('\n');
        }
        parse_untimed_game(&text).unwrap()
    }

    #[test]
    fn fig1_min_strategy() {
        let g = fig1_finite_part();
        let vals = solve(&g).unwrap();
        assert!(vals.0.iter().all(|v| v.is_finite()));
        let s = extract_min_strategy(&g, &vals).unwrap();
        let act = |n: &str| g.edge(s.choose(g.vertex(n).unwrap(), min_fuel(&g)).unwrap()).action.clone();
        assert_eq!(act("v8"), "b");
        assert_eq!(act("v3"), "a");
        assert_eq!(strategy_value(&g, &s).unwrap(), vals);
    }

    #[test]
    fn min_strategy_needs_finite_values() {
        let g = parse_untimed_game(FIG1).unwrap();
        let vals = solve(&g).unwrap();
        assert!(matches!(extract_min_strategy(&g, &vals), Err(SolveError::InfiniteValue(_))));
    }

    #[test]
    fn forced_target_edge() {
        let g = parse_untimed_game(
            "game untimed\nvertex m max\nvertex t min\ntarget t\nedge m a t 0\nedge t a t 0\n",
        )
        .unwrap();
        let vals = solve(&g).unwrap();
        let s = extract_max_strategy(&g, &vals).unwrap();
        assert_eq!(strategy_value(&g, &s).unwrap().0, vec![Extended::Fin(0), Extended::Fin(0)]);
    }

    #[test]
    fn single_edge_min_vertex() {
        let g = parse_untimed_game(
            "game untimed\nvertex v min\nvertex t min\ntarget t\nedge v a t 4\nedge t a t 0\n",
        )
        .unwrap();
        let vals = solve(&g).unwrap();
        let s = extract_min_strategy(&g, &vals).unwrap();
        for fuel in [0, 1, 100] {
            assert_eq!(s.choose(0, fuel), Some(0));
        }
    }
}
