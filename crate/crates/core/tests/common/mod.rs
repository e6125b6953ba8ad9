//! Brute-force oracles shared by the integration tests. They deliberately avoid
//! the library's graph algorithms.
#![allow(dead_code)]

use divgame::timed::{RegionAutomaton, TimedGame};
use divgame::{ExtValue, Extended, Owner, WeightedGame};

/// `(src, dst, weight)` for every edge not leaving a target.
pub fn play_edges(game: &WeightedGame) -> Vec<(usize, usize, i64)> {
    game.edges()
        .iter()
        .filter(|e| !game.is_target(e.src))
        .map(|e| (e.src, e.dst, e.weight))
        .collect()
}

/// Boolean transitive closure by repeated relaxation.
pub fn reachability(n: usize, edges: &[(usize, usize, i64)]) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; n]; n];
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = true;
    }
    loop {
        let mut changed = false;
        for &(u, v, _) in edges {
            for s in 0..n {
                if r[s][u] && !r[s][v] {
                    r[s][v] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return r;
        }
    }
}

/// Every simple cycle, as its edge indices, each found from its smallest vertex.
pub fn simple_cycles(n: usize, edges: &[(usize, usize, i64)]) -> Vec<Vec<usize>> {
    fn dfs(
        start: usize,
        u: usize,
        edges: &[(usize, usize, i64)],
        on_path: &mut Vec<bool>,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        for (i, &(a, b, _)) in edges.iter().enumerate() {
            if a != u || b < start {
                continue;
            }
            if b == start {
                path.push(i);
                out.push(path.clone());
                path.pop();
            } else if !on_path[b] {
                on_path[b] = true;
                path.push(i);
                dfs(start, b, edges, on_path, path, out);
                path.pop();
                on_path[b] = false;
            }
        }
    }
    let mut out = Vec::new();
    for s in 0..n {
        let mut on_path = vec![false; n];
        on_path[s] = true;
        dfs(s, s, edges, &mut on_path, &mut Vec::new(), &mut out);
    }
    out
}

/// Components (by mutual reachability) hold simple cycles of one strict sign.
pub fn uniform_signs(n: usize, edges: &[(usize, usize, i64)], cycle_signs: &[(usize, i64, i64)]) -> bool {
    let r = reachability(n, edges);
    let comp: Vec<usize> = (0..n).map(|v| (0..n).find(|&u| r[u][v] && r[v][u]).unwrap()).collect();
    let mut seen: Vec<Option<bool>> = vec![None; n];
    for &(start, lo, hi) in cycle_signs {
        let positive = if lo >= 1 {
            true
        } else if hi <= -1 {
            false
        } else {
            return false;
        };
        match seen[comp[start]] {
            Some(p) if p != positive => return false,
            _ => seen[comp[start]] = Some(positive),
        }
    }
    true
}

pub fn oracle_divergent_untimed(game: &WeightedGame) -> bool {
    let edges = play_edges(game);
    let n = game.num_vertices();
    let signs: Vec<(usize, i64, i64)> = simple_cycles(n, &edges)
        .into_iter()
        .map(|c| {
            let w: i64 = c.iter().map(|&i| edges[i].2).sum();
            (edges[c[0]].0, w, w)
        })
        .collect();
    uniform_signs(n, &edges, &signs)
}

/// Attractor by naive fixpoint. Edges leaving the restriction are ignored.
pub fn naive_attractor(game: &WeightedGame, player: Owner, targets: &[usize], restriction: &[usize]) -> Vec<usize> {
    let n = game.num_vertices();
    let mut inside = vec![false; n];
    for &v in restriction.iter().chain(targets) {
        inside[v] = true;
    }
    let mut member = vec![false; n];
    for &v in targets {
        member[v] = true;
    }
    loop {
        let mut changed = false;
        for v in 0..n {
            if member[v] || !inside[v] {
                continue;
            }
            let succ: Vec<usize> =
                game.edges().iter().filter(|e| e.src == v && inside[e.dst]).map(|e| e.dst).collect();
            let join = if game.owner(v) == player {
                succ.iter().any(|&d| member[d])
            } else {
                !succ.is_empty() && succ.iter().all(|&d| member[d])
            };
            if join {
                member[v] = true;
                changed = true;
            }
        }
        if !changed {
            return (0..n).filter(|&v| member[v]).collect();
        }
    }
}

/// `(lo, hi)` of closed walks through each vertex, from simple cycles: pumping any
/// negative (positive) cycle of the component sends `lo` (`hi`) to infinity.
pub fn naive_cycle_bounds(n: usize, edges: &[(usize, usize, i64)]) -> Vec<Option<(ExtValue, ExtValue)>> {
    let r = reachability(n, edges);
    let cycles = simple_cycles(n, edges);
    (0..n)
        .map(|v| {
            let mut through: Vec<i64> = Vec::new();
            let (mut neg, mut pos) = (false, false);
            for c in &cycles {
                let w: i64 = c.iter().map(|&i| edges[i].2).sum();
                let touches = c.iter().any(|&i| edges[i].0 == v);
                let u = edges[c[0]].0;
                if r[u][v] && r[v][u] {
                    neg |= w < 0;
                    pos |= w > 0;
                }
                if touches {
                    through.push(w);
                }
            }
            if through.is_empty() {
                return None;
            }
            let lo = if neg { Extended::NegInf } else { Extended::Fin(*through.iter().min().unwrap()) };
            let hi = if pos { Extended::PosInf } else { Extended::Fin(*through.iter().max().unwrap()) };
            Some((lo, hi))
        })
        .collect()
}

/// Corners of a one-clock region node.
fn one_clock_corners(ra: &RegionAutomaton, node: usize) -> Vec<u32> {
    let r = ra.region(ra.node(node).1);
    let k = r.ints[0];
    if r.is_zero_frac(0) {
        vec![k]
    } else {
        vec![k, k + 1]
    }
}

/// Extremal weights of corner plays along a sequence of region arcs (one clock),
/// by exhaustive enumeration.
pub fn corner_interval(game: &TimedGame, ra: &RegionAutomaton, arcs: &[usize]) -> Option<(i64, i64)> {
    fn go(game: &TimedGame, ra: &RegionAutomaton, arcs: &[usize], c: u32, acc: i64, out: &mut Option<(i64, i64)>) {
        let Some((&a, rest)) = arcs.split_first() else {
            *out = Some(match *out {
                None => (acc, acc),
                Some((lo, hi)) => (lo.min(acc), hi.max(acc)),
            });
            return;
        };
        let arc = ra.arc(a);
        let (s, _) = ra.node(arc.src);
        let rate = game.state(s).rate;
        let t = game.transition(arc.trans);
        for &via in &arc.via {
            let r = ra.region(via);
            let k = r.ints[0];
            let targets: Vec<u32> = if r.is_zero_frac(0) { vec![k] } else { vec![k, k + 1] };
            for y in targets {
                if y < c {
                    continue;
                }
                let next = if t.resets.contains(&0) { 0 } else { y };
                go(game, ra, rest, next, acc + rate * (y - c) as i64 + t.weight, out);
            }
        }
    }
    let mut out = None;
    let start = ra.arc(*arcs.first()?).src;
    for c in one_clock_corners(ra, start) {
        go(game, ra, arcs, c, 0, &mut out);
    }
    out
}

/// Simple cycles of the region automaton (target nodes have no outgoing arcs),
/// as `(arc ids, start node)`.
pub fn region_cycles(ra: &RegionAutomaton) -> Vec<(Vec<usize>, usize)> {
    let edges: Vec<(usize, usize, i64)> = ra
        .arcs()
        .iter()
        .map(|a| if ra.is_target(a.src) { (usize::MAX, usize::MAX, 0) } else { (a.src, a.dst, 0) })
        .collect();
    let n = ra.num_nodes();
    let live: Vec<(usize, usize, i64)> = edges.iter().copied().filter(|e| e.0 != usize::MAX).collect();
    let ids: Vec<usize> = (0..edges.len()).filter(|&i| edges[i].0 != usize::MAX).collect();
    simple_cycles(n, &live)
        .into_iter()
        .map(|c| {
            let arcs: Vec<usize> = c.iter().map(|&i| ids[i]).collect();
            let start = live[c[0]].0;
            (arcs, start)
        })
        .collect()
}

/// One-clock divergence by enumerating simple region cycles.
pub fn oracle_divergent_timed(game: &TimedGame) -> bool {
    let ra = RegionAutomaton::build(game);
    let edges: Vec<(usize, usize, i64)> =
        ra.arcs().iter().filter(|a| !ra.is_target(a.src)).map(|a| (a.src, a.dst, 0)).collect();
    // Plays may start anywhere on the cycle, and each rotation has its own weights.
    let mut signs: Vec<(usize, i64, i64)> = Vec::new();
    for (arcs, _) in region_cycles(&ra) {
        for k in 0..arcs.len() {
            let rotated: Vec<usize> = arcs[k..].iter().chain(&arcs[..k]).copied().collect();
            let (lo, hi) = corner_interval(game, &ra, &rotated).expect("region cycles admit corner plays");
            signs.push((ra.arc(rotated[0]).src, lo, hi));
        }
    }
    uniform_signs(ra.num_nodes(), &edges, &signs)
}
