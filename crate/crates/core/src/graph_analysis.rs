//! SCC condensation, attractors, cycle-weight bounds and the untimed divergence test.
//!
//! The algorithms work on [`Digraph`], a plain integer-weighted multigraph, so the
//! timed modules can reuse them on region and corner graphs.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;
use thiserror::Error;

use crate::ext::{ExtValue, Extended};
use crate::game::{EdgeId, Owner, VertexId, WeightedGame};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Arc {
    pub src: usize,
    pub dst: usize,
    pub weight: i64,
    /// Caller-defined identifier, e.g. the originating edge id.
    pub tag: usize,
}

#[derive(Clone, Debug, Default)]
pub struct Digraph {
    n: usize,
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
}

impl Digraph {
    pub fn new(n: usize) -> Digraph {
        Digraph { n, arcs: Vec::new(), out: vec![Vec::new(); n] }
    }

    pub fn add_arc(&mut self, src: usize, dst: usize, weight: i64, tag: usize) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { src, dst, weight, tag });
        self.out[src].push(id);
        id
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, a: usize) -> &Arc {
        &self.arcs[a]
    }

    pub fn out_arcs(&self, u: usize) -> &[usize] {
        &self.out[u]
    }

    pub fn negated(&self) -> Digraph {
        let mut g = self.clone();
        for a in &mut g.arcs {
            a.weight = -a.weight;
        }
        g
    }

    pub fn max_abs_weight(&self) -> i64 {
        self.arcs.iter().map(|a| a.weight.abs()).max().unwrap_or(0)
    }

    pub fn walk_weight(&self, walk: &[usize]) -> i64 {
        walk.iter().map(|&a| self.arcs[a].weight).sum()
    }
}

/// The game graph with every edge. Arc tags are edge ids.
pub fn full_graph(game: &WeightedGame) -> Digraph {
    let mut g = Digraph::new(game.num_vertices());
    for (id, e) in game.edges().iter().enumerate() {
        g.add_arc(e.src, e.dst, e.weight, id);
    }
    g
}

/// The game graph without edges leaving targets: plays stop there, so those edges
/// never contribute to a play's value.
pub fn play_graph(game: &WeightedGame) -> Digraph {
    let mut g = Digraph::new(game.num_vertices());
    for (id, e) in game.edges().iter().enumerate() {
        if !game.is_target(e.src) {
            g.add_arc(e.src, e.dst, e.weight, id);
        }
    }
    g
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SccDecomposition {
    /// Components in inverse topological order, each sorted by vertex id.
    pub components: Vec<Vec<usize>>,
    pub component_of: Vec<usize>,
}

impl SccDecomposition {
    /// A single vertex without a self-loop.
    pub fn is_trivial(&self, g: &Digraph, c: usize) -> bool {
        let comp = &self.components[c];
        comp.len() == 1 && !g.out_arcs(comp[0]).iter().any(|&a| g.arc(a).dst == comp[0])
    }
}

/// SCCs in inverse topological order. Among the valid orders, the one emitting
/// at each point the ready component with the smallest vertex is chosen.
pub fn sccs(g: &Digraph) -> SccDecomposition {
    let mut pg: DiGraph<(), ()> = DiGraph::with_capacity(g.n, g.arcs.len());
    for _ in 0..g.n {
        pg.add_node(());
    }
    for a in &g.arcs {
        pg.add_edge(NodeIndex::new(a.src), NodeIndex::new(a.dst), ());
    }
    let mut comps: Vec<Vec<usize>> = petgraph::algo::tarjan_scc(&pg)
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|x| x.index()).collect();
            c.sort_unstable();
            c
        })
        .collect();
    comps.sort_by_key(|c| c[0]);
    let mut of = vec![0; g.n];
    for (i, c) in comps.iter().enumerate() {
        for &v in c {
            of[v] = i;
        }
    }
    let k = comps.len();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); k];
    for a in &g.arcs {
        let (cs, cd) = (of[a.src], of[a.dst]);
        if cs != cd {
            succ[cs].push(cd);
            pred[cd].push(cs);
        }
    }
    for l in succ.iter_mut().chain(pred.iter_mut()) {
        l.sort_unstable();
        l.dedup();
    }
    let mut pending: Vec<usize> = succ.iter().map(Vec::len).collect();
    let mut ready: BinaryHeap<Reverse<(usize, usize)>> = (0..k)
        .filter(|&c| pending[c] == 0)
        .map(|c| Reverse((comps[c][0], c)))
        .collect();
    let mut order = Vec::with_capacity(k);
    while let Some(Reverse((_, c))) = ready.pop() {
        order.push(c);
        for &p in &pred[c] {
            pending[p] -= 1;
            if pending[p] == 0 {
                ready.push(Reverse((comps[p][0], p)));
            }
        }
    }
    let components: Vec<Vec<usize>> = order.iter().map(|&c| std::mem::take(&mut comps[c])).collect();
    for (i, c) in components.iter().enumerate() {
        for &v in c {
            of[v] = i;
        }
    }
    SccDecomposition { components, component_of: of }
}

/// SCCs of the full game graph.
pub fn scc_decompose(game: &WeightedGame) -> SccDecomposition {
    sccs(&full_graph(game))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Attractor {
    pub member: Vec<bool>,
    /// Distance (in attractor rounds) to the target set.
    pub rank: Vec<Option<usize>>,
    /// For player-owned members outside the targets: an arc towards a lower rank.
    pub via: Vec<Option<usize>>,
}

/// Attractor of `targets` for `player` on a digraph with vertex owners.
/// Only arcs with both ends in `restriction` are considered.
pub fn attractor_in(
    g: &Digraph,
    owners: &[Owner],
    player: Owner,
    targets: &[bool],
    restriction: &[bool],
) -> Attractor {
    let n = g.n;
    let mut member = vec![false; n];
    let mut rank = vec![None; n];
    let mut via = vec![None; n];
    let mut pending = vec![0usize; n];
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (id, a) in g.arcs.iter().enumerate() {
        if restriction[a.src] && restriction[a.dst] {
            pending[a.src] += 1;
            rev[a.dst].push(id);
        }
    }
    let mut queue = VecDeque::new();
    for v in 0..n {
        if targets[v] && restriction[v] {
            member[v] = true;
            rank[v] = Some(0);
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        let r = rank[v].unwrap_or(0);
        for &id in &rev[v] {
            let u = g.arcs[id].src;
            if member[u] {
                continue;
            }
            let join = if owners[u] == player {
                via[u] = Some(id);
                true
            } else {
                pending[u] -= 1;
                pending[u] == 0
            };
            if join {
                member[u] = true;
                rank[u] = Some(r + 1);
                queue.push_back(u);
            }
        }
    }
    Attractor { member, rank, via }
}

/// Attractor of `targets` for `player` within `restriction`, on the full game graph.
pub fn attractor(
    game: &WeightedGame,
    player: Owner,
    targets: &[VertexId],
    restriction: &[VertexId],
) -> Vec<VertexId> {
    let n = game.num_vertices();
    let mut t = vec![false; n];
    let mut r = vec![false; n];
    for &v in restriction {
        r[v] = true;
    }
    for &v in targets {
        t[v] = true;
        r[v] = true;
    }
    let a = attractor_in(&full_graph(game), game.owners(), player, &t, &r);
    (0..n).filter(|&v| a.member[v]).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct VertexCycleBounds {
    pub lo: ExtValue,
    pub hi: ExtValue,
}

/// Per vertex: `None` when no cycle passes through it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CycleBounds {
    pub bounds: Vec<Option<VertexCycleBounds>>,
}

impl CycleBounds {
    pub fn get(&self, v: usize) -> Option<VertexCycleBounds> {
        self.bounds[v]
    }
}

/// Min-plus closure over walks of length ≥ 1 inside `comp` (local indices via `local`,
/// `usize::MAX` outside), saturating to `-inf` once a value proves a negative cycle.
pub fn min_plus_closure(g: &Digraph, comp: &[usize], local: &[usize]) -> Vec<Vec<ExtValue>> {
    let m = comp.len();
    let mut d = vec![vec![Extended::PosInf; m]; m];
    for &u in comp {
        for &a in g.out_arcs(u) {
            let arc = g.arc(a);
            let j = local[arc.dst];
            if j == usize::MAX {
                continue;
            }
            let i = local[u];
            let w = Extended::Fin(arc.weight);
            if w < d[i][j] {
                d[i][j] = w;
            }
        }
    }
    // A walk lighter than -m*W contains a negative cycle.
    let floor = -(m as i64) * g.max_abs_weight();
    for k in 0..m {
        for i in 0..m {
            if d[i][k] == Extended::PosInf {
                continue;
            }
            for j in 0..m {
                let s = match (&d[i][k], &d[k][j]) {
                    (_, Extended::PosInf) => continue,
                    (Extended::Fin(a), Extended::Fin(b)) => {
                        let s = a.saturating_add(*b);
                        if s < floor {
                            Extended::NegInf
                        } else {
                            Extended::Fin(s)
                        }
                    }
                    _ => Extended::NegInf,
                };
                if s < d[i][j] {
                    d[i][j] = s;
                }
            }
        }
    }
    d
}

fn lower_cycle_bounds(g: &Digraph, scc: &SccDecomposition) -> Vec<Option<ExtValue>> {
    let mut lo = vec![None; g.n];
    let mut local = vec![usize::MAX; g.n];
    for (c, comp) in scc.components.iter().enumerate() {
        if scc.is_trivial(g, c) {
            continue;
        }
        for (i, &v) in comp.iter().enumerate() {
            local[v] = i;
        }
        let d = min_plus_closure(g, comp, &local);
        // Inside an SCC every negative cycle can be spliced into every cycle.
        let pumpable = (0..comp.len()).any(|i| d[i][i] < Extended::Fin(0));
        for (i, &v) in comp.iter().enumerate() {
            lo[v] = Some(if pumpable { Extended::NegInf } else { d[i][i] });
        }
        for &v in comp {
            local[v] = usize::MAX;
        }
    }
    lo
}

/// `inf C_v` and `sup C_v` for every vertex of `g`.
pub fn cycle_bounds_of(g: &Digraph) -> CycleBounds {
    let scc = sccs(g);
    let lo = lower_cycle_bounds(g, &scc);
    let hi = lower_cycle_bounds(&g.negated(), &scc);
    let bounds = lo
        .into_iter()
        .zip(hi)
        .map(|(l, h)| match (l, h) {
            (Some(lo), Some(h)) => Some(VertexCycleBounds { lo, hi: -h }),
            _ => None,
        })
        .collect();
    CycleBounds { bounds }
}

/// Cycle bounds over the full game graph (target self-loops included).
pub fn cycle_weight_bounds(game: &WeightedGame) -> CycleBounds {
    cycle_bounds_of(&full_graph(game))
}

fn coreachable(g: &Digraph, allowed: &[bool], v: usize) -> Vec<bool> {
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); g.n];
    for a in &g.arcs {
        if allowed[a.src] && allowed[a.dst] {
            rev[a.dst].push(a.src);
        }
    }
    let mut seen = vec![false; g.n];
    if !allowed[v] {
        return seen;
    }
    seen[v] = true;
    let mut stack = vec![v];
    while let Some(x) = stack.pop() {
        for &p in &rev[x] {
            if !seen[p] {
                seen[p] = true;
                stack.push(p);
            }
        }
    }
    seen
}

/// Unweighted shortest path (possibly empty) from `u` to `v` inside `allowed`.
fn bfs_path(g: &Digraph, allowed: &[bool], u: usize, v: usize) -> Option<Vec<usize>> {
    let mut pred: Vec<Option<usize>> = vec![None; g.n];
    let mut seen = vec![false; g.n];
    seen[u] = true;
    let mut queue = VecDeque::from([u]);
    while let Some(x) = queue.pop_front() {
        if x == v {
            let mut path = Vec::new();
            let mut cur = v;
            while cur != u {
                let a = pred[cur]?;
                path.push(a);
                cur = g.arcs[a].src;
            }
            path.reverse();
            return Some(path);
        }
        for &a in &g.out[x] {
            let y = g.arcs[a].dst;
            if allowed[y] && !seen[y] {
                seen[y] = true;
                pred[y] = Some(a);
                queue.push_back(y);
            }
        }
    }
    None
}

/// A walk of length ≥ 1 from `u` to `v` inside `allowed` with weight ≤ 0, as arc ids.
pub fn light_walk(g: &Digraph, allowed: &[bool], u: usize, v: usize) -> Option<Vec<usize>> {
    let mask = coreachable(g, allowed, v);
    if !mask[u] {
        return None;
    }
    let n = mask.iter().filter(|&&b| b).count();
    let mut dist: Vec<Option<i64>> = vec![None; g.n];
    let mut pred: Vec<Option<usize>> = vec![None; g.n];
    dist[u] = Some(0);
    let mut last_relaxed = None;
    for _ in 0..n {
        last_relaxed = None;
        for (id, a) in g.arcs.iter().enumerate() {
            if !(mask[a.src] && mask[a.dst]) {
                continue;
            }
            if let Some(ds) = dist[a.src] {
                let cand = ds + a.weight;
                if dist[a.dst].map_or(true, |dd| cand < dd) {
                    dist[a.dst] = Some(cand);
                    pred[a.dst] = Some(id);
                    last_relaxed = Some(a.dst);
                }
            }
        }
        if last_relaxed.is_none() {
            break;
        }
    }
    if let Some(x) = last_relaxed {
        // A negative cycle is reachable from u and reaches v: pump it.
        let mut y = x;
        for _ in 0..n {
            y = g.arcs[pred[y]?].src;
        }
        let mut cycle = Vec::new();
        let mut cur = y;
        loop {
            let a = pred[cur]?;
            cycle.push(a);
            cur = g.arcs[a].src;
            if cur == y {
                break;
            }
        }
        cycle.reverse();
        let c = g.walk_weight(&cycle);
        let head = bfs_path(g, &mask, u, y)?;
        let tail = bfs_path(g, &mask, y, v)?;
        let pq = g.walk_weight(&head) + g.walk_weight(&tail);
        let k = if pq > 0 { (pq + (-c) - 1) / (-c) } else { 1 }.max(1);
        let mut walk = head;
        for _ in 0..k {
            walk.extend_from_slice(&cycle);
        }
        walk.extend(tail);
        return Some(walk);
    }
    let mut best: Option<(i64, usize)> = None;
    for (id, a) in g.arcs.iter().enumerate() {
        if a.dst != v || !mask[a.src] {
            continue;
        }
        if let Some(ds) = dist[a.src] {
            let w = ds + a.weight;
            if best.map_or(true, |(bw, _)| w < bw) {
                best = Some((w, id));
            }
        }
    }
    let (w, last) = best?;
    if w > 0 {
        return None;
    }
    let mut walk = vec![last];
    let mut cur = g.arcs[last].src;
    while cur != u {
        let a = pred[cur]?;
        walk.push(a);
        cur = g.arcs[a].src;
    }
    walk.reverse();
    Some(walk)
}

/// A walk of length ≥ 1 from `u` to `v` inside `allowed` with weight ≥ 0.
pub fn heavy_walk(g: &Digraph, allowed: &[bool], u: usize, v: usize) -> Option<Vec<usize>> {
    light_walk(&g.negated(), allowed, u, v)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DivergenceWitness {
    pub vertex: VertexId,
    pub lo: ExtValue,
    pub hi: ExtValue,
    /// Edge ids of a cycle through `vertex` with weight ≤ 0.
    pub nonpositive: Option<Vec<EdgeId>>,
    /// Edge ids of a cycle through `vertex` with weight ≥ 0.
    pub nonnegative: Option<Vec<EdgeId>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DivergenceReport {
    pub divergent: bool,
    pub witness: Option<DivergenceWitness>,
}

/// Decides whether every cycle a play can follow has nonzero weight.
pub fn is_divergent_untimed(game: &WeightedGame) -> DivergenceReport {
    let g = play_graph(game);
    let bounds = cycle_bounds_of(&g);
    let zero = Extended::Fin(0);
    let bad = (0..g.n).find(|&v| bounds.bounds[v].is_some_and(|b| b.lo <= zero && zero <= b.hi));
    let Some(v) = bad else {
        return DivergenceReport { divergent: true, witness: None };
    };
    let b = bounds.bounds[v].expect("bounded vertex");
    let scc = sccs(&g);
    let c = scc.component_of[v];
    let mut allowed = vec![false; g.n];
    for &x in &scc.components[c] {
        allowed[x] = true;
    }
    let tags = |w: Vec<usize>| w.into_iter().map(|a| g.arc(a).tag).collect::<Vec<_>>();
    let witness = DivergenceWitness {
        vertex: v,
        lo: b.lo,
        hi: b.hi,
        nonpositive: light_walk(&g, &allowed, v, v).map(tags),
        nonnegative: heavy_walk(&g, &allowed, v, v).map(tags),
    };
    DivergenceReport { divergent: false, witness: Some(witness) }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("sampled cycle through {vertex} has weight 0: the game is not divergent")]
    ZeroCycle { vertex: usize },
    #[error("component is empty")]
    EmptyComponent,
}

/// Shortest (in arcs) cycle through `v` inside `allowed`.
pub fn shortest_cycle_through(g: &Digraph, allowed: &[bool], v: usize) -> Option<Vec<usize>> {
    let mut best: Option<Vec<usize>> = None;
    for &a in &g.out[v] {
        let y = g.arcs[a].dst;
        if !allowed[y] {
            continue;
        }
        if let Some(mut rest) = bfs_path(g, allowed, y, v) {
            rest.insert(0, a);
            if best.as_ref().map_or(true, |b| rest.len() < b.len()) {
                best = Some(rest);
            }
        }
    }
    best
}

/// Sign of a component of `g`, read off one internal cycle.
pub fn sign_of_component(g: &Digraph, component: &[usize]) -> Result<Sign, GraphError> {
    let &v = component.iter().min().ok_or(GraphError::EmptyComponent)?;
    let mut allowed = vec![false; g.n];
    for &x in component {
        allowed[x] = true;
    }
    let Some(cycle) = shortest_cycle_through(g, &allowed, v) else {
        return Ok(Sign::Positive);
    };
    match g.walk_weight(&cycle) {
        w if w > 0 => Ok(Sign::Positive),
        w if w < 0 => Ok(Sign::Negative),
        _ => Err(GraphError::ZeroCycle { vertex: v }),
    }
}

/// Sign of an SCC of a divergent game; edges leaving targets are ignored.
pub fn scc_sign(game: &WeightedGame, component: &[VertexId]) -> Result<Sign, GraphError> {
    sign_of_component(&play_graph(game), component)
}
