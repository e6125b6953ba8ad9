//! Corner-point abstraction: corner plays along region paths, their weight
//! intervals, folded orbit graphs, realization by concrete plays, and the timed
//! divergence test.

use std::collections::{BTreeSet, HashMap};

use num::{Signed, Zero};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::ext::Extended;
use crate::graph_analysis::{heavy_walk, light_walk, min_plus_closure, sccs, Digraph};
use crate::timed::{
    delay_interval, qi, region_of, ArcId, ClockValuation, Config, Corner, Interval, NodeId, Q, Region,
    RegionAutomaton, RegionId, RegionPath, TimedGame, TimedPlay, TimedTransition,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CornerError {
    #[error("no corner play follows the region path")]
    NoCornerPlay,
    #[error("region path is not a cycle")]
    NotACycle,
    #[error("corner play does not follow its region path")]
    Malformed,
    #[error("epsilon must lie in (0, 1/2]")]
    BadEpsilon,
    #[error("start valuation is not in the first region near the first corner")]
    BadStart,
    #[error("no realization at step {0}: epsilon too large for the regions involved")]
    NoRealization(usize),
}

/// Same game with `<` relaxed to `<=` and `>` to `>=`.
pub fn close_game(game: &TimedGame) -> TimedGame {
    let transitions = game
        .transitions()
        .iter()
        .map(|t| TimedTransition { guard: t.guard.closed(), ..t.clone() })
        .collect();
    game.with_transitions(transitions)
}

pub fn corners(r: &Region) -> Vec<Corner> {
    r.corners()
}

fn reset_corner(c: &[u32], t: &TimedTransition) -> Corner {
    c.iter().enumerate().map(|(x, &v)| if t.resets_clock(x) { 0 } else { v }).collect()
}

/// Wait `delay` time units from a corner up to a corner of `via`, then fire.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CornerStep {
    pub arc: ArcId,
    pub via: RegionId,
    pub delay: u32,
    pub next: Corner,
    pub weight: i64,
}

/// Every way to take RA arc `arc` from `corner`, ordered by `(via, delay)`.
pub fn corner_steps(game: &TimedGame, ra: &RegionAutomaton, arc: ArcId, corner: &[u32]) -> Vec<CornerStep> {
    let a = ra.arc(arc);
    let (s, _) = ra.node(a.src);
    let rate = game.state(s).rate;
    let t = game.transition(a.trans);
    let mut via = a.via.clone();
    via.sort_unstable();
    let mut out = Vec::new();
    for r2 in via {
        let region = ra.region(r2);
        for d in 0..=game.bound() + 1 {
            let moved: Corner = corner.iter().map(|&c| c + d).collect();
            if region.closure_contains(&moved) {
                out.push(CornerStep {
                    arc,
                    via: r2,
                    delay: d,
                    next: reset_corner(&moved, t),
                    weight: rate * d as i64 + t.weight,
                });
            }
        }
    }
    out
}

/// A corner play: a start corner and one step per arc of its region path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CornerPlay {
    pub path: RegionPath,
    pub start: Corner,
    pub steps: Vec<CornerStep>,
}

impl CornerPlay {
    pub fn weight(&self) -> i64 {
        self.steps.iter().map(|s| s.weight).sum()
    }

    pub fn end(&self) -> &Corner {
        self.steps.last().map_or(&self.start, |s| &s.next)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CycleSign {
    Positive,
    Negative,
    Neither,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SignReport {
    pub lo: i64,
    pub hi: i64,
    pub sign: CycleSign,
}

impl SignReport {
    fn new(lo: i64, hi: i64) -> SignReport {
        let sign = if lo >= 1 {
            CycleSign::Positive
        } else if hi <= -1 {
            CycleSign::Negative
        } else {
            CycleSign::Neither
        };
        SignReport { lo, hi, sign }
    }
}

/// Extremal corner-play weights along `path`.
pub fn path_weight_interval(game: &TimedGame, ra: &RegionAutomaton, path: &RegionPath) -> Result<SignReport, CornerError> {
    let (_, r0) = ra.node(path.start);
    let mut layer: HashMap<Corner, (i64, i64)> = ra.region(r0).corners().into_iter().map(|c| (c, (0, 0))).collect();
    for &arc in &path.arcs {
        let mut next: HashMap<Corner, (i64, i64)> = HashMap::new();
        for (c, (lo, hi)) in &layer {
            for st in corner_steps(game, ra, arc, c) {
                let e = next.entry(st.next).or_insert((i64::MAX, i64::MIN));
                e.0 = e.0.min(lo + st.weight);
                e.1 = e.1.max(hi + st.weight);
            }
        }
        layer = next;
    }
    let lo = layer.values().map(|v| v.0).min().ok_or(CornerError::NoCornerPlay)?;
    let hi = layer.values().map(|v| v.1).max().ok_or(CornerError::NoCornerPlay)?;
    Ok(SignReport::new(lo, hi))
}

/// Positive iff every play following the cycle weighs ≥ 1, Negative iff ≤ -1.
pub fn cycle_sign(game: &TimedGame, ra: &RegionAutomaton, cycle: &RegionPath) -> Result<SignReport, CornerError> {
    if !cycle.is_cycle(ra) {
        return Err(CornerError::NotACycle);
    }
    path_weight_interval(game, ra, cycle)
}

/// Lexicographically least corner play along `path` from `from` to `to`.
pub fn least_corner_play(
    game: &TimedGame,
    ra: &RegionAutomaton,
    path: &RegionPath,
    from: &[u32],
    to: &[u32],
) -> Option<CornerPlay> {
    let n = path.arcs.len();
    // alive[i]: corners at position i from which `to` is reachable.
    let mut alive: Vec<BTreeSet<Corner>> = vec![BTreeSet::new(); n + 1];
    alive[n].insert(to.to_vec());
    let nodes = path.nodes(ra);
    for i in (0..n).rev() {
        let (_, r) = ra.node(nodes[i]);
        for c in ra.region(r).corners() {
            if corner_steps(game, ra, path.arcs[i], &c).iter().any(|s| alive[i + 1].contains(&s.next)) {
                alive[i].insert(c);
            }
        }
    }
    if !alive[0].contains(from) {
        return None;
    }
    let mut cur = from.to_vec();
    let mut steps = Vec::with_capacity(n);
    for i in 0..n {
        let st = corner_steps(game, ra, path.arcs[i], &cur).into_iter().find(|s| alive[i + 1].contains(&s.next))?;
        cur = st.next.clone();
        steps.push(st);
    }
    Some(CornerPlay { path: path.clone(), start: from.to_vec(), steps })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FogEdge {
    pub from: usize,
    pub to: usize,
    pub weight: i64,
    pub play: CornerPlay,
}

/// Folded orbit graph of a region cycle: corners of its first region, with an
/// edge wherever a corner play along the cycle connects two corners.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fog {
    pub cycle: RegionPath,
    pub corners: Vec<Corner>,
    pub edges: Vec<FogEdge>,
}

pub fn build_fog(game: &TimedGame, ra: &RegionAutomaton, cycle: &RegionPath) -> Result<Fog, CornerError> {
    if !cycle.is_cycle(ra) {
        return Err(CornerError::NotACycle);
    }
    let (_, r) = ra.node(cycle.start);
    let cs = ra.region(r).corners();
    let mut edges = Vec::new();
    for (i, c) in cs.iter().enumerate() {
        for (j, c2) in cs.iter().enumerate() {
            if let Some(play) = least_corner_play(game, ra, cycle, c, c2) {
                edges.push(FogEdge { from: i, to: j, weight: play.weight(), play });
            }
        }
    }
    Ok(Fog { cycle: cycle.clone(), corners: cs, edges })
}

/// A concrete play shadowing a corner play.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealizedPlay {
    pub play: TimedPlay,
    pub weight: Q,
    pub corner_weight: i64,
}

fn within(v: &[Q], c: &[u32], eps: &Q) -> bool {
    v.iter().zip(c).all(|(x, &k)| (x - qi(k as i64)).abs() < *eps)
}

/// Builds a timed play following `play.path` whose valuations stay within `eps`
/// of the corners; its weight differs from the corner weight by at most
/// `2 eps |path| W`. Without `start`, a point on the segment from the first
/// corner towards the region's representative is used.
pub fn realize_corner_play(
    game: &TimedGame,
    ra: &RegionAutomaton,
    play: &CornerPlay,
    eps: &Q,
    start: Option<ClockValuation>,
) -> Result<RealizedPlay, CornerError> {
    if !eps.is_positive() || *eps > crate::timed::q(1, 2) {
        return Err(CornerError::BadEpsilon);
    }
    if play.steps.len() != play.path.arcs.len() {
        return Err(CornerError::Malformed);
    }
    let (s0, r0) = ra.node(play.path.start);
    let region0 = ra.region(r0);
    let mut v: ClockValuation = match start {
        Some(v) => v,
        None => {
            let t = eps / qi(2);
            region0
                .representative()
                .iter()
                .zip(&play.start)
                .map(|(rep, &c)| {
                    let c = qi(c as i64);
                    &c + &t * (rep - &c)
                })
                .collect()
        }
    };
    if !region0.contains(&v, game.bound()) || !within(&v, &play.start, eps) {
        return Err(CornerError::BadStart);
    }
    let start_cfg = Config { state: s0, valuation: v.clone() };
    let mut steps = Vec::new();
    let mut corner = play.start.clone();
    for (i, st) in play.steps.iter().enumerate() {
        if st.arc != play.path.arcs[i] {
            return Err(CornerError::Malformed);
        }
        let a = ra.arc(st.arc);
        let target = ra.region(st.via);
        let moved: Corner = corner.iter().map(|&c| c + st.delay).collect();
        let mut iv = delay_interval(&v, target);
        for (x, &k) in v.iter().zip(&moved) {
            let k = qi(k as i64);
            iv = iv.intersect(&Interval::open(&k - eps - x, &k + eps - x));
        }
        let d = iv.pick().ok_or(CornerError::NoRealization(i))?;
        let t = game.transition(a.trans);
        let landed: ClockValuation = v.iter().map(|x| x + &d).collect();
        if !target.contains(&landed, game.bound()) {
            return Err(CornerError::NoRealization(i));
        }
        v = landed
            .into_iter()
            .enumerate()
            .map(|(x, val)| if t.resets_clock(x) { Q::zero() } else { val })
            .collect();
        corner = st.next.clone();
        steps.push((d, a.trans));
    }
    let timed = TimedPlay { start: start_cfg, steps };
    let (_, weight) = timed.run(game).map_err(|_| CornerError::Malformed)?;
    Ok(RealizedPlay { play: timed, weight, corner_weight: play.weight() })
}

/// A random concrete play following `path` from a random valuation of its first region.
pub fn sample_play<R: Rng>(game: &TimedGame, ra: &RegionAutomaton, path: &RegionPath, rng: &mut R) -> Option<TimedPlay> {
    let (s0, r0) = ra.node(path.start);
    let mut v = random_point(ra.region(r0), rng);
    let start = Config { state: s0, valuation: v.clone() };
    let mut steps = Vec::new();
    for &arc in &path.arcs {
        let a = ra.arc(arc);
        let options: Vec<Interval> = a
            .via
            .iter()
            .map(|&r| delay_interval(&v, ra.region(r)))
            .filter(|iv| !iv.is_empty())
            .collect();
        if options.is_empty() {
            return None;
        }
        let iv = &options[rng.gen_range(0..options.len())];
        let d = if iv.lo == iv.hi {
            iv.lo.clone()
        } else {
            let t = crate::timed::q(rng.gen_range(1..100), 100);
            &iv.lo + t * (&iv.hi - &iv.lo)
        };
        let t = game.transition(a.trans);
        v = v
            .iter()
            .enumerate()
            .map(|(x, val)| if t.resets_clock(x) { Q::zero() } else { val + &d })
            .collect();
        steps.push((d, a.trans));
    }
    Some(TimedPlay { start, steps })
}

/// A random valuation of `r`, respecting the order of fractional parts.
pub fn random_point<R: Rng>(r: &Region, rng: &mut R) -> ClockValuation {
    let m = r.classes.len();
    let mut cuts: Vec<i64> = (0..m).map(|_| rng.gen_range(1..1000)).collect();
    cuts.sort_unstable();
    cuts.dedup();
    while cuts.len() < m {
        cuts.push(cuts.last().copied().unwrap_or(0) + 1);
    }
    let denom = cuts.last().copied().unwrap_or(0) + 1;
    (0..r.num_clocks())
        .map(|c| {
            let base = qi(r.ints[c] as i64);
            match r.class_of(c) {
                Some(i) => base + crate::timed::q(cuts[i], denom),
                None => base,
            }
        })
        .collect()
}

/// Corner-level view of the whole region automaton.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CornerGraph {
    /// `(region node, corner)`.
    pub nodes: Vec<(NodeId, Corner)>,
    pub arcs: Vec<CornerArc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CornerArc {
    pub src: usize,
    pub dst: usize,
    pub weight: i64,
    pub kind: CornerArcKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CornerArcKind {
    Delay { delay: u32 },
    Transition { trans: usize },
}

pub fn build_corner_graph(game: &TimedGame, ra: &RegionAutomaton) -> CornerGraph {
    let mut nodes = Vec::new();
    let mut index: HashMap<(NodeId, Corner), usize> = HashMap::new();
    for n in 0..ra.num_nodes() {
        let (_, r) = ra.node(n);
        for c in ra.region(r).corners() {
            index.insert((n, c.clone()), nodes.len());
            nodes.push((n, c));
        }
    }
    let mut arcs = BTreeSet::new();
    for (i, (n, c)) in nodes.iter().enumerate() {
        let (s, r) = ra.node(*n);
        let rate = game.state(s).rate;
        for succ in ra.region(r).time_successors(game.bound()) {
            let r2 = ra.region_id(&succ).expect("enumerated");
            for d in 0..=game.bound() + 1 {
                let moved: Corner = c.iter().map(|&x| x + d).collect();
                if (r2 != r || d > 0) && succ.closure_contains(&moved) {
                    let j = index[&(ra.node_id(s, r2), moved)];
                    arcs.insert((i, j, rate * d as i64, CornerKey::Delay(d)));
                }
            }
        }
    }
    for a in ra.arcs() {
        let (s, _) = ra.node(a.src);
        let (s2, _) = ra.node(a.dst);
        let t = game.transition(a.trans);
        for &r2 in &a.via {
            let src_node = ra.node_id(s, r2);
            for c in ra.region(r2).corners() {
                let i = index[&(src_node, c.clone())];
                let j = index[&(ra.node_id(s2, ra.node(a.dst).1), reset_corner(&c, t))];
                arcs.insert((i, j, t.weight, CornerKey::Trans(a.trans)));
            }
        }
    }
    let arcs = arcs
        .into_iter()
        .map(|(src, dst, weight, k)| CornerArc {
            src,
            dst,
            weight,
            kind: match k {
                CornerKey::Delay(delay) => CornerArcKind::Delay { delay },
                CornerKey::Trans(trans) => CornerArcKind::Transition { trans },
            },
        })
        .collect();
    CornerGraph { nodes, arcs }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum CornerKey {
    Delay(u32),
    Trans(usize),
}

/// `(region node, corner)` pairs joined by whole corner steps, restricted to arcs
/// inside one SCC of the region automaton and not leaving a target.
struct MacroGraph {
    nodes: Vec<(NodeId, Corner)>,
    graph: Digraph,
    steps: Vec<CornerStep>,
}

fn macro_graph(game: &TimedGame, ra: &RegionAutomaton, comp_of: &[usize]) -> MacroGraph {
    let mut nodes = Vec::new();
    let mut index: HashMap<(NodeId, Corner), usize> = HashMap::new();
    for n in 0..ra.num_nodes() {
        let (_, r) = ra.node(n);
        for c in ra.region(r).corners() {
            index.insert((n, c.clone()), nodes.len());
            nodes.push((n, c));
        }
    }
    let mut graph = Digraph::new(nodes.len());
    let mut steps = Vec::new();
    for (id, a) in ra.arcs().iter().enumerate() {
        if ra.is_target(a.src) || comp_of[a.src] != comp_of[a.dst] {
            continue;
        }
        let (_, r) = ra.node(a.src);
        for c in ra.region(r).corners() {
            let i = index[&(a.src, c.clone())];
            for st in corner_steps(game, ra, id, &c) {
                let j = index[&(a.dst, st.next.clone())];
                graph.add_arc(i, j, st.weight, steps.len());
                steps.push(st);
            }
        }
    }
    MacroGraph { nodes, graph, steps }
}

/// A corner play along a cycle of the region automaton, returning to the same
/// region node (possibly at another corner).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CornerWalk {
    pub start: (NodeId, Corner),
    pub steps: Vec<CornerStep>,
    pub weight: i64,
}

impl CornerWalk {
    pub fn region_path(&self, ra: &RegionAutomaton) -> RegionPath {
        let _ = ra;
        RegionPath { start: self.start.0, arcs: self.steps.iter().map(|s| s.arc).collect() }
    }

    pub fn corner_play(&self, ra: &RegionAutomaton) -> CornerPlay {
        CornerPlay { path: self.region_path(ra), start: self.start.1.clone(), steps: self.steps.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TimedWitness {
    /// The SCC of the region automaton holding both cycles.
    pub scc: Vec<NodeId>,
    pub nonpositive: CornerWalk,
    pub nonnegative: CornerWalk,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TimedDivergence {
    pub divergent: bool,
    pub witness: Option<TimedWitness>,
}

/// Every play following a cycle of the region automaton weighs ≤ -1 or ≥ 1.
pub fn is_divergent_timed(game: &TimedGame) -> TimedDivergence {
    let ra = RegionAutomaton::build(game);
    is_divergent_timed_with(game, &ra)
}

pub fn is_divergent_timed_with(game: &TimedGame, ra: &RegionAutomaton) -> TimedDivergence {
    let rg = ra.play_digraph();
    let scc = sccs(&rg);
    let mg = macro_graph(game, ra, &scc.component_of);
    let mut local = vec![usize::MAX; mg.nodes.len()];
    let mut by_comp: Vec<Vec<usize>> = vec![Vec::new(); scc.components.len()];
    for (i, (n, _)) in mg.nodes.iter().enumerate() {
        by_comp[scc.component_of[*n]].push(i);
    }
    let neg = mg.graph.negated();
    for (c, members) in by_comp.iter().enumerate() {
        if scc.is_trivial(&rg, c) {
            continue;
        }
        for (i, &m) in members.iter().enumerate() {
            local[m] = i;
        }
        let dmin = min_plus_closure(&mg.graph, members, &local);
        let dmax = min_plus_closure(&neg, members, &local);
        let zero = Extended::Fin(0);
        let find = |d: &Vec<Vec<Extended<i64>>>| {
            for (i, &a) in members.iter().enumerate() {
                for (j, &b) in members.iter().enumerate() {
                    if mg.nodes[a].0 == mg.nodes[b].0 && d[i][j] <= zero {
                        return Some((a, b));
                    }
                }
            }
            None
        };
        let (Some(np), Some(nn)) = (find(&dmin), find(&dmax)) else {
            for &m in members {
                local[m] = usize::MAX;
            }
            continue;
        };
        let mut allowed = vec![false; mg.nodes.len()];
        for &m in members {
            allowed[m] = true;
        }
        let walk = |w: Vec<usize>, from: usize| {
            let steps: Vec<CornerStep> = w.iter().map(|&a| mg.steps[mg.graph.arc(a).tag].clone()).collect();
            let weight = steps.iter().map(|s| s.weight).sum();
            CornerWalk { start: mg.nodes[from].clone(), steps, weight }
        };
        let lw = light_walk(&mg.graph, &allowed, np.0, np.1).expect("closure entry has a walk");
        let hw = heavy_walk(&mg.graph, &allowed, nn.0, nn.1).expect("closure entry has a walk");
        return TimedDivergence {
            divergent: false,
            witness: Some(TimedWitness {
                scc: scc.components[c].clone(),
                nonpositive: walk(lw, np.0),
                nonnegative: walk(hw, nn.0),
            }),
        };
    }
    TimedDivergence { divergent: true, witness: None }
}

/// Some simple cycle of the region automaton inside `component` (shortest from its
/// smallest node), or `None` for a trivial component.
pub fn simple_cycle_in(ra: &RegionAutomaton, component: &[NodeId]) -> Option<RegionPath> {
    let rg = ra.play_digraph();
    let mut allowed = vec![false; ra.num_nodes()];
    for &n in component {
        allowed[n] = true;
    }
    let start = *component.iter().min()?;
    let cycle = crate::graph_analysis::shortest_cycle_through(&rg, &allowed, start)?;
    Some(RegionPath { start, arcs: cycle.into_iter().map(|a| rg.arc(a).tag).collect() })
}

/// The region of a valuation, re-exported for callers working with corners.
pub fn region_containing(v: &[Q], bound: u32) -> Option<Region> {
    region_of(v, bound).ok()
}
